"""Unit-disk checks: zero sums of analytic test functions, and the Joukowski map.

Test functions are normalized so that |f(0)| = 1:

    f(z) = prod_k [ (a_k - z) / (1 - conj(a_k) z) / a_k ]^{m_k}
           * exp( sum_j w_j [(zeta_j + z)/(zeta_j - z) - 1] )

with zeros a_k in D \\ {0} and atoms zeta_j on the unit circle.  Positive
weights make f grow towards zeta_j; negative ones keep it bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bands import BandSet, WeightedPointSet, dist_to_bands, dist_to_edges, positive_part
from .errors import DomainError, InputError

CERTIFICATE_SAMPLES = 10_000


@dataclass(frozen=True)
class GrowthCertificate:
    """log|f(z)| <= K |z|^s / (d(z,T)^p' d(z,I)^q') on the disk."""

    K: float
    p: float = 0.0
    q: float = 0.0
    s: float = 0.0
    selected: tuple = ()

    def bound(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.K * np.abs(z) ** self.s / (1.0 - np.abs(z)) ** self.p
        if self.q:
            out = out / dist_to_set(z, self.selected) ** self.q
        return out

    def to_json(self):
        return {"K": self.K, "p": self.p, "q": self.q, "s": self.s,
                "selected": [[float(np.real(c)), float(np.imag(c))] for c in self.selected]}


def dist_to_set(z, pts):
    z = np.asarray(z, dtype=complex)
    if not len(pts):
        return np.full(z.shape, np.inf)
    return np.abs(z[..., None] - np.asarray(pts, dtype=complex)).min(axis=-1)


@dataclass(frozen=True)
class DiskFunctionSpec:
    zeros: WeightedPointSet
    atoms: tuple = ()
    weights: tuple = ()
    certificate: GrowthCertificate | None = None

    def __post_init__(self):
        pts = self.zeros.points
        if len(pts) and (np.any(np.abs(pts) >= 1) or np.any(pts == 0)):
            raise InputError("zeros must lie in the punctured open unit disk")
        if len(self.atoms) != len(self.weights):
            raise InputError("each atom needs exactly one weight")
        if any(abs(abs(complex(c)) - 1.0) > 1e-12 for c in self.atoms):
            raise InputError("atoms must lie on the unit circle")
        if self.certificate is None:
            object.__setattr__(self, "certificate", default_certificate(self))

    @property
    def kind(self):
        if not len(self.atoms):
            return "blaschke-product"
        if not len(self.zeros):
            return "singular-exponential"
        return "product-of-both"

    @classmethod
    def blaschke(cls, zeros, multiplicities=None):
        zeros = np.asarray(zeros, dtype=complex)
        mult = np.ones(len(zeros), int) if multiplicities is None else multiplicities
        return cls(WeightedPointSet(zeros, mult))

    def power(self, m):
        """Spec of f**m (zeros repeated, weights and K scaled by m)."""
        cert = self.certificate
        cert = GrowthCertificate(cert.K * m, cert.p, cert.q, cert.s, cert.selected)
        return DiskFunctionSpec(self.zeros.scaled_multiplicity(m), self.atoms,
                                tuple(m * w for w in self.weights), cert)

    def log_modulus(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape)
        with np.errstate(divide="ignore"):
            for a, m in zip(self.zeros.points, self.zeros.multiplicities):
                out += m * (np.log(np.abs(a - z)) - np.log(np.abs(1 - np.conj(a) * z)) - np.log(abs(a)))
        for c, w in zip(self.atoms, self.weights):
            out += w * (np.real((c + z) / (c - z)) - 1.0)
        return out


def default_certificate(spec):
    kb = float(sum(-m * math.log(abs(a)) for a, m in zip(spec.zeros.points, spec.zeros.multiplicities)))
    k0 = kb + sum(-w for w in spec.weights if w < 0)
    grow = [(c, w) for c, w in zip(spec.atoms, spec.weights) if w > 0]
    if not grow:
        return GrowthCertificate(k0)
    # (1-|z|^2)/|zeta-z|^2 <= 2/|zeta-z| and d(z, I) <= 2
    w_plus = sum(w for _, w in grow)
    return GrowthCertificate(2 * k0 + 2 * w_plus, 0.0, 1.0, 0.0, tuple(complex(c) for c, _ in grow))


def certificate_grid(selected=(), n=CERTIFICATE_SAMPLES, rmax=1 - 1e-3):
    """About ``n`` sample points: a polar grid plus rings around selected points."""
    n_sel = len(selected)
    n_main = n if not n_sel else n // 2
    nr = max(4, int(math.sqrt(n_main)))
    nt = max(4, n_main // nr)
    r = np.linspace(0.0, rmax, nr)
    t = 2 * np.pi * (np.arange(nt) + 0.5) / nt
    pts = [np.outer(r, np.exp(1j * t)).ravel()]
    for c in selected:
        k = (n - n_main) // n_sel
        rr = np.geomspace(1e-4, 0.5, max(2, int(math.sqrt(k))))
        tt = np.linspace(0, 2 * np.pi, max(2, k // len(rr)), endpoint=False)
        ring = complex(c) * (1 - np.outer(rr, np.exp(1j * tt)).ravel())
        pts.append(ring[np.abs(ring) < 1])
    return np.concatenate(pts)


def check_certificate(spec, n=CERTIFICATE_SAMPLES):
    """Largest violation of the growth certificate on a sample grid (<= 0 is valid)."""
    cert = spec.certificate
    z = certificate_grid(cert.selected or spec.atoms, n)
    z = z[(np.abs(z) < 1) & (dist_to_set(z, cert.selected) > 0)]
    lhs = spec.log_modulus(z)
    rhs = cert.bound(z)
    return float(np.max(lhs - rhs - 1e-9 * (1 + np.abs(rhs))))


@dataclass
class DiskReport:
    kind: str
    eps: float
    value: float
    K: float
    ratio: float
    passed: bool
    per_term_ok: bool | None
    certificate_slack: float

    def to_json(self):
        return dict(self.__dict__)


def disk_sum(zeros, p, q, s, eps, selected=()):
    """sum m (1-|z|)^(p+1+eps) d(z,I)^((q-1+eps)_+) / |z|^((s-1+eps)_+)."""
    if not 0 < eps < 1:
        raise InputError(f"eps must lie in (0, 1), got {eps}")
    pts, mult = zeros.points, zeros.multiplicities
    if not len(pts):
        return 0.0, np.zeros(0)
    if np.any(np.abs(pts) >= 1):
        raise DomainError("zeros must lie inside the unit disk")
    ex_s = positive_part(s - 1 + eps)
    ex_q = positive_part(q - 1 + eps)
    if ex_s > 0 and np.any(pts == 0):
        raise DomainError("zero at the origin with a positive |z| exponent", 0j)
    if ex_q > 0 and not len(selected):
        raise InputError("a positive distance exponent needs a nonempty selected set I")
    terms = mult * (1 - np.abs(pts)) ** (p + 1 + eps)
    if ex_q > 0:
        terms = terms * dist_to_set(pts, selected) ** ex_q
    if ex_s > 0:
        terms = terms / np.abs(pts) ** ex_s
    return math.fsum(terms), terms


def verify_disk_theorem(spec, eps):
    """Zero sum against the growth constant K of the certificate.

    For pure Blaschke products each term (1-|a|)^(1+eps) is checked against
    its own share log(1/|a|) of K, i.e. the inequality holds with C = 1.
    """
    slack = check_certificate(spec)
    if slack > 0:
        raise InputError(f"spec violates its own growth certificate by {slack:.3g}")
    cert = spec.certificate
    value, terms = disk_sum(spec.zeros, cert.p, cert.q, cert.s, eps, cert.selected)
    per_term = None
    if spec.kind == "blaschke-product":
        pts, mult = spec.zeros.points, spec.zeros.multiplicities
        per_term = bool(np.all(terms <= -mult * np.log(np.abs(pts)))) if len(pts) else True
    ratio = value / cert.K if cert.K > 0 else (0.0 if value == 0 else math.inf)
    passed = math.isfinite(ratio) and (per_term is not False)
    if spec.kind == "blaschke-product":
        passed = passed and value <= cert.K
    return DiskReport(spec.kind, eps, value, cert.K, ratio, passed, per_term, slack)


def random_blaschke(rng, max_zeros=20):
    k = int(rng.integers(1, max_zeros + 1))
    r = 1 - 10 ** rng.uniform(-4, -0.05, size=k)
    z = r * np.exp(2j * np.pi * rng.random(k))
    return DiskFunctionSpec.blaschke(z)


# --------------------------------------------------------------------------
# single-band covering map
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class JoukowskiMap:
    """lam(w) = (alpha+beta)/2 + c (w + 1/w), c = (beta-alpha)/4; D\\{0} -> C \\ [alpha, beta]."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise InputError("need alpha < beta")

    @property
    def capacity(self):
        return (self.beta - self.alpha) / 4.0

    @property
    def bands(self):
        return BandSet((self.alpha, self.beta))

    def forward(self, w):
        w = np.asarray(w, dtype=complex)
        if np.any(w == 0):
            raise DomainError("w = 0 maps to infinity", 0j)
        out = 0.5 * (self.alpha + self.beta) + self.capacity * (w + 1.0 / w)
        return out if out.ndim else complex(out)


def polar_grid(n_r=200, n_theta=200, r0=0.05, r1=0.999):
    r = np.linspace(r0, r1, n_r)
    t = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    return np.outer(r, np.exp(1j * t)).ravel()


def joukowski_ratios(jmap, grid):
    """Ratios r1 = d(l,e)|w|/d(w,{+-1})^2 and r2 = d(l,E)|w|/(d(w,T) d(w,{+-1}))."""
    w = np.asarray(grid, dtype=complex)
    if np.any(np.isclose(w, 1.0, atol=0, rtol=0) | np.isclose(w, -1.0, atol=0, rtol=0)):
        raise DomainError("grid contains a preimage of a band edge (w = +-1)")
    if np.any(np.abs(w) >= 1) or np.any(w == 0):
        raise DomainError("grid must lie in the punctured open unit disk")
    lam = jmap.forward(w)
    dv = np.minimum(np.abs(w - 1), np.abs(w + 1))
    r1 = dist_to_edges(lam, jmap.bands) * np.abs(w) / dv ** 2
    r2 = dist_to_bands(lam, jmap.bands) * np.abs(w) / ((1 - np.abs(w)) * dv)
    return w, lam, r1, r2


def ratio_stats(r, bins=20):
    hist, edges = np.histogram(np.log10(r), bins=bins)
    return {"min": float(r.min()), "max": float(r.max()),
            "hist_log10_edges": edges.tolist(), "hist_counts": hist.tolist()}
