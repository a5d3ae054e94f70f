"""Band sets, distances and the distance-weighted zero/eigenvalue sums."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGapError, DomainError, InputError

# relative band-membership tolerance for zero/eigenvalue sums
MEMBERSHIP_RTOL = 1e-9


@dataclass(frozen=True)
class BandSet:
    """Finite union of disjoint closed intervals [alpha_j, beta_j].

    ``edges`` is the flat sorted sequence alpha_1 < beta_1 < ... < beta_{n+1}.
    """

    edges: tuple

    def __post_init__(self):
        e = tuple(float(x) for x in self.edges)
        if len(e) < 2 or len(e) % 2:
            raise InputError(f"need an even, nonzero number of edges, got {len(e)}")
        if not all(math.isfinite(x) for x in e):
            raise InputError("band edges must be finite")
        for i in range(len(e) - 1):
            if not e[i] < e[i + 1]:
                if i % 2 and e[i] == e[i + 1]:
                    raise DegenerateGapError(
                        f"closed gap at {e[i]!r}: merge the bands on either side first")
                raise InputError(f"edges must be strictly increasing (edge {i}: {e[i]!r} >= {e[i + 1]!r})")
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_intervals(cls, intervals):
        return cls(tuple(x for iv in intervals for x in iv))

    @property
    def intervals(self):
        e = self.edges
        return [(e[2 * j], e[2 * j + 1]) for j in range(len(e) // 2)]

    @property
    def n_bands(self):
        return len(self.edges) // 2

    @property
    def span(self):
        return self.edges[-1] - self.edges[0]

    @property
    def gaps(self):
        e = self.edges
        return [(e[2 * j + 1], e[2 * j + 2]) for j in range(self.n_bands - 1)]

    @property
    def membership_tol(self):
        return MEMBERSHIP_RTOL * self.span

    def gap_scale(self):
        """Length scale for pollution filtering: the narrowest gap, capped at 1."""
        widths = [g1 - g0 for g0, g1 in self.gaps]
        return min([1.0] + widths)

    def scaled(self, t):
        if t <= 0:
            raise InputError("scale factor must be positive")
        return BandSet(tuple(t * x for x in self.edges))

    def to_json(self):
        return {"edges": list(self.edges)}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or "edges" not in obj:
            raise InputError('band set JSON must be an object with an "edges" array')
        return cls(tuple(obj["edges"]))


def dist_to_bands(lam, bands):
    """Euclidean distance from ``lam`` (scalar or array) to the band set."""
    z = np.asarray(lam, dtype=complex)
    x, y = z.real, np.abs(z.imag)
    best = np.full(z.shape, np.inf)
    for a, b in bands.intervals:
        dx = np.maximum(np.maximum(a - x, x - b), 0.0)
        best = np.minimum(best, np.hypot(dx, y))
    return best if best.ndim else float(best)


def dist_to_edges(lam, bands):
    z = np.asarray(lam, dtype=complex)
    e = np.asarray(bands.edges)
    # hypot, as in dist_to_bands, so the two agree bitwise when an edge is nearest
    d = np.hypot(z.real[..., None] - e, z.imag[..., None]).min(axis=-1)
    return d if d.ndim else float(d)


def positive_part(x):
    return x if x > 0 else 0.0


@dataclass(frozen=True)
class ExponentParams:
    p: float
    q: float
    eps: float
    a: float
    b: float

    @property
    def s(self):
        """Exponent p + 1 + eps of d(l, E), correctly rounded."""
        return math.fsum((self.p, 1.0, self.eps))

    def to_json(self):
        return {"p": self.p, "q": self.q, "eps": self.eps, "a": self.a, "b": self.b}


def exponents(p, q, eps):
    """Edge and infinity exponents (a, b) of the general zero-sum functional.

    a = ((p+2q-1+eps)_+ - (p+1+eps)) / 2
    b = (p+q-1+eps)_+ - ((p+2q-1+eps)_+ + p+1+eps) / 2

    Each branch of the positive parts is returned in its simplified form
    (e.g. a = q - 1), so reduced functionals agree with the general one bit
    for bit.
    """
    p, q, eps = float(p), float(q), float(eps)
    if p < 0 or q < 0:
        raise InputError(f"p and q must be nonnegative (p={p}, q={q})")
    if not 0.0 < eps < 1.0:
        raise InputError(f"eps must lie in (0, 1), got {eps}")
    # signs of the positive-part arguments, decided exactly
    r_pos = math.fsum((p, q, q, -1.0, eps)) > 0
    u_pos = math.fsum((p, q, -1.0, eps)) > 0
    if not r_pos:
        a = b = -math.fsum((p, 1.0, eps)) / 2.0
    elif u_pos:
        a, b = q - 1.0, -1.0
    else:
        a, b = q - 1.0, -math.fsum((p, q, eps))
    return ExponentParams(p, q, eps, a, b)


@dataclass(frozen=True)
class WeightedPointSet:
    """Points of the complex plane with positive integer multiplicities."""

    points: np.ndarray
    multiplicities: np.ndarray

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=complex))
        mult = np.atleast_1d(np.asarray(self.multiplicities))
        if pts.shape != mult.shape or pts.ndim != 1:
            raise InputError("points and multiplicities must be 1-d arrays of equal length")
        if mult.size and (np.any(mult != np.round(mult)) or np.any(mult < 1)):
            raise InputError("multiplicities must be positive integers")
        pts.flags.writeable = False
        mult = mult.astype(np.int64)
        mult.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "multiplicities", mult)

    @classmethod
    def of(cls, pairs=()):
        pairs = list(pairs)
        if not pairs:
            return cls(np.zeros(0, complex), np.zeros(0, np.int64))
        pts, mult = zip(*pairs)
        return cls(np.array(pts, dtype=complex), np.array(mult))

    @classmethod
    def empty(cls):
        return cls.of()

    def __len__(self):
        return len(self.points)

    def scaled_multiplicity(self, k):
        return WeightedPointSet(self.points, self.multiplicities * int(k))

    def conjugate(self):
        return WeightedPointSet(self.points.conj(), self.multiplicities)

    def check_outside(self, bands, tol=None):
        tol = bands.membership_tol if tol is None else tol
        if not len(self):
            return
        d = np.atleast_1d(dist_to_bands(self.points, bands))
        bad = np.flatnonzero(d <= tol)
        if bad.size:
            z = complex(self.points[bad[0]])
            raise DomainError(f"point {z!r} lies on the band set (distance {d[bad[0]]:.3g} <= {tol:.3g})", z)


@dataclass
class SumReport:
    """Value and per-point breakdown of one sum functional."""

    functional: str
    params: dict
    value: float
    points: np.ndarray
    multiplicities: np.ndarray
    terms: np.ndarray
    bound_side: float | None = None
    ratio: float | None = None
    flags: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def with_bound(self, bound_side):
        self.bound_side = None if bound_side is None else float(bound_side)
        if self.bound_side is None:
            self.ratio = None
        elif self.bound_side > 0:
            self.ratio = self.value / self.bound_side
        else:
            self.ratio = 0.0 if self.value == 0 else math.inf
        return self

    def to_json(self):
        return {
            "functional": self.functional,
            "params": self.params,
            "value": self.value,
            "bound_side": self.bound_side,
            "ratio": self.ratio,
            "flags": list(self.flags),
            "terms": [
                {"re": float(z.real), "im": float(z.imag), "mult": int(m), "term": float(t)}
                for z, m, t in zip(self.points, self.multiplicities, self.terms)
            ],
            **self.extra,
        }

    def csv_rows(self):
        """Rows ``(lambda_re, lambda_im, mult, term)``."""
        return [(float(z.real), float(z.imag), int(m), float(t))
                for z, m, t in zip(self.points, self.multiplicities, self.terms)]


def _weighted_sum(name, params, zs, bands, a, b, bound=None, flags=()):
    """sum mult * d(l,E)^s * d(l,edges)^a * (1+|l|)^b, s = p+1+eps."""
    zs.check_outside(bands)
    pts = zs.points
    if len(pts):
        dist_b = np.atleast_1d(dist_to_bands(pts, bands))
        dist_e = np.atleast_1d(dist_to_edges(pts, bands))
        terms = zs.multiplicities * (dist_b ** params.s * dist_e ** a * (1.0 + np.abs(pts)) ** b)
    else:
        terms = np.zeros(0)
    report = SumReport(name, params.to_json(), math.fsum(terms), pts, zs.multiplicities,
                       np.asarray(terms, dtype=float), flags=list(flags))
    return report.with_bound(bound)


def sum_general(zs, bands, params, bound=None):
    """sum mult * d(l,E)^(p+1+eps) * d(l,edges)^a * (1+|l|)^b over the points."""
    return _weighted_sum("general", params, zs, bands, params.a, params.b, bound)


def sum_corollary(zs, bands, p, q, eps, bound=None):
    """Reduced functional for p + q >= 1: edge exponent q-1, infinity exponent -1."""
    params = exponents(p, q, eps)
    if params.p + params.q < 1.0:
        raise InputError(f"reduced functional needs p+q >= 1 (p={p}, q={q})")
    return _weighted_sum("corollary", params, zs, bands, params.q - 1.0, -1.0, bound)


def sum_lt_high(zs, bands, p, eps, bound=None):
    """d(l,E)^(p+1+eps) / (d(l,edges)(1+|l|)) summed; needs p >= 1."""
    params = exponents(p, 0.0, eps)
    if params.p < 1.0:
        raise InputError(f"high-regime functional needs p >= 1, got {p}")
    return _weighted_sum("lt_high", params, zs, bands, -1.0, -1.0, bound)


def sum_lt_low(zs, bands, p, eps, bound=None):
    """Low-regime functional (p < 1): denominator (d(l,edges)(1+|l|))^((p+1+eps)/2).

    When p < 1 < p + eps the general exponents already reduce to the
    stronger (-1, -1) pair; the report carries a flag instead of switching.
    """
    params = exponents(p, 0.0, eps)
    if params.p >= 1.0:
        raise InputError(f"low-regime functional needs p < 1, got {p}")
    flags = []
    if params.p + params.eps > 1.0:
        flags.append("p<1<p+eps: general exponents give the stronger (-1,-1) weights")
    half = -params.s / 2.0
    return _weighted_sum("lt_low", params, zs, bands, half, half, bound, flags)


def single_band_equiv_ratio(lam, alpha, beta):
    """d(l,{alpha,beta}) (1+|l|) / |(l-alpha)(l-beta)|; vectorised over ``lam``."""
    z = np.asarray(lam, dtype=complex)
    da, db = np.abs(z - alpha), np.abs(z - beta)
    if np.any((da == 0) | (db == 0)):
        raise DomainError("ratio has a pole at a band edge", complex(np.ravel(z)[np.argmin(np.minimum(da, db))]))
    r = np.minimum(da, db) * (1.0 + np.abs(z)) / (da * db)
    return r if r.ndim else float(r)


def single_band_ratio_scan(alpha, beta, radius=1e4, n_radial=400, n_angle=256, edge_radius=1e-6):
    """Grid estimate of inf/sup of :func:`single_band_equiv_ratio` over |l| <= radius.

    The grid combines a log-polar grid about the band centre with log-polar
    rings about each edge (the edges themselves are excluded).
    """
    c = 0.5 * (alpha + beta)
    theta = np.linspace(0.0, 2 * np.pi, n_angle, endpoint=False) + np.pi / n_angle
    rings = np.exp(1j * theta)
    r_global = np.geomspace(edge_radius, radius, n_radial)
    r_local = np.geomspace(edge_radius, 0.5 * (beta - alpha), n_radial // 2)
    pts = [c + np.outer(r_global, rings).ravel()]
    for e in (alpha, beta):
        pts.append(e + np.outer(r_local, rings).ravel())
    pts.append(np.linspace(-radius, radius, 4 * n_radial) + 0j)
    z = np.concatenate(pts)
    z = z[(np.abs(z) <= radius) & (z != alpha) & (z != beta)]
    r = single_band_equiv_ratio(z, alpha, beta)
    return float(r.min()), float(r.max())
