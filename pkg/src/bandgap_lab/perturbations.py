"""Compactly supported complex perturbations and their Schatten norms.

Sites are labelled like the truncations in :mod:`bandgap_lab.jacobi`: site 0
is row ``N // 2`` of an order-``N`` section.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError, SizeError
from .linalg import svd_values

KINDS = ("rank-one", "diagonal-decay", "random-banded")


def parse_complex(v):
    if isinstance(v, dict):
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


def complex_json(z):
    return {"re": float(z.real), "im": float(z.imag)}


@dataclass(frozen=True)
class PerturbationSpec:
    """A finite block B placed on consecutive sites, times a scale ``t``.

    rank-one        single entry ``amplitude`` at ``site``
    diagonal-decay  diag(amplitude * ratio**k), k < length, from ``site``
    random-banded   complex Gaussian entries with |i-j| <= bandwidth on a
                    length x length block, entries of rms size ``amplitude``

    ``window`` M restricts the support to sites [-M, M]; ``None`` means the
    default N // 10 of the truncation it is built into.  ``conjugate`` replaces
    the block by its entrywise complex conjugate.
    """

    kind: str
    amplitude: complex = 1.0
    site: int | None = None
    ratio: float = 0.5
    length: int = 1
    bandwidth: int = 0
    seed: int = 0
    scale: float = 1.0
    window: int | None = None
    conjugate: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown perturbation kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "amplitude", parse_complex(self.amplitude))
        if not (self.scale >= 0 and math.isfinite(self.scale)):
            raise InputError(f"scale must be a finite nonnegative number, got {self.scale}")
        if self.kind == "rank-one":
            object.__setattr__(self, "length", 1)
        if self.length < 1:
            raise InputError("block length must be positive")
        if self.kind == "diagonal-decay" and not 0.0 < self.ratio < 1.0:
            raise InputError(f"decay ratio must lie in (0, 1), got {self.ratio}")
        if self.bandwidth < 0:
            raise InputError("bandwidth must be nonnegative")
        if self.window is not None and self.window < 0:
            raise InputError("window half-width must be nonnegative")
        if self.site is None:
            default = -(self.length // 2) if self.kind == "random-banded" else 0
            object.__setattr__(self, "site", default)

    @classmethod
    def rank_one(cls, amplitude, site=0, **kw):
        return cls("rank-one", amplitude=amplitude, site=site, **kw)

    @classmethod
    def diagonal_decay(cls, amplitude, ratio, length, **kw):
        return cls("diagonal-decay", amplitude=amplitude, ratio=ratio, length=length, **kw)

    @classmethod
    def random_banded(cls, bandwidth, length, amplitude=1.0, seed=0, **kw):
        return cls("random-banded", amplitude=amplitude, bandwidth=bandwidth, length=length, seed=seed, **kw)

    def with_scale(self, t):
        return replace(self, scale=float(t))

    def conjugated(self):
        return replace(self, conjugate=not self.conjugate)

    @property
    def sites(self):
        return np.arange(self.site, self.site + self.length)

    def block(self):
        """The scaled length x length block (deterministic in ``seed``)."""
        n = self.length
        if self.kind == "rank-one":
            blk = np.array([[self.amplitude]], dtype=complex)
        elif self.kind == "diagonal-decay":
            blk = np.diag(self.amplitude * self.ratio ** np.arange(n)).astype(complex)
        else:
            rng = np.random.default_rng(self.seed)
            g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
            i, j = np.indices((n, n))
            blk = np.where(np.abs(i - j) <= self.bandwidth, self.amplitude * g, 0.0)
        blk = self.scale * blk
        return blk.conj() if self.conjugate else blk

    def check_fits(self, n):
        m = n // 10 if self.window is None else self.window
        if 2 * m + 1 > n:
            raise SizeError(f"window [-{m}, {m}] does not fit a truncation of order {n}")
        lo, hi = self.site, self.site + self.length - 1
        if lo < -m or hi > m:
            raise SizeError(f"support [{lo}, {hi}] leaves the window [-{m}, {m}] (order {n})")
        if lo < -(n // 2) or hi > n - n // 2 - 1:
            raise SizeError(f"support [{lo}, {hi}] leaves the truncation of order {n}")

    def rows(self, n):
        """Matrix rows/columns occupied by the block in an order-``n`` section."""
        return self.sites + n // 2

    def schatten(self, p):
        return schatten_norm(self.block(), p)

    def to_json(self):
        return {
            "kind": self.kind,
            "amplitude": complex_json(self.amplitude),
            "site": int(self.site),
            "ratio": self.ratio,
            "length": self.length,
            "bandwidth": self.bandwidth,
            "seed": self.seed,
            "scale": self.scale,
            "window": self.window,
            "conjugate": self.conjugate,
        }

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or "kind" not in obj:
            raise InputError('perturbation spec must be a JSON object with a "kind" field')
        allowed = {"kind", "amplitude", "site", "ratio", "length", "bandwidth",
                   "seed", "scale", "window", "conjugate"}
        unknown = sorted(set(obj) - allowed)
        if unknown:
            raise InputError(f"unknown perturbation field(s) {unknown}")
        try:
            return cls(**obj)
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad perturbation spec: {exc}") from exc


def build(spec, n):
    """Dense order-``n`` matrix of the perturbation, zero outside its window."""
    spec.check_fits(n)
    out = np.zeros((n, n), dtype=complex)
    r = spec.rows(n)
    out[np.ix_(r, r)] = spec.block()
    return out


@dataclass(frozen=True)
class SchattenReport:
    p: float
    singular_values: np.ndarray
    norm: float

    def to_json(self):
        return {"p": self.p, "norm": self.norm, "singular_values": [float(s) for s in self.singular_values]}


def schatten_norm(m, p, allow_quasi=False):
    """(sum sigma_j^p)^(1/p); ``p=inf`` gives the operator norm.

    p < 1 is a quasi-norm and only accepted with ``allow_quasi=True``.
    """
    p = float(p)
    if p < 1.0 and not (allow_quasi and p > 0):
        raise InputError(f"Schatten exponent must be >= 1, got {p}")
    s = svd_values(m)
    if not s.size:
        return SchattenReport(p, s, 0.0)
    if math.isinf(p):
        return SchattenReport(p, s, float(s[0]))
    top = s[0]
    if top == 0:
        return SchattenReport(p, s, 0.0)
    # scale by the largest value so large p cannot overflow
    norm = top * math.fsum((s / top) ** p) ** (1.0 / p)
    return SchattenReport(p, s, float(norm))
