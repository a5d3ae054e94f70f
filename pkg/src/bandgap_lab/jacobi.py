"""Finite-band selfadjoint operators: periodic Jacobi matrices and sampled bands.

A periodic Jacobi matrix acts on l^2(Z) by

    (J u)_k = a_k u_{k+1} + b_k u_k + a_{k-1} u_{k-1},

with a_{k+m} = a_k, b_{k+m} = b_k.  Its spectrum is the preimage of [-2, 2]
under the discriminant (trace of the one-period transfer matrix).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from . import _kernels
from .bands import BandSet
from .errors import DegenerateGapError, InputError, NumericalFailure

# relative tolerance below which two edges count as a double root
DOUBLE_ROOT_RTOL = 1e-8


@dataclass(frozen=True)
class PeriodicJacobiSpec:
    """One period of a doubly infinite Jacobi matrix.

    ``a[k]`` couples site k to site k+1 (so ``a[-1]`` plays the role of
    a_0 = a_m); ``b[k]`` is the diagonal entry at site k.
    """

    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        if len(a) < 1 or len(a) != len(b):
            raise InputError(f"a and b must have the same positive length (got {len(a)}, {len(b)})")
        if not all(np.isfinite(a + b)):
            raise InputError("Jacobi coefficients must be finite")
        if min(a) <= 0:
            raise InputError("off-diagonal coefficients a_k must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def period(self):
        return len(self.a)

    @classmethod
    def free(cls):
        return cls((1.0,), (0.0,))

    def rotated(self, shift=1):
        """Same operator with cell labels shifted cyclically."""
        return PeriodicJacobiSpec(self.a[shift:] + self.a[:shift], self.b[shift:] + self.b[:shift])

    def scaled(self, t):
        return PeriodicJacobiSpec(tuple(t * x for x in self.a), tuple(t * x for x in self.b))

    def to_json(self):
        return {"period": self.period, "a": list(self.a), "b": list(self.b)}


def monodromy(spec, lam):
    """Product T_{m-1} ... T_0 of one-step transfer matrices at ``lam``.

    T_k = (1/a_k) [[lam - b_k, -a_{k-1}], [a_k, 0]], so det = 1.  ``lam`` may
    be a scalar (returns 2x2) or an array (returns (..., 2, 2)).
    """
    lam = np.asarray(lam, dtype=complex)
    flat = np.ascontiguousarray(lam.ravel())
    out = _kernels.monodromy_grid(np.asarray(spec.a), np.asarray(spec.b), flat)
    return out.reshape(lam.shape + (2, 2))


def discriminant(spec, lam):
    m = monodromy(spec, lam)
    d = m[..., 0, 0] + m[..., 1, 1]
    return complex(d) if d.ndim == 0 else d


def discriminant_coeffs(spec):
    """Real power-series coefficients (low to high) of the discriminant."""
    one, zero = np.array([1.0]), np.array([0.0])
    m = [[one, zero], [zero, one]]
    a, b = spec.a, spec.b
    for k in range(spec.period):
        t = [[np.array([-b[k], 1.0]) / a[k], np.array([-a[k - 1] / a[k]])], [one, zero]]
        m = [[P.polyadd(P.polymul(t[i][0], m[0][j]), P.polymul(t[i][1], m[1][j])) for j in range(2)]
             for i in range(2)]
    return P.polyadd(m[0][0], m[1][1])


def _real_roots(coeffs, spec, target):
    """Roots of Delta(lam) = target: companion eigenvalues, Newton-polished."""
    from .linalg import eig

    c = P.polysub(coeffs, [target])
    c = np.trim_zeros(c, "b")
    deg = len(c) - 1
    comp = np.zeros((deg, deg))
    if deg > 1:
        comp[1:, :-1] = np.eye(deg - 1)
    comp[:, -1] = -c[:-1] / c[-1]
    roots = eig(comp).eigenvalues
    scale = max(1.0, np.max(np.abs(roots)))
    if np.max(np.abs(roots.imag)) > 1e-6 * scale:
        raise NumericalFailure(f"discriminant = {target:+g} has non-real roots {roots}")
    x = np.sort(roots.real)
    dc = P.polyder(c)
    for _ in range(6):
        fx = discriminant(spec, x).real - target
        dfx = P.polyval(x, dc)
        step = np.where(dfx != 0, fx / np.where(dfx != 0, dfx, 1.0), 0.0)
        # skip polishing where the derivative vanishes (double roots)
        step = np.where(np.abs(step) < 1e-3 * scale, step, 0.0)
        x = x - step
    return np.sort(x)


def band_edges(spec):
    """Band set {lam : |Delta(lam)| <= 2} of a periodic Jacobi matrix."""
    c = discriminant_coeffs(spec)
    roots = np.sort(np.concatenate([_real_roots(c, spec, 2.0), _real_roots(c, spec, -2.0)]))
    # a gap (r_{2j+1}, r_{2j+2}) is closed when Delta barely leaves [-2, 2] in it
    for j in range(1, len(roots) - 1, 2):
        lo, hi = roots[j], roots[j + 1]
        mid = discriminant(spec, 0.5 * (lo + hi)).real
        if abs(abs(mid) - 2.0) <= DOUBLE_ROOT_RTOL * 2.0:
            raise DegenerateGapError(
                f"closed gap at lambda={0.5 * (lo + hi):.12g} (double root of Delta^2 - 4); "
                "merge the adjacent bands")
    return BandSet(tuple(float(r) for r in roots))


@dataclass(frozen=True)
class FiniteBandOperator:
    """Either a periodic Jacobi matrix or a multiplication operator sampled on bands.

    ``density`` (sampled variant) is the default number of grid points per
    band when no order is requested explicitly.
    """

    jacobi: PeriodicJacobiSpec | None = None
    sampled: BandSet | None = None
    density: int = 0

    def __post_init__(self):
        if (self.jacobi is None) == (self.sampled is None):
            raise InputError("give exactly one of a Jacobi spec or a sampled band set")
        if self.sampled is not None and self.density < 1:
            raise InputError("sampled-bands density must be a positive integer")

    @classmethod
    def periodic(cls, spec):
        return cls(jacobi=spec)

    @classmethod
    def sampled_bands(cls, bands, density):
        return cls(sampled=bands, density=int(density))

    @property
    def kind(self):
        return "periodic-jacobi" if self.jacobi is not None else "sampled-bands"

    @property
    def bands(self):
        if self.jacobi is not None:
            return _cached_edges(self.jacobi)
        return self.sampled

    @property
    def period(self):
        return self.jacobi.period if self.jacobi is not None else 1

    def tridiagonal(self, n):
        """Diagonal and off-diagonal of the order-``n`` truncation."""
        if n < 1:
            raise InputError("truncation order must be positive")
        if self.jacobi is None:
            return sampled_grid(self.sampled, n), np.zeros(n - 1)
        if n < self.period:
            raise InputError(f"truncation order {n} is smaller than the period {self.period}")
        idx = np.arange(-(n // 2), n - n // 2)
        m = self.period
        diag = np.asarray(self.jacobi.b)[idx % m]
        off = np.asarray(self.jacobi.a)[idx[:-1] % m]
        return diag, off

    def to_json(self):
        if self.jacobi is not None:
            return self.jacobi.to_json()
        return {"bands": self.sampled.to_json(), "density": self.density}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise InputError("operator spec must be a JSON object")
        if "bands" in obj:
            return cls.sampled_bands(BandSet.from_json(obj["bands"]), obj.get("density", 0))
        missing = [k for k in ("a", "b") if k not in obj]
        if missing:
            raise InputError(f"operator spec is missing field(s) {missing}")
        spec = PeriodicJacobiSpec(tuple(obj["a"]), tuple(obj["b"]))
        if "period" in obj and obj["period"] != spec.period:
            raise InputError(f"field 'period'={obj['period']} disagrees with len(a)={spec.period}")
        return cls.periodic(spec)


_EDGE_CACHE = {}


def _cached_edges(spec):
    if spec not in _EDGE_CACHE:
        _EDGE_CACHE[spec] = band_edges(spec)
    return _EDGE_CACHE[spec]


def sampled_grid(bands, n):
    """``n`` Chebyshev-distributed points on the bands, split by band length."""
    ivs = bands.intervals
    lengths = np.array([b - a for a, b in ivs])
    counts = np.floor(n * lengths / lengths.sum()).astype(int)
    for j in np.argsort(-(n * lengths / lengths.sum() - counts))[: n - counts.sum()]:
        counts[j] += 1
    pts = []
    for (a, b), k in zip(ivs, counts):
        if k == 0:
            continue
        # Chebyshev points of the first kind, strictly inside [a, b]
        t = np.cos((2 * np.arange(k) + 1) * np.pi / (2 * k))[::-1]
        pts.append(0.5 * (a + b) + 0.5 * (b - a) * t)
    return np.concatenate(pts)


def truncate(op, n=None):
    """Dense order-``n`` section of the operator (Dirichlet cut, sites -n//2 ...)."""
    if n is None:
        if op.jacobi is not None:
            raise InputError("periodic truncation needs an explicit order")
        n = op.density * op.sampled.n_bands
    diag, off = op.tridiagonal(n)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
