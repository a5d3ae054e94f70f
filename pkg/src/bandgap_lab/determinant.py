"""Regularized perturbation determinants of truncated operators.

For A = A0 + B the relative operator is T(lam) = B (A0 - lam)^{-1}, so that
(A - lam)(A0 - lam)^{-1} = I + T(lam), and

    g_p(lam) = det_k(I + T(lam)),   k = ceil(p),
    det_k(I + T) = prod_j (1 + mu_j) exp(sum_{m<k} (-1)^m mu_j^m / m).

When B is supported on a few rows S the nonzero eigenvalues of T coincide
with those of the small block B_SS [(A0 - lam)^{-1}]_SS, which is what
:class:`PerturbationDeterminant` evaluates.  For tridiagonal A0 the needed
resolvent columns come from the compiled tridiagonal solver, so one
evaluation costs O(N |S|).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bands import dist_to_bands
from .errors import ContourError, DomainError, InputError, NearSingularError
from .linalg import eig, fingerprint, resolvent_apply, svd_values, tridiag_resolvent_columns
from .perturbations import schatten_norm

# sharp constants in log|det_k(I+T)| <= C_k ||T||_{S_k}^k
SHARP_CONSTANTS = {1: 1.0, 2: 0.5}
WINDING_NODES = 256


def reg_order(p):
    """ceil(p) as the smallest positive integer j >= p."""
    if p <= 0:
        raise InputError(f"regularization needs p > 0, got {p}")
    return max(1, math.ceil(p - 1e-12))


def _log_factor(mu, k):
    """log of (1+mu) exp(sum_{m<k} (-1)^m mu^m/m) without cancellation."""
    if k > 1 and abs(mu) < 0.5:
        # remainder of the log(1+mu) series from order k on
        s = 0j
        term = mu ** k
        for m in range(k, k + 80):
            s += (-1) ** (m + 1) * term / m
            term *= mu
            if abs(term) < 1e-18 * max(abs(s), 1e-300):
                break
        return s
    if mu == -1:
        return complex(-math.inf, 0.0)
    out = cmath.log(1.0 + mu)
    pw = 1.0 + 0j
    for m in range(1, k):
        pw *= mu
        out += (-1) ** m * pw / m
    return out


def log_det_regularized(mus, k):
    """Complex log of det_k from the eigenvalues ``mus`` of T (branch arbitrary)."""
    if k < 1 or int(k) != k:
        raise InputError(f"regularization order must be a positive integer, got {k}")
    logs = [_log_factor(complex(mu), int(k)) for mu in np.ravel(mus)]
    re = math.fsum(z.real for z in logs)
    im = math.fsum(z.imag for z in logs if math.isfinite(z.imag))
    return complex(re, im)


def det_regularized(t, k):
    """det_k(I + T) for a dense square T."""
    t = np.asarray(t)
    if not t.size:
        return 1.0 + 0j
    return _exp_log(log_det_regularized(eig(t).eigenvalues, k))


def _exp_log(z):
    if z.real == -math.inf:
        return 0j
    return cmath.exp(z)


def relative_operator(a0, b, lam):
    """T(lam) = B (A0 - lam)^{-1} as a dense matrix."""
    return resolvent_apply(a0, lam, b)


@dataclass(frozen=True)
class DetSample:
    lam: complex
    k: int
    value: complex
    log_modulus: float
    bound_side: float
    ratio: float
    sharp: bool

    def to_json(self):
        return {"re": self.lam.real, "im": self.lam.imag, "k": self.k,
                "value": {"re": self.value.real, "im": self.value.imag},
                "log_modulus": self.log_modulus, "bound_side": self.bound_side,
                "ratio": self.ratio, "sharp_constant": self.sharp}


def _is_tridiagonal(a):
    n = a.shape[0]
    if n < 3:
        return True
    band = np.abs(np.triu(a, 2)).max() == 0 and np.abs(np.tril(a, -2)).max() == 0
    return bool(band)


class PerturbationDeterminant:
    """g_p for a fixed pair (A0 truncation, compactly supported B).

    Build it from dense matrices or, without ever forming N x N matrices,
    with :meth:`from_operator`.
    """

    def __init__(self, a0=None, b=None, bands=None, *, diag=None, off=None, rows=None, block=None):
        self.bands = bands
        if diag is not None:
            self.diag = np.asarray(diag, dtype=float)
            self.off = np.asarray(off, dtype=float)
            self.a0 = None
            self.n = self.diag.shape[0]
            self.rows = np.asarray(rows, dtype=int)
            self.block = np.asarray(block, dtype=complex)
        else:
            a0 = np.asarray(a0)
            b = np.asarray(b, dtype=complex)
            if a0.shape != b.shape or a0.ndim != 2 or a0.shape[0] != a0.shape[1]:
                raise InputError("A0 and B must be square matrices of equal order")
            self.n = a0.shape[0]
            if np.isrealobj(a0) or not np.any(a0.imag):
                a0r = np.real(a0)
                if _is_tridiagonal(a0r) and np.array_equal(a0r, a0r.T):
                    self.diag = np.diag(a0r).copy()
                    self.off = np.diag(a0r, 1).copy()
                    self.a0 = None
                else:
                    self.diag = self.off = None
                    self.a0 = a0
            else:
                self.diag = self.off = None
                self.a0 = a0
            support = np.flatnonzero(np.any(b != 0, axis=0) | np.any(b != 0, axis=1))
            self.rows = support
            self.block = b[np.ix_(support, support)]
        self.w = len(self.rows)
        self._eta = bands.membership_tol if bands is not None else 0.0

    @classmethod
    def from_operator(cls, op, pert, n):
        pert.check_fits(n)
        diag, off = op.tridiagonal(n)
        return cls(bands=op.bands, diag=diag, off=off, rows=pert.rows(n), block=pert.block())

    # -- resolvent pieces -------------------------------------------------

    def _columns(self, lam):
        """(A0 - lam)^{-1}[:, S] and (A0 - lam)^{-1}[S, :]^T."""
        if self.diag is not None:
            x = tridiag_resolvent_columns(self.diag, self.off, lam, self.rows)
            return x, x
        n = self.n
        e = np.zeros((n, self.w), dtype=complex)
        e[self.rows, np.arange(self.w)] = 1.0
        s = self.a0 - lam * np.eye(n)
        try:
            lu = scipy.linalg.lu_factor(s, check_finite=False)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise NearSingularError(f"lambda={lam!r} on the spectrum of A0", fingerprint(self.a0)) from exc
        cols = scipy.linalg.lu_solve(lu, e, check_finite=False)
        rowsT = scipy.linalg.lu_solve(lu, e, trans=1, check_finite=False)
        if not (np.all(np.isfinite(cols)) and np.all(np.isfinite(rowsT))):
            raise NearSingularError(f"lambda={lam!r} on the spectrum of A0", fingerprint(self.a0))
        return cols, rowsT

    def _check_point(self, lam):
        if self.bands is not None and dist_to_bands(lam, self.bands) <= self._eta:
            raise DomainError(f"lambda={lam!r} lies on the band set", lam)

    def t_block(self, lam):
        """Small matrix B_SS R_SS carrying the nonzero spectrum of T(lam)."""
        cols, _ = self._columns(lam)
        return self.block @ cols[self.rows, :]

    def t_eigenvalues(self, lam):
        if not self.w:
            return np.zeros(0, complex)
        return eig(self.t_block(lam)).eigenvalues

    def t_singular_values(self, lam):
        """Singular values of the full T(lam) = B (A0 - lam)^{-1}."""
        if not self.w:
            return np.zeros(0)
        _, rowsT = self._columns(lam)
        # rows S of T are B_SS R[S, :]
        return svd_values(self.block @ rowsT.T)

    def log_value(self, lam, k):
        lam = complex(lam)
        if not self.w:
            return 0j
        return log_det_regularized(self.t_eigenvalues(lam), k)

    def value(self, lam, k):
        return _exp_log(self.log_value(lam, k))

    def log_derivative(self, lam, k):
        """d/dlam log det_k(I + T(lam))."""
        lam = complex(lam)
        if not self.w:
            return 0j
        cols, rowsT = self._columns(lam)
        r_ss = cols[self.rows, :]
        r2_ss = rowsT.T @ cols
        t = self.block @ r_ss
        tp = self.block @ r2_ss
        eye = np.eye(self.w)
        out = np.trace(np.linalg.solve(eye + t, tp))
        pw = eye
        for m in range(1, k):
            out += (-1) ** m * np.trace(pw @ tp)
            pw = pw @ t
        return complex(out)

    def bnorm(self, p):
        return schatten_norm(self.block, p).norm

    def sample(self, lam, p):
        """One :class:`DetSample` with the growth-bound side filled in."""
        lam = complex(lam)
        self._check_point(lam)
        k = reg_order(p)
        logv = self.log_value(lam, k)
        value = _exp_log(logv)
        if self.bands is not None:
            dist = dist_to_bands(lam, self.bands)
        else:
            dist = float(np.min(np.abs(np.linalg.eigvalsh(self._dense_a0()) - lam)))
        const = SHARP_CONSTANTS.get(k) if p == k else None
        bn = self.bnorm(p)
        bound = (const or 1.0) * bn ** p / dist ** p
        ratio = logv.real / bound if bound > 0 else (0.0 if logv.real <= 0 else math.inf)
        return DetSample(lam, k, value, float(logv.real), float(bound), float(ratio), const is not None)

    def _dense_a0(self):
        if self.a0 is not None:
            return self.a0
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    # -- zeros ---------------------------------------------------------------

    def winding(self, center, radius, k, nodes=WINDING_NODES):
        """Argument-principle count and centroid of zeros inside a circle.

        Returns ``(order, centroid)``.  Raises :class:`ContourError` when the
        circle is under-resolved (passes too close to a zero or pole).
        """
        theta = 2 * np.pi * np.arange(nodes) / nodes
        z = center + radius * np.exp(1j * theta)
        # a disk meeting the bands would also enclose poles of the truncated g
        if self.bands is not None and dist_to_bands(center, self.bands) <= radius + self._eta:
            raise DomainError(f"disk of radius {radius:g} around {center!r} meets the band set", center)
        logs = np.array([self.log_value(zj, k) for zj in z])
        if not np.all(np.isfinite(logs)):
            raise ContourError(f"zero on the contour around {center!r}")
        # the imaginary part of each log is only defined mod 2 pi: use increments of g
        vals = np.exp(logs - logs.real.max())
        ratios = np.roll(vals, -1) / vals
        dargs = np.angle(ratios)
        if np.max(np.abs(dargs)) > np.pi / 2:
            raise ContourError(f"argument increment unresolved on circle |lam-{center}|={radius:g}")
        order = dargs.sum() / (2 * np.pi)
        n_int = int(round(order))
        if abs(order - n_int) > 1e-3:
            raise ContourError(f"non-integer winding {order:.6f} around {center!r}")
        if n_int == 0:
            return 0, None
        dlog = np.array([self.log_derivative(zj, k) for zj in z])
        count = np.mean(dlog * (z - center))
        first = np.mean(z * dlog * (z - center))
        if abs(count - n_int) > 1e-3 * max(1, n_int):
            raise ContourError(f"log-derivative count {count:.6f} disagrees with winding {n_int}")
        return n_int, complex(first / n_int)


def zeros_near(det, candidates, radius, p=1, nodes=WINDING_NODES, retries=4):
    """Zeros of g_p in disks around ``candidates``: list of (zero, order).

    A contour that is under-resolved is retried with half the radius.
    """
    k = reg_order(p)
    out = []
    for c in candidates:
        r = float(radius)
        for attempt in range(retries + 1):
            try:
                order, centroid = det.winding(complex(c), r, k, nodes)
                break
            except ContourError:
                if attempt == retries:
                    raise
                r *= 0.5
        if order:
            out.append((centroid, order))
    return out


def detg(a0, b, lam, p, bands=None):
    """Single regularized-determinant sample for dense A0, B."""
    return PerturbationDeterminant(a0, b, bands).sample(lam, p)
