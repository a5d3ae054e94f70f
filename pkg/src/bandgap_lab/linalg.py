"""Dense eigenvalues, singular values and shifted solves with accuracy checks.

Two eigenvalue backends are available:

``lapack``
    numpy/LAPACK ``geev`` (``heevd`` for exactly Hermitian input).  Default.
``qr``
    the package's own balance -> Householder-Hessenberg -> single-shift
    complex QR kernels (numba-compiled unless disabled).

Pick one per call or set ``BANDGAP_LAB_EIG_BACKEND``.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from . import _kernels
from .errors import InputError, NearSingularError, NumericalFailure, SizeError

DEFAULT_MAX_N = 3000
SWEEPS_PER_ORDER = 40


def max_order():
    env = os.environ.get("BANDGAP_LAB_MAX_N")
    return int(env) if env else DEFAULT_MAX_N


def fingerprint(m):
    m = np.ascontiguousarray(m)
    h = hashlib.sha256()
    h.update(str(m.shape).encode())
    h.update(m.tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class EigResult:
    eigenvalues: np.ndarray
    vectors: np.ndarray | None = None
    residual: float | None = None
    backend: str = "lapack"


def _as_square(m):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise SizeError(f"expected a nonempty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericalFailure("matrix has non-finite entries", fingerprint(m))
    n = m.shape[0]
    if n > max_order():
        raise SizeError(f"matrix order {n} exceeds the cap {max_order()} (BANDGAP_LAB_MAX_N)")
    return m


def qr_eigvals(m):
    """Eigenvalues via the in-house balance/Hessenberg/QR kernels."""
    n = m.shape[0]
    h = np.array(m, dtype=np.complex128, order="C")
    if n == 1:
        return h[0].copy()
    h = _kernels.hessenberg(_kernels.balance(h))
    w, _, info = _kernels.hqr_eigvals(h, SWEEPS_PER_ORDER * n)
    if info:
        raise NumericalFailure(f"QR iteration exceeded {SWEEPS_PER_ORDER * n} sweeps", fingerprint(m))
    return w


def _inverse_iteration(m, lam, rng):
    n = m.shape[0]
    shift = lam + 1e-13 * max(1.0, abs(lam)) * (1 + 1j)
    lu = scipy.linalg.lu_factor(m - shift * np.eye(n), check_finite=False)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    for _ in range(3):
        v = scipy.linalg.lu_solve(lu, v, check_finite=False)
        v /= np.linalg.norm(v)
    return v


def eig(m, vectors=False, backend=None, tol=1e-8):
    """Eigenvalues (and optionally right eigenvectors) of a dense square matrix.

    Checks that the eigenvalue sum reproduces the trace to 1e-8 N ||M|| and,
    with ``vectors=True``, that max ||Mv - lam v|| <= tol ||M||.
    """
    m = _as_square(m)
    n = m.shape[0]
    backend = backend or os.environ.get("BANDGAP_LAB_EIG_BACKEND", "lapack")
    norm = np.linalg.norm(m, 2) if n <= 500 else np.linalg.norm(m, "fro")
    vecs = None
    if backend == "lapack":
        hermitian = np.array_equal(m, m.conj().T)
        try:
            if vectors:
                w, vecs = np.linalg.eigh(m) if hermitian else np.linalg.eig(m)
            else:
                w = np.linalg.eigvalsh(m) if hermitian else np.linalg.eigvals(m)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"LAPACK eigensolver failed: {exc}", fingerprint(m)) from exc
        w = w.astype(complex)
    elif backend == "qr":
        w = qr_eigvals(m)
        if vectors:
            rng = np.random.default_rng(0)
            vecs = np.column_stack([_inverse_iteration(m, lam, rng) for lam in w])
    else:
        raise InputError(f"unknown eigenvalue backend {backend!r}")
    if abs(w.sum() - np.trace(m)) > 1e-8 * n * max(norm, 1e-300):
        raise NumericalFailure("eigenvalue sum does not reproduce the trace", fingerprint(m))
    residual = None
    if vectors:
        residual = float(np.max(np.linalg.norm(m @ vecs - vecs * w, axis=0)))
        if residual > tol * max(norm, 1e-300):
            raise NumericalFailure(f"eigenvector residual {residual:.3g} above {tol:g} ||M||", fingerprint(m))
    return EigResult(w, vecs, residual, backend)


def svd_values(m):
    """Singular values, descending."""
    m = np.asarray(m)
    if m.size == 0:
        return np.zeros(0)
    if not np.all(np.isfinite(m)):
        raise NumericalFailure("matrix has non-finite entries", fingerprint(m))
    try:
        s = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD failed: {exc}", fingerprint(m)) from exc
    return np.sort(s)[::-1]


# below this distance to the spectrum a shifted solve is refused
NEAR_SINGULAR = 1e-10


def resolvent_apply(a0, lam, x):
    """X (A0 - lam)^{-1} via an LU solve; refuses lam within 1e-10 of sigma(A0)."""
    a0 = np.asarray(a0)
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    n = a0.shape[0]
    shifted = a0.astype(complex) - lam * np.eye(n)
    lu, piv, info = lapack.zgetrf(shifted)
    if info > 0:
        raise NearSingularError(f"lambda={lam!r} is an eigenvalue of A0", fingerprint(a0))
    anorm = np.linalg.norm(shifted, 1)
    rcond, _ = lapack.zgecon(lu, anorm, norm="1")
    # 1/||(A0-lam)^{-1}||_1 is within a factor n of the distance to the spectrum
    if rcond * anorm <= NEAR_SINGULAR:
        raise NearSingularError(f"lambda={lam!r} is within {NEAR_SINGULAR:g} of the spectrum", fingerprint(a0))
    # X S^{-1} = (S^{-T} X^T)^T
    y, info = lapack.zgetrs(lu, piv, x.T.copy(), trans=1)
    out = y.T
    if np.linalg.norm(out @ shifted - x) > 1e-12 * np.linalg.norm(x) / rcond:
        raise NumericalFailure("resolvent solve residual check failed", fingerprint(a0))
    return out


def tridiag_resolvent_columns(diag, off, lam, cols):
    """Columns ``cols`` of (T - lam)^{-1} for a real symmetric tridiagonal T.

    Returns an (n, len(cols)) complex array.  Uses the compiled pivoted
    tridiagonal kernel.
    """
    n = diag.shape[0]
    rhs = np.zeros((n, len(cols)), dtype=np.complex128)
    rhs[np.asarray(cols), np.arange(len(cols))] = 1.0
    x, info = _kernels.tridiag_solve(np.ascontiguousarray(diag, dtype=float),
                                     np.ascontiguousarray(off, dtype=float), complex(lam), rhs)
    if info or not np.all(np.isfinite(x)):
        raise NearSingularError(f"lambda={lam!r} is (numerically) an eigenvalue of the truncation")
    return x
