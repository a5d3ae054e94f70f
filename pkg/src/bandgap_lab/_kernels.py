"""Hot numerical kernels, compiled with numba when available.

Every kernel exists twice: a loop-level version (``*_loops``) that numba
compiles, and a vectorised numpy/scipy version (``*_numpy``).  The public
names dispatch to one of them at import time.  Set
``BANDGAP_LAB_DISABLE_NUMBA=1`` to force the numpy path, e.g. to compare
results or when numba is broken on a platform.

The loop versions are plain Python and stay callable without numba, which
the tests use to check the two paths against each other on small inputs.
"""

import os

import numpy as np
import scipy.linalg

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

DISABLE_ENV = "BANDGAP_LAB_DISABLE_NUMBA"


def numba_requested():
    return os.environ.get(DISABLE_ENV, "").strip().lower() not in ("1", "true", "yes")


USE_NUMBA = numba is not None and numba_requested()


def _jit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# --------------------------------------------------------------------------
# tridiagonal shifted solve: (T - lam) X = RHS, T real symmetric tridiagonal
# --------------------------------------------------------------------------

def tridiag_solve_loops(diag, off, lam, rhs):
    """Gaussian elimination with partial pivoting (LAPACK ``gtsv`` scheme).

    Returns ``(X, info)``; ``info > 0`` flags an exactly zero pivot at row
    ``info - 1``.
    """
    n = diag.shape[0]
    k = rhs.shape[1]
    d = np.empty(n, dtype=np.complex128)
    du = np.zeros(n, dtype=np.complex128)
    dl = np.zeros(n, dtype=np.complex128)
    x = np.empty((n, k), dtype=np.complex128)
    for i in range(n):
        d[i] = diag[i] - lam
        for j in range(k):
            x[i, j] = rhs[i, j]
    for i in range(n - 1):
        du[i] = off[i]
        dl[i] = off[i]
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] == 0:
                return x, i + 1
            fact = dl[i] / d[i]
            d[i + 1] = d[i + 1] - fact * du[i]
            for j in range(k):
                x[i + 1, j] = x[i + 1, j] - fact * x[i, j]
            dl[i] = 0.0
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            temp = d[i + 1]
            d[i + 1] = du[i] - fact * temp
            if i < n - 2:
                dl[i] = du[i + 1]
                du[i + 1] = -fact * dl[i]
            else:
                dl[i] = 0.0
            du[i] = temp
            for j in range(k):
                t = x[i, j]
                x[i, j] = x[i + 1, j]
                x[i + 1, j] = t - fact * x[i + 1, j]
    if d[n - 1] == 0:
        return x, n
    for j in range(k):
        x[n - 1, j] = x[n - 1, j] / d[n - 1]
        if n > 1:
            x[n - 2, j] = (x[n - 2, j] - du[n - 2] * x[n - 1, j]) / d[n - 2]
        for i in range(n - 3, -1, -1):
            x[i, j] = (x[i, j] - du[i] * x[i + 1, j] - dl[i] * x[i + 2, j]) / d[i]
    return x, 0


def tridiag_solve_numpy(diag, off, lam, rhs):
    n = diag.shape[0]
    ab = np.zeros((3, n), dtype=np.complex128)
    ab[0, 1:] = off
    ab[1, :] = diag - lam
    ab[2, :-1] = off
    try:
        x = scipy.linalg.solve_banded((1, 1), ab, rhs.astype(np.complex128), check_finite=False)
    except np.linalg.LinAlgError:
        return np.zeros_like(rhs, dtype=np.complex128), 1
    return x, 0


# --------------------------------------------------------------------------
# transfer-matrix products over a grid of spectral parameters
# --------------------------------------------------------------------------

def monodromy_grid_loops(a, b, lams):
    m = a.shape[0]
    out = np.empty((lams.shape[0], 2, 2), dtype=np.complex128)
    for q in range(lams.shape[0]):
        lam = lams[q]
        m00 = 1.0 + 0.0j
        m01 = 0.0j
        m10 = 0.0j
        m11 = 1.0 + 0.0j
        for k in range(m):
            ak = a[k]
            akm1 = a[k - 1] if k > 0 else a[m - 1]
            t00 = (lam - b[k]) / ak
            t01 = -akm1 / ak
            # T_k = [[t00, t01], [1, 0]]
            n00 = t00 * m00 + t01 * m10
            n01 = t00 * m01 + t01 * m11
            m10 = m00
            m11 = m01
            m00 = n00
            m01 = n01
        out[q, 0, 0] = m00
        out[q, 0, 1] = m01
        out[q, 1, 0] = m10
        out[q, 1, 1] = m11
    return out


def monodromy_grid_numpy(a, b, lams):
    lams = np.asarray(lams, dtype=np.complex128)
    m = a.shape[0]
    out = np.zeros((lams.shape[0], 2, 2), dtype=np.complex128)
    out[:, 0, 0] = 1.0
    out[:, 1, 1] = 1.0
    for k in range(m):
        t = np.zeros_like(out)
        t[:, 0, 0] = (lams - b[k]) / a[k]
        t[:, 0, 1] = -a[k - 1] / a[k]
        t[:, 1, 0] = 1.0
        out = t @ out
    return out


# --------------------------------------------------------------------------
# dense nonsymmetric eigenvalues: balance -> Hessenberg -> shifted QR
# --------------------------------------------------------------------------

def balance_loops(a):
    """Parlett-Reinsch diagonal scaling by powers of two (in place)."""
    n = a.shape[0]
    radix = 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            c = 0.0
            r = 0.0
            for j in range(n):
                if j != i:
                    c += abs(a[j, i])
                    r += abs(a[i, j])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                for j in range(n):
                    a[i, j] /= f
                    a[j, i] *= f
    return a


def balance_numpy(a):
    n = a.shape[0]
    radix = 2.0
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.abs(a[:, i]).sum() - abs(a[i, i])
            r = np.abs(a[i, :]).sum() - abs(a[i, i])
            if c == 0.0 or r == 0.0:
                continue
            s = c + r
            f = 1.0
            g = r / radix
            while c < g:
                f *= radix
                c *= radix * radix
            g = r * radix
            while c > g:
                f /= radix
                c /= radix * radix
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f
    return a


def hessenberg_loops(a):
    """Householder reduction to upper Hessenberg form (in place)."""
    n = a.shape[0]
    v = np.empty(n, dtype=np.complex128)
    acc = np.empty(n, dtype=np.complex128)
    for k in range(n - 2):
        norm2 = 0.0
        for i in range(k + 1, n):
            norm2 += a[i, k].real ** 2 + a[i, k].imag ** 2
        xnorm = np.sqrt(norm2)
        if xnorm == 0.0:
            continue
        x0 = a[k + 1, k]
        if abs(x0) == 0.0:
            phase = 1.0 + 0.0j
        else:
            phase = x0 / abs(x0)
        alpha = -phase * xnorm
        vnorm2 = 0.0
        for i in range(k + 1, n):
            v[i] = a[i, k]
        v[k + 1] = v[k + 1] - alpha
        for i in range(k + 1, n):
            vnorm2 += v[i].real ** 2 + v[i].imag ** 2
        if vnorm2 == 0.0:
            continue
        scale = 2.0 / vnorm2
        # left: rows k+1.., columns k..  (row-major friendly order)
        for j in range(k, n):
            acc[j] = 0.0
        for i in range(k + 1, n):
            vc = v[i].conjugate()
            for j in range(k, n):
                acc[j] += vc * a[i, j]
        for i in range(k + 1, n):
            vi = v[i] * scale
            for j in range(k, n):
                a[i, j] -= vi * acc[j]
        # right: all rows, columns k+1..
        for i in range(n):
            s = 0.0j
            for j in range(k + 1, n):
                s += a[i, j] * v[j]
            s *= scale
            for j in range(k + 1, n):
                a[i, j] -= s * v[j].conjugate()
        for i in range(k + 2, n):
            a[i, k] = 0.0
    return a


def hessenberg_numpy(a):
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] -= -phase * xnorm
        vn2 = np.vdot(v, v).real
        if vn2 == 0.0:
            continue
        a[k + 1:, k:] -= (2.0 / vn2) * np.outer(v, v.conj() @ a[k + 1:, k:])
        a[:, k + 1:] -= (2.0 / vn2) * np.outer(a[:, k + 1:] @ v, v.conj())
        a[k + 2:, k] = 0.0
    return a


def _wilkinson_shift(h00, h01, h10, h11):
    tr = 0.5 * (h00 + h11)
    det = h00 * h11 - h01 * h10
    disc = np.sqrt(tr * tr - det + 0.0j)
    e1 = tr + disc
    e2 = tr - disc
    if abs(e1 - h11) < abs(e2 - h11):
        return e1
    return e2


def hqr_eigvals_loops(h, maxit):
    """Single-shift complex QR on an upper Hessenberg matrix (in place).

    Only the active diagonal block is updated, which is all that eigenvalues
    need.  Returns ``(eigenvalues, sweeps, info)``; ``info != 0`` means the
    sweep cap was hit.
    """
    n = h.shape[0]
    w = np.zeros(n, dtype=np.complex128)
    ulp = 2.220446049250313e-16
    smlnum = 1e-300
    hi = n - 1
    sweeps = 0
    its = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = 1.0
            if abs(h[lo, lo - 1]) <= max(ulp * s, smlnum):
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            w[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        sweeps += 1
        its += 1
        if sweeps > maxit:
            return w, sweeps, 1
        if its % 10 == 0:
            shift = h[hi, hi] + 0.75 * abs(h[hi, hi - 1].real)
        else:
            shift = _wilkinson_shift(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        for k in range(lo, hi):
            if k == lo:
                x = h[lo, lo] - shift
                y = h[lo + 1, lo]
            else:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
            ax = abs(x)
            ay = abs(y)
            r = np.hypot(ax, ay)
            if r == 0.0:
                continue
            if ax == 0.0:
                c = 0.0
                sn = y.conjugate() / ay
            else:
                c = ax / r
                sn = (x / ax) * y.conjugate() / r
            if k > lo:
                h[k, k - 1] = c * x + sn * y
                h[k + 1, k - 1] = 0.0
            for j in range(k, hi + 1):
                t1 = h[k, j]
                t2 = h[k + 1, j]
                h[k, j] = c * t1 + sn * t2
                h[k + 1, j] = -sn.conjugate() * t1 + c * t2
            top = k + 2 if k + 2 < hi else hi
            for i in range(lo, top + 1):
                t1 = h[i, k]
                t2 = h[i, k + 1]
                h[i, k] = c * t1 + sn.conjugate() * t2
                h[i, k + 1] = -sn * t1 + c * t2
    return w, sweeps, 0


def hqr_eigvals_numpy(h, maxit):
    n = h.shape[0]
    w = np.zeros(n, dtype=np.complex128)
    ulp = np.finfo(float).eps
    hi = n - 1
    sweeps = 0
    its = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo]) or 1.0
            if abs(h[lo, lo - 1]) <= max(ulp * s, 1e-300):
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            w[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        sweeps += 1
        its += 1
        if sweeps > maxit:
            return w, sweeps, 1
        if its % 10 == 0:
            shift = h[hi, hi] + 0.75 * abs(h[hi, hi - 1].real)
        else:
            shift = _wilkinson_shift(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        for k in range(lo, hi):
            if k == lo:
                x, y = h[lo, lo] - shift, h[lo + 1, lo]
            else:
                x, y = h[k, k - 1], h[k + 1, k - 1]
            ax, ay = abs(x), abs(y)
            r = np.hypot(ax, ay)
            if r == 0.0:
                continue
            if ax == 0.0:
                c, sn = 0.0, np.conj(y) / ay
            else:
                c, sn = ax / r, (x / ax) * np.conj(y) / r
            rot = np.array([[c, sn], [-np.conj(sn), c]])
            if k > lo:
                h[k, k - 1] = c * x + sn * y
                h[k + 1, k - 1] = 0.0
            h[k:k + 2, k:hi + 1] = rot @ h[k:k + 2, k:hi + 1]
            top = min(k + 2, hi)
            h[lo:top + 1, k:k + 2] = h[lo:top + 1, k:k + 2] @ rot.conj().T
    return w, sweeps, 0


if numba is not None:
    tridiag_solve_numba = _jit(tridiag_solve_loops)
    monodromy_grid_numba = _jit(monodromy_grid_loops)
    balance_numba = _jit(balance_loops)
    hessenberg_numba = _jit(hessenberg_loops)
    _wilkinson_shift = _jit(_wilkinson_shift)
    hqr_eigvals_numba = _jit(hqr_eigvals_loops)
else:  # pragma: no cover
    tridiag_solve_numba = tridiag_solve_loops
    monodromy_grid_numba = monodromy_grid_loops
    balance_numba = balance_loops
    hessenberg_numba = hessenberg_loops
    hqr_eigvals_numba = hqr_eigvals_loops

if USE_NUMBA:
    tridiag_solve = tridiag_solve_numba
    monodromy_grid = monodromy_grid_numba
    balance = balance_numba
    hessenberg = hessenberg_numba
    hqr_eigvals = hqr_eigvals_numba
else:
    tridiag_solve = tridiag_solve_numpy
    monodromy_grid = monodromy_grid_numpy
    balance = balance_numpy
    hessenberg = hessenberg_numpy
    hqr_eigvals = hqr_eigvals_numpy


def backend():
    return "numba" if USE_NUMBA else "numpy"
