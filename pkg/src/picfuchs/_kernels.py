"""Hot numeric loops, compiled with numba when available.

Set ``PICFUCHS_NO_NUMBA=1`` to force the pure-numpy implementations (also used
automatically when numba cannot be imported).  Both implementations are kept
importable as ``NUMPY_KERNELS`` and ``NUMBA_KERNELS`` so that tests and the
benchmark can compare them directly.

Dense coefficient conventions: univariate arrays are ascending
(``c[k]`` multiplies ``x^k``); bivariate arrays are ``C[a, b]`` for ``x^a y^b``.
"""
import math
import os

import numpy as np

# ---------------------------------------------------------------------------
# pure numpy
# ---------------------------------------------------------------------------


def _binom_table(n):
    B = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        B[i, 0] = 1.0
        for j in range(1, i + 1):
            B[i, j] = B[i - 1, j - 1] + B[i - 1, j]
    return B


def horner_np(c, z):
    z = np.asarray(z, dtype=np.complex128)
    out = np.zeros_like(z)
    for k in range(c.shape[0] - 1, -1, -1):
        out = out * z + c[k]
    return out


def taylor_shift_np(c, a):
    """Coefficients of ``p(x + a)``."""
    n = c.shape[0] - 1
    B = _binom_table(n)
    powers = a ** np.arange(n + 1)
    out = np.zeros(n + 1, dtype=np.complex128)
    for k in range(n + 1):
        # coefficient of x^j from c_k (x+a)^k is c_k C(k,j) a^(k-j)
        out[: k + 1] += c[k] * B[k, : k + 1] * powers[k::-1]
    return out


def uni_shift_l1_np(c, a):
    """l1 norm of ``p(x + a) - lc x^deg`` (all but the leading coefficient)."""
    s = taylor_shift_np(c, a)
    return float(np.abs(s[:-1]).sum())


def bi_shift_l1_np(C, alpha, beta, top):
    """l1 norm of ``H(x+alpha, y+beta)`` minus its degree-``top`` part."""
    n = C.shape[0] - 1
    B = _binom_table(n)
    pa = alpha ** np.arange(n + 1)
    pb = beta ** np.arange(n + 1)
    out = np.zeros_like(C)
    for a in range(n + 1):
        for b in range(n + 1):
            c = C[a, b]
            if c == 0:
                continue
            wa = B[a, : a + 1] * pa[a::-1]
            wb = B[b, : b + 1] * pb[b::-1]
            out[: a + 1, : b + 1] += c * np.outer(wa, wb)
    ii, jj = np.indices(out.shape)
    mask = (ii + jj) < top
    return float(np.abs(out[mask]).sum())


def grad_norm_min_np(Ca, Cb, xs, ys):
    """min over sample points of sqrt(|a(x,y)|^2 + |b(x,y)|^2)."""
    def ev(C):
        tot = np.zeros(xs.shape, dtype=np.complex128)
        for a in range(C.shape[0]):
            for b in range(C.shape[1]):
                if C[a, b] != 0:
                    tot += C[a, b] * xs ** a * ys ** b
        return tot
    va, vb = ev(Ca), ev(Cb)
    return float(np.sqrt(np.abs(va) ** 2 + np.abs(vb) ** 2).min())


def max_pairwise_distance_np(z):
    z = np.asarray(z, dtype=np.complex128)
    if z.size < 2:
        return 0.0
    return float(np.abs(z[:, None] - z[None, :]).max())


NUMPY_KERNELS = {
    "horner": horner_np,
    "taylor_shift": taylor_shift_np,
    "uni_shift_l1": uni_shift_l1_np,
    "bi_shift_l1": bi_shift_l1_np,
    "grad_norm_min": grad_norm_min_np,
    "max_pairwise_distance": max_pairwise_distance_np,
}

# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

NUMBA_KERNELS = None
try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

if njit is not None:

    @njit(cache=True)
    def _horner_nb(c, z):
        out = np.empty(z.shape[0], dtype=np.complex128)
        for i in range(z.shape[0]):
            acc = 0j
            for k in range(c.shape[0] - 1, -1, -1):
                acc = acc * z[i] + c[k]
            out[i] = acc
        return out

    def horner_nb(c, z):
        z = np.asarray(z, dtype=np.complex128)
        flat = _horner_nb(np.ascontiguousarray(c, dtype=np.complex128), z.ravel())
        return flat.reshape(z.shape)

    @njit(cache=True)
    def _taylor_shift_nb(c, a):
        # repeated synthetic division (Horner's shift), O(n^2)
        n = c.shape[0] - 1
        out = c.copy()
        for i in range(n):
            for k in range(n - 1, i - 1, -1):
                out[k] += a * out[k + 1]
        return out

    def taylor_shift_nb(c, a):
        return _taylor_shift_nb(np.asarray(c, dtype=np.complex128).copy(), complex(a))

    @njit(cache=True)
    def _uni_shift_l1_nb(c, a):
        s = _taylor_shift_nb(c, a)
        tot = 0.0
        for k in range(s.shape[0] - 1):
            tot += abs(s[k])
        return tot

    def uni_shift_l1_nb(c, a):
        return _uni_shift_l1_nb(np.asarray(c, dtype=np.complex128).copy(), complex(a))

    @njit(cache=True)
    def _bi_shift_l1_nb(C, alpha, beta, top):
        n = C.shape[0] - 1
        # shift in x for every column, then in y for every row
        W = C.copy()
        for b in range(n + 1):
            for i in range(n):
                for k in range(n - 1, i - 1, -1):
                    W[k, b] += alpha * W[k + 1, b]
        for a in range(n + 1):
            for i in range(n):
                for k in range(n - 1, i - 1, -1):
                    W[a, k] += beta * W[a, k + 1]
        tot = 0.0
        for a in range(n + 1):
            for b in range(n + 1):
                if a + b < top:
                    tot += abs(W[a, b])
        return tot

    def bi_shift_l1_nb(C, alpha, beta, top):
        return _bi_shift_l1_nb(np.asarray(C, dtype=np.complex128).copy(),
                               complex(alpha), complex(beta), int(top))

    @njit(cache=True)
    def _grad_norm_min_nb(Ca, Cb, xs, ys):
        best = np.inf
        for i in range(xs.shape[0]):
            x = xs[i]
            y = ys[i]
            va = 0j
            vb = 0j
            xa = 1.0 + 0j
            for a in range(Ca.shape[0]):
                yb = 1.0 + 0j
                for b in range(Ca.shape[1]):
                    va += Ca[a, b] * xa * yb
                    vb += Cb[a, b] * xa * yb
                    yb *= y
                xa *= x
            r = math.sqrt(abs(va) ** 2 + abs(vb) ** 2)
            if r < best:
                best = r
        return best

    def grad_norm_min_nb(Ca, Cb, xs, ys):
        n = max(Ca.shape[0], Cb.shape[0])
        A = np.zeros((n, n), dtype=np.complex128)
        Bm = np.zeros((n, n), dtype=np.complex128)
        A[: Ca.shape[0], : Ca.shape[1]] = Ca
        Bm[: Cb.shape[0], : Cb.shape[1]] = Cb
        return float(_grad_norm_min_nb(A, Bm, np.asarray(xs, dtype=np.complex128).ravel(),
                                       np.asarray(ys, dtype=np.complex128).ravel()))

    @njit(cache=True)
    def _max_pairwise_distance_nb(z):
        best = 0.0
        for i in range(z.shape[0]):
            for j in range(i + 1, z.shape[0]):
                d = abs(z[i] - z[j])
                if d > best:
                    best = d
        return best

    def max_pairwise_distance_nb(z):
        return float(_max_pairwise_distance_nb(np.asarray(z, dtype=np.complex128).ravel()))

    NUMBA_KERNELS = {
        "horner": horner_nb,
        "taylor_shift": taylor_shift_nb,
        "uni_shift_l1": uni_shift_l1_nb,
        "bi_shift_l1": bi_shift_l1_nb,
        "grad_norm_min": grad_norm_min_nb,
        "max_pairwise_distance": max_pairwise_distance_nb,
    }

USE_NUMBA = NUMBA_KERNELS is not None and os.environ.get("PICFUCHS_NO_NUMBA", "") in ("", "0")
ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS

horner = ACTIVE["horner"]
taylor_shift = ACTIVE["taylor_shift"]
uni_shift_l1 = ACTIVE["uni_shift_l1"]
bi_shift_l1 = ACTIVE["bi_shift_l1"]
grad_norm_min = ACTIVE["grad_norm_min"]
max_pairwise_distance = ACTIVE["max_pairwise_distance"]
