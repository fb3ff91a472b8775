"""Regularity at infinity, quasimonic pairs and the balancing rescalings.

A homogeneous pair ``(a, b)`` of degree ``n`` is *normalized* when the linear
map ``(u, v) -> a u + b v`` (``u, v`` homogeneous of degree ``n - 1``) has an
inverse of l1 operator norm at most one.  A Hamiltonian is *quasimonic* when
``(H_x, H_y)`` of its principal part is normalized, and *balanced* when in
addition ``||H - Hhat|| <= 1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import (DegreeError, IllConditionedError, NotBalancedError,
                     NotQuasimonicError, NotRegularError, PFError)
from .forms import BiPoly, Form1, principal_part
from .linalg import exact_inverse, l1_operator_norm

COND_LIMIT = 1e12
REGULARITY_TOL = 1e-10
QUASIMONIC_TOL = 1e-12


def _hom_index(a, b):
    """Position of ``x^a y^b`` in the basis ordered by x-exponent descending."""
    return b


@dataclass(frozen=True)
class SylvesterMap:
    """Matrix of ``(u, v) -> a u + b v`` and its inverse.

    Columns ``0..n-1`` carry the monomials ``x^(n-1-j) y^j`` of ``u``, columns
    ``n..2n-1`` those of ``v``; rows are the monomials ``x^(2n-1-k) y^k``.
    """

    n: int
    matrix: tuple
    inverse: tuple | None
    exact: bool
    condition_number: float

    @property
    def invertible(self):
        return self.inverse is not None

    @property
    def inverse_norm(self):
        if self.inverse is None:
            return float("inf")
        return l1_operator_norm([list(r) for r in self.inverse])

    def solve(self, f: BiPoly):
        """Return ``(u, v)`` with ``a u + b v = f`` for ``f`` homogeneous of degree 2n-1."""
        if self.inverse is None:
            raise NotRegularError("singular division map: pair has a common factor")
        n = self.n
        rhs = [0] * (2 * n)
        for (i, j), c in f.items():
            if i + j != 2 * n - 1:
                raise DegreeError("right-hand side must be homogeneous of degree %d" % (2 * n - 1))
            rhs[_hom_index(i, j)] = c
        z = [sum((self.inverse[r][k] * rhs[k] for k in range(2 * n) if rhs[k] != 0), 0)
             for r in range(2 * n)]
        u = BiPoly({(n - 1 - j, j): z[j] for j in range(n)})
        v = BiPoly({(n - 1 - j, j): z[n + j] for j in range(n)})
        return u, v

    def monomial_quotients(self):
        """``eta_k`` with ``xihat ^ eta_k = x^(2n-1-k) y^k dx^dy`` for every k."""
        return _quotients(self)


@lru_cache(maxsize=256)
def _quotients(smap):
    n = smap.n
    out = []
    for k in range(2 * n):
        u, v = smap.solve(BiPoly.monomial(2 * n - 1 - k, k, 1))
        out.append(Form1(-v, u))
    return tuple(out)


def _check_pair(a: BiPoly, b: BiPoly):
    degs = {d for d in (a.degree, b.degree) if d is not None}
    if len(degs) > 1 or not (a.is_homogeneous() and b.is_homogeneous()):
        raise DegreeError("pair must be homogeneous of one common degree")
    if not degs:
        raise DegreeError("pair is identically zero")
    return degs.pop()


@lru_cache(maxsize=256)
def sylvester_map(a: BiPoly, b: BiPoly, n: int | None = None) -> SylvesterMap:
    """Build and invert the division map of a homogeneous pair of degree ``n``."""
    if n is None:
        n = _check_pair(a, b)
    exact = a.is_exact() and b.is_exact()
    N = 2 * n
    M = [[0] * N for _ in range(N)]
    for col, poly in ((0, a), (n, b)):
        for j in range(n):
            # u (or v) monomial x^(n-1-j) y^j times poly term x^p y^q
            for (p, q), c in poly.items():
                M[_hom_index(p + n - 1 - j, q + j)][col + j] = c
    if exact:
        Mf = [[Fraction(c) for c in r] for r in M]
        inv = exact_inverse(Mf)
        arr = np.array([[float(c) for c in r] for r in Mf])
        cond = float(np.linalg.cond(arr, 1)) if inv is not None else float("inf")
        inv_t = None if inv is None else tuple(tuple(r) for r in inv)
        return SylvesterMap(n, tuple(tuple(r) for r in Mf), inv_t, True, cond)
    arr = np.array([[complex(c) for c in r] for r in M], dtype=np.complex128)
    scale = a.l1_norm() ** n * b.l1_norm() ** n
    det = abs(np.linalg.det(arr))
    if scale == 0 or det <= REGULARITY_TOL * scale:
        return SylvesterMap(n, tuple(tuple(r) for r in arr), None, False, float("inf"))
    cond = float(np.real(np.linalg.cond(arr, 1)))
    inv = np.linalg.inv(arr)
    return SylvesterMap(n, tuple(tuple(r) for r in arr), tuple(tuple(complex(c) for c in r) for r in inv),
                        False, cond)


def gradient_map(Hhat: BiPoly) -> SylvesterMap:
    """Division map for the pair ``(Hhat_x, Hhat_y)``."""
    n = Hhat.degree - 1
    return sylvester_map(Hhat.diff("x"), Hhat.diff("y"), n)


def _deg_check(H):
    if H.is_zero() or H.degree < 2:
        raise DegreeError("degree too small: need deg H >= 2")


def is_regular_at_infinity(H: BiPoly) -> bool:
    """True iff the principal part is a product of distinct linear forms."""
    _deg_check(H)
    return gradient_map(principal_part(H)).invertible


def normalization_constant(Hhat: BiPoly):
    """l1 operator norm of the inverse division map of ``(Hhat_x, Hhat_y)``.

    Exact (a ``Fraction``) for rational input.  The float backend refuses maps
    whose condition number exceeds ``COND_LIMIT``.
    """
    if not Hhat.is_homogeneous():
        Hhat = principal_part(Hhat)
    _deg_check(Hhat)
    smap = gradient_map(Hhat)
    if not smap.invertible:
        raise NotRegularError("not regular at infinity")
    if not smap.exact and smap.condition_number > COND_LIMIT:
        raise IllConditionedError("division map condition number %.3g exceeds %.0e"
                                  % (smap.condition_number, COND_LIMIT))
    return smap.inverse_norm


def is_quasimonic(H: BiPoly, tol=QUASIMONIC_TOL) -> bool:
    try:
        k = normalization_constant(principal_part(H))
    except (NotRegularError, DegreeError):
        return False
    if isinstance(k, Fraction):
        return k <= 1
    return k <= 1 + tol


def nonhomogeneity(H: BiPoly):
    """``||H - Hhat||``."""
    return (H - principal_part(H)).l1_norm()


def is_balanced(H: BiPoly, tol=QUASIMONIC_TOL) -> bool:
    if not is_quasimonic(H, tol):
        return False
    h = nonhomogeneity(H)
    return h <= 1 if isinstance(h, Fraction) else h <= 1 + tol


@dataclass
class NormalizationReport:
    regular_at_infinity: bool
    inverse_norm: float | None
    quasimonic: bool
    scale_applied: object
    condition_number: float | None = None
    #: the stricter reading "inverse of the unit norm" (equality)
    unit_inverse_norm: bool = False

    def to_dict(self):
        def num(v):
            if v is None:
                return None
            if isinstance(v, complex):
                return [v.real, v.imag] if v.imag else v.real
            if isinstance(v, Fraction):
                return float(v)
            return v
        return {
            "schema": "pf/1",
            "regular": self.regular_at_infinity,
            "inverse_norm": num(self.inverse_norm),
            "quasimonic": self.quasimonic,
            "unit_inverse_norm": self.unit_inverse_norm,
            "scale": num(self.scale_applied),
            "condition_number": num(self.condition_number),
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def normalization_report(H: BiPoly, scale=1) -> NormalizationReport:
    _deg_check(H)
    smap = gradient_map(principal_part(H))
    if not smap.invertible:
        return NormalizationReport(False, None, False, scale, None, False)
    k = smap.inverse_norm
    exact = isinstance(k, Fraction)
    qm = k <= 1 if exact else k <= 1 + QUASIMONIC_TOL
    unit = k == 1 if exact else abs(k - 1) <= QUASIMONIC_TOL
    return NormalizationReport(True, k, qm, scale, smap.condition_number, unit)


def make_quasimonic(H: BiPoly, mode: str = "scalar"):
    """Rescale a regular Hamiltonian so that it becomes quasimonic.

    ``mode="scalar"`` returns ``lam * H`` with ``lam = max(1, K)`` where ``K``
    is the normalization constant; ``mode="dilation"`` returns
    ``H(mu x, mu y)`` with ``mu = lam ** (1/(n+1))`` instead.  Returns the new
    Hamiltonian and the scale (``lam`` resp. ``mu``).
    """
    _deg_check(H)
    Hhat = principal_part(H)
    if not gradient_map(Hhat).invertible:
        raise NotRegularError("not regular at infinity")
    k = normalization_constant(Hhat)
    lam = max(1, k)
    if lam == 1:
        return H, 1
    if mode == "scalar":
        return H * lam, lam
    if mode == "dilation":
        mu = float(lam) ** (1.0 / H.degree)
        return H.to_float().scale_vars(mu), mu
    raise PFError("unknown mode %r" % mode)


def make_balanced(H: BiPoly):
    """Return ``lam^-(n+1) H(lam x, lam y)`` with ``lam = max(1, ||H - Hhat||)``.

    The principal part is unchanged and each degree-k term is multiplied by
    ``lam^(k-n-1) <= 1/lam``, so the result is balanced.  The induced change
    of the level is ``t -> lam^-(n+1) t``.
    """
    if not is_quasimonic(H):
        raise NotQuasimonicError("make_balanced needs a quasimonic Hamiltonian")
    N = H.degree
    lam = max(1, nonhomogeneity(H))
    if lam == 1:
        return H, 1
    if isinstance(lam, Fraction) and H.is_exact():
        return BiPoly({(a, b): c * lam ** (a + b - N) for (a, b), c in H.items()}), lam
    return BiPoly({(a, b): c * float(lam) ** (a + b - N) for (a, b), c in H.items()}), lam


def require_balanced(H: BiPoly):
    if not is_quasimonic(H):
        raise NotBalancedError("Hamiltonian is not quasimonic (principal part not normalized)")
    h = nonhomogeneity(H)
    if (h > 1) if isinstance(h, Fraction) else (h > 1 + QUASIMONIC_TOL):
        raise NotBalancedError("||H - Hhat|| = %s exceeds 1" % float(abs(h)))


def bidisk_boundary_samples(samples: int, seed=0):
    """Points on the boundary of the unit bidisk, half on each face."""
    rng = np.random.default_rng(seed)
    m = max(samples // 2, 1)
    th = rng.uniform(0, 2 * np.pi, m)
    ph = rng.uniform(0, 2 * np.pi, m)
    r = np.sqrt(rng.uniform(0, 1, m))
    r[: m // 4] = 1.0  # the distinguished torus |x| = |y| = 1
    face = np.exp(1j * th)
    inner = r * np.exp(1j * ph)
    xs = np.concatenate([face, inner])
    ys = np.concatenate([inner, face])
    return xs, ys


def gradient_floor(Hhat: BiPoly, samples: int = 10_000, seed=0) -> float:
    """Sampled minimum of the Hermitian length of ``grad Hhat`` on the boundary
    of the unit bidisk.  A probe from above of the true minimum, not a proof."""
    if not Hhat.is_homogeneous():
        Hhat = principal_part(Hhat)
    xs, ys = bidisk_boundary_samples(samples, seed)
    size = Hhat.degree + 1
    Ca = Hhat.diff("x").to_dense(size)
    Cb = Hhat.diff("y").to_dense(size)
    return _kernels.grad_norm_min(Ca, Cb, xs, ys)

