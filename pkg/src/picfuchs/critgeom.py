"""Geometry of critical values of univariate polynomials, and effective nonhomogeneity.

* For monic ``p`` whose critical values lie in the closed unit disk the roots
  have diameter at most ``4e`` (:func:`uni_crit` reports both).
* :func:`recenter_min_norm` estimates ``min_a ||p(x + a) - x^(n+1)||``.
* :func:`bounded_interval` measures the interval ``{|p| <= 1}`` of a real
  monic polynomial with real critical points and values in ``[-1, 1]``; it
  never exceeds 4.
* :func:`kappa_estimate` bounds ``inf_T ||H o T - Hhat||`` over translations
  from above.

Infima are found with multistart Nelder-Mead and are upper estimates, not
certified values.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .errors import PFError
from .forms import BiPoly, principal_part

FOUR_E = 4 * math.e


def _coeffs(p):
    if isinstance(p, BiPoly):
        p = p.univariate("x")
    c = np.array([complex(v) for v in p], dtype=np.complex128)
    while c.size > 1 and c[-1] == 0:
        c = c[:-1]
    return c


def _check_monic(c, min_degree=1):
    if c.size - 1 < min_degree:
        raise PFError("polynomial degree must be >= %d" % min_degree)
    if abs(c[-1] - 1) > 1e-12:
        raise PFError("polynomial must be monic")


def polished_roots(c, iters=50):
    """Roots by companion-matrix eigenvalues, each refined by Newton steps that
    are kept only while they reduce the residual."""
    c = np.asarray(c, dtype=np.complex128)
    if c.size <= 1:
        return np.zeros(0, dtype=np.complex128)
    desc = c[::-1]
    roots = np.roots(desc)
    d = np.polyder(desc)
    out = []
    for r in roots:
        f = abs(np.polyval(desc, r))
        for _ in range(iters):
            dv = np.polyval(d, r)
            if dv == 0:
                break
            r2 = r - np.polyval(desc, r) / dv
            f2 = abs(np.polyval(desc, r2))
            if not f2 < f:
                break
            r, f = r2, f2
        out.append(r)
    return np.array(out, dtype=np.complex128)


@dataclass(frozen=True)
class UniCritReport:
    crit_points: list
    crit_values: list
    roots: list
    root_diameter: float
    sigma_in_unit_disk: bool
    max_abs_value: float

    @property
    def bound(self):
        return FOUR_E

    @property
    def holds(self):
        return (not self.sigma_in_unit_disk) or self.root_diameter <= FOUR_E

    def to_dict(self):
        def c(v):
            v = complex(v)
            return [v.real, v.imag]
        return {"schema": "pf/1", "crit_points": [c(v) for v in self.crit_points],
                "crit_values": [c(v) for v in self.crit_values], "roots": [c(v) for v in self.roots],
                "root_diameter": self.root_diameter, "sigma_in_unit_disk": self.sigma_in_unit_disk,
                "max_abs_value": self.max_abs_value, "bound": FOUR_E, "holds": self.holds}

    def to_json(self):
        return json.dumps(self.to_dict())


def uni_crit(p, tol=1e-12) -> UniCritReport:
    """Critical points/values and root diameter of a monic polynomial."""
    c = _coeffs(p)
    _check_monic(c, 2)
    dc = np.array([k * c[k] for k in range(1, c.size)])
    cps = polished_roots(dc)
    vals = _kernels.horner(c, cps)
    roots = polished_roots(c)
    diam = _kernels.max_pairwise_distance(roots)
    m = float(np.abs(vals).max()) if vals.size else 0.0
    return UniCritReport(list(cps), list(vals), list(roots), diam, m <= 1 + tol, m)


def normalize_to_unit_sigma(p):
    """``p(s x) / s^N`` with ``s = M^(1/N)``, ``M = max |t_j|``: monic with critical
    values ``t_j / M`` (so the maximal one has modulus 1)."""
    c = _coeffs(p)
    _check_monic(c, 2)
    N = c.size - 1
    M = uni_crit(c).max_abs_value
    if M == 0:
        return c, 1.0
    s = M ** (1.0 / N)
    return c * s ** np.arange(N + 1) / s ** N, s


def random_monic(degree, rng, scale=2.0, real=False):
    lower = rng.normal(scale=scale, size=degree)
    if not real:
        lower = lower + 1j * rng.normal(scale=scale, size=degree)
    return np.concatenate([lower, [1.0]]).astype(np.complex128)


def random_monic_unit_sigma(degree, rng):
    """Random monic polynomial whose critical values lie in the closed unit disk."""
    while True:
        c, _ = normalize_to_unit_sigma(random_monic(degree, rng))
        if uni_crit(c).max_abs_value > 0:
            return c


def random_real_chebyshev_type(degree, rng):
    """Real monic polynomial with real critical points and values scaled into ``[-1, 1]``.

    Built from ``p' = N prod (x - c_k)`` with real ``c_k``; the constant term
    centers the values, then ``p(s x)/s^N`` scales them.
    """
    N = degree
    cps = np.sort(rng.normal(scale=2.0, size=N - 1))
    dp = np.poly(cps)[::-1] * N  # ascending
    c = np.concatenate([[0.0], [dp[k] / (k + 1) for k in range(N)]])
    vals = np.polyval(c[::-1], cps)
    c[0] -= 0.5 * (vals.max() + vals.min())
    vals = np.polyval(c[::-1], cps)
    M = float(np.abs(vals).max())
    if M > 0:
        s = M ** (1.0 / N)
        c = c * s ** np.arange(N + 1) / s ** N
    return c


# ---------------------------------------------------------------------------
# recentering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecenterResult:
    shift: complex
    norm: float
    bound: float
    within_bound: bool
    converged: bool
    warning: str | None = None

    def to_dict(self):
        d = asdict(self)
        d["shift"] = [self.shift.real, self.shift.imag]
        return d


def _simplex(x0, step):
    x0 = np.asarray(x0, dtype=float)
    return np.vstack([x0] + [x0 + step * e for e in np.eye(x0.size)])


def _nm(fun, x0, step, maxiter=10_000):
    """Nelder-Mead from an explicit simplex of side ``step``.

    The simplex is passed explicitly so that the search is equivariant under
    translations (scipy's default simplex scales with ``|x0|``).
    """
    opts = {"xatol": 1e-9, "fatol": 1e-12, "maxiter": maxiter, "maxfev": 2 * maxiter}
    best = minimize(fun, x0, method="Nelder-Mead", options=dict(opts, initial_simplex=_simplex(x0, step)))
    # restarts shrink a simplex that stalled on a kink of the l1 objective
    for _ in range(3):
        r = minimize(fun, best.x, method="Nelder-Mead",
                     options=dict(opts, initial_simplex=_simplex(best.x, step * 1e-3)))
        if r.fun < best.fun - 1e-15:
            best = r
        else:
            break
    return best


def recenter_min_norm(p, maxiter=10_000) -> RecenterResult:
    """Estimate ``min over a in C of ||p(x + a) - x^N||`` (upper estimate).

    Seeds: the root centroid and the two roots where the objective is
    smallest.  When the critical values lie in the unit disk the value must
    stay below ``12^N``.
    """
    c = _coeffs(p)
    _check_monic(c, 1)
    N = c.size - 1
    fun = lambda v: _kernels.uni_shift_l1(c, complex(v[0], v[1]))  # noqa: E731
    roots = polished_roots(c)
    centroid = complex(-c[N - 1] / N)
    # descend from the centroid and from the two roots with the best objective
    ranked = sorted(roots, key=lambda r: fun([r.real, r.imag]))
    seeds = [centroid] + list(ranked[:2])
    spread = float(np.abs(roots - centroid).max()) if roots.size else 0.0
    step = 0.1 * max(spread, 1e-3)
    best = None
    converged = True
    for s in seeds:
        r = _nm(fun, np.array([s.real, s.imag]), step, maxiter)
        converged = converged and bool(r.success)
        if best is None or r.fun < best.fun:
            best = r
    a = complex(best.x[0], best.x[1])
    norm = float(best.fun)
    in_disk = N >= 2 and uni_crit(c).sigma_in_unit_disk
    bound = 12.0 ** N
    warning = None if converged else "descent did not converge; best value returned"
    return RecenterResult(a, norm, bound, (norm <= bound) if in_disk else True, converged, warning)


# ---------------------------------------------------------------------------
# Chebyshev-type interval
# ---------------------------------------------------------------------------

def _real_roots(c_real, tol=1e-9):
    r = polished_roots(c_real.astype(np.complex128))
    return sorted(float(v.real) for v in r if abs(v.imag) <= tol * (1 + abs(v)))


def bounded_interval(p, tol=1e-9) -> float:
    """Length of the interval ``{|p| <= 1}`` that contains all real roots.

    Preconditions (checked): ``p`` real monic, all critical points real, all
    critical values in ``[-1, 1]``.  Between the extreme critical points
    ``|p| <= 1`` holds throughout, so the interval is bounded by the outermost
    solutions of ``p = +-1``.
    """
    c = _coeffs(p)
    _check_monic(c, 1)
    if np.abs(c.imag).max() > 0:
        raise PFError("bounded_interval needs a real polynomial")
    c = c.real
    N = c.size - 1
    if N == 1:
        return 2.0
    rep = uni_crit(c)
    cps = np.array(rep.crit_points)
    if np.abs(cps.imag).max() > tol * (1 + np.abs(cps).max()):
        raise PFError("critical points are not all real")
    if np.abs(np.array(rep.crit_values)).max() > 1 + tol:
        raise PFError("critical values are not in [-1, 1]")
    lo_c, hi_c = float(cps.real.min()), float(cps.real.max())
    ends = []
    for sgn in (1.0, -1.0):
        q = c.copy()
        q[0] -= sgn
        ends.extend(_real_roots(q, 1e-6))
    left = min([e for e in ends if e <= lo_c + tol] or [lo_c])
    right = max([e for e in ends if e >= hi_c - tol] or [hi_c])
    return right - left


def real_root_span(p) -> float:
    c = _coeffs(p)
    r = _real_roots(c.real)
    return (r[-1] - r[0]) if len(r) >= 2 else 0.0


# ---------------------------------------------------------------------------
# effective nonhomogeneity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KappaEstimate:
    kappa_upper: float
    translation: tuple
    iterations: int
    starts: int

    def to_dict(self):
        a, b = self.translation
        return {"schema": "pf/1", "kappa_upper": self.kappa_upper,
                "translation": [[a.real, a.imag], [b.real, b.imag]],
                "iterations": self.iterations, "starts": self.starts}

    def to_json(self):
        return json.dumps(self.to_dict())


def _ls_seed(H: BiPoly):
    """Translation killing the degree-n part in the least-squares sense.

    The degree-n part of ``H(x + a, y + b)`` is ``H_n + a Hhat_x + b Hhat_y``.
    """
    N = H.degree
    Hh = principal_part(H)
    Hn = H.homogeneous_part(N - 1)
    gx, gy = Hh.diff("x"), Hh.diff("y")
    keys = [(N - 1 - j, j) for j in range(N)]
    M = np.array([[complex(gx.coeff(*k)), complex(gy.coeff(*k))] for k in keys])
    rhs = -np.array([complex(Hn.coeff(*k)) for k in keys])
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return complex(sol[0]), complex(sol[1])


def kappa_estimate(H: BiPoly, maxiter=4000) -> KappaEstimate:
    """Upper estimate of ``inf over (a, b) of ||H(x + a, y + b) - Hhat||``.

    Nelder-Mead in the four real parameters from a 3 x 3 grid around the
    least-squares seed (spacing from the seed's objective value), plus the
    identity translation, so the result never exceeds ``||H - Hhat||``.
    """
    N = H.degree
    C = H.to_dense(N + 1)
    fun = lambda v: _kernels.bi_shift_l1(C, complex(v[0], v[1]), complex(v[2], v[3]), N)  # noqa: E731
    a0, b0 = _ls_seed(H)
    v0 = fun([a0.real, a0.imag, b0.real, b0.imag])
    step = 0.5 * max(1.0, v0) ** (1.0 / N)
    starts = [np.array([a0.real + i * step, a0.imag, b0.real + j * step, b0.imag])
              for i in (-1, 0, 1) for j in (-1, 0, 1)]
    best_x = np.zeros(4)
    best_f = fun(best_x)
    its = 0
    for s in starts:
        r = _nm(fun, s, 0.2 * step, maxiter)
        its += int(r.nit)
        if r.fun < best_f:
            best_f, best_x = float(r.fun), r.x
    return KappaEstimate(float(best_f), (complex(best_x[0], best_x[1]), complex(best_x[2], best_x[3])),
                         its, len(starts))
