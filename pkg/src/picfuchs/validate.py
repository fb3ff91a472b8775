"""Independent numerical checks: critical loci, hyperelliptic periods, ODE residuals.

Critical points are found by elimination (a resultant after a random shear,
computed exactly by sympy), square-free factorization for multiplicities,
numerical roots and Newton polishing.  Periods of ``H = y^2/2 + p(x)`` over a
real oval are 1D integrals; the substitution ``x = m + w sin(theta)`` removes
the square-root endpoint singularities so Gauss-Legendre converges
geometrically.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy as sp

from .errors import NoOvalError, NonIsolatedError, PFError
from .forms import BiPoly, to_fraction
from .normalization import is_quasimonic, is_regular_at_infinity, nonhomogeneity

_X, _Y = sp.symbols("X Y")
SHEARS = (Fraction(3, 7), Fraction(-5, 11), Fraction(7, 13), Fraction(-2, 17), Fraction(11, 19),
          Fraction(13, 23))
CLUSTER_RADIUS = 1e-8


# ---------------------------------------------------------------------------
# critical points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalLocus:
    points: tuple          # (x, y, multiplicity)
    values: tuple          # one value per point, repeated by multiplicity
    total_multiplicity: int
    regular: bool = True
    warning: str | None = None

    def to_dict(self):
        def c(v):
            v = complex(v)
            return [v.real, v.imag]
        return {"points": [{"x": c(x), "y": c(y), "multiplicity": m} for x, y, m in self.points],
                "values": [c(v) for v in self.values],
                "total_multiplicity": self.total_multiplicity,
                "regular": self.regular, "warning": self.warning}


def _to_sympy_coeff(c):
    if isinstance(c, (int, Fraction)):
        c = Fraction(c)
        return sp.Rational(c.numerator, c.denominator)
    c = complex(c)
    re = Fraction(c.real).limit_denominator(10 ** 15)
    im = Fraction(c.imag).limit_denominator(10 ** 15)
    out = sp.Rational(re.numerator, re.denominator)
    if im:
        out += sp.I * sp.Rational(im.numerator, im.denominator)
    return out


def _sympy_poly(P: BiPoly, s):
    """``P(X + sY, Y)`` as a sympy expression."""
    s = sp.Rational(s.numerator, s.denominator)
    expr = 0
    for (a, b), c in P.items():
        expr += _to_sympy_coeff(c) * (_X + s * _Y) ** a * _Y ** b
    return sp.expand(expr)


def _newton2(f, g, fx, fy, gx, gy, x, y, iters=30):
    for _ in range(iters):
        F = np.array([f(x, y), g(x, y)], dtype=complex)
        J = np.array([[fx(x, y), fy(x, y)], [gx(x, y), gy(x, y)]], dtype=complex)
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            break
        x, y = x - step[0], y - step[1]
        if abs(step[0]) + abs(step[1]) <= 1e-15 * (1 + abs(x) + abs(y)):
            break
    return complex(x), complex(y)


def _roots_of_factor(fac):
    # sqf_list clears denominators, so the integer coefficients can exceed the
    # float range; divide by the leading one exactly before converting
    exact = sp.Poly(fac, _X).all_coeffs()
    lc = exact[0]
    coeffs = [complex(sp.N(sp.expand(c / lc), 20)) for c in exact]
    if len(coeffs) <= 1:
        return []
    roots = np.roots(coeffs)
    # polish on the factor itself
    dco = np.polyder(coeffs)
    out = []
    for r in roots:
        for _ in range(8):
            d = np.polyval(dco, r)
            if d == 0:
                break
            step = np.polyval(coeffs, r) / d
            r = r - step
            if abs(step) <= 1e-16 * (1 + abs(r)):
                break
        out.append(complex(r))
    return out


def _univariate_in_Y(expr, X0):
    P = sp.Poly(expr, _Y)
    coeffs = [complex(sp.N(c.subs(_X, X0), 30)) if c.free_symbols else complex(c) for c in P.all_coeffs()]
    while len(coeffs) > 1 and abs(coeffs[0]) == 0:
        coeffs.pop(0)
    return coeffs


def _shear_attempt(H: BiPoly, s):
    Hx, Hy = H.diff("x"), H.diff("y")
    f = _sympy_poly(Hx, s)
    g = _sympy_poly(Hy, s)
    if f == 0 or g == 0:
        return None, "a partial derivative vanishes identically"
    R = sp.resultant(f, g, _Y)
    R = sp.expand(R)
    if R == 0:
        raise NonIsolatedError("non-isolated critical locus")
    if not R.free_symbols:
        return [], None
    _, factors = sp.sqf_list(R, _X)
    fX = sp.lambdify((_X, _Y), f, "numpy")
    gX = sp.lambdify((_X, _Y), g, "numpy")
    fs = [sp.lambdify((_X, _Y), sp.diff(e, v), "numpy") for e in (f, g) for v in (_X, _Y)]
    scale = max(Hx.l1_norm(), Hy.l1_norm(), 1e-300)
    scale = float(abs(scale))
    pts = []
    for fac, mult in factors:
        if not fac.free_symbols:
            continue
        for X0 in _roots_of_factor(fac):
            gc = _univariate_in_Y(g, X0)
            fc = _univariate_in_Y(f, X0)
            cand = []
            for co in (gc, fc):
                if len(co) > 1:
                    cand.extend(np.roots(co))
            if not cand:
                return None, "no back-substitution candidates"
            res = [abs(complex(fX(X0, Y))) + abs(complex(gX(X0, Y))) for Y in cand]
            big = max(1.0, abs(X0)) ** max(H.degree - 1, 1)
            tol = 1e-6 * scale * big if mult == 1 else 1e-3 * scale * big
            good = [Y for Y, r in zip(cand, res) if r <= tol]
            if not good:
                good = [cand[int(np.argmin(res))]]
            # two well separated common roots over one X means the shear is degenerate
            best = good[int(np.argmin([abs(complex(fX(X0, Y))) + abs(complex(gX(X0, Y))) for Y in good]))]
            if any(abs(Y - best) > 1e-3 * (1 + abs(best)) for Y in good if mult == 1):
                return None, "two critical points share a sheared abscissa"
            Y0 = complex(best)
            if mult == 1:
                X0, Y0 = _newton2(fX, gX, *fs, X0, Y0)
            pts.append((X0, Y0, int(mult)))
    sf = float(s)
    return [(X0 + sf * Y0, Y0, m) for X0, Y0, m in pts], None


def critical_points(H: BiPoly) -> CriticalLocus:
    """Solve ``H_x = H_y = 0`` with multiplicities.

    The total multiplicity equals ``n^2`` when ``H`` is regular at infinity;
    otherwise the points found are returned with ``regular=False``.
    """
    if H.is_zero() or H.degree < 2:
        raise PFError("degree too small: need deg H >= 2")
    try:
        regular = is_regular_at_infinity(H)
    except PFError:
        regular = False
    n = H.degree - 1
    reason = None
    pts = None
    for s in SHEARS:
        pts, reason = _shear_attempt(H, s)
        if pts is not None:
            total = sum(m for _, _, m in pts)
            if regular and total != n * n:
                reason = "multiplicity count %d differs from n^2 = %d" % (total, n * n)
                pts = None
                continue
            break
    if pts is None:
        raise PFError("critical point computation failed: %s" % reason)
    pts = _merge_clusters(pts)
    Hf = H.to_float()
    values = []
    out_pts = []
    for x, y, m in pts:
        t = complex(Hf(x, y))
        out_pts.append((x, y, m))
        values.extend([t] * m)
    total = sum(m for _, _, m in out_pts)
    warn = None if regular else "H is not regular at infinity"
    return CriticalLocus(tuple(out_pts), tuple(values), total, regular, warn)


def _merge_clusters(pts, radius=CLUSTER_RADIUS):
    out = []
    for x, y, m in pts:
        for k, (x2, y2, m2) in enumerate(out):
            if abs(x - x2) + abs(y - y2) <= radius * (1 + abs(x2) + abs(y2)):
                out[k] = (x2, y2, m2 + m)
                break
        else:
            out.append((x, y, m))
    return out


@dataclass(frozen=True)
class SigmaChart:
    """Affine chart ``t -> (t - shift) / scale``."""

    shift: complex
    scale: float

    def __call__(self, t):
        return (t - self.shift) / self.scale

    def inverse(self, s):
        return s * self.scale + self.shift


def normalize_sigma(values, tol=1e-12):
    """Translate and scale critical values so that they sum to 0 with max modulus 1."""
    v = np.asarray([complex(t) for t in values], dtype=np.complex128)
    if v.size == 0:
        raise PFError("empty set of critical values")
    mean = complex(v.mean())
    r = float(np.abs(v - mean).max())
    if r <= tol * max(1.0, float(np.abs(v).max())):
        raise PFError("all critical values coincide: critical locus is a point")
    chart = SigmaChart(mean, r)
    return chart, [complex(chart(t)) for t in v]


def single_value_check(H: BiPoly, rel_tol=1e-8) -> bool:
    """True iff all critical values of ``H`` coincide within tolerance."""
    vals = critical_points(H).values
    v = np.asarray(vals, dtype=np.complex128)
    if v.size <= 1:
        return True
    scale = max(1.0, float(np.abs(v).max()))
    return float(np.abs(v - v[0]).max()) <= rel_tol * scale


@dataclass(frozen=True)
class InverseSenseReport:
    holds: bool
    max_abs_value: float
    bound: float
    nonhomogeneity: float


def inverse_sense_check(H: BiPoly, n=None) -> InverseSenseReport:
    """With ``||H - Hhat|| <= 1/(n sqrt 2)`` all critical values satisfy ``|t| <= 3/n``."""
    n = H.degree - 1 if n is None else n
    if not is_quasimonic(H):
        raise PFError("inverse_sense_check needs a quasimonic Hamiltonian")
    h = nonhomogeneity(H)
    limit = 1 / (n * math.sqrt(2))
    if isinstance(h, (int, Fraction)):
        ok = Fraction(h) ** 2 * 2 * n * n <= 1
    else:
        ok = float(abs(h)) <= limit * (1 + 1e-12)
    if not ok:
        raise PFError("||H - Hhat|| = %.6g exceeds 1/(n sqrt 2) = %.6g" % (float(abs(h)), limit))
    vals = critical_points(H).values
    m = max((abs(complex(t)) for t in vals), default=0.0)
    return InverseSenseReport(m <= 3 / n + 1e-12, m, 3 / n, float(abs(h)))


# ---------------------------------------------------------------------------
# hyperelliptic periods
# ---------------------------------------------------------------------------

def _real_coeffs(p):
    if isinstance(p, BiPoly):
        p = p.univariate("x")
    c = [complex(v) for v in p]
    if any(abs(v.imag) > 0 for v in c):
        raise PFError("periods need a real potential p")
    return np.array([v.real for v in c])


def _polish_real(c_desc, r, iters=20):
    d = np.polyder(c_desc)
    for _ in range(iters):
        dv = np.polyval(d, r)
        if dv == 0:
            break
        step = np.polyval(c_desc, r) / dv
        r -= step
        if abs(step) <= 1e-16 * (1 + abs(r)):
            break
    return r


def local_minima(p):
    """Real local minima of ``p`` sorted ascending."""
    c = _real_coeffs(p)
    desc = c[::-1]
    dp = np.polyder(desc)
    d2 = np.polyder(dp)
    out = []
    for r in np.roots(dp):
        if abs(r.imag) <= 1e-9 * (1 + abs(r)):
            x = _polish_real(dp, r.real)
            if np.polyval(d2, x) > 0:
                out.append(float(x))
    return sorted(out)


def critical_values_1d(p):
    c = _real_coeffs(p)
    desc = c[::-1]
    dp = np.polyder(desc)
    return [complex(np.polyval(desc, r)) for r in np.roots(dp)]


@dataclass(frozen=True)
class Oval:
    left: float
    right: float
    center: float
    index: int


def find_oval(p, t, oval=0) -> Oval:
    """The component of ``{p(x) <= t}`` around the ``oval``-th local minimum."""
    c = _real_coeffs(p)
    desc = c[::-1]
    mins = local_minima(c)
    if not mins:
        raise NoOvalError("p has no real local minimum, so {H = t} has no compact real oval")
    if not (0 <= oval < len(mins)):
        raise NoOvalError("oval index %d out of range (%d real wells)" % (oval, len(mins)))
    xc = mins[oval]
    t = float(np.real(t))
    if np.polyval(desc, xc) >= t:
        raise NoOvalError("level t = %g lies below the bottom of well %d" % (t, oval))
    shifted = desc.copy()
    shifted[-1] -= t
    roots = []
    for r in np.roots(shifted):
        if abs(r.imag) <= 1e-7 * (1 + abs(r)):
            roots.append(float(_polish_real(shifted, r.real)))
    left = [r for r in roots if r < xc]
    right = [r for r in roots if r > xc]
    if not left or not right:
        raise NoOvalError("no compact real oval at level t = %g" % t)
    x0, x1 = max(left), min(right)
    scale = max(1.0, abs(t))
    for v in critical_values_1d(c):
        if abs(v.imag) <= 1e-9 * scale and abs(v.real - t) <= 1e-9 * scale:
            raise NoOvalError("t = %g is a critical value" % t)
    return Oval(x0, x1, xc, oval)


def _deflated(c, t, x0, x1):
    """Coefficients (descending) of ``q = (t - p) / ((x - x0)(x1 - x))``."""
    desc = -c[::-1].copy()
    desc[-1] += t
    q, _ = np.polydiv(desc, np.array([-1.0, x0 + x1, -x0 * x1]))
    return q


def _gauss(fun, tol=1e-14, start=16, max_nodes=4096):
    nodes = start
    prev = None
    while True:
        u, w = np.polynomial.legendre.leggauss(nodes)
        th = u * (np.pi / 2)
        val = fun(th) @ (w * (np.pi / 2))
        if prev is not None and np.abs(val - prev).max() <= tol * max(np.abs(val).max(), 1e-300):
            return val
        if nodes >= max_nodes:
            return val
        prev = val
        nodes *= 2


def _period_integrands(p, t, oval, n):
    c = _real_coeffs(p)
    ov = find_oval(c, t, oval)
    m = 0.5 * (ov.left + ov.right)
    w = 0.5 * (ov.right - ov.left)
    q = _deflated(c, float(np.real(t)), ov.left, ov.right)
    return m, w, q, ov


def hyperelliptic_periods(p, t, oval=0, n=None):
    """``I_i(t) = 2 int x^(i-1) sqrt(2(t - p(x))) dx`` over the oval, ``i = 1..n``."""
    c = _real_coeffs(p)
    n = len(c) - 2 if n is None else n
    m, w, q, _ = _period_integrands(c, t, oval, n)
    powers = np.arange(n)

    def fun(th):
        x = m + w * np.sin(th)
        qq = np.maximum(np.polyval(q, x), 0.0)
        base = np.cos(th) ** 2 * np.sqrt(qq)
        return (x[None, :] ** powers[:, None]) * base[None, :]
    return 2 * math.sqrt(2) * w * w * _gauss(fun)


def gelfand_leray_vector(p, t, oval=0, n=None):
    """``dI_i/dt = 2 int x^(i-1) / sqrt(2(t - p(x))) dx``, ``i = 1..n``."""
    c = _real_coeffs(p)
    n = len(c) - 2 if n is None else n
    m, w, q, _ = _period_integrands(c, t, oval, n)
    powers = np.arange(n)

    def fun(th):
        x = m + w * np.sin(th)
        qq = np.polyval(q, x)
        return (x[None, :] ** powers[:, None]) / np.sqrt(qq)[None, :]
    return math.sqrt(2) * _gauss(fun)


def gelfand_leray_derivative(p, t, oval=0, i=1):
    """Single component ``dI_i/dt`` (``i`` is 1-based)."""
    c = _real_coeffs(p)
    n = max(i, len(c) - 2)
    return float(gelfand_leray_vector(c, t, oval, n)[i - 1])


def finite_difference_derivative(p, t, oval=0, i=1, h=None):
    """Central difference of ``I_i`` with step ``1e-5 * max(1, |t|)``."""
    c = _real_coeffs(p)
    h = 1e-5 * max(1.0, abs(float(np.real(t)))) if h is None else h
    n = max(i, len(c) - 2)
    up = hyperelliptic_periods(c, t + h, oval, n)[i - 1]
    dn = hyperelliptic_periods(c, t - h, oval, n)[i - 1]
    return float((up - dn) / (2 * h))


@dataclass(frozen=True)
class PeriodSample:
    t: float
    I: np.ndarray
    Idot: np.ndarray
    cycle_id: str = "oval0"

    def is_finite(self):
        return bool(np.all(np.isfinite(self.I)) and np.all(np.isfinite(self.Idot)))


def period_samples(p, ts, oval=0, n=None):
    c = _real_coeffs(p)
    out = []
    for t in ts:
        I = hyperelliptic_periods(c, t, oval, n)
        Id = gelfand_leray_vector(c, t, oval, n)
        out.append(PeriodSample(float(t), np.asarray(I, dtype=complex), np.asarray(Id, dtype=complex),
                                "oval%d" % oval))
    return out


def oval_window(p, oval=0):
    """Open interval of levels ``(p(x_c), t_max)`` on which the well at the
    ``oval``-th local minimum ``x_c`` carries an oval that meets no other
    critical point; ``t_max`` is the lower of the two neighbouring critical values."""
    c = _real_coeffs(p)
    desc = c[::-1]
    mins = local_minima(c)
    if not (0 <= oval < len(mins)):
        raise NoOvalError("p has %d real wells; no oval with index %d" % (len(mins), oval))
    xc = mins[oval]
    lo = float(np.polyval(desc, xc))
    dp = np.polyder(desc)
    real = [float(_polish_real(dp, r.real)) for r in np.roots(dp)
            if abs(r.imag) <= 1e-9 * (1 + abs(r))]
    tol = 1e-9 * (1 + abs(xc))
    left = [x for x in real if x < xc - tol]
    right = [x for x in real if x > xc + tol]
    hi = math.inf
    if left:
        hi = min(hi, float(np.polyval(desc, max(left))))
    if right:
        hi = min(hi, float(np.polyval(desc, min(right))))
    return lo, hi


def ode_residual(sys, samples) -> float:
    """Max over samples of ``||(t - A) Idot - B I|| / ((||A|| + ||B|| + |t|) max(||I||, ||Idot||))``."""
    A = sys.A_array()
    B = sys.B_array()
    nu = A.shape[0]
    nA = float(np.abs(A).sum(axis=0).max())
    nB = float(np.abs(B).sum(axis=0).max())
    worst = 0.0
    for s in samples:
        I = np.asarray(s.I, dtype=complex)
        Id = np.asarray(s.Idot, dtype=complex)
        if I.shape[0] != nu or Id.shape[0] != nu:
            raise PFError("sample dimension %d does not match system size %d" % (I.shape[0], nu))
        r = s.t * Id - A @ Id - B @ I
        denom = (nA + nB + abs(s.t)) * max(np.abs(I).sum(), np.abs(Id).sum(), 1e-300)
        worst = max(worst, float(np.abs(r).sum() / denom))
    return worst


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

@dataclass
class PeriodTable:
    n: int
    rows: list = field(default_factory=list)   # (t, I or None, Idot or None, flag)

    def header(self):
        cols = ["t"]
        for name in ("I", "Idot"):
            for i in range(1, self.n + 1):
                cols += ["%s%d_re" % (name, i), "%s%d_im" % (name, i)]
        return cols + ["flag"]

    def write(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.header())
        for t, I, Id, flag in self.rows:
            row = [repr(float(t))]
            for vec in (I, Id):
                if vec is None:
                    row += [""] * (2 * self.n)
                else:
                    for v in vec:
                        v = complex(v)
                        row += [repr(v.real), repr(v.imag)]
            w.writerow(row + [flag])

    def to_csv(self):
        buf = io.StringIO()
        self.write(buf)
        return buf.getvalue()


def period_table(p, t_min, t_max, count, oval=0, n=None) -> PeriodTable:
    """Samples on ``count`` evenly spaced levels; levels without a usable oval
    (below the well, at or across a critical value) are kept as flagged rows."""
    c = _real_coeffs(p)
    n = len(c) - 2 if n is None else n
    table = PeriodTable(n)
    if count <= 0:
        return table
    ts = np.linspace(t_min, t_max, count) if count > 1 else np.array([t_min])
    try:
        lo, hi = oval_window(c, oval)
    except PFError:
        lo, hi = math.inf, -math.inf
    for t in ts:
        t = float(t)
        if not (lo < t < hi):
            flag = "critical_value" if any(abs(t - v) <= 1e-9 * max(1, abs(t))
                                           for v in critical_values_1d(c)) else "no_oval"
            table.rows.append((t, None, None, flag))
            continue
        try:
            I = hyperelliptic_periods(c, t, oval, n)
            Id = gelfand_leray_vector(c, t, oval, n)
        except NoOvalError:
            table.rows.append((t, None, None, "no_oval"))
            continue
        table.rows.append((t, I, Id, "ok"))
    return table
