"""Independent reference computations (sympy / numpy / closed forms).

Nothing here imports the arithmetic of the package under test beyond reading
coefficients out of its objects.
"""
import math
from fractions import Fraction

import numpy as np
import sympy as sp

X, Y = sp.symbols("x y")

SQRT2_PI = math.sqrt(2) * math.pi


def sym(p):
    """BiPoly -> sympy expression."""
    out = 0
    for (a, b), c in p.items():
        if isinstance(c, (int, Fraction)):
            c = sp.Rational(Fraction(c).numerator, Fraction(c).denominator)
        else:
            c = sp.nsimplify(complex(c).real) + sp.I * sp.nsimplify(complex(c).imag)
        out += c * X ** a * Y ** b
    return sp.expand(out)


def sym_exact(p):
    out = 0
    for (a, b), c in p.items():
        c = Fraction(c)
        out += sp.Rational(c.numerator, c.denominator) * X ** a * Y ** b
    return sp.expand(out)


def witness_residual_sympy(sys):
    """Max over i of the number of nonzero terms of
    H dw_i - dH ^ eta_i - sum_j A_ij dw_j, all in sympy."""
    H = sym_exact(sys.hamiltonian)
    Hx, Hy = sp.diff(H, X), sp.diff(H, Y)
    dws = [sym_exact(sys.basis.d_coefficient(j)) for j in range(sys.nu)]
    worst = 0
    for i in range(sys.nu):
        P, Q = sym_exact(sys.etas[i].P), sym_exact(sys.etas[i].Q)
        expr = H * dws[i] - (Hx * Q - Hy * P)
        for j in range(sys.nu):
            a = sys.A[i][j]
            if a != 0:
                expr -= sp.Rational(Fraction(a).numerator, Fraction(a).denominator) * dws[j]
        expr = sp.expand(expr)
        worst = max(worst, len(sp.Poly(expr, X, Y).terms()) if expr != 0 else 0)
    return worst


def synthetic_division(f, q):
    """Classical long division with ascending coefficient lists (exact)."""
    qs = sp.Poly(list(reversed([sp.Rational(Fraction(c).numerator, Fraction(c).denominator) for c in q])), X)
    fs = sp.Poly(list(reversed([sp.Rational(Fraction(c).numerator, Fraction(c).denominator) for c in f])), X)
    b, a = sp.div(fs, qs)
    return ([Fraction(int(c.p), int(c.q)) for c in reversed(b.all_coeffs())],
            [Fraction(int(c.p), int(c.q)) for c in reversed(a.all_coeffs())])


def trim(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def ellipse_period(t):
    return SQRT2_PI * t


def hyperelliptic_period_mpmath(p_coeffs, x0, x1, i, t):
    """2 * int_{x0}^{x1} x^(i-1) sqrt(2 (t - p)) dx by mpmath tanh-sinh."""
    import mpmath as mp
    mp.mp.dps = 30

    def f(x):
        val = t - sum(c * x ** k for k, c in enumerate(p_coeffs))
        return x ** (i - 1) * mp.sqrt(2 * max(val, 0))
    return float(2 * mp.quad(f, [x0, x1]))


def critical_values_univariate(p_coeffs):
    c = np.asarray([complex(v) for v in p_coeffs])
    dp = np.array([k * c[k] for k in range(1, c.size)])
    cps = np.roots(dp[::-1])
    return cps, np.polyval(c[::-1], cps)


def multiset_distance(a, b):
    """Max deviation under the best one-to-one matching of two point multisets."""
    from scipy.optimize import linear_sum_assignment
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.size != b.size:
        return np.inf
    D = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(D)
    return float(D[r, c].max()) if a.size else 0.0
