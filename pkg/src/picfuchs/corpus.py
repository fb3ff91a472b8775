"""Seeded random inputs for property tests, acceptance runs and benchmarks."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .forms import BiPoly, Form1, Form2
from .normalization import normalization_constant, sylvester_map


def _rand_fraction(rng, den=6, num=5):
    return Fraction(int(rng.integers(-num, num + 1)), int(rng.integers(1, den + 1)))


def random_homogeneous(k, rng, exact=True, coeff=3):
    while True:
        if exact:
            terms = {(k - j, j): int(rng.integers(-coeff, coeff + 1)) for j in range(k + 1)}
        else:
            terms = {(k - j, j): complex(rng.normal(), rng.normal()) for j in range(k + 1)}
        P = BiPoly(terms)
        if not P.is_zero():
            return P


def random_lower(N, rng, exact=True, density=0.6):
    """Random polynomial of degree < N (a constant term included)."""
    terms = {}
    for k in range(N):
        for j in range(k + 1):
            if rng.random() < density:
                terms[(k - j, j)] = _rand_fraction(rng) if exact else complex(rng.normal(), rng.normal())
    return BiPoly(terms)


def _scale_to(P, target):
    nrm = P.l1_norm()
    if nrm == 0:
        return P
    return P * (target / nrm)


def quasimonic_principal(n, rng, exact=True, fermat_prob=0.3):
    """Homogeneous ``Hhat`` of degree ``n+1`` with normalization constant exactly 1.

    Either ``(x^(n+1) + y^(n+1))/(n+1)`` or a random regular form rescaled by
    its normalization constant.
    """
    N = n + 1
    if rng.random() < fermat_prob:
        H = BiPoly({(N, 0): Fraction(1, N), (0, N): Fraction(1, N)})
        return H if exact else H.to_float()
    while True:
        Hh = random_homogeneous(N, rng, exact)
        if Hh.degree != N:
            continue
        smap = sylvester_map(Hh.diff("x"), Hh.diff("y"), n)
        if not smap.invertible or (not smap.exact and smap.condition_number > 1e6):
            continue
        k = normalization_constant(Hh)
        return Hh * k


def random_balanced(n, rng, exact=True):
    """Balanced Hamiltonian of degree ``n+1``: quasimonic principal part plus
    lower terms of total norm ``<= 1``."""
    Hh = quasimonic_principal(n, rng, exact)
    h = random_lower(n + 1, rng, exact)
    if not h.is_zero():
        r = Fraction(int(rng.integers(1, 9)), 8) if exact else float(rng.uniform(0.05, 1.0))
        h = _scale_to(h, r)
    return Hh + h


def random_normalized_pair(n, rng, exact=True):
    """Homogeneous ``(a, b)`` of degree ``n`` whose division map has inverse norm exactly 1."""
    while True:
        a = random_homogeneous(n, rng, exact)
        b = random_homogeneous(n, rng, exact)
        if a.degree != n or b.degree != n:
            continue
        smap = sylvester_map(a, b, n)
        if not smap.invertible or (not smap.exact and smap.condition_number > 1e6):
            continue
        k = smap.inverse_norm
        return a * k, b * k


def random_normalized_xi(n, rng, exact=True, tail=None):
    """1-form of degree ``n+1`` normalized at infinity with a random tail."""
    a, b = random_normalized_pair(n, rng, exact)
    P = random_lower(n, rng, exact, 0.5)
    Q = random_lower(n, rng, exact, 0.5)
    if tail is not None:
        tot = P.l1_norm() + Q.l1_norm()
        if tot:
            P, Q = P * (tail / tot), Q * (tail / tot)
    return Form1(a + P, b + Q)


def random_form2(max_form_degree, rng, exact=True, density=0.5):
    """Random 2-form of degree ``<= max_form_degree`` (nonzero)."""
    while True:
        f = random_lower(max_form_degree - 1, rng, exact, density)
        if not f.is_zero():
            return Form2(f)


def random_monic_morse_potential(N, rng):
    """Monic real ``p`` of degree ``N`` without ``x^(N-1)`` term and with
    pairwise distinct critical values."""
    while True:
        c = np.concatenate([rng.normal(scale=1.0, size=N - 1), [0.0, 1.0]])
        dp = np.array([k * c[k] for k in range(1, N + 1)])
        cps = np.roots(dp[::-1])
        vals = np.polyval(c[::-1], cps)
        d = np.abs(vals[:, None] - vals[None, :]) + np.eye(len(vals)) * 1e9
        if d.min() > 1e-3 * max(1.0, np.abs(vals).max()):
            return [Fraction(float(v)).limit_denominator(1000) for v in c[:-2]] + [Fraction(0), Fraction(1)]
