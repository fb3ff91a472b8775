"""Division with remainder carrying l1 certificates.

* :func:`divide_univariate` strips the top part of ``f`` against a monic
  divisor repeatedly; ``||b|| + ||a|| <= K ||f||`` with
  ``K = 1 + C + ... + C^(d-n+1)`` and ``C = ||q||``.  The shorter sum ending
  in ``C^(d-n)`` is kept as ``nominal_K``; it fails already for ``x / (x+1)``.
* :func:`divide_2form` divides a polynomial 2-form by a 1-form normalized at
  infinity, ``Omega = xi ^ eta + Theta`` with ``deg Theta <= 2n`` and
  ``||eta|| + ||Theta|| <= K ||Omega||``, ``K = 1 + C + ... + C^(d-2n)``.

Results are deterministic but not canonical: the quotient depends on the
fixed monomial factorization used in :func:`divide_homogeneous`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DegreeError, NotBalancedError, NotQuasimonicError, PFError
from .forms import BiPoly, Form1, Form2, exterior_d, wedge
from .normalization import (QUASIMONIC_TOL, is_balanced, nonhomogeneity,
                            sylvester_map)


def geometric_sum(C, k):
    """``1 + C + ... + C^k`` (zero terms for negative ``k``, i.e. returns 1)."""
    if k <= 0:
        return C ** 0 if k == 0 else 1
    return sum((C ** i for i in range(k + 1)), 0)


def _num(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, complex):
        return v.real
    return v


@dataclass(frozen=True)
class Certificate:
    """Claimed bound ``K * ||input||`` against the achieved ``||quotient|| + ||remainder||``."""

    C: object
    K: object
    input_norm: object
    achieved: object

    @property
    def claimed(self):
        return self.K * self.input_norm

    @property
    def holds(self):
        claimed = self.claimed
        if all(isinstance(v, (int, Fraction)) for v in (self.K, self.input_norm, self.achieved)):
            return self.achieved <= claimed
        return float(self.achieved) <= float(claimed) * (1 + 1e-12) + 1e-300

    def to_dict(self):
        return {"C": _num(self.C), "K": _num(self.K), "input_norm": _num(self.input_norm),
                "claimed": _num(self.claimed), "achieved": _num(self.achieved), "holds": self.holds}


# ---------------------------------------------------------------------------
# univariate
# ---------------------------------------------------------------------------

def _trim(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _l1(c):
    return sum((abs(v) for v in c), 0)


def _div_scalar(c, s):
    if isinstance(s, (int, Fraction)) and all(isinstance(v, (int, Fraction)) for v in c):
        return [Fraction(v) / s for v in c]
    return [v / s for v in c]


@dataclass(frozen=True)
class UniDivision:
    quotient: list
    remainder: list
    certificate: Certificate
    nominal_K: object = 1

    @property
    def nominal_holds(self):
        c = self.certificate
        return Certificate(c.C, self.nominal_K, c.input_norm, c.achieved).holds

    def to_dict(self):
        def enc(c):
            return [[complex(v).real, complex(v).imag] for v in c]
        return {"quotient": enc(self.quotient), "remainder": enc(self.remainder),
                "certificate": self.certificate.to_dict(), "nominal_K": _num(self.nominal_K)}


def divide_univariate(f, q) -> UniDivision:
    """Divide ``f`` by ``q`` (ascending coefficient sequences): ``f = b q + a``.

    ``q`` is made monic internally.  Each round splits the current dividend as
    ``b x^n + a`` and carries ``b (x^n - q)`` into the next round, exactly as in
    the inductive bound, so the certificate ``K = 1 + C + ... + C^(d-n+1)``
    refers to the monic divisor (the induction starts at degree ``n-1``).  When ``|lc(q)| < 1`` the claim is inflated by
    ``1/|lc(q)|`` because the returned quotient refers to ``q`` itself.
    """
    q = _trim(q)
    f = _trim(f)
    n = len(q) - 1
    lc = q[-1]
    if lc == 0:
        raise PFError("division by the zero polynomial")
    qm = _div_scalar(q, lc)
    C = 1 + _l1(qm[:-1])
    d = len(f) - 1
    fnorm = _l1(f)
    if n == 0:
        b = _div_scalar(f, lc)
        a = [0]
        K = K0 = 1
    else:
        zero = f[0] * 0
        quot = [zero] * max(d - n + 1, 1)
        cur = list(f)
        while len(cur) - 1 >= n and any(v != 0 for v in cur[n:]):
            top = cur[n:]
            low = cur[:n]
            for k, v in enumerate(top):
                quot[k] = quot[k] + v
            # next dividend: low + top * (x^n - qm)
            nxt = low + [zero] * max(len(top) - 1, 0)
            for k, v in enumerate(top):
                if v == 0:
                    continue
                for j in range(n):
                    nxt[k + j] = nxt[k + j] - v * qm[j]
            cur = _trim(nxt)
        a = (cur + [zero] * n)[:n] if n > 0 else [zero]
        b = _div_scalar(_trim(quot), lc)
        K = geometric_sum(C, d - n + 1) if d >= n else 1
        K0 = geometric_sum(C, d - n)
    achieved = _l1(b) + _l1(a)
    scale = 1 if abs(lc) >= 1 else 1 / abs(lc)
    cert = Certificate(C, K * scale, fnorm, achieved)
    return UniDivision(_trim(b), _trim(a), cert, K0 * scale)


# ---------------------------------------------------------------------------
# 2-forms by 1-forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FormDivision:
    eta: Form1
    theta: Form2
    certificate: Certificate
    rounds: int = 0
    meta: dict = field(default_factory=dict)

    def residual(self, Omega, xi):
        return Omega - wedge(xi, self.eta) - self.theta


def _xi_parts(xi: Form1):
    if xi.is_zero():
        raise PFError("cannot divide by the zero form")
    N = xi.degree  # form degree n+1
    n = N - 1
    xh = xi.homogeneous_part(N)
    return n, xh


def _normalized_map(xh: Form1, n: int, tol=QUASIMONIC_TOL):
    smap = sylvester_map(xh.P, xh.Q, n)
    if not smap.invertible:
        raise NotQuasimonicError("principal part of xi is not a coprime pair")
    k = smap.inverse_norm
    ok = k <= 1 if isinstance(k, Fraction) else k <= 1 + tol
    if not ok:
        raise NotQuasimonicError("xi is not normalized at infinity (inverse norm %.6g > 1)" % float(abs(k)))
    return smap


def divide_top_homogeneous(Omega: Form2, xi_hat: Form1) -> Form1:
    """Exact division of a homogeneous 2-form of degree ``2n+1`` by ``xi_hat``."""
    n, xh = _xi_parts(xi_hat)
    if not (xh.P == xi_hat.P and xh.Q == xi_hat.Q):
        raise DegreeError("xi_hat must be homogeneous")
    if Omega.is_zero():
        return Form1.zero()
    if Omega.degree != 2 * n + 1 or not Omega.f.is_homogeneous():
        raise DegreeError("Omega must be homogeneous of degree %d" % (2 * n + 1))
    smap = _normalized_map(xh, n)
    u, v = smap.solve(Omega.f)
    return Form1(-v, u)


def _divide_high(Omega_hi: Form2, quotients, n):
    """Divide a 2-form whose terms all have degree > 2n by a homogeneous form."""
    top = 2 * n - 1
    P, Q = {}, {}
    for (al, be), c in Omega_hi.f.items():
        a2 = min(al, top)
        b2 = top - a2
        da, db = al - a2, be - b2
        q = quotients[top - a2]  # index k of x^(2n-1-k) y^k
        for (i, j), w in q.P.items():
            key = (i + da, j + db)
            P[key] = P.get(key, 0) + c * w
        for (i, j), w in q.Q.items():
            key = (i + da, j + db)
            Q[key] = Q.get(key, 0) + c * w
    return Form1(BiPoly(P), BiPoly(Q))


def divide_homogeneous(Omega: Form2, xi_hat: Form1) -> Form1:
    """Divide a homogeneous 2-form of degree ``>= 2n+1`` by ``xi_hat``.

    Each monomial ``x^al y^be`` is split as a cofactor times
    ``x^a2 y^b2`` with ``a2 = min(al, 2n-1)``, ``b2 = 2n-1-a2``.
    """
    n, xh = _xi_parts(xi_hat)
    if not (xh.P == xi_hat.P and xh.Q == xi_hat.Q):
        raise DegreeError("xi_hat must be homogeneous")
    if Omega.is_zero():
        return Form1.zero()
    if not Omega.f.is_homogeneous() or Omega.degree < 2 * n + 1:
        raise DegreeError("Omega must be homogeneous of degree >= %d" % (2 * n + 1))
    smap = _normalized_map(xh, n)
    return _divide_high(Omega, smap.monomial_quotients(), n)


def divide_2form(Omega: Form2, xi: Form1, check_normalized=True) -> FormDivision:
    """Divide ``Omega`` by ``xi`` (normalized at infinity) with remainder.

    The degree above ``2n`` is peeled off by the principal part, the error
    ``(xihat - xi) ^ eta~`` (of strictly lower degree) is re-queued, and all
    terms of degree ``<= 2n`` accumulate in the remainder.
    """
    n, xh = _xi_parts(xi)
    smap = _normalized_map(xh, n) if check_normalized else sylvester_map(xh.P, xh.Q, n)
    quotients = smap.monomial_quotients()
    tail = xh - xi
    C = 1 + xi.l1_norm() - xh.l1_norm()
    d = Omega.degree
    K = geometric_sum(C, (d or 0) - 2 * n)
    theta = Form2.zero()
    eta = Form1.zero()
    cur = Omega
    rounds = 0
    while not cur.is_zero():
        lo, hi = cur.split_degree(2 * n)
        theta = theta + lo
        if hi.is_zero():
            break
        step = _divide_high(hi, quotients, n)
        eta = eta + step
        cur = wedge(tail, step)
        rounds += 1
    achieved = eta.l1_norm() + theta.l1_norm()
    cert = Certificate(C, K, Omega.l1_norm(), achieved)
    return FormDivision(eta, theta, cert, rounds)


def divide_by_dH(Omega: Form2, H: BiPoly) -> FormDivision:
    """Division by ``dH`` for a balanced Hamiltonian and ``deg Omega <= 3n``.

    The recorded constant is the smaller of the generic ``K`` and
    ``(n+1)^(n+1)``.
    """
    if not is_balanced(H):
        raise NotBalancedError("divide_by_dH requires a balanced Hamiltonian")
    n = H.degree - 1
    if Omega.degree is not None and Omega.degree > 3 * n:
        raise DegreeError("deg Omega = %d exceeds 3n = %d" % (Omega.degree, 3 * n))
    res = divide_2form(Omega, exterior_d(H))
    K = res.certificate.K
    special = (n + 1) ** (n + 1)
    if special < K:
        K = special
    cert = Certificate(res.certificate.C, K, res.certificate.input_norm, res.certificate.achieved)
    return FormDivision(res.eta, res.theta, cert, res.rounds, {"nonhomogeneity": nonhomogeneity(H)})


def certificate_json(cert: Certificate) -> str:
    return json.dumps(cert.to_dict())
