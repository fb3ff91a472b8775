"""Picard-Fuchs systems ``(t - A) dI/dt = B I`` with witnesses.

Every system carries, for each basis form ``w_i``, a 1-form ``eta_i`` with

    H dw_i = dH ^ eta_i + sum_j A_ij dw_j,     d eta_i = sum_j B_ij dw_j,

so the relations can be re-checked independently of how they were found
(:func:`witness_defect`, :func:`closedness_defect`).  Integrating the first
identity over a cycle of ``{H = t}`` and differentiating gives the system.

Derivation paths:

* :func:`derive_hyperelliptic` for ``H = y^2/2 + p(x)``;
* :func:`derive_doubly_hyperelliptic` for ``H = p(x) + q(y)``;
* :func:`derive_redundant` for balanced ``H`` over the ``n(2n-1)`` monomial forms;
* :func:`derive_redundant_unbalanced` through the dilation ``c^-(n+1) H(cx, cy)``;
* :func:`extend_block` and :func:`fuchsianize` post-process a system.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
import scipy.linalg

from .division import divide_by_dH, divide_univariate, geometric_sum
from .errors import (CertificationError, DegreeError, NotQuasimonicError,
                     PFError)
from .forms import (RHO, BiPoly, Form1, Form2, exterior_d, format_poly,
                    principal_part, wedge)
from .linalg import as_array, l1_operator_norm
from .normalization import (QUASIMONIC_TOL, is_quasimonic, nonhomogeneity,
                            require_balanced)

SCHEMA = "pf/1"
PROVENANCES = ("hyperelliptic", "doubly", "redundant", "fuchsianized", "block")


def _exact(*vals):
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in vals)


def _frac(a, b):
    """``a / b`` that stays exact for exact inputs."""
    if _exact(a, b):
        return Fraction(a) / b
    return a / b


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FormBasis:
    """Ordered monomial primitives ``w_i`` with ``dw_i = factors[i] x^a y^b dx^dy``.

    ``family="dx"`` holds ``w = s x^a y^(b+1) dx`` (so the factor is
    ``-(b+1) s``), ``family="dy"`` holds ``w = s x^(a+1) y^b dy / (a+1)``
    (factor ``s``).  ``entries[i] = (a, b)`` names the 2-form monomial.
    """

    n: int
    entries: tuple
    factors: tuple
    forms: tuple
    family: str = "dx"

    def __len__(self):
        return len(self.entries)

    @property
    def nu(self):
        return len(self.entries)

    def index(self, a, b):
        try:
            return self._index()[(a, b)]
        except KeyError:
            raise DegreeError("x^%d y^%d dx^dy is outside the span of the basis" % (a, b)) from None

    def _index(self):
        cache = self.__dict__.get("_idx")
        if cache is None:
            cache = {e: i for i, e in enumerate(self.entries)}
            object.__setattr__(self, "_idx", cache)
        return cache

    def d_coefficient(self, i) -> BiPoly:
        """The polynomial ``dw_i / dx^dy``."""
        a, b = self.entries[i]
        return BiPoly.monomial(a, b, self.factors[i])

    def d_forms(self):
        return [Form2(self.d_coefficient(i)) for i in range(self.nu)]

    def expand(self, Omega: Form2):
        """Coordinates of ``Omega`` in ``{dw_i}`` (the expansion is diagonal)."""
        row = [0] * self.nu
        for (a, b), c in Omega.f.items():
            i = self.index(a, b)
            row[i] = _frac(c, self.factors[i])
        return row

    def combine(self, coeffs) -> Form1:
        """``sum_i coeffs[i] w_i``."""
        out = Form1.zero()
        for c, w in zip(coeffs, self.forms):
            if c != 0:
                out = out + w * c
        return out

    def form_degree(self, i):
        return self.forms[i].degree

    def rescaled(self, scales):
        """Basis ``scales[i] * w_i``."""
        return FormBasis(self.n, self.entries,
                         tuple(f * s for f, s in zip(self.factors, scales)),
                         tuple(w * s for w, s in zip(self.forms, scales)), self.family)

    def labels(self):
        if self.family == "dx":
            return ["x^%d*y^%d dx" % (a, b + 1) for a, b in self.entries]
        return ["x^%d*y^%d dy" % (a + 1, b) for a, b in self.entries]

    def to_list(self):
        out = []
        for (a, b), w in zip(self.entries, self.forms):
            coeff = w.P.coeff(a, b + 1) if self.family == "dx" else w.Q.coeff(a + 1, b)
            out.append({"a": a, "b": b, "family": self.family, "coeff": _num_json(coeff)})
        return out


def monomial_entries(n):
    """All ``(a, b)`` with ``a + b <= 2n - 2`` by total degree, then ``a`` descending."""
    return tuple((k - b, b) for k in range(2 * n - 1) for b in range(k + 1))


def basis_forms(n: int) -> FormBasis:
    """Monomial 1-forms ``x^a y^(b+1) dx`` whose differentials span 2-forms of degree <= 2n."""
    if n < 1:
        raise DegreeError("basis_forms needs n >= 1")
    entries = monomial_entries(n)
    factors = tuple(-(b + 1) for _, b in entries)
    forms = tuple(Form1(BiPoly.monomial(a, b + 1, 1), BiPoly()) for a, b in entries)
    return FormBasis(n, entries, factors, forms, "dx")


def hyperelliptic_basis(n: int) -> FormBasis:
    """``w_i = x^(i-1) y dx`` for ``i = 1..n``."""
    entries = tuple((i, 0) for i in range(n))
    forms = tuple(Form1(BiPoly.monomial(i, 1, 1), BiPoly()) for i in range(n))
    return FormBasis(n, entries, tuple(-1 for _ in entries), forms, "dx")


def doubly_basis(n: int, m: int) -> FormBasis:
    """``w_ij = x^(i+1) y^j dy / (i+1)``, ``i < n``, ``j < m``, ordered by ``i`` then ``j``."""
    entries = tuple((i, j) for i in range(n) for j in range(m))
    forms = tuple(Form1(BiPoly(), BiPoly.monomial(i + 1, j, Fraction(1, i + 1))) for i, j in entries)
    return FormBasis(n, entries, tuple(1 for _ in entries), forms, "dy")


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------

def _num_json(v):
    v = complex(v)
    return [v.real, v.imag]


def _exact_json(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    if isinstance(v, int):
        return str(v)
    return None


def _tuple_matrix(rows):
    return tuple(tuple(r) for r in rows)


@dataclass(frozen=True)
class PFSystem:
    n: int
    basis: FormBasis
    A: tuple
    B: tuple
    etas: tuple
    hamiltonian: BiPoly
    provenance: str
    cert: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def nu(self):
        return len(self.A)

    @property
    def exact(self):
        return all(_exact(c) for r in self.A for c in r) and all(_exact(c) for r in self.B for c in r)

    def A_array(self):
        return as_array(self.A)

    def B_array(self):
        return as_array(self.B)

    def norm_A(self):
        return l1_operator_norm([list(r) for r in self.A])

    def norm_B(self):
        return l1_operator_norm([list(r) for r in self.B])

    def certificate_holds(self, key="bound"):
        bound = self.cert.get(key)
        if bound is None:
            return True
        ach = self.cert["achieved"]
        if _exact(ach, bound):
            return ach <= bound
        return float(ach) <= float(bound) * (1 + 1e-12)

    def to_dict(self, include_etas=False):
        d = {
            "schema": SCHEMA,
            "n": self.n,
            "nu": self.nu,
            "provenance": self.provenance,
            "hamiltonian": format_poly(self.hamiltonian),
            "basis": self.basis.to_list(),
            "A": [[_num_json(c) for c in r] for r in self.A],
            "B": [[_num_json(c) for c in r] for r in self.B],
            "cert": {k: (float(v) if v is not None and not isinstance(v, bool) else v)
                     for k, v in self.cert.items()},
        }
        if self.exact:
            d["A_exact"] = [[_exact_json(c) for c in r] for r in self.A]
            d["B_exact"] = [[_exact_json(c) for c in r] for r in self.B]
        if include_etas:
            d["etas"] = [{"P": format_poly(e.P), "Q": format_poly(e.Q)} for e in self.etas]
        if self.meta:
            d["meta"] = _jsonable(self.meta)
        return d

    def to_json(self, include_etas=False, **kw):
        return json.dumps(self.to_dict(include_etas), **kw)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _cert(A, B, bound_tight, bound, **extra):
    nA = l1_operator_norm([list(r) for r in A])
    nB = l1_operator_norm([list(r) for r in B])
    c = {"norm_A": nA, "norm_B": nB, "achieved": nA + nB,
         "bound_tight": bound_tight, "bound": bound}
    c.update(extra)
    return c


# ---------------------------------------------------------------------------
# hyperelliptic and doubly hyperelliptic
# ---------------------------------------------------------------------------

def univariate_coeffs(p, var="x"):
    """Ascending coefficients of a univariate input (sequence, or BiPoly in ``var``)."""
    if isinstance(p, BiPoly):
        return p.univariate(var)
    c = list(p)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _poly_x(coeffs, var="x"):
    return BiPoly.from_univariate(coeffs, var)


def _derivative(c):
    return [k * c[k] for k in range(1, len(c))] or [0]


def hyperelliptic_potential(H: BiPoly):
    """``p`` (ascending coefficients) if ``H = y^2/2 + p(x)``, else ``None``."""
    half = Fraction(1, 2) if H.is_exact() else 0.5
    rest = H - BiPoly.monomial(0, 2, half)
    if any(b for (_, b) in rest.terms):
        return None
    if rest.is_zero():
        return None
    return rest.univariate("x")


def derive_hyperelliptic(p) -> PFSystem:
    """The n x n system of ``H = y^2/2 + p(x)`` over ``w_i = x^(i-1) y dx``.

    ``p`` is monic of degree ``n+1`` without an ``x^n`` term.  With
    ``x^(i-1) p = b_i p' + a_i`` the witness is ``eta_i = w_i/2 - b_i dy``,
    ``A_ij = [x^(j-1)] a_i`` and ``B = E/2 + ([x^(j-1)] b_i')``.
    """
    c = univariate_coeffs(p)
    N = len(c) - 1
    n = N - 1
    if n < 1:
        raise DegreeError("p must have degree >= 2")
    if c[-1] != 1:
        raise PFError("p must be monic")
    if c[n] != 0:
        raise PFError("p must have no x^%d term (translate x first)" % n)
    exact = all(_exact(v) for v in c)
    if not exact:
        c = [complex(v) for v in c]
    half = Fraction(1, 2) if exact else 0.5
    dp = _derivative(c)
    basis = hyperelliptic_basis(n)
    H = BiPoly.monomial(0, 2, half) + _poly_x(c)
    A, B, etas, divs = [], [], [], []
    for i in range(n):
        f = [0] * i + list(c)
        div = divide_univariate(f, dp)
        b, a = div.quotient, div.remainder
        db = _derivative(b)
        A.append([(a[j] if j < len(a) else 0) for j in range(n)])
        B.append([(db[j] if j < len(db) else 0) + (half if j == i else 0) for j in range(n)])
        eta = basis.forms[i] * half - Form1(BiPoly(), _poly_x(b))
        etas.append(eta)
        divs.append(div.certificate.to_dict())
    C = sum((abs(v) for v in c), 0)
    bound = n * n * geometric_sum(C, n + 1)
    cert = _cert(A, B, bound, bound, C=C)
    return PFSystem(n, basis, _tuple_matrix(A), _tuple_matrix(B), tuple(etas), H,
                    "hyperelliptic", cert, {"divisions": divs})


def derive_doubly_hyperelliptic(p, q, monic=True) -> PFSystem:
    """The nm x nm system of ``H = p(x) + q(y)``.

    Divisions ``x^i p = b_i p' + a_i`` and ``y^j q = b*_j q' + a*_j`` give the
    witness ``eta_ij = -x^i b*_j dx + y^j b_i dy``.  ``monic=False`` accepts
    any nonzero leading coefficients (e.g. ``q = y^2/2``).
    """
    cp = univariate_coeffs(p, "x")
    cq = univariate_coeffs(q, "y")
    n, m = len(cp) - 2, len(cq) - 2
    if n < 1 or m < 1:
        raise DegreeError("p and q must have degree >= 2")
    if monic and (cp[-1] != 1 or cq[-1] != 1):
        raise PFError("p and q must be monic")
    exact = all(_exact(v) for v in cp + cq)
    if not exact:
        cp = [complex(v) for v in cp]
        cq = [complex(v) for v in cq]
    basis = doubly_basis(n, m)
    H = _poly_x(cp, "x") + _poly_x(cq, "y")
    dp, dq = _derivative(cp), _derivative(cq)
    px = [divide_univariate([0] * i + cp, dp) for i in range(n)]
    qy = [divide_univariate([0] * j + cq, dq) for j in range(m)]
    A, B, etas = [], [], []
    for i, j in basis.entries:
        b, a = px[i].quotient, px[i].remainder
        bs, as_ = qy[j].quotient, qy[j].remainder
        rem = _poly_x(a, "x").shift_monomial(0, j) + _poly_x(as_, "y").shift_monomial(i, 0)
        rhs = (_poly_x(_derivative(b), "x").shift_monomial(0, j)
               + _poly_x(_derivative(bs), "y").shift_monomial(i, 0))
        A.append(basis.expand(Form2(rem)))
        B.append(basis.expand(Form2(rhs)))
        etas.append(Form1(-_poly_x(bs, "y").shift_monomial(i, 0), _poly_x(b, "x").shift_monomial(0, j)))
    cert = _cert(A, B, None, None)
    return PFSystem(n, basis, _tuple_matrix(A), _tuple_matrix(B), tuple(etas), H, "doubly", cert,
                    {"m": m})


# ---------------------------------------------------------------------------
# the redundant system
# ---------------------------------------------------------------------------

def redundant_bounds(n):
    """``(6n (n+1)^(n+1), 6 (n+1)^(n+2))``.

    The second value is what the division argument actually delivers and is
    the one certificates are checked against; the first, tighter value is
    recorded for comparison.
    """
    return 6 * n * (n + 1) ** (n + 1), 6 * (n + 1) ** (n + 2)


def derive_redundant(H: BiPoly) -> PFSystem:
    """The redundant ``nu x nu`` system of a balanced Hamiltonian.

    For each basis form the Euler identity gives ``Hhat dw_i = dHhat ^ eta'_i``
    with ``eta'_i = (dw_i / dx^dy) rho / (n+1)``; the defect
    ``-dh ^ eta'_i + h dw_i`` (degree <= 3n) is divided by ``dH``.
    """
    require_balanced(H)
    n = H.degree - 1
    exact = H.is_exact()
    basis = basis_forms(n)
    h = H - principal_part(H)
    dh = exterior_d(h)
    A, B, etas, divs = [], [], [], []
    for i in range(basis.nu):
        g = basis.d_coefficient(i)
        if not exact:
            g = g.to_float()
        dw = Form2(g)
        eta1 = RHO * g / (n + 1)
        Omega1 = wedge(h, dw) - wedge(dh, eta1)
        res = divide_by_dH(Omega1, H)
        eta = eta1 + res.eta
        A.append(basis.expand(res.theta))
        B.append(basis.expand(exterior_d(eta)))
        etas.append(eta)
        divs.append(res.certificate)
    tight, full = redundant_bounds(n)
    cert = _cert(A, B, tight, full)
    cert["divisions_hold"] = all(d.holds for d in divs)
    return PFSystem(n, basis, _tuple_matrix(A), _tuple_matrix(B), tuple(etas), H, "redundant", cert)


def derive_redundant_unbalanced(H: BiPoly, c=None) -> PFSystem:
    """Redundant system of a quasimonic ``H`` with ``||H - Hhat|| <= c``.

    Derives for the balanced ``c^-(n+1) H(cx, cy)`` and transports back: ``B``
    is unchanged, ``A`` is multiplied by ``c^(n+1)``, the basis becomes
    ``c^-deg(w_i) w_i`` and each witness is pulled back by ``(x, y) -> (x/c, y/c)``.
    ``c`` defaults to ``max(1, ||H - Hhat||)``; values below 1 are raised to 1.
    """
    if not is_quasimonic(H):
        raise NotQuasimonicError("derive_redundant_unbalanced needs a quasimonic Hamiltonian")
    hn = nonhomogeneity(H)
    if c is None:
        c = hn
    if _exact(c, hn):
        if c < hn:
            raise PFError("c = %s is smaller than ||H - Hhat|| = %s" % (c, hn))
    elif float(abs(c)) < float(abs(hn)) * (1 - QUASIMONIC_TOL):
        raise PFError("c = %g is smaller than ||H - Hhat|| = %g" % (float(abs(c)), float(abs(hn))))
    if c <= 1:
        return derive_redundant(H)
    exact = H.is_exact() and _exact(c)
    if exact:
        c = Fraction(c)
    else:
        c = float(abs(c))
        H = H.to_float()
    N = H.degree
    n = N - 1
    Ht = BiPoly({(a, b): v * c ** (a + b - N) for (a, b), v in H.items()})
    base = derive_redundant(Ht)
    cN = c ** N
    A = [[v * cN for v in r] for r in base.A]
    scales = [c ** (-base.basis.form_degree(i)) for i in range(base.nu)]
    basis = base.basis.rescaled(scales)
    inv = 1 / c
    etas = tuple(e.scale_vars(inv) for e in base.etas)
    tight, full = redundant_bounds(n)
    cert = _cert(A, base.B, tight * cN, full * cN, c=c)
    cert["divisions_hold"] = base.cert.get("divisions_hold")
    return PFSystem(n, basis, _tuple_matrix(A), base.B, etas, H, "redundant", cert,
                    {"dilation": c, "balanced_cert": base.cert})


# ---------------------------------------------------------------------------
# witness checks
# ---------------------------------------------------------------------------

def witness_residuals(sys: PFSystem):
    """``H dw_i - dH ^ eta_i - sum_j A_ij dw_j`` for every i."""
    H = sys.hamiltonian
    dH = exterior_d(H)
    dws = sys.basis.d_forms()
    out = []
    for i in range(sys.nu):
        r = wedge(H, dws[i]) - wedge(dH, sys.etas[i])
        for j, a in enumerate(sys.A[i]):
            if a != 0:
                r = r - dws[j] * a
        out.append(r)
    return out


def witness_defect(sys: PFSystem):
    """Max over i of ``||residual_i|| / (||H|| ||dw_i||)``; exactly 0 when exact."""
    Hn = sys.hamiltonian.l1_norm()
    dws = sys.basis.d_forms()
    worst = 0
    for i, r in enumerate(witness_residuals(sys)):
        v = r.l1_norm()
        if v == 0:
            continue
        rel = v / (Hn * dws[i].l1_norm())
        worst = max(worst, rel)
    return worst


def closedness_defect(sys: PFSystem):
    """Max over i of ``||d(eta_i - sum_j B_ij w_j)||``."""
    worst = 0
    for i in range(sys.nu):
        f = exterior_d(sys.etas[i] - sys.basis.combine(sys.B[i]))
        worst = max(worst, f.l1_norm())
    return worst


def eigen_residuals(sys: PFSystem, points):
    """For critical points ``(x, y)`` return ``||A v - t v|| / (||A|| ||v||)``
    with ``v_i = dw_i / dx^dy`` at the point and ``t = H(x, y)``."""
    A = sys.A_array()
    nA = max(float(np.abs(A).sum(axis=0).max()), 1e-300)
    out = []
    for x, y in points:
        v = np.array([complex(sys.basis.d_coefficient(i)(x, y)) for i in range(sys.nu)])
        t = complex(sys.hamiltonian(x, y))
        r = A @ v - t * v
        out.append(float(np.abs(r).sum() / (nA * np.abs(v).sum())))
    return out


# ---------------------------------------------------------------------------
# block extension
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockSystem:
    """System for ``J = (I, tI, ..., t^m I)``.

    With ``(t - A) d/dt (t^k I) = (B + kE) t^k I - kA t^(k-1) I`` the block
    matrices are ``blockdiag(A)`` and ``B + kE`` on the diagonal with ``-kA``
    just below it (block lower triangular in this ordering).
    """

    m: int
    nu: int
    blockA: tuple
    blockB: tuple
    base: PFSystem
    d: int

    @property
    def size(self):
        return (self.m + 1) * self.nu

    def A_array(self):
        return as_array(self.blockA)

    def B_array(self):
        return as_array(self.blockB)

    def norms(self):
        nA = l1_operator_norm([list(r) for r in self.blockA])
        nB = l1_operator_norm([list(r) for r in self.blockB])
        return nA, nB

    def bound(self):
        """``||A|| + ||B|| + m (1 + ||A||)``, valid for the block matrices."""
        a, b = self.base.norm_A(), self.base.norm_B()
        return a + b + self.m * (1 + a)

    def to_dict(self):
        nA, nB = self.norms()
        return {"schema": SCHEMA, "provenance": "block", "m": self.m, "d": self.d, "nu": self.nu,
                "size": self.size,
                "A": [[_num_json(c) for c in r] for r in self.blockA],
                "B": [[_num_json(c) for c in r] for r in self.blockB],
                "cert": {"achieved": float(nA + nB), "bound": float(self.bound())}}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def extend_block(sys: PFSystem, d: int) -> BlockSystem:
    """Block extension to polynomial-in-t combinations of degree ``m = d // (n+1)``."""
    m = max(d, 0) // (sys.n + 1)
    nu = sys.nu
    size = (m + 1) * nu
    zero = 0
    bA = [[zero] * size for _ in range(size)]
    bB = [[zero] * size for _ in range(size)]
    for k in range(m + 1):
        o = k * nu
        for i in range(nu):
            for j in range(nu):
                bA[o + i][o + j] = sys.A[i][j]
                bB[o + i][o + j] = sys.B[i][j] + (k if i == j else 0)
                if k:
                    bB[o + i][o - nu + j] = -k * sys.A[i][j]
    return BlockSystem(m, nu, _tuple_matrix(bA), _tuple_matrix(bB), sys, d)


# ---------------------------------------------------------------------------
# Fuchsianization
# ---------------------------------------------------------------------------

def _min_gap(ev):
    ev = np.asarray(ev)
    if ev.size < 2:
        return np.inf
    D = np.abs(ev[:, None] - ev[None, :])
    D[np.diag_indices_from(D)] = np.inf
    return float(D.min())


def _eig_error_bound(M):
    """First-order bound on eigenvalue errors: eps * ||M|| * cond(V)."""
    ev, V = np.linalg.eig(M)
    try:
        cond = np.linalg.cond(V)
    except np.linalg.LinAlgError:
        cond = np.inf
    return ev, float(np.finfo(float).eps * np.linalg.norm(M, 2) * cond)


def low_degree_image(H: BiPoly, basis: FormBasis):
    """Matrix (in monomial 2-form coordinates of ``basis``) of ``zeta -> dH ^ zeta``
    on 1-forms of degree ``<= n - 1``, with the list of those 1-forms."""
    n = basis.n
    dH = exterior_d(H)
    zetas = []
    for k in range(n - 1):
        for b in range(k + 1):
            a = k - b
            zetas.append(Form1(BiPoly.monomial(a, b, 1.0 + 0j), BiPoly()))
            zetas.append(Form1(BiPoly(), BiPoly.monomial(a, b, 1.0 + 0j)))
    W = np.zeros((basis.nu, len(zetas)), dtype=np.complex128)
    for col, z in enumerate(zetas):
        for (a, b), c in wedge(dH, z).f.items():
            W[basis.index(a, b), col] = complex(c)
    return W, zetas


def select_pivots(W, mu):
    """Indices of ``mu`` coordinate monomials completing the column span of ``W``.

    Column-pivoted QR on ``W^T`` picks the best-conditioned complementary rows.
    """
    nu, r = W.shape
    if nu - r != mu:
        raise CertificationError("cannot certify basis: %d relations for %d forms, expected codimension %d"
                                 % (r, nu, mu))
    if r == 0:
        return list(range(nu)), []
    _, R, perm = scipy.linalg.qr(W.T, pivoting=True, mode="economic")
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-10 * max(diag.max(), 1e-300):
        raise CertificationError("cannot certify basis: relation space is rank deficient")
    others = sorted(int(i) for i in perm[:r])
    pivots = sorted(set(range(nu)) - set(others))
    return pivots, others


def _reduce(theta_mono, W, pivots, others):
    """Split ``theta = W z + (pivot part)``; return ``(z, pivot coordinates)``."""
    if not others:
        return np.zeros(0, dtype=np.complex128), theta_mono.copy()
    z = np.linalg.solve(W[others, :], theta_mono[others])
    rem = theta_mono - W @ z
    rem[others] = 0
    return z, rem


def is_morse_values(values, rel_tol=1e-8):
    v = np.asarray(values, dtype=np.complex128)
    scale = max(float(np.abs(v).max()) if v.size else 0.0, 1e-300)
    return _min_gap(v) > rel_tol * scale


def fuchsianize(H: BiPoly, lambdas, rel_tol=1e-8, max_k=40) -> PFSystem:
    """Perturb the redundant system of a balanced Morse ``H`` to one with simple spectrum.

    A second system is obtained by forcing remainders onto ``mu = n^2``
    pivot forms; for the remaining ``nu - mu`` forms the products
    ``(H - lambda_i) dw_i`` are divided instead, putting ``lambda_i`` on the
    diagonal.  The homotopy ``(1 - s) S_1 + s S_2`` keeps witnesses, and the
    smallest dyadic ``s = 2^-k`` (``k <= max_k``) with a certified simple
    spectrum is returned.  Float backend only.
    """
    from .validate import critical_points

    pot = hyperelliptic_potential(H)
    if pot is not None and len(pot) >= 3 and pot[-1] == 1 and pot[-2] == 0:
        sys = derive_hyperelliptic(pot)
        if list(lambdas):
            raise PFError("the hyperelliptic system has no redundant directions; expected 0 lambdas")
        ev = np.linalg.eigvals(sys.A_array())
        if not is_morse_values(ev, rel_tol):
            raise PFError("critical values are not pairwise distinct")
        return sys
    require_balanced(H)
    Hf = H.to_float()
    n = Hf.degree - 1
    base = derive_redundant(Hf)
    nu, mu = base.nu, n * n
    lambdas = [complex(v) for v in lambdas]
    if len(lambdas) != nu - mu:
        raise PFError("expected %d lambdas, got %d" % (nu - mu, len(lambdas)))
    locus = critical_points(Hf)
    values = [complex(v) for v in locus.values]
    if any(mult != 1 for _, _, mult in locus.points) or not is_morse_values(values, rel_tol):
        raise PFError("H is not Morse: critical values are not pairwise distinct")
    scale = max([abs(v) for v in values + lambdas] + [1.0])
    if lambdas and (not is_morse_values(lambdas, rel_tol) or
                    min(abs(l - t) for l in lambdas for t in values) <= rel_tol * scale):
        raise PFError("lambdas must be pairwise distinct and differ from all critical values")

    W, zetas = low_degree_image(Hf, base.basis)
    pivots, others = select_pivots(W, mu)
    factors = np.array([complex(f) for f in base.basis.factors])
    A1, B1 = base.A_array(), base.B_array()
    A2 = np.zeros_like(A1)
    B2 = np.zeros_like(B1)
    etas2 = []
    lam_of = dict(zip(others, lambdas))
    for i in range(nu):
        theta = A1[i] * factors  # monomial coordinates of Theta_i
        if i in lam_of:
            theta = theta.copy()
            theta[i] -= lam_of[i] * factors[i]
        z, rem = _reduce(theta, W, pivots, others)
        zeta = Form1.zero()
        for c, zf in zip(z, zetas):
            zeta = zeta + zf * complex(c)
        A2[i] = rem / factors
        if i in lam_of:
            A2[i, i] += lam_of[i]
        eta = base.etas[i] + zeta
        B2[i] = np.array([complex(c) for c in base.basis.expand(exterior_d(eta))])
        etas2.append(eta)

    chosen = None
    for k in range(max_k, -1, -1):
        s = 2.0 ** (-k)
        As = (1 - s) * A1 + s * A2
        ev, err = _eig_error_bound(As)
        rho = float(np.abs(ev).max())
        gap = _min_gap(ev)
        if gap > max(rel_tol * rho, 10 * err):
            chosen = (k, s, gap, rho, err)
            break
    if chosen is None:
        raise PFError("no s = 2^-k (k <= %d) gives a simple spectrum" % max_k)
    k, s, gap, rho, err = chosen
    A = (1 - s) * A1 + s * A2
    B = (1 - s) * B1 + s * B2
    etas = tuple(e1 * (1 - s) + e2 * s for e1, e2 in zip(base.etas, etas2))
    tight, full = redundant_bounds(n)
    cert = _cert(A.tolist(), B.tolist(), None, None,
                 system1=float(base.cert["achieved"]),
                 system2=float(l1_operator_norm(A2) + l1_operator_norm(B2)))
    meta = {"s": s, "k": k, "gap": gap, "spectral_radius": rho, "eig_error_bound": err,
            "pivots": [list(base.basis.entries[i]) for i in pivots],
            "lambdas": lambdas, "bound_redundant": full}
    return PFSystem(n, base.basis, _tuple_matrix(A.tolist()), _tuple_matrix(B.tolist()), etas, Hf,
                    "fuchsianized", cert, meta)


def with_matrices(sys: PFSystem, A=None, B=None) -> PFSystem:
    """Copy of ``sys`` with replaced matrices (used to build corrupted test systems)."""
    return replace(sys, A=_tuple_matrix(A) if A is not None else sys.A,
                   B=_tuple_matrix(B) if B is not None else sys.B)
