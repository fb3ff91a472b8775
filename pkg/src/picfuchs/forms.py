"""Sparse bivariate polynomials and polynomial differential forms on C^2.

Coefficients are plain Python numbers. Two backends share the same code:

* ``float``: coefficients are ``complex`` (double precision);
* ``rational``: coefficients are ``int`` / ``fractions.Fraction`` and all
  arithmetic is exact, so identities can be checked with zero residual.

Norms are l1 norms (sum of absolute values of all coefficients).  The degree
of a k-form is the maximal degree of its coefficients plus k, and the degree
of a zero form is ``None``.  Orientation: ``dx^dy`` is positive, so
``d(y dx) = -dx^dy``.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from types import MappingProxyType
from typing import Union

import numpy as np

from .errors import ParseError, PFError

BACKENDS = ("float", "rational")


def _is_exact_number(c) -> bool:
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


def to_fraction(c) -> Fraction:
    """Exact conversion of a real coefficient; complex values must be real."""
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, complex):
        if c.imag != 0:
            raise PFError("rational backend cannot hold complex coefficient %r" % (c,))
        c = c.real
    return Fraction(c)


class BiPoly:
    """Immutable sparse polynomial in ``x`` and ``y``.

    ``terms`` maps exponent pairs ``(a, b)`` to the coefficient of ``x^a y^b``;
    zero coefficients are never stored.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for (a, b), c in terms.items():
                if c != 0:
                    if a < 0 or b < 0:
                        raise ValueError("negative exponent (%d, %d)" % (a, b))
                    clean[(int(a), int(b))] = c
        self._terms = clean
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def monomial(cls, a, b, c=1):
        return cls({(a, b): c})

    @classmethod
    def const(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def from_univariate(cls, coeffs, var="x"):
        """Build from ascending coefficients ``coeffs[k]`` of ``var^k``."""
        if var == "x":
            return cls({(k, 0): c for k, c in enumerate(coeffs)})
        return cls({(0, k): c for k, c in enumerate(coeffs)})

    # -- basic queries ----------------------------------------------------
    @property
    def terms(self):
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self):
        return not self._terms

    @property
    def degree(self):
        if not self._terms:
            return None
        return max(a + b for a, b in self._terms)

    def degree_in(self, var):
        if not self._terms:
            return None
        i = 0 if var == "x" else 1
        return max(k[i] for k in self._terms)

    def coeff(self, a, b):
        return self._terms.get((a, b), 0)

    def l1_norm(self):
        return sum((abs(c) for c in self._terms.values()), 0)

    def is_exact(self):
        return all(_is_exact_number(c) for c in self._terms.values())

    def is_homogeneous(self):
        return len({a + b for a, b in self._terms}) <= 1

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, BiPoly):
            if isinstance(other, (Form1, Form2)):
                return NotImplemented
            other = BiPoly.const(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            v = out.get(k, 0) + c
            if v == 0:
                out.pop(k, None)
            else:
                out[k] = v
        return BiPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, BiPoly):
            other = BiPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (Form1, Form2)):
            return NotImplemented
        if not isinstance(other, BiPoly):
            if other == 0:
                return BiPoly()
            return BiPoly({k: c * other for k, c in self._terms.items()})
        out = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                k = (a1 + a2, b1 + b2)
                out[k] = out.get(k, 0) + c1 * c2
        return BiPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, BiPoly):
            if other.degree != 0:
                raise PFError("division by a non-constant polynomial")
            other = other.coeff(0, 0)
        if _is_exact_number(other) and self.is_exact():
            return BiPoly({k: Fraction(c) / other for k, c in self._terms.items()})
        return BiPoly({k: c / other for k, c in self._terms.items()})

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise PFError("polynomial powers must be non-negative integers")
        out = BiPoly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def shift_monomial(self, da, db):
        """Multiply by ``x^da y^db`` (an l1 isometry)."""
        return BiPoly({(a + da, b + db): c for (a, b), c in self._terms.items()})

    def __eq__(self, other):
        if isinstance(other, BiPoly):
            return self._terms == other._terms
        if isinstance(other, (int, float, complex, Fraction)):
            return self == BiPoly.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- calculus and structure -------------------------------------------
    def diff(self, var):
        i = 0 if var == "x" else 1
        out = {}
        for (a, b), c in self._terms.items():
            e = (a, b)[i]
            if e:
                k = (a - 1, b) if i == 0 else (a, b - 1)
                out[k] = c * e
        return BiPoly(out)

    def homogeneous_part(self, k):
        return BiPoly({m: c for m, c in self._terms.items() if m[0] + m[1] == k})

    def truncate(self, max_degree):
        """Terms of total degree ``<= max_degree``."""
        return BiPoly({m: c for m, c in self._terms.items() if m[0] + m[1] <= max_degree})

    def principal_part(self):
        return principal_part(self)

    def map_coeffs(self, f):
        return BiPoly({k: f(c) for k, c in self._terms.items()})

    def to_float(self):
        return self.map_coeffs(complex)

    def to_exact(self):
        return self.map_coeffs(to_fraction)

    def __call__(self, x, y):
        x = np.asarray(x) if isinstance(x, (list, tuple)) else x
        y = np.asarray(y) if isinstance(y, (list, tuple)) else y
        total = 0
        for (a, b), c in self._terms.items():
            total = total + c * x ** a * y ** b
        return total

    def translate(self, alpha, beta):
        """Return ``H(x + alpha, y + beta)``."""
        out = {}
        for (a, b), c in self._terms.items():
            for i in range(a + 1):
                ca = c * comb(a, i) * alpha ** (a - i)
                if ca == 0:
                    continue
                for j in range(b + 1):
                    v = ca * comb(b, j) * beta ** (b - j)
                    out[(i, j)] = out.get((i, j), 0) + v
        return BiPoly(out)

    def scale_vars(self, lx, ly=None):
        """Return ``H(lx * x, ly * y)``."""
        ly = lx if ly is None else ly
        return BiPoly({(a, b): c * lx ** a * ly ** b for (a, b), c in self._terms.items()})

    def substitute_linear(self, m):
        """Return ``H(m00 x + m01 y, m10 x + m11 y)`` for a 2x2 matrix ``m``."""
        X = BiPoly({(1, 0): m[0][0], (0, 1): m[0][1]})
        Y = BiPoly({(1, 0): m[1][0], (0, 1): m[1][1]})
        out = BiPoly()
        for (a, b), c in self._terms.items():
            out = out + (X ** a) * (Y ** b) * c
        return out

    def univariate(self, var="x"):
        """Ascending coefficient list; raises if the other variable occurs."""
        i = 0 if var == "x" else 1
        if any(k[1 - i] for k in self._terms):
            raise PFError("polynomial is not univariate in %s" % var)
        if not self._terms:
            return [0]
        deg = self.degree_in(var)
        out = [0] * (deg + 1)
        for k, c in self._terms.items():
            out[k[i]] = c
        return out

    def to_dense(self, size=None):
        """Complex array ``C[a, b]`` of coefficients, square of side ``size``."""
        d = self.degree or 0
        size = d + 1 if size is None else size
        C = np.zeros((size, size), dtype=np.complex128)
        for (a, b), c in self._terms.items():
            C[a, b] = complex(c)
        return C

    def max_abs_coeff(self):
        return max((abs(c) for c in self._terms.values()), default=0)

    # -- text -------------------------------------------------------------
    def to_text(self):
        return format_poly(self)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return "BiPoly(%s)" % self.to_text()


PolyLike = Union[BiPoly, int, float, complex, Fraction]


def _as_poly(p) -> BiPoly:
    return p if isinstance(p, BiPoly) else BiPoly.const(p)


@dataclass(frozen=True)
class Form1:
    """The 1-form ``P dx + Q dy``."""

    P: BiPoly
    Q: BiPoly

    def __post_init__(self):
        object.__setattr__(self, "P", _as_poly(self.P))
        object.__setattr__(self, "Q", _as_poly(self.Q))

    @staticmethod
    def zero():
        return Form1(BiPoly(), BiPoly())

    @property
    def degree(self):
        degs = [d for d in (self.P.degree, self.Q.degree) if d is not None]
        return max(degs) + 1 if degs else None

    def l1_norm(self):
        return self.P.l1_norm() + self.Q.l1_norm()

    def is_zero(self):
        return self.P.is_zero() and self.Q.is_zero()

    def __add__(self, other):
        if not isinstance(other, Form1):
            return NotImplemented
        return Form1(self.P + other.P, self.Q + other.Q)

    def __sub__(self, other):
        if not isinstance(other, Form1):
            return NotImplemented
        return Form1(self.P - other.P, self.Q - other.Q)

    def __neg__(self):
        return Form1(-self.P, -self.Q)

    def __mul__(self, other):
        if isinstance(other, (Form1, Form2)):
            return NotImplemented
        return Form1(self.P * other, self.Q * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Form1(self.P / other, self.Q / other)

    def shift_monomial(self, da, db):
        return Form1(self.P.shift_monomial(da, db), self.Q.shift_monomial(da, db))

    def homogeneous_part(self, form_degree):
        k = form_degree - 1
        return Form1(self.P.homogeneous_part(k), self.Q.homogeneous_part(k))

    def principal_part(self):
        if self.is_zero():
            raise PFError("zero form has no principal part")
        return self.homogeneous_part(self.degree)

    def map_coeffs(self, f):
        return Form1(self.P.map_coeffs(f), self.Q.map_coeffs(f))

    def is_exact(self):
        return self.P.is_exact() and self.Q.is_exact()

    def scale_vars(self, lx, ly=None):
        """Pullback under ``(x, y) -> (lx x, ly y)``."""
        ly = lx if ly is None else ly
        return Form1(self.P.scale_vars(lx, ly) * lx, self.Q.scale_vars(lx, ly) * ly)

    def __str__(self):
        parts = []
        if not self.P.is_zero():
            parts.append("(%s) dx" % self.P)
        if not self.Q.is_zero():
            parts.append("(%s) dy" % self.Q)
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class Form2:
    """The 2-form ``f dx^dy``."""

    f: BiPoly

    def __post_init__(self):
        object.__setattr__(self, "f", _as_poly(self.f))

    @staticmethod
    def zero():
        return Form2(BiPoly())

    @property
    def degree(self):
        d = self.f.degree
        return None if d is None else d + 2

    def l1_norm(self):
        return self.f.l1_norm()

    def is_zero(self):
        return self.f.is_zero()

    def __add__(self, other):
        if not isinstance(other, Form2):
            return NotImplemented
        return Form2(self.f + other.f)

    def __sub__(self, other):
        if not isinstance(other, Form2):
            return NotImplemented
        return Form2(self.f - other.f)

    def __neg__(self):
        return Form2(-self.f)

    def __mul__(self, other):
        if isinstance(other, (Form1, Form2)):
            return NotImplemented
        return Form2(self.f * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Form2(self.f / other)

    def shift_monomial(self, da, db):
        return Form2(self.f.shift_monomial(da, db))

    def split_degree(self, max_degree):
        """``(low, high)`` with ``deg low <= max_degree`` and high holding the rest."""
        k = max_degree - 2
        lo, hi = {}, {}
        for m, c in self.f.items():
            (lo if m[0] + m[1] <= k else hi)[m] = c
        return Form2(BiPoly(lo)), Form2(BiPoly(hi))

    def is_exact(self):
        return self.f.is_exact()

    def __str__(self):
        return "(%s) dx^dy" % self.f


Form0 = BiPoly
AnyForm = Union[BiPoly, Form1, Form2]

DX = Form1(BiPoly.const(1), BiPoly())
DY = Form1(BiPoly(), BiPoly.const(1))
#: the Euler form x dy - y dx
RHO = Form1(BiPoly.monomial(0, 1, -1), BiPoly.monomial(1, 0, 1))


def l1_norm(form) -> float:
    """Sum of absolute values of all coefficients of a 0-, 1- or 2-form."""
    if isinstance(form, (BiPoly, Form1, Form2)):
        return form.l1_norm()
    return abs(form)


def form_degree(form):
    return form.degree


def wedge(eta, theta):
    """Exterior product of forms; 0-forms act by multiplication."""
    if isinstance(eta, Form1) and isinstance(theta, Form1):
        return Form2(eta.P * theta.Q - eta.Q * theta.P)
    if isinstance(eta, (Form1, Form2)) and isinstance(theta, (Form1, Form2)):
        return Form2.zero()
    if isinstance(eta, (Form1, Form2)):
        return eta * _as_poly(theta)
    return theta * _as_poly(eta)


def exterior_d(form):
    """Exterior derivative of a 0-form or a 1-form."""
    if isinstance(form, Form1):
        return Form2(form.Q.diff("x") - form.P.diff("y"))
    if isinstance(form, Form2):
        raise TypeError("the exterior derivative of a 2-form on C^2 vanishes identically")
    form = _as_poly(form)
    return Form1(form.diff("x"), form.diff("y"))


def principal_part(H: BiPoly) -> BiPoly:
    """Top-degree homogeneous component of a nonzero polynomial."""
    if H.is_zero():
        raise PFError("no principal part: zero polynomial")
    return H.homogeneous_part(H.degree)


def to_backend(obj, backend):
    if backend not in BACKENDS:
        raise PFError("unknown backend %r" % backend)
    conv = to_fraction if backend == "rational" else complex
    if isinstance(obj, BiPoly):
        return obj.map_coeffs(conv)
    if isinstance(obj, Form1):
        return obj.map_coeffs(conv)
    if isinstance(obj, Form2):
        return Form2(obj.f.map_coeffs(conv))
    return conv(obj)


def backend_of(*objs):
    for o in objs:
        if isinstance(o, BiPoly) and not o.is_exact():
            return "float"
        if isinstance(o, (Form1, Form2)) and not o.is_exact():
            return "float"
    return "rational"


# ---------------------------------------------------------------------------
# text grammar
# ---------------------------------------------------------------------------

def _fmt_real(c):
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else "%d/%d" % (c.numerator, c.denominator)
    if isinstance(c, int):
        return str(c)
    r = repr(float(c))
    return r


def _fmt_coeff(c):
    """Return (sign, text) for a coefficient."""
    if isinstance(c, complex):
        if c.imag == 0:
            c = c.real
        else:
            return "+", "(%r,%r)" % (c.real, c.imag)
    if c < 0:
        return "-", _fmt_real(-c)
    return "+", _fmt_real(c)


def format_poly(p: BiPoly) -> str:
    """Render ``p`` in the grammar accepted by :func:`parse_poly`."""
    if p.is_zero():
        return "0"
    keys = sorted(p.terms, key=lambda k: (-(k[0] + k[1]), -k[0]))
    out = []
    for a, b in keys:
        sign, txt = _fmt_coeff(p.coeff(a, b))
        factors = [txt]
        if a:
            factors.append("x" if a == 1 else "x^%d" % a)
        if b:
            factors.append("y" if b == 1 else "y^%d" % b)
        term = "*".join(factors)
        if not out:
            out.append(term if sign == "+" else "-" + term)
        else:
            out.append(("+ " if sign == "+" else "- ") + term)
    return " ".join(out)


class _Parser:
    def __init__(self, text, backend):
        if backend not in BACKENDS:
            raise PFError("unknown backend %r" % backend)
        self.orig = text
        self.backend = backend
        src, pos = [], []
        for i, ch in enumerate(text.replace("−", "-")):
            if ch == "^":
                src.append("**")
                pos.extend([i, i])
            else:
                src.append(ch)
                pos.append(i)
        src = "".join(src)
        lead = len(src) - len(src.lstrip())
        self.src = src.strip()
        self.pos = pos[lead:] + [len(text)]

    def span(self, node):
        a = getattr(node, "col_offset", 0)
        b = getattr(node, "end_col_offset", a + 1) or a + 1
        return (self.pos[min(a, len(self.pos) - 1)], self.pos[min(b, len(self.pos) - 1)])

    def fail(self, msg, node=None):
        raise ParseError(msg, self.span(node) if node is not None else None, self.orig)

    def number(self, node):
        seg = ast.get_source_segment(self.src, node)
        v = node.value
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail("unsupported literal", node)
        if self.backend == "rational":
            return Fraction(seg.strip()) if isinstance(v, float) else Fraction(v)
        return complex(v)

    def parse(self):
        if not self.src:
            raise ParseError("empty polynomial text", (0, 0), self.orig)
        if "\n" in self.src:
            raise ParseError("polynomial text must be a single line", None, self.orig)
        try:
            tree = ast.parse(self.src, mode="eval")
        except SyntaxError as exc:
            off = (exc.offset or 1) - 1
            p = self.pos[min(off, len(self.pos) - 1)]
            raise ParseError("syntax error: %s" % exc.msg, (p, p + 1), self.orig) from None
        val = self.visit(tree.body)
        return _as_poly(val)

    def visit(self, node):
        if isinstance(node, ast.Constant):
            return BiPoly.const(self.number(node))
        if isinstance(node, ast.Name):
            if node.id == "x":
                return BiPoly.monomial(1, 0, 1 if self.backend == "rational" else 1 + 0j)
            if node.id == "y":
                return BiPoly.monomial(0, 1, 1 if self.backend == "rational" else 1 + 0j)
            self.fail("unknown variable %r (only x and y)" % node.id, node)
        if isinstance(node, ast.Tuple):
            if len(node.elts) != 2:
                self.fail("complex literal must be (re,im)", node)
            parts = []
            for e in node.elts:
                sign = 1
                if isinstance(e, ast.UnaryOp) and isinstance(e.op, (ast.USub, ast.UAdd)):
                    sign = -1 if isinstance(e.op, ast.USub) else 1
                    e = e.operand
                if not isinstance(e, ast.Constant):
                    self.fail("complex literal parts must be numbers", e)
                parts.append(sign * self.number(e))
            if self.backend == "rational":
                if parts[1] != 0:
                    self.fail("rational backend cannot hold complex literals", node)
                return BiPoly.const(parts[0])
            return BiPoly.const(complex(parts[0]) + 1j * complex(parts[1]))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self.visit(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                base = self.visit(node.left)
                e = node.right
                if not (isinstance(e, ast.Constant) and isinstance(e.value, int) and e.value >= 0):
                    self.fail("exponent must be a non-negative integer", e)
                return base ** e.value
            left, right = self.visit(node.left), self.visit(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if right.degree != 0:
                    self.fail("division only by nonzero constants", node.right)
                return left / right.coeff(0, 0)
        self.fail("unsupported syntax", node)


def parse_poly(text: str, backend: str = "float") -> BiPoly:
    """Parse a polynomial such as ``"(x^3+y^3)/3 - 1/2*x + (0,1)*y"``.

    Coefficient literals are decimals, rationals ``p/q`` or complex pairs
    ``(re,im)``.  Errors carry a ``span`` into the original text.
    """
    return _Parser(text, backend).parse()
