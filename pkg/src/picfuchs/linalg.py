"""Small dense linear algebra shared by the exact and floating backends."""
from fractions import Fraction

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def _to_qq(c):
    c = Fraction(c)
    return QQ(c.numerator, c.denominator)


def _from_qq(e):
    return Fraction(int(e.numerator), int(e.denominator))


def exact_inverse(rows):
    """Inverse of a square Fraction matrix, or ``None`` if it is singular."""
    n = len(rows)
    dm = DomainMatrix([[_to_qq(c) for c in r] for r in rows], (n, n), QQ)
    if dm.det() == 0:
        return None
    return [[_from_qq(e) for e in r] for r in dm.inv().to_list()]


def exact_solve(rows, rhs):
    """Solve ``M z = rhs`` exactly for square nonsingular ``M``."""
    n = len(rows)
    dm = DomainMatrix([[_to_qq(c) for c in r] for r in rows], (n, n), QQ)
    b = DomainMatrix([[_to_qq(c)] for c in rhs], (n, 1), QQ)
    z = dm.lu_solve(b)
    return [_from_qq(r[0]) for r in z.to_list()]


def exact_rank(rows):
    if not rows:
        return 0
    m, n = len(rows), len(rows[0])
    return DomainMatrix([[_to_qq(c) for c in r] for r in rows], (m, n), QQ).rank()


def l1_operator_norm(M):
    """Max column absolute sum, for nested lists or arrays of any scalars."""
    if isinstance(M, np.ndarray):
        if M.size == 0:
            return 0.0
        return float(np.abs(M).sum(axis=0).max())
    if not M:
        return 0
    ncol = len(M[0])
    return max(sum((abs(M[i][j]) for i in range(len(M))), 0) for j in range(ncol))


def as_array(M):
    return np.array([[complex(c) for c in r] for r in M], dtype=np.complex128)
