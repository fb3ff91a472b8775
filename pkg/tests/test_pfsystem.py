from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from picfuchs.corpus import random_balanced, random_monic_morse_potential
from picfuchs.errors import CertificationError, DegreeError, NotBalancedError, NotQuasimonicError, PFError
from picfuchs.forms import BiPoly, Form2, parse_poly
from picfuchs.pfsystem import (basis_forms, closedness_defect, derive_doubly_hyperelliptic,
                               derive_hyperelliptic, derive_redundant, derive_redundant_unbalanced,
                               eigen_residuals, extend_block, fuchsianize, hyperelliptic_potential,
                               monomial_entries, redundant_bounds, select_pivots, witness_defect,
                               witness_residuals, with_matrices)
from picfuchs.validate import critical_points

from oracles import critical_values_univariate, multiset_distance, witness_residual_sympy

F = Fraction


def P(text, backend="rational"):
    return parse_poly(text, backend)


class TestBasis:
    def test_ordering(self):
        assert monomial_entries(1) == ((0, 0),)
        assert monomial_entries(2) == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_size_and_differentials(self, n):
        basis = basis_forms(n)
        assert basis.nu == n * (2 * n - 1)
        for i, (a, b) in enumerate(basis.entries):
            assert basis.d_coefficient(i) == BiPoly.monomial(a, b, -(b + 1))
            assert basis.form_degree(i) == a + b + 2

    def test_expand_outside_span(self):
        with pytest.raises(DegreeError):
            basis_forms(2).expand(Form2(P("x^3")))

    def test_bounds(self):
        assert redundant_bounds(1) == (6 * 1 * 4, 6 * 8)
        assert redundant_bounds(2) == (6 * 2 * 27, 6 * 81)


class TestHyperelliptic:
    def test_cubic_matrices(self):
        sys = derive_hyperelliptic([F(0), F(-1), F(0), F(1)])
        assert sys.A == ((0, F(-2, 3)), (F(-2, 9), 0))
        assert sys.B == ((F(5, 6), 0), (0, F(7, 6)))
        assert witness_defect(sys) == 0 and closedness_defect(sys) == 0

    def test_ellipse(self):
        sys = derive_hyperelliptic([F(0), F(0), F(1)])
        assert sys.A == ((0,),) and sys.B == ((1,),)

    def test_doubly_agrees_on_hyperelliptic(self):
        a = derive_hyperelliptic([F(0), F(-1), F(0), F(1)])
        b = derive_doubly_hyperelliptic([F(0), F(-1), F(0), F(1)], [F(0), F(0), F(1, 2)], monic=False)
        assert a.A == b.A and a.B == b.B
        assert witness_defect(b) == 0

    def test_errors(self):
        with pytest.raises(PFError, match="monic"):
            derive_hyperelliptic([0, 0, 0, 2])
        with pytest.raises(PFError, match="term"):
            derive_hyperelliptic([0, 0, 1, 1])
        with pytest.raises(DegreeError):
            derive_hyperelliptic([0, 1])
        with pytest.raises(PFError):
            derive_doubly_hyperelliptic([0, 0, 1], [0, 0, F(1, 2)])

    def test_potential_detection(self):
        assert hyperelliptic_potential(P("y^2/2 + x^3 - x")) == [0, -1, 0, 1]
        assert hyperelliptic_potential(P("y^2 + x^3")) is None

    @pytest.mark.parametrize("N", [3, 4, 5, 6])
    def test_eigenstructure(self, N, rng):
        p = random_monic_morse_potential(N, rng)
        sys = derive_hyperelliptic(p)
        cps, vals = critical_values_univariate([float(v) for v in p])
        ev = np.linalg.eigvals(sys.A_array())
        assert multiset_distance(ev, vals) <= 1e-8
        A = sys.A_array()
        for xs, t in zip(cps, vals):
            v = xs ** np.arange(sys.n)
            assert np.abs(A @ v - t * v).sum() <= 1e-8 * max(1, np.abs(A).sum()) * np.abs(v).sum()

    @given(st.lists(st.fractions(-3, 3, max_denominator=4), min_size=1, max_size=5))
    def test_triangular_B(self, low):
        p = list(low) + [F(0), F(1)]
        sys = derive_hyperelliptic(p)
        n = sys.n
        for i in range(n):
            for j in range(i + 1, n):
                assert sys.B[i][j] == 0
            assert abs(sys.B[i][i] - F(1, 2)) == F(i + 1, n + 1)

    @settings(max_examples=25)
    @given(st.lists(st.fractions(-3, 3, max_denominator=4), min_size=1, max_size=5))
    def test_norm_bound(self, low):
        p = list(low) + [F(0), F(1)]
        sys = derive_hyperelliptic(p)
        assert witness_defect(sys) == 0
        assert sys.certificate_holds()


class TestRedundant:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_homogeneous_oracle(self, n):
        H = BiPoly({(n + 1, 0): F(1, n + 1), (0, n + 1): F(1, n + 1)})
        sys = derive_redundant(H)
        assert all(v == 0 for r in sys.A for v in r)
        for i in range(sys.nu):
            for j in range(sys.nu):
                want = F(sys.basis.form_degree(i), n + 1) if i == j else 0
                assert sys.B[i][j] == want

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_random_exact_against_sympy(self, n, rng):
        H = random_balanced(n, rng)
        sys = derive_redundant(H)
        assert witness_residual_sympy(sys) == 0
        assert witness_defect(sys) == 0
        assert closedness_defect(sys) == 0
        assert sys.certificate_holds() and sys.cert["divisions_hold"]

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_random_float(self, n, rng):
        H = random_balanced(n, rng, exact=False)
        sys = derive_redundant(H)
        assert witness_defect(sys) <= 1e-12
        assert closedness_defect(sys) <= 1e-12

    def test_eigenvectors_at_critical_points(self):
        H = P("(x^3+y^3)/3 - x/2 + y/3", "float")
        sys = derive_redundant(H)
        loc = critical_points(H)
        assert loc.total_multiplicity == 4
        assert max(eigen_residuals(sys, [(x, y) for x, y, _ in loc.points])) <= 1e-10

    def test_corrupted_matrix_detected(self):
        sys = derive_redundant(P("(x^3+y^3)/3 + x/2"))
        A = [list(r) for r in sys.A]
        A[0][0] += F(1, 1000)
        assert witness_defect(with_matrices(sys, A=A)) > 0

    def test_requires_balanced(self):
        with pytest.raises(NotBalancedError):
            derive_redundant(P("(x^3+y^3)/3 + 5*x"))
        with pytest.raises((NotBalancedError, NotQuasimonicError)):
            derive_redundant(P("(x^3+y^3)/30"))


class TestUnbalanced:
    def test_exact_witness(self):
        H = P("(x^3+y^3)/3 + 4*x - 2*y + 1")
        sys = derive_redundant_unbalanced(H)
        assert sys.meta["dilation"] == 7
        assert witness_defect(sys) == 0
        assert closedness_defect(sys) == 0
        assert sys.certificate_holds()

    def test_small_c_is_balanced_path(self):
        H = P("(x^3+y^3)/3 + x/4")
        assert derive_redundant_unbalanced(H).A == derive_redundant(H).A

    def test_c_below_nonhomogeneity(self):
        with pytest.raises(PFError):
            derive_redundant_unbalanced(P("(x^3+y^3)/3 + 4*x"), 2)


class TestBlock:
    def test_ellipse_block(self):
        sys = derive_hyperelliptic([F(0), F(0), F(1)])
        blk = extend_block(sys, 5)
        assert blk.m == 2 and blk.size == 3
        assert blk.blockA == ((0, 0, 0), (0, 0, 0), (0, 0, 0))
        assert blk.blockB == ((1, 0, 0), (0, 2, 0), (0, 0, 3))
        nA, nB = blk.norms()
        assert nA + nB <= blk.bound()

    def test_small_degree_is_original(self):
        sys = derive_hyperelliptic([F(0), F(-1), F(0), F(1)])
        blk = extend_block(sys, 2)
        assert blk.m == 0 and blk.blockA == sys.A and blk.blockB == sys.B

    def test_ellipse_k1_row_residual(self):
        import math
        sys = derive_hyperelliptic([F(0), F(0), F(1)])
        blk = extend_block(sys, 2)
        A, B = blk.A_array(), blk.B_array()
        t = 0.7
        J = np.array([math.sqrt(2) * math.pi * t, math.sqrt(2) * math.pi * t * t])
        dJ = np.array([math.sqrt(2) * math.pi, 2 * math.sqrt(2) * math.pi * t])
        assert np.abs(t * dJ - A @ dJ - B @ J).max() <= 1e-12

    def test_cubic_block_structure(self):
        sys = derive_hyperelliptic([F(0), F(-1), F(0), F(1)])
        blk = extend_block(sys, 3)
        B = blk.B_array()
        assert np.allclose(B[2:, :2], -sys.A_array())
        assert np.allclose(B[:2, 2:], 0)
        nA, nB = blk.norms()
        assert nA + nB <= blk.bound()


class TestFuchsianize:
    def test_simple_spectrum(self):
        H = P("(x^3+y^3)/3 - x/2 + y/3", "float")
        sys = fuchsianize(H, [10, 11])
        ev = np.linalg.eigvals(sys.A_array())
        rho = np.abs(ev).max()
        d = np.abs(ev[:, None] - ev[None, :])
        d[np.diag_indices_from(d)] = np.inf
        assert d.min() > 1e-8 * rho
        assert witness_defect(sys) <= 1e-7

    def test_hyperelliptic_passthrough(self):
        H = P("y^2/2 + x^3 - x")
        sys = fuchsianize(H, [])
        assert sys.provenance == "hyperelliptic"
        with pytest.raises(PFError):
            fuchsianize(H, [1.0])

    def test_wrong_lambda_count(self):
        with pytest.raises(PFError, match="expected 2"):
            fuchsianize(P("(x^3+y^3)/3 - x/2 + y/3", "float"), [3])

    def test_non_morse_rejected(self):
        with pytest.raises(PFError):
            fuchsianize(P("(x^3+y^3)/3", "float"), [1, 2])

    def test_select_pivots_codimension(self):
        with pytest.raises(CertificationError):
            select_pivots(np.zeros((6, 3)), 4)
