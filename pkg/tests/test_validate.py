import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from picfuchs.corpus import random_balanced, random_monic_morse_potential
from picfuchs.errors import NoOvalError, NonIsolatedError, PFError
from picfuchs.forms import BiPoly, parse_poly
from picfuchs.pfsystem import derive_hyperelliptic, with_matrices
from picfuchs.validate import (critical_points, find_oval, finite_difference_derivative,
                               gelfand_leray_derivative, hyperelliptic_periods, inverse_sense_check,
                               normalize_sigma, ode_residual, oval_window, period_samples,
                               period_table, single_value_check)

from oracles import SQRT2_PI, hyperelliptic_period_mpmath, multiset_distance

F = Fraction


def P(text, backend="rational"):
    return parse_poly(text, backend)


class TestCriticalPoints:
    def test_hyperelliptic_example(self):
        loc = critical_points(P("y^2/2 + x^3/3 - x"))
        # the principal part x^3/3 is not regular, so fewer than n^2 points exist
        assert loc.total_multiplicity == 2 and not loc.regular
        vals = sorted(v.real for v in loc.values)
        assert vals == pytest.approx([-2 / 3, 2 / 3])

    def test_homogeneous_multiplicity(self):
        loc = critical_points(P("(x^3+y^3)/3"))
        assert len(loc.points) == 1
        x, y, m = loc.points[0]
        assert m == 4 and abs(x) + abs(y) <= 1e-12
        assert loc.values == (0j,) * 4

    def test_four_morse_points(self):
        loc = critical_points(P("(x^3+y^3)/3 - x - y"))
        assert loc.total_multiplicity == 4
        pts = sorted((round(x.real), round(y.real)) for x, y, _ in loc.points)
        assert pts == [(-1, -1), (-1, 1), (1, -1), (1, 1)]
        want = [4 / 3, 0, 0, -4 / 3]
        assert multiset_distance(loc.values, want) <= 1e-12

    def test_non_isolated(self):
        with pytest.raises(NonIsolatedError):
            critical_points(P("(x+y)^3"))

    def test_not_regular_warns(self):
        loc = critical_points(P("x^2*y^2 + x"))
        assert not loc.regular and loc.warning

    def test_complex_float_coefficients(self, rng):
        for _ in range(5):
            H = random_balanced(2, rng, exact=False)
            loc = critical_points(H)
            assert loc.total_multiplicity == 4
            for x, y, m in loc.points:
                assert abs(H.diff("x")(x, y)) + abs(H.diff("y")(x, y)) <= 1e-9

    @pytest.mark.parametrize("n", [2, 3])
    def test_bezout_count(self, n, rng):
        for _ in range(3):
            H = random_balanced(n, rng)
            assert critical_points(H).total_multiplicity == n * n


class TestSigma:
    def test_examples(self):
        _, v = normalize_sigma([-2 / 3, 2 / 3])
        assert np.allclose(v, [-1, 1])
        _, v = normalize_sigma([1, 2, 3])
        assert np.allclose(v, [-1, 0, 1])
        with pytest.raises(PFError, match="point"):
            normalize_sigma([0, 0, 0])

    @given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                    min_size=2, max_size=9))
    def test_invariants(self, vals):
        v = np.asarray(vals)
        if np.abs(v - v.mean()).max() <= 1e-9 * max(1, np.abs(v).max()):
            return
        chart, out = normalize_sigma(vals)
        out = np.asarray(out)
        assert abs(out.sum()) <= 1e-12 * len(out) * 10
        assert abs(np.abs(out).max() - 1) <= 1e-12
        assert np.allclose([chart.inverse(s) for s in out], v, rtol=1e-9, atol=1e-9)


class TestSingleValue:
    def test_translated_homogeneous(self):
        H = P("(x^3+y^3)/3").translate(-1, 2) + 5
        assert single_value_check(H)
        assert single_value_check(P("(x^3+y^3)/3 + 7"))
        assert not single_value_check(P("(x^3+y^3)/3 - x - y"))


class TestInverseSense:
    def test_trivial(self):
        rep = inverse_sense_check(P("(x^3+y^3)/3"))
        assert rep.holds and rep.max_abs_value == 0

    def test_boundary_exact(self):
        # n = 1: 1/(n sqrt 2) is irrational, so use n = 1 with h = 1/2 < 1/sqrt(2)
        rep = inverse_sense_check(P("x^2/2 + y^2/2 + x/2"))
        assert rep.holds

    def test_float_boundary_accepted(self):
        eps = 1 / (2 * math.sqrt(2))
        H = parse_poly("(x^3+y^3)/3", "float") + BiPoly({(1, 0): eps})
        rep = inverse_sense_check(H)
        assert rep.holds and rep.max_abs_value <= 1.5

    def test_violated_precondition(self):
        with pytest.raises(PFError):
            inverse_sense_check(P("(x^3+y^3)/3 + x"))


class TestPeriods:
    def test_ellipse(self):
        I = hyperelliptic_periods([0, 0, 1], 1.0)
        assert I[0] == pytest.approx(SQRT2_PI, rel=1e-12)
        for t in (0.1, 0.5, 3.0):
            assert hyperelliptic_periods([0, 0, 1], t)[0] / t == pytest.approx(SQRT2_PI, rel=1e-9)
        assert gelfand_leray_derivative([0, 0, 1], 1.0) == pytest.approx(SQRT2_PI, rel=1e-12)

    def test_against_mpmath(self):
        p = [0.0, -1.0, 0.0, 1.0]
        t = 0.1
        ov = find_oval(p, t)
        I = hyperelliptic_periods(p, t)
        for i in (1, 2):
            ref = hyperelliptic_period_mpmath(p, ov.left, ov.right, i, t)
            assert I[i - 1] == pytest.approx(ref, rel=1e-10)

    def test_monotone_inside_window(self):
        p = [0.0, -1.0, 0.0, 1.0]
        lo, hi = oval_window(p)
        assert lo == pytest.approx(-2 / (3 * math.sqrt(3)))
        assert hi == pytest.approx(2 / (3 * math.sqrt(3)))
        ts = np.linspace(lo + 0.01, hi - 0.01, 8)
        vals = [hyperelliptic_periods(p, t)[0] for t in ts]
        assert all(np.diff(vals) > 0)

    def test_symmetric_odd_moment(self):
        p = [0.0, 0.0, -1.0, 0.0, 1.0]
        assert gelfand_leray_derivative([0, 0, 1, 0, 1], 1.0, i=2) == pytest.approx(0, abs=1e-12)

    def test_finite_difference_agreement(self, rng):
        for N in (3, 4):
            p = [float(v) for v in random_monic_morse_potential(N, rng)]
            lo, hi = oval_window(p)
            top = hi if math.isfinite(hi) else lo + 2
            for t in np.linspace(lo + 0.1 * (top - lo), lo + 0.9 * (top - lo), 3):
                for i in range(1, N - 1):
                    gl = gelfand_leray_derivative(p, t, i=i)
                    fd = finite_difference_derivative(p, t, i=i)
                    assert gl == pytest.approx(fd, rel=1e-6, abs=1e-9)

    def test_no_oval(self):
        with pytest.raises(NoOvalError):
            hyperelliptic_periods([0, 0, 1], -1.0)
        with pytest.raises(NoOvalError):
            hyperelliptic_periods([0, 1, 0, 1], 0.5)
        with pytest.raises(NoOvalError, match="critical"):
            hyperelliptic_periods([0, 0, -1, 0, 1], 0.0)


class TestODEResidual:
    def test_ellipse(self):
        sys = derive_hyperelliptic([F(0), F(0), F(1)])
        s = period_samples([0, 0, 1], np.linspace(0.1, 2, 20))
        assert ode_residual(sys, s) <= 1e-6

    def test_morse_cubic_and_corruption(self):
        p = [F(0), F(-1), F(0), F(1)]
        sys = derive_hyperelliptic(p)
        lo, hi = oval_window([float(v) for v in p])
        s = period_samples([float(v) for v in p], np.linspace(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), 20))
        assert ode_residual(sys, s) <= 1e-6
        A = [list(r) for r in sys.A]
        A[0][0] += F(1, 10)
        assert ode_residual(with_matrices(sys, A=A), s) > 1e-3

    def test_dimension_mismatch(self):
        sys = derive_hyperelliptic([F(0), F(-1), F(0), F(1)])
        with pytest.raises(PFError):
            ode_residual(sys, period_samples([0, 0, 1], [1.0]))


class TestPeriodTable:
    def test_flags_and_header(self):
        tab = period_table([0, -1, 0, 1], -1.0, 0.3, 5)
        assert tab.header()[0] == "t" and tab.header()[-1] == "flag"
        flags = [r[3] for r in tab.rows]
        assert flags == ["no_oval", "no_oval", "ok", "ok", "ok"]
        lines = tab.to_csv().splitlines()
        assert len(lines) == 6

    def test_empty(self):
        assert period_table([0, 0, 1], 0.1, 1, 0).to_csv().count("\n") == 1
