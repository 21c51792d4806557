import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from voltspec.errors import ConfigError, KernelValidationError, PoleProximityError, SectorError
from voltspec.kernel import (
    PowerLawFamily,
    check_conditions,
    eval_time,
    family_tail_laplace,
    from_power_law,
    integral_approximant_h,
    laplace,
    laplace_deriv,
    load_kernel,
    make_exponential,
    sector_decay_probe,
    truncation_for_tail,
)

# |y^r h(iy)| for A = B = 1, alpha = 1/2, beta = 1 (r = 1/2), 40-digit quadrature
H_MODULUS = {1e2: 3.0030122599626687726, 1e4: 3.1274820192258188228, 1e6: 3.1401787580090280114}


@st.composite
def kernels(draw, max_terms=8):
    n = draw(st.integers(1, max_terms))
    gaps = draw(st.lists(st.floats(0.05, 5.0), min_size=n, max_size=n))
    g = np.cumsum(gaps)
    c = draw(st.lists(st.floats(0.01, 10.0), min_size=n, max_size=n))
    return make_exponential(zip(c, g))


class TestMakeExponential:
    def test_single_term(self):
        k = make_exponential([(1.0, 2.0)])
        assert k.N == 1
        assert k.partial_S() == 0.5
        assert k.tail_S == 0.0 and k.tail_C == 0.0

    def test_two_terms(self):
        k = make_exponential([(2.0, 3.0), (1.0, 1.0)])
        assert list(k.gamma) == [1.0, 3.0]
        assert k.partial_S() == pytest.approx(1 + 2 / 3, rel=1e-15)

    @pytest.mark.parametrize("terms", [[(1.0, -1.0)], [(0.0, 1.0)], [(-1.0, 1.0)],
                                       [(1.0, 1.0), (2.0, 1.0)], []])
    def test_rejects_invalid(self, terms):
        with pytest.raises(KernelValidationError):
            make_exponential(terms)

    def test_arrays_are_read_only(self):
        k = make_exponential([(1.0, 2.0)])
        with pytest.raises(ValueError):
            k.c[0] = 3.0


class TestPowerLaw:
    def test_terms_and_tail(self):
        k = from_power_law(PowerLawFamily(1, 1, 0.5, 2, 3))
        np.testing.assert_allclose(k.c, [1, 2**-0.5, 3**-0.5], rtol=1e-15)
        np.testing.assert_allclose(k.gamma, [1, 4, 9], rtol=1e-15)
        assert k.tail_S == pytest.approx(3**-1.5 / 1.5, rel=1e-15)
        assert k.tail_S == pytest.approx(0.12830, abs=1e-5)
        assert math.isinf(k.tail_C)

    def test_tail_bound_dominates_true_tail(self):
        # sum_{k>3} k^-2.5 = zeta(2.5) - 1 - 2^-2.5 - 3^-2.5
        true_tail = 0.100560532044322
        k = np.arange(4, 10**6 + 1, dtype=float)
        partial = math.fsum((k**-2.5).tolist())
        assert partial == pytest.approx(true_tail, abs=1e-8)
        assert from_power_law(PowerLawFamily(1, 1, 0.5, 2, 3)).tail_S >= true_tail

    def test_harmonic_amplitudes_flagged_divergent(self):
        k = from_power_law(PowerLawFamily(1, 1, 1, 1, 2))
        np.testing.assert_allclose(k.terms, [(1, 1), (0.5, 2)])
        assert check_conditions(k).cond_b is False

    def test_rejects_small_exponents(self):
        with pytest.raises(KernelValidationError):
            PowerLawFamily(1, 1, 0.5, 0.4, 5)

    def test_r(self):
        assert PowerLawFamily(1, 1, 0.5, 2, 3).r == 0.75
        assert PowerLawFamily(1, 1, 1, 1, 3).r == 1.0

    @pytest.mark.parametrize("fam", [PowerLawFamily(1, 1, 0.5, 2, 50), PowerLawFamily(2, 3, 1, 1, 40),
                                     PowerLawFamily(1, 1, 2, 1, 30)])
    def test_doubling_changes_partial_sum_less_than_tail(self, fam):
        s_n = from_power_law(fam).partial_S()
        s_2n = from_power_law(fam.with_N(2 * fam.N)).partial_S()
        assert 0 < s_2n - s_n < fam.tail_S()

    def test_truncation_for_tail(self):
        fam = PowerLawFamily(1, 1, 0.5, 2, 1)
        n = truncation_for_tail(fam, 1e-4)
        assert fam.tail_S(n) <= 1e-4 < fam.tail_S(n - 1)


class TestEvaluation:
    def test_eval_time(self):
        k = make_exponential([(1.0, 2.0)])
        assert eval_time(k, 0.0) == 1.0
        assert eval_time(k, math.log(2) / 2) == pytest.approx(0.5, rel=1e-15)
        assert eval_time(make_exponential([(1, 1), (2, 3)]), 0.0) == 3.0
        with pytest.raises(ValueError):
            eval_time(k, -1.0)

    def test_laplace_examples(self):
        k = make_exponential([(1, 1), (2, 3)])
        assert laplace(k, 1.0) == 1.0
        assert laplace(k, 1j) == pytest.approx(1.1 - 0.7j, abs=1e-15)

    def test_laplace_deriv_examples(self):
        assert laplace_deriv(make_exponential([(1, 2)]), 0.0) == -0.25
        assert laplace_deriv(make_exponential([(1, 1), (2, 3)]), 1.0) == -0.375

    @pytest.mark.parametrize("f", [laplace, laplace_deriv])
    def test_pole_error(self, f):
        with pytest.raises(PoleProximityError):
            f(make_exponential([(1, 2)]), -2.0)
        with pytest.raises(PoleProximityError):
            f(make_exponential([(1, 2)]), -2.0 + 1e-13)
        f(make_exponential([(1, 2)]), -2.0 + 1e-9)

    @given(kernels(), st.floats(-50, 50), st.floats(-50, 50))
    def test_conjugate_symmetry(self, k, x, y):
        lam = complex(x, y)
        if np.min(np.abs(lam + k.gamma)) < 1e-6:
            return
        assert laplace(k, lam.conjugate()) == laplace(k, lam).conjugate()

    @given(kernels())
    def test_real_and_decreasing_right_of_first_pole(self, k):
        g1 = k.gamma[0]
        xs = -g1 + g1 * np.geomspace(1e-6, 1e3, 200)
        vals = [laplace(k, x) for x in xs]
        assert all(v.imag == 0 for v in vals)
        assert all(b.real < a.real for a, b in zip(vals, vals[1:]))

    @given(kernels())
    def test_laplace_at_zero_equals_S_exactly(self, k):
        assert laplace(k, 0.0).real == check_conditions(k).S[0]

    def test_derivative_matches_finite_difference(self):
        k = make_exponential([(1, 1), (0.5, 2), (0.25, 4)])
        lam, h = 0.3 + 0.7j, 1e-6
        fd = (laplace(k, lam + h) - laplace(k, lam - h)) / (2 * h)
        assert abs(fd - laplace_deriv(k, lam)) < 1e-8


class TestConditions:
    def test_log2_series(self):
        k = make_exponential([(2.0**-j, j) for j in range(1, 41)])
        rep = check_conditions(k)
        assert rep.S[0] == pytest.approx(math.log(2), abs=2**-40)
        assert rep.cond_a

    def test_zeta3_series(self):
        k = from_power_law(PowerLawFamily(1, 1, 2, 1, 100))
        rep = check_conditions(k)
        zeta3 = 1.20205690315959
        assert rep.S[0] < zeta3 < rep.S[1]
        assert rep.S[0] == pytest.approx(1.2021, abs=1e-4)
        assert not rep.cond_a
        assert rep.cond_b is True

    def test_single_term(self):
        rep = check_conditions(make_exponential([(1, 2)]))
        assert rep.S == (0.5, 0.5)
        assert rep.cond_a and rep.cond_b
        assert rep.gap_sup == 0.0

    def test_gap_sup(self):
        rep = check_conditions(make_exponential([(1, 1), (1, 3), (1, 4)]))
        assert rep.gap_sup == 3.0

    def test_gap_plausibility_for_families(self):
        assert check_conditions(from_power_law(PowerLawFamily(1, 1, 0.5, 2, 10))).gap_unbounded_plausible
        assert not check_conditions(from_power_law(PowerLawFamily(1, 1, 0.8, 0.4, 10))).gap_unbounded_plausible

    def test_cond_a_uses_upper_end(self):
        # partial sum below 1 but the tail bound crosses it
        fam = PowerLawFamily(0.78, 1, 0.5, 2, 3)
        rep = check_conditions(from_power_law(fam))
        assert rep.S[0] < 1 < rep.S[1]
        assert not rep.cond_a


@given(st.floats(1e-3, 1e3), st.floats(1.0, 1e4))
def test_scalar_inequalities(g, a):
    assert g * g / (g * g + a * a) < 1
    assert g * a / (g * g + a * a) <= 0.5


class TestIntegralApproximant:
    def test_log_case_at_one(self):
        fam = PowerLawFamily(1, 1, 1, 1, 1)
        assert integral_approximant_h(fam, 1.0) == pytest.approx(math.log(2), rel=1e-12)

    def test_log_case_on_real_axis(self):
        fam = PowerLawFamily(1, 1, 1, 1, 1)
        for lam in np.geomspace(1, 1e4, 25):
            exact = math.log(lam + 1) / lam
            assert abs(integral_approximant_h(fam, lam) - exact) <= 1e-8 * exact

    def test_log_case_off_axis(self):
        fam = PowerLawFamily(2, 3, 1, 2, 1)
        lam = 50 * cmath.exp(2.5j)
        exact = (2 / 2) * cmath.log(lam / 3 + 1) / lam
        assert abs(integral_approximant_h(fam, lam) - exact) <= 1e-9 * abs(exact)

    @pytest.mark.parametrize("y", sorted(H_MODULUS))
    def test_modulus_on_imaginary_axis(self, y):
        fam = PowerLawFamily(1, 1, 0.5, 1, 1)
        val = abs(integral_approximant_h(fam, 1j * y)) * math.sqrt(y)
        assert val == pytest.approx(H_MODULUS[y], rel=1e-9)

    def test_modulus_limit(self):
        # limit is A B^(r-1)/beta * |int t^-r/(i+t)| = pi/sin(pi/2) = pi
        fam = PowerLawFamily(1, 1, 0.5, 1, 1)
        errs = [abs(abs(integral_approximant_h(fam, 1j * y)) * math.sqrt(y) - math.pi)
                for y in (1e2, 1e4, 1e6)]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 2e-3

    def test_sector_violation(self):
        with pytest.raises(SectorError):
            integral_approximant_h(PowerLawFamily(1, 1, 1, 1, 1), -5.0)

    def test_tail_estimate_matches_long_sum(self):
        fam = PowerLawFamily(1, 1, 0.5, 2, 50)
        lam = 30j
        long = from_power_law(fam.with_N(200000))
        k = np.arange(51, 200001, dtype=float)
        direct = complex(np.sum(k**-0.5 / (lam + k**2)))
        est = family_tail_laplace(fam, lam)
        assert abs(est - direct) < 1e-3 * abs(direct)
        assert long.N == 200000


class TestProbe:
    def test_single_term_ray(self):
        table = sector_decay_probe(make_exponential([(1, 2)]), None, 0.1, [10, 100, 1000], [0.0])
        abs_k = [r["abs_K"] for r in table.rows]
        abs_dk = [r["abs_lam_dK"] for r in table.rows]
        np.testing.assert_allclose(abs_k, [1 / 12, 1 / 102, 1 / 1002], rtol=1e-14)
        np.testing.assert_allclose(abs_dk, [10 / 144, 100 / 102**2, 1000 / 1002**2], rtol=1e-14)
        assert table.passed and table.decay_violations == []
        assert table.h_bounded is None

    def test_power_law_bounded(self):
        fam = PowerLawFamily(1, 1, 0.5, 2, 10**4)
        table = sector_decay_probe(from_power_law(fam), fam, 0.1, [1e2, 1e3, 1e4], [math.pi / 2])
        assert table.h_bounded
        col = [r["abs_lam_K_minus_h"] for r in table.rows]
        assert max(col) < 1.0

    def test_ray_outside_sector(self):
        with pytest.raises(SectorError):
            sector_decay_probe(make_exponential([(1, 2)]), None, 0.1, [10], [math.pi - 0.05])

    def test_radii_increasing(self):
        with pytest.raises(ValueError):
            sector_decay_probe(make_exponential([(1, 2)]), None, 0.1, [10, 5], [0.0])

    def test_large_rate_not_monotone_near_origin(self):
        # |lam + gamma| dips along arg 3pi/4 until |lam| ~ 0.71 gamma
        table = sector_decay_probe(make_exponential([(1, 100)]), None, 0.1, [10, 50], [0.75 * math.pi])
        assert table.decay_violations


class TestConfig:
    def test_finite(self):
        k = load_kernel('{"type": "finite", "terms": [[1, 2], [0.5, 1]]}')
        assert k.terms == [(0.5, 1.0), (1.0, 2.0)]

    def test_power_law(self, tmp_path):
        path = tmp_path / "k.json"
        path.write_text(json.dumps({"type": "power_law", "A": 1, "B": 1, "alpha": 0.5, "beta": 2, "N": 5}))
        k = load_kernel(str(path))
        assert k.N == 5 and k.family.r == 0.75

    @pytest.mark.parametrize("text", ['{"type": "finite"}', '{"type": "other"}', '{"type": "finite", "terms": [[1, -2]]}',
                                      '{"type": "power_law", "A": 1}', '{bad json', "/no/such/file.json", "[1, 2]"])
    def test_errors(self, text):
        with pytest.raises(ConfigError):
            load_kernel(text)
