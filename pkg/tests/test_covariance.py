import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphere_excursion import covariance as cm
from sphere_excursion.errors import InvalidModelError, MethodMismatchError
from sphere_excursion.specialfn import gegenbauer_eval

UNIT_MODELS = [
    (cm.Canonical(), 2),
    (cm.ArccosLinear(), 3),
    (cm.PoweredExponential(1.0, 1.0), 1),
    (cm.PoweredExponential(0.4, 0.5), 2),
    (cm.SineModel(2.0, 1.5), 2),
    (cm.SchoenbergSeries(2, (0.2, 0.3, 0.5)), 2),
    (cm.SchoenbergSeries(1, (0.0, 0.5, 0.25, 0.25)), 1),
    (cm.SchoenbergSeries(4, (0.1, 0.2, 0.1)), 4),
    (cm.MonomialSeries((0.1, 0.4, 0.3, 0.2)), 3),
]


def unit(model, N):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return cm.normalize(model, N)[0]


def test_canonical_is_inner_product():
    for t in (-0.3, 0.0, 0.8):
        assert cm.covariance_eval(cm.Canonical(), t, 2) == t


def test_powered_exponential_at_zero_distance():
    assert cm.covariance_eval(cm.PoweredExponential(1.0, 1.0), 1.0, 2) == 1.0


def test_arccos_linear_orthogonal():
    assert cm.covariance_eval(cm.ArccosLinear(), 0.0, 2) == pytest.approx(0.0, abs=1e-15)


def test_arccos_linear_series_expansion():
    b = cm.arccos_linear_monomial(200)
    for t in (-0.6, 0.1, 0.5):
        series = np.polynomial.polynomial.polyval(t, b)
        assert series == pytest.approx(cm.covariance_eval(cm.ArccosLinear(), t, 2), abs=1e-12)
    # partial sums of n b_n grow without bound
    partial = np.cumsum(np.arange(b.size) * b)
    assert partial[-1] > 2 * partial[b.size // 8]


@pytest.mark.parametrize("model,N", UNIT_MODELS)
def test_unit_variance_and_bounded(model, N):
    m = unit(model, N)
    assert cm.covariance_eval(m, 1.0, N) == pytest.approx(1.0, abs=1e-14)
    t = np.linspace(-1, 1, 401)
    assert np.all(np.abs(cm.covariance_eval(m, t, N)) <= 1 + 1e-12)


def test_dimension_mismatch():
    with pytest.raises(InvalidModelError):
        cm.covariance_eval(cm.SchoenbergSeries(2, (1.0,)), 0.2, 3)


def test_parameter_ranges():
    with pytest.raises(InvalidModelError):
        cm.PoweredExponential(1.0, 1.5)
    with pytest.raises(InvalidModelError):
        cm.SineModel(1.0, 2.0)
    with pytest.raises(InvalidModelError):
        cm.StandardizedSFBM(0.7)
    with pytest.raises(InvalidModelError):
        cm.LocalExpansion(0.0, 1.0)
    with pytest.raises(InvalidModelError):
        cm.LocalExpansion(1.0, 2.5)


class TestCprime:
    def test_canonical(self):
        report = cm.cprime(cm.MonomialSeries((0.0, 1.0)), 2)
        assert report.condition == cm.A1_PRIME
        assert report.cprime == 1.0
        assert cm.cprime(cm.Canonical(), 5).cprime == 1.0

    def test_arccos_linear_not_smooth(self):
        report = cm.cprime(cm.ArccosLinear(), 2)
        assert report.condition == cm.NOT_SMOOTH
        assert math.isinf(report.cprime)

    def test_schoenberg_first_legendre(self):
        report = cm.cprime(cm.SchoenbergSeries(2, (0.0, 1.0)), 2)
        assert report.condition == cm.A1
        assert report.cprime == 1.0

    def test_circle_uses_squares(self):
        series = cm.SchoenbergSeries(1, (0.0, 0.5, 0.0, 0.5))
        assert cm.cprime(series, 1).cprime == pytest.approx(0.5 * 1 + 0.5 * 9)

    def test_normalizes_first(self):
        with pytest.warns(UserWarning):
            report = cm.cprime(cm.MonomialSeries((0.0, 2.0, 2.0)), 2)
        assert report.cprime == pytest.approx(1.5)
        assert report.diagnostics

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.floats(0, 1), min_size=1, max_size=12).filter(lambda b: sum(b) > 1e-3),
        st.integers(1, 5),
    )
    def test_dual_route(self, b, N):
        monomial = cm.MonomialSeries(tuple(b))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            schoenberg = cm.schoenberg_from_monomial(monomial, N)
            direct = cm.cprime(monomial, N).cprime
            via = cm.cprime(cm.SchoenbergSeries(N, tuple(np.maximum(schoenberg.coefficients, 0))), N).cprime
        if direct > 0:
            assert via == pytest.approx(direct, rel=1e-10)

    def test_derivative_at_one(self):
        # C' is the derivative of the covariance in t at t = 1
        series = unit(cm.SchoenbergSeries(3, (0.1, 0.3, 0.2, 0.4)), 3)
        h = 1e-6
        fd = (series(1.0) - series(1.0 - h)) / h
        fd2 = (series(1.0) - series(1.0 - 2 * h)) / (2 * h)
        slope = 2 * fd - fd2
        assert cm.cprime(series, 3).cprime == pytest.approx(slope, rel=1e-7)


class TestLocalExpansion:
    def test_closed_forms(self):
        assert cm.local_expansion(cm.Canonical(), 2) == cm.LocalExpansion(0.5, 2.0)
        assert cm.local_expansion(cm.PoweredExponential(3.0, 1.0), 2) == cm.LocalExpansion(3.0, 1.0)
        local = cm.local_expansion(cm.ArccosLinear(), 2)
        assert local.c == pytest.approx(2 / math.pi) and local.alpha == 1.0

    def test_sine_model_scale_is_reciprocal(self):
        model = cm.SineModel(2.0, 1.5)
        d = 1e-3
        one_minus = 1 - cm.covariance_eval(model, math.cos(d), 2)
        local = cm.local_expansion(model, 2)
        assert one_minus / d**1.5 == pytest.approx(local.c, rel=1e-6)

    def test_schoenberg(self):
        assert cm.local_expansion(cm.SchoenbergSeries(2, (0.0, 1.0)), 2) == cm.LocalExpansion(0.5, 2.0)

    @pytest.mark.parametrize(
        "model,N",
        [
            (cm.SchoenbergSeries(2, (0.0, 1.0)), 2),
            (cm.SchoenbergSeries(2, (0.1, 0.2, 0.3, 0.4)), 2),
            (cm.SchoenbergSeries(1, (0.0, 0.5, 0.5)), 1),
            (cm.MonomialSeries((0.0, 0.2, 0.0, 0.8)), 4),
        ],
    )
    def test_richardson(self, model, N):
        m = unit(model, N)
        ratio = {d: (1 - cm.covariance_eval(m, math.cos(d), N)) / d**2 for d in (1e-2, 1e-3, 1e-4)}
        extrap = (100 * ratio[1e-3] - ratio[1e-2]) / 99
        target = cm.cprime(m, N).cprime / 2
        assert extrap == pytest.approx(target, rel=1e-4)
        assert ratio[1e-4] == pytest.approx(target, rel=1e-4)

    def test_sfbm_rejected(self):
        with pytest.raises(MethodMismatchError):
            cm.local_expansion(cm.StandardizedSFBM(0.25), 2)


class TestValidate:
    def test_negative_coefficient(self):
        with pytest.raises(InvalidModelError):
            cm.validate_model(cm.SchoenbergSeries(2, (0.5, 0.6, -0.1)), 2)

    def test_finite_monomial(self):
        assert cm.validate_model(cm.MonomialSeries((0.0, 0.5, 0.5)), 3).condition == cm.A1_PRIME

    def test_arccos_linear(self):
        report = cm.validate_model(cm.ArccosLinear(), 2)
        assert report.condition == cm.NOT_SMOOTH
        assert report.local.c == pytest.approx(2 / math.pi)
        assert report.local.alpha == 1.0

    def test_records_normalization(self):
        report = cm.validate_model(cm.SchoenbergSeries(2, (1.0, 1.0)), 2)
        assert any("unit variance" in d for d in report.diagnostics)


class TestBasisChange:
    def test_linear(self):
        out = cm.schoenberg_from_monomial(cm.MonomialSeries((0.0, 1.0)), 2)
        np.testing.assert_allclose(out.coefficients, [0.0, 1.0], atol=1e-15)

    def test_constant(self):
        out = cm.schoenberg_from_monomial(cm.MonomialSeries((1.0,)), 3)
        assert out.coefficients == (1.0,)

    def test_square_in_legendre(self):
        out = cm.schoenberg_from_monomial(cm.MonomialSeries((0.0, 0.0, 1.0)), 2)
        # solve a_0 + a_2 P_2(t) = t^2 with P_2 = (3 t^2 - 1)/2
        a2 = 2.0 / 3.0
        a0 = a2 / 2.0
        np.testing.assert_allclose(out.coefficients, [a0, 0.0, a2], atol=1e-15)
        t = np.linspace(-1, 1, 20)
        np.testing.assert_allclose(out(t), t**2, atol=1e-12)

    def test_first_legendre_is_identity(self):
        np.testing.assert_allclose(gegenbauer_eval(1, 0.5, np.linspace(-1, 1, 5)), np.linspace(-1, 1, 5))

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=20), st.integers(1, 6))
    def test_round_trip(self, b, N):
        monomial = cm.MonomialSeries(tuple(b))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            schoenberg = cm.schoenberg_from_monomial(monomial, N)
        t = np.linspace(-1, 1, 50)
        np.testing.assert_allclose(schoenberg(t), monomial(t), atol=1e-10)

    def test_monomials_have_nonnegative_expansions(self):
        # powers of t are covariances on every sphere
        for N in (1, 2, 3):
            for n in range(10):
                b = [0.0] * n + [1.0]
                with warnings.catch_warnings():
                    warnings.simplefilter("error")
                    out = cm.schoenberg_from_monomial(cm.MonomialSeries(tuple(b)), N)
                assert min(out.coefficients) >= 0

    def test_reports_negative(self):
        # P_2 - 0.5 in the monomial basis is 1.5 t^2 - 1 on S^2
        with pytest.warns(UserWarning, match="negative"):
            cm.schoenberg_from_monomial(cm.MonomialSeries((1.0, 0.0, -1.5)), 2)

    def test_degree_cap(self):
        with pytest.raises(InvalidModelError):
            cm.schoenberg_from_monomial(cm.MonomialSeries(tuple([0.0] * 70 + [1.0])), 2)
