import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from intervalquad.kernels import bernoulli_kernel_closed_form, eval_kernel, make_bernoulli, make_rational
from intervalquad.quadrature import (
    ConvolutionFunction,
    InfeasibleQuadratureError,
    IntervalQuadrature,
    PiecewiseConstant,
    apply,
    check_quadrature,
    convolve,
    equidistant,
    eval_convolution,
    step_function,
    validate,
)
from intervalquad.verify import random_feasible

TWO_PI = 2 * math.pi


# --- validate -------------------------------------------------------------------


def test_validate_accepts_wide_gaps():
    assert validate(IntervalQuadrature((0.0, math.pi), (math.pi, math.pi), 0.5))


def test_validate_half_width_bound():
    # pi/2 = 1.5708 for n = 2: 1.5 is still admissible, 1.6 is not
    assert validate(IntervalQuadrature((0.0, math.pi), (math.pi, math.pi), 1.5))
    report = validate(IntervalQuadrature((0.0, math.pi), (math.pi, math.pi), 1.6))
    assert not report
    assert "h must satisfy 0 <= h < pi/n" in report.violation


def test_validate_names_overlapping_windows():
    report = validate(IntervalQuadrature((0.0, 0.7), (1.0, 1.0), 0.4))
    assert not report.ok
    assert report.violation.startswith("x_1 + h < x_2 - h")


def test_validate_names_wraparound_overlap():
    report = validate(IntervalQuadrature((0.1, 3.0, 6.2), (1.0, 1.0, 1.0), 0.3))
    assert not report
    assert report.violation.startswith("x_3 + h < x_1 + 2pi - h")


def test_validate_point_rule_needs_distinct_knots():
    assert validate(IntervalQuadrature((0.0, 1.0), (1.0, 1.0), 0.0))
    assert not validate(IntervalQuadrature((1.0, 1.0), (1.0, 1.0), 0.0))


def test_validate_rejects_nonfinite_weights():
    assert not validate(IntervalQuadrature((0.0, 2.0), (1.0, math.nan), 0.1))
    assert not validate(IntervalQuadrature((0.0, 2.0), (1e308, 1e308), 0.1))


def test_check_quadrature_raises():
    with pytest.raises(InfeasibleQuadratureError, match="x_1 \\+ h < x_2 - h"):
        check_quadrature(IntervalQuadrature((0.0, 0.7), (1.0, 1.0), 0.4))


def test_constructor_canonicalises():
    q = IntervalQuadrature((7.0, -1.0), (1.0, 2.0), 0.1)
    assert q.knots == pytest.approx((7.0 - TWO_PI, TWO_PI - 1.0), abs=1e-15)
    # each weight follows its knot through the sort
    assert q.weights == (1.0, 2.0)
    q2 = IntervalQuadrature((5.0, 1.0), (1.0, 2.0), 0.1)
    assert q2.knots == (1.0, 5.0)
    assert q2.weights == (2.0, 1.0)


def test_constructor_rejects_length_mismatch():
    with pytest.raises(ValueError):
        IntervalQuadrature((0.0, 1.0), (1.0,), 0.1)


# --- equidistant ----------------------------------------------------------------


def test_equidistant_single_knot_wraps_to_zero():
    q = equidistant(1, 0.1, TWO_PI)
    assert q.knots == (0.0,)
    assert q.weights == (TWO_PI,)


def test_equidistant_four_knots():
    q = equidistant(4, 0.2, math.pi / 2)
    # knots pi/2, pi, 3pi/2, 2pi, reduced into [0, 2pi)
    assert_allclose(q.knots, [0.0, math.pi / 2, math.pi, 1.5 * math.pi], rtol=0, atol=1e-15)
    assert q.weights == (math.pi / 2,) * 4


@pytest.mark.parametrize("n", range(1, 12))
def test_equidistant_normalised_weight_sum(n):
    assert equidistant(n, 0.0, TWO_PI / n).weight_sum() == pytest.approx(TWO_PI, abs=1e-14)


@pytest.mark.parametrize("n, h", [(2, -0.1), (2, math.pi / 2), (3, 2.0), (0, 0.1), (2, math.nan)])
def test_equidistant_rejects_bad_half_width(n, h):
    with pytest.raises(ValueError):
        equidistant(n, h, 1.0)


# --- step function ----------------------------------------------------------------


def test_step_function_values():
    q = equidistant(2, 0.5, math.pi)
    assert step_function(q, math.pi) == pytest.approx(math.pi)
    assert step_function(q, math.pi / 2) == 0.0
    assert step_function(q, math.pi + 0.5) == pytest.approx(math.pi / 2)
    # the window around 2pi wraps through zero
    assert step_function(q, 0.2) == pytest.approx(math.pi)
    assert step_function(q, TWO_PI - 0.2) == pytest.approx(math.pi)


def test_step_function_rejects_point_rule():
    with pytest.raises(ValueError):
        step_function(equidistant(2, 0.0, math.pi), 1.0)


@pytest.mark.parametrize("seed", range(20))
def test_step_function_integrates_to_weight_sum(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    h = rng.uniform(0.05, 0.95) * math.pi / n
    q = random_feasible(n, h, int(rng.integers(2)), seed)
    # adaptive quadrature split at every window edge
    edges = np.sort(np.mod(np.concatenate([q.knot_array - h, q.knot_array + h]), TWO_PI))
    total, _ = integrate.quad(lambda t: step_function(q, t), 0.0, TWO_PI, points=edges,
                              epsabs=1e-12, limit=400)
    assert total == pytest.approx(q.weight_sum(), abs=1e-8)


# --- apply ----------------------------------------------------------------------


def test_apply_constant_function():
    q = equidistant(3, 0.3, TWO_PI / 3)
    assert apply(q, lambda t: 1.0) == pytest.approx(TWO_PI, abs=1e-12)


def test_apply_cosine_single_window():
    q = equidistant(1, 0.5, TWO_PI)
    assert apply(q, math.cos) == pytest.approx(TWO_PI * math.sin(0.5) / 0.5, abs=1e-12)


def test_apply_point_rule_on_sine():
    q = equidistant(2, 0.0, math.pi)
    assert apply(q, math.sin) == pytest.approx(0.0, abs=1e-15)


def test_apply_point_rule_is_exact_sum():
    q = IntervalQuadrature((0.5, 2.0), (1.5, -0.25), 0.0)
    assert apply(q, math.exp) == 1.5 * math.exp(0.5) - 0.25 * math.exp(2.0)


def test_apply_propagates_nonfinite():
    with pytest.raises(FloatingPointError):
        apply(equidistant(1, 0.0, 1.0), lambda t: math.inf)


def test_apply_rejects_bad_tol():
    with pytest.raises(ValueError):
        apply(equidistant(1, 0.1, 1.0), math.cos, 0.0)


def _smooth(a, b, c):
    return lambda t: a * math.sin(t) + b * math.cos(2 * t + c) + abs(math.sin(t / 2)) ** 3


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2), st.floats(-2, 2), st.integers(0, 10**6))
def test_apply_is_linear(alpha, beta, c1, c2, seed):
    q = random_feasible(3, 0.4, 0, seed)
    f, g = _smooth(1.0, c1, 0.3), _smooth(c2, 0.5, 1.1)
    lhs = apply(q, lambda t: alpha * f(t) + beta * g(t))
    assert lhs == pytest.approx(alpha * apply(q, f) + beta * apply(q, g), abs=1e-10)


@given(st.floats(-10, 10), st.integers(0, 10**6))
def test_apply_shift_covariance(tau, seed):
    q = random_feasible(4, 0.2, 1, seed)
    f = _smooth(0.7, -1.2, 0.4)
    shifted = apply(q.shifted(tau), lambda t: f(t - tau))
    assert shifted == pytest.approx(apply(q, f), abs=1e-10)


@given(st.floats(-100, 100), st.integers(0, 10**6))
def test_apply_constant_is_weight_sum(c, seed):
    q = random_feasible(3, 0.3, 0, seed)
    assert apply(q, lambda t: c) == pytest.approx(c * q.weight_sum(), abs=1e-12 * max(1, abs(c)) * 10)


# --- JSON ---------------------------------------------------------------------


@given(st.integers(0, 10**6), st.integers(1, 6), st.integers(0, 1))
def test_json_round_trip_is_bit_exact(seed, n, mu):
    q = random_feasible(n, 0.3 * math.pi / n, mu, seed)
    back = IntervalQuadrature.from_json(q.to_json())
    assert back == q
    assert validate(back)


@pytest.mark.parametrize("data", [
    [], {"n": 1, "h": 0.1, "knots": [0.0]},
    {"n": 1, "h": 0.1, "knots": [0.0], "weights": [1.0, 2.0]},
    {"n": 0, "h": 0.1, "knots": [], "weights": []},
    {"n": 1, "h": "0.1", "knots": [0.0], "weights": [1.0]},
    {"n": 1, "h": 0.1, "knots": ["a"], "weights": [1.0]},
    {"n": True, "h": 0.1, "knots": [0.0], "weights": [1.0]},
])
def test_from_dict_schema_errors(data):
    with pytest.raises(ValueError):
        IntervalQuadrature.from_dict(data)


def test_json_uses_plain_floats():
    text = equidistant(2, 0.25, math.pi).to_json()
    assert json.loads(text) == {"n": 2, "h": 0.25, "knots": [0.0, math.pi], "weights": [math.pi, math.pi]}


# --- class members ------------------------------------------------------------------


def test_piecewise_constant_norms():
    phi = PiecewiseConstant(((0.0, 1.0), (2.0, 4.0)), (0.5, -0.25))
    assert phi.l1_norm() == pytest.approx(1.0)
    assert phi.integral() == pytest.approx(0.0)
    assert phi(0.5) == 0.5
    assert phi(3.0) == -0.25
    assert phi(5.0) == 0.0
    assert phi(0.5 + TWO_PI) == 0.5


def test_piecewise_constant_rejects_bad_intervals():
    with pytest.raises(ValueError):
        PiecewiseConstant(((1.0, 1.0),), (1.0,))
    with pytest.raises(ValueError):
        PiecewiseConstant(((0.0, 7.0),), (0.1,))


def test_convolution_function_class_constraints():
    K = make_bernoulli(2)
    with pytest.raises(ValueError):
        ConvolutionFunction(K, PiecewiseConstant(((0.0, 1.0),), (2.0,)))
    with pytest.raises(ValueError):
        ConvolutionFunction(K, PiecewiseConstant(((0.0, 1.0),), (0.5,)))
    ConvolutionFunction(make_rational([1, -1]), PiecewiseConstant(((0.0, 1.0),), (0.5,)))


def test_convolution_of_zero_density_is_constant():
    f = ConvolutionFunction(make_bernoulli(2), PiecewiseConstant((), ()), 3.0)
    assert_allclose(eval_convolution(f, np.linspace(0, 7, 11)), 3.0)


def test_convolution_is_periodic():
    phi = PiecewiseConstant(((0.3, 1.3), (2.0, 3.0)), (0.5, -0.5))
    f = ConvolutionFunction(make_bernoulli(2), phi)
    x = np.linspace(0, TWO_PI, 17)
    assert_allclose(eval_convolution(f, x), eval_convolution(f, x + TWO_PI), atol=1e-13)


def test_convolution_of_spike_matches_direct_quadrature():
    delta = 0.1
    K = make_bernoulli(1)
    phi = PiecewiseConstant(((-delta, delta),), (1 / (2 * delta),))
    x = np.linspace(-3.0, 3.0, 41)
    ref = []
    for xi in x:
        g = lambda t: bernoulli_kernel_closed_form(1, xi - t) / (2 * delta)
        v, _ = integrate.quad(g, -delta, delta, points=[xi] if abs(xi) < delta else None,
                              epsabs=1e-13, limit=200)
        ref.append(v)
    assert_allclose(convolve(K, phi, x), ref, rtol=0, atol=1e-8)


def test_convolution_with_mean_kernel_matches_quadrature():
    K = make_rational([1, -1])
    phi = PiecewiseConstant(((1.0, 2.0),), (0.7,))
    f = ConvolutionFunction(K, phi, 2.0)
    x = 4.0
    ref, _ = integrate.quad(lambda t: 0.7 * eval_kernel(K, x - t), 1.0, 2.0, epsabs=1e-13)
    # mu = 0, so the constant term drops out
    assert eval_convolution(f, x) == pytest.approx(ref, abs=1e-10)


def test_apply_breakpoints_resolve_narrow_features():
    # a 2e-3 wide bump inside a window is easy for quad to step over
    q = equidistant(2, 0.7, math.pi)
    lo, hi = math.pi + 0.3, math.pi + 0.302
    f = lambda t: 500.0 if lo < (t % TWO_PI) < hi else 0.0
    exact = math.pi * 500.0 * 0.002 / 1.4
    assert apply(q, f, 1e-12, points=[lo, hi]) == pytest.approx(exact, abs=1e-10)
    # breakpoints given in another period are folded into the window
    assert apply(q, f, 1e-12, points=[lo - TWO_PI, hi + TWO_PI]) == pytest.approx(exact, abs=1e-10)
