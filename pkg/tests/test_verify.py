import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from intervalquad.error_profile import profile, residual, worst_case_error
from intervalquad.kernels import make_bernoulli, make_rational
from intervalquad.optimal import optimal_error
from intervalquad.quadrature import ConvolutionFunction, IntervalQuadrature, eval_convolution, validate
from intervalquad.verify import (
    FeasibleParametrization,
    _fold,
    anchored,
    count_sign_changes,
    extremal_check,
    local_search,
    near_extremal,
    nu_table,
    perturbation_test,
    random_feasible,
    random_sign_pattern,
    saturation,
    sign_pattern,
)

TWO_PI = 2 * math.pi
B1, B2, B3 = make_bernoulli(1), make_bernoulli(2), make_bernoulli(3)
POLY = make_rational([1, -1])


# --- parametrisation ------------------------------------------------------------------


@given(st.floats(-1e6, 1e6))
def test_fold_lands_in_unit_interval(z):
    v = _fold(np.array([z]))[0]
    assert 0.0 <= v <= 1.0


def test_fold_is_identity_on_unit_interval():
    z = np.linspace(0, 1, 11)
    assert_allclose(_fold(z), z, atol=1e-15)


def test_decode_fuzz_is_always_feasible():
    rng = np.random.default_rng(0)
    for i in range(10_000):
        n = int(rng.integers(1, 7))
        h = rng.uniform(0.0, 0.999) * math.pi / n
        mu = int(rng.integers(2))
        par = FeasibleParametrization(n, h, mu)
        z = rng.normal(0.0, 10.0 ** rng.uniform(-2, 3), par.dim)
        q = par.decode(z, offset=rng.uniform(-10, 10))
        assert validate(q), (i, validate(q).violation)
        if mu == 1:
            assert abs(q.weight_sum() - TWO_PI) <= 1e-12 * max(1.0, np.abs(q.weight_array).max())


def test_decode_handles_all_zero_slacks():
    par = FeasibleParametrization(3, 0.5, 1)
    q = par.decode(np.zeros(par.dim))
    assert validate(q)
    assert_allclose(q.gaps(), TWO_PI / 3, atol=1e-12)


def test_equidistant_point_decodes_to_equidistant_formula():
    par = FeasibleParametrization(4, 0.3, 0)
    q = par.decode(par.equidistant_point(1.7))
    assert_allclose(q.gaps(), TWO_PI / 4, atol=1e-14)
    assert q.weights == (1.7,) * 4


def test_parametrisation_dimensions():
    assert FeasibleParametrization(3, 0.1, 1).dim == 5
    assert FeasibleParametrization(3, 0.1, 0).dim == 6
    with pytest.raises(ValueError):
        FeasibleParametrization(2, 2.0, 1)


@pytest.mark.parametrize("seed", range(10))
def test_random_feasible_contract(seed):
    q = random_feasible(3, 0.4, 1, seed)
    assert validate(q)
    assert q.weight_sum() == pytest.approx(TWO_PI, abs=1e-12)
    assert random_feasible(3, 0.4, 1, seed) == q
    assert random_feasible(3, 0.4, 1, seed + 1) != q


def test_random_weights_stay_in_range():
    bound = 4 * math.pi / 5
    for seed in range(50):
        q = random_feasible(5, 0.1, 0, seed)
        assert np.all(np.abs(q.weight_array) <= bound)


def test_anchored_moves_first_knot_to_zero():
    q = anchored(random_feasible(3, 0.2, 0, 1))
    assert q.knots[0] == 0.0


# --- perturbation and search ---------------------------------------------------------


def test_perturbation_bernoulli_two():
    rep = perturbation_test(B2, 3, 0.2, 200, seed=7)
    assert rep.min_ratio >= 1 - 1e-9
    assert rep.failures == []
    assert rep.trials == 200


def test_perturbation_mean_kernel():
    rep = perturbation_test(POLY, 2, 0.3, 200)
    assert rep.min_ratio >= 1 - 1e-9


def test_perturbation_with_injected_optimum():
    opt = optimal_error(B3, 4, 0.25)
    rep = perturbation_test(B3, 4, 0.25, 1, quadratures=[opt.quadrature.shifted(0.9)])
    assert rep.min_ratio == pytest.approx(1.0, abs=1e-12)


def test_perturbation_is_seeded():
    a = perturbation_test(B2, 2, 0.3, 5, seed=3)
    b = perturbation_test(B2, 2, 0.3, 5, seed=3)
    assert a.ratios == b.ratios
    assert a.to_dict()["mode"] == "perturb"


def test_perturbation_rejects_zero_trials():
    with pytest.raises(ValueError):
        perturbation_test(B2, 2, 0.3, 0)


def test_search_from_the_optimum_stays_there():
    rep = local_search(B2, 3, 0.3, starts=1, maxiter=200)
    assert abs(rep.start_values[0] - rep.optimal_value) <= 1e-9
    assert abs(rep.gap) <= 1e-9


def test_search_sawtooth_recovers_equidistant_knots():
    rep = local_search(B1, 2, 0.4, starts=20, seed=7)
    assert rep.gap >= -1e-6
    assert rep.best_q.knots[0] == 0.0
    assert_allclose(np.sort(rep.best_q.gaps()), [math.pi, math.pi], atol=1e-3)
    d = rep.to_dict()
    assert d["mode"] == "search" and d["failures"] == []


def test_search_bernoulli_three_five_windows():
    rep = local_search(B3, 5, 0.1, starts=20)
    assert rep.gap >= -1e-6


def test_random_starts_never_beat_the_optimum():
    rep = local_search(POLY, 2, 0.4, starts=3, seed=11, maxiter=300, include_equidistant=False)
    assert min(rep.start_values) >= rep.optimal_value - 1e-6


# --- near-extremal functions -----------------------------------------------------------


@pytest.mark.parametrize("K, n, h", [(B2, 3, 0.3), (B3, 2, 0.5), (POLY, 2, 0.3), (B1, 2, 0.4)])
def test_near_extremal_saturates(K, n, h):
    q = optimal_error(K, n, h).quadrature
    value = worst_case_error(K, q)
    assert abs(residual(K, q, near_extremal(K, q, 1e-3)) - value) <= 1e-2 * value
    assert abs(residual(K, q, near_extremal(K, q, 1e-4)) - value) <= 1e-3 * value


def test_near_extremal_density_is_admissible():
    q = random_feasible(3, 0.2, 1, 4)
    f = near_extremal(B2, q, 1e-3)
    assert abs(f.phi.integral()) <= 1e-14
    assert f.phi.l1_norm() == pytest.approx(1.0, abs=1e-14)
    g = near_extremal(POLY, random_feasible(3, 0.2, 0, 4), 1e-3)
    assert g.phi.l1_norm() == pytest.approx(1.0, abs=1e-14)


def test_near_extremal_on_random_formula():
    q = random_feasible(4, 0.3, 1, 9)
    assert saturation(B2, q, 1e-4) >= 0.99


def test_near_extremal_rejects_bad_delta():
    q = random_feasible(2, 0.2, 1, 0)
    for delta in (0.0, 0.1, -1e-3):
        with pytest.raises(ValueError):
            near_extremal(B2, q, delta)


def test_near_extremal_rejects_overlap():
    # two nearly touching windows: M peaks and bottoms out on either side of the short gap
    q = IntervalQuadrature((0.0, 0.1), (math.pi, math.pi), 0.01)
    prof = profile(B1, q)
    assert abs(math.remainder(prof.max_point - prof.min_point, TWO_PI)) < 0.18
    with pytest.raises(ValueError, match="overlap"):
        near_extremal(B1, q, 0.09)


def test_extremal_report():
    rep = extremal_check(B2, 3, 0.2)
    assert rep.saturation >= 0.99
    assert rep.to_dict()["mode"] == "extremal"


# --- sign changes -------------------------------------------------------------------


def test_count_sign_changes_basic():
    assert count_sign_changes(lambda t: np.sin(3 * t), 4096) == 6
    assert count_sign_changes(lambda t: np.ones_like(t), 4096) == 0
    assert count_sign_changes(lambda t: np.zeros_like(t), 4096) == 0


def test_count_sign_changes_ignores_tiny_values():
    f = lambda t: np.where(np.abs(np.sin(t)) < 0.5, 1e-13 * np.cos(7 * t), np.sin(t))
    assert count_sign_changes(f, 4096) == 2


def test_count_sign_changes_rejects_coarse_grid():
    with pytest.raises(ValueError):
        count_sign_changes(np.sin, 128)


def test_square_wave_is_not_roughened():
    phi = sign_pattern(np.arange(4) * math.pi / 2)
    f = ConvolutionFunction(B2, phi)
    assert count_sign_changes(phi, 8192) == 4
    assert count_sign_changes(lambda x: eval_convolution(f, x), 8192) <= 4


@pytest.mark.parametrize("K", [B2, POLY, B3])
def test_sign_change_count_is_grid_stable(K):
    for changes in (2, 4, 6):
        phi = random_sign_pattern(changes, np.random.default_rng(changes))
        f = ConvolutionFunction(K, phi)
        g = lambda x: eval_convolution(f, x)
        coarse = count_sign_changes(g, 4096)
        assert count_sign_changes(g, 8192) >= coarse
        assert count_sign_changes(phi, 8192) >= count_sign_changes(phi, 4096)


def test_sign_pattern_levels():
    phi = sign_pattern([0.5, 1.0, 3.0, 5.0], positive_first=False)
    assert phi.integral() == pytest.approx(0.0, abs=1e-15)
    assert phi.l1_norm() == pytest.approx(1.0, abs=1e-15)
    assert phi(0.7) < 0 < phi(2.0)
    with pytest.raises(ValueError):
        sign_pattern([1.0, 2.0, 3.0])


@pytest.mark.parametrize("changes", [2, 4, 6])
def test_random_sign_pattern_has_requested_changes(changes):
    rng = np.random.default_rng(changes)
    for _ in range(5):
        assert count_sign_changes(random_sign_pattern(changes, rng), 8192) == changes


@pytest.mark.parametrize("K", [B2, POLY])
def test_nu_table_rows(K):
    rows = nu_table(K)
    assert [r.nu_phi for r in rows] == [2, 4, 6, 8]
    assert all(r.ok for r in rows)
