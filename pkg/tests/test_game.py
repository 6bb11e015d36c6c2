"""Thermodynamic game: payoff, decision rule, min-max pressures, gap equations."""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from kaclab.errors import ConfigError
from kaclab.game import (
    GamePoint,
    OptimizerSpec,
    decision_rule,
    gap_residual,
    payoff,
    payoff_gradient_fd,
    quasiconvexity_report,
    solve_game,
    solve_gap_fixed_point,
)
from kaclab.lattice import HoppingKernel, MeanFieldParams, discrete_laplacian
from kaclab.quasifree import QuadratureSpec, quasifree_pressure

QUAD = QuadratureSpec()
OPT = OptimizerSpec()


def zero_kernel():
    return HoppingKernel({(0,): 0.0}, 1)


def flat_attractive(beta=1.0, eta=1.0):
    return MeanFieldParams(beta=beta, hopping=zero_kernel(), eta_minus=eta)


# -- payoff -----------------------------------------------------------------------


def test_payoff_at_origin_is_minus_free_pressure():
    mf = MeanFieldParams(beta=2.0, hopping=discrete_laplacian(1), eta_plus=1.0)
    p_free = quasifree_pressure(mf, 0.0, 0.0, QUAD)
    assert payoff(mf, GamePoint(0.0, 0.0), QUAD) == pytest.approx(-p_free, rel=1e-14)


def test_payoff_minimized_at_origin_without_attraction():
    mf = MeanFieldParams(beta=2.0, hopping=discrete_laplacian(1), eta_plus=1.0)
    vals = [payoff(mf, GamePoint(cm, 0.3), QUAD) for cm in np.linspace(0, 1, 11)]
    assert np.argmin(vals) == 0


def test_payoff_strong_coupling_closed_form():
    # flat band, eta_- = 1, c_+ = 0: the integrand is k-independent, so the
    # payoff has the one-site closed form c^2 - (E + (2/b) log1p(e^{-bE}))
    beta = 1.0
    mf = flat_attractive(beta=beta)
    for cm in np.linspace(0.0, 1.0, 7):
        e = cm  # sqrt(eta_minus) * c_minus
        expected = cm**2 - (e + 2.0 / beta * math.log1p(math.exp(-beta * e)))
        assert payoff(mf, GamePoint(cm, 0.0), QUAD) == pytest.approx(expected, abs=1e-13)


# -- decision rule ------------------------------------------------------------------


def test_decision_rule_trivial_without_repulsion():
    res = decision_rule(flat_attractive(), 0.3, QUAD, OPT)
    assert res.c_plus == 0.0
    assert not res.at_boundary


def test_decision_rule_stationarity_by_finite_differences():
    mf = MeanFieldParams(beta=2.0, hopping=zero_kernel(), eta_plus=1.3)
    for cm in (0.0, 0.5):
        r = decision_rule(mf, cm, QUAD, OPT)
        step = 1e-5
        dp = (
            quasifree_pressure(mf, cm, r.c_plus + step, QUAD)
            - quasifree_pressure(mf, cm, r.c_plus - step, QUAD)
        ) / (2 * step)
        # stationarity of the payoff: 2 c_+ = -dP~/d(Re c_+)
        assert abs(2.0 * r.c_plus + dp) <= 1e-8


def test_decision_rule_is_continuous_on_a_grid():
    mf = MeanFieldParams(beta=2.0, hopping=discrete_laplacian(1),
                         eta_plus=1.0, eta_minus=1.0)
    grid = np.linspace(0.0, 0.5, 26)
    vals = [decision_rule(mf, cm, QUAD, OPT).c_plus for cm in grid]
    steps = np.abs(np.diff(vals))
    assert steps.max() <= 5e-2  # r_+ moves smoothly with c_-


def test_decision_rule_returns_the_unique_maximizer():
    mf = MeanFieldParams(beta=4.0, hopping=discrete_laplacian(1),
                         eta_plus=1.5, eta_minus=0.5)
    cm = 0.2
    r = decision_rule(mf, cm, QUAD, OPT)
    for delta in (1e-3, 1e-2):
        for sign in (+1, -1):
            probe = r.c_plus + sign * delta
            if 0.0 <= probe <= 2.0:
                assert r.payoff_value >= payoff(mf, GamePoint(cm, probe), QUAD)


# -- solve_game -----------------------------------------------------------------------


def test_game_trivial_model():
    mf = MeanFieldParams(beta=2.0, hopping=discrete_laplacian(1))
    res = solve_game(mf, QUAD, OPT)
    p_free = quasifree_pressure(mf, 0.0, 0.0, QUAD)
    assert res.p_sharp == pytest.approx(p_free, abs=1e-12)
    assert res.p_flat == pytest.approx(p_free, abs=1e-12)
    assert res.argmin_sharp == GamePoint(0.0, 0.0)
    assert res.argmax_flat == GamePoint(0.0, 0.0)


def test_game_purely_repulsive_equality():
    mf = MeanFieldParams(beta=2.0, hopping=discrete_laplacian(1), eta_plus=1.5)
    res = solve_game(mf, QUAD, OPT)
    assert abs(res.saddle_gap) <= 1e-10
    assert res.argmin_sharp.c_minus == 0.0
    assert res.gap_residual_sharp <= 1e-7


def test_game_strong_coupling_symmetry_breaking():
    beta = 20.0
    mf = flat_attractive(beta=beta)
    res = solve_game(mf, QUAD, OPT)
    # stationarity 2c = tanh(beta c / 2) has a positive root
    c_star = brentq(lambda c: 2 * c - math.tanh(beta * c / 2.0), 0.05, 1.0)
    assert res.argmin_sharp.c_minus == pytest.approx(c_star, abs=1e-6)
    assert res.argmin_sharp.c_minus > 0.0
    # broken minimum beats the normal state
    p_broken = payoff(mf, res.argmin_sharp, QUAD)
    p_normal = payoff(mf, GamePoint(0.0, 0.0), QUAD)
    assert p_broken < p_normal
    # stationarity residual through finite differences
    grad = payoff_gradient_fd(mf, res.argmin_sharp, QUAD)
    assert abs(grad[0]) <= 1e-8


def test_game_inequality_and_axis_equality_small_grid():
    lap = discrete_laplacian(1)
    for beta in (0.5, 2.0):
        for em, ep in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 0.5)]:
            mf = MeanFieldParams(beta=beta, hopping=lap, eta_plus=ep, eta_minus=em)
            res = solve_game(mf, QUAD, OPT)
            assert res.saddle_gap >= -1e-8
            if em == 0.0 or ep == 0.0:
                assert abs(res.saddle_gap) <= 1e-8
            assert res.gap_residual_sharp <= 1e-7
            assert res.gap_residual_flat <= 1e-7


def test_game_values_shift_identically_under_dispersion_shift():
    lap = discrete_laplacian(1)
    shifted = HoppingKernel({(0,): 2.0 + 0.7, (1,): -1.0, (-1,): -1.0}, 1)
    kw = dict(beta=2.0, eta_plus=1.0, eta_minus=1.0)
    base = solve_game(MeanFieldParams(hopping=lap, **kw), QUAD, OPT)
    moved = solve_game(MeanFieldParams(hopping=shifted, **kw), QUAD, OPT)
    d_sharp = moved.p_sharp - base.p_sharp
    d_flat = moved.p_flat - base.p_flat
    assert d_sharp == pytest.approx(d_flat, abs=1e-8)
    # the shifted model's optimizers are stationary in the shifted model
    assert moved.gap_residual_sharp <= 1e-7
    assert moved.gap_residual_flat <= 1e-7


# -- gap equations --------------------------------------------------------------------


def test_gap_residual_trivial():
    mf = MeanFieldParams(beta=1.0, hopping=discrete_laplacian(1))
    assert gap_residual(mf, GamePoint(0.0, 0.0), QUAD) == 0.0


def test_gap_residual_zero_at_game_optimizer_positive_elsewhere():
    mf = MeanFieldParams(beta=8.0, hopping=discrete_laplacian(1),
                         eta_plus=1.0, eta_minus=2.0)
    res = solve_game(mf, QUAD, OPT)
    assert gap_residual(mf, res.argmin_sharp, QUAD) <= 1e-8
    assert gap_residual(mf, GamePoint(0.9, 1.7), QUAD) > 1e-3


def test_gap_residual_equals_half_gradient_norm():
    mf = MeanFieldParams(beta=3.0, hopping=discrete_laplacian(1),
                         eta_plus=0.8, eta_minus=1.4)
    for g in (GamePoint(0.2, 0.4), GamePoint(0.55, 0.1)):
        res = gap_residual(mf, g, QUAD)
        grad = payoff_gradient_fd(mf, g, QUAD, step=1e-6)
        assert res == pytest.approx(0.5 * math.hypot(*grad), rel=1e-4)


def test_fixed_point_from_optimizer_converges_immediately():
    mf = MeanFieldParams(beta=8.0, hopping=discrete_laplacian(1),
                         eta_plus=1.0, eta_minus=2.0)
    res = solve_game(mf, QUAD, OPT)
    # the game optimizer carries residual <= 1e-7 (its own guarantee), so a
    # fixed-point solve at that tolerance accepts it without iterating
    loose = OptimizerSpec(tol_gap=1e-7)
    sol = solve_gap_fixed_point(mf, res.argmin_sharp, QUAD, damping=1.0, opt=loose)
    assert sol.converged
    assert sol.iterations <= 2
    # and the default tight tolerance still converges quickly nearby
    tight = solve_gap_fixed_point(mf, res.argmin_sharp, QUAD, damping=1.0)
    assert tight.converged
    assert abs(tight.c_minus - res.argmin_sharp.c_minus) <= 1e-7


def test_fixed_point_trivial_model():
    mf = MeanFieldParams(beta=1.0, hopping=discrete_laplacian(1))
    sol = solve_gap_fixed_point(mf, GamePoint(0.5, 1.0), QUAD, damping=1.0)
    assert sol.converged
    assert sol.c_minus == pytest.approx(0.0, abs=1e-12)
    assert sol.c_plus == pytest.approx(0.0, abs=1e-12)


def test_fixed_point_high_temperature_normal_phase():
    beta = 0.5
    mf = flat_attractive(beta=beta)
    sol = solve_gap_fixed_point(mf, GamePoint(0.4, 0.0), QUAD, damping=1.0)
    assert sol.converged
    assert sol.c_minus == pytest.approx(0.0, abs=1e-6)
    # normal phase really is the payoff minimum on a grid
    p0 = payoff(mf, GamePoint(0.0, 0.0), QUAD)
    for cm in np.linspace(0.05, 1.0, 12):
        assert p0 <= payoff(mf, GamePoint(cm, 0.0), QUAD) + 1e-12


def test_fixed_point_outputs_are_stationary():
    mf = MeanFieldParams(beta=8.0, hopping=discrete_laplacian(1),
                         eta_plus=1.0, eta_minus=2.0)
    sol = solve_gap_fixed_point(mf, GamePoint(0.3, 0.5), QUAD, damping=0.5)
    assert sol.converged
    grad = payoff_gradient_fd(mf, GamePoint(sol.c_minus, sol.c_plus), QUAD)
    assert math.hypot(*grad) <= 1e-6


def test_quasiconvexity_diagnostic_runs():
    mf = MeanFieldParams(beta=2.0, hopping=discrete_laplacian(1),
                         eta_plus=0.5, eta_minus=1.0)
    rep = quasiconvexity_report(mf, 0.2, QUAD)
    assert rep.n_samples == 101
    assert rep.max_violation >= 0.0


def test_game_point_validation():
    with pytest.raises(ConfigError):
        GamePoint(-0.1, 0.0)
    with pytest.raises(ConfigError):
        solve_gap_fixed_point(flat_attractive(), GamePoint(0.1, 0.0), QUAD, damping=0.0)
