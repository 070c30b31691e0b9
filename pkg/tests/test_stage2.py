"""Stage-2 closed forms, the fixed-point oracle, and feasibility checks."""

import math
from dataclasses import replace

import pytest

from netcournot.exceptions import NoConvergenceError, TaxDegenerateError
from netcournot.comparative_statics import InteriorSampler
from netcournot.model import ModelParams, PolicyVector, RDMode
from netcournot.stage2 import (
    check_feasibility,
    foc_residuals,
    gamma_coefficients,
    solve_stage2,
    solve_stage2_fixed_point,
    solve_stage2_general,
    solve_stage2_process,
    solve_stage2_product,
)

BASELINE = ModelParams(m=0.0)
ZERO_PROC = PolicyVector(mode=RDMode.PROCESS_ONLY)
ZERO_PROD = PolicyVector(mode=RDMode.PRODUCT_ONLY)
ZERO_BOTH = PolicyVector(mode=RDMode.BOTH)


def state_tuple(eq):
    return (eq.state.q1, eq.state.q2, eq.state.k1, eq.state.k2, eq.state.r1, eq.state.r2)


def max_state_gap(eq_a, eq_b):
    return max(abs(x - y) for x, y in zip(state_tuple(eq_a), state_tuple(eq_b)))


def test_gamma_coefficients_baseline():
    g = gamma_coefficients(BASELINE, ZERO_BOTH)
    assert g.gamma1 == pytest.approx(1.2, abs=1e-14)
    assert g.gamma2 == pytest.approx(1.2, abs=1e-14)


def test_gamma_coefficients_network():
    params = ModelParams(b2=0.5, m=0.0)
    g = gamma_coefficients(params, ZERO_BOTH)
    assert g.gamma2 == pytest.approx(0.2, abs=1e-14)


def test_gamma_blows_up_at_tax_pole():
    g = gamma_coefficients(BASELINE, PolicyVector(t=1 - 1e-6, mode=RDMode.BOTH))
    assert g.gamma1 < -1e4
    with pytest.raises(TaxDegenerateError):
        gamma_coefficients(BASELINE, PolicyVector(t=1 - 1e-13, mode=RDMode.BOTH))


def test_general_solver_baseline():
    eq = solve_stage2_general(BASELINE, ZERO_BOTH)
    assert eq.state.q1 == pytest.approx(0.25, abs=1e-14)
    assert eq.state.q2 == pytest.approx(0.25, abs=1e-14)
    assert eq.state.k1 == pytest.approx(0.1, abs=1e-14)
    assert eq.state.r1 == pytest.approx(0.1, abs=1e-14)
    assert eq.feasibility.interior


def test_process_solver_baseline():
    eq = solve_stage2_process(BASELINE, ZERO_PROC)
    assert eq.state.q1 == pytest.approx(0.1875, abs=1e-14)
    assert eq.state.k1 == pytest.approx(0.075, abs=1e-14)
    assert eq.welfare.p1 == pytest.approx(0.8125, abs=1e-14)
    assert eq.state.r1 == 0.0 and eq.state.r2 == 0.0
    # FOC residual of the output condition: a - 2q - (c - k) = 0.
    assert max(abs(r) for r in foc_residuals(BASELINE, ZERO_PROC, eq.state)) < 1e-14


def test_process_substitutes_reduce_output():
    eq = solve_stage2_process(ModelParams(m=0.25), ZERO_PROC)
    assert eq.state.q1 == eq.state.q2  # symmetric parameters, exact symmetry
    assert eq.state.q1 < 0.1875


def test_process_network_raises_output():
    low = solve_stage2_process(ModelParams(m=0.05), ZERO_PROC)
    high = solve_stage2_process(ModelParams(m=0.05, b1=0.3, b2=0.3), ZERO_PROC)
    assert high.state.q1 > low.state.q1
    assert high.state.q2 > low.state.q2


def test_product_solver_baseline_mirrors_process():
    eq = solve_stage2_product(BASELINE, ZERO_PROD)
    assert eq.state.q1 == pytest.approx(0.1875, abs=1e-14)
    assert eq.state.r1 == pytest.approx(0.075, abs=1e-14)
    assert eq.state.k1 == 0.0 and eq.state.k2 == 0.0


def test_product_tax_enters_quality_choice_directly():
    eq = solve_stage2_product(BASELINE, PolicyVector(t=0.2, mode=RDMode.PRODUCT_ONLY))
    assert eq.state.r1 / eq.state.q1 == pytest.approx(0.32, abs=1e-14)
    assert 0.32 < 0.4  # strictly below the untaxed ratio


def test_product_subsidy_scales_quality_ratio():
    eq = solve_stage2_product(
        ModelParams(m=0.0, b2=0.0), PolicyVector(sigma2=0.5, mode=RDMode.PRODUCT_ONLY)
    )
    assert eq.state.r2 / eq.state.q2 == pytest.approx(0.8, abs=1e-14)


def test_fixed_point_matches_closed_forms_on_named_points():
    eq = solve_stage2_process(BASELINE, ZERO_PROC)
    fp = solve_stage2_fixed_point(BASELINE, ZERO_PROC)
    assert max_state_gap(eq, fp) < 1e-10
    params = ModelParams(m=0.25, b1=0.3, b2=0.3)
    assert max_state_gap(
        solve_stage2_process(params, ZERO_PROC), solve_stage2_fixed_point(params, ZERO_PROC)
    ) < 1e-10


@pytest.mark.parametrize("mode", list(RDMode))
def test_fixed_point_oracle_equivalence_sampled(mode):
    sampler = InteriorSampler(seed=11, mode=mode, t_range=(-0.2, 0.3))
    for _ in range(25):
        params, policy, eq = sampler.draw()
        fp = solve_stage2_fixed_point(params, policy)
        assert max_state_gap(eq, fp) < 1e-10


def test_fixed_point_diverges_outside_stability_region():
    # Small phi shrinks the SOC brackets until the stability determinant
    # turns negative; asymmetry keeps the iterate off the knife-edge stable
    # eigendirection, so the instability is actually excited.
    params = ModelParams(m=0.5, phi1=0.55, phi2=0.62, c1=0.65, c2=0.7)
    assert solve_stage2_process(params, ZERO_PROC).feasibility.delta < 0
    with pytest.raises(NoConvergenceError):
        solve_stage2_fixed_point(params, ZERO_PROC)


@pytest.mark.parametrize("mode", list(RDMode))
def test_symmetry_is_exact(mode):
    params = ModelParams(m=0.17, b1=0.23, b2=0.23)
    eq = solve_stage2(params, PolicyVector.zero(mode))
    assert eq.state.q1 == eq.state.q2
    assert eq.state.k1 == eq.state.k2
    assert eq.state.r1 == eq.state.r2


def test_specialisation_limits():
    params = ModelParams(m=0.25, b1=0.3, b2=0.3)
    pol = PolicyVector(t=0.1, s1=0.05, s2=0.2, mode=RDMode.BOTH)
    dead_product = replace(params, theta1=1e12, theta2=1e12)
    gen = solve_stage2_general(dead_product, pol)
    pro = solve_stage2_process(params, PolicyVector(t=0.1, s1=0.05, s2=0.2, mode=RDMode.PROCESS_ONLY))
    assert max_state_gap(gen, pro) < 1e-6

    pol_prod = PolicyVector(t=0.1, sigma1=0.05, sigma2=0.2, mode=RDMode.BOTH)
    dead_process = replace(params, phi1=1e12, phi2=1e12)
    gen2 = solve_stage2_general(dead_process, pol_prod)
    prd = solve_stage2_product(
        params, PolicyVector(t=0.1, sigma1=0.05, sigma2=0.2, mode=RDMode.PRODUCT_ONLY)
    )
    assert max_state_gap(gen2, prd) < 1e-6


def test_tax_monotonicity():
    sampler = InteriorSampler(seed=5, mode=RDMode.PROCESS_ONLY, t_range=(0.0, 0.15))
    for _ in range(20):
        params, policy, eq = sampler.draw()
        bumped = solve_stage2(params, replace(policy, t=policy.t + 1e-4))
        assert bumped.state.q1 < eq.state.q1


def test_interior_solutions_satisfy_focs():
    for mode in RDMode:
        sampler = InteriorSampler(seed=3, mode=mode)
        for _ in range(15):
            params, policy, eq = sampler.draw()
            assert max(abs(r) for r in foc_residuals(params, policy, eq.state)) < 1e-10


def test_feasibility_interior_at_moderate_network():
    params = ModelParams(m=0.05, b1=0.2, b2=0.2)
    eq = solve_stage2_process(params, ZERO_PROC)
    report = check_feasibility(params, ZERO_PROC, eq)
    assert report.interior
    assert report.delta > 0
    assert report.binding() is None


def test_feasibility_soc_fails_at_extreme_subsidy():
    params = ModelParams(m=0.05)
    pol = PolicyVector(s1=0.999, mode=RDMode.PROCESS_ONLY)
    eq = solve_stage2_process(params, pol)
    assert not eq.feasibility.soc1_ok
    assert not eq.feasibility.interior
    assert eq.feasibility.binding() == "soc1"


def test_feasibility_cost_bound_flags_large_cost_reduction():
    # Tiny marginal cost: the equilibrium cost reduction overshoots it.
    params = ModelParams(c1=0.01, c2=0.01, m=0.0)
    eq = solve_stage2_process(params, ZERO_PROC)
    assert eq.state.k1 > params.c1
    assert not eq.feasibility.cost_nonneg
    assert not eq.feasibility.interior


def test_non_interior_is_flagged_not_raised():
    params = ModelParams(m=0.05)
    eq = solve_stage2_process(params, PolicyVector(s1=0.999, mode=RDMode.PROCESS_ONLY))
    assert isinstance(eq.state.q1, float)  # equilibrium still returned


def test_mode_dispatch():
    assert solve_stage2(BASELINE, ZERO_PROC).state.r1 == 0.0
    assert solve_stage2(BASELINE, ZERO_PROD).state.k1 == 0.0
    assert solve_stage2(BASELINE, ZERO_BOTH).state.k1 > 0.0
