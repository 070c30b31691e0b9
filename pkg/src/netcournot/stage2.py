"""Stage-2 Cournot equilibrium with R&D, for a fixed policy vector.

Three closed forms (general, process-only, product-only) plus an independent
damped fixed-point iteration of the raw reaction equations, used as an
oracle.  Substituting each firm's R&D conditions into its output reaction
collapses the system to two linear best responses

    gamma1 * q1 = (a - c1/(1-t)) - m * q2
    gamma2 * q2 = (a - c2)       - m * q1

where gamma_i is the firm's effective best-response slope net of the active
R&D feedbacks.  Infeasible parameter/policy combinations are returned with a
flagged FeasibilityReport rather than raised, so optimisers can probe them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import NoConvergenceError, TaxDegenerateError
from .model import (
    MarketState,
    ModelParams,
    PolicyVector,
    RDMode,
    WelfareBreakdown,
    welfare,
)

TAX_POLE_TOL = 1e-12

# Fixed-point oracle settings: the reaction map is affine, so any damping in
# (0, 1] converges inside the stability region; 0.5 adds robustness near the
# boundary.
FP_START = 0.01
FP_DAMPING = 0.5
FP_TOL = 1e-12
FP_MAX_ITER = 10_000
FP_DIVERGENCE_CAP = 1e8


@dataclass(frozen=True)
class GammaPair:
    """Effective best-response slopes of the two firms (both channels active)."""

    gamma1: float
    gamma2: float


@dataclass(frozen=True)
class FeasibilityReport:
    """Interior-equilibrium certificate for one solved policy point.

    delta is the mode-appropriate stability determinant; the SOC flags are
    each firm's second-order condition.  interior is the conjunction of all
    checks, including delta > 0.
    """

    delta: float
    soc1_ok: bool
    soc2_ok: bool
    positive_quantities: bool
    positive_prices: bool
    positive_rnd: bool
    cost_nonneg: bool
    interior: bool

    def binding(self) -> str | None:
        """Name of the first violated condition, or None when interior."""
        if self.interior:
            return None
        for label, ok in (
            ("soc1", self.soc1_ok),
            ("soc2", self.soc2_ok),
            ("delta", self.delta > 0),
            ("positive_quantities", self.positive_quantities),
            ("positive_prices", self.positive_prices),
            ("positive_rnd", self.positive_rnd),
            ("cost_nonneg", self.cost_nonneg),
        ):
            if not ok:
                return label
        return "unknown"


@dataclass(frozen=True)
class Stage2Equilibrium:
    """One solved stage-2 point: state, welfare, and feasibility certificate."""

    params: ModelParams
    policy: PolicyVector
    state: MarketState
    welfare: WelfareBreakdown
    feasibility: FeasibilityReport


def _check_tax(t: float) -> float:
    one_t = 1.0 - t
    if abs(one_t) < TAX_POLE_TOL:
        raise TaxDegenerateError(f"tax rate t={t} is numerically at the 1/(1-t) pole")
    return one_t


def gamma_coefficients(params: ModelParams, policy: PolicyVector) -> GammaPair:
    """Best-response slopes with both R&D feedbacks included.

    gamma1 = 2(1-b1) - (1-t)/((1-sigma1) theta1) - 1/((1-t)(1-s1) phi1)
    gamma2 = 2(1-b2) - 1/((1-sigma2) theta2) - 1/((1-s2) phi2)
    """
    one_t = _check_tax(policy.t)
    gamma1 = (
        2.0 * (1.0 - params.b1)
        - one_t / ((1.0 - policy.sigma1) * params.theta1)
        - 1.0 / (one_t * (1.0 - policy.s1) * params.phi1)
    )
    gamma2 = (
        2.0 * (1.0 - params.b2)
        - 1.0 / ((1.0 - policy.sigma2) * params.theta2)
        - 1.0 / ((1.0 - policy.s2) * params.phi2)
    )
    return GammaPair(gamma1=gamma1, gamma2=gamma2)


def _core_solve(
    mode: RDMode,
    a,
    c1,
    c2,
    b1,
    b2,
    m,
    phi1,
    phi2,
    theta1,
    theta2,
    t,
    s1,
    s2,
    sigma1,
    sigma2,
):
    """Closed-form stage-2 solve on raw values (floats or numpy arrays).

    Returns a dict of raw results; callers wrap into dataclasses or consume
    arrays directly.  No validation and no exceptions besides float division
    errors, which callers guard.
    """
    one_t = 1.0 - t
    two1 = 2.0 * (1.0 - b1)
    two2 = 2.0 * (1.0 - b2)

    proc = mode.process_active
    prod = mode.product_active

    gamma1 = two1
    gamma2 = two2
    if prod:
        gamma1 = gamma1 - one_t / ((1.0 - sigma1) * theta1)
        gamma2 = gamma2 - 1.0 / ((1.0 - sigma2) * theta2)
    if proc:
        gamma1 = gamma1 - 1.0 / (one_t * (1.0 - s1) * phi1)
        gamma2 = gamma2 - 1.0 / ((1.0 - s2) * phi2)

    # SOC brackets of the per-channel Hessians; the general mode needs both
    # the process bracket and gamma_i > 0 (negative-definite 3x3 Hessian).
    if mode is RDMode.PROCESS_ONLY:
        br1 = 1.0 - 1.0 / (two1 * one_t * (1.0 - s1) * phi1)
        br2 = 1.0 - 1.0 / (two2 * (1.0 - s2) * phi2)
        soc1 = br1 > 0
        soc2 = br2 > 0
        delta = br1 * br2 - m * m / (two1 * two2)
    elif mode is RDMode.PRODUCT_ONLY:
        br1 = 1.0 - one_t / (two1 * (1.0 - sigma1) * theta1)
        br2 = 1.0 - 1.0 / (two2 * (1.0 - sigma2) * theta2)
        soc1 = br1 > 0
        soc2 = br2 > 0
        delta = br1 * br2 - m * m / (two1 * two2)
    else:
        x1 = 1.0 - 1.0 / (two1 * one_t * (1.0 - s1) * phi1)
        x2 = 1.0 - 1.0 / (two2 * (1.0 - s2) * phi2)
        soc1 = (x1 > 0) & (gamma1 > 0)
        soc2 = (x2 > 0) & (gamma2 > 0)
        delta = 1.0 - m * m / (gamma1 * gamma2)

    margin1 = a - c1 / one_t
    margin2 = a - c2
    det = gamma1 * gamma2 - m * m
    q1 = (gamma2 * margin1 - m * margin2) / det
    q2 = (gamma1 * margin2 - m * margin1) / det

    k1 = q1 / ((1.0 - s1) * phi1) if proc else 0.0 * q1
    k2 = q2 / ((1.0 - s2) * phi2) if proc else 0.0 * q2
    r1 = one_t * q1 / ((1.0 - sigma1) * theta1) if prod else 0.0 * q1
    r2 = q2 / ((1.0 - sigma2) * theta2) if prod else 0.0 * q2

    p1 = a + r1 - (1.0 - b1) * q1 - m * q2
    p2 = a + r2 - (1.0 - b2) * q2 - m * q1

    pos_q = (q1 > 0) & (q2 > 0)
    pos_p = (p1 > 0) & (p2 > 0)
    pos_rnd = (k1 >= 0) & (k2 >= 0) & (r1 >= 0) & (r2 >= 0)
    cost_ok = ((c1 - k1) > 0) & ((c2 - k2) > 0) if proc else True
    interior = soc1 & soc2 & (delta > 0) & pos_q & pos_p & pos_rnd & cost_ok

    return {
        "q1": q1,
        "q2": q2,
        "k1": k1,
        "k2": k2,
        "r1": r1,
        "r2": r2,
        "p1": p1,
        "p2": p2,
        "delta": delta,
        "soc1": soc1,
        "soc2": soc2,
        "pos_q": pos_q,
        "pos_p": pos_p,
        "pos_rnd": pos_rnd,
        "cost_ok": cost_ok,
        "interior": interior,
    }


def _report_from_raw(raw) -> FeasibilityReport:
    return FeasibilityReport(
        delta=float(raw["delta"]),
        soc1_ok=bool(raw["soc1"]),
        soc2_ok=bool(raw["soc2"]),
        positive_quantities=bool(raw["pos_q"]),
        positive_prices=bool(raw["pos_p"]),
        positive_rnd=bool(raw["pos_rnd"]),
        cost_nonneg=bool(raw["cost_ok"]),
        interior=bool(raw["interior"]),
    )


def _equilibrium_from_state(
    params: ModelParams, policy: PolicyVector, state: MarketState, mode: RDMode
) -> Stage2Equilibrium:
    raw = _state_feasibility_raw(params, policy, state, mode)
    return Stage2Equilibrium(
        params=params,
        policy=policy,
        state=state,
        welfare=welfare(params, policy, state),
        feasibility=_report_from_raw(raw),
    )


def _state_feasibility_raw(
    params: ModelParams, policy: PolicyVector, state: MarketState, mode: RDMode
):
    """Feasibility flags evaluated at an explicit state (oracle output path)."""
    one_t = 1.0 - policy.t
    two1 = 2.0 * (1.0 - params.b1)
    two2 = 2.0 * (1.0 - params.b2)
    m = params.m
    if mode is RDMode.PROCESS_ONLY:
        br1 = 1.0 - 1.0 / (two1 * one_t * (1.0 - policy.s1) * params.phi1)
        br2 = 1.0 - 1.0 / (two2 * (1.0 - policy.s2) * params.phi2)
        soc1, soc2 = br1 > 0, br2 > 0
        delta = br1 * br2 - m * m / (two1 * two2)
    elif mode is RDMode.PRODUCT_ONLY:
        br1 = 1.0 - one_t / (two1 * (1.0 - policy.sigma1) * params.theta1)
        br2 = 1.0 - 1.0 / (two2 * (1.0 - policy.sigma2) * params.theta2)
        soc1, soc2 = br1 > 0, br2 > 0
        delta = br1 * br2 - m * m / (two1 * two2)
    else:
        g = gamma_coefficients(params, policy)
        x1 = 1.0 - 1.0 / (two1 * one_t * (1.0 - policy.s1) * params.phi1)
        x2 = 1.0 - 1.0 / (two2 * (1.0 - policy.s2) * params.phi2)
        soc1 = (x1 > 0) and (g.gamma1 > 0)
        soc2 = (x2 > 0) and (g.gamma2 > 0)
        delta = 1.0 - m * m / (g.gamma1 * g.gamma2)

    p1 = params.a + state.r1 - (1.0 - params.b1) * state.q1 - m * state.q2
    p2 = params.a + state.r2 - (1.0 - params.b2) * state.q2 - m * state.q1
    pos_q = state.q1 > 0 and state.q2 > 0
    pos_p = p1 > 0 and p2 > 0
    pos_rnd = state.k1 >= 0 and state.k2 >= 0 and state.r1 >= 0 and state.r2 >= 0
    if mode.process_active:
        cost_ok = (params.c1 - state.k1) > 0 and (params.c2 - state.k2) > 0
    else:
        cost_ok = True
    interior = soc1 and soc2 and delta > 0 and pos_q and pos_p and pos_rnd and cost_ok
    return {
        "delta": delta,
        "soc1": soc1,
        "soc2": soc2,
        "pos_q": pos_q,
        "pos_p": pos_p,
        "pos_rnd": pos_rnd,
        "cost_ok": cost_ok,
        "interior": interior,
    }


def _solve_closed(params: ModelParams, policy: PolicyVector, mode: RDMode) -> Stage2Equilibrium:
    _check_tax(policy.t)
    raw = _core_solve(
        mode,
        params.a,
        params.c1,
        params.c2,
        params.b1,
        params.b2,
        params.m,
        params.phi1,
        params.phi2,
        params.theta1,
        params.theta2,
        policy.t,
        policy.s1,
        policy.s2,
        policy.sigma1,
        policy.sigma2,
    )
    state = MarketState(
        q1=float(raw["q1"]),
        q2=float(raw["q2"]),
        k1=float(raw["k1"]),
        k2=float(raw["k2"]),
        r1=float(raw["r1"]),
        r2=float(raw["r2"]),
    )
    return Stage2Equilibrium(
        params=params,
        policy=policy,
        state=state,
        welfare=welfare(params, policy, state),
        feasibility=_report_from_raw(raw),
    )


def solve_stage2_general(params: ModelParams, policy: PolicyVector) -> Stage2Equilibrium:
    """Closed form with both R&D channels active (inactive rates at zero)."""
    return _solve_closed(params, policy, RDMode.BOTH)


def solve_stage2_process(params: ModelParams, policy: PolicyVector) -> Stage2Equilibrium:
    """Closed form with process R&D only (r1 = r2 = 0)."""
    return _solve_closed(params, policy, RDMode.PROCESS_ONLY)


def solve_stage2_product(params: ModelParams, policy: PolicyVector) -> Stage2Equilibrium:
    """Closed form with product R&D only (k1 = k2 = 0)."""
    return _solve_closed(params, policy, RDMode.PRODUCT_ONLY)


def solve_stage2(params: ModelParams, policy: PolicyVector) -> Stage2Equilibrium:
    """Dispatch to the closed form matching policy.mode."""
    if policy.mode is RDMode.PROCESS_ONLY:
        return solve_stage2_process(params, policy)
    if policy.mode is RDMode.PRODUCT_ONLY:
        return solve_stage2_product(params, policy)
    return solve_stage2_general(params, policy)


def solve_stage2_fixed_point(
    params: ModelParams,
    policy: PolicyVector,
    *,
    damping: float = FP_DAMPING,
    tol: float = FP_TOL,
    max_iter: int = FP_MAX_ITER,
) -> Stage2Equilibrium:
    """Damped iteration of the raw reaction equations; oracle for closed forms.

    Starts at (q1, q2) = (0.01, 0.01) and applies the six first-order
    conditions directly, never forming the reduced linear system.  Converges
    when the applied change drops below tol; raises NoConvergenceError after
    max_iter sweeps or on divergence (signals non-interior or unstable
    parameters).
    """
    one_t = _check_tax(policy.t)
    mode = policy.mode
    proc = mode.process_active
    prod = mode.product_active
    a, m = params.a, params.m
    two1 = 2.0 * (1.0 - params.b1)
    two2 = 2.0 * (1.0 - params.b2)

    q1 = FP_START
    q2 = FP_START
    k1 = k2 = r1 = r2 = 0.0
    for _ in range(max_iter):
        k1 = q1 / ((1.0 - policy.s1) * params.phi1) if proc else 0.0
        k2 = q2 / ((1.0 - policy.s2) * params.phi2) if proc else 0.0
        r1 = one_t * q1 / ((1.0 - policy.sigma1) * params.theta1) if prod else 0.0
        r2 = q2 / ((1.0 - policy.sigma2) * params.theta2) if prod else 0.0

        q1_target = (a + r1 - m * q2 - (params.c1 - k1) / one_t) / two1
        q2_target = (a + r2 - m * q1 - (params.c2 - k2)) / two2

        q1_next = q1 + damping * (q1_target - q1)
        q2_next = q2 + damping * (q2_target - q2)
        step = max(abs(q1_next - q1), abs(q2_next - q2))
        q1, q2 = q1_next, q2_next

        if not (math.isfinite(q1) and math.isfinite(q2)) or abs(q1) > FP_DIVERGENCE_CAP or abs(q2) > FP_DIVERGENCE_CAP:
            raise NoConvergenceError(
                "fixed-point iteration diverged (non-interior or unstable parameters)"
            )
        if step < tol:
            break
    else:
        raise NoConvergenceError(f"fixed-point iteration did not converge in {max_iter} sweeps")

    k1 = q1 / ((1.0 - policy.s1) * params.phi1) if proc else 0.0
    k2 = q2 / ((1.0 - policy.s2) * params.phi2) if proc else 0.0
    r1 = one_t * q1 / ((1.0 - policy.sigma1) * params.theta1) if prod else 0.0
    r2 = q2 / ((1.0 - policy.sigma2) * params.theta2) if prod else 0.0
    state = MarketState(q1=q1, q2=q2, k1=k1, k2=k2, r1=r1, r2=r2)
    return _equilibrium_from_state(params, policy, state, mode)


def check_feasibility(
    params: ModelParams, policy: PolicyVector, eq: Stage2Equilibrium
) -> FeasibilityReport:
    """Re-derive the feasibility certificate for an existing equilibrium."""
    raw = _state_feasibility_raw(params, policy, eq.state, policy.mode)
    return _report_from_raw(raw)


def foc_residuals(params: ModelParams, policy: PolicyVector, state: MarketState) -> tuple[float, ...]:
    """Residuals of all active first-order conditions at a state.

    Interior equilibria must satisfy these to fine tolerance; inactive R&D
    channels contribute the requirement that their levels be zero.
    """
    one_t = 1.0 - policy.t
    mode = policy.mode
    res_q1 = (
        one_t
        * (params.a + state.r1 - 2.0 * (1.0 - params.b1) * state.q1 - params.m * state.q2)
        - (params.c1 - state.k1)
    )
    res_q2 = (
        params.a
        + state.r2
        - 2.0 * (1.0 - params.b2) * state.q2
        - params.m * state.q1
        - (params.c2 - state.k2)
    )
    if mode.process_active:
        res_k1 = state.q1 - (1.0 - policy.s1) * params.phi1 * state.k1
        res_k2 = state.q2 - (1.0 - policy.s2) * params.phi2 * state.k2
    else:
        res_k1, res_k2 = state.k1, state.k2
    if mode.product_active:
        res_r1 = one_t * state.q1 - (1.0 - policy.sigma1) * params.theta1 * state.r1
        res_r2 = state.q2 - (1.0 - policy.sigma2) * params.theta2 * state.r2
    else:
        res_r1, res_r2 = state.r1, state.r2
    return (res_q1, res_k1, res_r1, res_q2, res_k2, res_r2)
