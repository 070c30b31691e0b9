"""Stage-1 policy game: best responses, Nash fixed point, laissez-faire.

The foreign government's subsidy best response has a closed form.  The home
government's joint (subsidy, tax) choice does not, so it is maximised
numerically: a coarse 41x41 grid over the instrument box guards against
basin lock-in near the feasibility boundary, a derivative-free compass
search refines the best cell, and an analytic-gradient Newton polish pins
interior optima to solver precision.  Infeasible policy points get objective
-inf: feasibility is a hard economic constraint, not a soft penalty.

The Nash equilibrium is the fixed point of damped best-response alternation
from laissez-faire, certified afterwards by a unilateral-deviation grid
check (no government may gain more than epsilon by deviating along any one
instrument).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .comparative_statics import analytic_jacobian
from .exceptions import (
    NoConvergenceError,
    NoInteriorPointError,
    NonInteriorError,
    SocViolationError,
)
from .model import ModelParams, PolicyVector, RDMode
from .stage2 import Stage2Equilibrium, _core_solve, solve_stage2

HOME_SUBSIDY_BOX = (0.0, 0.95)
HOME_TAX_BOX = (-0.95, 0.95)
FOREIGN_SUBSIDY_BOX = (0.0, 0.95)
HOME_GRID_N = 41
EPSILON_GRID_N = 201
EPSILON_TOL = 1e-5
NASH_DAMPING = 0.5
NASH_TOL = 1e-8
NASH_MAX_ROUNDS = 500


@dataclass(frozen=True)
class NashResult:
    """Converged policy equilibrium with its laissez-faire comparison.

    epsilon_check is the largest unilateral welfare gain any government can
    find on the verification grid; an accepted equilibrium keeps it below
    1e-5.
    """

    policy: PolicyVector
    eq: Stage2Equilibrium
    lf: Stage2Equilibrium
    dW1: float
    dW2: float
    dW: float
    iterations: int
    converged: bool
    epsilon_check: float


def foreign_best_response_process(params: ModelParams, s2: float) -> float:
    """Closed-form optimal foreign process subsidy given the home subsidy s2.

    Zero when goods are independent, independent of the home tax, and
    increasing in s2 (subsidies are strategic complements).
    """
    den = 1.0 - 1.0 / (2.0 * (1.0 - params.b2) * (1.0 - s2) * params.phi2)
    if den <= 0.0:
        raise SocViolationError(
            f"home-firm SOC bracket is {den:.6g} <= 0; foreign best response undefined"
        )
    return params.m ** 2 / (4.0 * (1.0 - params.b1) * (1.0 - params.b2)) / den


def foreign_best_response_product(params: ModelParams, sigma2: float) -> float:
    """Closed-form optimal foreign product subsidy given the home subsidy."""
    den = 1.0 - 1.0 / (2.0 * (1.0 - params.b2) * (1.0 - sigma2) * params.theta2)
    if den <= 0.0:
        raise SocViolationError(
            f"home-firm SOC bracket is {den:.6g} <= 0; foreign best response undefined"
        )
    return params.m ** 2 / (4.0 * (1.0 - params.b1) * (1.0 - params.b2)) / den


def foreign_best_response(params: ModelParams, mode: RDMode, home_subsidy: float) -> float:
    if mode is RDMode.PROCESS_ONLY:
        return foreign_best_response_process(params, home_subsidy)
    if mode is RDMode.PRODUCT_ONLY:
        return foreign_best_response_product(params, home_subsidy)
    raise ValueError("the policy game is played one R&D channel at a time")


def closed_form_home_subsidy_m0(b2: float) -> float:
    """Optimal home subsidy under independent goods: 1 / (1 + 2 (1 - b2))."""
    if not 0.0 <= b2 < 1.0:
        raise ValueError(f"b2 must lie in [0, 1), got {b2}")
    return 1.0 / (1.0 + 2.0 * (1.0 - b2))


def _policy_for(mode: RDMode, t: float, foreign_sub: float, home_sub: float) -> PolicyVector:
    if mode is RDMode.PROCESS_ONLY:
        return PolicyVector(t=t, s1=foreign_sub, s2=home_sub, mode=mode)
    return PolicyVector(t=t, sigma1=foreign_sub, sigma2=home_sub, mode=mode)


def _raw_solve(params: ModelParams, mode: RDMode, t, s1, s2, sigma1, sigma2):
    return _core_solve(
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
        t,
        s1,
        s2,
        sigma1,
        sigma2,
    )


def _w2_from_raw(raw, params: ModelParams, t, s2, sigma2):
    q1, q2 = raw["q1"], raw["q2"]
    k2, r2 = raw["k2"], raw["r2"]
    cs = 0.5 * (q1 * q1 + q2 * q2 + 2.0 * params.m * q1 * q2)
    pi2 = (
        raw["p2"] * q2
        - (params.c2 - k2) * q2
        - (1.0 - s2) * params.phi2 * k2 * k2 / 2.0
        - (1.0 - sigma2) * params.theta2 * r2 * r2 / 2.0
    )
    sub_home = s2 * params.phi2 * k2 * k2 / 2.0 + sigma2 * params.theta2 * r2 * r2 / 2.0
    return cs + pi2 + t * raw["p1"] * q1 - sub_home


def _w1_from_raw(raw, params: ModelParams, t, s1, sigma1):
    q1 = raw["q1"]
    k1, r1 = raw["k1"], raw["r1"]
    pi1 = (
        (1.0 - t) * raw["p1"] * q1
        - (params.c1 - k1) * q1
        - (1.0 - s1) * params.phi1 * k1 * k1 / 2.0
        - (1.0 - sigma1) * params.theta1 * r1 * r1 / 2.0
    )
    sub_foreign = s1 * params.phi1 * k1 * k1 / 2.0 + sigma1 * params.theta1 * r1 * r1 / 2.0
    return pi1 - sub_foreign


def _instruments(mode: RDMode, t, foreign_sub, home_sub):
    if mode is RDMode.PROCESS_ONLY:
        return t, foreign_sub, home_sub, 0.0, 0.0
    return t, 0.0, 0.0, foreign_sub, home_sub


def _w2_scalar(params: ModelParams, mode: RDMode, foreign_sub: float, t: float, home_sub: float) -> float:
    """Home welfare at the closed-form equilibrium; -inf outside the interior."""
    t_, s1, s2, sg1, sg2 = _instruments(mode, t, foreign_sub, home_sub)
    try:
        raw = _raw_solve(params, mode, t_, s1, s2, sg1, sg2)
    except ZeroDivisionError:
        return -math.inf
    if not raw["interior"]:
        return -math.inf
    w2 = _w2_from_raw(raw, params, t_, s2, sg2)
    return w2 if math.isfinite(w2) else -math.inf


def _w1_scalar(params: ModelParams, mode: RDMode, foreign_sub: float, t: float, home_sub: float) -> float:
    t_, s1, s2, sg1, sg2 = _instruments(mode, t, foreign_sub, home_sub)
    try:
        raw = _raw_solve(params, mode, t_, s1, s2, sg1, sg2)
    except ZeroDivisionError:
        return -math.inf
    if not raw["interior"]:
        return -math.inf
    w1 = _w1_from_raw(raw, params, t_, s1, sg1)
    return w1 if math.isfinite(w1) else -math.inf


def _w2_grid(params: ModelParams, mode: RDMode, foreign_sub: float, t_vals, sub_vals):
    """Vectorised home-welfare surface over the (t, subsidy) instrument grid."""
    t_mesh, sub_mesh = np.meshgrid(t_vals, sub_vals, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):
        t_, s1, s2, sg1, sg2 = _instruments(mode, t_mesh, foreign_sub, sub_mesh)
        raw = _raw_solve(params, mode, t_, s1, s2, sg1, sg2)
        w2 = _w2_from_raw(raw, params, t_, s2, sg2)
    bad = ~(raw["interior"] & np.isfinite(w2))
    w2 = np.where(bad, -np.inf, w2)
    return w2


def _compass_search(f, x0, fx0, lo, hi, step, floor=1e-9):
    """Coordinate pattern search; accepts any improving neighbour, halves on stall."""
    x = list(x0)
    fx = fx0
    while step > floor:
        best_f, best_x = fx, None
        for axis in (0, 1):
            for sign in (1.0, -1.0):
                y = list(x)
                y[axis] = min(max(y[axis] + sign * step, lo[axis]), hi[axis])
                if y[axis] == x[axis]:
                    continue
                fy = f(y[0], y[1])
                if fy > best_f:
                    best_f, best_x = fy, y
        if best_x is None:
            step *= 0.5
        else:
            x, fx = best_x, best_f
    return (x[0], x[1]), fx


def home_welfare_gradient(
    params: ModelParams, policy: PolicyVector, mode: RDMode
) -> tuple[float, float]:
    """Total derivative of home welfare w.r.t. its (subsidy, tax) instruments.

    Assembled by the chain rule from the analytic equilibrium sensitivities;
    the only direct instrument term is the tax's own revenue effect p1*q1
    (the subsidy nets out of the home objective at a fixed state because it
    is a pure transfer to the home firm).
    """
    if mode is not policy.mode:
        raise ValueError("mode must match policy.mode")
    eq = solve_stage2(params, policy)
    if not eq.feasibility.interior:
        raise NonInteriorError(
            f"welfare gradient needs an interior point (binding: {eq.feasibility.binding()})",
            binding=eq.feasibility.binding(),
        )
    st = eq.state
    p1, p2 = eq.welfare.p1, eq.welfare.p2
    m, t = params.m, policy.t
    jac = analytic_jacobian(params, policy, eq)

    dW_dq1 = st.q1 + t * (p1 - (1.0 - params.b1) * st.q1)
    dW_dq2 = (
        st.q2
        + m * st.q1
        + (p2 - (1.0 - params.b2) * st.q2 - (params.c2 - st.k2))
        - t * m * st.q1
    )
    if mode is RDMode.PROCESS_ONLY:
        dW_dx1 = 0.0
        dW_dx2 = st.q2 - params.phi2 * st.k2
        sub_col = "s2"
    else:
        dW_dx1 = t * st.q1
        dW_dx2 = st.q2 - params.theta2 * st.r2
        sub_col = "sigma2"
    partials = np.array([dW_dq1, dW_dx1, dW_dq2, dW_dx2])

    d_sub = float(partials @ jac.column(sub_col))
    d_tax = float(partials @ jac.column("t")) + p1 * st.q1
    return d_sub, d_tax


def _newton_polish(params, mode, foreign_sub, x, f, box_lo, box_hi, h=1e-5, max_steps=4):
    """Drive the analytic instrument gradient to zero from a compass optimum.

    Engages only at strictly interior box points where the FD Hessian of the
    gradient is negative definite; otherwise returns the input unchanged.
    """
    sub, t = x
    fx = f(sub, t)
    for _ in range(max_steps):
        if not (
            box_lo[0] + 1e-4 < sub < box_hi[0] - 1e-4
            and box_lo[1] + 1e-4 < t < box_hi[1] - 1e-4
        ):
            break
        try:
            g = np.array(home_welfare_gradient(params, _policy_for(mode, t, foreign_sub, sub), mode))
            g_sp = np.array(home_welfare_gradient(params, _policy_for(mode, t, foreign_sub, sub + h), mode))
            g_sm = np.array(home_welfare_gradient(params, _policy_for(mode, t, foreign_sub, sub - h), mode))
            g_tp = np.array(home_welfare_gradient(params, _policy_for(mode, t + h, foreign_sub, sub), mode))
            g_tm = np.array(home_welfare_gradient(params, _policy_for(mode, t - h, foreign_sub, sub), mode))
        except (NonInteriorError, ValueError):
            break
        hess = np.column_stack([(g_sp - g_sm) / (2 * h), (g_tp - g_tm) / (2 * h)])
        hess = 0.5 * (hess + hess.T)
        # Negative definite check for a maximum.
        if not (hess[0, 0] < 0 and np.linalg.det(hess) > 0):
            break
        step = np.linalg.solve(hess, -g)
        sub_new = min(max(sub + step[0], box_lo[0]), box_hi[0])
        t_new = min(max(t + step[1], box_lo[1]), box_hi[1])
        f_new = f(sub_new, t_new)
        if f_new < fx - 1e-12:
            break
        sub, t, fx = sub_new, t_new, f_new
        if max(abs(g[0]), abs(g[1])) < 1e-13:
            break
    return (sub, t), fx


def home_best_response(
    params: ModelParams,
    foreign_subsidy: float,
    mode: RDMode,
    *,
    grid_n: int = HOME_GRID_N,
    start: tuple[float, float] | None = None,
) -> tuple[float, float]:
    """Home government's optimal (subsidy, tax) given the foreign subsidy.

    Coarse grid over [0, 0.95] x [-0.95, 0.95], compass refinement, then an
    analytic-gradient polish at interior optima.  start, when given, is an
    extra warm-start candidate (previous iterate) competing with the grid
    argmax.  Raises NoInteriorPointError if the whole box is infeasible.
    """
    if mode not in (RDMode.PROCESS_ONLY, RDMode.PRODUCT_ONLY):
        raise ValueError("the policy game is played one R&D channel at a time")
    t_vals = np.linspace(HOME_TAX_BOX[0], HOME_TAX_BOX[1], grid_n)
    sub_vals = np.linspace(HOME_SUBSIDY_BOX[0], HOME_SUBSIDY_BOX[1], grid_n)
    w2 = _w2_grid(params, mode, foreign_subsidy, t_vals, sub_vals)
    if not np.isfinite(w2).any():
        raise NoInteriorPointError("no interior equilibrium anywhere in the instrument box")
    i, j = np.unravel_index(int(np.argmax(w2)), w2.shape)
    best_x = (float(sub_vals[j]), float(t_vals[i]))
    best_f = float(w2[i, j])

    def objective(sub: float, t: float) -> float:
        return _w2_scalar(params, mode, foreign_subsidy, t, sub)

    if start is not None:
        sub0 = min(max(start[0], HOME_SUBSIDY_BOX[0]), HOME_SUBSIDY_BOX[1])
        t0 = min(max(start[1], HOME_TAX_BOX[0]), HOME_TAX_BOX[1])
        f0 = objective(sub0, t0)
        if f0 > best_f:
            best_x, best_f = (sub0, t0), f0

    lo = (HOME_SUBSIDY_BOX[0], HOME_TAX_BOX[0])
    hi = (HOME_SUBSIDY_BOX[1], HOME_TAX_BOX[1])
    grid_step = float(sub_vals[1] - sub_vals[0])
    x, fx = _compass_search(
        lambda s, t: objective(s, t), best_x, best_f, lo, hi, step=grid_step, floor=1e-9
    )
    x, fx = _newton_polish(params, mode, foreign_subsidy, x, objective, lo, hi)
    return x


def laissez_faire(params: ModelParams, mode: RDMode) -> Stage2Equilibrium:
    """Stage-2 equilibrium with every instrument at zero."""
    return solve_stage2(params, PolicyVector.zero(mode))


def _epsilon_certificate(
    params: ModelParams,
    policy: PolicyVector,
    eq: Stage2Equilibrium,
    n: int = EPSILON_GRID_N,
) -> float:
    """Largest unilateral welfare gain on a per-instrument deviation grid."""
    mode = policy.mode
    foreign_sub = policy.foreign_subsidy()
    home_sub = policy.home_subsidy()
    w1_star, w2_star = eq.welfare.W1, eq.welfare.W2
    best = -math.inf
    for dev in np.linspace(FOREIGN_SUBSIDY_BOX[0], FOREIGN_SUBSIDY_BOX[1], n):
        best = max(best, _w1_scalar(params, mode, float(dev), policy.t, home_sub) - w1_star)
    for dev in np.linspace(HOME_SUBSIDY_BOX[0], HOME_SUBSIDY_BOX[1], n):
        best = max(best, _w2_scalar(params, mode, foreign_sub, policy.t, float(dev)) - w2_star)
    for dev in np.linspace(HOME_TAX_BOX[0], HOME_TAX_BOX[1], n):
        best = max(best, _w2_scalar(params, mode, foreign_sub, float(dev), home_sub) - w2_star)
    return best


def solve_nash(
    params: ModelParams,
    mode: RDMode,
    *,
    start: PolicyVector | tuple[float, float, float] | None = None,
    damping: float = NASH_DAMPING,
    tol: float = NASH_TOL,
    max_rounds: int = NASH_MAX_ROUNDS,
    epsilon_grid_n: int = EPSILON_GRID_N,
) -> NashResult:
    """Nash policy equilibrium by damped best-response alternation.

    Each round updates the foreign subsidy toward its closed-form best
    response, then the home (subsidy, tax) pair toward the numeric best
    response, both with the given damping.  Starts from zero policy unless a
    warm start is supplied.  Raises NoConvergenceError after max_rounds and
    NonInteriorError when the converged policy's stage-2 equilibrium is not
    interior.
    """
    if mode not in (RDMode.PROCESS_ONLY, RDMode.PRODUCT_ONLY):
        raise ValueError("the policy game is played one R&D channel at a time")
    if start is None:
        foreign_sub, home_sub, t = 0.0, 0.0, 0.0
    elif isinstance(start, PolicyVector):
        foreign_sub, home_sub, t = start.foreign_subsidy(), start.home_subsidy(), start.t
    else:
        foreign_sub, home_sub, t = start

    converged = False
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        br_foreign = foreign_best_response(params, mode, home_sub)
        if br_foreign >= FOREIGN_SUBSIDY_BOX[1]:
            raise NonInteriorError(
                f"foreign best response {br_foreign:.4f} exceeds the subsidy cap",
                binding="foreign_subsidy_cap",
            )
        foreign_new = foreign_sub + damping * (br_foreign - foreign_sub)
        br_home_sub, br_home_t = home_best_response(
            params, foreign_new, mode, start=(home_sub, t)
        )
        home_new = home_sub + damping * (br_home_sub - home_sub)
        t_new = t + damping * (br_home_t - t)
        diff = max(abs(foreign_new - foreign_sub), abs(home_new - home_sub), abs(t_new - t))
        foreign_sub, home_sub, t = foreign_new, home_new, t_new
        if diff < tol:
            converged = True
            break
    if not converged:
        raise NoConvergenceError(
            f"best-response alternation did not converge in {max_rounds} rounds"
        )

    policy = _policy_for(mode, t, foreign_sub, home_sub)
    eq = solve_stage2(params, policy)
    if not eq.feasibility.interior:
        raise NonInteriorError(
            f"stage-2 equilibrium at the Nash policy is not interior "
            f"(binding: {eq.feasibility.binding()})",
            binding=eq.feasibility.binding(),
        )
    lf = laissez_faire(params, mode)
    epsilon = _epsilon_certificate(params, policy, eq, n=epsilon_grid_n)
    dw1 = eq.welfare.W1 - lf.welfare.W1
    dw2 = eq.welfare.W2 - lf.welfare.W2
    return NashResult(
        policy=policy,
        eq=eq,
        lf=lf,
        dW1=dw1,
        dW2=dw2,
        dW=dw1 + dw2,
        iterations=rounds,
        converged=converged,
        epsilon_check=epsilon,
    )


def foreign_best_response_numeric(
    params: ModelParams,
    mode: RDMode,
    home_subsidy: float,
    t: float = 0.0,
    *,
    grid_n: int = 101,
) -> float:
    """Numeric argmax of foreign welfare over its subsidy; oracle for the
    closed forms.

    Grid plus compass search plus two finite-difference Newton polish steps,
    which push the argmax resolution well below the float-noise basin of a
    bare direct search.
    """
    lo, hi = FOREIGN_SUBSIDY_BOX

    def f(s: float) -> float:
        return _w1_scalar(params, mode, s, t, home_subsidy)

    grid = np.linspace(lo, hi, grid_n)
    values = [f(float(s)) for s in grid]
    idx = int(np.argmax(values))
    x, fx = float(grid[idx]), values[idx]
    if not math.isfinite(fx):
        raise NoInteriorPointError("foreign welfare is infeasible across the subsidy range")

    step = float(grid[1] - grid[0])
    while step > 1e-9:
        moved = False
        for sign in (1.0, -1.0):
            y = min(max(x + sign * step, lo), hi)
            if y != x:
                fy = f(y)
                if fy > fx:
                    x, fx, moved = y, fy, True
                    break
        if not moved:
            step *= 0.5

    h = 1e-5
    for _ in range(2):
        if not lo + h < x < hi - h:
            break
        d1 = (f(x + h) - f(x - h)) / (2.0 * h)
        d2 = (f(x + h) - 2.0 * fx + f(x - h)) / (h * h)
        if not (math.isfinite(d1) and math.isfinite(d2)) or d2 >= 0:
            break
        x_new = min(max(x - d1 / d2, lo), hi)
        f_new = f(x_new)
        if f_new < fx - 1e-15:
            break
        x, fx = x_new, f_new
    return x
