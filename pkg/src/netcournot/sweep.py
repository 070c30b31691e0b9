"""Grid sweeps over the network-externality strength b, admissible-bound
search, and sign-crossing detection on sweep columns.

Each grid point solves the full Nash policy game and its laissez-faire
benchmark.  Rows beyond the feasible region are flagged, never dropped, so
the admissible boundary is visible in the output.  Crossings are refined by
bisection on the re-solved quantity, not by interpolating grid values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import (
    NetCournotError,
    NeverFeasibleError,
    NoConvergenceError,
    NoInteriorPointError,
    NonInteriorError,
    SocViolationError,
)
from .model import ModelParams, PolicyVector, RDMode
from .policy_game import EPSILON_TOL, NashResult, laissez_faire, solve_nash

NAN = float("nan")


@dataclass(frozen=True)
class SweepRow:
    """One record of a b-grid sweep; field order matches the CSV schema."""

    b: float
    m: float
    mode: str
    t_star: float
    s1_star: float
    s2_star: float
    sigma1_star: float
    sigma2_star: float
    q1: float
    q2: float
    W1_nash: float
    W2_nash: float
    W1_lf: float
    W2_lf: float
    dW1: float
    dW2: float
    dW: float
    feasible: bool
    binding_constraint: str


@dataclass(frozen=True)
class CrossingReport:
    """A sign change of one sweep column, bracketed and refined in b."""

    column: str
    b_lo: float
    b_hi: float
    b_cross: float


def _point_params(template: ModelParams, b: float, m: float) -> ModelParams:
    return template.with_network(b).with_substitutability(m)


def _failure_label(exc: NetCournotError) -> str:
    if isinstance(exc, NonInteriorError):
        return exc.binding or "non_interior"
    if isinstance(exc, NoConvergenceError):
        return "no_convergence"
    if isinstance(exc, SocViolationError):
        return "foreign_soc"
    if isinstance(exc, NoInteriorPointError):
        return "home_box_infeasible"
    return type(exc).__name__


def _attempt_nash(
    params: ModelParams,
    mode: RDMode,
    warm: PolicyVector | None,
    epsilon_tol: float,
) -> tuple[NashResult | None, str]:
    """Solve the policy game; returns (result-or-None, failure label)."""
    try:
        nash = solve_nash(params, mode, start=warm)
    except NetCournotError as exc:
        return None, _failure_label(exc)
    if nash.epsilon_check > epsilon_tol:
        return nash, "epsilon_check"
    return nash, ""


def _row_from_nash(b: float, m: float, mode: RDMode, nash: NashResult, binding: str) -> SweepRow:
    pol = nash.policy
    return SweepRow(
        b=b,
        m=m,
        mode=mode.value,
        t_star=pol.t,
        s1_star=pol.s1,
        s2_star=pol.s2,
        sigma1_star=pol.sigma1,
        sigma2_star=pol.sigma2,
        q1=nash.eq.state.q1,
        q2=nash.eq.state.q2,
        W1_nash=nash.eq.welfare.W1,
        W2_nash=nash.eq.welfare.W2,
        W1_lf=nash.lf.welfare.W1,
        W2_lf=nash.lf.welfare.W2,
        dW1=nash.dW1,
        dW2=nash.dW2,
        dW=nash.dW,
        feasible=binding == "",
        binding_constraint=binding,
    )


def _row_from_failure(
    params: ModelParams, b: float, m: float, mode: RDMode, label: str
) -> SweepRow:
    try:
        lf = laissez_faire(params, mode)
        w1_lf, w2_lf = lf.welfare.W1, lf.welfare.W2
    except NetCournotError:
        w1_lf = w2_lf = NAN
    return SweepRow(
        b=b,
        m=m,
        mode=mode.value,
        t_star=NAN,
        s1_star=NAN,
        s2_star=NAN,
        sigma1_star=NAN,
        sigma2_star=NAN,
        q1=NAN,
        q2=NAN,
        W1_nash=NAN,
        W2_nash=NAN,
        W1_lf=w1_lf,
        W2_lf=w2_lf,
        dW1=NAN,
        dW2=NAN,
        dW=NAN,
        feasible=False,
        binding_constraint=label,
    )


def sweep_b(
    params_template: ModelParams,
    b_grid: list[float],
    m_values: list[float],
    mode: RDMode,
    *,
    epsilon_tol: float = EPSILON_TOL,
    warm_start: bool = True,
    return_results: bool = False,
):
    """One SweepRow per (m, b) pair, emitted in (m, b) order.

    Within each m the grid runs in ascending b and each point warm-starts
    the Nash iteration from the previous feasible point's policy, which
    halves runtime and stabilises convergence near the admissible bound.
    """
    if sorted(b_grid) != list(b_grid):
        raise ValueError("b_grid must be sorted ascending")
    rows: list[SweepRow] = []
    results: dict[tuple[float, float], NashResult | None] = {}
    for m in m_values:
        warm: PolicyVector | None = None
        for b in b_grid:
            params = _point_params(params_template, b, m)
            nash, label = _attempt_nash(params, mode, warm if warm_start else None, epsilon_tol)
            if nash is None:
                rows.append(_row_from_failure(params, b, m, mode, label))
            else:
                rows.append(_row_from_nash(b, m, mode, nash, label))
                if label == "":
                    warm = nash.policy
            results[(m, b)] = nash
    if return_results:
        return rows, results
    return rows


@dataclass(frozen=True)
class AdmissibleBound:
    """Largest b with an accepted Nash equilibrium, and what fails beyond it."""

    b_bar: float
    binding_constraint: str


def find_admissible_bound(
    params_template: ModelParams,
    m: float,
    mode: RDMode,
    *,
    tol: float = 1e-3,
    scan_step: float = 0.01,
    b_limit: float = 0.99,
    epsilon_tol: float = EPSILON_TOL,
) -> AdmissibleBound:
    """Bisect the first feasibility failure when walking b up from zero.

    Feasibility is not guaranteed monotone in b (isolated pockets can
    reappear past the boundary), so the bound is anchored at the first
    failure of the upward scan, which is what the admissible-range figures
    trace out.
    """
    nash, label = _attempt_nash(_point_params(params_template, 0.0, m), mode, None, epsilon_tol)
    if nash is None or label:
        raise NeverFeasibleError(f"infeasible already at b = 0 ({label})")
    warm = nash.policy

    b_feas = 0.0
    b_fail = None
    fail_label = ""
    b = scan_step
    while b <= b_limit + 1e-12:
        nash, label = _attempt_nash(_point_params(params_template, b, m), mode, warm, epsilon_tol)
        if nash is not None and label == "":
            b_feas, warm = b, nash.policy
        else:
            b_fail, fail_label = b, label
            break
        b = round(b + scan_step, 12)
    if b_fail is None:
        return AdmissibleBound(b_bar=b_feas, binding_constraint="scan_limit")

    while b_fail - b_feas > tol:
        mid = 0.5 * (b_feas + b_fail)
        nash, label = _attempt_nash(_point_params(params_template, mid, m), mode, warm, epsilon_tol)
        if nash is not None and label == "":
            b_feas, warm = mid, nash.policy
        else:
            b_fail, fail_label = mid, label
    return AdmissibleBound(b_bar=b_feas, binding_constraint=fail_label)


_COLUMN_GETTERS = {
    "t_star": lambda nash: nash.policy.t,
    "s1_star": lambda nash: nash.policy.s1,
    "s2_star": lambda nash: nash.policy.s2,
    "sigma1_star": lambda nash: nash.policy.sigma1,
    "sigma2_star": lambda nash: nash.policy.sigma2,
    "q1": lambda nash: nash.eq.state.q1,
    "q2": lambda nash: nash.eq.state.q2,
    "dW1": lambda nash: nash.dW1,
    "dW2": lambda nash: nash.dW2,
    "dW": lambda nash: nash.dW,
    "W1_nash": lambda nash: nash.eq.welfare.W1,
    "W2_nash": lambda nash: nash.eq.welfare.W2,
}


def _warm_from_row(row: SweepRow, mode: RDMode) -> PolicyVector | None:
    if not row.feasible:
        return None
    return PolicyVector(
        t=row.t_star,
        s1=row.s1_star,
        s2=row.s2_star,
        sigma1=row.sigma1_star,
        sigma2=row.sigma2_star,
        mode=mode,
    )


def detect_crossings(
    params_template: ModelParams,
    rows: list[SweepRow],
    column: str,
    *,
    tol: float = 1e-4,
    epsilon_tol: float = EPSILON_TOL,
) -> list[CrossingReport]:
    """Bracket and refine every sign change of a column over feasible rows.

    The rows must share one (m, mode) pair and be sorted by b.  Refinement
    re-solves the Nash game at bisection midpoints (warm-started from the
    nearer bracket row) instead of interpolating, because the columns are
    steep near the feasibility boundary.
    """
    if column not in _COLUMN_GETTERS:
        raise ValueError(f"unsupported crossing column {column!r}")
    if not rows:
        return []
    keys = {(row.m, row.mode) for row in rows}
    if len(keys) != 1:
        raise ValueError("rows must share a single (m, mode) combination")
    if [row.b for row in rows] != sorted(row.b for row in rows):
        raise ValueError("rows must be sorted by b")
    m = rows[0].m
    mode = RDMode(rows[0].mode)
    getter = _COLUMN_GETTERS[column]

    feasible = [row for row in rows if row.feasible]
    reports: list[CrossingReport] = []
    for left, right in zip(feasible, feasible[1:]):
        v_lo, v_hi = getattr(left, column), getattr(right, column)
        if not (math.isfinite(v_lo) and math.isfinite(v_hi)) or v_lo * v_hi >= 0:
            continue
        b_lo, b_hi = left.b, right.b
        sign_lo = math.copysign(1.0, v_lo)
        lo, hi = b_lo, b_hi
        warm = _warm_from_row(left, mode)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            nash, label = _attempt_nash(
                _point_params(params_template, mid, m), mode, warm, epsilon_tol
            )
            if nash is None or label:
                break
            if math.copysign(1.0, getter(nash)) == sign_lo:
                lo = mid
            else:
                hi = mid
            warm = nash.policy
        reports.append(
            CrossingReport(column=column, b_lo=b_lo, b_hi=b_hi, b_cross=0.5 * (lo + hi))
        )
    return reports
