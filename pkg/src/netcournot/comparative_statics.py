"""Analytic equilibrium sensitivities, their finite-difference oracle, and
executable sign suites for the comparative-statics propositions.

The stage-2 equilibrium system is linear in (q1, x1, q2, x2) where x is the
active R&D level (k under process, r under product).  Total differentiation
w.r.t. a policy or network parameter therefore yields Cramer's-rule closed
forms with the stability determinant in every denominator; those closed
forms are transcribed here and validated entrywise against central finite
differences of the solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .exceptions import BoundaryError, NonInteriorError
from .model import ModelParams, PolicyVector, RDMode
from .stage2 import Stage2Equilibrium, solve_stage2

POLICY_COLUMNS_PROCESS = ("t", "s1", "s2")
POLICY_COLUMNS_PRODUCT = ("t", "sigma1", "sigma2")
NETWORK_COLUMNS = ("b1", "b2")


@dataclass(frozen=True)
class Jacobian4:
    """Sensitivities of (q1, x1, q2, x2) w.r.t. a named list of parameters."""

    rows: tuple[str, str, str, str]
    columns: tuple[str, ...]
    entries: np.ndarray  # shape (4, len(columns))

    def entry(self, row: str, column: str) -> float:
        return float(self.entries[self.rows.index(row), self.columns.index(column)])

    def column(self, column: str) -> np.ndarray:
        return self.entries[:, self.columns.index(column)].copy()

    @staticmethod
    def combine(*jacobians: "Jacobian4") -> "Jacobian4":
        rows = jacobians[0].rows
        for j in jacobians:
            if j.rows != rows:
                raise ValueError("cannot combine jacobians with different row layouts")
        cols: tuple[str, ...] = ()
        for j in jacobians:
            cols = cols + j.columns
        return Jacobian4(rows=rows, columns=cols, entries=np.hstack([j.entries for j in jacobians]))


def _require_interior(eq: Stage2Equilibrium, what: str) -> None:
    if not eq.feasibility.interior:
        raise NonInteriorError(
            f"{what} requires an interior equilibrium (binding: {eq.feasibility.binding()})",
            binding=eq.feasibility.binding(),
        )


def _process_pieces(params: ModelParams, policy: PolicyVector):
    one_t = 1.0 - policy.t
    two1 = 2.0 * (1.0 - params.b1)
    two2 = 2.0 * (1.0 - params.b2)
    v1 = 1.0 / ((1.0 - policy.s1) * params.phi1)  # dk1/dq1 along firm 1's FOC
    v2 = 1.0 / ((1.0 - policy.s2) * params.phi2)
    br1 = 1.0 - v1 / (two1 * one_t)  # firm 1 SOC bracket
    br2 = 1.0 - v2 / two2
    cross = params.m * params.m / (two1 * two2)
    delta = br1 * br2 - cross
    return one_t, two1, two2, v1, v2, br1, br2, cross, delta


def policy_jacobian_process(
    params: ModelParams, policy: PolicyVector, eq: Stage2Equilibrium
) -> Jacobian4:
    """d(q1, k1, q2, k2)/d(t, s1, s2) under process R&D."""
    if policy.mode is not RDMode.PROCESS_ONLY:
        raise ValueError("policy_jacobian_process needs mode PROCESS_ONLY")
    _require_interior(eq, "policy_jacobian_process")
    one_t, two1, two2, v1, v2, br1, br2, cross, delta = _process_pieces(params, policy)
    m = params.m
    st = eq.state
    net_c1 = params.c1 - st.k1

    # Home tax column.
    dq1_dt = -net_c1 * br2 / (two1 * one_t ** 2 * delta)
    dk1_dt = v1 * dq1_dt
    dq2_dt = m * net_c1 / (two1 * two2 * one_t ** 2 * delta)
    dk2_dt = v2 * dq2_dt

    # Foreign process subsidy column.
    z1 = st.q1 / ((1.0 - policy.s1) ** 2 * params.phi1)
    dq1_ds1 = z1 * br2 / (two1 * one_t * delta)
    dk1_ds1 = z1 * (br2 - cross) / delta
    dq2_ds1 = -m * z1 / (two1 * two2 * one_t * delta)
    dk2_ds1 = v2 * dq2_ds1

    # Home process subsidy column.
    z2 = st.q2 / ((1.0 - policy.s2) ** 2 * params.phi2)
    dq1_ds2 = -m * z2 / (two1 * two2 * delta)
    dk1_ds2 = v1 * dq1_ds2
    dq2_ds2 = z2 * br1 / (two2 * delta)
    dk2_ds2 = z2 * (br1 - cross) / delta

    entries = np.array(
        [
            [dq1_dt, dq1_ds1, dq1_ds2],
            [dk1_dt, dk1_ds1, dk1_ds2],
            [dq2_dt, dq2_ds1, dq2_ds2],
            [dk2_dt, dk2_ds1, dk2_ds2],
        ]
    )
    return Jacobian4(rows=("q1", "k1", "q2", "k2"), columns=POLICY_COLUMNS_PROCESS, entries=entries)


def network_jacobian_process(
    params: ModelParams, policy: PolicyVector, eq: Stage2Equilibrium
) -> Jacobian4:
    """d(q1, k1, q2, k2)/d(b1, b2) under process R&D."""
    if policy.mode is not RDMode.PROCESS_ONLY:
        raise ValueError("network_jacobian_process needs mode PROCESS_ONLY")
    _require_interior(eq, "network_jacobian_process")
    one_t, two1, two2, v1, v2, br1, br2, cross, delta = _process_pieces(params, policy)
    m = params.m
    st = eq.state

    # At equilibrium these margins equal 2 (1 - b_i) q_i; kept expanded so
    # the expressions remain meaningful slightly off the solved point.
    margin1 = params.a - (params.c1 - st.k1) / one_t - m * st.q2
    margin2 = params.a - (params.c2 - st.k2) - m * st.q1
    half1 = margin1 / (2.0 * (1.0 - params.b1) ** 2)
    half2 = margin2 / (2.0 * (1.0 - params.b2) ** 2)

    dq1_db1 = half1 * br2 / delta
    dk1_db1 = v1 * dq1_db1
    dq2_db1 = -m * half1 / (two2 * delta)
    dk2_db1 = v2 * dq2_db1

    dq1_db2 = -m * half2 / (two1 * delta)
    dk1_db2 = v1 * dq1_db2
    dq2_db2 = half2 * br1 / delta
    dk2_db2 = v2 * dq2_db2

    entries = np.array(
        [
            [dq1_db1, dq1_db2],
            [dk1_db1, dk1_db2],
            [dq2_db1, dq2_db2],
            [dk2_db1, dk2_db2],
        ]
    )
    return Jacobian4(rows=("q1", "k1", "q2", "k2"), columns=NETWORK_COLUMNS, entries=entries)


def _product_pieces(params: ModelParams, policy: PolicyVector):
    one_t = 1.0 - policy.t
    two1 = 2.0 * (1.0 - params.b1)
    two2 = 2.0 * (1.0 - params.b2)
    w1 = one_t / ((1.0 - policy.sigma1) * params.theta1)  # dr1/dq1 along firm 1's FOC
    w2 = 1.0 / ((1.0 - policy.sigma2) * params.theta2)
    br1 = 1.0 - w1 / two1
    br2 = 1.0 - w2 / two2
    cross = params.m * params.m / (two1 * two2)
    delta = br1 * br2 - cross
    return one_t, two1, two2, w1, w2, br1, br2, cross, delta


def policy_jacobian_product(
    params: ModelParams, policy: PolicyVector, eq: Stage2Equilibrium
) -> Jacobian4:
    """d(q1, r1, q2, r2)/d(t, sigma1, sigma2) under product R&D.

    Unlike the process case the tax enters firm 1's R&D condition directly,
    so the t column carries both an output and a quality-choice effect.
    """
    if policy.mode is not RDMode.PRODUCT_ONLY:
        raise ValueError("policy_jacobian_product needs mode PRODUCT_ONLY")
    _require_interior(eq, "policy_jacobian_product")
    one_t, two1, two2, w1, w2, br1, br2, cross, delta = _product_pieces(params, policy)
    m = params.m
    st = eq.state
    th1 = (1.0 - policy.sigma1) * params.theta1
    th2 = (1.0 - policy.sigma2) * params.theta2

    # Home tax column: the forcing term mixes the direct R&D effect
    # (q1 / th1) with the cost-side effect (c1 / (1-t)^2).
    force = st.q1 / th1 + params.c1 / one_t ** 2
    dq1_dt = -force * br2 / (two1 * delta)
    dq2_dt = m * force / (two1 * two2 * delta)
    dr1_dt = -(st.q1 + one_t * force * br2 / (two1 * delta)) / th1
    dr2_dt = w2 * dq2_dt

    # Foreign product subsidy column.
    z1 = one_t * st.q1 / ((1.0 - policy.sigma1) ** 2 * params.theta1)
    dq1_dsg1 = z1 * br2 / (two1 * delta)
    dq2_dsg1 = -m * z1 / (two1 * two2 * delta)
    dr1_dsg1 = (one_t * st.q1 / ((1.0 - policy.sigma1) ** 2 * params.theta1)) * (
        1.0 + one_t * br2 / (two1 * th1 * delta)
    )
    dr2_dsg1 = w2 * dq2_dsg1

    # Home product subsidy column.
    z2 = st.q2 / ((1.0 - policy.sigma2) ** 2 * params.theta2)
    dq1_dsg2 = -m * z2 / (two1 * two2 * delta)
    dq2_dsg2 = z2 * br1 / (two2 * delta)
    dr1_dsg2 = w1 * dq1_dsg2
    dr2_dsg2 = z2 * (br1 - cross) / delta

    entries = np.array(
        [
            [dq1_dt, dq1_dsg1, dq1_dsg2],
            [dr1_dt, dr1_dsg1, dr1_dsg2],
            [dq2_dt, dq2_dsg1, dq2_dsg2],
            [dr2_dt, dr2_dsg1, dr2_dsg2],
        ]
    )
    return Jacobian4(rows=("q1", "r1", "q2", "r2"), columns=POLICY_COLUMNS_PRODUCT, entries=entries)


def network_jacobian_product(
    params: ModelParams, policy: PolicyVector, eq: Stage2Equilibrium
) -> Jacobian4:
    """d(q1, r1, q2, r2)/d(b1, b2) under product R&D."""
    if policy.mode is not RDMode.PRODUCT_ONLY:
        raise ValueError("network_jacobian_product needs mode PRODUCT_ONLY")
    _require_interior(eq, "network_jacobian_product")
    one_t, two1, two2, w1, w2, br1, br2, cross, delta = _product_pieces(params, policy)
    m = params.m
    st = eq.state

    margin1 = params.a + st.r1 - params.c1 / one_t - m * st.q2
    margin2 = params.a + st.r2 - params.c2 - m * st.q1
    half1 = margin1 / (2.0 * (1.0 - params.b1) ** 2)
    half2 = margin2 / (2.0 * (1.0 - params.b2) ** 2)

    dq1_db1 = half1 * br2 / delta
    dr1_db1 = w1 * dq1_db1
    dq2_db1 = -m * half1 / (two2 * delta)
    dr2_db1 = w2 * dq2_db1

    dq1_db2 = -m * half2 / (two1 * delta)
    dr1_db2 = w1 * dq1_db2
    dq2_db2 = half2 * br1 / delta
    dr2_db2 = w2 * dq2_db2

    entries = np.array(
        [
            [dq1_db1, dq1_db2],
            [dr1_db1, dr1_db2],
            [dq2_db1, dq2_db2],
            [dr2_db1, dr2_db2],
        ]
    )
    return Jacobian4(rows=("q1", "r1", "q2", "r2"), columns=NETWORK_COLUMNS, entries=entries)


def analytic_jacobian(
    params: ModelParams, policy: PolicyVector, eq: Stage2Equilibrium
) -> Jacobian4:
    """Full 4x5 sensitivity matrix (policy columns then network columns)."""
    if policy.mode is RDMode.PROCESS_ONLY:
        return Jacobian4.combine(
            policy_jacobian_process(params, policy, eq),
            network_jacobian_process(params, policy, eq),
        )
    if policy.mode is RDMode.PRODUCT_ONLY:
        return Jacobian4.combine(
            policy_jacobian_product(params, policy, eq),
            network_jacobian_product(params, policy, eq),
        )
    raise ValueError("analytic jacobians cover the two single-channel modes only")


def _state_vector(eq: Stage2Equilibrium, mode: RDMode) -> np.ndarray:
    st = eq.state
    if mode is RDMode.PROCESS_ONLY:
        return np.array([st.q1, st.k1, st.q2, st.k2])
    return np.array([st.q1, st.r1, st.q2, st.r2])


def finite_difference_jacobian(
    params: ModelParams, policy: PolicyVector, mode: RDMode, step: float = 1e-6
) -> Jacobian4:
    """Central differences of the closed-form solver; validation oracle.

    Raises BoundaryError whenever a perturbed point is rejected by parameter
    validation or leaves the interior region, since the two-sided stencil is
    then meaningless.
    """
    if mode not in (RDMode.PROCESS_ONLY, RDMode.PRODUCT_ONLY):
        raise ValueError("finite differences cover the two single-channel modes only")
    if policy.mode is not mode:
        raise ValueError("policy.mode must match the requested mode")

    if mode is RDMode.PROCESS_ONLY:
        policy_cols = POLICY_COLUMNS_PROCESS
        rows = ("q1", "k1", "q2", "k2")
    else:
        policy_cols = POLICY_COLUMNS_PRODUCT
        rows = ("q1", "r1", "q2", "r2")
    columns = policy_cols + NETWORK_COLUMNS

    def perturbed(name: str, h: float) -> Stage2Equilibrium:
        try:
            if name in ("b1", "b2"):
                pp = replace(params, **{name: getattr(params, name) + h})
                pol = policy
            else:
                pol = replace(policy, **{name: getattr(policy, name) + h})
                pp = params
        except ValueError as exc:
            raise BoundaryError(f"perturbing {name} by {h:+g} left the parameter domain: {exc}")
        eq = solve_stage2(pp, pol)
        if not eq.feasibility.interior:
            raise BoundaryError(
                f"perturbing {name} by {h:+g} left the interior region "
                f"(binding: {eq.feasibility.binding()})"
            )
        return eq

    entries = np.empty((4, len(columns)))
    for j, name in enumerate(columns):
        hi = _state_vector(perturbed(name, +step), mode)
        lo = _state_vector(perturbed(name, -step), mode)
        entries[:, j] = (hi - lo) / (2.0 * step)
    return Jacobian4(rows=rows, columns=columns, entries=entries)


# ---------------------------------------------------------------------------
# Interior point sampling and sign suites
# ---------------------------------------------------------------------------


@dataclass
class InteriorSampler:
    """Seeded rejection sampler for interior equilibrium points.

    Ranges mirror the baseline parameterisation's neighbourhood: a in 1+-0.2,
    c in 0.7+-0.1, phi and theta in [2, 3].  Draws are rejected until the
    closed-form equilibrium is interior (and, when requested, until the
    finite-difference stencil of half-width fd_margin stays interior).
    """

    seed: int = 0
    mode: RDMode = RDMode.PROCESS_ONLY
    m_range: tuple[float, float] = (0.0, 0.3)
    b_range: tuple[float, float] = (0.01, 0.4)
    t_range: tuple[float, float] = (0.0, 0.3)
    rate_range: tuple[float, float] = (0.0, 0.3)
    symmetric_network: bool = False
    max_rejects: int = 5000
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._rng = np.random.default_rng(self.seed)

    def draw(self) -> tuple[ModelParams, PolicyVector, Stage2Equilibrium]:
        rng = self._rng
        for _ in range(self.max_rejects):
            b1 = rng.uniform(*self.b_range)
            b2 = b1 if self.symmetric_network else rng.uniform(*self.b_range)
            params = ModelParams(
                a=rng.uniform(0.8, 1.2),
                c1=rng.uniform(0.6, 0.8),
                c2=rng.uniform(0.6, 0.8),
                b1=b1,
                b2=b2,
                m=rng.uniform(*self.m_range),
                phi1=rng.uniform(2.0, 3.0),
                phi2=rng.uniform(2.0, 3.0),
                theta1=rng.uniform(2.0, 3.0),
                theta2=rng.uniform(2.0, 3.0),
            )
            t = rng.uniform(*self.t_range)
            r1, r2 = rng.uniform(*self.rate_range, size=2)
            if self.mode is RDMode.PROCESS_ONLY:
                policy = PolicyVector(t=t, s1=r1, s2=r2, mode=self.mode)
            elif self.mode is RDMode.PRODUCT_ONLY:
                policy = PolicyVector(t=t, sigma1=r1, sigma2=r2, mode=self.mode)
            else:
                r3, r4 = rng.uniform(*self.rate_range, size=2)
                policy = PolicyVector(t=t, s1=r1, s2=r2, sigma1=r3, sigma2=r4, mode=self.mode)
            eq = solve_stage2(params, policy)
            if eq.feasibility.interior:
                return params, policy, eq
        raise RuntimeError("interior sampler exhausted its rejection budget")


@dataclass
class ClauseCheck:
    clause: str
    passed: bool
    n_checked: int
    witness: dict | None = None


@dataclass
class SignReport:
    clauses: list[ClauseCheck]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def failures(self) -> list[ClauseCheck]:
        return [c for c in self.clauses if not c.passed]


def _sign_clauses(mode: RDMode, m: float) -> dict[str, list[tuple[str, str, str]]]:
    """Clause table: name -> list of (row, column, relation) requirements.

    Relations are evaluated literally: "<", ">", or "=0".  Cross-country
    effects carry a factor m in every closed form, so they are strict for
    m > 0, flip for m < 0, and vanish identically at m = 0.
    """
    if mode is RDMode.PROCESS_ONLY:
        x = "k"
        foreign_sub, home_sub = "s1", "s2"
    else:
        x = "r"
        foreign_sub, home_sub = "sigma1", "sigma2"
    lt, gt = "<", ">"
    if m < 0:
        cross_neg, cross_pos = gt, lt  # substitutes-only clauses flip sign
    elif m == 0:
        cross_neg = cross_pos = "=0"
    else:
        cross_neg, cross_pos = lt, gt

    return {
        "tax_cuts_foreign": [("q1", "t", lt), (f"{x}1", "t", lt)],
        "own_subsidy_raises_foreign": [("q1", foreign_sub, gt), (f"{x}1", foreign_sub, gt)],
        "home_subsidy_crowds_foreign": [("q1", home_sub, cross_neg)],
        "tax_boosts_home": [("q2", "t", cross_pos), (f"{x}2", "t", cross_pos)],
        "own_subsidy_raises_home": [("q2", home_sub, gt), (f"{x}2", home_sub, gt)],
        "foreign_subsidy_crowds_home": [("q2", foreign_sub, cross_neg)],
        "own_network_raises_own": [
            ("q1", "b1", gt),
            (f"{x}1", "b1", gt),
            ("q2", "b2", gt),
            (f"{x}2", "b2", gt),
        ],
        "rival_network_crowds_out": [
            ("q1", "b2", cross_neg),
            (f"{x}1", "b2", cross_neg),
            ("q2", "b1", cross_neg),
            (f"{x}2", "b1", cross_neg),
        ],
    }


def verify_sign_propositions(
    sampler: InteriorSampler | Callable[[], tuple[ModelParams, PolicyVector, Stage2Equilibrium]],
    n_samples: int,
) -> SignReport:
    """Check every comparative-statics sign clause at sampled interior points.

    The sampler fixes the regime (mode and the sign of m); the clause table
    adapts to it.  A failing clause records the first witness point.
    """
    draw = sampler.draw if isinstance(sampler, InteriorSampler) else sampler
    tallies: dict[str, ClauseCheck] = {}
    for _ in range(n_samples):
        params, policy, eq = draw()
        jac = analytic_jacobian(params, policy, eq)
        clauses = _sign_clauses(policy.mode, params.m)
        for name, requirements in clauses.items():
            check = tallies.setdefault(name, ClauseCheck(clause=name, passed=True, n_checked=0))
            check.n_checked += 1
            for row, col, rel in requirements:
                value = jac.entry(row, col)
                ok = (
                    value < 0 if rel == "<" else value > 0 if rel == ">" else value == 0.0
                )
                if not ok and check.passed:
                    check.passed = False
                    check.witness = {
                        "params": params,
                        "policy": policy,
                        "entry": f"d{row}/d{col}",
                        "value": value,
                        "relation": rel,
                    }
    return SignReport(clauses=list(tallies.values()))
