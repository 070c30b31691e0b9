"""Structural primitives: parameters, policy instruments, market states, welfare.

The economy has two firms selling differentiated goods with network
externalities in demand.  Firm 1 exports into the home market and pays a
revenue tax t there; firm 2 is the home firm.  Both firms can run
cost-reducing (process) R&D and quality-raising (product) R&D, each
subsidised by its own government.

Everything in this module is a pure function of its inputs.  Market states
with negative quantities or prices are evaluated without complaint; whether
a state is economically admissible is decided by the stage-2 feasibility
checks, not here.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum


class RDMode(Enum):
    """Which R&D channels are active in the game being solved."""

    PROCESS_ONLY = "process"
    PRODUCT_ONLY = "product"
    BOTH = "both"

    @property
    def process_active(self) -> bool:
        return self is not RDMode.PRODUCT_ONLY

    @property
    def product_active(self) -> bool:
        return self is not RDMode.PROCESS_ONLY


@dataclass(frozen=True)
class ModelParams:
    """Structural constants of the economy.

    a      demand intercept (> 0)
    c1, c2 marginal costs (0 <= c_i < a)
    b1, b2 network-externality strengths (each in [0, 1)); they flatten the
           effective own-demand slope to (1 - b_i)
    m      substitutability: > 0 substitutes, < 0 complements, 0 independent
    phi_i  inverse efficiency of process R&D (> 0)
    theta_i inverse efficiency of product R&D (> 0)
    """

    a: float = 1.0
    c1: float = 0.7
    c2: float = 0.7
    b1: float = 0.0
    b2: float = 0.0
    m: float = 0.05
    phi1: float = 2.5
    phi2: float = 2.5
    theta1: float = 2.5
    theta2: float = 2.5

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ValueError(f"demand intercept a must be positive, got {self.a}")
        for name in ("c1", "c2"):
            c = getattr(self, name)
            if c < 0 or c >= self.a:
                raise ValueError(f"{name} must satisfy 0 <= {name} < a, got {c}")
        for name in ("b1", "b2"):
            b = getattr(self, name)
            if not 0.0 <= b < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {b}")
        if not -1.0 <= self.m <= 1.0:
            raise ValueError(f"m must lie in [-1, 1], got {self.m}")
        for name in ("phi1", "phi2", "theta1", "theta2"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v}")

    def with_network(self, b: float) -> "ModelParams":
        """Copy with a common network strength b1 = b2 = b."""
        return replace(self, b1=b, b2=b)

    def with_substitutability(self, m: float) -> "ModelParams":
        return replace(self, m=m)


@dataclass(frozen=True)
class PolicyVector:
    """The five government instruments plus the active R&D mode.

    t       home sales tax on the foreign firm's revenue; may be negative
            (an import subsidy), restricted to (-1, 1)
    s1, s2  process-R&D subsidy rates (< 1, so net R&D cost stays positive)
    sigma1, sigma2  product-R&D subsidy rates (< 1)

    Instruments of an inactive channel must be zero.
    """

    t: float = 0.0
    s1: float = 0.0
    s2: float = 0.0
    sigma1: float = 0.0
    sigma2: float = 0.0
    mode: RDMode = RDMode.PROCESS_ONLY

    def __post_init__(self) -> None:
        if not -1.0 < self.t < 1.0:
            raise ValueError(f"tax t must lie in (-1, 1), got {self.t}")
        for name in ("s1", "s2", "sigma1", "sigma2"):
            v = getattr(self, name)
            if not v < 1.0:
                raise ValueError(f"subsidy rate {name} must be < 1, got {v}")
        if self.mode is RDMode.PROCESS_ONLY and (self.sigma1 != 0.0 or self.sigma2 != 0.0):
            raise ValueError("product subsidies must be zero in process-only mode")
        if self.mode is RDMode.PRODUCT_ONLY and (self.s1 != 0.0 or self.s2 != 0.0):
            raise ValueError("process subsidies must be zero in product-only mode")

    @classmethod
    def zero(cls, mode: RDMode = RDMode.PROCESS_ONLY) -> "PolicyVector":
        """Laissez-faire: every instrument at zero."""
        return cls(mode=mode)

    def foreign_subsidy(self) -> float:
        """The foreign government's active subsidy instrument."""
        return self.sigma1 if self.mode is RDMode.PRODUCT_ONLY else self.s1

    def home_subsidy(self) -> float:
        return self.sigma2 if self.mode is RDMode.PRODUCT_ONLY else self.s2


@dataclass(frozen=True)
class MarketState:
    """Quantities and R&D levels for both firms.

    Deliberately unvalidated: optimisers probe infeasible states, so negative
    quantities, prices, or cost reductions exceeding c_i are representable
    here and only flagged by the stage-2 feasibility report.
    """

    q1: float = 0.0
    q2: float = 0.0
    k1: float = 0.0
    k2: float = 0.0
    r1: float = 0.0
    r2: float = 0.0


@dataclass(frozen=True)
class WelfareBreakdown:
    """Prices, profits, surplus, and both governments' objectives at a state."""

    p1: float
    p2: float
    pi1: float
    pi2: float
    cs: float
    taxrev: float
    subsidy_cost_home: float
    subsidy_cost_foreign: float
    W1: float
    W2: float


def inverse_demand(params: ModelParams, state: MarketState) -> tuple[float, float]:
    """Fulfilled-expectations inverse demand.

    p1 = a + r1 - (1 - b1) q1 - m q2
    p2 = a + r2 - (1 - b2) q2 - m q1
    """
    p1 = params.a + state.r1 - (1.0 - params.b1) * state.q1 - params.m * state.q2
    p2 = params.a + state.r2 - (1.0 - params.b2) * state.q2 - params.m * state.q1
    return p1, p2


def profits(params: ModelParams, policy: PolicyVector, state: MarketState) -> tuple[float, float]:
    """Firm profits at an arbitrary state.

    The foreign firm's revenue is taxed at rate t; each firm pays the
    unsubsidised share of its quadratic R&D outlay.
    """
    p1, p2 = inverse_demand(params, state)
    pi1 = (
        (1.0 - policy.t) * p1 * state.q1
        - (params.c1 - state.k1) * state.q1
        - (1.0 - policy.s1) * params.phi1 * state.k1 ** 2 / 2.0
        - (1.0 - policy.sigma1) * params.theta1 * state.r1 ** 2 / 2.0
    )
    pi2 = (
        p2 * state.q2
        - (params.c2 - state.k2) * state.q2
        - (1.0 - policy.s2) * params.phi2 * state.k2 ** 2 / 2.0
        - (1.0 - policy.sigma2) * params.theta2 * state.r2 ** 2 / 2.0
    )
    return pi1, pi2


def consumer_surplus(params: ModelParams, state: MarketState) -> float:
    """Home consumer surplus, closed form: (q1^2 + q2^2 + 2 m q1 q2) / 2."""
    return 0.5 * (state.q1 ** 2 + state.q2 ** 2 + 2.0 * params.m * state.q1 * state.q2)


def consumer_surplus_long_form(params: ModelParams, state: MarketState) -> float:
    """Surplus as goods utility minus expenditure, for cross-checking.

    The choke prices A_i = a + b_i q_i + r_i are evaluated at the realised
    quantities but treated as constants in the utility integral (the consumer
    does not internalise the network term).  Algebraically this equals the
    closed form in consumer_surplus for every state.
    """
    a1 = params.a + params.b1 * state.q1 + state.r1
    a2 = params.a + params.b2 * state.q2 + state.r2
    u_goods = (
        a1 * state.q1
        + a2 * state.q2
        - 0.5 * (state.q1 ** 2 + state.q2 ** 2 + 2.0 * params.m * state.q1 * state.q2)
    )
    p1, p2 = inverse_demand(params, state)
    return u_goods - p1 * state.q1 - p2 * state.q2


def welfare(params: ModelParams, policy: PolicyVector, state: MarketState) -> WelfareBreakdown:
    """Both governments' objectives and their components at a state.

    W1 is the foreign firm's profit net of the foreign subsidy bill.  W2 is
    home consumer surplus plus the home firm's profit plus tax revenue minus
    the home subsidy bill (the quasi-linear reduction of home utility; the
    constant labour endowment is dropped).
    """
    p1, p2 = inverse_demand(params, state)
    pi1, pi2 = profits(params, policy, state)
    cs = consumer_surplus(params, state)
    taxrev = policy.t * p1 * state.q1
    subsidy_cost_foreign = (
        policy.s1 * params.phi1 * state.k1 ** 2 / 2.0
        + policy.sigma1 * params.theta1 * state.r1 ** 2 / 2.0
    )
    subsidy_cost_home = (
        policy.s2 * params.phi2 * state.k2 ** 2 / 2.0
        + policy.sigma2 * params.theta2 * state.r2 ** 2 / 2.0
    )
    w1 = pi1 - subsidy_cost_foreign
    w2 = cs + pi2 + taxrev - subsidy_cost_home
    return WelfareBreakdown(
        p1=p1,
        p2=p2,
        pi1=pi1,
        pi2=pi2,
        cs=cs,
        taxrev=taxrev,
        subsidy_cost_home=subsidy_cost_home,
        subsidy_cost_foreign=subsidy_cost_foreign,
        W1=w1,
        W2=w2,
    )
