"""Seeded invariant and property suite behind the `check` CLI subcommand.

Each block samples points, counts violations, and reports pass/fail tallies.
Identities that hold by construction are verified to machine precision;
numerical equivalences use the tolerances of the solver contracts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .comparative_statics import (
    InteriorSampler,
    analytic_jacobian,
    finite_difference_jacobian,
    verify_sign_propositions,
)
from .csvio import read_sweep_csv, write_sweep_csv
from .model import (
    MarketState,
    ModelParams,
    PolicyVector,
    RDMode,
    consumer_surplus,
    consumer_surplus_long_form,
    welfare,
)
from .policy_game import (
    foreign_best_response,
    foreign_best_response_numeric,
    solve_nash,
)
from .stage2 import (
    foc_residuals,
    solve_stage2,
    solve_stage2_fixed_point,
    solve_stage2_general,
    solve_stage2_process,
    solve_stage2_product,
)
from .sweep import SweepRow

MACHINE_TOL = 1e-13


@dataclass
class CheckBlock:
    name: str
    passed: int
    failed: int
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.failed == 0


@dataclass
class CheckReport:
    seed: int
    blocks: list[CheckBlock]

    @property
    def ok(self) -> bool:
        return all(block.ok for block in self.blocks)

    def lines(self) -> list[str]:
        out = [f"check suite (seed={self.seed})"]
        for block in self.blocks:
            status = "PASS" if block.ok else "FAIL"
            note = f"  [{block.note}]" if block.note else ""
            out.append(f"  {status}  {block.name}: {block.passed}/{block.passed + block.failed}{note}")
        out.append("all checks passed" if self.ok else "CHECK FAILURES PRESENT")
        return out


def _random_state(rng: np.random.Generator) -> MarketState:
    return MarketState(
        q1=rng.uniform(0.0, 0.5),
        q2=rng.uniform(0.0, 0.5),
        k1=rng.uniform(0.0, 0.2),
        k2=rng.uniform(0.0, 0.2),
        r1=rng.uniform(0.0, 0.2),
        r2=rng.uniform(0.0, 0.2),
    )


def _random_params(rng: np.random.Generator) -> ModelParams:
    return ModelParams(
        a=rng.uniform(0.8, 1.2),
        c1=rng.uniform(0.6, 0.8),
        c2=rng.uniform(0.6, 0.8),
        b1=rng.uniform(0.0, 0.5),
        b2=rng.uniform(0.0, 0.5),
        m=rng.uniform(-0.5, 0.5),
        phi1=rng.uniform(2.0, 3.0),
        phi2=rng.uniform(2.0, 3.0),
        theta1=rng.uniform(2.0, 3.0),
        theta2=rng.uniform(2.0, 3.0),
    )


def _random_policy(rng: np.random.Generator) -> PolicyVector:
    return PolicyVector(
        t=rng.uniform(-0.3, 0.5),
        s1=rng.uniform(0.0, 0.5),
        s2=rng.uniform(0.0, 0.5),
        sigma1=rng.uniform(0.0, 0.5),
        sigma2=rng.uniform(0.0, 0.5),
        mode=RDMode.BOTH,
    )


def check_cs_identity(seed: int, n: int) -> CheckBlock:
    """Long-form surplus equals the closed form at random states."""
    rng = np.random.default_rng(seed)
    failed = 0
    for _ in range(n):
        params = _random_params(rng)
        state = _random_state(rng)
        short = consumer_surplus(params, state)
        long = consumer_surplus_long_form(params, state)
        if abs(short - long) > MACHINE_TOL * max(1.0, abs(short)):
            failed += 1
    return CheckBlock("consumer-surplus identity", n - failed, failed)


def check_welfare_identities(seed: int, n: int) -> CheckBlock:
    """Definitional welfare identities and tax-transfer neutrality."""
    rng = np.random.default_rng(seed)
    failed = 0
    for _ in range(n):
        params = _random_params(rng)
        policy = _random_policy(rng)
        state = _random_state(rng)
        wb = welfare(params, policy, state)
        ok = (
            wb.W1 == wb.pi1 - wb.subsidy_cost_foreign
            and wb.W2 == wb.cs + wb.pi2 + wb.taxrev - wb.subsidy_cost_home
            and wb.cs == consumer_surplus(params, state)
            and abs(wb.W2 - wb.cs - wb.pi2 - wb.taxrev + wb.subsidy_cost_home)
            <= MACHINE_TOL * max(1.0, abs(wb.W2))
        )
        # Raising t at a frozen state shifts revenue one-for-one between the
        # governments and leaves W1 + W2 unchanged.
        wb2 = welfare(params, replace(policy, t=policy.t + 0.1), state)
        total0, total1 = wb.W1 + wb.W2, wb2.W1 + wb2.W2
        ok = ok and abs(total0 - total1) <= 1e-12 * max(1.0, abs(total0))
        if not ok:
            failed += 1
    return CheckBlock("welfare identities and transfer neutrality", n - failed, failed)


def check_symmetry(seed: int, n: int) -> CheckBlock:
    """Fully symmetric parameters with zero policy give a bitwise-symmetric
    equilibrium in every mode."""
    rng = np.random.default_rng(seed)
    failed = 0
    per_mode = max(1, n // 3)
    for mode in RDMode:
        for _ in range(per_mode):
            c = rng.uniform(0.6, 0.8)
            b = rng.uniform(0.0, 0.45)
            phi = rng.uniform(2.0, 3.0)
            theta = rng.uniform(2.0, 3.0)
            params = ModelParams(
                a=rng.uniform(0.8, 1.2),
                c1=c,
                c2=c,
                b1=b,
                b2=b,
                m=rng.uniform(-0.3, 0.3),
                phi1=phi,
                phi2=phi,
                theta1=theta,
                theta2=theta,
            )
            eq = solve_stage2(params, PolicyVector.zero(mode))
            st = eq.state
            if not (st.q1 == st.q2 and st.k1 == st.k2 and st.r1 == st.r2):
                failed += 1
    total = per_mode * 3
    return CheckBlock("symmetric-parameter symmetry", total - failed, failed)


def check_oracle_equivalence(seed: int, n: int, tol: float = 1e-10) -> CheckBlock:
    """Closed forms agree with the fixed-point oracle on interior points."""
    failed = 0
    count = 0
    for offset, mode in enumerate(RDMode):
        sampler = InteriorSampler(seed=seed + offset, mode=mode, t_range=(-0.2, 0.3))
        for _ in range(n):
            params, policy, eq = sampler.draw()
            fp = solve_stage2_fixed_point(params, policy)
            worst = max(
                abs(getattr(eq.state, f) - getattr(fp.state, f))
                for f in ("q1", "q2", "k1", "k2", "r1", "r2")
            )
            count += 1
            if worst > tol:
                failed += 1
    return CheckBlock("closed form vs fixed-point oracle", count - failed, failed)


def check_specialisation(seed: int, n: int, tol: float = 1e-6) -> CheckBlock:
    """General solver with one channel priced out matches the single-channel
    solver."""
    rng = np.random.default_rng(seed)
    failed = 0
    for _ in range(n):
        b = rng.uniform(0.0, 0.35)
        m = rng.uniform(-0.25, 0.25)
        t = rng.uniform(-0.1, 0.2)
        params = ModelParams(b1=b, b2=b, m=m)
        s1, s2 = rng.uniform(0.0, 0.3, size=2)

        pol_proc = PolicyVector(t=t, s1=s1, s2=s2, mode=RDMode.PROCESS_ONLY)
        dead_product = replace(params, theta1=1e12, theta2=1e12)
        gen = solve_stage2_general(dead_product, PolicyVector(t=t, s1=s1, s2=s2, mode=RDMode.BOTH))
        pro = solve_stage2_process(params, pol_proc)
        err = max(abs(gen.state.q1 - pro.state.q1), abs(gen.state.q2 - pro.state.q2),
                  abs(gen.state.k1 - pro.state.k1), abs(gen.state.k2 - pro.state.k2))

        pol_prod = PolicyVector(t=t, sigma1=s1, sigma2=s2, mode=RDMode.PRODUCT_ONLY)
        dead_process = replace(params, phi1=1e12, phi2=1e12)
        gen2 = solve_stage2_general(
            dead_process, PolicyVector(t=t, sigma1=s1, sigma2=s2, mode=RDMode.BOTH)
        )
        prd = solve_stage2_product(params, pol_prod)
        err = max(err, abs(gen2.state.q1 - prd.state.q1), abs(gen2.state.q2 - prd.state.q2),
                  abs(gen2.state.r1 - prd.state.r1), abs(gen2.state.r2 - prd.state.r2))
        if err > tol:
            failed += 1
    return CheckBlock("single-channel specialisation limits", n - failed, failed)


def check_foc_residuals(seed: int, n: int, tol: float = 1e-10) -> CheckBlock:
    failed = 0
    count = 0
    for offset, mode in enumerate(RDMode):
        sampler = InteriorSampler(seed=seed + 17 + offset, mode=mode)
        for _ in range(n):
            params, policy, eq = sampler.draw()
            worst = max(abs(r) for r in foc_residuals(params, policy, eq.state))
            count += 1
            if worst > tol:
                failed += 1
    return CheckBlock("first-order-condition residuals", count - failed, failed)


def check_jacobians(seed: int, n: int, rel_tol: float = 1e-6, abs_floor: float = 1e-9) -> CheckBlock:
    failed = 0
    count = 0
    for offset, mode in enumerate((RDMode.PROCESS_ONLY, RDMode.PRODUCT_ONLY)):
        sampler = InteriorSampler(seed=seed + 31 + offset, mode=mode, b_range=(0.02, 0.4))
        for _ in range(n):
            params, policy, eq = sampler.draw()
            analytic = analytic_jacobian(params, policy, eq)
            fd = finite_difference_jacobian(params, policy, mode)
            bad = False
            for col in analytic.columns:
                for row in analytic.rows:
                    a = analytic.entry(row, col)
                    f = fd.entry(row, col)
                    if abs(a - f) > max(abs_floor, rel_tol * abs(a)):
                        bad = True
            count += 1
            if bad:
                failed += 1
    return CheckBlock("analytic jacobians vs finite differences", count - failed, failed)


def check_sign_propositions(seed: int, n: int) -> CheckBlock:
    failed = 0
    total = 0
    for offset, mode in enumerate((RDMode.PROCESS_ONLY, RDMode.PRODUCT_ONLY)):
        for regime, m_range in (("substitutes", (0.01, 0.3)), ("independent", (0.0, 0.0)),
                                ("complements", (-0.3, -0.01))):
            sampler = InteriorSampler(seed=seed + 53 + offset, mode=mode, m_range=m_range)
            report = verify_sign_propositions(sampler, n)
            total += len(report.clauses)
            failed += len(report.failures())
    return CheckBlock("comparative-statics sign clauses", total - failed, failed)


def check_foreign_best_response(seed: int, n: int, tol: float = 1e-6) -> CheckBlock:
    """Closed-form foreign subsidy response vs numeric maximisation, plus
    tax invariance and strategic complementarity."""
    rng = np.random.default_rng(seed)
    failed = 0
    count = 0
    for mode in (RDMode.PROCESS_ONLY, RDMode.PRODUCT_ONLY):
        for _ in range(n):
            params = ModelParams(
                b1=rng.uniform(0.0, 0.35),
                b2=rng.uniform(0.0, 0.35),
                m=rng.uniform(0.05, 0.3),
            )
            home_sub = rng.uniform(0.0, 0.4)
            closed = foreign_best_response(params, mode, home_sub)
            numeric = foreign_best_response_numeric(params, mode, home_sub, t=0.05)
            numeric_t = foreign_best_response_numeric(params, mode, home_sub, t=0.15)
            complement = foreign_best_response(params, mode, home_sub + 0.2)
            ok = (
                abs(closed - numeric) < tol
                and abs(numeric - numeric_t) < 1e-8
                and complement > closed
            )
            count += 1
            if not ok:
                failed += 1
    return CheckBlock("foreign best-response closed form vs numeric", count - failed, failed)


def check_nash_identities(seed: int, n: int) -> CheckBlock:
    """dW decomposition and epsilon certificate on a few Nash solves."""
    rng = np.random.default_rng(seed)
    failed = 0
    count = 0
    for mode in (RDMode.PROCESS_ONLY, RDMode.PRODUCT_ONLY):
        for _ in range(max(1, n)):
            params = ModelParams(
                b1=0.0, b2=0.0, m=float(rng.uniform(0.0, 0.2))
            ).with_network(float(rng.uniform(0.0, 0.3)))
            nash = solve_nash(params, mode)
            ok = (
                nash.dW == nash.dW1 + nash.dW2
                and nash.dW1 == nash.eq.welfare.W1 - nash.lf.welfare.W1
                and nash.epsilon_check < 1e-5
                and nash.converged
            )
            count += 1
            if not ok:
                failed += 1
    return CheckBlock("Nash welfare decomposition and epsilon certificate", count - failed, failed)


def check_csv_roundtrip(seed: int, n: int, tmp_dir=None) -> CheckBlock:
    """Emitted CSV parses back bit-for-bit."""
    import tempfile
    from pathlib import Path

    rng = np.random.default_rng(seed)
    rows = []
    for i in range(max(2, n)):
        feasible = i % 3 != 2
        value = lambda: float(rng.uniform(-1, 1))  # noqa: E731
        nan = float("nan")
        rows.append(
            SweepRow(
                b=round(0.01 * i, 10),
                m=0.05,
                mode="process",
                t_star=value() if feasible else nan,
                s1_star=value() if feasible else nan,
                s2_star=value() if feasible else nan,
                sigma1_star=0.0 if feasible else nan,
                sigma2_star=0.0 if feasible else nan,
                q1=value() if feasible else nan,
                q2=value() if feasible else nan,
                W1_nash=value() if feasible else nan,
                W2_nash=value() if feasible else nan,
                W1_lf=value(),
                W2_lf=value(),
                dW1=value() if feasible else nan,
                dW2=value() if feasible else nan,
                dW=value() if feasible else nan,
                feasible=feasible,
                binding_constraint="" if feasible else "positive_quantities",
            )
        )
    with tempfile.TemporaryDirectory(dir=tmp_dir) as tmp:
        path = Path(tmp) / "roundtrip.csv"
        write_sweep_csv(rows, path)
        back = read_sweep_csv(path)
    failed = 0
    for a, b in zip(rows, back):
        for name in SweepRow.__dataclass_fields__:
            va, vb = getattr(a, name), getattr(b, name)
            same = (va == vb) or (
                isinstance(va, float) and isinstance(vb, float) and math.isnan(va) and math.isnan(vb)
            )
            if not same:
                failed += 1
    return CheckBlock("sweep CSV bitwise round trip", len(rows) - failed, failed)


def run_check_suite(seed: int = 42, samples: int = 60) -> CheckReport:
    """Run every block; `samples` scales the per-block sampling effort."""
    n = samples
    blocks = [
        check_cs_identity(seed, n),
        check_welfare_identities(seed + 1, n),
        check_symmetry(seed + 2, n),
        check_oracle_equivalence(seed + 3, max(5, n // 2)),
        check_specialisation(seed + 4, max(5, n // 2)),
        check_foc_residuals(seed + 5, max(5, n // 2)),
        check_jacobians(seed + 6, max(5, n // 3)),
        check_sign_propositions(seed + 7, max(10, n)),
        check_foreign_best_response(seed + 8, max(3, n // 10)),
        check_nash_identities(seed + 9, max(2, n // 20)),
        check_csv_roundtrip(seed + 10, 9),
    ]
    return CheckReport(seed=seed, blocks=blocks)
