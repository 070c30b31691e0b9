"""Command-line interface.

Subcommands: stage2 (one equilibrium), nash (one policy equilibrium), sweep
(b-grid CSV plus optional charts), check (invariant suite).  Exit codes:
0 ok, 1 solver failure, 2 validation or parse error, 3 check-suite failure.
Flags override config-file keys, which override defaults; the output
directory can also come from the NETCOURNOT_OUT_DIR environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .checks import run_check_suite
from .config import RunConfig, parse_config
from .csvio import write_sweep_csv
from .exceptions import ConfigError, NetCournotError
from .model import ModelParams, PolicyVector, RDMode
from .policy_game import solve_nash
from .stage2 import solve_stage2
from .sweep import sweep_b

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_VALIDATION = 2
EXIT_SUITE = 3


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="flat key=value config file")
    parser.add_argument("--mode", choices=[m.value for m in RDMode], default=None)
    parser.add_argument("--m", dest="m_values", default=None,
                        help="comma-separated substitutability values, e.g. 0.05,0.25")
    parser.add_argument("--b-min", dest="b_min", type=float, default=None)
    parser.add_argument("--b-max", dest="b_max", type=float, default=None)
    parser.add_argument("--b-step", dest="b_step", type=float, default=None)
    parser.add_argument("--a", type=float, default=None, help="demand intercept")
    parser.add_argument("--c1", type=float, default=None)
    parser.add_argument("--c2", type=float, default=None)
    parser.add_argument("--phi", type=float, default=None, help="process R&D cost parameter (both firms)")
    parser.add_argument("--theta", type=float, default=None, help="product R&D cost parameter (both firms)")
    parser.add_argument("--out-dir", dest="out_dir", type=Path, default=None)
    parser.add_argument("--plots", dest="emit_plots", action="store_true", default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--samples", dest="check_samples", type=int, default=None,
                        help="sampling effort of the check suite")
    parser.add_argument("--nash-tol", dest="nash_tol", type=float, default=None)
    parser.add_argument("--fp-tol", dest="fp_tol", type=float, default=None)
    parser.add_argument("--epsilon-tol", dest="epsilon_tol", type=float, default=None)
    parser.add_argument("--fd-step", dest="fd_step", type=float, default=None)


def _flags_from_args(args: argparse.Namespace) -> dict:
    flags: dict = {}
    for key in ("b_min", "b_max", "b_step", "a", "c1", "c2", "phi", "theta",
                "seed", "emit_plots", "check_samples",
                "nash_tol", "fp_tol", "epsilon_tol", "fd_step"):
        value = getattr(args, key, None)
        if value is not None:
            flags[key] = value
    if getattr(args, "mode", None) is not None:
        flags["mode"] = RDMode(args.mode)
    if getattr(args, "m_values", None) is not None:
        flags["m_values"] = tuple(float(p) for p in str(args.m_values).replace(",", " ").split())
    if getattr(args, "out_dir", None) is not None:
        flags["out_dir"] = args.out_dir
    elif os.environ.get("NETCOURNOT_OUT_DIR"):
        flags["out_dir"] = Path(os.environ["NETCOURNOT_OUT_DIR"])
    return flags


def _point_policy(config: RunConfig, args: argparse.Namespace) -> PolicyVector:
    mode = config.mode
    return PolicyVector(
        t=args.t,
        s1=args.s1 if mode.process_active else 0.0,
        s2=args.s2 if mode.process_active else 0.0,
        sigma1=args.sigma1 if mode.product_active else 0.0,
        sigma2=args.sigma2 if mode.product_active else 0.0,
        mode=mode,
    )


def _point_params(config: RunConfig, args: argparse.Namespace) -> ModelParams:
    b = args.b if args.b is not None else config.b_min
    return config.params(b=b, m=args.point_m if args.point_m is not None else config.m_values[0])


def _print_equilibrium(eq) -> None:
    st, wb, fz = eq.state, eq.welfare, eq.feasibility
    print(f"quantities   q1={st.q1:.6f}  q2={st.q2:.6f}")
    print(f"process R&D  k1={st.k1:.6f}  k2={st.k2:.6f}")
    print(f"product R&D  r1={st.r1:.6f}  r2={st.r2:.6f}")
    print(f"prices       p1={wb.p1:.6f}  p2={wb.p2:.6f}")
    print(f"profits      pi1={wb.pi1:.6f}  pi2={wb.pi2:.6f}")
    print(f"surplus      cs={wb.cs:.6f}  taxrev={wb.taxrev:.6f}")
    print(f"welfare      W1={wb.W1:.6f}  W2={wb.W2:.6f}")
    flag = "interior" if fz.interior else f"NON-INTERIOR ({fz.binding()})"
    print(f"feasibility  delta={fz.delta:.6f}  {flag}")


def _cmd_stage2(config: RunConfig, args: argparse.Namespace) -> int:
    params = _point_params(config, args)
    policy = _point_policy(config, args)
    eq = solve_stage2(params, policy)
    print(f"stage-2 equilibrium (mode={config.mode.value}, b={params.b1:g}, m={params.m:g})")
    _print_equilibrium(eq)
    return EXIT_OK


def _cmd_nash(config: RunConfig, args: argparse.Namespace) -> int:
    params = _point_params(config, args)
    nash = solve_nash(params, config.mode, tol=config.nash_tol)
    pol = nash.policy
    print(f"Nash policy equilibrium (mode={config.mode.value}, b={params.b1:g}, m={params.m:g})")
    print(f"instruments  t={pol.t:.6f} s1={pol.s1:.6f} s2={pol.s2:.6f} "
          f"sigma1={pol.sigma1:.6f} sigma2={pol.sigma2:.6f}")
    print(f"converged    {nash.converged} after {nash.iterations} rounds; "
          f"epsilon_check={nash.epsilon_check:.3e}")
    print(f"welfare      W1={nash.eq.welfare.W1:.6f} W2={nash.eq.welfare.W2:.6f}")
    print(f"laissez-faire W1={nash.lf.welfare.W1:.6f} W2={nash.lf.welfare.W2:.6f}")
    print(f"differences  dW1={nash.dW1:.6f} dW2={nash.dW2:.6f} dW={nash.dW:.6f}")
    _print_equilibrium(nash.eq)
    return EXIT_OK


def _cmd_sweep(config: RunConfig, args: argparse.Namespace) -> int:
    rows = sweep_b(
        config.params(),
        config.b_grid(),
        list(config.m_values),
        config.mode,
        epsilon_tol=config.epsilon_tol,
    )
    out = Path(config.out_dir)
    csv_path = write_sweep_csv(rows, out / f"sweep_{config.mode.value}.csv")
    feasible = sum(1 for r in rows if r.feasible)
    print(f"wrote {len(rows)} rows ({feasible} feasible) to {csv_path}")
    if config.emit_plots:
        from .charts import render_charts

        for path in render_charts(rows, out):
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_check(config: RunConfig, args: argparse.Namespace) -> int:
    report = run_check_suite(seed=config.seed, samples=config.check_samples)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_SUITE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netcournot",
        description="Cournot equilibria with network externalities and industrial-policy competition",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("stage2", "solve one stage-2 equilibrium at a fixed policy"),
        ("nash", "solve the two-government Nash policy equilibrium at one point"),
        ("sweep", "sweep the b grid and write the results CSV"),
        ("check", "run the seeded invariant/property suite"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_config_flags(p)
        if name in ("stage2", "nash"):
            p.add_argument("--b", type=float, default=None, help="common network strength b1=b2")
            p.add_argument("--point-m", dest="point_m", type=float, default=None,
                           help="substitutability at this point (defaults to first m value)")
        if name == "stage2":
            p.add_argument("--t", type=float, default=0.0)
            p.add_argument("--s1", type=float, default=0.0)
            p.add_argument("--s2", type=float, default=0.0)
            p.add_argument("--sigma1", type=float, default=0.0)
            p.add_argument("--sigma2", type=float, default=0.0)
    return parser


_COMMANDS = {
    "stage2": _cmd_stage2,
    "nash": _cmd_nash,
    "sweep": _cmd_sweep,
    "check": _cmd_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = parse_config(file=args.config, flags=_flags_from_args(args))
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return _COMMANDS[args.command](config, args)
    except (ConfigError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NetCournotError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
