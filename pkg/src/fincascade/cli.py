"""Command line interface.

Verbs: gen-network, validate, simulate, analyze, equilibrium, estimate,
design-control, run-preset.  Exit codes: 0 success, 2 configuration or
input problem, 3 numerical failure, 4 I/O failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from .analysis import (
    check_decoupling,
    check_offset_nonneg,
    check_row_sum_stability,
    equilibrium,
    report_as_dict,
)
from .cascade_estimate import (
    estimate_from_network,
    write_estimate_csv,
    write_estimate_summary,
)
from .control import default_slack, design_K, design_u1
from .dynamics import simulate, write_events_json, write_trajectory_csv
from .errors import (
    ConfigError,
    DegenerateScale,
    FincascadeError,
    HeterogeneousWeights,
    InfeasibleEps,
    InvalidSpec,
    LpInfeasible,
    LpUnbounded,
    NetworkFormatError,
    NonPositiveExternalFraction,
    NumericalBreakdown,
    SingularMatrix,
)
from .harness import (
    InitialSpec,
    initial_errors,
    load_config,
    preset_baseline100,
    run,
)
from .network import (
    FinancialNetwork,
    NetworkGenSpec,
    external_fractions,
    generate_cross_holdings,
    load_network,
    save_network,
    validate,
)

_CONFIG_ERRORS = (ConfigError, InvalidSpec, NetworkFormatError)
_NUMERICAL_ERRORS = (
    NumericalBreakdown,
    SingularMatrix,
    NonPositiveExternalFraction,
    LpInfeasible,
    LpUnbounded,
    InfeasibleEps,
    DegenerateScale,
    HeterogeneousWeights,
)


def _parse_failed(arg, n):
    signs = np.ones(n)
    if not arg:
        return signs
    for tok in arg.split(","):
        idx = int(tok)
        if not 0 <= idx < n:
            raise ConfigError(f"failed index {idx} out of range for n={n}")
        signs[idx] = -1.0
    return signs


def _load(path):
    net = load_network(path)
    issues = validate(net)
    if issues:
        raise ConfigError("; ".join(issues))
    return net, external_fractions(net)


def _cmd_gen_network(args):
    spec = NetworkGenSpec(
        kind=args.net_kind,
        n=args.n,
        link_prob=args.link_prob,
        exponent=args.rho,
        weight=args.weight,
        seed=args.seed[0] if args.seed else 0,
    )
    gh = generate_cross_holdings(spec)
    n = args.n
    net = FinancialNetwork(
        cross_holdings=gh.cross_holdings,
        asset_shares=np.eye(n),
        prices=args.price_start + args.price_step * np.arange(n),
        thresholds=np.full(n, args.threshold),
        failure_cost=args.failure_cost,
    )
    save_network(net, args.out)
    print(
        f"wrote {args.out}: n={n}, mean out-degree {gh.mean_out_degree:.2f},"
        f" weight scale {gh.weight_scale:.4g}"
    )
    return 0


def _cmd_validate(args):
    net = load_network(args.net)
    issues = validate(net)
    for issue in issues:
        print(issue)
    if issues:
        return 2
    ext = external_fractions(net)
    print(f"ok: n={net.n_companies}, m={net.n_assets}, min ext fraction {ext.min():.4f}")
    return 0


def _cmd_simulate(args):
    net, ext = _load(args.net)
    x0 = initial_errors(
        InitialSpec(preset=args.x0_preset, lo=args.x0_lo, hi=args.x0_hi),
        net.n_companies,
    )
    traj = simulate(net, ext, x0, args.horizon)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_trajectory_csv(args.out + "/trajectory.csv", traj)
        write_events_json(args.out + "/events.json", traj)
    failed = int((traj.errors[-1] < 0.0).sum())
    print(f"terminal failed: {failed}/{net.n_companies} after {args.horizon} steps")
    return 0


def _cmd_analyze(args):
    net, ext = _load(args.net)
    signs = _parse_failed(args.failed, net.n_companies)
    rep_f, rep_h = check_offset_nonneg(net, ext, signs)
    reports = [rep_f, rep_h, check_decoupling(net, signs), check_row_sum_stability(net, ext)]
    for rep in reports:
        word = "holds" if rep.holds else f"violated ({len(rep.violations)} subjects)"
        print(f"{rep.condition}: {word}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump([report_as_dict(r) for r in reports], fh, indent=1, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_equilibrium(args):
    net, ext = _load(args.net)
    signs = _parse_failed(args.failed, net.n_companies)
    eq = equilibrium(net, ext, signs)
    print(f"consistent: {eq.consistent}  stable: {eq.stable}")
    print(f"market value range: [{eq.v_star.min():.4f}, {eq.v_star.max():.4f}]")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(
                {
                    "consistent": eq.consistent,
                    "stable": eq.stable,
                    "v_star": [float(v) for v in eq.v_star],
                },
                fh,
                indent=1,
                sort_keys=True,
            )
            fh.write("\n")
    return 0


def _cmd_estimate(args):
    net, ext = _load(args.net)
    x0 = None
    if args.xi_bar is None:
        x0 = initial_errors(
            InitialSpec(preset=args.x0_preset, lo=args.x0_lo, hi=args.x0_hi),
            net.n_companies,
        )
    est = estimate_from_network(
        net, ext, xi_bar=args.xi_bar, x0=x0, force_mean_weight=args.force_mean_weight
    )
    print(f"cascade size estimate: {est.estimate}/{net.n_companies}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_estimate_csv(args.out + "/estimate.csv", est)
        write_estimate_summary(args.out + "/estimate_summary.json", est)
    return 0


def _cmd_design_control(args):
    net, ext = _load(args.net)
    signs = _parse_failed(args.failed, net.n_companies)
    xi = default_slack(net)
    u1 = design_u1(net, ext, signs, xi)
    line = f"u1 range: [{u1.min():.4f}, {u1.max():.4f}]"
    if args.with_gain:
        K = design_K(net, ext, signs, args.epsilon)
        from .dynamics import orthant_system

        closed = orthant_system(net, ext, signs).coupling + ext[:, None] * K
        line += f"  closed-loop max row sum: {closed.sum(axis=1).max():.6f}"
    print(line)
    if args.out:
        doc = {"u1": [float(v) for v in u1]}
        if args.with_gain:
            doc["K_tilde"] = [
                [int(i), int(j), float(K[i, j])]
                for i, j in zip(*np.nonzero(K))
            ]
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_run_preset(args):
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = preset_baseline100()
    if args.net_kind:
        cfg.net_kind = args.net_kind
        cfg.network_file = None
    if args.link_prob is not None:
        cfg.link_prob = args.link_prob
    if args.rho is not None:
        cfg.exponent = args.rho
    if args.seed:
        cfg.seeds = list(args.seed)
    if args.out:
        cfg.outputs = args.out
    if args.horizon is not None:
        cfg.horizon = args.horizon
    if args.mode:
        cfg.control.mode = args.mode
    if args.activation_t is not None:
        cfg.control.activation_t = args.activation_t
    if args.x0_preset:
        cfg.x0.preset = args.x0_preset
    summaries = run(cfg)
    mean_frac = float(np.mean([s.failure_fraction for s in summaries]))
    print(
        f"{len(summaries)} seeds: mean failure fraction {mean_frac:.3f},"
        f" outputs in {cfg.outputs}"
    )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fincascade",
        description="Cascading failure simulation and control for cross-holding networks",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen-network", help="generate a random holding network file")
    p.add_argument("--net-kind", choices=["uniform", "powerlaw"], default="uniform")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--link-prob", type=float, default=0.2)
    p.add_argument("--rho", type=float, default=2.1, help="power-law exponent")
    p.add_argument("--weight", type=float, default=None)
    p.add_argument("--seed", type=int, action="append")
    p.add_argument("--threshold", type=float, default=100.0)
    p.add_argument("--failure-cost", type=float, default=5000.0)
    p.add_argument("--price-start", type=float, default=1.0)
    p.add_argument("--price-step", type=float, default=6.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_network)

    p = sub.add_parser("validate", help="check a network file's invariants")
    p.add_argument("--net", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("simulate", help="run the open-loop dynamics")
    p.add_argument("--net", required=True)
    p.add_argument("--horizon", type=int, default=300)
    p.add_argument("--x0-preset", choices=["alternating", "linspace"], default="alternating")
    p.add_argument("--x0-lo", type=float, default=1.0)
    p.add_argument("--x0-hi", type=float, default=5000.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="evaluate structural conditions")
    p.add_argument("--net", required=True)
    p.add_argument("--failed", default="", help="comma separated failed indices")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("equilibrium", help="fixed point for one signature")
    p.add_argument("--net", required=True)
    p.add_argument("--failed", default="")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_equilibrium)

    p = sub.add_parser("estimate", help="cascade size estimate")
    p.add_argument("--net", required=True)
    p.add_argument("--xi-bar", type=float, default=None)
    p.add_argument("--x0-preset", choices=["alternating", "linspace"], default="alternating")
    p.add_argument("--x0-lo", type=float, default=1.0)
    p.add_argument("--x0-hi", type=float, default=5000.0)
    p.add_argument("--force-mean-weight", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("design-control", help="feedforward and gain synthesis")
    p.add_argument("--net", required=True)
    p.add_argument("--failed", default="")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--with-gain", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_design_control)

    p = sub.add_parser("run-preset", help="run a full scenario over seeds")
    p.add_argument("--preset", choices=["baseline100"], default="baseline100")
    p.add_argument("--config", help="scenario config JSON overriding the preset")
    p.add_argument("--net-kind", choices=["uniform", "powerlaw"])
    p.add_argument("--link-prob", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--seed", type=int, action="append")
    p.add_argument("--out")
    p.add_argument("--horizon", type=int)
    p.add_argument("--activation-t", type=int)
    p.add_argument("--mode", choices=["open", "u1", "u1u2"])
    p.add_argument("--x0-preset", choices=["alternating", "linspace"])
    p.set_defaults(func=_cmd_run_preset)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except FincascadeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
