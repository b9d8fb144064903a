"""Command-line interface: schedules, norms, evolution and study commands.

Exit codes: 0 success, 2 validation failure, 3 a checked scientific
inequality failed, 4 resource cap exceeded.  Outputs are CSV/text files with
floats printed at 17 significant digits; identical inputs give byte-identical
outputs.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import experiments, model as model_mod
from .dense import ResourceCapError, embed, operator_norm
from .experiments import DegenerateFitError, format_value, write_report_csv
from .model import PauliString, anchored_norm, assemble, interaction_norm
from .schedule import (
    check_order_conditions,
    level_coefficients,
    merge_adjacent,
    path_trace,
    recursion_depth,
    suzuki_schedule,
    total_absolute_time,
    total_time_closed_form,
    write_path_trace,
    write_schedule,
)
from .simulator import EvolutionPlan, dump_operator, error_norm, heisenberg

BUILTIN_MODELS = ("tfim", "longrange")


def _add_model_args(parser):
    parser.add_argument(
        "--model",
        required=True,
        help="path to a JSON model file, or a builtin: tfim | longrange",
    )
    parser.add_argument("--length", type=int, default=8, help="builtin chain length")
    parser.add_argument("--coupling", type=float, default=1.0, help="tfim ZZ coupling")
    parser.add_argument("--field", type=float, default=1.05, help="tfim transverse field")
    parser.add_argument(
        "--boundary", choices=("open", "periodic"), default="open", help="tfim boundary"
    )
    parser.add_argument("--rate", type=float, default=1.0, help="longrange decay rate")
    parser.add_argument("--stretch", type=float, default=0.5, help="longrange stretch exponent")
    parser.add_argument(
        "--observable-site",
        type=int,
        default=None,
        help="override the observable with Z on this site",
    )
    parser.add_argument(
        "--decomposition",
        choices=("auto", "even-odd", "greedy"),
        default="auto",
        help="layer decomposition (auto tries even-odd, then greedy)",
    )


def _add_common_args(parser):
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized diagnostics")


def _load_model(args) -> model_mod.SpinModel:
    if args.model == "tfim":
        spec = experiments.tfim_chain(
            args.length, coupling=args.coupling, field=args.field, boundary=args.boundary
        )
    elif args.model == "longrange":
        spec = experiments.long_range_chain(
            args.length, rate=args.rate, stretch=args.stretch
        )
    else:
        spec = model_mod.load_model(args.model)
    if args.observable_site is not None:
        if args.observable_site not in spec.graph.vertices:
            raise ValueError(f"observable site {args.observable_site} not on the lattice")
        spec = model_mod.SpinModel(
            graph=spec.graph,
            interaction=spec.interaction,
            decay=spec.decay,
            observable=PauliString(1.0, (args.observable_site,), "Z"),
            name=spec.name,
        )
    return spec


def _decompose(spec, choice: str):
    if choice == "even-odd":
        return model_mod.decompose_even_odd(spec.interaction, spec.graph)
    if choice == "greedy":
        return model_mod.decompose_greedy_coloring(spec.interaction)
    try:
        return model_mod.decompose_even_odd(spec.interaction, spec.graph)
    except ValueError:
        return model_mod.decompose_greedy_coloring(spec.interaction)


def _out_path(args, filename: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, filename)


def _write_quantities(path, pairs) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("quantity,value\n")
        for name, value in pairs:
            fh.write(f"{name},{format_value(value)}\n")


def _int_list(text: str):
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str):
    return [float(x) for x in text.split(",") if x.strip()]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_schedule(args) -> int:
    sched = suzuki_schedule(args.k, args.m, args.r)
    merged = merge_adjacent(sched)
    write_schedule(sched, _out_path(args, "schedule.txt"))
    write_path_trace(path_trace(sched), _out_path(args, "path_trace.csv"))

    depth = recursion_depth(args.m)
    sums = sched.layer_sums()
    rows = [
        ("entries", len(sched)),
        ("merged_entries", len(merged)),
        ("palindrome", int(sched.is_palindrome())),
        ("max_layer_sum_deviation", max(abs(s - 1.0) for s in sums.values())),
        ("total_absolute_time", total_absolute_time(sched)),
        ("total_time_closed_form", total_time_closed_form(args.k, depth, args.r)),
    ]
    for level in range(1, depth + 1):
        report = check_order_conditions(level_coefficients(level, args.r), level)
        rows.append((f"sum_residual_level_{level}", report.sum_residual))
        rows.append((f"power_residual_level_{level}", report.power_residual))
    _write_quantities(_out_path(args, "conditions.csv"), rows)
    print(
        f"schedule k={args.k} m={args.m} r={args.r} "
        f"merged_entries={len(merged)} total_time={total_absolute_time(sched):.17g}"
    )
    return 0


def cmd_converge(args) -> int:
    spec = _load_model(args)
    decomposition = _decompose(spec, args.decomposition)
    report = experiments.convergence_study(
        spec, decomposition, None, args.t, args.m, args.r, _int_list(args.n_list)
    )
    write_report_csv(report, _out_path(args, "convergence.csv"))
    print(
        f"alpha_hat={report.fitted_order:.17g} expected={report.alpha_expected} "
        f"r_squared={report.r_squared:.17g}"
    )
    return 0


def cmd_step(args) -> int:
    spec = _load_model(args)
    decomposition = _decompose(spec, args.decomposition)
    report = experiments.single_step_order(
        spec, decomposition, None, args.m, args.r, _float_list(args.mu_list)
    )
    write_report_csv(report, _out_path(args, "step.csv"))
    print(
        f"exponent={report.observed_exponent:.17g} expected={report.expected_exponent}"
    )
    return 0


def cmd_lightcone(args) -> int:
    spec = _load_model(args)
    report = experiments.lightcone_study(
        spec, None, _float_list(args.t_list), threshold=args.threshold
    )
    write_report_csv(report, _out_path(args, "lightcone.csv"))
    print("r_star " + " ".join(f"t={t:g}:{r}" for t, r in report.r_star))
    return 0


def cmd_depth(args) -> int:
    spec = _load_model(args)
    decomposition = _decompose(spec, args.decomposition)
    report = experiments.depth_search(
        spec, decomposition, None, args.t, args.m, args.r, args.epsilon
    )
    write_report_csv(report, _out_path(args, "depth.csv"))
    print(
        f"n_min={report.n_min} factors_per_step={report.factors_per_step} "
        f"total_depth={report.total_depth}"
    )
    return 0


def cmd_truncate(args) -> int:
    spec = _load_model(args)
    report = experiments.truncation_study(
        spec, _int_list(args.radii), args.b_prime, args.t
    )
    write_report_csv(report, _out_path(args, "truncation.csv"))
    max_dyn = max(row[3] for row in report.rows)
    print(f"bound_holds={report.all_hold} max_dyn_error={max_dyn:.17g}")
    if not report.all_hold:
        print("truncation norm bound violated", file=sys.stderr)
        return 3
    return 0


def cmd_norm(args) -> int:
    spec = _load_model(args)
    value = interaction_norm(spec.interaction, spec.decay, spec.graph)
    rows = [("interaction_norm", value)]
    if args.anchor:
        anchor = _int_list(args.anchor)
        rows.append(
            ("anchored_norm", anchored_norm(spec.interaction, spec.decay, anchor, spec.graph))
        )
    _write_quantities(_out_path(args, "norm.csv"), rows)
    print(f"interaction_norm={value:.17g}")
    return 0


def cmd_evolve(args) -> int:
    spec = _load_model(args)
    decomposition = _decompose(spec, args.decomposition)
    region = spec.graph.vertices
    obs = embed(spec.observable_or_raise().matrix(), region)
    exact = heisenberg(assemble(spec.interaction, region), args.t, obs)
    plan = EvolutionPlan(decomposition, region)
    sched = suzuki_schedule(decomposition.k, args.m, args.r)
    approx = plan.run(sched, args.t / args.n, args.n, obs)
    error = error_norm(exact, approx)
    if args.dump_matrix:
        dump_operator(approx, _out_path(args, args.dump_matrix))
    _write_quantities(
        _out_path(args, "evolve.csv"),
        [
            ("t", args.t),
            ("n", args.n),
            ("mu", args.t / args.n),
            ("trotter_error", error),
            ("exact_norm", operator_norm(exact.matrix)),
            ("schedule_norm", operator_norm(approx.matrix)),
        ],
    )
    print(f"error={error:.17g}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trotterforge",
        description="Product-formula schedules and exact-simulation studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="emit a schedule, its path trace and checks")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, default=3)
    _add_common_args(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("converge", help="error against exact evolution over n")
    _add_model_args(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--n-list", default="4,8,16,32,64")
    _add_common_args(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("step", help="one-step error over a halving mu sequence")
    _add_model_args(p)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--mu-list", default="0.4,0.2,0.1,0.05,0.025")
    _add_common_args(p)
    p.set_defaults(func=cmd_step)

    p = sub.add_parser("lightcone", help="leakage profiles of evolved observables")
    _add_model_args(p)
    p.add_argument("--t-list", default="0.5,1,2")
    p.add_argument("--threshold", type=float, default=experiments.LIGHTCONE_THRESHOLD)
    _add_common_args(p)
    p.set_defaults(func=cmd_lightcone)

    p = sub.add_parser("depth", help="minimal step count reaching a target error")
    _add_model_args(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--epsilon", type=float, required=True)
    _add_common_args(p)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("truncate", help="range truncation bound and dynamical error")
    _add_model_args(p)
    p.add_argument("--radii", default="1,2,3,4,5,6,7,8")
    p.add_argument("--b-prime", type=float, default=0.5)
    p.add_argument("--t", type=float, default=0.5)
    _add_common_args(p)
    p.set_defaults(func=cmd_truncate)

    p = sub.add_parser("norm", help="interaction norms of a model")
    _add_model_args(p)
    p.add_argument("--anchor", default="", help="comma-separated anchor sites")
    _add_common_args(p)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("evolve", help="schedule evolution error at a single n")
    _add_model_args(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--n", type=int, default=8)
    p.add_argument(
        "--dump-matrix",
        default="",
        help="also dump the evolved matrix to this file (debug; raw complex doubles)",
    )
    _add_common_args(p)
    p.set_defaults(func=cmd_evolve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, DegenerateFitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
