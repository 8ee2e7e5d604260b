"""Command-line interface.

Subcommands: ``gen``, ``train``, ``eval``, ``sweep``, ``approx``, ``bounds``.
Every command accepts ``--config FILE`` (flat ``key=value`` lines, keys named
like the long flags) whose values are overridden by explicit flags.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import KernhalfError
from .evaluation import (
    DEFAULT_B_GRID,
    GeneratorSpec,
    cross_validate_b,
    error_report,
    generate,
    l_for_margin,
    sample_size_hb,
    sample_size_hphi,
)
from .formats import (
    FORMAT_VERSION,
    dumps,
    load_model,
    read_dataset_csv,
    read_json,
    save_model,
    write_dataset_csv,
    write_json,
    write_rows_csv,
)
from .kernel import KernelSpec, gram
from .polyspace import approx_sigmoid_chebyshev, b_bound_sigmoid, erf_taylor_coeffs
from .solver import BATCHES, SCHEDULES, SolverOptions, solve_erm
from .transfer import TransferKind

USAGE_ERROR = 2
RUNTIME_ERROR = 1


class UsageError(Exception):
    pass


# -- argument types -------------------------------------------------------------


def positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def seed_int(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def positive_float(text):
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {text}")
    return value


def open_unit(text):
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return value


def float_list(text):
    if text.strip() == "":
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def read_config(path):
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.lstrip("-").replace("-", "_")] = value
    return cfg


# -- commands -------------------------------------------------------------------


def _resolved(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")}


def cmd_gen(args):
    if args.w_star:
        w = np.asarray(args.w_star, dtype=float)
        if w.size != args.dim or not np.linalg.norm(w) > 0:
            raise UsageError("--w-star must be a nonzero vector with --dim entries")
        spec = GeneratorSpec(args.dim, tuple(w / np.linalg.norm(w)),
                             TransferKind.parse(args.transfer, args.L), args.label_noise, args.seed)
    else:
        spec = GeneratorSpec.with_random_direction(
            args.dim, TransferKind.parse(args.transfer, args.L), args.label_noise, args.seed
        )
    data = generate(spec, args.m)
    write_dataset_csv(data, args.out)
    write_json({"format_version": FORMAT_VERSION, "generator": spec.to_dict(),
                "m": args.m, "config": _resolved(args)}, _sidecar(args.out))
    ones = int(data.y.sum())
    print(f"wrote {args.out}: m={len(data)} dim={data.dim} "
          f"label balance {ones}/{len(data)} = {ones / len(data):.4f}")
    return 0


def _sidecar(path):
    p = Path(path)
    return p.with_name(p.name + ".meta.json")


def _solver_options(args):
    return SolverOptions(
        max_iters=args.iters,
        step_schedule=args.schedule,
        step_size=args.step,
        seed=args.seed,
        tolerance=args.tolerance,
        batch=args.batch,
    )


def _budget(args):
    if args.B is not None and args.log_B is not None:
        raise UsageError("give either --B or --log-B, not both")
    if args.log_B is not None:
        try:
            B = math.exp(args.log_B)
        except OverflowError:
            B = math.inf
    elif args.B is not None:
        B = args.B
    else:
        raise UsageError("--B (or --log-B) is required")
    if not math.isfinite(B):
        raise UsageError(
            "B exceeds the floating-point range; worst-case budgets are not trainable. "
            "Pick B by cross-validation instead (see the `sweep` command)."
        )
    if not B > 0:
        raise UsageError("B must be positive")
    return B


def cmd_train(args):
    B = _budget(args)
    _require(args, "data", "out")
    data = read_dataset_csv(args.data)
    opts = _solver_options(args)
    pred, report = solve_erm(gram(data.X, KernelSpec(nu=args.nu)), data.y, B, opts)
    pred.metadata.update({
        "objective": report.final_objective,
        "iters_used": report.iters_used,
        "constraint_active": report.constraint_active,
        "config": _resolved(args),
    })
    save_model(pred, args.out)
    print(f"final objective {report.final_objective!r}")
    print(f"constraint active: {'yes' if report.constraint_active else 'no'} "
          f"(alpha'K alpha = {pred.squared_norm():.6g}, B = {B!r})")
    print(f"iterations: {report.iters_used}")
    return 0


def cmd_eval(args):
    _require(args, "model", "data")
    pred = load_model(args.model)
    data = read_dataset_csv(args.data)
    if data.dim != pred.dim:
        raise KernhalfError(f"model is {pred.dim}-dimensional but the data is {data.dim}-dimensional")
    mus = args.mu or []
    w = None
    if mus:
        if args.w:
            w = np.asarray(args.w, dtype=float)
            w = w / np.linalg.norm(w)
        elif _sidecar(args.data).exists():
            w = np.asarray(read_json(_sidecar(args.data))["generator"]["w_star"])
        else:
            raise UsageError("margin errors need --w (or a generator sidecar next to the data)")
    report = error_report(pred, data, mus, w)
    out = report.to_dict()
    print(f"abs_error      {report.abs_error!r}")
    print(f"raw_abs_error  {report.raw_abs_error!r}")
    print(f"zero_one_error {report.zero_one_error!r}")
    for mu, err in report.margin_errors.items():
        print(f"margin_error[mu={mu!r}] {err!r}")
    if args.json:
        write_json(out, args.json)
    if args.csv:
        row = {k: v for k, v in out.items() if k != "margin_errors"}
        for mu, err in report.margin_errors.items():
            row[f"margin_error_{mu!r}"] = err
        write_rows_csv([row], args.csv)
    return 0


def cmd_sweep(args):
    _require(args, "out")
    opts = _solver_options(args)
    spec = KernelSpec(nu=args.nu)
    grid = args.grid if args.grid else list(DEFAULT_B_GRID)
    if any(b <= 0 for b in grid):
        raise UsageError("--grid values must be positive")
    seeds = range(args.seeds)
    base = read_dataset_csv(args.data) if args.data else None
    if base is None and args.dim is None:
        raise UsageError("sweep needs --data or generator flags (--dim ...)")
    rows = []
    for seed in seeds:
        if base is None:
            gspec = GeneratorSpec.with_random_direction(
                args.dim, TransferKind.parse(args.transfer, args.L), args.label_noise, seed
            )
            data = generate(gspec, args.m)
        else:
            data = base
        train, holdout = data.split(args.holdout, seed=[args.split_seed, seed])
        cv = cross_validate_b(train, holdout, grid, opts, spec)
        for row in cv.rows:
            rows.append({"format_version": FORMAT_VERSION, "seed": seed, **row,
                         "selected": row["B"] == cv.best_b})
        print(f"seed {seed}: best B = {cv.best_b!r}")
    write_rows_csv(rows, args.out)
    if args.json:
        write_json({"format_version": FORMAT_VERSION, "config": _resolved(args), "rows": rows},
                   args.json)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_approx(args):
    report = {"format_version": FORMAT_VERSION, "config": _resolved(args)}
    if args.kind in ("sig", "both"):
        approx = approx_sigmoid_chebyshev(args.L, args.eps, args.grid_size, args.max_degree)
        entry = approx.to_dict()
        entry["eps"] = args.eps
        if args.L >= 3:
            entry["log_b_bound"] = b_bound_sigmoid(args.L, args.eps).log_b
            entry["within_bound"] = approx.log_pb_norm <= entry["log_b_bound"]
        report["sigmoid"] = entry
        print(f"sigmoid L={args.L!r}: degree {approx.degree}, sup_error {approx.sup_error:.6g}, "
              f"ln(pb_norm) {approx.log_pb_norm:.6g}")
    if args.kind in ("erf", "both"):
        approx = erf_taylor_coeffs(args.L, args.degree, args.grid_size)
        report["erf"] = approx.to_dict()
        print(f"erf L={args.L!r}: degree {approx.degree}, sup_error {approx.sup_error:.6g}, "
              f"ln(pb_norm) {approx.log_pb_norm:.6g}")
    if args.out:
        write_json(report, args.out)
    else:
        sys.stdout.write(dumps(report))
    return 0


def _fmt_size(n):
    return f">= 2^63-1 (saturated)" if getattr(n, "overflow", False) else str(int(n))


def cmd_bounds(args):
    rows = []
    rows.append(("sample_size_hphi(L, eps, delta)", sample_size_hphi(args.L, args.eps, args.delta)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        budget = b_bound_sigmoid(args.L, args.eps)
    rows.append(("ln B_sig(L, eps)", budget.log_b))
    rows.append(("log10 B_sig(L, eps)", budget.log_b / math.log(10)))
    rows.append(("sample_size_hb(B_sig, erm)", sample_size_hb(budget, args.eps, args.delta, "erm")))
    rows.append(("sample_size_hb(B_sig, mainres)",
                 sample_size_hb(budget, args.eps, args.delta, "mainres")))
    if args.B is not None:
        if args.B < 1:
            raise UsageError("--B must be at least 1")
        rows.append((f"sample_size_hb(B={args.B!r}, erm)",
                     sample_size_hb(args.B, args.eps, args.delta, "erm")))
        rows.append((f"sample_size_hb(B={args.B!r}, mainres)",
                     sample_size_hb(args.B, args.eps, args.delta, "mainres")))
    if args.mu is not None:
        rows.append((f"L_pw(mu={args.mu!r})", l_for_margin("pw", args.mu)))
        rows.append((f"L_sig(mu={args.mu!r}, eps)", l_for_margin("sig", args.mu, args.eps)))
    if budget.below_regime:
        print(f"note: L={args.L!r} < 3, outside the regime of the sigmoid budget")
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        text = _fmt_size(value) if isinstance(value, int) else repr(value)
        print(f"{name.ljust(width)}  {text}")
    if args.json:
        out = {"format_version": FORMAT_VERSION, "config": _resolved(args)}
        for name, value in rows:
            if isinstance(value, int):
                out[name] = {"value": int(value), "overflow": bool(getattr(value, "overflow", False))}
            else:
                out[name] = value
        write_json(out, args.json)
    return 0


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) in (None, "")]
    if missing:
        raise UsageError("missing required option(s): " +
                         ", ".join("--" + n.replace("_", "-") for n in missing))


# -- parser ---------------------------------------------------------------------


def _add_solver_flags(p):
    p.add_argument("--iters", type=positive_int, default=None,
                   help="iteration budget (default from --tolerance)")
    p.add_argument("--schedule", choices=SCHEDULES, default="inverse-sqrt")
    p.add_argument("--step", type=positive_float, default=None, help="step constant c")
    p.add_argument("--tolerance", type=positive_float, default=1e-3)
    p.add_argument("--batch", choices=BATCHES, default="full")
    p.add_argument("--seed", type=seed_int, default=0)
    p.add_argument("--nu", type=open_unit, default=0.5)


def _add_generator_flags(p, required_defaults=True):
    p.add_argument("--dim", type=positive_int, default=None)
    p.add_argument("--L", type=positive_float, default=3.0)
    p.add_argument("--transfer", choices=["sig", "erf", "pw", "01"], default="sig")
    p.add_argument("--m", type=positive_int, default=None)
    p.add_argument("--label-noise", choices=["probabilistic", "deterministic"],
                   default="probabilistic")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key=value file; flags override it")

    parser = argparse.ArgumentParser(
        prog="kernhalf",
        description="Learn kernel halfspaces under the zero-one loss via absolute-loss ERM "
                    "with the kernel 1/(1 - nu <x, x'>).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a synthetic dataset CSV")
    _add_generator_flags(p)
    p.add_argument("--seed", type=seed_int, default=0)
    p.add_argument("--w-star", type=float_list, default=None, help="comma-separated direction")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen, _required=("dim", "m", "out"))

    p = sub.add_parser("train", parents=[common], help="fit a predictor for a fixed B")
    p.add_argument("--data", default=None)
    p.add_argument("--B", type=float, default=None)
    p.add_argument("--log-B", type=float, default=None, help="natural log of B")
    p.add_argument("--out", default=None)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_train, _required=("data", "out"))

    p = sub.add_parser("eval", parents=[common], help="error measures of a model on a dataset")
    p.add_argument("--model", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--mu", type=float_list, default=None, help="comma-separated margins")
    p.add_argument("--w", type=float_list, default=None, help="reference direction for margins")
    p.add_argument("--json", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_eval, _required=("model", "data"))

    p = sub.add_parser("sweep", parents=[common], help="cross-validate B over seeds")
    p.add_argument("--grid", type=float_list, default=None,
                   help="comma-separated B values (default 1,10,100,1000,10000)")
    p.add_argument("--seeds", type=positive_int, default=1)
    p.add_argument("--data", default=None, help="dataset to split (otherwise generate one per seed)")
    _add_generator_flags(p)
    p.add_argument("--holdout", type=open_unit, default=0.2)
    p.add_argument("--split-seed", type=seed_int, default=1)
    p.add_argument("--out", default=None)
    p.add_argument("--json", default=None)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep, _required=("out",), m=2000)

    p = sub.add_parser("approx", parents=[common], help="polynomial approximation report")
    p.add_argument("--L", type=float, default=3.0)
    p.add_argument("--eps", type=open_unit, default=0.05)
    p.add_argument("--kind", choices=["sig", "erf", "both"], default="sig")
    p.add_argument("--degree", type=positive_int, default=61, help="erf truncation degree (odd)")
    p.add_argument("--grid-size", type=positive_int, default=10001)
    p.add_argument("--max-degree", type=positive_int, default=60)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_approx, _required=())

    p = sub.add_parser("bounds", parents=[common], help="sample sizes and norm budgets")
    p.add_argument("--L", type=positive_float, default=3.0)
    p.add_argument("--eps", type=open_unit, default=0.1)
    p.add_argument("--delta", type=open_unit, default=0.05)
    p.add_argument("--B", type=float, default=None)
    p.add_argument("--mu", type=positive_float, default=None)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_bounds, _required=())
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    for action in parser._subparsers._group_actions:
        for name, subparser in action.choices.items():
            dests = {a.dest for a in subparser._actions}
            unknown = sorted(set(cfg) - dests)
            if unknown and name in argv:
                raise UsageError(f"{known.config}: unknown key(s) for {name}: {', '.join(unknown)}")
            subparser.set_defaults(**{k: v for k, v in cfg.items() if k in dests})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (UsageError, OSError) as exc:
        print(f"kernhalf: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    required = args._required
    del args._required
    try:
        _require(args, *required)
        return args.func(args)
    except UsageError as exc:
        print(f"kernhalf {args.command}: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (KernhalfError, ValueError, OSError) as exc:
        print(f"kernhalf {args.command}: error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
