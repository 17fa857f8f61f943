"""Command-line surface: lpsketch sketch | estimate | validate.

Exit codes: 0 success, 2 usage/parameter error, 3 data error,
4 incompatible sketch/estimator combination.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import analytics
from .errors import DataError, IncompatibleSketchError, LpSketchError, ParameterError
from .estimators import all_pairs, _ESTIMATORS
from .io import (
    atomic_write_bytes,
    load_csv,
    parse_family,
    read_sketch_file,
    write_sketch_file,
)
from .sketcher import SketchConfig, sketch_matrix

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INCOMPATIBLE = 4


def _config_from_args(args) -> SketchConfig:
    family = parse_family(args.family, args.s)
    return SketchConfig(
        p=args.p,
        k=args.k,
        strategy=args.strategy,
        family=family,
        master_seed=args.seed,
    )


def _emit_json(path: str, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        atomic_write_bytes(path, text.encode())


def _cmd_sketch(args) -> int:
    config = _config_from_args(args)
    matrix = load_csv(args.input, skip_header=args.skip_header)
    sketches = sketch_matrix(matrix, config)
    write_sketch_file(args.output, sketches, matrix.D)
    stored = config.k * len(config.vector_slots()) + config.max_marginal_order
    print(
        f"sketched n={matrix.n} rows, D={matrix.D} -> {stored} reals/row "
        f"(k={config.k}, p={config.p}, {config.strategy}/{config.family.kind})"
    )
    return 0


def _parse_pairs(spec: str, n: int) -> list[tuple[int, int]] | None:
    if spec == "all":
        return None
    pairs = []
    with open(spec) as fh:
        for lineno, line in enumerate(fh):
            line = line.strip().replace(",", " ")
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DataError(f"pairs file line {lineno}: expected two indices")
            i, j = int(parts[0]), int(parts[1])
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise DataError(f"pairs file line {lineno}: invalid pair ({i}, {j})")
            pairs.append((min(i, j), max(i, j)))
    return sorted(set(pairs))


def _cmd_estimate(args) -> int:
    sketches, _ = read_sketch_file(args.sketches)
    cfg = sketches[0].config
    if args.estimator == "mle" and cfg.p != 4:
        raise IncompatibleSketchError(f"mle estimator supports p=4 only, file has p={cfg.p}")
    if args.estimator == "alternative" and cfg.strategy != "alternative":
        raise IncompatibleSketchError("alternative estimator needs alternative-strategy sketches")
    if args.estimator == "basic" and cfg.strategy != "basic":
        raise IncompatibleSketchError("basic estimator needs basic-strategy sketches")

    wanted = _parse_pairs(args.pairs, len(sketches))
    fn = _ESTIMATORS[args.estimator]
    if wanted is None:
        estimates = all_pairs(sketches, args.estimator, clamp=args.clamp)
    else:
        estimates = [fn(sketches[i], sketches[j], clamp=args.clamp) for i, j in wanted]

    records = [
        {
            "i": e.row_a,
            "j": e.row_b,
            "p": e.p,
            "estimator": e.estimator,
            "value": e.value,
            "clamped": e.clamped,
            "flags": list(e.flags),
        }
        for e in estimates
    ]
    _emit_json(args.output, records)
    return 0


def _cmd_validate(args) -> int:
    config = _config_from_args(args)
    matrix = load_csv(args.input, skip_header=args.skip_header)
    if matrix.n != 2:
        raise ParameterError(f"validate needs a CSV with exactly 2 rows, got {matrix.n}")
    x, y = matrix.row(0), matrix.row(1)
    report = analytics.monte_carlo_validate(
        x, y, config, args.trials, estimator=args.estimator
    )
    payload = report.to_dict()
    resid = report.basic - report.alternative - report.delta
    scale = max(1.0, abs(report.basic))
    payload["identity_basic_minus_alt_minus_delta"] = resid
    payload["identity_ok"] = bool(abs(resid) <= 1e-9 * scale)
    _emit_json(args.output, payload)
    return 0


def _add_sketch_flags(sub):
    sub.add_argument("--p", type=int, required=True, help="even distance order")
    sub.add_argument("--k", type=int, required=True, help="sketch width")
    sub.add_argument("--strategy", choices=["basic", "alternative"], default="basic")
    sub.add_argument("--family", choices=["normal", "uniform", "threepoint"], default="normal")
    sub.add_argument("--s", type=float, default=None, help="fourth moment (threepoint only)")
    sub.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    sub.add_argument("--skip-header", action="store_true", help="skip the first CSV row")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpsketch")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sketch = sub.add_parser("sketch", help="sketch a CSV matrix into a sketch file")
    p_sketch.add_argument("--input", required=True)
    p_sketch.add_argument("--output", required=True)
    _add_sketch_flags(p_sketch)
    p_sketch.set_defaults(fn=_cmd_sketch)

    p_est = sub.add_parser("estimate", help="estimate pairwise distances from a sketch file")
    p_est.add_argument("--sketches", required=True)
    p_est.add_argument("--estimator", choices=["basic", "alternative", "mle"], required=True)
    p_est.add_argument("--pairs", default="all", help='"all" or a file of index pairs')
    p_est.add_argument("--clamp", action="store_true", help="clamp negative estimates to zero")
    p_est.add_argument("--output", default="-")
    p_est.set_defaults(fn=_cmd_estimate)

    p_val = sub.add_parser("validate", help="Monte Carlo validation of the variance formulas")
    p_val.add_argument("--input", required=True, help="CSV with exactly two rows")
    p_val.add_argument("--trials", type=int, required=True)
    p_val.add_argument(
        "--estimator", choices=["basic", "alternative", "mle"], default=None
    )
    p_val.add_argument("--output", default="-")
    _add_sketch_flags(p_val)
    p_val.set_defaults(fn=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except IncompatibleSketchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except (DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ParameterError, LpSketchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
