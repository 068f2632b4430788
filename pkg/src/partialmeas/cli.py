"""Command-line entry point: ``partialmeas <command> [flags]``.

Exit codes: 0 success, 2 usage error, 3 domain precondition violated,
4 verification failure.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__, montecarlo
from .algebra import Direction, state_from_angles
from .dilation import dilation_report
from .errors import InvalidProbability, NonIdentifiable, NonInvertibleMeasurement
from .fisher import fisher_matrix, fisher_surface, simulate_tomography
from .measurement import build_measurement_along, check_probability, outcome_probabilities, sample_counts
from .reversal import reversal_monte_carlo

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 2, 3, 4
DILATION_TOL = 1e-10
PARAM_KEYS = ("p", "q", "theta", "phi", "chi", "psi", "trials", "grid_n", "runs", "seed", "tau", "nu")


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def header(command: str, args: argparse.Namespace, extra: Sequence[str] = ()) -> str:
    params = " ".join(f"{k}={fmt(getattr(args, k))}" for k in PARAM_KEYS if getattr(args, k, None) is not None)
    lines = [f"# partialmeas {__version__} command={command}", f"# {params}", *(f"# {e}" for e in extra)]
    return "\n".join(lines) + "\n"


def csv_rows(columns: Sequence[str], rows) -> str:
    out = io.StringIO()
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return out.getvalue()


def validate(args: argparse.Namespace) -> None:
    try:
        check_probability("p", args.p)
        check_probability("q", args.q)
    except InvalidProbability as exc:
        raise UsageError(str(exc)) from exc
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.grid_n < 2:
        raise UsageError("--grid-n must be >= 2")
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")


def cmd_measure(args) -> tuple[int, str]:
    n = Direction(args.chi, args.psi)
    state = state_from_angles(args.theta, args.phi)
    p_m, p_mbar = outcome_probabilities(state, build_measurement_along(args.p, args.q, n))
    hits = montecarlo.map_chunks(lambda rng, k: sample_counts(p_mbar, k, rng), args.seed, args.trials, args.workers)
    n_mbar = sum(hits)
    rows = [
        ("m", p_m, (args.trials - n_mbar) / args.trials, args.trials, args.seed),
        ("mbar", p_mbar, n_mbar / args.trials, args.trials, args.seed),
    ]
    return EXIT_OK, header("measure", args) + csv_rows(
        ("outcome", "exact_prob", "empirical_freq", "trials", "seed"), rows
    )


def cmd_reverse_mc(args) -> tuple[int, str]:
    state = state_from_angles(args.theta, args.phi)
    s = reversal_monte_carlo(state, args.p, args.q, args.trials, args.seed, args.workers)
    row = (args.p, args.q, s.trials, s.successes, s.empirical_rate, s.exact_rate, args.seed)
    return EXIT_OK, header("reverse-mc", args) + csv_rows(
        ("p", "q", "trials", "successes", "empirical_rate", "exact_rate", "seed"), [row]
    )


def cmd_fisher_surface(args) -> tuple[int, str]:
    rows = fisher_surface(args.theta, args.chi, args.psi, args.phi, args.grid_n)
    return EXIT_OK, header("fisher-surface", args) + csv_rows(("p", "q", "f_tt", "f_tp", "f_pp"), rows)


def cmd_tomography(args) -> tuple[int, str]:
    n = Direction(args.chi, args.psi)
    estimates = simulate_tomography(
        args.theta, args.phi, [n], args.p, args.q, args.trials, args.runs, args.seed, True, args.workers
    )
    f_true = fisher_matrix((args.theta, args.phi), n, args.p, args.q)
    crb_true = 1.0 / (args.trials * f_true.f_tt) if f_true.f_tt > 0 else math.inf
    rows = []
    sq = []
    for i, est in enumerate(estimates):
        err = (est.theta_hat - args.theta) ** 2
        sq.append(err)
        rows.append((i, args.theta, est.theta_hat, est.crb_variance_theta, err))
    mse = float(np.mean(sq))
    mean_hat = float(np.mean([e.theta_hat for e in estimates]))
    rows.append(("summary", args.theta, mean_hat, crb_true, mse))
    extra = [f"mse_over_crb={fmt(mse / crb_true if crb_true not in (0, math.inf) else math.nan)}"]
    return EXIT_OK, header("tomography", args, extra) + csv_rows(
        ("run_id", "theta_true", "theta_hat", "crb_var", "empirical_sq_err"), rows
    )


def cmd_dilation_check(args) -> tuple[int, str]:
    report = dilation_report(args.p, args.q, tau=args.tau, nu=args.nu, corrupt=args.corrupt)
    ok = all(v < DILATION_TOL for v in report.values())
    lines = [f"{name} {fmt(val)} {'ok' if val < DILATION_TOL else 'FAIL'}" for name, val in report.items()]
    lines.append(f"status {'PASS' if ok else 'FAIL'}")
    return (EXIT_OK if ok else EXIT_VERIFY), header("dilation-check", args) + "\n".join(lines) + "\n"


COMMANDS = {
    "measure": cmd_measure,
    "reverse-mc": cmd_reverse_mc,
    "fisher-surface": cmd_fisher_surface,
    "tomography": cmd_tomography,
    "dilation-check": cmd_dilation_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=float, default=0.3, help="switch probability from |1>")
    common.add_argument("--q", type=float, default=0.2, help="switch probability from |0>")
    common.add_argument("--theta", type=float, default=math.pi / 3, help="state polar angle (rad)")
    common.add_argument("--phi", type=float, default=0.0, help="state azimuth (rad)")
    common.add_argument("--chi", type=float, default=0.0, help="measurement axis polar angle (rad)")
    common.add_argument("--psi", type=float, default=0.0, help="measurement axis azimuth (rad)")
    common.add_argument("--trials", type=int, default=100_000, help="Monte Carlo draws (per run)")
    common.add_argument("--grid-n", type=int, default=101, help="points per axis of the (p, q) grid")
    common.add_argument("--runs", type=int, default=200, help="repeated tomography runs")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--workers", type=int, default=1, help="threads; output does not depend on it")
    common.add_argument("--out", default=None, help="output file (default: stdout)")

    parser = argparse.ArgumentParser(prog="partialmeas", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "dilation-check":
            sp.add_argument("--tau", type=float, default=1.0, help="pulse length")
            sp.add_argument("--nu", type=float, default=10.0, help="qubit frequency")
            sp.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        validate(args)
        code, text = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonInvertibleMeasurement, NonIdentifiable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
