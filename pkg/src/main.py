"""Command-line entry point for bilocal tomography calculations."""

import argparse
import sys
from typing import Optional, Sequence

from .bases import build_basis, certify
from .bases.certificate import KIND_ALIASES
from .config import RunConfig, load_config
from .dimension_calculus import SystemDims, TheoryProfile, bilocal_redundancy_audit, fit_profile_with_reason, kl_multi
from .errors import BitomoError, DomainError, MalformedTableError
from .ideality import MAX_SOLVED_LEVEL, ideality_constraints, solve_ideality, verify_ideality_numeric
from .report import render_report_text, render_text, run_report, to_json
from .state_io import dump_basis, load_state, save_state, state_to_dict
from .tomography import (
    FRAME_KINDS,
    FieldKind,
    build_frame,
    expectations,
    local_tomography_witness,
    reconstruct,
    round_trip_trials,
)


def progress(message: str) -> None:
    """Progress lines go to stderr so stdout holds only the document."""
    print(message, file=sys.stderr)


def parse_pairing(text: Optional[str]) -> Optional[list[tuple[int, int]]]:
    """'0:2,1:3' -> [(0, 2), (1, 3)]."""
    if not text:
        return None
    pairs = []
    for chunk in text.split(","):
        try:
            i, j = (int(part) for part in chunk.split(":"))
        except ValueError as e:
            raise DomainError(f"cannot parse pair '{chunk}' (expected i:j)") from e
        pairs.append((i, j))
    return pairs


def parse_k_table(text: str) -> list[tuple[int, int]]:
    """Two whitespace-separated integers (n, K) per line; blank and # lines skipped."""
    table = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise MalformedTableError(f"line {lineno}: expected 'n K', got '{line}'")
        try:
            table.append((int(parts[0]), int(parts[1])))
        except ValueError as e:
            raise MalformedTableError(f"line {lineno}: entries must be integers, got '{line}'") from e
    if not table:
        raise MalformedTableError("the K table is empty")
    return table


def _profile(flags: dict) -> TheoryProfile:
    return TheoryProfile(r=flags["r"], s=flags["s"], alpha=flags["alpha"])


def cmd_count(run: RunConfig) -> tuple[int, dict]:
    dims = SystemDims.parse(run.flags["dims"])
    profile = _profile(run.flags)
    pair = kl_multi(dims, profile)
    result = {"dims": str(dims), "r": str(profile.r), "s": str(profile.s), "k": str(pair.k), "l": str(pair.l)}
    if run.flags["audit"]:
        progress("  Auditing singleton/pair partitions...")
        audit = bilocal_redundancy_audit(dims, profile)
        result["audit"] = {
            "naive": str(audit.naive_count),
            "true": str(audit.true_k),
            "surplus": str(audit.surplus),
            "per_class": {label: str(count) for label, count in audit.per_class.items()},
        }
    return 0, result


def cmd_fit(run: RunConfig) -> tuple[int, dict]:
    source = run.flags["table"]
    if source in (None, "-"):
        text = sys.stdin.read()
    else:
        with open(source, encoding="utf-8") as f:
            text = f.read()
    profile, reason = fit_profile_with_reason(parse_k_table(text))
    if profile is None:
        return 0, {"fit": None, "reason": reason}
    return 0, {"r": str(profile.r), "s": str(profile.s), "reason": reason}


def cmd_basis(run: RunConfig) -> tuple[int, dict]:
    dims = SystemDims.parse(run.flags["dims"])
    progress(f"  Building {run.flags['kind']} basis on {dims}...")
    basis = build_basis(run.flags["kind"], dims, parse_pairing(run.flags["pairing"]))
    result = {
        "kind": basis.kind.value,
        "dims": str(dims),
        "count": str(len(basis)),
        "labels": [str(label) for label in basis.labels if label is not None],
    }
    status = 0
    if run.flags["check"]:
        progress("  Checking rank and idempotence...")
        certificate = certify(basis, run.tolerances.rank, run.tolerances.idempotence)
        result["certificate"] = certificate.as_dict()
        status = 0 if certificate.passed else 1
    if run.flags["dump"]:
        count = dump_basis(basis, run.flags["dump"])
        progress(f"  Wrote {count} operators to {run.flags['dump']}")
    return status, result


def cmd_tomo(run: RunConfig) -> tuple[int, dict]:
    dims = SystemDims.parse(run.flags["dims"])
    field_kind = FieldKind(run.flags["field"])
    frame_kind = run.flags["frame"]
    result = {"dims": str(dims), "field": field_kind.value, "frame": frame_kind}

    if run.flags["state"]:
        rho = load_state(run.flags["state"], run.tolerances.psd)
        frame = build_frame(dims, frame_kind)
        recovered = reconstruct(
            expectations(rho, frame),
            frame,
            field_kind,
            run.tolerances.rank,
            run.tolerances.consistency,
            run.tolerances.psd,
        )
        error = rho.distance(recovered)
        if run.flags["save_state"]:
            save_state(recovered, run.flags["save_state"])
        result.update({"error": error, "passed": error <= run.tolerances.round_trip})
        return (0 if result["passed"] else 1), result

    progress(f"  Running {run.flags['trials']} round trips (seed {run.seed})...")
    summary = round_trip_trials(
        dims,
        field_kind,
        frame_kind,
        run.flags["trials"],
        seed=run.seed,
        tolerance=run.tolerances.round_trip,
        rank_threshold=run.tolerances.rank,
    )
    result.update({
        "trials": str(len(summary.errors)),
        "seed": str(run.seed),
        "errors": summary.errors,
        "summary": {
            "max_error": summary.max_error,
            "mean_error": summary.mean_error,
            "tolerance": summary.tolerance,
            "passed": summary.passed,
        },
    })
    return (0 if summary.passed else 1), result


def cmd_witness(run: RunConfig) -> tuple[int, dict]:
    report = local_tomography_witness(SystemDims.parse(run.flags["dims"]), run.tolerances.witness)
    result = {
        "global_distance": report.global_distance,
        "max_local_stat_gap": report.max_local_stat_gap,
        "local_observable_count": str(report.local_observable_count),
        "discriminating_observable": str(report.discriminating_observable),
        "observable_gap": report.observable_gap,
        "valid": report.is_valid,
        "state_plus": state_to_dict(report.state_plus),
        "state_minus": state_to_dict(report.state_minus),
    }
    return (0 if report.is_valid else 1), result


def cmd_ideality(run: RunConfig) -> tuple[int, dict]:
    level = run.flags["level"]
    progress(f"  Solving the level-{level} constraints...")
    result = solve_ideality(level).as_dict()
    if run.flags["show_constraints"]:
        result["constraints"] = [str(c) for c in ideality_constraints(level).equations]
    if run.flags["verify_dims"]:
        dims = SystemDims.parse(run.flags["verify_dims"])
        residual = verify_ideality_numeric(level, _profile(run.flags), dims)
        result["verify_dims"] = str(dims)
        result["residual"] = str(residual)
        return (0 if residual == 0 else 1), result
    return 0, result


COMMANDS = {
    "count": cmd_count,
    "fit": cmd_fit,
    "basis": cmd_basis,
    "tomo": cmd_tomo,
    "witness": cmd_witness,
    "ideality": cmd_ideality,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", type=str, help="Path to config YAML file")
    common.add_argument("--seed", type=int, help="RNG seed (unsigned 64-bit, default from config: 0)")
    common.add_argument("--format", choices=("json", "text"), help="Output format (default from config: json)")
    common.add_argument(
        "--tolerance",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="Override a tolerance, e.g. --tolerance rank=1e-9 (repeatable)",
    )

    parser = argparse.ArgumentParser(
        prog="bitomo",
        description="Parameter counting, operator bases and tomography for bilocally tomographic theories",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def profile_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--r", type=int, default=2, help="Exponent r (default: 2)")
        p.add_argument("--s", type=int, default=1, help="Exponent s (default: 1)")
        p.add_argument("--alpha", type=int, default=1, help="Composition factor (default: 1)")

    p = sub.add_parser("count", parents=[common], help="K and L of a composite system")
    p.add_argument("--dims", required=True, help="Comma-separated N_i, e.g. 2,2,2")
    profile_flags(p)
    p.add_argument("--audit", action="store_true", help="Also run the singleton/pair redundancy audit")

    p = sub.add_parser("fit", parents=[common], help="Fit (r, s) to a K(n) table")
    p.add_argument("table", nargs="?", help="File with 'n K' lines (default: stdin)")

    p = sub.add_parser("basis", parents=[common], help="Construct an operator basis")
    p.add_argument("--dims", required=True)
    p.add_argument("--kind", choices=tuple(KIND_ALIASES), default="bilocal-projector")
    p.add_argument("--pairing", help="Preferred y-site pairs, e.g. 0:2,1:3")
    p.add_argument("--check", action="store_true", help="Run the rank and idempotence certificate")
    p.add_argument("--dump", metavar="FILE", help="Write the operators as JSON")

    p = sub.add_parser("tomo", parents=[common], help="Reconstruct states through a frame")
    p.add_argument("--dims", required=True)
    p.add_argument("--field", choices=[k.value for k in FieldKind], default="real")
    p.add_argument("--frame", choices=FRAME_KINDS, default="bilocal-projector")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--state", metavar="FILE", help="Reconstruct this saved state instead of random ones")
    p.add_argument("--save-state", metavar="FILE", help="Write the reconstructed --state here")

    p = sub.add_parser("witness", parents=[common], help="States that local measurements cannot tell apart")
    p.add_argument("--dims", default="2,2")

    p = sub.add_parser("ideality", parents=[common], help="Exact n-local ideality coefficients")
    p.add_argument("--level", type=int, choices=range(1, MAX_SOLVED_LEVEL + 1), default=3)
    p.add_argument("--verify-dims", help="Check the condition exactly on these dims")
    p.add_argument("--show-constraints", action="store_true")
    profile_flags(p)

    sub.add_parser("report", parents=[common], help="Recompute every headline number")
    return parser


def _tolerance_overrides(items: Sequence[str]) -> dict[str, float]:
    overrides = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise DomainError(f"tolerance override must be NAME=VALUE, got '{item}'")
        try:
            overrides[name.strip()] = float(value)
        except ValueError as e:
            raise DomainError(f"tolerance '{name}' is not a number: '{value}'") from e
    return overrides


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one subcommand, print its document.

    Returns:
        Exit code (0 for success).
    """
    args = build_parser().parse_args(argv)
    try:
        progress("[1/3] Loading configuration...")
        config = load_config(args.config)
        seed = config.run.seed if args.seed is None else args.seed
        if not 0 <= seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
        globals_ = {"config", "seed", "format", "tolerance", "subcommand"}
        run_config = RunConfig(
            subcommand=args.subcommand,
            flags={k: v for k, v in vars(args).items() if k not in globals_},
            seed=seed,
            format=args.format or config.run.format,
            tolerances=config.tolerances.override(_tolerance_overrides(args.tolerance)),
        )

        progress(f"[2/3] Running {run_config.subcommand}...")
        if run_config.subcommand == "report":
            status, document = run_report(run_config, config.report, progress)
            if run_config.format == "text":
                output = render_report_text(document)
            else:
                output = to_json(document.as_dict())
        else:
            status, result = COMMANDS[run_config.subcommand](run_config)
            output = render_text(result) if run_config.format == "text" else to_json(result)
    except BitomoError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return 1

    progress("[3/3] Done" if status == 0 else "[3/3] Done (checks failed)")
    print(output)
    return status


def main():
    """CLI entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
