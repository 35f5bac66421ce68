"""Self-check report: every headline number recomputed and compared."""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Optional

from .bases import bilocal_projector_basis, certify, complex_projector_basis, real_product_basis
from .bases.hermitian import linear_independence_rank
from .config import ReportSettings, RunConfig
from .dimension_calculus import (
    COMPLEX_QUANTUM,
    REAL_QUANTUM,
    SystemDims,
    TheoryProfile,
    bilocal_redundancy_audit,
    fit_profile,
    h_value,
    kl_compose,
    kl_multi,
    kl_single,
    latent_from_h,
)
from .errors import BitomoError
from .ideality import solve_ideality, verify_inclusion_numeric
from .tomography import (
    FOUR_REBITS,
    FieldKind,
    four_rebit_coincidence,
    local_tomography_witness,
    round_trip_trials,
)


SWEEP_EXPONENTS = (1, 2, 3)
SWEEP_ALPHAS = (2, 3)
SWEEP_DIMS = (1, 2, 3)
SWEEP_MAX_COMPONENTS = 5
REAL_COUNTING_DIMS = ((2,), (3,), (4,), (2, 2), (2, 3), (3, 3), (2, 2, 2), (2, 2, 3))
EXPECTED_IDEALITY = {
    1: ("1",),
    2: ("1", "-2"),
    3: ("1", "1/3", "-4/3", "4"),
}


@dataclass
class ReportItem:
    """Outcome of one check."""
    name: str
    passed: bool
    computed: dict[str, Any]
    expected: dict[str, Any]

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "computed": self.computed,
            "expected": self.expected,
        }


@dataclass
class ReportDocument:
    items: list[ReportItem] = field(default_factory=list)

    @property
    def failed(self) -> list[str]:
        return [item.name for item in self.items if not item.passed]

    @property
    def passed(self) -> bool:
        return not self.failed

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "failed": self.failed,
            "items": [item.as_dict() for item in self.items],
        }


def _profiles() -> list[TheoryProfile]:
    return [TheoryProfile(r, s) for r in SWEEP_EXPONENTS for s in SWEEP_EXPONENTS if r >= s]


def _dims_sweep(max_components: int) -> list[SystemDims]:
    return [
        SystemDims(dims)
        for length in range(1, max_components + 1)
        for dims in product(SWEEP_DIMS, repeat=length)
    ]


def check_complex_counting(run: RunConfig) -> ReportItem:
    counts, ranks = [], []
    for n in range(1, 5):
        basis = complex_projector_basis(n)
        rank, _ = linear_independence_rank(basis.ops, run.tolerances.rank)
        counts.append(len(basis))
        ranks.append(rank)
    expected = [n * n for n in range(1, 5)]
    return ReportItem(
        "complex_counting",
        counts == expected and ranks == expected,
        {"counts": ",".join(map(str, counts)), "ranks": ",".join(map(str, ranks))},
        {"counts": ",".join(map(str, expected)), "ranks": ",".join(map(str, expected))},
    )


def check_real_counting(run: RunConfig) -> ReportItem:
    computed, expected = {}, {}
    ok = True
    for dims in map(SystemDims, REAL_COUNTING_DIMS):
        basis = real_product_basis(dims)
        rank, _ = linear_independence_rank(basis.ops, run.tolerances.rank)
        n = dims.total
        computed[str(dims)] = f"{len(basis)}/{rank}"
        expected[str(dims)] = f"{n * (n + 1) // 2}/{n * (n + 1) // 2}"
        ok = ok and computed[str(dims)] == expected[str(dims)]
    return ReportItem("real_counting", ok, computed, expected)


def check_grouping(run: RunConfig) -> ReportItem:
    """Closed form, grouping invariance, multiplicativity and h = L L over the sweep.

    Composition with alpha > 1 is checked against N_AB = alpha N_A N_B.
    """
    checks = failures = 0
    for profile in _profiles():
        for dims in _dims_sweep(SWEEP_MAX_COMPONENTS):
            pair = kl_multi(dims, profile)
            n = dims.total
            singles = [kl_single(d, profile) for d in dims]
            checks += 1
            ok = 2 * pair.k == n**profile.r + n**profile.s
            for cut in range(1, len(dims)):
                left = kl_multi(SystemDims(dims.dims[:cut]), profile)
                right = kl_multi(SystemDims(dims.dims[cut:]), profile)
                ok = ok and kl_compose(left, right) == pair
            total = difference = 1
            for single in singles:
                total *= single.total
                difference *= single.difference
            ok = ok and pair.total == total and pair.difference == difference
            if len(dims) == 2:
                a, b = dims.dims
                ok = ok and h_value(a, b, profile) == singles[0].l * singles[1].l
            failures += not ok
        for n in range(1, 7):
            checks += 1
            failures += latent_from_h(n, profile) != kl_single(n, profile).l
        for alpha in SWEEP_ALPHAS:
            scaled = TheoryProfile(profile.r, profile.s, alpha=alpha)
            for a, b in product(range(1, 5), repeat=2):
                checks += 1
                left, right = kl_single(a, scaled), kl_single(b, scaled)
                ok = kl_compose(left, right) == kl_single(alpha * a * b, scaled)
                ok = ok and h_value(a, b, scaled) == left.l * right.l
                failures += not ok
    return ReportItem(
        "kl_grouping",
        failures == 0,
        {"checks": str(checks), "failures": str(failures)},
        {"checks": str(checks), "failures": "0"},
    )


def check_real_basis_rank(run: RunConfig) -> ReportItem:
    computed = {}
    for dims in (SystemDims((2, 2)), SystemDims((2, 2, 2))):
        rank, _ = linear_independence_rank(real_product_basis(dims).ops, run.tolerances.rank)
        computed[str(dims)] = str(rank)
    expected = {"2,2": "10", "2,2,2": "36"}
    return ReportItem("real_basis_rank", computed == expected, computed, expected)


def check_bilocal_projectors(run: RunConfig) -> ReportItem:
    computed, expected = {}, {}
    ok = True
    for dims in (SystemDims((2, 2)), SystemDims((2, 2, 2))):
        cert = certify(
            bilocal_projector_basis(dims),
            rank_threshold=run.tolerances.rank,
            idempotence_tolerance=run.tolerances.idempotence,
        )
        computed[f"{dims} rank"] = str(cert.rank)
        computed[f"{dims} max_idempotence_error"] = cert.max_idempotence_error
        computed[f"{dims} max_locality_degree"] = str(cert.max_locality_degree)
        expected[f"{dims} rank"] = str(cert.target_dimension)
        expected[f"{dims} max_idempotence_error"] = run.tolerances.idempotence
        expected[f"{dims} max_locality_degree"] = "2"
        ok = ok and cert.passed
    return ReportItem("bilocal_projectors", ok, computed, expected)


def check_round_trips(run: RunConfig, settings: ReportSettings) -> ReportItem:
    families = [
        (SystemDims((2, 2)), FieldKind.REAL, "bilocal-projector", settings.real_pair_trials),
        (SystemDims((2, 2, 2)), FieldKind.REAL, "bilocal-projector", settings.real_triple_trials),
        (SystemDims((2,)), FieldKind.COMPLEX, "complex", settings.complex_trials),
        (SystemDims((3,)), FieldKind.COMPLEX, "complex", settings.complex_trials),
        (SystemDims((4,)), FieldKind.COMPLEX, "complex", settings.complex_trials),
        (SystemDims((5,)), FieldKind.COMPLEX, "complex", settings.complex_trials),
    ]
    computed = {}
    ok = True
    for dims, field_kind, frame_kind, trials in families:
        summary = round_trip_trials(
            dims, field_kind, frame_kind, trials,
            seed=run.seed,
            tolerance=run.tolerances.round_trip,
            rank_threshold=run.tolerances.rank,
        )
        computed[f"{field_kind.value} {dims} x{trials}"] = summary.max_error
        ok = ok and summary.passed
    return ReportItem("round_trip", ok, computed, {"max_error_at_most": run.tolerances.round_trip})


def check_witness(run: RunConfig) -> ReportItem:
    report = local_tomography_witness(SystemDims((2, 2)), run.tolerances.witness)
    return ReportItem(
        "witness",
        report.is_valid,
        {
            "global_distance": report.global_distance,
            "max_local_stat_gap": report.max_local_stat_gap,
            "observable_gap": report.observable_gap,
            "observable": str(report.discriminating_observable),
        },
        {
            "global_distance": 1.0,
            "max_local_stat_gap": 0.0,
            "observable_gap": 2.0,
            "observable": "y12⊗y12",
        },
    )


def check_four_rebit_audit(run: RunConfig) -> ReportItem:
    audit = bilocal_redundancy_audit(FOUR_REBITS, REAL_QUANTUM)
    computed = {"naive": str(audit.naive_count), "true": str(audit.true_k), "surplus": str(audit.surplus)}
    computed.update({label: str(count) for label, count in audit.per_class.items()})
    expected = {"naive": "138", "true": "136", "surplus": "2", "1+1+1+1": "81", "2+1+1": "54", "2+2": "3"}
    return ReportItem("four_rebit_audit", computed == expected, computed, expected)


def check_four_rebit_coincidence(run: RunConfig) -> ReportItem:
    report = four_rebit_coincidence(
        seed=run.seed,
        tolerance=run.tolerances.coincidence,
        rank_threshold=run.tolerances.rank,
    )
    computed: dict[str, Any] = dict(report.coefficients)
    computed["direct"] = report.direct_coefficient
    computed["spread"] = report.spread
    computed["bilocal_rank"] = str(report.bilocal_rank)
    return ReportItem(
        "four_rebit_coincidence",
        report.passed,
        computed,
        {"spread_at_most": run.tolerances.coincidence, "bilocal_rank": "136"},
    )


def check_ideality(level: int) -> Callable[[RunConfig], ReportItem]:
    def check(run: RunConfig) -> ReportItem:
        solution = solve_ideality(level)
        computed = tuple(str(c) for c in solution.coefficients.values())
        return ReportItem(
            f"ideality_level_{level}",
            computed == EXPECTED_IDEALITY[level],
            {"coefficients": ", ".join(computed)},
            {"coefficients": ", ".join(EXPECTED_IDEALITY[level])},
        )
    return check


def check_inclusion_sweep(run: RunConfig) -> ReportItem:
    checks = nonzero = 0
    for profile in _profiles():
        for dims in product(SWEEP_DIMS, repeat=4):
            checks += 1
            nonzero += verify_inclusion_numeric(profile, SystemDims(dims)) != 0
    return ReportItem(
        "inclusion_sweep",
        nonzero == 0,
        {"checks": str(checks), "nonzero_residuals": str(nonzero)},
        {"checks": str(checks), "nonzero_residuals": "0"},
    )


def check_fit(run: RunConfig) -> ReportItem:
    real_table = [(n, n * (n + 1) // 2) for n in range(1, 6)]
    complex_table = [(n, n * n) for n in range(1, 6)]
    perturbed = [(1, 1), (2, 3), (3, 7)]

    def describe(profile: Optional[TheoryProfile]) -> str:
        return "none" if profile is None else f"({profile.r}, {profile.s})"

    computed = {
        "real": describe(fit_profile(real_table)),
        "complex": describe(fit_profile(complex_table)),
        "perturbed": describe(fit_profile(perturbed)),
    }
    expected = {
        "real": describe(REAL_QUANTUM),
        "complex": describe(COMPLEX_QUANTUM),
        "perturbed": "none",
    }
    return ReportItem("fit", computed == expected, computed, expected)


def run_report(
    run: RunConfig,
    settings: Optional[ReportSettings] = None,
    progress: Optional[Callable[[str], None]] = None,
) -> tuple[int, ReportDocument]:
    """Run every check; the exit status is 0 iff none failed.

    Items may run on several worker threads, but the document keeps the
    fixed item order.
    """
    settings = settings or ReportSettings()
    checks: list[tuple[str, Callable[[RunConfig], ReportItem]]] = [
        ("complex_counting", check_complex_counting),
        ("real_counting", check_real_counting),
        ("kl_grouping", check_grouping),
        ("real_basis_rank", check_real_basis_rank),
        ("bilocal_projectors", check_bilocal_projectors),
        ("round_trip", lambda r: check_round_trips(r, settings)),
        ("witness", check_witness),
        ("four_rebit_audit", check_four_rebit_audit),
        ("four_rebit_coincidence", check_four_rebit_coincidence),
        ("ideality_level_1", check_ideality(1)),
        ("ideality_level_2", check_ideality(2)),
        ("ideality_level_3", check_ideality(3)),
        ("inclusion_sweep", check_inclusion_sweep),
        ("fit", check_fit),
    ]
    total = len(checks)

    def execute(indexed: tuple[int, tuple[str, Callable[[RunConfig], ReportItem]]]) -> ReportItem:
        index, (name, check) = indexed
        try:
            item = check(run)
        except BitomoError as e:
            item = ReportItem(name, False, {"error": str(e)}, {})
        if progress:
            progress(f"[{index}/{total}] {item.name}: {'ok' if item.passed else 'FAILED'}")
        return item

    with ThreadPoolExecutor(max_workers=settings.workers) as pool:
        items = list(pool.map(execute, enumerate(checks, 1)))
    document = ReportDocument(items)
    return (0 if document.passed else 1), document


def to_json(data: dict) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False)


def _flatten(data: Any, prefix: str = "") -> list[tuple[str, str]]:
    if isinstance(data, dict):
        rows = []
        for key, value in data.items():
            rows.extend(_flatten(value, f"{prefix}.{key}" if prefix else str(key)))
        return rows
    if isinstance(data, list):
        if all(not isinstance(v, (dict, list)) for v in data):
            return [(prefix, ", ".join(_format_value(v) for v in data))]
        rows = []
        for i, value in enumerate(data):
            rows.extend(_flatten(value, f"{prefix}[{i}]"))
        return rows
    return [(prefix, _format_value(data))]


def _format_value(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_table(rows: list[tuple[str, ...]]) -> str:
    """Left-aligned columns separated by two spaces."""
    if not rows:
        return ""
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines)


def render_text(data: dict) -> str:
    """Key/value table for any JSON-shaped document."""
    return render_table(_flatten(data))


def render_report_text(document: ReportDocument) -> str:
    rows = [("item", "status", "computed", "expected")]
    for item in document.items:
        keys = list(dict.fromkeys(list(item.computed) + list(item.expected)))
        status = "PASS" if item.passed else "FAIL"
        for i, key in enumerate(keys):
            rows.append((
                item.name if i == 0 else "",
                status if i == 0 else "",
                f"{key}={_format_value(item.computed.get(key))}",
                f"{key}={_format_value(item.expected.get(key))}",
            ))
    summary = "all items passed" if document.passed else f"failed: {', '.join(document.failed)}"
    return render_table(rows) + "\n\n" + summary
