"""
Evaluation Service - precision/recall scoring, the two-party evaluation
harness, the experiment grid and figure-data emission
"""

import csv
import logging
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

from models.config import ExperimentConfig, GridConfig
from models.errors import DataError, SplitLinkError
from models.match_array import MatchArray
from models.metrics import MetricsReport
from models.record import Party, RecordSet
from models.reference_set import ReferenceSet
from repositories.recordset_repository import RecordSetRepository, ReferenceSetRepository
from services.datagen_service import (
    CORRUPTION_STREAM, SAMPLE_STREAM, SHUFFLE_STREAM, TRAINING_STREAM,
    corrupt_recordset, deduplicate, derive_seed, sample_records, shuffled_order,
)
from services.fixture_service import FixtureGenerator
from services.linkage_service import SplitParty, plain_match, train_plain_baseline

log = logging.getLogger(__name__)

Truth = Set[Tuple[str, str]]

PLAIN = "plain"
REFERENCE_MARGIN = 1.1


def score(
    ma: MatchArray,
    truth: Truth,
    party: str = "A",
    match_seconds: float = 0.0,
    repetition: int = -1,
    seed: int = 0,
    config: Optional[Dict] = None
) -> MetricsReport:
    """
    Compare predicted matches with the true pairs. A zero denominator reports
    the metric as 1.0 and sets its ``*_undefined`` flag.
    """
    predicted = set(ma.matched_pairs())
    tp = len(predicted & truth)
    fp = len(predicted) - tp
    fn = len(truth) - tp
    return MetricsReport(
        party=party,
        tp=tp,
        fp=fp,
        fn=fn,
        precision=tp / (tp + fp) if tp + fp else 1.0,
        recall=tp / (tp + fn) if tp + fn else 1.0,
        match_seconds=match_seconds,
        precision_undefined=not (tp + fp),
        recall_undefined=not (tp + fn),
        repetition=repetition,
        seed=seed,
        config=dict(config or {})
    )


def average_reports(reports: Sequence[MetricsReport]) -> MetricsReport:
    """Arithmetic mean of one party's per-repetition reports"""
    if not reports:
        raise DataError("No reports to average")

    def mean(name: str) -> float:
        return sum(getattr(report, name) for report in reports) / len(reports)

    first = reports[0]
    return MetricsReport(
        party=first.party,
        tp=mean("tp"),
        fp=mean("fp"),
        fn=mean("fn"),
        precision=mean("precision"),
        recall=mean("recall"),
        match_seconds=mean("match_seconds"),
        precision_undefined=any(report.precision_undefined for report in reports),
        recall_undefined=any(report.recall_undefined for report in reports),
        repetition=-1,
        seed=min(report.seed for report in reports),
        config={key: value for key, value in first.config.items() if key != "repetition"}
    )


@contextmanager
def stage(label: str) -> Iterator[None]:
    """Label pipeline errors with the stage that raised them"""
    try:
        yield
    except SplitLinkError as exc:
        if not getattr(exc, "stage", None):
            exc.stage = label
            log.error(f"Stage '{label}' failed: {exc}")
        raise


@dataclass(frozen=True)
class LinkageScenario:
    """Alice's sample, Bob's corrupted and shuffled copy, the shared RS and the truth"""
    alice: RecordSet
    bob: RecordSet
    reference_set: ReferenceSet
    truth: Truth


def ground_truth(alice: RecordSet, bob: RecordSet) -> Truth:
    """Cross-party pairs sharing a source ID"""
    by_source: Dict[str, str] = {}
    for record in alice:
        if record.source_id is None or record.source_id in by_source:
            raise DataError(f"Record {record.record_id} has a missing or repeated source ID")
        by_source[record.source_id] = record.record_id
    return {
        (by_source[record.source_id], record.record_id)
        for record in bob
        if record.source_id in by_source
    }


def build_scenario(source: RecordSet, reference_set: ReferenceSet, cfg: ExperimentConfig) -> LinkageScenario:
    """
    Alice = a seeded sample of ``cfg.match_size`` source records. Bob = every
    Alice record corrupted, shuffled and re-identified for party B. The RS
    keeps its first ``cfg.reference_size`` rows that share no value with
    either party.
    """
    if len(source) < cfg.match_size:
        raise DataError(f"Match size {cfg.match_size} exceeds the {len(source)} source records")
    seed = cfg.rng_seed
    alice = sample_records(source, cfg.match_size, derive_seed(seed, SAMPLE_STREAM)).assign_party(Party.A)
    corrupted = corrupt_recordset(alice, cfg.corruption_spec(derive_seed(seed, CORRUPTION_STREAM)))
    bob = corrupted.assign_party(Party.B, shuffled_order(len(corrupted), derive_seed(seed, SHUFFLE_STREAM)))

    disjoint = reference_set.without_values(alice.attribute_values() | bob.attribute_values())
    dropped = len(reference_set) - len(disjoint)
    if dropped:
        log.warning(f"Dropped {dropped} reference rows sharing values with the parties' records")
    if len(disjoint) < cfg.reference_size:
        if not len(disjoint):
            raise DataError("No reference rows remain after removing values shared with the records")
        log.warning(f"Only {len(disjoint)} of {cfg.reference_size} reference rows available")
    return LinkageScenario(alice, bob, disjoint.head(cfg.reference_size), ground_truth(alice, bob))


def run_repetition(
    source: RecordSet,
    reference_set: ReferenceSet,
    cfg: ExperimentConfig,
    repetition: int
) -> Tuple[List[MetricsReport], Dict[str, MatchArray]]:
    """One repetition (seed = base seed + repetition): split A, split B and plain"""
    seed = cfg.rng_seed + repetition
    cell = cfg.with_overrides(rng_seed=seed)
    echo = dict(cell.to_dict(), repetition=repetition)
    with stage("prepare data"):
        scenario = build_scenario(source, reference_set, cell)

    parties = {}
    for party, recs in ((Party.A, scenario.alice), (Party.B, scenario.bob)):
        with stage(f"smash and train party {party.value}"):
            parties[party] = SplitParty(recs, scenario.reference_set, cell)
            parties[party].prepare()

    results: Dict[str, MatchArray] = {}
    reports: List[MetricsReport] = []
    for party in (Party.A, Party.B):
        with stage(f"split match party {party.value}"):
            results[party.value] = parties[party].match(parties[party.peer].smashed)
        reports.append(score(
            results[party.value], scenario.truth, party.value,
            parties[party].match_seconds, repetition, seed, echo
        ))

    with stage("plain baseline"):
        plain_seed = derive_seed(seed, TRAINING_STREAM, 2)
        training = sample_records(scenario.alice, cell.training_size, plain_seed)
        model = train_plain_baseline(training, cell.corruption_spec(plain_seed), cell.svm_config())
        started = time.perf_counter()
        results[PLAIN] = plain_match(scenario.alice, scenario.bob, model, workers=cell.workers)
        elapsed = time.perf_counter() - started
    reports.append(score(results[PLAIN], scenario.truth, PLAIN, elapsed, repetition, seed, echo))

    for report in reports:
        log.info(
            f"Repetition {repetition} {report.party}: precision={report.precision:.4f} "
            f"recall={report.recall:.4f} match={report.match_seconds:.2f}s"
        )
    return reports, results


class ExperimentRunner:
    """Runs experiment cells over one source record set and one reference set"""

    def __init__(self, source: RecordSet, reference_set: ReferenceSet):
        self.source = source
        self.reference_set = reference_set
        self.match_arrays: Dict[Tuple[int, str], MatchArray] = {}

    def run_cell(self, cfg: ExperimentConfig) -> List[MetricsReport]:
        """Per-repetition reports followed by one averaged report per party"""
        log.info(
            f"Cell: {cfg.kernel.value} C={cfg.C} match={cfg.match_size} "
            f"RS={cfg.reference_size} train={cfg.training_size}"
        )
        per_repetition: List[MetricsReport] = []
        for repetition in range(cfg.repetitions):
            reports, results = run_repetition(self.source, self.reference_set, cfg, repetition)
            per_repetition.extend(reports)
            for name, ma in results.items():
                self.match_arrays[(repetition, name)] = ma
        averaged = [
            average_reports([report for report in per_repetition if report.party == party])
            for party in (Party.A.value, Party.B.value, PLAIN)
        ]
        return per_repetition + averaged

    def run_grid(self, grid: GridConfig, base: ExperimentConfig, parallel_cells: int = 1) -> List[MetricsReport]:
        cells = list(grid.cells(base))
        log.info(f"Running {len(cells)} experiment cells")
        if parallel_cells > 1:
            with ThreadPoolExecutor(max_workers=parallel_cells) as pool:
                results = list(pool.map(
                    lambda cell: ExperimentRunner(self.source, self.reference_set).run_cell(cell), cells
                ))
        else:
            results = [self.run_cell(cell) for cell in cells]
        return [report for reports in results for report in reports]


def load_inputs(
    cfg: ExperimentConfig,
    records_path: Optional[Union[str, Path]] = None,
    reference_path: Optional[Union[str, Path]] = None,
    record_columns: Optional[Sequence[str]] = None,
    reference_columns: Optional[Sequence[str]] = None,
    source_size: Optional[int] = None,
    reference_size: Optional[int] = None
) -> Tuple[RecordSet, ReferenceSet]:
    """Records and RS from CSV files, or seeded synthetic fixtures when no path is given"""
    generator = FixtureGenerator(cfg.rng_seed)
    with stage("load records"):
        if records_path:
            source = deduplicate(RecordSetRepository(Party.A, record_columns).load(records_path))
        else:
            source = generator.records(source_size or cfg.match_size)
    with stage("load reference set"):
        if reference_path:
            reference_set = ReferenceSetRepository(reference_columns).load(reference_path)
        else:
            wanted = reference_size or cfg.reference_size
            reference_set = generator.reference_set(
                int(wanted * REFERENCE_MARGIN) + 10, source.attribute_values()
            )
    return source, reference_set


def run_experiment(
    cfg: ExperimentConfig,
    records_path: Optional[Union[str, Path]] = None,
    reference_path: Optional[Union[str, Path]] = None,
    record_columns: Optional[Sequence[str]] = None,
    reference_columns: Optional[Sequence[str]] = None
) -> List[MetricsReport]:
    """All repetitions of one configuration plus the per-party averages"""
    source, reference_set = load_inputs(cfg, records_path, reference_path, record_columns, reference_columns)
    return ExperimentRunner(source, reference_set).run_cell(cfg)


def run_grid(
    grid: GridConfig,
    base: ExperimentConfig,
    records_path: Optional[Union[str, Path]] = None,
    reference_path: Optional[Union[str, Path]] = None,
    parallel_cells: int = 1,
    record_columns: Optional[Sequence[str]] = None,
    reference_columns: Optional[Sequence[str]] = None
) -> List[MetricsReport]:
    source, reference_set = load_inputs(
        base, records_path, reference_path, record_columns, reference_columns,
        source_size=max(grid.match_sizes), reference_size=max(grid.reference_sizes)
    )
    return ExperimentRunner(source, reference_set).run_grid(grid, base, parallel_cells)


# Figure data

FIGURES = (
    "precision_vs_rs_size",
    "recall_vs_rs_size",
    "precision_vs_training_size",
    "recall_vs_training_size",
    "matching_times",
)


def _method(report: MetricsReport) -> str:
    if report.party == PLAIN:
        return "Plain"
    return f"Split-{1 if report.party == Party.A.value else 2}"


def figure_series(reports: Iterable[MetricsReport]) -> Dict[str, List[Tuple[int, str, float]]]:
    """
    Long-format (x, series_name, y) rows per figure from averaged reports.
    x is the match-set size. The RS-size figures use the largest training size
    and the training-size figures the largest RS size; repeated points are
    averaged.
    """
    averaged = [report for report in reports if report.is_average]
    if not averaged:
        raise DataError("No averaged reports to emit figure data from")
    largest_training = max(report.config["training_size"] for report in averaged)
    largest_reference = max(report.config["reference_size"] for report in averaged)
    points: Dict[str, Dict[Tuple[int, str], List[float]]] = {name: defaultdict(list) for name in FIGURES}

    for report in averaged:
        config = report.config
        x = int(config["match_size"])
        kernel = config["kernel"]
        method = _method(report)
        plain = report.party == PLAIN
        if config["training_size"] == largest_training:
            series = f"{method}-{kernel}" if plain else f"{method}-RS{config['reference_size']}-{kernel}"
            points["precision_vs_rs_size"][(x, series)].append(report.precision)
            points["recall_vs_rs_size"][(x, series)].append(report.recall)
        if config["reference_size"] == largest_reference:
            series = f"{method}-{kernel}" if plain else f"{method}-T{config['training_size']}-{kernel}"
            points["precision_vs_training_size"][(x, series)].append(report.precision)
            points["recall_vs_training_size"][(x, series)].append(report.recall)
        points["matching_times"][(x, f"{method}-{kernel}")].append(report.match_seconds)

    return {
        name: sorted(
            (x, series, sum(values) / len(values))
            for (x, series), values in figure.items()
        )
        for name, figure in points.items()
    }


def emit_figure_data(reports: Sequence[MetricsReport], out_dir: Union[str, Path]) -> List[Path]:
    """One CSV per figure with columns x, series_name, y"""
    if not reports:
        raise DataError("No reports to emit figure data from")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rows in figure_series(reports).items():
        path = out_dir / f"{name}.csv"
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["x", "series_name", "y"])
            writer.writerows((x, series, repr(y)) for x, series, y in rows)
        written.append(path)
        log.info(f"Wrote {len(rows)} points to {path}")
    return written
