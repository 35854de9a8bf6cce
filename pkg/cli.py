#!/usr/bin/env python3
"""
splitlink command-line interface.

Every subcommand accepts the global flags (--seed, --config, --kernel, --c,
--gamma, --rs, --mapping, --train-size, --errors-per-row, --repetitions,
--tolerance, --max-passes, --operations, --alphabet, --out). Values come from
the defaults, then the --config file, then the flags.

Exit codes: 0 success, 2 configuration error, 3 protocol abort, 4 data error.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from models.config import (
    ExperimentConfig, GridConfig, Kernel, experiment_config_from_mapping, grid_config_from_mapping, load_config,
    parse_gamma,
)
from models.errors import ConfigurationError, DataError, SplitLinkError
from models.record import Party, RecordSet
from models.reference_set import AttributeMapping, ReferenceSet
from protocol.errors import ProtocolError
from protocol.session import run_party, simulate_session
from protocol.transport import connect, listen
from repositories import (
    MatchArrayRepository, MetricsReportRepository, RecordSetRepository, ReferenceSetRepository,
    SmashedDataRepository, SvmModelRepository, TrainingDataRepository,
)
from services.datagen_service import (
    CORRUPTION_STREAM, SHUFFLE_STREAM, TRAINING_STREAM, TrainingDataBuilder, corrupt_recordset,
    deduplicate, derive_seed, sample_records, shuffled_order,
)
from services.evaluation_service import (
    emit_figure_data, ground_truth, run_experiment, run_grid, score,
)
from services.linkage_service import plain_match, split_match, train_plain_baseline
from services.smashing_service import SmashingService
from services.svm_service import SmoTrainer

log = logging.getLogger("splitlink")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROTOCOL = 3
EXIT_DATA = 4


# Flags taking the config file's raw text, keyed by config key
EXPERIMENT_FLAGS = ("repetitions", "tolerance", "max_passes", "operations", "alphabet")
GRID_FLAGS = ("match_sizes", "reference_sizes", "training_sizes", "setups")


def _raw_flags(args: argparse.Namespace, keys: Sequence[str]) -> Dict[str, str]:
    return {key: getattr(args, key) for key in keys if getattr(args, key, None) is not None}


def _columns(text: Optional[str]) -> Optional[List[str]]:
    return [name.strip() for name in text.split(",") if name.strip()] if text else None


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults < --config file < flags"""
    cfg = load_config(args.config)[0] if args.config else ExperimentConfig()
    cfg = cfg.with_overrides(
        kernel=Kernel.parse(args.kernel) if args.kernel else None,
        C=args.c,
        rng_seed=args.seed,
        mapping=AttributeMapping.parse(args.mapping) if args.mapping else None,
        training_size=args.train_size,
        errors_per_row=args.errors_per_row,
        workers=args.workers
    )
    if args.gamma is not None:
        cfg = replace(cfg, rbf_gamma=parse_gamma(args.gamma))
    return experiment_config_from_mapping(_raw_flags(args, EXPERIMENT_FLAGS), cfg)


def build_grid(args: argparse.Namespace) -> GridConfig:
    grid = load_config(args.config)[1] if args.config else GridConfig()
    return grid_config_from_mapping(_raw_flags(args, GRID_FLAGS), grid)


def _require(value, flag: str):
    if not value:
        raise ConfigurationError(f"{flag} is required for this command")
    return value


def _load_records(path: str, party: Party, columns: Optional[str]) -> RecordSet:
    return RecordSetRepository(party, _columns(columns)).load(path)


def _load_reference(args: argparse.Namespace) -> ReferenceSet:
    return ReferenceSetRepository(_columns(args.rs_columns)).load(_require(args.rs, "--rs"))


# Commands

def cmd_prepare(args, cfg: ExperimentConfig) -> int:
    recs = deduplicate(_load_records(args.input, Party(args.party), args.columns))
    RecordSetRepository(recs.party).save(recs, _require(args.out, "--out"))
    print(f"{len(recs)} deduplicated records written to {args.out}")
    return EXIT_OK


def cmd_corrupt(args, cfg: ExperimentConfig) -> int:
    recs = _load_records(args.input, Party(args.party), args.columns)
    corrupted = corrupt_recordset(recs, cfg.corruption_spec(derive_seed(cfg.rng_seed, CORRUPTION_STREAM)))
    if args.as_party:
        order = shuffled_order(len(corrupted), derive_seed(cfg.rng_seed, SHUFFLE_STREAM))
        corrupted = corrupted.assign_party(Party(args.as_party), order)
    RecordSetRepository(corrupted.party).save(corrupted, _require(args.out, "--out"))
    print(f"{len(corrupted)} corrupted records written to {args.out}")
    return EXIT_OK


def cmd_smash(args, cfg: ExperimentConfig) -> int:
    recs = _load_records(args.input, Party(args.party), args.columns)
    service = SmashingService(_load_reference(args), cfg.mapping)
    smashed = service.map_recordset(recs, workers=cfg.workers)
    SmashedDataRepository().save(smashed, _require(args.out, "--out"))
    print(f"{len(smashed)} smashed vectors written to {args.out}")
    return EXIT_OK


def cmd_synth(args, cfg: ExperimentConfig) -> int:
    recs = _load_records(args.input, Party(args.party), args.columns)
    seed = derive_seed(cfg.rng_seed, TRAINING_STREAM, 0 if recs.party is Party.A else 1)
    training = sample_records(recs, cfg.training_size, seed)
    service = SmashingService(_load_reference(args), cfg.mapping)
    examples = TrainingDataBuilder(service, cfg.corruption_spec(seed)).build(
        service.map_recordset(training, workers=cfg.workers), training
    )
    TrainingDataRepository().save(examples, _require(args.out, "--out"))
    print(f"{len(examples)} training examples written to {args.out}")
    return EXIT_OK


def cmd_train(args, cfg: ExperimentConfig) -> int:
    examples = TrainingDataRepository().load(args.input)
    model = SmoTrainer(cfg.svm_config(), seed=cfg.rng_seed).train(examples)
    SvmModelRepository().save(model, _require(args.out, "--out"))
    print(f"Trained {model} written to {args.out}")
    return EXIT_OK


def cmd_match(args, cfg: ExperimentConfig) -> int:
    recs_a = _load_records(args.records_a, Party.A, args.columns)
    recs_b = _load_records(args.records_b, Party.B, args.columns)
    session_a, session_b = simulate_session(recs_a, recs_b, _load_reference(args), cfg)
    out = Path(_require(args.out, "--out"))
    repository = MatchArrayRepository()
    for session in (session_a, session_b):
        path = repository.save(session.result, out / f"match_{session.role.value}.csv")
        print(
            f"Party {session.role.value}: {session.result.match_count()} matches "
            f"in {session.party.match_seconds:.2f} s -> {path}"
        )
    return EXIT_OK


def cmd_match_smashed(args, cfg: ExperimentConfig) -> int:
    repository = SmashedDataRepository()
    DA = repository.load(args.smashed_a)
    DB = repository.load(args.smashed_b)
    model = SvmModelRepository().load(args.model)
    result = split_match(DA, DB, model, workers=cfg.workers)
    MatchArrayRepository().save(result, _require(args.out, "--out"))
    print(f"{result.match_count()} of {len(result)} pairs matched, written to {args.out}")
    return EXIT_OK


def _run_tcp(args, cfg: ExperimentConfig, role: Party, transport) -> int:
    recs = _load_records(args.input, role, args.columns)
    with transport:
        result = run_party(role, recs, _load_reference(args), cfg, transport)
    MatchArrayRepository().save(result, _require(args.out, "--out"))
    print(f"Party {role.value}: {result.match_count()} matches written to {args.out}")
    return EXIT_OK


def cmd_serve(args, cfg: ExperimentConfig) -> int:
    return _run_tcp(args, cfg, Party(args.party), listen(args.host, args.port, args.timeout))


def cmd_connect(args, cfg: ExperimentConfig) -> int:
    return _run_tcp(args, cfg, Party(args.party), connect(args.host, args.port))


def cmd_baseline(args, cfg: ExperimentConfig) -> int:
    recs_a = _load_records(args.records_a, Party.A, args.columns)
    recs_b = _load_records(args.records_b, Party.B, args.columns)
    seed = derive_seed(cfg.rng_seed, TRAINING_STREAM, 2)
    training = sample_records(recs_a, cfg.training_size, seed)
    model = train_plain_baseline(training, cfg.corruption_spec(seed), cfg.svm_config())
    result = plain_match(recs_a, recs_b, model, workers=cfg.workers)
    MatchArrayRepository().save(result, _require(args.out, "--out"))
    print(f"Plain baseline: {result.match_count()} matches written to {args.out}")
    return EXIT_OK


def cmd_score(args, cfg: ExperimentConfig) -> int:
    ma = MatchArrayRepository().load(args.matches)
    truth = ground_truth(
        _load_records(args.records_a, Party.A, args.columns),
        _load_records(args.records_b, Party.B, args.columns)
    )
    report = score(ma, truth, party=args.label, seed=cfg.rng_seed)
    if args.out:
        MetricsReportRepository().save([report], args.out)
    print(f"tp={report.tp} fp={report.fp} fn={report.fn} "
          f"precision={report.precision:.4f} recall={report.recall:.4f}")
    return EXIT_OK


def cmd_experiment(args, cfg: ExperimentConfig) -> int:
    if args.grid:
        reports = run_grid(
            build_grid(args), cfg, args.records, args.rs, args.parallel_cells,
            _columns(args.columns), _columns(args.rs_columns)
        )
    else:
        cfg = cfg.with_overrides(match_size=args.match_size, reference_size=args.reference_size)
        reports = run_experiment(cfg, args.records, args.rs, _columns(args.columns), _columns(args.rs_columns))
    out = Path(_require(args.out, "--out"))
    MetricsReportRepository().save(reports, out / "metrics.csv")
    if args.figures:
        emit_figure_data(reports, out / "figures")
    for report in reports:
        if report.is_average:
            print(f"{report.party:>5}  precision={report.precision:.4f}  recall={report.recall:.4f}  "
                  f"match={report.match_seconds:.2f}s  {report.config.get('kernel')} "
                  f"match_size={report.config.get('match_size')} RS={report.config.get('reference_size')} "
                  f"train={report.config.get('training_size')}")
    return EXIT_OK


def cmd_emit_figures(args, cfg: ExperimentConfig) -> int:
    reports = MetricsReportRepository().load(args.metrics)
    for path in emit_figure_data(reports, _require(args.out, "--out")):
        print(path)
    return EXIT_OK


# Parser

def _global_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("global options")
    group.add_argument("--seed", type=int, help="Base random seed")
    group.add_argument("--config", help="key=value configuration file")
    group.add_argument("--kernel", choices=[kernel.value for kernel in Kernel])
    group.add_argument("--c", type=float, help="SVM box constraint C")
    group.add_argument("--gamma", help="RBF gamma, or 'auto'")
    group.add_argument("--rs", help="Reference set CSV")
    group.add_argument("--rs-columns", help="Comma-separated reference set columns")
    group.add_argument("--mapping", help="Attribute mapping rec:ref,rec:ref,...")
    group.add_argument("--train-size", type=int, help="Records used for synthetic training")
    group.add_argument("--errors-per-row", type=int, help="Corruption edits per record")
    group.add_argument("--workers", type=int, help="Worker threads for smashing and matching")
    group.add_argument("--repetitions", help="Repetitions per experiment cell")
    group.add_argument("--tolerance", help="SMO KKT tolerance")
    group.add_argument("--max-passes", help="SMO passes without progress before stopping")
    group.add_argument("--operations", help="Corruption operations, e.g. insert,delete,substitute,transpose")
    group.add_argument("--alphabet", help="Letters drawn by insertions and substitutions")
    group.add_argument("--out", help="Output file or directory")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", help="Log debug output")
    verbosity.add_argument("--quiet", "-q", action="store_true", help="Log warnings and errors only")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(
        prog="splitlink",
        description="Two-party privacy-preserving record linkage over reference-set distances"
    )
    subparsers = parser.add_subparsers(title="commands", dest="command")
    subparsers.required = True

    def add(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)
        sub.set_defaults(handler=handler)
        return sub

    def records_input(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--input", required=True, help="Records CSV with a header row")
        sub.add_argument("--party", choices=["A", "B"], default="A")
        sub.add_argument("--columns", help="Comma-separated matching attributes")

    def two_parties(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--records-a", required=True)
        sub.add_argument("--records-b", required=True)
        sub.add_argument("--columns", help="Comma-separated matching attributes")

    records_input(add("prepare", cmd_prepare, "Deduplicate a records file"))
    corrupt = add("corrupt", cmd_corrupt, "Apply seeded random edits to every record")
    records_input(corrupt)
    corrupt.add_argument("--as-party", choices=["A", "B"], help="Shuffle and re-identify for this party")
    records_input(add("smash", cmd_smash, "Map records to reference-set distance vectors"))
    records_input(add("synth", cmd_synth, "Build synthetic training data from own records"))
    train = add("train", cmd_train, "Train an SVM on a training-data CSV")
    train.add_argument("--input", required=True)
    two_parties(add("match", cmd_match, "Run both parties in-process; writes match_A.csv and match_B.csv"))
    offline = add(
        "match-smashed", cmd_match_smashed, "Classify every pair of two smashed-data files with a model file"
    )
    offline.add_argument("--smashed-a", required=True, help="Party A smashed-data file (rows of the result)")
    offline.add_argument("--smashed-b", required=True, help="Party B smashed-data file")
    offline.add_argument("--model", required=True, help="Trained SVM model file")

    for name, handler, help_text, default_party in (
        ("serve", cmd_serve, "Run one party, listening for the peer", "A"),
        ("connect", cmd_connect, "Run one party, connecting to the peer", "B"),
    ):
        sub = add(name, handler, help_text)
        records_input(sub)
        sub.set_defaults(party=default_party)
        sub.add_argument("--host", default="127.0.0.1")
        sub.add_argument("--port", type=int, default=7450)
        if name == "serve":
            sub.add_argument("--timeout", type=float, default=None, help="Seconds to wait for the peer")

    two_parties(add("baseline", cmd_baseline, "Plain (non-private) SVM baseline"))
    score_parser = add("score", cmd_score, "Precision and recall of a match file")
    two_parties(score_parser)
    score_parser.add_argument("--matches", required=True)
    score_parser.add_argument("--label", default="A", help="Party label for the report")

    experiment = add("experiment", cmd_experiment, "Run the evaluation harness")
    experiment.add_argument("--records", help="Source records CSV (synthetic fixtures when omitted)")
    experiment.add_argument("--columns", help="Comma-separated matching attributes")
    experiment.add_argument("--match-size", type=int)
    experiment.add_argument("--reference-size", type=int)
    experiment.add_argument("--grid", action="store_true", help="Run every grid cell")
    experiment.add_argument("--parallel-cells", type=int, default=1)
    experiment.add_argument("--figures", action="store_true", help="Also emit figure data")
    experiment.add_argument("--match-sizes", help="Grid match-set sizes, e.g. 2000,5000")
    experiment.add_argument("--reference-sizes", help="Grid reference set sizes")
    experiment.add_argument("--training-sizes", help="Grid training sizes")
    experiment.add_argument("--setups", help="Grid SVM setups kernel:C,..., e.g. linear:100,rbf:0.01")

    figures = add("emit-figures", cmd_emit_figures, "Write figure CSVs from a metrics file")
    figures.add_argument("--metrics", required=True)
    return parser


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args)
    try:
        return args.handler(args, build_config(args))
    except ConfigurationError as e:
        log.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except ProtocolError as e:
        log.error(f"Protocol aborted: {e}")
        return EXIT_PROTOCOL
    except (DataError, SplitLinkError) as e:
        stage = getattr(e, "stage", None)
        log.error(f"Data error{f' in {stage}' if stage else ''}: {e}")
        return EXIT_DATA
    except OSError as e:
        log.error(f"I/O error: {e}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
