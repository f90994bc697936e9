"""
Release Bug Predictor - Main Entry Point
Kommandozeile für die komplette Pipeline: Bug-Historie, Code-Metriken,
Korrelation, Regression und Auswertungen
"""
import argparse
import json
import logging
import re
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from core.config import RunConfig, build_run_config
from core.errors import (
    ExtractionError, InputNotFoundError, NoTrainingDataError, UsageError, ValidationError,
    handle_cli_error,
)
from evaluation.experiments import (
    LAST_RELEASES, WINDOW_VARIANT, ProjectDataset, config_sweep, cross_project_eval, pooled_fit,
    source_release_ids, windowed_eval,
)
from generator import report_writer
from generator.synthetic_project import (
    bug_export_for_history, build_synthetic_repository, synthesize_metric_history,
)
from metrics.extractor import extract_all
from metrics.git_repo import open_repository
from model.catalog import DEFAULT_CATALOG, MetricVector
from model.descriptor import load_descriptor, resolve_location, save_descriptor
from model.release import Timeline, require_valid
from stats.correlation import SelectionPolicy, correlation_matrix, pcc_band, select_metrics
from stats.regression import RegressionModel, RegressionOptions, fit_linear, design_matrix, predict
from tracker.assignment import assign_bugs, build_bug_history
from tracker.jira_client import fetch_issues
from tracker.jira_export import infer_export_format, parse_bug_export
from utils.logger import set_global_level, setup_logger
from utils.metric_cache import MetricCache

logger = setup_logger("main")

EXPERIMENTS = ("configs", "windows", "cross")
TRACKER_EXPORT_FILE = "tracker_export.json"


# ===== Hilfsfunktionen =====

def parse_windows(raw: Optional[str]) -> List[int]:
    """
    "1..9" oder "1,2,4" -> Liste von Fenstergrößen.

    Raises:
        UsageError: unlesbare Angabe
    """
    if raw is None or not raw.strip():
        return []
    text = raw.strip()
    match = re.fullmatch(r"(\d+)\s*\.\.\s*(\d+)", text)
    if match:
        low, high = int(match.group(1)), int(match.group(2))
        if low > high:
            raise UsageError(f"Leerer Fensterbereich: {raw}")
        return list(range(low, high + 1))
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"Ungültige Fensterliste: {raw}", "erwartet z.B. 1..9 oder 2,4,6")


def _require_project(config: RunConfig) -> Tuple[Timeline, Path]:
    if config.project is None:
        raise UsageError("--project <descriptor> fehlt")
    return require_valid(load_descriptor(config.project)), config.project


def project_dir(config: RunConfig, timeline: Timeline) -> Path:
    return config.out_dir / timeline.project


def _load_dataset(config: RunConfig, timeline: Timeline) -> ProjectDataset:
    directory = project_dir(config, timeline)
    return ProjectDataset(
        name=timeline.project,
        timeline=timeline,
        metrics=tuple(report_writer.read_metrics(directory / report_writer.METRICS_FILE)),
        history=report_writer.read_bug_history(directory / report_writer.BUG_HISTORY_FILE),
    )


def _load_source(config: RunConfig) -> ProjectDataset:
    if config.source is None:
        raise UsageError("--source <descriptor> fehlt")
    source = require_valid(load_descriptor(config.source))
    return _load_dataset(config, source)


def _policy(config: RunConfig) -> SelectionPolicy:
    return SelectionPolicy(
        min_abs_pcc=config.min_pcc,
        max_count=config.max_metrics,
        require_positive=config.require_positive,
    )


def _options(config: RunConfig) -> RegressionOptions:
    return RegressionOptions(with_intercept=config.with_intercept, nonneg=config.nonneg)


def _resolve_selection(config: RunConfig, dataset: ProjectDataset, explicit: Optional[str],
                       release_ids: Optional[Sequence[int]] = None) -> List[str]:
    """
    Metrik-Auswahl: --metrics, sonst selection.csv, sonst neu über release_ids berechnet.
    """
    if explicit:
        selected = [metric_id.strip() for metric_id in explicit.split(",") if metric_id.strip()]
        for metric_id in selected:
            DEFAULT_CATALOG.get(metric_id)
        return selected
    selection_path = project_dir(config, dataset.timeline) / report_writer.SELECTION_FILE
    if selection_path.is_file():
        selected = report_writer.read_selection(selection_path)
        logger.info(f"Auswahl aus {selection_path}: {', '.join(selected) or '-'}")
    else:
        matrix = correlation_matrix(dataset.metrics, dataset.history, DEFAULT_CATALOG.metric_ids, release_ids)
        selected = select_metrics(matrix, _policy(config))
    if not selected:
        raise ValidationError("Keine Metrik ausgewählt", f"--min-pcc {config.min_pcc} zu streng?")
    return selected


# ===== Kommandos =====

def cmd_ingest(config: RunConfig, fetch: bool = False) -> int:
    """Bug-Historie aus dem Tracker-Export: bug_history.csv und assignments.csv."""
    timeline, descriptor_path = _require_project(config)
    directory = project_dir(config, timeline)

    if fetch:
        if not timeline.tracker_url or not timeline.tracker_project_key:
            raise ValidationError("Deskriptor ohne tracker.url / tracker.project_key")
        data = fetch_issues(timeline.tracker_url, timeline.tracker_project_key)
        export_path = directory / TRACKER_EXPORT_FILE
        export_path.parent.mkdir(parents=True, exist_ok=True)
        export_path.write_bytes(data)
        export_format = "tracker_json"
    else:
        export_path = Path(resolve_location(timeline.bug_export_location, descriptor_path))
        if not export_path.is_file():
            raise InputNotFoundError(export_path)
        export_format = infer_export_format(export_path, timeline.bug_export_format)
        data = export_path.read_bytes()

    release_order = [spec.name for spec in timeline.ordered()]
    result = parse_bug_export(data, export_format, release_order=release_order)
    if not result.bugs:
        logger.warning(f"Keine Bugs im Export {export_path} ({result.non_bug_count} andere Issues)")

    report = assign_bugs(result.bugs, timeline, config.grace_days)
    history = build_bug_history(result.bugs, timeline, report.assignments)
    report_writer.write_bug_history(history, directory / report_writer.BUG_HISTORY_FILE)
    report_writer.write_assignments(report, timeline, directory / report_writer.ASSIGNMENTS_FILE)

    total = history.bug_count
    share = (history.inferred_total / total * 100) if total else 0.0
    print(f"{timeline.project}: {total} Bugs (labeled {history.labeled_total}, "
          f"inferred {history.inferred_total}, {share:.1f} % ohne Release-Label)")
    if report.late_bug_count:
        print(f"{report.late_bug_count} Bugs mehr als {config.grace_days} Tage nach t_r erstellt")
    for warning in result.warnings + report.warnings:
        logger.warning(warning)
    return 0


def cmd_metrics(config: RunConfig) -> int:
    """Code-Metriken aller Releases: metrics.csv (über den Metric Cache)."""
    timeline, descriptor_path = _require_project(config)
    location = resolve_location(timeline.repo_location, descriptor_path)
    repo = open_repository(location, clone_dir=config.cache_dir, branch=timeline.repo_branch)
    cache = MetricCache(config.cache_dir)

    vectors, failures = extract_all(repo, timeline, DEFAULT_CATALOG, cache, workers=config.workers)
    report_writer.write_metrics(vectors, timeline, project_dir(config, timeline) / report_writer.METRICS_FILE)
    print(f"{timeline.project}: {len(vectors)} Releases extrahiert "
          f"(Cache: {cache.hits} Treffer, {cache.misses} neu)")

    if failures:
        listing = "; ".join(f"{release_id}: {message}" for release_id, message in sorted(failures.items()))
        raise ExtractionError(f"{len(failures)} Releases nicht extrahiert", listing)
    return 0


def cmd_correlate(config: RunConfig) -> int:
    """PCC-Matrix aller Katalog-Metriken und Metrik-Auswahl."""
    timeline, _ = _require_project(config)
    dataset = _load_dataset(config, timeline)
    directory = project_dir(config, timeline)

    matrix = correlation_matrix(dataset.metrics, dataset.history, DEFAULT_CATALOG.metric_ids)
    selected = select_metrics(matrix, _policy(config))
    report_writer.write_correlation(matrix, directory / report_writer.CORRELATION_FILE)
    report_writer.write_selection(matrix, selected, directory / report_writer.SELECTION_FILE)

    correlations = matrix.bug_correlations()
    for metric_id in selected:
        print(f"{metric_id}: PCC {correlations[metric_id]:.4f} ({pcc_band(correlations[metric_id])})")
    if not selected:
        print("Keine Metrik erfüllt die Auswahl-Kriterien")
    return 0


def cmd_fit(config: RunConfig, metrics: Optional[str] = None) -> int:
    """Fit auf allen Releases mit Metriken und Bug-Zahl: model.json."""
    timeline, _ = _require_project(config)
    dataset = _load_dataset(config, timeline)
    selected = _resolve_selection(config, dataset, metrics)

    release_ids = sorted({v.release_id for v in dataset.metrics} & set(dataset.history.totals()))
    if not release_ids:
        raise NoTrainingDataError("keine Releases mit Metriken und Bug-Zahl")
    X, y = design_matrix(dataset.metrics, dataset.history, selected, release_ids)
    model = fit_linear(X, y, _options(config), selected, release_ids)
    report_writer.write_model(model, project_dir(config, timeline) / report_writer.MODEL_FILE)
    _print_model(model)
    return 0


def _print_model(model: RegressionModel) -> None:
    print(f"Achsenabschnitt: {model.intercept!r}")
    for metric_id, coefficient in model.coefficients.items():
        print(f"  {metric_id}: {coefficient!r}")


def cmd_predict(config: RunConfig, target_release: int, cross_from: Optional[Path] = None,
                metrics: Optional[str] = None) -> int:
    """
    Vorhersage für ein Release mit einem Modell aus allen früheren Releases.

    Mit cross_from wird der Pool um die Releases eines Quellprojekts ergänzt,
    deren Code-Freeze vor dem des Ziel-Releases liegt.
    """
    timeline, _ = _require_project(config)
    spec = timeline.release(target_release)
    dataset = _load_dataset(config, timeline)
    target_vector = dataset.vector(spec.id)

    available = set(dataset.history.totals()) & {v.release_id for v in dataset.metrics}
    train_ids = [s.id for s in timeline.ordered() if s.t_f < spec.t_f and s.id in available]
    if not train_ids and cross_from is None:
        raise NoTrainingDataError(f"kein Release vor {spec.name}")
    selected = _resolve_selection(config, dataset, metrics, train_ids if len(train_ids) >= 2 else None)

    if cross_from is not None:
        source = _load_dataset(config, require_valid(load_descriptor(cross_from)))
        source_ids = source_release_ids(source, spec.t_f)
        model = pooled_fit(source, dataset, selected, source_ids, train_ids, _options(config))
        print(f"Pool: {len(source_ids)} Releases {source.name} + {len(train_ids)} Releases {timeline.project}")
    else:
        X, y = design_matrix(dataset.metrics, dataset.history, selected, train_ids)
        model = fit_linear(X, y, _options(config), selected, train_ids)

    record = predict(model, target_vector).with_actual(dataset.history.total_for(spec.id))
    print(f"{timeline.project} {spec.name}: vorhergesagt {record.predicted!r} Bugs"
          + (" (auf 0 begrenzt)" if record.clamped else ""))
    _print_model(model)

    if len(train_ids) >= 2:
        correlations = correlation_matrix(dataset.metrics, dataset.history, selected, train_ids).bug_correlations()
        for metric_id in selected:
            r = correlations[metric_id]
            print(f"  PCC {metric_id}: {'-' if r is None else f'{r:.4f}'} ({pcc_band(r)})")
    if record.actual is not None:
        error = "undefiniert" if record.error is None else repr(record.error)
        print(f"tatsächlich {record.actual}, Fehler {error}")

    path = project_dir(config, timeline) / f"prediction_{spec.id}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"model": json.loads(model.model_dump_json()), "prediction": json.loads(record.model_dump_json())}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def cmd_evaluate(config: RunConfig, experiment: str, metrics: Optional[str] = None) -> int:
    """Auswertungen: configs (vier Varianten), windows (Fensterlänge), cross (projektübergreifend)."""
    if experiment not in EXPERIMENTS:
        raise UsageError(f"Unbekannte Auswertung: {experiment}", f"erlaubt: {', '.join(EXPERIMENTS)}")
    if experiment == "cross" and config.source is None:
        raise UsageError("evaluate cross braucht --source <descriptor>")

    timeline, _ = _require_project(config)
    dataset = _load_dataset(config, timeline)
    selected = _resolve_selection(config, dataset, metrics)
    directory = project_dir(config, timeline)

    if experiment == "configs":
        rows = config_sweep(dataset.metrics, dataset.history, selected)
        report_writer.write_eval(rows, experiment, directory)
        report_writer.write_summary(rows, experiment, directory, with_last=True)
        print(report_writer.format_summary_table(rows, f"{timeline.project}: Regressions-Varianten", True))
    elif experiment == "windows":
        windows = config.windows or list(range(1, min(10, len(dataset.metrics))))
        study = windowed_eval(dataset.metrics, dataset.history, selected, windows, include_all_history=True)
        report_writer.write_eval(study.rows, experiment, directory)
        report_writer.write_summary(study.rows, experiment, directory, with_last=True)
        report_writer.write_window_pcc(study.correlations, directory / report_writer.WINDOW_PCC_FILE)
        print(report_writer.format_summary_table(
            study.rows, f"{timeline.project}: Fensterlänge ({WINDOW_VARIANT}, letzte {LAST_RELEASES})", True))
    else:
        source = _load_source(config)
        rows = cross_project_eval(source, dataset, selected)
        report_writer.write_eval(rows, experiment, directory)
        report_writer.write_summary(rows, experiment, directory)
        print(report_writer.format_summary_table(rows, f"{timeline.project} mit {source.name}"))
    return 0


def cmd_gen_synthetic(config: RunConfig, kind: str, releases: int, seed: int, noise: float,
                      name: str, regime_change_at: Optional[int] = None) -> int:
    """
    Synthetisches Projekt: Deskriptor, Bug-Export und (je nach Art) Repository oder Metriken.

    kind "repo":    <out>/<name>/src/repo + ground_truth.csv
    kind "history": Metrik-Historie direkt als <out>/<name>/metrics.csv
    """
    directory = config.out_dir / name
    source_dir = directory / "src"
    if kind == "repo":
        synthetic = build_synthetic_repository(source_dir / "repo", releases, seed, project=name)
        timeline = synthetic.timeline.model_copy(update={"repo_location": "repo"})
        history = synthetic.history
        truth = [MetricVector(release_id=p.release_id, values=p.values) for p in synthetic.ground_truth]
        report_writer.write_metrics(truth, timeline, source_dir / "ground_truth.csv")
    elif kind == "history":
        regime_law = {"commits": 0.02, "new_loc": 0.2} if regime_change_at else None
        dataset = synthesize_metric_history(name, releases, noise=noise, seed=seed,
                                            regime_change_at=regime_change_at, regime_law=regime_law)
        timeline = dataset.timeline
        history = dataset.history
        report_writer.write_metrics(dataset.metrics, timeline, directory / report_writer.METRICS_FILE)
    else:
        raise UsageError(f"Unbekannte Art: {kind}", "erlaubt: repo, history")

    source_dir.mkdir(parents=True, exist_ok=True)
    (source_dir / "bugs.json").write_bytes(bug_export_for_history(history, timeline))
    save_descriptor(timeline, source_dir / "project.yaml")
    print(f"Synthetisches Projekt {name}: {source_dir / 'project.yaml'}")
    return 0


# ===== Argumente =====

def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--project", type=Path, help="Projekt-Deskriptor (YAML)")
    common.add_argument("--out", type=Path, help="Output-Verzeichnis")
    common.add_argument("--cache", type=Path, help="Cache-Verzeichnis")
    common.add_argument("--grace-days", type=int)
    common.add_argument("--min-pcc", type=float)
    common.add_argument("--max-metrics", type=int)
    common.add_argument("--allow-negative", action="store_true", help="negative PCC bei der Auswahl zulassen")
    common.add_argument("--intercept", action=argparse.BooleanOptionalAction, default=None)
    fit = common.add_mutually_exclusive_group()
    fit.add_argument("--nonneg", dest="nonneg", action="store_true", default=None)
    fit.add_argument("--free", dest="nonneg", action="store_false")
    common.add_argument("--windows", help="z.B. 1..9 oder 2,4,6")
    common.add_argument("--source", type=Path, help="Deskriptor des Quellprojekts")
    common.add_argument("--metrics", help="Metrik-IDs, kommagetrennt (überschreibt die Auswahl)")
    common.add_argument("--workers", type=int)
    common.add_argument("--verbose", "-v", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="predictor", description="Vorhersage der Rest-Bugs eines Releases")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("ingest-bugs", parents=[common], help="Bug-Historie aus dem Tracker-Export") \
        .add_argument("--fetch", action="store_true", help="Export vorher vom Tracker laden")
    commands.add_parser("extract-metrics", parents=[common], help="Code-Metriken aller Releases")
    commands.add_parser("correlate", parents=[common], help="PCC-Matrix und Metrik-Auswahl")
    commands.add_parser("fit", parents=[common], help="Modell auf allen Releases")

    predict_parser = commands.add_parser("predict", parents=[common], help="Vorhersage für ein Release")
    predict_parser.add_argument("target", type=int, help="Release-ID")
    predict_parser.add_argument("--cross-from", type=Path, help="Deskriptor eines Quellprojekts")

    commands.add_parser("evaluate", parents=[common], help="Auswertungen") \
        .add_argument("experiment", choices=EXPERIMENTS)
    commands.add_parser("cross-eval", parents=[common], help="wie evaluate cross")

    synthetic = commands.add_parser("gen-synthetic", parents=[common], help="synthetisches Testprojekt")
    synthetic.add_argument("--kind", choices=("repo", "history"), default="history")
    synthetic.add_argument("--releases", type=int, default=10)
    synthetic.add_argument("--seed", type=int, default=0)
    synthetic.add_argument("--noise", type=float, default=0.0)
    synthetic.add_argument("--name", default="synthetic")
    synthetic.add_argument("--regime-change-at", type=int)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return build_run_config(
        project=args.project,
        out_dir=args.out,
        cache_dir=args.cache,
        grace_days=args.grace_days,
        min_pcc=args.min_pcc,
        max_metrics=args.max_metrics,
        require_positive=False if args.allow_negative else None,
        with_intercept=args.intercept,
        nonneg=args.nonneg,
        windows=parse_windows(args.windows) or None,
        source=args.source,
        workers=args.workers,
    )


def run(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    command = args.command
    if command == "ingest-bugs":
        return cmd_ingest(config, fetch=args.fetch)
    if command == "extract-metrics":
        return cmd_metrics(config)
    if command == "correlate":
        return cmd_correlate(config)
    if command == "fit":
        return cmd_fit(config, args.metrics)
    if command == "predict":
        return cmd_predict(config, args.target, args.cross_from, args.metrics)
    if command == "evaluate":
        return cmd_evaluate(config, args.experiment, args.metrics)
    if command == "cross-eval":
        return cmd_evaluate(config, "cross", args.metrics)
    if command == "gen-synthetic":
        return cmd_gen_synthetic(config, args.kind, args.releases, args.seed, args.noise,
                                 args.name, args.regime_change_at)
    raise UsageError(f"Unbekanntes Kommando: {command}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Einstiegspunkt der Kommandozeile.

    Returns:
        Exit-Code (0 Erfolg, sonst der Code der Fehlerklasse)
    """
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_global_level(logging.DEBUG)
    try:
        return run(args)
    except Exception as e:
        return handle_cli_error(e, sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
