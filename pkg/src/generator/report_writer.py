"""
Report Writer - CSV- und JSON-Dateien aller Pipeline-Schritte

Alle CSVs: UTF-8, Komma, Kopfzeile, "\\n" als Zeilenende, Punkt als
Dezimaltrenner, reelle Zahlen in voller Genauigkeit. Fehlende Werte sind
leere Zellen.
"""
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

from core.errors import InputNotFoundError, ValidationError
from evaluation.experiments import EvalRow, ErrorSummary, WindowCorrelation
from model.bugs import BugHistory, ReleaseBugCount
from model.catalog import DEFAULT_CATALOG, MetricCatalog, MetricVector
from model.release import Timeline
from stats.correlation import CorrelationMatrix, pcc_band
from stats.regression import RegressionModel
from tracker.assignment import AssignmentReport
from utils.logger import setup_logger

logger = setup_logger("report_writer")

BUG_HISTORY_FILE = "bug_history.csv"
ASSIGNMENTS_FILE = "assignments.csv"
METRICS_FILE = "metrics.csv"
CORRELATION_FILE = "correlation.csv"
SELECTION_FILE = "selection.csv"
MODEL_FILE = "model.json"
WINDOW_PCC_FILE = "window_pcc.csv"

SUMMARY_FIELDS = ["n", "median", "mean", "max", "min", "outliers"]


def _write_csv(df: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    logger.info(f"Geschrieben: {path}")
    return path


def _read_csv(path, **kwargs) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise InputNotFoundError(path)
    return pd.read_csv(path, float_precision="round_trip", keep_default_na=True, **kwargs)


# ===== Bug-Historie =====

def write_bug_history(history: BugHistory, path) -> Path:
    df = pd.DataFrame(
        [(c.release_id, c.release_name, c.labeled_count, c.inferred_count, c.total_count) for c in history.counts],
        columns=["release_id", "release_name", "labeled", "inferred", "total"],
    )
    return _write_csv(df, path)


def read_bug_history(path) -> BugHistory:
    df = _read_csv(path, dtype={"release_name": str})
    required = {"release_id", "release_name", "labeled", "inferred"}
    if not required <= set(df.columns):
        raise ValidationError(f"{path}: Spalten fehlen", str(sorted(required - set(df.columns))))
    return BugHistory(counts=tuple(
        ReleaseBugCount(
            release_id=int(row.release_id),
            release_name=str(row.release_name),
            labeled_count=int(row.labeled),
            inferred_count=int(row.inferred),
        )
        for row in df.itertuples(index=False)
    ))


def write_assignments(report: AssignmentReport, timeline: Timeline, path) -> Path:
    names = {spec.id: spec.name for spec in timeline.releases}
    df = pd.DataFrame(
        [(a.bug_key, a.release_id, names.get(a.release_id, ""), a.source.value, a.flag or "")
         for a in report.assignments],
        columns=["bug_key", "release_id", "release_name", "source", "flag"],
    )
    return _write_csv(df, path)


# ===== Metriken =====

def write_metrics(vectors: Sequence[MetricVector], timeline: Timeline, path,
                  catalog: MetricCatalog = DEFAULT_CATALOG) -> Path:
    names = {spec.id: spec.name for spec in timeline.releases}
    rows = []
    for vector in sorted(vectors, key=lambda v: v.release_id):
        catalog.check(vector)
        rows.append([vector.release_id, names.get(vector.release_id, "")] +
                    [float(vector.values[metric_id]) for metric_id in catalog.metric_ids])
    df = pd.DataFrame(rows, columns=["release_id", "release_name"] + catalog.metric_ids)
    return _write_csv(df, path)


def read_metrics(path, catalog: MetricCatalog = DEFAULT_CATALOG) -> List[MetricVector]:
    df = _read_csv(path, dtype={"release_name": str})
    missing = [metric_id for metric_id in catalog.metric_ids if metric_id not in df.columns]
    if missing:
        raise ValidationError(f"{path}: Metrik-Spalten fehlen", ", ".join(missing))
    vectors = []
    for record in df.to_dict(orient="records"):
        values = {metric_id: float(record[metric_id]) for metric_id in catalog.metric_ids}
        vectors.append(catalog.check(MetricVector(release_id=int(record["release_id"]), values=values)))
    return vectors


# ===== Korrelation und Auswahl =====

def write_correlation(matrix: CorrelationMatrix, path) -> Path:
    df = pd.DataFrame(
        [[label] + list(row) for label, row in zip(matrix.labels, matrix.entries)],
        columns=["label"] + list(matrix.labels),
    )
    return _write_csv(df, path)


def read_correlation(path) -> CorrelationMatrix:
    df = _read_csv(path, dtype={"label": str})
    labels = tuple(df["label"])
    entries = tuple(
        tuple(None if pd.isna(value) else float(value) for value in df[list(labels)].iloc[i])
        for i in range(len(labels))
    )
    return CorrelationMatrix(labels=labels, entries=entries)


def write_selection(matrix: CorrelationMatrix, selected: Sequence[str], path) -> Path:
    correlations = matrix.bug_correlations()
    df = pd.DataFrame(
        [(metric_id, correlations[metric_id], pcc_band(correlations[metric_id])) for metric_id in selected],
        columns=["metric_id", "pcc", "band"],
    )
    return _write_csv(df, path)


def read_selection(path) -> List[str]:
    df = _read_csv(path, dtype={"metric_id": str})
    return [str(metric_id) for metric_id in df["metric_id"]]


# ===== Modell =====

def write_model(model: RegressionModel, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline="\n") as f:
        f.write(model.model_dump_json(indent=2))
        f.write("\n")
    logger.info(f"Geschrieben: {path}")
    return path


def read_model(path) -> RegressionModel:
    path = Path(path)
    if not path.is_file():
        raise InputNotFoundError(path)
    return RegressionModel.model_validate_json(path.read_text(encoding="utf-8"))


# ===== Auswertungen =====

def eval_frame(rows: Sequence[EvalRow]) -> pd.DataFrame:
    records = [
        (row.label, r.release_id, r.predicted, r.actual, r.error, r.clamped, r.failure or "")
        for row in rows for r in row.records
    ]
    df = pd.DataFrame(records, columns=["row", "release_id", "predicted", "actual", "error", "clamped", "failure"])
    df["actual"] = df["actual"].astype("Int64")
    df["predicted"] = df["predicted"].astype("float64")
    df["error"] = df["error"].astype("float64")
    return df


def _summary_values(summary: Optional[ErrorSummary], prefix: str = "") -> Dict[str, object]:
    if summary is None:
        return {f"{prefix}{field}": None for field in SUMMARY_FIELDS}
    return {f"{prefix}{field}": getattr(summary, field) for field in SUMMARY_FIELDS}


def summary_frame(rows: Sequence[EvalRow], with_last: bool = False) -> pd.DataFrame:
    records = []
    for row in rows:
        record: Dict[str, object] = {"row": row.label}
        record.update(_summary_values(row.summary))
        record["missing"] = row.missing
        record["undefined"] = row.undefined
        if with_last:
            last = _summary_values(row.summary_last, "last4_")
            record["last4_median"] = last["last4_median"]
            record["last4_mean"] = last["last4_mean"]
        records.append(record)
    columns = ["row"] + SUMMARY_FIELDS + ["missing", "undefined"]
    if with_last:
        columns += ["last4_median", "last4_mean"]
    df = pd.DataFrame(records, columns=columns)
    for column in ("n", "outliers"):
        df[column] = df[column].astype("Int64")
    return df


def write_eval(rows: Sequence[EvalRow], experiment: str, directory) -> Path:
    return _write_csv(eval_frame(rows), Path(directory) / f"eval_{experiment}.csv")


def write_summary(rows: Sequence[EvalRow], experiment: str, directory, with_last: bool = False) -> Path:
    return _write_csv(summary_frame(rows, with_last), Path(directory) / f"summary_{experiment}.csv")


def write_window_pcc(correlations: Sequence[WindowCorrelation], path) -> Path:
    """Eine Zeile je Fenster, Spalten pcc_<metric>_median / pcc_<metric>_mean."""
    windows = sorted({c.window for c in correlations})
    metric_ids = list(dict.fromkeys(c.metric_id for c in correlations))
    lookup = {(c.window, c.metric_id): c for c in correlations}
    records = []
    for window in windows:
        record: Dict[str, object] = {"window": window}
        for metric_id in metric_ids:
            entry = lookup.get((window, metric_id))
            record[f"pcc_{metric_id}_median"] = entry.median if entry else None
            record[f"pcc_{metric_id}_mean"] = entry.mean if entry else None
        records.append(record)
    df = pd.DataFrame(records, columns=["window"] + [
        f"pcc_{m}_{stat}" for m in metric_ids for stat in ("median", "mean")])
    return _write_csv(df, path)


def format_summary_table(rows: Sequence[EvalRow], title: str, with_last: bool = False) -> str:
    """Lesbare Tabelle (Median, Mittel, Max, Min je Zeile) für die Konsole."""
    df = summary_frame(rows, with_last)
    columns = ["row", "median", "mean", "max", "min", "n", "outliers"]
    if with_last:
        columns += ["last4_median", "last4_mean"]
    table = df[columns].to_string(index=False, float_format=lambda value: f"{value:.3f}", na_rep="-")
    return f"{title}\n{table}"
