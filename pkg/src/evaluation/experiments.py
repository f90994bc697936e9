"""
Experiments - Die drei Auswertungen: Varianten-Vergleich, Fensterlänge, projektübergreifend

Jede Auswertung liefert EvalRows: eine Zeile je Konfiguration (Variante,
Fenstergröße oder Trainings-Pool) mit den Vorhersagen pro Release und
der Fehler-Zusammenfassung (Median, Mittel, Max, Min).
"""
import statistics
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from core.errors import NoTrainingDataError, PredictorError, ValidationError
from model.bugs import BugHistory
from model.catalog import MetricVector
from model.release import Timeline
from stats.correlation import pearson
from stats.regression import (
    VARIANTS, PredictionRecord, RegressionModel, RegressionOptions, design_matrix, fit_linear, predict,
)
from utils.logger import setup_logger

logger = setup_logger("experiments")

OUTLIER_LIMIT = 5.0
LAST_RELEASES = 4
WINDOW_VARIANT = "LR-PC+woI"
POOLED_LABEL = "pooled"
SOURCE_ONLY_LABEL = "source-only"


class ProjectDataset(BaseModel):
    """Timeline, Metrik-Vektoren und Bug-Historie eines Projekts"""

    model_config = ConfigDict(frozen=True)

    name: str
    timeline: Timeline
    metrics: Tuple[MetricVector, ...]
    history: BugHistory

    def vector(self, release_id: int) -> MetricVector:
        for vector in self.metrics:
            if vector.release_id == release_id:
                return vector
        raise ValidationError(f"{self.name}: keine Metriken für Release {release_id}")


class ErrorSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    median: float
    mean: float
    max: float
    min: float
    n: int
    outliers: int = 0


class EvalRow(BaseModel):
    """Eine Zeile einer Auswertung; summary ist aus records neu berechenbar"""

    model_config = ConfigDict(frozen=True)

    label: str
    records: Tuple[PredictionRecord, ...]
    summary: Optional[ErrorSummary] = None
    summary_last: Optional[ErrorSummary] = None

    @property
    def missing(self) -> int:
        return sum(1 for r in self.records if r.failure is not None)

    @property
    def undefined(self) -> int:
        return sum(1 for r in self.records if r.failure is None and r.error is None)


class WindowCorrelation(BaseModel):
    """Median und Mittel der PCC einer Metrik über alle Trainingsfenster der Größe w"""

    model_config = ConfigDict(frozen=True)

    window: int
    metric_id: str
    median: Optional[float] = None
    mean: Optional[float] = None
    n: int = 0


class WindowStudy(BaseModel):
    model_config = ConfigDict(frozen=True)

    rows: Tuple[EvalRow, ...]
    correlations: Tuple[WindowCorrelation, ...] = ()


# ===== Zusammenfassung =====

def summarize(records: Sequence[PredictionRecord]) -> ErrorSummary:
    """
    Median, Mittelwert, Maximum und Minimum der definierten Fehler.

    Raises:
        ValidationError: kein Record mit definiertem Fehler
    """
    errors = [r.error for r in records if r.error is not None]
    if not errors:
        raise ValidationError("Keine definierten Vorhersagefehler zum Zusammenfassen")
    return ErrorSummary(
        median=float(statistics.median(errors)),
        mean=float(statistics.fmean(errors)),
        max=float(max(errors)),
        min=float(min(errors)),
        n=len(errors),
        outliers=sum(1 for e in errors if e > OUTLIER_LIMIT),
    )


def _try_summarize(records: Sequence[PredictionRecord]) -> Optional[ErrorSummary]:
    if not any(r.error is not None for r in records):
        return None
    return summarize(records)


def build_row(label: str, records: Sequence[PredictionRecord], last: Optional[int] = None) -> EvalRow:
    records = tuple(records)
    summary_last = _try_summarize(records[-last:]) if last else None
    return EvalRow(label=label, records=records, summary=_try_summarize(records), summary_last=summary_last)


# ===== Splits =====

def expanding_splits(release_ids: Sequence[int], first: int = 1) -> Iterator[Tuple[List[int], int]]:
    """Trainiere auf allen Vorgängern: ([r1..r(k-1)], rk) für k > first."""
    for index in range(first, len(release_ids)):
        yield list(release_ids[:index]), release_ids[index]


def sliding_splits(release_ids: Sequence[int], window: int) -> Iterator[Tuple[List[int], int]]:
    """Trainiere auf den letzten window Vorgängern."""
    for index in range(window, len(release_ids)):
        yield list(release_ids[index - window:index]), release_ids[index]


def _release_order(metrics: Sequence[MetricVector], history: BugHistory) -> List[int]:
    totals = history.totals()
    return sorted({v.release_id for v in metrics} & set(totals))


def _fit_and_predict(
        metrics: Sequence[MetricVector],
        history: BugHistory,
        selected: Sequence[str],
        train_ids: Sequence[int],
        target: MetricVector,
        options: RegressionOptions
) -> PredictionRecord:
    """Ein Fit plus eine Vorhersage; Fehler werden als fehlende Vorhersage protokolliert."""
    actual = history.total_for(target.release_id)
    try:
        X, y = design_matrix(metrics, history, selected, train_ids)
        model = fit_linear(X, y, options, selected, train_ids)
        return predict(model, target).with_actual(actual)
    except PredictorError as e:
        logger.warning(f"Release {target.release_id}: keine Vorhersage ({e.error_code}: {e})")
        return PredictionRecord(release_id=target.release_id, actual=actual, failure=e.error_code)


# ===== Auswertungen =====

def config_sweep(
        metrics: Sequence[MetricVector],
        history: BugHistory,
        selected: Sequence[str],
        variants: Optional[Sequence[str]] = None
) -> List[EvalRow]:
    """
    Vergleicht die vier Regressions-Varianten.

    Für jedes Release k >= 2: Fit auf 1..k-1, Vorhersage für k.
    """
    order = _release_order(metrics, history)
    if len(order) < 3:
        raise ValidationError("Mindestens 3 Releases für den Varianten-Vergleich nötig", f"vorhanden: {order}")
    if not selected:
        raise ValidationError("Keine Metriken ausgewählt")

    by_id = {v.release_id: v for v in metrics}
    rows = []
    for label in variants or list(VARIANTS):
        options = VARIANTS[label]
        records = [
            _fit_and_predict(metrics, history, selected, train, by_id[target], options)
            for train, target in expanding_splits(order)
        ]
        rows.append(build_row(label, records, LAST_RELEASES))
    return rows


def _window_correlations(
        metrics: Sequence[MetricVector],
        history: BugHistory,
        selected: Sequence[str],
        order: Sequence[int],
        window: int
) -> List[WindowCorrelation]:
    by_id = {v.release_id: v for v in metrics}
    totals = history.totals()
    result = []
    for metric_id in selected:
        values = []
        if window >= 2:
            for train, _target in sliding_splits(order, window):
                r = pearson([by_id[rid].value(metric_id) for rid in train], [float(totals[rid]) for rid in train])
                if r is not None:
                    values.append(r)
        result.append(WindowCorrelation(
            window=window,
            metric_id=metric_id,
            median=float(statistics.median(values)) if values else None,
            mean=float(statistics.fmean(values)) if values else None,
            n=len(values),
        ))
    return result


def windowed_eval(
        metrics: Sequence[MetricVector],
        history: BugHistory,
        selected: Sequence[str],
        window_sizes: Sequence[int],
        include_all_history: bool = False
) -> WindowStudy:
    """
    Studie zur Fensterlänge mit LR-PC+woI.

    Für Fenster w und jedes Release k > w: Fit auf k-w..k-1, Vorhersage für k.
    Zusätzlich die Zusammenfassung der letzten 4 Releases und die PCC der
    ausgewählten Metriken je Fenster.

    Args:
        include_all_history: zusätzliche Zeile "all" (Fit auf allen Vorgängern)
    """
    order = _release_order(metrics, history)
    if not window_sizes:
        raise ValidationError("Keine Fenstergrößen angegeben")
    if any(w < 1 for w in window_sizes):
        raise ValidationError("Fenstergrößen müssen >= 1 sein", str(list(window_sizes)))
    if max(window_sizes) >= len(order):
        raise ValidationError(
            "Fenster muss kleiner als die Anzahl der Releases sein",
            f"max Fenster {max(window_sizes)}, Releases {len(order)}"
        )

    by_id = {v.release_id: v for v in metrics}
    options = VARIANTS[WINDOW_VARIANT]
    rows: List[EvalRow] = []
    correlations: List[WindowCorrelation] = []
    for window in window_sizes:
        records = [
            _fit_and_predict(metrics, history, selected, train, by_id[target], options)
            for train, target in sliding_splits(order, window)
        ]
        rows.append(build_row(str(window), records, LAST_RELEASES))
        correlations.extend(_window_correlations(metrics, history, selected, order, window))

    if include_all_history:
        records = [
            _fit_and_predict(metrics, history, selected, train, by_id[target], options)
            for train, target in expanding_splits(order)
        ]
        rows.append(build_row("all", records, LAST_RELEASES))

    return WindowStudy(rows=tuple(rows), correlations=tuple(correlations))


def source_release_ids(source: ProjectDataset, freeze) -> List[int]:
    """Quell-Releases mit Metriken und Bug-Zahl, deren Code-Freeze vor freeze liegt."""
    available = set(_release_order(source.metrics, source.history))
    return sorted(spec.id for spec in source.timeline.ordered() if spec.id in available and spec.t_f < freeze)


def pooled_fit(
        source: ProjectDataset,
        target: ProjectDataset,
        selected: Sequence[str],
        source_ids: Sequence[int],
        target_ids: Sequence[int],
        options: RegressionOptions
) -> RegressionModel:
    """
    Fit auf dem Pool aus Quell- und Ziel-Releases (ohne Normierung zwischen den Projekten).

    Raises:
        NoTrainingDataError: Pool ist leer
    """
    blocks_x, blocks_y = [], []
    for dataset, ids in ((source, source_ids), (target, target_ids)):
        if ids:
            X, y = design_matrix(dataset.metrics, dataset.history, selected, ids)
            blocks_x.extend(X.tolist())
            blocks_y.extend(y.tolist())
    if not blocks_x:
        raise NoTrainingDataError("leerer Trainings-Pool")
    training = [f"{source.name}:{rid}" for rid in source_ids] + [f"{target.name}:{rid}" for rid in target_ids]
    logger.debug(f"{target.name}: Pool {training}")
    return fit_linear(blocks_x, blocks_y, options, selected, list(target_ids))


def _pooled_prediction(
        source: ProjectDataset,
        target: ProjectDataset,
        selected: Sequence[str],
        source_ids: Sequence[int],
        target_ids: Sequence[int],
        target_vector: MetricVector,
        options: RegressionOptions
) -> PredictionRecord:
    actual = target.history.total_for(target_vector.release_id)
    try:
        model = pooled_fit(source, target, selected, source_ids, target_ids, options)
        return predict(model, target_vector).with_actual(actual)
    except PredictorError as e:
        logger.warning(f"{target.name} Release {target_vector.release_id}: keine Vorhersage ({e.error_code})")
        return PredictionRecord(release_id=target_vector.release_id, actual=actual, failure=e.error_code)


def cross_project_eval(
        source: ProjectDataset,
        target: ProjectDataset,
        selected: Sequence[str],
        max_target_releases: int = LAST_RELEASES,
        include_source_only: bool = True
) -> List[EvalRow]:
    """
    Vorhersage der ersten Releases eines jungen Projekts mit Hilfe eines älteren.

    Für Ziel-Release k: Pool aus allen Quell-Releases mit t_f vor t_f(k)
    plus Ziel-Releases 1..k-1, Fit LR-PC+woI, Vorhersage für k. Keine
    Normierung zwischen den Projekten.

    Raises:
        NoTrainingDataError: Pool für das erste Ziel-Release ist leer
    """
    options = VARIANTS[WINDOW_VARIANT]
    target_order = _release_order(target.metrics, target.history)[:max_target_releases]

    pooled: List[PredictionRecord] = []
    source_only: List[PredictionRecord] = []
    for index, release_id in enumerate(target_order):
        freeze = target.timeline.release(release_id).t_f
        source_ids = source_release_ids(source, freeze)
        target_ids = target_order[:index]
        if index == 0 and not source_ids:
            raise NoTrainingDataError(f"kein {source.name}-Release vor dem Code-Freeze von {target.name} {release_id}")

        vector = target.vector(release_id)
        pooled.append(_pooled_prediction(source, target, selected, source_ids, target_ids, vector, options))
        if include_source_only:
            source_only.append(_pooled_prediction(source, target, selected, source_ids, [], vector, options))

    rows = [build_row(POOLED_LABEL, pooled)]
    if include_source_only:
        rows.append(build_row(SOURCE_ONLY_LABEL, source_only))
    return rows
