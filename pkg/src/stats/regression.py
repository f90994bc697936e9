"""
Regression - Lineare Regression der Bug-Zahl auf ausgewählte Code-Metriken

bugs = b0 + b1*x1 + ... + bn*xn

Vier Varianten:
- BLR        mit Achsenabschnitt, Koeffizienten frei
- LR-PC      mit Achsenabschnitt, alle Koeffizienten >= 0 (NNLS)
- LR-woI     ohne Achsenabschnitt (b0 = 0), Koeffizienten frei
- LR-PC+woI  ohne Achsenabschnitt, Koeffizienten >= 0

Unterbestimmte Systeme liefern die Lösung minimaler Norm (im skalierten Raum).
"""
import itertools
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.optimize import nnls

from core.errors import ConvergenceError, NoTrainingDataError, NumericError, ValidationError
from model.bugs import BugHistory
from model.catalog import MetricVector
from utils.logger import setup_logger

logger = setup_logger("regression")

KKT_TOLERANCE = 1e-6
RNORM_TOLERANCE = 1e-6
# maximale Spaltenzahl für die Suche über alle Träger (2^p - 1 Teilmengen)
ENUMERATION_LIMIT = 12


class RegressionOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    with_intercept: bool = False
    nonneg: bool = True


VARIANTS: Dict[str, RegressionOptions] = {
    "BLR": RegressionOptions(with_intercept=True, nonneg=False),
    "LR-PC": RegressionOptions(with_intercept=True, nonneg=True),
    "LR-woI": RegressionOptions(with_intercept=False, nonneg=False),
    "LR-PC+woI": RegressionOptions(with_intercept=False, nonneg=True),
}


class RegressionModel(BaseModel):
    """Angepasstes Modell; bei nonneg sind alle Koeffizienten (inkl. Achsenabschnitt) >= 0"""

    model_config = ConfigDict(frozen=True)

    intercept: float = 0.0
    coefficients: Dict[str, float]
    options: RegressionOptions
    training_releases: Tuple[int, ...] = ()
    residual_norm: float = 0.0

    @property
    def metric_ids(self) -> List[str]:
        return list(self.coefficients)


class PredictionRecord(BaseModel):
    """
    Vorhersage für ein Release.

    error ist genau dann gesetzt, wenn actual bekannt und > 0 ist.
    failure ist gesetzt, wenn keine Vorhersage möglich war.
    """

    model_config = ConfigDict(frozen=True)

    release_id: int
    predicted: Optional[float] = None
    actual: Optional[int] = None
    error: Optional[float] = None
    clamped: bool = False
    failure: Optional[str] = None

    def with_actual(self, actual: Optional[int]) -> "PredictionRecord":
        error = None
        if actual is not None and self.predicted is not None:
            error = prediction_error(self.predicted, actual)
        return self.model_copy(update={"actual": actual, "error": error})


# ===== Fit =====

def _column_scales(X: np.ndarray) -> np.ndarray:
    """Maximaler Absolutwert je Spalte, 1.0 für Null-Spalten."""
    scales = np.max(np.abs(X), axis=0)
    scales[scales == 0] = 1.0
    return scales


def _kkt_violation(A: np.ndarray, b: np.ndarray, beta: np.ndarray, rnorm: float) -> Optional[str]:
    """
    Prüft eine NNLS-Lösung.

    Returns:
        None wenn beta optimal ist, sonst eine Beschreibung der Verletzung
    """
    if not np.all(np.isfinite(beta)) or np.any(beta < 0):
        return "Koeffizienten negativ oder nicht endlich"
    residual = b - A @ beta
    b_norm = max(1.0, float(np.linalg.norm(b)))
    actual = float(np.linalg.norm(residual))
    if abs(actual - rnorm) > RNORM_TOLERANCE * b_norm:
        return f"gemeldetes Residuum {rnorm:.6g} != tatsächliches {actual:.6g}"

    gradient = A.T @ residual
    tolerance = KKT_TOLERANCE * max(1.0, float(np.linalg.norm(A, ord="fro")) * b_norm)
    passive = beta > 0
    if np.any(np.abs(gradient[passive]) > tolerance) or np.any(gradient[~passive] > tolerance):
        return f"KKT verletzt (max |w| = {np.max(np.abs(gradient)):.3e})"
    return None


def _enumerate_supports(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Exakte NNLS-Lösung über alle Spalten-Teilmengen.

    Das Optimum ist die LS-Lösung auf seinem Träger; jede Teilmenge mit
    nichtnegativer LS-Lösung ist zulässig, die mit kleinstem Residuum gewinnt.
    Bei Gleichstand bleibt der kleinere Träger.
    """
    p = A.shape[1]
    best = np.zeros(p)
    best_norm = float(np.linalg.norm(b))
    tolerance = 1e-12 * max(1.0, best_norm)
    for size in range(1, p + 1):
        for columns in itertools.combinations(range(p), size):
            sub, _, _, _ = np.linalg.lstsq(A[:, columns], b, rcond=None)
            if np.any(sub < 0):
                continue
            candidate = np.zeros(p)
            candidate[list(columns)] = sub
            norm = float(np.linalg.norm(b - A @ candidate))
            if norm < best_norm - tolerance:
                best, best_norm = candidate, norm
    return best


def _solve_nnls(A: np.ndarray, b: np.ndarray, scales: Optional[np.ndarray] = None) -> np.ndarray:
    """
    NNLS (Active-Set nach Lawson/Hanson) im skalierten Raum mit Prüfung der Lösung.

    Verletzt das Ergebnis die KKT-Bedingungen, wird ohne Skalierung neu gelöst,
    danach für bis zu ENUMERATION_LIMIT Spalten über alle Träger.

    Raises:
        ConvergenceError: NNLS bricht ab oder keine optimale Lösung gefunden
    """
    maxiter = max(50, 30 * A.shape[1])
    try:
        beta, rnorm = nnls(A, b, maxiter=maxiter)
    except RuntimeError as e:
        raise ConvergenceError("NNLS nicht konvergiert", f"{A.shape[0]}x{A.shape[1]}: {e}")

    violation = _kkt_violation(A, b, beta, float(rnorm))
    if violation is None:
        return beta
    logger.warning(f"NNLS: {violation}, löse ohne Skalierung neu")

    if scales is not None:
        try:
            raw, raw_rnorm = nnls(A * scales, b, maxiter=maxiter)
            beta = raw * scales
            violation = _kkt_violation(A, b, beta, float(raw_rnorm))
            if violation is None:
                return beta
        except RuntimeError as e:
            violation = f"ohne Skalierung nicht konvergiert: {e}"
        logger.warning(f"NNLS: {violation}")

    if A.shape[1] <= ENUMERATION_LIMIT:
        logger.warning(f"NNLS: exakte Lösung über {2 ** A.shape[1] - 1} Träger")
        return _enumerate_supports(A, b)
    raise ConvergenceError("NNLS liefert keine optimale Lösung", f"{A.shape[0]}x{A.shape[1]}: {violation}")


def fit_linear(
        X,
        y,
        options: RegressionOptions = RegressionOptions(),
        metric_ids: Optional[Sequence[str]] = None,
        training_releases: Sequence[int] = ()
) -> RegressionModel:
    """
    Passt ein lineares Modell an.

    Args:
        X: Kovariaten (Releases x Metriken)
        y: Bug-Zahlen
        options: with_intercept / nonneg
        metric_ids: Namen der Spalten (default x1..xn)
        training_releases: IDs der Trainings-Releases (nur zur Dokumentation im Modell)

    Returns:
        RegressionModel mit Koeffizienten in Original-Einheiten

    Raises:
        NoTrainingDataError: keine Zeilen
        ValidationError: keine Spalten, falsche Dimensionen, nicht endliche Werte
        ConvergenceError: NNLS nicht konvergiert
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1:
        raise ValidationError("X muss eine Matrix und y ein Vektor sein", f"X{X.shape}, y{y.shape}")
    if X.shape[0] == 0:
        raise NoTrainingDataError("keine Trainings-Releases")
    if X.shape[1] == 0:
        raise ValidationError("Keine Kovariaten für die Regression")
    if X.shape[0] != y.shape[0]:
        raise ValidationError("X und y haben unterschiedlich viele Zeilen", f"{X.shape[0]} vs {y.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValidationError("Kovariaten und Bug-Zahlen müssen endlich sein")

    names = list(metric_ids) if metric_ids is not None else [f"x{i + 1}" for i in range(X.shape[1])]
    if len(names) != X.shape[1]:
        raise ValidationError("Anzahl Metrik-IDs passt nicht zu X", f"{len(names)} vs {X.shape[1]}")

    A = np.column_stack([np.ones(X.shape[0]), X]) if options.with_intercept else X
    scales = _column_scales(A)
    A_scaled = A / scales

    if options.nonneg:
        beta_scaled = _solve_nnls(A_scaled, y, scales)
    else:
        beta_scaled, _, _, _ = np.linalg.lstsq(A_scaled, y, rcond=None)

    beta = beta_scaled / scales
    if not np.all(np.isfinite(beta)):
        raise NumericError("Regression liefert nicht endliche Koeffizienten")
    if options.nonneg:
        beta = np.maximum(beta, 0.0)

    residual = float(np.linalg.norm(y - A @ beta))
    intercept = float(beta[0]) if options.with_intercept else 0.0
    slopes = beta[1:] if options.with_intercept else beta

    model = RegressionModel(
        intercept=intercept,
        coefficients={name: float(value) for name, value in zip(names, slopes)},
        options=options,
        training_releases=tuple(training_releases),
        residual_norm=residual,
    )
    logger.debug(f"Fit {options}: intercept={intercept:.4g}, residual={residual:.4g}")
    return model


def design_matrix(
        metrics: Sequence[MetricVector],
        history: BugHistory,
        selected: Sequence[str],
        release_ids: Sequence[int]
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Baut X und y für die angegebenen Releases.

    Raises:
        MissingMetricError: Metrik fehlt in einem Vektor
        ValidationError: Release ohne Metriken oder ohne Bug-Zahl
    """
    by_release = {vector.release_id: vector for vector in metrics}
    totals = history.totals()
    rows, targets = [], []
    for release_id in release_ids:
        if release_id not in by_release:
            raise ValidationError(f"Keine Metriken für Release {release_id}")
        if release_id not in totals:
            raise ValidationError(f"Keine Bug-Zahl für Release {release_id}")
        rows.append(by_release[release_id].select(selected))
        targets.append(float(totals[release_id]))
    X = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(selected))
    return X, np.asarray(targets, dtype=np.float64)


def fit_releases(
        metrics: Sequence[MetricVector],
        history: BugHistory,
        selected: Sequence[str],
        release_ids: Sequence[int],
        options: RegressionOptions
) -> RegressionModel:
    """fit_linear auf den angegebenen Trainings-Releases."""
    if not release_ids:
        raise NoTrainingDataError("keine Releases vor dem Ziel-Release")
    X, y = design_matrix(metrics, history, selected, release_ids)
    return fit_linear(X, y, options, selected, release_ids)


# ===== Vorhersage =====

def predict(model: RegressionModel, x: MetricVector) -> PredictionRecord:
    """
    Vorhersage der Bug-Zahl, nach unten bei 0 abgeschnitten.

    Raises:
        MissingMetricError: Metrik des Modells fehlt in x
    """
    raw = model.intercept + sum(coefficient * x.value(metric_id)
                                for metric_id, coefficient in model.coefficients.items())
    clamped = raw < 0
    if clamped:
        logger.warning(f"Release {x.release_id}: negative Vorhersage {raw:.4g} auf 0 gesetzt")
    return PredictionRecord(release_id=x.release_id, predicted=0.0 if clamped else float(raw), clamped=clamped)


def prediction_error(predicted: float, actual: int) -> Optional[float]:
    """
    Relativer Fehler |predicted - actual| / actual.

    Returns:
        Fehler >= 0, oder None wenn actual = 0 (undefiniert)
    """
    if actual < 0:
        raise ValidationError("Bug-Zahl darf nicht negativ sein", f"actual={actual}")
    if actual == 0:
        return None
    return abs(predicted - actual) / actual
