"""
Correlation - Pearson-Korrelation zwischen Code-Metriken und Bug-Zahlen, Metrik-Auswahl

Bänder: |PCC| > 0.7 hoch, 0.4 bis 0.7 signifikant, darunter schwach.
"""
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.config import DEFAULT_MAX_METRICS, DEFAULT_MIN_PCC
from core.errors import ValidationError
from model.bugs import BugHistory
from model.catalog import MetricVector
from utils.logger import setup_logger

logger = setup_logger("correlation")

BUGS_LABEL = "bugs"


def pearson(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """
    Stichproben-Korrelationskoeffizient nach Pearson.

    Returns:
        PCC in [-1, +1] oder None, wenn eine Reihe konstant ist

    Raises:
        ValidationError: unterschiedliche Längen oder weniger als 2 Werte
    """
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError("Reihen müssen gleich lang sein", f"{a.shape} vs {b.shape}")
    if a.size < 2:
        raise ValidationError("Mindestens 2 Werte für Pearson nötig", f"n={a.size}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValidationError("Reihen müssen endlich sein")

    if np.ptp(a) == 0 or np.ptp(b) == 0:
        return None

    da = a - a.mean()
    db = b - b.mean()
    r = float(np.dot(da, db) / math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db))))
    return max(-1.0, min(1.0, r))


def pcc_band(r: Optional[float]) -> str:
    if r is None:
        return "undefined"
    magnitude = abs(r)
    if magnitude > 0.7:
        return "high"
    if magnitude >= 0.4:
        return "significant"
    return "weak"


class CorrelationMatrix(BaseModel):
    """Symmetrische PCC-Matrix, Bugs als letzte Zeile/Spalte"""

    model_config = ConfigDict(frozen=True)

    labels: Tuple[str, ...]
    entries: Tuple[Tuple[Optional[float], ...], ...]
    release_ids: Tuple[int, ...] = ()

    def get(self, row: str, column: str) -> Optional[float]:
        try:
            return self.entries[self.labels.index(row)][self.labels.index(column)]
        except ValueError:
            raise ValidationError(f"Label fehlt in der Korrelationsmatrix: {row}/{column}")

    @property
    def metric_ids(self) -> List[str]:
        return [label for label in self.labels if label != BUGS_LABEL]

    def bug_correlations(self) -> Dict[str, Optional[float]]:
        """metric_id -> PCC mit den Bug-Zahlen"""
        if BUGS_LABEL not in self.labels:
            raise ValidationError("Korrelationsmatrix ohne Bug-Zeile")
        return {metric_id: self.get(metric_id, BUGS_LABEL) for metric_id in self.metric_ids}


def aligned_series(
        metrics: Sequence[MetricVector],
        history: BugHistory,
        subset: Sequence[str],
        release_ids: Optional[Sequence[int]] = None
) -> Tuple[List[int], Dict[str, List[float]]]:
    """
    Metrik- und Bug-Reihen über die gemeinsamen Releases (aufsteigend).

    Returns:
        (release_ids, label -> Werte) inklusive "bugs"
    """
    by_release = {vector.release_id: vector for vector in metrics}
    totals = history.totals()
    common = sorted(set(by_release) & set(totals))
    if release_ids is not None:
        wanted = set(release_ids)
        common = [rid for rid in common if rid in wanted]

    series: Dict[str, List[float]] = {
        metric_id: [by_release[rid].value(metric_id) for rid in common] for metric_id in subset
    }
    series[BUGS_LABEL] = [float(totals[rid]) for rid in common]
    return common, series


def correlation_matrix(
        metrics: Sequence[MetricVector],
        history: BugHistory,
        subset: Sequence[str],
        release_ids: Optional[Sequence[int]] = None
) -> CorrelationMatrix:
    """
    Paarweise PCC zwischen den Metriken aus subset und den Bug-Zahlen.

    Args:
        metrics: Metrik-Vektoren der Releases
        history: Bug-Historie
        subset: Metrik-IDs (nicht leer)
        release_ids: nur diese Releases verwenden (optional)

    Returns:
        CorrelationMatrix mit labels = subset + ["bugs"]
    """
    if not subset:
        raise ValidationError("Keine Metriken für die Korrelation angegeben")
    common, series = aligned_series(metrics, history, subset, release_ids)
    if len(common) < 2:
        raise ValidationError("Mindestens 2 Releases für die Korrelation nötig", f"gemeinsam: {common}")

    labels = list(subset) + [BUGS_LABEL]
    size = len(labels)
    grid: List[List[Optional[float]]] = [[None] * size for _ in range(size)]
    for i in range(size):
        for j in range(i, size):
            if i == j:
                constant = np.ptp(np.asarray(series[labels[i]], dtype=np.float64)) == 0
                grid[i][i] = None if constant else 1.0
            else:
                value = pearson(series[labels[i]], series[labels[j]])
                grid[i][j] = value
                grid[j][i] = value

    return CorrelationMatrix(
        labels=tuple(labels),
        entries=tuple(tuple(row) for row in grid),
        release_ids=tuple(common),
    )


class SelectionPolicy(BaseModel):
    model_config = ConfigDict(frozen=True)

    min_abs_pcc: float = Field(DEFAULT_MIN_PCC, ge=0.0, le=1.0)
    max_count: int = Field(DEFAULT_MAX_METRICS, ge=1)
    require_positive: bool = True


def select_metrics(m: CorrelationMatrix, policy: SelectionPolicy = SelectionPolicy()) -> List[str]:
    """
    Wählt die Metriken mit der stärksten Korrelation zu den Bugs.

    Negative Korrelationen fallen bei require_positive vor dem Abschneiden weg.
    Gleichstand wird über die Reihenfolge in der Matrix aufgelöst.
    """
    correlations = m.bug_correlations()
    candidates = []
    for position, (metric_id, r) in enumerate(correlations.items()):
        if r is None or abs(r) < policy.min_abs_pcc:
            continue
        if policy.require_positive and r < 0:
            continue
        candidates.append((-abs(r), position, metric_id))

    selected = [metric_id for _, _, metric_id in sorted(candidates)][:policy.max_count]
    if not selected:
        logger.warning(f"Keine Metrik mit |PCC| >= {policy.min_abs_pcc}")
    else:
        logger.info(f"Ausgewählte Metriken: {', '.join(selected)}")
    return selected
