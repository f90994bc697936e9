"""
Release Assignment - Ordnet jeden Bug genau einem Release zu

Regeln:
1. Bug mit bekanntem "first affected release" -> dieses Release (labeled)
2. Sonst Datumsregel: Release k mit t_f(k) <= created < t_f(k+1),
   Bugs vor t_f(1) -> Release 1, nach t_f(K) -> Release K (markiert)
"""
import bisect
from datetime import datetime, timedelta
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from core.config import DEFAULT_GRACE_DAYS
from model.bugs import BugHistory, BugRecord, ReleaseBugCount
from model.release import Timeline
from utils.date_utils import end_of_day, start_of_day
from utils.logger import setup_logger

logger = setup_logger("assignment")

FLAG_AFTER_LAST_FREEZE = "after_last_freeze"
FLAG_UNKNOWN_LABEL = "unknown_label"


class AssignmentSource(str, Enum):
    LABELED = "labeled"
    DATE_INFERRED = "date_inferred"


class Assignment(BaseModel):
    model_config = ConfigDict(frozen=True)

    bug_key: str
    release_id: int
    source: AssignmentSource
    flag: Optional[str] = None


class AssignmentReport(BaseModel):
    """Zuordnungen aller Bugs plus Diagnose für die Nachlauf-Frist"""

    model_config = ConfigDict(frozen=True)

    assignments: Tuple[Assignment, ...]
    grace_days: int
    late_bug_count: int = 0
    warnings: Tuple[str, ...] = ()

    @property
    def labeled_count(self) -> int:
        return sum(1 for a in self.assignments if a.source == AssignmentSource.LABELED)

    @property
    def inferred_count(self) -> int:
        return sum(1 for a in self.assignments if a.source == AssignmentSource.DATE_INFERRED)


def freeze_boundaries(t: Timeline) -> List[datetime]:
    """Start-of-day der Code-Freeze-Daten, aufsteigend (Fenstergrenzen der Datumsregel)."""
    return [start_of_day(spec.t_f) for spec in t.ordered()]


def release_for_date(created: datetime, t: Timeline,
                     boundaries: Optional[Sequence[datetime]] = None) -> Tuple[int, bool]:
    """
    Datumsregel allein.

    Returns:
        (release_id, nach dem letzten Code-Freeze?)
    """
    ordered = t.ordered()
    boundaries = boundaries if boundaries is not None else freeze_boundaries(t)
    # Anzahl Grenzen <= created; 0 heißt vor t_f(1)
    position = bisect.bisect_right(boundaries, created)
    index = max(position - 1, 0)
    return ordered[index].id, position == len(boundaries)


def assign_release(bug: BugRecord, t: Timeline,
                   boundaries: Optional[Sequence[datetime]] = None,
                   warnings: Optional[List[str]] = None) -> Assignment:
    """
    Ordnet einen Bug einem Release zu.

    Args:
        bug: Bug aus dem Export
        t: gültige Timeline
        boundaries: vorberechnete freeze_boundaries (optional, für viele Bugs)
        warnings: Liste, an die Warnungen angehängt werden (optional)

    Returns:
        Assignment mit Quelle labeled oder date_inferred
    """
    flag = None
    if bug.first_affected is not None:
        spec = t.by_name().get(bug.first_affected)
        if spec is not None:
            return Assignment(bug_key=bug.key, release_id=spec.id, source=AssignmentSource.LABELED)
        message = f"{bug.key}: unknown release '{bug.first_affected}', using create date"
        logger.warning(message)
        if warnings is not None:
            warnings.append(message)
        flag = FLAG_UNKNOWN_LABEL

    release_id, after_last = release_for_date(bug.created, t, boundaries)
    if after_last and flag is None:
        flag = FLAG_AFTER_LAST_FREEZE
    return Assignment(bug_key=bug.key, release_id=release_id, source=AssignmentSource.DATE_INFERRED, flag=flag)


def assign_bugs(bugs: Iterable[BugRecord], t: Timeline, grace_days: int = DEFAULT_GRACE_DAYS) -> AssignmentReport:
    """
    Ordnet alle Bugs zu und zählt späte Bugs.

    Ein später Bug ist ein datumsbasiert zugeordneter Bug, der mehr als
    grace_days nach t_r seines Releases erstellt wurde. Die Zählung ändert
    die Zuordnung nicht.
    """
    boundaries = freeze_boundaries(t)
    releases = {spec.id: spec for spec in t.releases}
    warnings: List[str] = []
    assignments: List[Assignment] = []
    late = 0

    for bug in bugs:
        assignment = assign_release(bug, t, boundaries, warnings)
        assignments.append(assignment)
        if assignment.source == AssignmentSource.DATE_INFERRED:
            limit = end_of_day(releases[assignment.release_id].t_r) + timedelta(days=grace_days)
            if bug.created > limit:
                late += 1

    if late:
        logger.info(f"{late} datumsbasiert zugeordnete Bugs liegen mehr als {grace_days} Tage nach t_r")

    return AssignmentReport(
        assignments=tuple(assignments),
        grace_days=grace_days,
        late_bug_count=late,
        warnings=tuple(warnings),
    )


def build_bug_history(bugs: Iterable[BugRecord], t: Timeline,
                      assignments: Optional[Iterable[Assignment]] = None) -> BugHistory:
    """
    Zählt die Bugs pro Release (labeled / inferred).

    Args:
        bugs: alle Bugs aus dem Export
        t: gültige Timeline
        assignments: bereits berechnete Zuordnungen (sonst neu berechnet)

    Returns:
        BugHistory mit einem Eintrag je Release (auch bei 0 Bugs)
    """
    if assignments is None:
        assignments = assign_bugs(bugs, t).assignments

    labeled: Dict[int, int] = {spec.id: 0 for spec in t.releases}
    inferred: Dict[int, int] = {spec.id: 0 for spec in t.releases}
    for assignment in assignments:
        if assignment.source == AssignmentSource.LABELED:
            labeled[assignment.release_id] += 1
        else:
            inferred[assignment.release_id] += 1

    return BugHistory(counts=tuple(
        ReleaseBugCount(
            release_id=spec.id,
            release_name=spec.name,
            labeled_count=labeled[spec.id],
            inferred_count=inferred[spec.id],
        )
        for spec in t.ordered()
    ))
