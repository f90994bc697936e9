"""
Bug Modell - Einzelne Tracker-Bugs und ihre Verteilung auf Releases
"""
from datetime import datetime, timedelta
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Stunden
TIME_TO_SOLVE_TOLERANCE = 1e-6


class BugStatus(str, Enum):
    OPEN = "open"
    CLOSED = "closed"
    OTHER = "other"


_OPEN_STATES = {"open", "reopened", "to do", "new", "submitted", "in progress", "in review"}
_CLOSED_STATES = {"closed", "done", "resolved", "delivered"}


def status_from_tracker(raw: Optional[str]) -> BugStatus:
    """Bildet den Tracker-Status auf open/closed/other ab."""
    value = (raw or "").strip().lower()
    if value in _OPEN_STATES:
        return BugStatus.OPEN
    if value in _CLOSED_STATES:
        return BugStatus.CLOSED
    return BugStatus.OTHER


class BugRecord(BaseModel):
    """
    Ein Tracker-Issue vom Typ Bug.

    Fehlende oder unlesbare optionale Felder sind None, nie Default-Werte.
    """

    model_config = ConfigDict(frozen=True)

    key: str
    subproject: str
    status: BugStatus
    priority: str = ""
    affected_releases: Tuple[str, ...] = ()
    first_affected: Optional[str] = None
    resolution: str = ""
    created: datetime
    resolved: Optional[datetime] = None
    time_to_solve: Optional[float] = None  # Stunden

    @model_validator(mode="after")
    def _check_resolution_times(self) -> "BugRecord":
        if self.resolved is not None and self.resolved < self.created:
            raise ValueError(f"{self.key}: resolved vor created")
        if (self.time_to_solve is None) != (self.resolved is None):
            raise ValueError(f"{self.key}: time_to_solve nur zusammen mit resolved")
        if self.resolved is not None:
            hours = (self.resolved - self.created) / timedelta(hours=1)
            if abs(self.time_to_solve - hours) > TIME_TO_SOLVE_TOLERANCE:
                raise ValueError(f"{self.key}: time_to_solve {self.time_to_solve} != resolved - created ({hours} h)")
        return self


class ReleaseBugCount(BaseModel):
    """Bug-Zähler eines Releases (blau = gelabelt, braun = über das Datum zugeordnet)"""

    model_config = ConfigDict(frozen=True)

    release_id: int
    release_name: str
    labeled_count: int = Field(0, ge=0)
    inferred_count: int = Field(0, ge=0)

    @property
    def total_count(self) -> int:
        return self.labeled_count + self.inferred_count


class BugHistory(BaseModel):
    """Bug-Historie: Verteilung der Bugs auf die Releases"""

    model_config = ConfigDict(frozen=True)

    counts: Tuple[ReleaseBugCount, ...]

    def totals(self) -> Dict[int, int]:
        return {entry.release_id: entry.total_count for entry in self.counts}

    def total_for(self, release_id: int) -> Optional[int]:
        return self.totals().get(release_id)

    @property
    def release_ids(self) -> List[int]:
        return [entry.release_id for entry in self.counts]

    @property
    def bug_count(self) -> int:
        return sum(entry.total_count for entry in self.counts)

    @property
    def labeled_total(self) -> int:
        return sum(entry.labeled_count for entry in self.counts)

    @property
    def inferred_total(self) -> int:
        return sum(entry.inferred_count for entry in self.counts)
