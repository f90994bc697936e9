"""
Snapshots - Code-Stände eines Releases und Commit-Statistik im Entwicklungsfenster

old_commit: letzter Commit vor Beginn von t_s
new_commit: letzter Commit bis Ende von t_f
Alles nach t_f gehört zur Debugging-Phase und zählt nicht.
"""
from datetime import datetime
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from core.errors import ReleasePredatesRepositoryError
from metrics.git_repo import CommitInfo, GitRepository
from model.release import ReleaseSpec
from utils.date_utils import end_of_day, start_of_day
from utils.logger import setup_logger

logger = setup_logger("snapshots")


class SnapshotPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    release_id: int
    old_commit: str
    new_commit: str
    old_date: datetime
    new_date: datetime
    empty_window: bool = False


def _latest(commits: List[CommitInfo], predicate) -> Optional[CommitInfo]:
    candidates = [(c.timestamp, i, c) for i, c in enumerate(commits) if predicate(c.timestamp)]
    if not candidates:
        return None
    return max(candidates, key=lambda item: (item[0], item[1]))[2]


def resolve_snapshots(repo: GitRepository, release: ReleaseSpec) -> SnapshotPair:
    """
    Bestimmt die beiden Code-Stände eines Releases.

    Raises:
        ReleasePredatesRepositoryError: kein Commit vor t_s
    """
    commits = repo.mainline_commits()
    window_start = start_of_day(release.t_s)
    window_end = end_of_day(release.t_f)

    old = _latest(commits, lambda ts: ts < window_start)
    if old is None:
        raise ReleasePredatesRepositoryError(release.name, f"kein Commit vor {window_start.isoformat()}")

    new = _latest(commits, lambda ts: ts <= window_end)
    empty = not any(window_start <= c.timestamp <= window_end for c in commits)
    if empty:
        logger.warning(f"Release {release.id} ({release.name}): keine Commits zwischen t_s und t_f")
        new = old

    return SnapshotPair(
        release_id=release.id,
        old_commit=old.sha,
        new_commit=new.sha,
        old_date=old.timestamp,
        new_date=new.timestamp,
        empty_window=empty,
    )


def count_commits(repo: GitRepository, release: ReleaseSpec) -> Tuple[int, int]:
    """
    Commits der Hauptlinie in [t_s 00:00, t_f 23:59:59] und Anzahl verschiedener Autoren.

    Returns:
        (commits, contributors)
    """
    window_start = start_of_day(release.t_s)
    window_end = end_of_day(release.t_f)
    in_window = [c for c in repo.mainline_commits() if window_start <= c.timestamp <= window_end]
    contributors = {c.author_identity for c in in_window}
    return len(in_window), len(contributors)
