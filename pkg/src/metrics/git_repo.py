"""
Git Repository - Zugriff auf ein lokales Repository über die git-Kommandozeile

git wird als externer Prozess aufgerufen (log, worktree). Checkouts laufen
pro Repository-Handle seriell, die Snapshots selbst können parallel
gelesen werden.
"""
import os
import shutil
import subprocess
import tempfile
import threading
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from core.config import GIT_BINARY
from core.errors import InputNotFoundError, VcsError
from utils.logger import setup_logger

logger = setup_logger("git_repo")

# Reihenfolge: zuerst GIT_BINARY aus .env, dann PATH, dann bekannte Installationspfade
_GIT_CANDIDATES = [
    "git",
    "/usr/bin/git",
    "/usr/local/bin/git",
    "/opt/homebrew/bin/git",
]

GIT_TIMEOUT = 600
_FIELD_SEP = "\x1f"


def find_git(preferred: Optional[str] = None) -> str:
    for candidate in [preferred, GIT_BINARY, *_GIT_CANDIDATES]:
        if not candidate:
            continue
        if Path(candidate).is_absolute():
            if Path(candidate).exists():
                return candidate
        elif shutil.which(candidate):
            return candidate

    raise VcsError(
        "git wurde nicht gefunden",
        "Für die Metrik-Extraktion muss git installiert sein (oder GIT_BINARY gesetzt)."
    )


class CommitInfo(BaseModel):
    """Ein Commit der Hauptlinie"""

    model_config = ConfigDict(frozen=True)

    sha: str
    timestamp: datetime  # Committer-Zeit in UTC
    author_name: str
    author_email: str

    @property
    def author_identity(self) -> str:
        return (self.author_email or self.author_name).strip().lower()


class GitRepository:
    """
    Handle auf ein lokales git-Repository.

    Args:
        path: Verzeichnis des Repositories (Arbeitskopie oder bare)
        branch: Hauptlinie (default: HEAD, also der Default-Branch)
        git_binary: expliziter Pfad zu git (optional)
    """

    def __init__(self, path, branch: Optional[str] = None, git_binary: Optional[str] = None):
        self.path = Path(path)
        self.branch = branch or "HEAD"
        self.git = find_git(git_binary)
        self._checkout_lock = threading.Lock()
        self._mainline: Optional[List[CommitInfo]] = None

    def _run(self, args: Sequence[str], env: Optional[Dict[str, str]] = None) -> str:
        """Führt git im Repository aus und liefert stdout."""
        command = [self.git, "-C", str(self.path), *args]
        full_env = {**os.environ, **(env or {})}
        try:
            result = subprocess.run(
                command,
                capture_output=True,
                text=True,
                encoding="utf-8",
                errors="replace",
                timeout=GIT_TIMEOUT,
                env=full_env,
            )
        except subprocess.TimeoutExpired:
            raise VcsError(f"git {args[0]} hat das Zeitlimit überschritten", str(self.path))

        if result.returncode != 0:
            raise VcsError(
                f"git {args[0]} fehlgeschlagen (returncode={result.returncode})",
                result.stderr.strip() or result.stdout.strip()
            )
        return result.stdout

    # ===== Lesen =====

    def mainline_commits(self) -> List[CommitInfo]:
        """
        Alle Commits der First-Parent-Kette, ältester zuerst.

        Wird pro Handle einmal gelesen und dann gecacht.
        """
        if self._mainline is not None:
            return self._mainline

        output = self._run([
            "log", "--first-parent",
            f"--format=%H{_FIELD_SEP}%ct{_FIELD_SEP}%an{_FIELD_SEP}%ae",
            self.branch,
        ])
        commits: List[CommitInfo] = []
        for line in output.splitlines():
            if not line.strip():
                continue
            sha, ct, name, email = line.split(_FIELD_SEP)
            commits.append(CommitInfo(
                sha=sha,
                timestamp=datetime.fromtimestamp(int(ct), tz=timezone.utc),
                author_name=name,
                author_email=email,
            ))
        commits.reverse()
        self._mainline = commits
        logger.debug(f"{len(commits)} Commits auf der Hauptlinie von {self.path}")
        return commits

    @contextmanager
    def materialize(self, commit: str) -> Iterator[Path]:
        """
        Stellt den Stand eines Commits als Verzeichnis bereit (git worktree).

        Example:
            with repo.materialize(sha) as tree:
                sizes = count_lines(tree, language_filter)
        """
        workdir = Path(tempfile.mkdtemp(prefix="snapshot_"))
        target = workdir / "tree"
        with self._checkout_lock:
            self._run(["worktree", "add", "--detach", "--force", str(target), commit])
        try:
            yield target
        finally:
            with self._checkout_lock:
                try:
                    self._run(["worktree", "remove", "--force", str(target)])
                except VcsError as e:
                    logger.warning(f"worktree konnte nicht entfernt werden: {e}")
                shutil.rmtree(workdir, ignore_errors=True)
                try:
                    self._run(["worktree", "prune"])
                except VcsError:
                    pass

    # ===== Schreiben (Generator und Tests) =====

    @classmethod
    def init(cls, path, branch: str = "main", git_binary: Optional[str] = None) -> "GitRepository":
        """Legt ein neues Repository an, Hauptlinie heißt branch."""
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        repo = cls(path, branch=branch, git_binary=git_binary)
        repo._run(["init", "-q"])
        repo._run(["symbolic-ref", "HEAD", f"refs/heads/{branch}"])
        return repo

    def commit_all(self, message: str, when: datetime, author_name: str, author_email: str) -> str:
        """
        Committet den gesamten Arbeitsbaum (auch leere Commits) mit festem Datum.

        Returns:
            SHA des neuen Commits
        """
        stamp = f"{int(when.timestamp())} +0000"
        env = {
            "GIT_AUTHOR_NAME": author_name,
            "GIT_AUTHOR_EMAIL": author_email,
            "GIT_COMMITTER_NAME": author_name,
            "GIT_COMMITTER_EMAIL": author_email,
            "GIT_AUTHOR_DATE": stamp,
            "GIT_COMMITTER_DATE": stamp,
        }
        self._run(["add", "--all"])
        self._run([
            "-c", "commit.gpgsign=false",
            "-c", f"user.name={author_name}",
            "-c", f"user.email={author_email}",
            "commit", "-q", "--allow-empty", "--no-verify", "-m", message,
        ], env=env)
        self._mainline = None
        return self._run(["rev-parse", "HEAD"]).strip()


def open_repository(location: str, clone_dir: Optional[Path] = None,
                    branch: Optional[str] = None) -> GitRepository:
    """
    Öffnet ein lokales Repository oder klont eine URL nach clone_dir.

    Raises:
        InputNotFoundError: lokaler Pfad existiert nicht
    """
    if "://" in location or location.startswith("git@"):
        if clone_dir is None:
            raise InputNotFoundError(location, "für entfernte Repositories wird ein Cache-Verzeichnis benötigt")
        name = location.rstrip("/").split("/")[-1].removesuffix(".git")
        target = Path(clone_dir) / "repos" / name
        if not target.exists():
            target.parent.mkdir(parents=True, exist_ok=True)
            git = find_git()
            logger.info(f"Klone {location} nach {target}")
            result = subprocess.run(
                [git, "clone", "--quiet", location, str(target)],
                capture_output=True, text=True, timeout=GIT_TIMEOUT * 6,
            )
            if result.returncode != 0:
                raise VcsError("git clone fehlgeschlagen", result.stderr.strip())
        return GitRepository(target, branch=branch)

    path = Path(location)
    if not path.exists():
        raise InputNotFoundError(path)
    return GitRepository(path, branch=branch)
