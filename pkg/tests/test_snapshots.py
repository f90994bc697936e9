from datetime import date, datetime, timezone

import pytest

from core.errors import ReleasePredatesRepositoryError
from metrics.git_repo import GitRepository
from metrics.snapshots import count_commits, resolve_snapshots
from model.release import ReleaseSpec


def _release(t_s: date, t_f: date, release_id: int = 1) -> ReleaseSpec:
    return ReleaseSpec(id=release_id, name=f"R{release_id}", t_s=t_s, t_f=t_f, t_r=t_f)


@pytest.fixture
def small_repo(tmp_path, git_required):
    repo = GitRepository.init(tmp_path / "repo")
    shas = {}
    plan = [
        ("a", datetime(2020, 1, 5, 12, tzinfo=timezone.utc), "Ada", "ada@example.org"),
        ("b", datetime(2020, 1, 10, 0, 0, 0, tzinfo=timezone.utc), "Ada", "ADA@example.org"),
        ("c", datetime(2020, 1, 20, 23, 0, tzinfo=timezone.utc), "Bob", "bob@example.org"),
        ("d", datetime(2020, 1, 21, 0, 0, 0, tzinfo=timezone.utc), "Eve", "eve@example.org"),
    ]
    for label, when, name, email in plan:
        (repo.path / f"{label}.txt").write_text(label, encoding="utf-8")
        shas[label] = repo.commit_all(label, when, name, email)
    return repo, shas


class TestResolveSnapshots:

    def test_window_boundaries(self, small_repo):
        repo, shas = small_repo
        pair = resolve_snapshots(repo, _release(date(2020, 1, 10), date(2020, 1, 20)))
        assert pair.old_commit == shas["a"]
        assert pair.new_commit == shas["c"]
        assert not pair.empty_window

    def test_release_predates_repository(self, small_repo):
        repo, _ = small_repo
        with pytest.raises(ReleasePredatesRepositoryError):
            resolve_snapshots(repo, _release(date(2019, 12, 1), date(2019, 12, 20)))

    def test_empty_window_uses_old_snapshot(self, small_repo):
        repo, shas = small_repo
        pair = resolve_snapshots(repo, _release(date(2020, 2, 1), date(2020, 2, 10)))
        assert pair.empty_window
        assert pair.old_commit == pair.new_commit == shas["d"]


class TestCountCommits:

    def test_commits_and_contributors(self, small_repo):
        repo, _ = small_repo
        # b und c im Fenster, Ada mit anderer Schreibweise der Mail zählt einmal
        assert count_commits(repo, _release(date(2020, 1, 10), date(2020, 1, 20))) == (2, 2)
        assert count_commits(repo, _release(date(2020, 1, 5), date(2020, 1, 21))) == (4, 3)

    def test_empty_window(self, small_repo):
        repo, _ = small_repo
        assert count_commits(repo, _release(date(2020, 2, 1), date(2020, 2, 10))) == (0, 0)


class TestMaterialize:

    def test_worktree_is_removed_afterwards(self, small_repo):
        repo, shas = small_repo
        with repo.materialize(shas["b"]) as tree:
            assert sorted(p.name for p in tree.glob("*.txt")) == ["a.txt", "b.txt"]
            kept = tree
        assert not kept.exists()

    def test_mainline_is_oldest_first(self, small_repo):
        repo, shas = small_repo
        assert [c.sha for c in repo.mainline_commits()] == [shas[k] for k in "abcd"]
