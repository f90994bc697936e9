import json
import shutil
from datetime import date

import pytest

from model.release import ReleaseSpec, Timeline

ONAP_RELEASES = [
    (1, "Amsterdam", "2017-04-01", "2017-09-28", "2017-11-16"),
    (2, "Beijing", "2017-11-17", "2018-04-26", "2018-06-07"),
    (3, "Casablanca", "2018-06-08", "2018-10-11", "2018-11-30"),
    (4, "Dublin", "2018-12-01", "2019-04-18", "2019-06-06"),
    (5, "El Alto", "2019-06-07", "2019-09-19", "2019-10-24"),
    (6, "Frankfurt", "2019-10-25", "2020-04-09", "2020-06-11"),
    (7, "Guilin", "2020-06-12", "2020-10-29", "2020-12-03"),
    (8, "Honolulu", "2020-12-04", "2021-03-18", "2021-04-22"),
    (9, "Istanbul", "2021-04-23", "2021-09-30", "2021-11-18"),
    (10, "Jakarta", "2021-11-19", "2022-04-21", "2022-06-09"),
]

ONAP_SAMPLE_ISSUES = [
    {
        "key": "SO-3745",
        "fields": {
            "issuetype": {"name": "Bug"},
            "project": {"key": "SO"},
            "status": {"name": "Open"},
            "priority": {"name": "Medium"},
            "versions": [{"name": "Istanbul"}],
            "resolution": None,
            "created": "2021-08-24T14:30:09.000+0000",
            "resolutiondate": None,
        },
    },
    {
        "key": "AAF-1192",
        "fields": {
            "issuetype": {"name": "Bug"},
            "project": {"key": "AAF"},
            "status": {"name": "Closed"},
            "priority": {"name": "High"},
            "versions": [{"name": "Frankfurt"}, {"name": "Guilin"}],
            "resolution": {"name": "Done"},
            "created": "2020-08-25T14:27:21.000+0000",
            "resolutiondate": "2020-08-25T19:01:04.000+0000",
        },
    },
    {
        "key": "ONAPARC-1",
        "fields": {
            "issuetype": {"name": "Milestone"},
            "project": {"key": "ONAPARC"},
            "status": {"name": "Open"},
            "versions": [],
            "created": "2020-01-10T09:00:00.000+0000",
        },
    },
]


def onap_like_timeline(project: str = "onap") -> Timeline:
    return Timeline(
        project=project,
        releases=tuple(
            ReleaseSpec(
                id=release_id, name=name,
                t_s=date.fromisoformat(t_s), t_f=date.fromisoformat(t_f), t_r=date.fromisoformat(t_r),
            )
            for release_id, name, t_s, t_f, t_r in ONAP_RELEASES
        ),
        repo_location="repo",
        bug_export_location="bugs.json",
    )


@pytest.fixture
def onap_timeline() -> Timeline:
    return onap_like_timeline()


@pytest.fixture
def onap_sample_export() -> bytes:
    return json.dumps(ONAP_SAMPLE_ISSUES).encode("utf-8")


@pytest.fixture
def release_names():
    return [name for _, name, *_ in ONAP_RELEASES]


@pytest.fixture
def git_required():
    if shutil.which("git") is None:
        pytest.skip("git nicht installiert")


@pytest.fixture(scope="session")
def synthetic_repo(tmp_path_factory):
    """Synthetisches git-Repository mit drei Releases und bekannter Wahrheit (einmal pro Lauf)."""
    if shutil.which("git") is None:
        pytest.skip("git nicht installiert")
    from generator.synthetic_project import build_synthetic_repository

    path = tmp_path_factory.mktemp("synthetic") / "repo"
    return build_synthetic_repository(path, n_releases=3, seed=7)
