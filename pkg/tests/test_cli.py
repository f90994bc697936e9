import json

import pytest

from core.errors import UsageError
from generator import report_writer
from main import main, parse_windows
from model.descriptor import save_descriptor

from conftest import onap_like_timeline


def _error(captured) -> dict:
    lines = [line for line in captured.err.splitlines() if line.startswith('{"error"')]
    assert len(lines) == 1
    return json.loads(lines[0])["error"]


@pytest.fixture
def dirs(tmp_path):
    return ["--out", str(tmp_path / "out"), "--cache", str(tmp_path / "cache")]


@pytest.fixture
def onap_descriptor(tmp_path, onap_sample_export):
    source = tmp_path / "onap_src"
    source.mkdir()
    (source / "bugs.json").write_bytes(onap_sample_export)
    return save_descriptor(onap_like_timeline(), source / "project.yaml")


@pytest.fixture
def synthetic_history(tmp_path, dirs, capsys):
    assert main(["gen-synthetic", *dirs, "--name", "syn", "--releases", "12", "--seed", "5"]) == 0
    descriptor = tmp_path / "out" / "syn" / "src" / "project.yaml"
    assert main(["ingest-bugs", *dirs, "--project", str(descriptor)]) == 0
    capsys.readouterr()
    return descriptor


class TestParseWindows:

    def test_range_and_list(self):
        assert parse_windows("1..9") == list(range(1, 10))
        assert parse_windows("2, 4,6") == [2, 4, 6]
        assert parse_windows(None) == []

    @pytest.mark.parametrize("raw", ["5..2", "a,b", "1..x"])
    def test_invalid(self, raw):
        with pytest.raises(UsageError):
            parse_windows(raw)


class TestIngest:

    def test_onap_sample(self, tmp_path, dirs, onap_descriptor, capsys):
        assert main(["ingest-bugs", *dirs, "--project", str(onap_descriptor)]) == 0
        assert "onap: 2 Bugs (labeled 2, inferred 0" in capsys.readouterr().out

        history = report_writer.read_bug_history(tmp_path / "out" / "onap" / report_writer.BUG_HISTORY_FILE)
        totals = history.totals()
        assert totals[6] == 1 and totals[9] == 1
        assert sum(totals.values()) == 2
        assignments = (tmp_path / "out" / "onap" / report_writer.ASSIGNMENTS_FILE).read_text(encoding="utf-8")
        assert assignments.splitlines()[0] == "bug_key,release_id,release_name,source,flag"

    def test_missing_export(self, tmp_path, dirs, onap_descriptor, capsys):
        (onap_descriptor.parent / "bugs.json").unlink()
        assert main(["ingest-bugs", *dirs, "--project", str(onap_descriptor)]) == 3
        assert _error(capsys.readouterr())["code"] == "INPUT_NOT_FOUND"

    def test_only_non_bug_issues(self, tmp_path, dirs, onap_descriptor, capsys):
        issues = [{"key": "P-1", "fields": {"issuetype": {"name": "Epic"}, "created": "2020-01-01T00:00:00.000+0000"}}]
        (onap_descriptor.parent / "bugs.json").write_text(json.dumps(issues), encoding="utf-8")
        assert main(["ingest-bugs", *dirs, "--project", str(onap_descriptor)]) == 0
        history = report_writer.read_bug_history(tmp_path / "out" / "onap" / report_writer.BUG_HISTORY_FILE)
        assert history.bug_count == 0
        assert len(history.counts) == 10

    def test_missing_project_flag(self, dirs, capsys):
        assert main(["ingest-bugs", *dirs]) == 2
        assert _error(capsys.readouterr())["code"] == "USAGE_ERROR"


class TestPipeline:

    def test_ingest_reproduces_planted_history(self, tmp_path, synthetic_history):
        history = report_writer.read_bug_history(tmp_path / "out" / "syn" / report_writer.BUG_HISTORY_FILE)
        assert len(history.counts) == 12
        assert history.inferred_total > 0
        assert all(count.total_count > 0 for count in history.counts)

    def test_correlate_writes_matrix(self, tmp_path, dirs, synthetic_history):
        assert main(["correlate", *dirs, "--project", str(synthetic_history), "--min-pcc", "0.0"]) == 0
        directory = tmp_path / "out" / "syn"
        matrix = report_writer.read_correlation(directory / report_writer.CORRELATION_FILE)
        assert len(matrix.labels) == 44
        assert len(report_writer.read_selection(directory / report_writer.SELECTION_FILE)) == 5

    def test_evaluate_configs(self, tmp_path, dirs, synthetic_history, capsys):
        assert main(["evaluate", "configs", *dirs, "--project", str(synthetic_history),
                     "--metrics", "commits,new_loc"]) == 0
        assert "Regressions-Varianten" in capsys.readouterr().out
        summary = (tmp_path / "out" / "syn" / "summary_configs.csv").read_text(encoding="utf-8").splitlines()
        assert [line.split(",")[0] for line in summary[1:]] == ["BLR", "LR-PC", "LR-woI", "LR-PC+woI"]

    def test_predict_last_release(self, tmp_path, dirs, synthetic_history, capsys):
        assert main(["predict", "12", *dirs, "--project", str(synthetic_history), "--metrics", "commits,new_loc"]) == 0
        assert "vorhergesagt" in capsys.readouterr().out
        payload = json.loads((tmp_path / "out" / "syn" / "prediction_12.json").read_text(encoding="utf-8"))
        prediction = payload["prediction"]
        assert prediction["predicted"] == pytest.approx(prediction["actual"], rel=1e-9)
        assert payload["model"]["coefficients"]["commits"] == pytest.approx(0.1, rel=1e-6)

    def test_predict_first_release_has_no_training_data(self, dirs, synthetic_history, capsys):
        assert main(["predict", "1", *dirs, "--project", str(synthetic_history), "--metrics", "commits"]) == 4
        assert _error(capsys.readouterr())["code"] == "NO_TRAINING_DATA"

    def test_cross_without_source(self, dirs, synthetic_history, capsys):
        assert main(["evaluate", "cross", *dirs, "--project", str(synthetic_history)]) == 2
        assert _error(capsys.readouterr())["code"] == "USAGE_ERROR"

    def test_windows(self, tmp_path, dirs, synthetic_history):
        assert main(["evaluate", "windows", *dirs, "--project", str(synthetic_history),
                     "--metrics", "commits,new_loc", "--windows", "1..9"]) == 0
        directory = tmp_path / "out" / "syn"
        summary = (directory / "summary_windows.csv").read_text(encoding="utf-8").splitlines()
        assert len(summary) == 1 + 9 + 1
        assert summary[-1].startswith("all,")
        pcc = (directory / report_writer.WINDOW_PCC_FILE).read_text(encoding="utf-8").splitlines()
        assert pcc[0] == "window,pcc_commits_median,pcc_commits_mean,pcc_new_loc_median,pcc_new_loc_mean"

    def test_unknown_metric(self, dirs, synthetic_history, capsys):
        assert main(["fit", *dirs, "--project", str(synthetic_history), "--metrics", "lines_of_doom"]) == 4
        assert _error(capsys.readouterr())["code"] == "MISSING_METRIC"


def test_out_equal_to_cache(tmp_path, capsys):
    same = str(tmp_path / "same")
    assert main(["correlate", "--out", same, "--cache", same]) == 4
    assert _error(capsys.readouterr())["code"] == "VALIDATION_ERROR"


def test_extract_metrics_matches_ground_truth(tmp_path, dirs, git_required, capsys):
    assert main(["gen-synthetic", *dirs, "--kind", "repo", "--name", "repo_syn", "--releases", "3"]) == 0
    source = tmp_path / "out" / "repo_syn" / "src"
    descriptor = str(source / "project.yaml")

    assert main(["extract-metrics", *dirs, "--project", descriptor]) == 0
    metrics = tmp_path / "out" / "repo_syn" / report_writer.METRICS_FILE
    assert metrics.read_bytes() == (source / "ground_truth.csv").read_bytes()
    assert "Cache: 0 Treffer, 3 neu" in capsys.readouterr().out

    assert main(["extract-metrics", *dirs, "--project", descriptor, "--workers", "2"]) == 0
    assert "Cache: 3 Treffer, 0 neu" in capsys.readouterr().out
    assert metrics.read_bytes() == (source / "ground_truth.csv").read_bytes()
