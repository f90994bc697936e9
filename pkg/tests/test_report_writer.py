import pytest

from core.errors import InputNotFoundError, ValidationError
from evaluation.experiments import build_row, config_sweep
from generator.report_writer import (
    format_summary_table, read_bug_history, read_correlation, read_metrics, read_model, read_selection, summary_frame,
    write_bug_history, write_correlation, write_eval, write_metrics, write_model, write_selection, write_summary,
)
from generator.synthetic_project import synthesize_metric_history
from model.catalog import DEFAULT_CATALOG
from stats.correlation import BUGS_LABEL, correlation_matrix
from stats.regression import VARIANTS, PredictionRecord, fit_releases

SELECTED = ["commits", "new_loc"]


@pytest.fixture(scope="module")
def dataset():
    return synthesize_metric_history(n_releases=6, seed=9)


class TestRoundTrips:

    def test_metrics(self, dataset, tmp_path):
        path = write_metrics(dataset.metrics, dataset.timeline, tmp_path / "metrics.csv")
        header = path.read_text(encoding="utf-8").splitlines()[0].split(",")
        assert header == ["release_id", "release_name"] + DEFAULT_CATALOG.metric_ids
        assert read_metrics(path) == list(dataset.metrics)

    def test_rewrite_is_byte_identical(self, dataset, tmp_path):
        first = write_metrics(dataset.metrics, dataset.timeline, tmp_path / "a.csv").read_bytes()
        second = write_metrics(read_metrics(tmp_path / "a.csv"), dataset.timeline, tmp_path / "b.csv").read_bytes()
        assert first == second
        assert b"\r\n" not in first

    def test_bug_history(self, dataset, tmp_path):
        path = write_bug_history(dataset.history, tmp_path / "bug_history.csv")
        assert path.read_text(encoding="utf-8").splitlines()[0] == "release_id,release_name,labeled,inferred,total"
        assert read_bug_history(path) == dataset.history

    def test_correlation_and_selection(self, dataset, tmp_path):
        matrix = correlation_matrix(dataset.metrics, dataset.history, SELECTED + ["contributors"])
        loaded = read_correlation(write_correlation(matrix, tmp_path / "correlation.csv"))
        assert loaded.labels == matrix.labels
        assert loaded.get("commits", BUGS_LABEL) == matrix.get("commits", BUGS_LABEL)

        path = write_selection(matrix, SELECTED, tmp_path / "selection.csv")
        assert read_selection(path) == SELECTED
        assert path.read_text(encoding="utf-8").splitlines()[0] == "metric_id,pcc,band"

    def test_model(self, dataset, tmp_path):
        model = fit_releases(dataset.metrics, dataset.history, SELECTED, [1, 2, 3], VARIANTS["LR-PC+woI"])
        assert read_model(write_model(model, tmp_path / "model.json")) == model

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputNotFoundError):
            read_metrics(tmp_path / "nope.csv")

    def test_missing_metric_column(self, tmp_path):
        (tmp_path / "metrics.csv").write_text("release_id,release_name,loc\n1,R01,5\n", encoding="utf-8")
        with pytest.raises(ValidationError):
            read_metrics(tmp_path / "metrics.csv")


class TestEvalOutput:

    def test_eval_and_summary_files(self, dataset, tmp_path):
        rows = config_sweep(dataset.metrics, dataset.history, SELECTED)
        eval_lines = write_eval(rows, "configs", tmp_path).read_text(encoding="utf-8").splitlines()
        assert eval_lines[0] == "row,release_id,predicted,actual,error,clamped,failure"
        assert len(eval_lines) == 1 + 4 * 5

        summary_lines = write_summary(rows, "configs", tmp_path, with_last=True).read_text(encoding="utf-8").splitlines()
        assert summary_lines[0].split(",")[:7] == ["row", "n", "median", "mean", "max", "min", "outliers"]
        assert summary_lines[0].endswith("last4_median,last4_mean")
        assert [line.split(",")[0] for line in summary_lines[1:]] == list(VARIANTS)

    def test_summary_of_failed_row(self):
        row = build_row("w9", [PredictionRecord(release_id=3, failure="NO_TRAINING_DATA")])
        df = summary_frame([row])
        assert df.loc[0, "missing"] == 1
        assert df["median"].isna().all()

    def test_empty_summary(self):
        assert summary_frame([]).empty

    def test_format_summary_table(self, dataset):
        rows = config_sweep(dataset.metrics, dataset.history, SELECTED)
        table = format_summary_table(rows, "Varianten", with_last=True)
        lines = table.splitlines()
        assert lines[0] == "Varianten"
        assert "median" in lines[1] and "last4_mean" in lines[1]
        assert len(lines) == 2 + len(VARIANTS)
