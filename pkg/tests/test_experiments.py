from datetime import timedelta

import numpy as np
import pytest

from core.errors import NoTrainingDataError, ValidationError
from evaluation.experiments import (
    POOLED_LABEL, SOURCE_ONLY_LABEL, ProjectDataset, build_row, config_sweep, cross_project_eval, expanding_splits,
    pooled_fit, sliding_splits, source_release_ids, summarize, windowed_eval,
)
from generator.synthetic_project import synthesize_metric_history
from model.release import Timeline
from stats.regression import VARIANTS, PredictionRecord, fit_releases, predict

SELECTED = ["commits", "new_loc"]


def _records(errors):
    return [PredictionRecord(release_id=k + 1, predicted=1.0, actual=1, error=e) for k, e in enumerate(errors)]


def _shifted(dataset: ProjectDataset, days: int, name: str) -> ProjectDataset:
    releases = tuple(
        spec.model_copy(update={
            "t_s": spec.t_s + timedelta(days=days),
            "t_f": spec.t_f + timedelta(days=days),
            "t_r": spec.t_r + timedelta(days=days),
        })
        for spec in dataset.timeline.releases
    )
    timeline = Timeline(**{**dataset.timeline.model_dump(), "releases": releases, "project": name})
    return dataset.model_copy(update={"timeline": timeline, "name": name})


class TestSummarize:

    def test_median_mean_and_outliers(self):
        summary = summarize(_records([0.1, 0.5, 0.2, 6.0]))
        assert summary.median == pytest.approx(0.35)
        assert summary.mean == pytest.approx(1.7)
        assert summary.max == 6.0
        assert summary.min == 0.1
        assert summary.n == 4
        assert summary.outliers == 1

    def test_undefined_errors_are_ignored(self):
        records = _records([0.2]) + [PredictionRecord(release_id=9, predicted=3.0, actual=0)]
        assert summarize(records).n == 1

    def test_nothing_to_summarize(self):
        with pytest.raises(ValidationError):
            summarize([PredictionRecord(release_id=1, failure="NO_TRAINING_DATA")])

    def test_row_counts_missing_and_undefined(self):
        records = _records([0.1, 0.3]) + [
            PredictionRecord(release_id=7, failure="NOT_CONVERGED"),
            PredictionRecord(release_id=8, predicted=2.0, actual=0),
        ]
        row = build_row("x", records, last=2)
        assert row.missing == 1
        assert row.undefined == 1
        assert row.summary.n == 2
        assert row.summary_last is None


class TestSplits:

    def test_expanding(self):
        assert list(expanding_splits([1, 2, 3, 4])) == [([1], 2), ([1, 2], 3), ([1, 2, 3], 4)]

    def test_sliding(self):
        assert list(sliding_splits([1, 2, 3, 4, 5], 2)) == [([1, 2], 3), ([2, 3], 4), ([3, 4], 5)]
        assert list(sliding_splits([1, 2], 2)) == []

    def test_expanding_sets_are_nested(self):
        splits = list(expanding_splits(list(range(1, 13))))
        for (train, _), (next_train, _) in zip(splits, splits[1:]):
            assert next_train[:len(train)] == train
            assert len(next_train) == len(train) + 1
        assert all(max(train) < target for train, target in splits)

    def test_sliding_sets_have_fixed_length(self):
        ids = list(range(1, 13))
        for window in range(1, len(ids)):
            splits = list(sliding_splits(ids, window))
            assert len(splits) == len(ids) - window
            for train, target in splits:
                assert train == list(range(target - window, target))


class TestConfigSweep:

    def test_noiseless_law_is_recovered(self):
        dataset = synthesize_metric_history(n_releases=10, seed=1)
        rows = config_sweep(dataset.metrics, dataset.history, SELECTED)
        assert [row.label for row in rows] == list(VARIANTS)

        for row in rows:
            assert [r.release_id for r in row.records] == list(range(2, 11))
            # exakt, sobald genug Trainings-Releases für alle Parameter vorliegen
            needed = 3 if VARIANTS[row.label].with_intercept else 2
            for record in row.records:
                if record.release_id > needed:
                    assert record.error == pytest.approx(0.0, abs=1e-6)
            assert row.summary_last.n == 4
            assert row.summary_last.max == pytest.approx(0.0, abs=1e-6)

    @pytest.mark.parametrize("seed", range(5))
    def test_noisy_law_stays_within_ten_percent(self, seed):
        dataset = synthesize_metric_history(n_releases=10, noise=0.05, seed=seed)
        row = config_sweep(dataset.metrics, dataset.history, SELECTED, ["LR-PC+woI"])[0]
        late = [r for r in row.records if 5 <= r.release_id <= 10]
        assert len(late) == 6
        assert summarize(late).median <= 0.10

    def test_needs_three_releases(self):
        dataset = synthesize_metric_history(n_releases=2)
        with pytest.raises(ValidationError):
            config_sweep(dataset.metrics, dataset.history, SELECTED)

    def test_needs_selection(self):
        dataset = synthesize_metric_history(n_releases=5)
        with pytest.raises(ValidationError):
            config_sweep(dataset.metrics, dataset.history, [])


class TestWindowedEval:

    def test_regime_change(self):
        dataset = synthesize_metric_history(n_releases=12, seed=4, regime_change_at=7,
                                            regime_law={"commits": 0.3, "new_loc": 0.1})
        study = windowed_eval(dataset.metrics, dataset.history, SELECTED, [2, 3], include_all_history=True)
        rows = {row.label: row for row in study.rows}
        assert list(rows) == ["2", "3", "all"]

        for label, window in (("2", 2), ("3", 3)):
            for record in rows[label].records:
                if record.release_id - window >= 7:
                    assert record.error == pytest.approx(0.0, abs=1e-6)
        assert rows["all"].records[-1].release_id == 12
        assert rows["all"].records[-1].error > 1e-6

    @pytest.mark.parametrize("seed", range(5))
    def test_short_window_beats_all_history_after_regime_change(self, seed):
        dataset = synthesize_metric_history(n_releases=12, noise=0.05, seed=seed, regime_change_at=6,
                                            regime_law={"commits": 0.3, "new_loc": 0.1})
        study = windowed_eval(dataset.metrics, dataset.history, SELECTED, [4], include_all_history=True)
        rows = {row.label: row for row in study.rows}
        # ab Release 10 liegt das Fenster vollständig nach dem Wechsel
        windowed = [r.error for r in rows["4"].records if r.release_id >= 10]
        all_history = [r.error for r in rows["all"].records if r.release_id >= 10]
        assert len(windowed) == len(all_history) == 3
        assert np.mean(windowed) < np.mean(all_history)

    def test_window_must_be_smaller_than_history(self):
        dataset = synthesize_metric_history(n_releases=5)
        with pytest.raises(ValidationError):
            windowed_eval(dataset.metrics, dataset.history, SELECTED, [5])
        with pytest.raises(ValidationError):
            windowed_eval(dataset.metrics, dataset.history, SELECTED, [0])

    def test_window_correlations(self):
        dataset = synthesize_metric_history(n_releases=8, seed=2)
        study = windowed_eval(dataset.metrics, dataset.history, SELECTED, [1, 4])
        by_key = {(c.window, c.metric_id): c for c in study.correlations}
        assert by_key[(1, "commits")].n == 0
        assert by_key[(1, "commits")].median is None
        assert by_key[(4, "commits")].n == 4
        assert -1.0 <= by_key[(4, "new_loc")].mean <= 1.0


class TestCrossProject:

    @pytest.fixture
    def source(self):
        return synthesize_metric_history(project="old", n_releases=10, seed=10)

    @pytest.fixture
    def target(self):
        # startet nach dem Code-Freeze des vierten Quell-Releases
        return _shifted(synthesize_metric_history(project="young", n_releases=6, seed=11), 100, "young")

    def test_source_releases_before_freeze(self, source, target):
        freeze = target.timeline.release(1).t_f
        assert source_release_ids(source, freeze) == [1, 2, 3, 4]

    def test_pooled_and_source_only(self, source, target):
        rows = cross_project_eval(source, target, SELECTED)
        assert [row.label for row in rows] == [POOLED_LABEL, SOURCE_ONLY_LABEL]
        for row in rows:
            assert [r.release_id for r in row.records] == [1, 2, 3, 4]
            # gleiches Gesetz in beiden Projekten
            assert row.summary.max == pytest.approx(0.0, abs=1e-6)

    def test_scaled_source_gives_same_source_only_predictions(self, source, target):
        doubled = synthesize_metric_history(project="old", n_releases=10, seed=10, metric_scale=2.0, bug_scale=2.0)
        plain = cross_project_eval(source, target, SELECTED)[1]
        scaled = cross_project_eval(doubled, target, SELECTED)[1]
        assert [r.predicted for r in scaled.records] == pytest.approx([r.predicted for r in plain.records])

    def test_same_law_source_matches_in_project_errors(self, source, target):
        in_project = config_sweep(target.metrics, target.history, SELECTED, ["LR-PC+woI"])[0]
        expected = {r.release_id: r.error for r in in_project.records}
        for row in cross_project_eval(source, target, SELECTED):
            for record in row.records:
                if record.release_id >= 3:
                    assert record.error == pytest.approx(expected[record.release_id], abs=1e-6)

    def test_identical_source_matches_in_project_fit(self):
        dataset = synthesize_metric_history(project="young", n_releases=8, noise=0.05, seed=3)
        twin = dataset.model_copy(update={"name": "twin"})
        ids = [1, 2, 3, 4, 5, 6]
        options = VARIANTS["LR-PC+woI"]

        pooled = pooled_fit(twin, dataset, SELECTED, ids, ids, options)
        alone = fit_releases(dataset.metrics, dataset.history, SELECTED, ids, options)
        assert pooled.coefficients == pytest.approx(alone.coefficients, rel=1e-9, abs=1e-12)
        target = dataset.vector(7)
        assert predict(pooled, target).predicted == pytest.approx(predict(alone, target).predicted, rel=1e-9)

    def test_target_before_source(self, source):
        early = _shifted(synthesize_metric_history(project="young", n_releases=4, seed=3), -400, "young")
        with pytest.raises(NoTrainingDataError):
            cross_project_eval(source, early, SELECTED)

    def test_pooled_fit_needs_rows(self, source, target):
        with pytest.raises(NoTrainingDataError):
            pooled_fit(source, target, SELECTED, [], [], VARIANTS["LR-PC+woI"])
