"""
Metric Extractor - Berechnet den kompletten Metrik-Vektor eines Releases

Ablauf pro Release:
1. Snapshots bei t_s und t_f bestimmen
2. Cache prüfen (Schlüssel: Commit-Paar, Fenster, Katalog, Sprachfilter, Schwellen)
3. Snapshots auschecken, Größe, Diff und Komplexität messen
4. Commits und Contributors zählen, abgeleitete Summen bilden
"""
from contextlib import ExitStack
from typing import Dict, List, Optional, Sequence, Tuple

from core.config import DEFAULT_THRESHOLDS
from core.errors import PredictorError, ValidationError
from metrics.complexity import changed_function_metrics, complexity_metrics
from metrics.git_repo import GitRepository
from metrics.languages import LanguageFilter, language_of
from metrics.loc_counter import count_lines, diff_metrics
from metrics.snapshots import SnapshotPair, count_commits, resolve_snapshots
from model.catalog import DEFAULT_CATALOG, DERIVED_SUMS, LOC_OTHER, MetricCatalog, MetricVector, SCOPE_SUFFIX, \
    LanguageScope
from model.release import ReleaseSpec, Timeline
from utils.metric_cache import MetricCache, cache_key
from utils.logger import setup_logger

logger = setup_logger("extractor")


def _scope_values(suffix: str, size, change, complexity, changed, thresholds: Sequence[int]) -> Dict[str, float]:
    values = {
        "loc": size.loc,
        "new_loc": change.new_loc,
        "modified_loc": change.modified_loc,
        "removed_loc": change.removed_loc,
        "new_modified_loc": change.new_loc + change.modified_loc,
        "files": size.files,
        "new_files": change.new_files,
        "modified_files": change.modified_files,
        "functions": complexity.functions,
        "new_modified_functions": changed.count,
        "total_cc": complexity.total_cc,
    }
    for t in thresholds:
        values[f"functions_cc_gt{t}"] = complexity.above[t]
        values[f"new_modified_functions_cc_gt{t}"] = changed.above[t]
    return {f"{name}{suffix}": float(value) for name, value in values.items()}


def compute_metric_values(
        repo: GitRepository,
        pair: SnapshotPair,
        release: ReleaseSpec,
        language_filter: LanguageFilter,
        thresholds: Sequence[int] = DEFAULT_THRESHOLDS,
        workers: int = 1
) -> Dict[str, float]:
    """Alle bekannten Metriken für ein Snapshot-Paar (ohne Cache)."""
    with ExitStack() as stack:
        old_tree = stack.enter_context(repo.materialize(pair.old_commit))
        if pair.new_commit == pair.old_commit:
            new_tree = old_tree
        else:
            new_tree = stack.enter_context(repo.materialize(pair.new_commit))

        size = count_lines(new_tree, language_filter, workers)
        change = diff_metrics(old_tree, new_tree, language_filter, workers)
        old_cx = complexity_metrics(old_tree, language_filter, thresholds, workers)
        new_cx = old_cx if new_tree == old_tree else complexity_metrics(new_tree, language_filter, thresholds, workers)

    if new_cx.skipped_files:
        logger.warning(f"Release {release.id}: {len(new_cx.skipped_files)} Dateien ohne Komplexitätsanalyse")

    def filtered(records):
        return [r for r in records if language_filter.in_filtered(language_of(r.file_path))]

    changed_all = changed_function_metrics(old_cx.functions, new_cx.functions, thresholds)
    changed_lang = changed_function_metrics(filtered(old_cx.functions), filtered(new_cx.functions), thresholds)

    values: Dict[str, float] = {}
    values.update(_scope_values(SCOPE_SUFFIX[LanguageScope.ALL], size.all, change.all, new_cx.all,
                                changed_all, thresholds))
    values.update(_scope_values(SCOPE_SUFFIX[LanguageScope.FILTERED], size.filtered, change.filtered,
                                new_cx.filtered, changed_lang, thresholds))

    commits, contributors = count_commits(repo, release)
    values["commits"] = float(commits)
    values["contributors"] = float(contributors)

    for metric_id, (parts, _scope, _text) in DERIVED_SUMS.items():
        values[metric_id] = float(sum(values[part] for part in parts))
    values[LOC_OTHER] = values["loc"] - values["loc_lang"]
    return values


def extract_release_metrics(
        repo: GitRepository,
        release: ReleaseSpec,
        catalog: MetricCatalog = DEFAULT_CATALOG,
        language_filter: Optional[LanguageFilter] = None,
        cache: Optional[MetricCache] = None,
        thresholds: Sequence[int] = DEFAULT_THRESHOLDS,
        workers: int = 1
) -> MetricVector:
    """
    Metrik-Vektor eines Releases, über den Cache wenn möglich.

    Nur vollständig berechnete Vektoren werden gecacht.

    Raises:
        ReleasePredatesRepositoryError: kein Commit vor t_s
        VcsError: git-Aufruf fehlgeschlagen
    """
    language_filter = language_filter or LanguageFilter()
    pair = resolve_snapshots(repo, release)
    key = cache_key(
        pair.old_commit, pair.new_commit, release.t_s.isoformat(), release.t_f.isoformat(),
        catalog.version, language_filter.cache_token(), ",".join(str(t) for t in thresholds),
    )

    values = cache.get(key) if cache is not None else None
    if values is None:
        logger.info(f"Extrahiere Release {release.id} ({release.name}): "
                    f"{pair.old_commit[:10]}..{pair.new_commit[:10]}")
        values = compute_metric_values(repo, pair, release, language_filter, thresholds, workers)
        if cache is not None:
            cache.put(key, values, {
                "release": release.name,
                "old_commit": pair.old_commit,
                "new_commit": pair.new_commit,
            })
    else:
        logger.info(f"Release {release.id} ({release.name}) aus dem Cache")

    try:
        selected = {metric_id: values[metric_id] for metric_id in catalog.metric_ids}
    except KeyError as e:
        raise ValidationError(f"Katalog {catalog.version} enthält unbekannte Metrik", str(e))
    return catalog.check(MetricVector(release_id=release.id, values=selected))


def extract_all(
        repo: GitRepository,
        timeline: Timeline,
        catalog: MetricCatalog = DEFAULT_CATALOG,
        cache: Optional[MetricCache] = None,
        workers: int = 1
) -> Tuple[List[MetricVector], Dict[int, str]]:
    """
    Extrahiert alle Releases einer Timeline.

    Returns:
        (Vektoren der erfolgreichen Releases, release_id -> Fehlermeldung)
    """
    language_filter = LanguageFilter.of(timeline.language_filter, timeline.excluded_languages)
    vectors: List[MetricVector] = []
    failures: Dict[int, str] = {}
    for release in timeline.ordered():
        try:
            vectors.append(extract_release_metrics(
                repo, release, catalog, language_filter, cache, workers=workers))
        except PredictorError as e:
            logger.error(f"Release {release.id} ({release.name}) fehlgeschlagen: {e}")
            failures[release.id] = f"{e.error_code}: {e}"
    return vectors, failures
