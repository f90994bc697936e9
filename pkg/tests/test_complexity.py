from pathlib import Path

import numpy as np
import pytest

from generator.synthetic_project import render_java_file
from metrics.complexity import (
    FunctionRecord, analyze_source, changed_function_metrics, complexity_metrics, function_signature,
)
from metrics.languages import LanguageFilter

OLD_SOURCE = """class A {
    int f(int x) { return x; }

    int g(int x) {
        if (x > 0 && x < 10) { return 1; }
        for (int i = 0; i < x; i++) { x--; }
        return x;
    }
}
"""

NEW_SOURCE = """class A {
    int f(int x) { return x + 1; }

    int g(int x) {
            // nur Kommentar und Einrückung geändert
            if (x > 0 && x < 10) { return 1; }
            for (int i = 0; i < x; i++) { x--; }
            return x;
    }

    int h(int x) { return x * 2; }
}
"""


def _write(root: Path, relative: str, text: str) -> None:
    path = root / relative
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


class TestAnalyzeSource:

    def test_cyclomatic_complexity(self):
        records = {r.name: r for r in analyze_source("src/A.java", OLD_SOURCE)}
        assert records["f"].cc == 1
        assert records["g"].cc == 4
        assert all(r.file_path == "src/A.java" for r in records.values())

    def test_rendered_functions_keep_planned_cc(self):
        ccs = [1, 5, 12, 18, 25]
        relative, text = render_java_file(ccs, seed=3)
        assert relative.endswith(".java")
        assert [r.cc for r in analyze_source(relative, text)] == ccs

    def test_names_and_signatures_are_unqualified(self):
        records = analyze_source("src/A.java", OLD_SOURCE)
        assert sorted(r.name for r in records) == ["f", "g"]
        assert all(r.signature.startswith(r.name + "(") for r in records)

    @pytest.mark.parametrize("long_name, expected", [
        ("A::f( int x )", "f( int x )"),
        ("f( int x )", "f( int x )"),
        ("Outer::Inner::g(int a,   int b)", "g(int a, int b)"),
        ("Repo.h(self, x)", "h(self, x)"),
    ])
    def test_function_signature(self, long_name, expected):
        assert function_signature(long_name) == expected


class TestChangedFunctions:

    def test_body_change_and_new_function_count(self):
        old = analyze_source("src/A.java", OLD_SOURCE)
        new = analyze_source("src/A.java", NEW_SOURCE)
        changed = changed_function_metrics(old, new, thresholds=(0, 1, 3))
        # f geändert, h neu, g nur Kommentar/Whitespace
        assert changed.count == 2
        assert changed.above == {0: 2, 1: 0, 3: 0}

    def test_identical_sources(self):
        records = analyze_source("src/A.java", OLD_SOURCE)
        assert changed_function_metrics(records, records).count == 0

    def test_same_function_in_other_file_is_new(self):
        old = analyze_source("src/A.java", OLD_SOURCE)
        new = analyze_source("src/B.java", OLD_SOURCE)
        assert changed_function_metrics(old, new).count == 2

    def test_qualified_and_plain_names_are_paired(self):
        def record(long_name):
            return FunctionRecord(file_path="src/A.java", name="f", signature=function_signature(long_name),
                                  cc=2, body_hash="abc")
        changed = changed_function_metrics([record("A::f( int x )")], [record("f( int x )")])
        assert changed.count == 0


class TestComplexityMetrics:

    def test_threshold_counts(self, tmp_path):
        relative, text = render_java_file([6, 13, 19, 2])
        _write(tmp_path, relative, text)
        metrics = complexity_metrics(tmp_path, LanguageFilter(), thresholds=(5, 12, 18, 25))
        assert metrics.all.functions == 4
        assert metrics.all.total_cc == 40
        assert metrics.all.above == {5: 3, 12: 2, 18: 1, 25: 0}
        assert metrics.filtered == metrics.all

    def test_python_counts_only_in_all_scope(self, tmp_path):
        relative, text = render_java_file([3, 11])
        _write(tmp_path, relative, text)
        _write(tmp_path, "scripts/tool.py", "def g(x):\n    if x:\n        return 1\n    return 0\n")
        _write(tmp_path, "config/app.yaml", "key: value\n")

        metrics = complexity_metrics(tmp_path, LanguageFilter())
        assert metrics.all.functions == 3
        assert metrics.all.total_cc == 3 + 11 + 2
        assert metrics.filtered.functions == 2
        assert metrics.filtered.above == {10: 1, 15: 0, 20: 0}

    def test_binary_source_is_skipped(self, tmp_path):
        (tmp_path / "Broken.java").write_bytes(b"class X {\x00}")
        metrics = complexity_metrics(tmp_path, LanguageFilter())
        assert metrics.skipped_files == ("Broken.java",)
        assert metrics.all.functions == 0

    @pytest.mark.parametrize("workers", [1, 4])
    def test_random_files_are_monotone(self, tmp_path, workers):
        rng = np.random.default_rng(11)
        thresholds = (10, 15, 20)
        planted = []
        for i in range(100):
            ccs = [int(c) for c in rng.integers(1, 30, size=int(rng.integers(1, 4)))]
            relative, text = render_java_file(ccs, seed=i)
            _write(tmp_path / f"m{i:03d}", relative, text)
            planted.extend(ccs)

        metrics = complexity_metrics(tmp_path, LanguageFilter(), thresholds, workers=workers)
        assert metrics.all.functions == len(planted)
        assert metrics.all.total_cc == sum(planted)
        assert metrics.all.above == {t: sum(1 for cc in planted if cc > t) for t in thresholds}
        counts = [metrics.all.above[t] for t in thresholds]
        assert counts == sorted(counts, reverse=True)
        assert metrics.all.above[10] <= metrics.all.functions
