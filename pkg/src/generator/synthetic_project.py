"""
Synthetic Project - Erzeugt Testprojekte mit bekannter Wahrheit

Zwei Arten:
- Metrik-Historie: Metrik-Vektoren und Bug-Zahlen nach einem linearen
  Gesetz, optional mit Rauschen und Regimewechsel
- Git-Repository: echtes Repository mit geplanten Änderungen pro Release,
  alle 43 Katalog-Metriken sind per Konstruktion bekannt
"""
import itertools
import json
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from core.errors import ValidationError
from evaluation.experiments import ProjectDataset
from metrics.git_repo import GitRepository
from model.bugs import BugHistory, ReleaseBugCount
from model.catalog import DEFAULT_CATALOG, DERIVED_SUMS, LOC_OTHER, THRESHOLDS, MetricVector
from model.release import ReleaseSpec, Timeline
from utils.logger import setup_logger

logger = setup_logger("synthetic_project")

DEFAULT_LAW = {"commits": 0.1, "new_loc": 0.05}
BASE_DATE = date(2018, 1, 1)
CYCLE_DAYS = 30
DEVELOPMENT_DAYS = 20
DEBUG_DAYS = 7

AUTHORS = [
    ("Ada Lovelace", "ada@synth.example"),
    ("Grace Hopper", "grace@synth.example"),
    ("Alan Turing", "alan@synth.example"),
    ("Edsger Dijkstra", "edsger@synth.example"),
]


def synthetic_timeline(project: str, n_releases: int, base: date = BASE_DATE,
                       repo_location: str = "repo", bug_export_location: str = "bugs.json") -> Timeline:
    """Releases im 30-Tage-Takt: t_f = t_s + 20 Tage, t_r = t_f + 7 Tage."""
    releases = []
    for k in range(1, n_releases + 1):
        t_s = base + timedelta(days=CYCLE_DAYS * (k - 1))
        t_f = t_s + timedelta(days=DEVELOPMENT_DAYS)
        releases.append(ReleaseSpec(id=k, name=f"R{k:02d}", t_s=t_s, t_f=t_f, t_r=t_f + timedelta(days=DEBUG_DAYS)))
    return Timeline(
        project=project,
        releases=tuple(releases),
        repo_location=repo_location,
        bug_export_location=bug_export_location,
        bug_export_format="tracker_json",
    )


def _at(day: date, hours: float = 12.0) -> datetime:
    return datetime.combine(day, time.min, tzinfo=timezone.utc) + timedelta(hours=hours)


# ===== Metrik-Historie =====

def _random_metric_values(rng: np.random.Generator) -> Dict[str, float]:
    """Ein konsistenter Satz aller Katalog-Metriken (Summen und loc_other passen)."""
    values: Dict[str, float] = {}
    lang_share = rng.uniform(0.5, 0.9)
    for base in ("loc", "new_loc", "modified_loc", "removed_loc", "files", "new_files", "modified_files",
                 "functions", "new_modified_functions", "total_cc"):
        if base == "new_loc":
            total = 20 * int(rng.integers(500, 5000))
        elif base in ("loc",):
            total = int(rng.integers(500_000, 9_000_000))
        else:
            total = int(rng.integers(10, 50_000))
        values[base] = float(total)
        values[f"{base}_lang"] = float(int(total * lang_share))
    for suffix in ("", "_lang"):
        values[f"new_modified_loc{suffix}"] = values[f"new_loc{suffix}"] + values[f"modified_loc{suffix}"]
        above = values[f"functions{suffix}"]
        changed_above = values[f"new_modified_functions{suffix}"]
        for t in THRESHOLDS:
            above = float(int(above * rng.uniform(0.05, 0.5)))
            changed_above = float(int(changed_above * rng.uniform(0.05, 0.5)))
            values[f"functions_cc_gt{t}{suffix}"] = above
            values[f"new_modified_functions_cc_gt{t}{suffix}"] = changed_above
    values["commits"] = float(10 * int(rng.integers(100, 1000)))
    values["contributors"] = float(int(rng.integers(20, 400)))
    for metric_id, (parts, _scope, _text) in DERIVED_SUMS.items():
        values[metric_id] = float(sum(values[part] for part in parts))
    values[LOC_OTHER] = values["loc"] - values["loc_lang"]
    return values


def synthesize_metric_history(
        project: str = "synthetic",
        n_releases: int = 10,
        law: Optional[Dict[str, float]] = None,
        noise: float = 0.0,
        seed: int = 0,
        regime_change_at: Optional[int] = None,
        regime_law: Optional[Dict[str, float]] = None,
        metric_scale: float = 1.0,
        bug_scale: float = 1.0
) -> ProjectDataset:
    """
    Metrik-Historie mit Bug-Zahlen nach einem linearen Gesetz.

    bugs_k = round(sum(coef * metric_k) * (1 + noise * u)), u gleichverteilt in [-1, 1].
    Ohne Rauschen ist das Gesetz ganzzahlig (commits Vielfaches von 10,
    new_loc Vielfaches von 20), die Bug-Zahl also exakt.

    Args:
        law: metric_id -> Koeffizient (default 0.1*commits + 0.05*new_loc)
        noise: relative Rauschbreite (0.05 = 5 %)
        regime_change_at: ab diesem Release gilt regime_law
        metric_scale, bug_scale: Skalierung aller Metriken bzw. Bug-Zahlen
    """
    if n_releases < 1:
        raise ValidationError("Mindestens ein Release nötig")
    law = dict(law or DEFAULT_LAW)
    rng = np.random.default_rng(seed)
    timeline = synthetic_timeline(project, n_releases)

    vectors = []
    counts = []
    for spec in timeline.ordered():
        values = _random_metric_values(rng)
        active = (regime_law or law) if (regime_change_at is not None and spec.id >= regime_change_at) else law
        expected = sum(coefficient * values[metric_id] for metric_id, coefficient in active.items())
        jitter = rng.uniform(-1.0, 1.0)
        bugs = int(round(expected * (1.0 + noise * jitter) * bug_scale))
        vectors.append(MetricVector(
            release_id=spec.id,
            values={metric_id: values[metric_id] * metric_scale for metric_id in DEFAULT_CATALOG.metric_ids},
        ))
        counts.append(ReleaseBugCount(release_id=spec.id, release_name=spec.name, labeled_count=max(bugs, 0)))

    return ProjectDataset(name=project, timeline=timeline, metrics=tuple(vectors), history=BugHistory(counts=tuple(counts)))


def bug_export_for_history(history: BugHistory, timeline: Timeline, key_prefix: str = "SYN",
                           unlabeled_share: float = 0.5) -> bytes:
    """
    tracker_json Export, dessen Zuordnung genau history ergibt.

    Ein Teil der Bugs ist gelabelt, der Rest per Datum im Fenster
    [t_f(k), t_f(k+1)) angelegt. Dazu zwei Issues anderer Typen.
    """
    ordered = timeline.ordered()
    issues = []
    counter = itertools.count(1)
    for spec in ordered:
        total = history.total_for(spec.id) or 0
        unlabeled = int(total * unlabeled_share)
        for i in range(total):
            created = _at(spec.t_f, 1.0) + timedelta(minutes=i)
            fields = {
                "issuetype": {"name": "Bug"},
                "project": {"key": key_prefix},
                "status": {"name": "Closed" if i % 2 else "Open"},
                "priority": {"name": "Medium"},
                "versions": [] if i < unlabeled else [{"name": spec.name}],
                "resolution": {"name": "Done"} if i % 2 else None,
                "created": created.strftime("%Y-%m-%dT%H:%M:%S.000+0000"),
                "resolutiondate": (created + timedelta(hours=5)).strftime("%Y-%m-%dT%H:%M:%S.000+0000")
                if i % 2 else None,
            }
            issues.append({"key": f"{key_prefix}-{next(counter)}", "fields": fields})
    first = ordered[0]
    for issue_type in ("Improvement", "Milestone"):
        issues.append({"key": f"{key_prefix}-{next(counter)}", "fields": {
            "issuetype": {"name": issue_type},
            "project": {"key": key_prefix},
            "status": {"name": "Open"},
            "versions": [{"name": first.name}],
            "created": _at(first.t_s).strftime("%Y-%m-%dT%H:%M:%S.000+0000"),
        }})
    return json.dumps(issues, indent=1, sort_keys=True).encode("utf-8")


# ===== Git-Repository mit geplanten Änderungen =====

class SynthFunction(BaseModel):
    """Java-Funktion mit cc-1 if-Zeilen und eindeutigen Anweisungszeilen"""

    name: str
    cc: int
    branches: List[str]
    statements: List[str]

    def code_lines(self) -> List[str]:
        return ([f"public int {self.name}(int x) {{", "int v = x;"] + self.branches + self.statements +
                ["return v;", "}"])

    def render(self) -> List[str]:
        indent = "        "
        return ([f"    public int {self.name}(int x) {{", f"{indent}int v = x;"] +
                [indent + line for line in self.branches] +
                [indent + line for line in self.statements] +
                [f"{indent}return v;", "    }"])


class JavaFile(BaseModel):
    class_name: str
    uid: int
    functions: List[SynthFunction]

    def code_lines(self) -> List[str]:
        lines = ["package synth;", f"public class {self.class_name} {{",
                 f"private int counter{self.uid} = 0;",
                 f'private String tag{self.uid} = "http://synth.example/{self.uid}";']
        for function in self.functions:
            lines.extend(function.code_lines())
        lines.append("}")
        return lines

    def render(self) -> str:
        lines = [
            f"// Generated class {self.class_name}",
            "package synth;",
            "",
            "/*",
            f" * {self.class_name} // no code here",
            " */",
            f"public class {self.class_name} {{",
            f"    private int counter{self.uid} = 0; // state",
            f'    private String tag{self.uid} = "http://synth.example/{self.uid}";',
            "",
        ]
        for function in self.functions:
            lines.append("    // helper")
            lines.extend(function.render())
            lines.append("")
        lines.append("}")
        return "\n".join(lines) + "\n"


class PythonFile(BaseModel):
    uid: int

    def code_lines(self) -> List[str]:
        return [f"def g{self.uid}(x):", f"y = x + {self.uid}", "return y"]

    def render(self) -> str:
        return (f"# generated module {self.uid}\n\n"
                f"def g{self.uid}(x):\n"
                f"    # add offset\n"
                f"    y = x + {self.uid}\n"
                f"    return y\n")


class TextFile(BaseModel):
    content: str
    counted_lines: int
    language: str  # "other", "YAML" oder "binary"


class PlannedRelease(BaseModel):
    """Ground truth eines Releases"""

    model_config = ConfigDict(frozen=True)

    release_id: int
    values: Dict[str, float]


class SyntheticRepository(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    path: Path
    timeline: Timeline
    ground_truth: Tuple[PlannedRelease, ...]
    history: BugHistory


class _RepoModel:
    """Aktueller Inhalt des Arbeitsbaums als Modell, aus dem Text und Wahrheit folgen"""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.files: Dict[str, object] = {}
        self._uid = itertools.count(1000)

    def uid(self) -> int:
        return next(self._uid)

    def new_function(self, cc: int, statements: int) -> SynthFunction:
        fid = self.uid()
        branches = []
        for _ in range(cc - 1):
            u = self.uid()
            branches.append(f"if (x > {u}) {{ v = v + {u}; }}")
        body = []
        for _ in range(statements):
            u = self.uid()
            body.append(f"v = v * 3 + {u};")
        return SynthFunction(name=f"f{fid}", cc=cc, branches=branches, statements=body)

    def new_java_file(self, ccs: Sequence[int]) -> Tuple[str, JavaFile]:
        uid = self.uid()
        functions = [self.new_function(cc, int(self.rng.integers(1, 4))) for cc in ccs]
        name = f"C{uid}"
        return f"src/main/java/synth/{name}.java", JavaFile(class_name=name, uid=uid, functions=functions)

    def java_files(self) -> List[str]:
        return sorted(p for p, f in self.files.items() if isinstance(f, JavaFile))

    def write(self, root: Path) -> None:
        for existing in sorted(root.rglob("*")):
            if ".git" in existing.relative_to(root).parts:
                continue
            if existing.is_file() and existing.relative_to(root).as_posix() not in self.files:
                existing.unlink()
        for relative, content in self.files.items():
            target = root / relative
            target.parent.mkdir(parents=True, exist_ok=True)
            if isinstance(content, TextFile) and content.language == "binary":
                target.write_bytes(content.content.encode("latin-1"))
            elif isinstance(content, TextFile):
                target.write_text(content.content, encoding="utf-8", newline="\n")
            else:
                target.write_text(content.render(), encoding="utf-8", newline="\n")

    # Größe und Komplexität des aktuellen Stands
    def snapshot_values(self) -> Dict[str, float]:
        values = {"loc": 0, "files": 0, "loc_lang": 0, "files_lang": 0}
        functions_all: List[int] = []
        functions_lang: List[int] = []
        for content in self.files.values():
            if isinstance(content, JavaFile):
                n = len(content.code_lines())
                values["loc"] += n
                values["files"] += 1
                values["loc_lang"] += n
                values["files_lang"] += 1
                functions_all.extend(f.cc for f in content.functions)
                functions_lang.extend(f.cc for f in content.functions)
            elif isinstance(content, PythonFile):
                values["loc"] += len(content.code_lines())
                values["files"] += 1
                functions_all.append(1)
            elif isinstance(content, TextFile) and content.language == "other":
                values["loc"] += content.counted_lines
                values["files"] += 1
        for suffix, ccs in (("", functions_all), ("_lang", functions_lang)):
            values[f"functions{suffix}"] = len(ccs)
            values[f"total_cc{suffix}"] = sum(ccs)
            for t in THRESHOLDS:
                values[f"functions_cc_gt{t}{suffix}"] = sum(1 for cc in ccs if cc > t)
        return {k: float(v) for k, v in values.items()}


def _zero_changes() -> Dict[str, float]:
    values: Dict[str, float] = {}
    for suffix in ("", "_lang"):
        for base in ("new_loc", "modified_loc", "removed_loc", "new_files", "modified_files",
                     "new_modified_functions"):
            values[f"{base}{suffix}"] = 0.0
        for t in THRESHOLDS:
            values[f"new_modified_functions_cc_gt{t}{suffix}"] = 0.0
    return values


def _count_function(changes: Dict[str, float], cc: int, java: bool) -> None:
    scopes = ("", "_lang") if java else ("",)
    for suffix in scopes:
        changes[f"new_modified_functions{suffix}"] += 1
        for t in THRESHOLDS:
            if cc > t:
                changes[f"new_modified_functions_cc_gt{t}{suffix}"] += 1


def _add(changes: Dict[str, float], base: str, amount: int, java: bool) -> None:
    changes[base] += amount
    if java:
        changes[f"{base}_lang"] += amount


# CC-Werte neuer Funktionen, rotierend (deckt alle Schwellen ab)
_CC_CYCLE = [1, 5, 12, 18, 25, 3, 11, 16, 21, 2]


def build_synthetic_repository(
        path,
        n_releases: int = 3,
        seed: int = 0,
        project: str = "synthetic-repo",
        law: Optional[Dict[str, float]] = None
) -> SyntheticRepository:
    """
    Legt ein git-Repository mit geplanten Änderungen an.

    Pro Release im Fenster [t_s, t_f]: eine neue Java-Datei, eine in-place
    geänderte Zeile, eingefügte Anweisungen in einer anderen Datei, ab
    Release 2 eine gelöschte Datei, eine YAML-Datei (ausgeschlossen), in
    geraden Releases ein Python-Modul. Nach jedem Code-Freeze folgt ein
    Bugfix-Commit, der zu keinem Fenster gehört.

    Returns:
        SyntheticRepository mit Ground Truth aller Katalog-Metriken
    """
    path = Path(path)
    rng = np.random.default_rng(seed)
    timeline = synthetic_timeline(project, n_releases, repo_location=str(path))
    repo = GitRepository.init(path)
    model = _RepoModel(rng)
    cc_cycle = itertools.cycle(_CC_CYCLE)

    # Ausgangsstand vor t_s(1)
    for _ in range(3):
        relative, java = model.new_java_file([next(cc_cycle) for _ in range(3)])
        model.files[relative] = java
    model.files["docs/notes.txt"] = TextFile(content="Synthetic project\n\nsecond line\n", counted_lines=2,
                                             language="other")
    model.files["assets/logo.bin"] = TextFile(content="\x89PNG\x00\x01\x02\x00", counted_lines=0, language="binary")
    model.files["config/base.yaml"] = TextFile(content="# base\nkey: value\n", counted_lines=0, language="YAML")
    model.write(path)
    first = timeline.ordered()[0]
    repo.commit_all("initial import", _at(first.t_s - timedelta(days=5)), *AUTHORS[0])

    truth: List[PlannedRelease] = []
    bug_counts: List[ReleaseBugCount] = []
    law = dict(law or DEFAULT_LAW)

    for spec in timeline.ordered():
        changes = _zero_changes()
        edits = []
        touched: set = set()

        # 1. neue Java-Datei
        relative, java = model.new_java_file([next(cc_cycle) for _ in range(2)])

        def add_file(relative=relative, java=java):
            model.files[relative] = java
        edits.append(add_file)
        _add(changes, "new_files", 1, True)
        _add(changes, "new_loc", len(java.code_lines()), True)
        for function in java.functions:
            _count_function(changes, function.cc, True)

        existing = model.java_files()

        # 2. eine Zeile in-place ändern
        target = existing[int(rng.integers(len(existing)))]
        touched.add(target)
        target_function = model.files[target].functions[0]
        new_statement = f"v = v * 3 + {model.uid()};"

        def modify_line(target=target, new_statement=new_statement):
            model.files[target].functions[0].statements[0] = new_statement
        edits.append(modify_line)
        _add(changes, "modified_loc", 1, True)
        _add(changes, "modified_files", 1, True)
        _count_function(changes, target_function.cc, True)

        # 3. Anweisungen in eine andere Datei einfügen
        others = [p for p in existing if p not in touched]
        insert_target = others[int(rng.integers(len(others)))]
        touched.add(insert_target)
        function_index = len(model.files[insert_target].functions) - 1
        inserted = [f"v = v * 3 + {model.uid()};" for _ in range(int(rng.integers(2, 5)))]

        def insert_lines(insert_target=insert_target, function_index=function_index, inserted=inserted):
            model.files[insert_target].functions[function_index].statements.extend(inserted)
        edits.append(insert_lines)
        _add(changes, "new_loc", len(inserted), True)
        _add(changes, "modified_files", 1, True)
        _count_function(changes, model.files[insert_target].functions[function_index].cc, True)

        # 4. eine unberührte Datei löschen (ab Release 2)
        if spec.id >= 2:
            candidates = [p for p in existing if p not in touched]
            if len(candidates) > 1:
                victim = candidates[0]
                touched.add(victim)

                def delete_file(victim=victim):
                    del model.files[victim]
                edits.append(delete_file)
                _add(changes, "removed_loc", len(model.files[victim].code_lines()), True)

        # 5. YAML (ausgeschlossen) und in geraden Releases ein Python-Modul
        yaml_path = f"config/release_{spec.id}.yaml"

        def add_yaml(yaml_path=yaml_path, k=spec.id):
            model.files[yaml_path] = TextFile(content=f"release: {k}\n", counted_lines=0, language="YAML")
        edits.append(add_yaml)

        if spec.id % 2 == 0:
            module = PythonFile(uid=model.uid())

            def add_python(module=module):
                model.files[f"scripts/tool_{module.uid}.py"] = module
            edits.append(add_python)
            changes["new_files"] += 1
            changes["new_loc"] += len(module.code_lines())
            _count_function(changes, 1, False)

        # Commits im Fenster, dann leere Commits bis zur geplanten Anzahl
        contributors = 1 + spec.id % 3
        planned_commits = len(edits) + spec.id
        window_start = _at(spec.t_s, 1.0)
        for index in range(planned_commits):
            if index < len(edits):
                edits[index]()
                model.write(path)
            name, email = AUTHORS[index % contributors]
            repo.commit_all(f"{spec.name}: change {index + 1}", window_start + timedelta(hours=6 * index), name, email)

        snapshot = model.snapshot_values()
        values = dict(snapshot)
        values.update(changes)
        for suffix in ("", "_lang"):
            values[f"new_modified_loc{suffix}"] = values[f"new_loc{suffix}"] + values[f"modified_loc{suffix}"]
        values["commits"] = float(planned_commits)
        values["contributors"] = float(contributors)
        for metric_id, (parts, _scope, _text) in DERIVED_SUMS.items():
            values[metric_id] = float(sum(values[part] for part in parts))
        values[LOC_OTHER] = values["loc"] - values["loc_lang"]
        ordered_values = {metric_id: float(values[metric_id]) for metric_id in DEFAULT_CATALOG.metric_ids}
        truth.append(PlannedRelease(release_id=spec.id, values=ordered_values))

        bugs = int(round(sum(c * ordered_values[m] for m, c in law.items())))
        bug_counts.append(ReleaseBugCount(release_id=spec.id, release_name=spec.name, labeled_count=bugs))

        # Bugfix nach dem Code-Freeze, außerhalb jedes Fensters
        fix_target = model.java_files()[-1]
        model.files[fix_target].functions[-1].statements[-1] = f"v = v * 3 + {model.uid()};"
        model.write(path)
        repo.commit_all(f"{spec.name}: bugfix", _at(spec.t_f + timedelta(days=2)), *AUTHORS[3])

    logger.info(f"Synthetisches Repository erstellt: {path} ({n_releases} Releases)")
    return SyntheticRepository(
        path=path,
        timeline=timeline,
        ground_truth=tuple(truth),
        history=BugHistory(counts=tuple(bug_counts)),
    )


def render_java_file(ccs: Sequence[int], seed: int = 0) -> Tuple[str, str]:
    """Java-Datei mit je einer Funktion pro CC-Wert: (relativer Pfad, Quelltext)."""
    if any(cc < 1 for cc in ccs):
        raise ValidationError("CC muss >= 1 sein", str(list(ccs)))
    model = _RepoModel(np.random.default_rng(seed))
    relative, java = model.new_java_file(ccs)
    return relative, java.render()
