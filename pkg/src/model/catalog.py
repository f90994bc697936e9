"""
Metrik-Katalog - Die 43 Code-Metriken pro Release und der Metrik-Vektor eines Releases

Aufbau des Katalogs:
- je Sprach-Scope (alle Sprachen / gefilterte Sprache) 8 Größen- und Änderungsmetriken
- je Scope 9 Komplexitätsmetriken (Schwellen 10, 15, 20)
- 2 Prozessmetriken (Commits, Contributors)
- 7 abgeleitete Werte (6 Summen plus loc_other)
"""
import math
from enum import Enum
from typing import Dict, Iterable, List, Tuple

from pydantic import BaseModel, ConfigDict, field_validator

from core.errors import MissingMetricError, ValidationError


class MetricCategory(str, Enum):
    SIZE = "size"
    CHANGE = "change"
    COMPLEXITY = "complexity"
    PROCESS = "process"


class LanguageScope(str, Enum):
    ALL = "all"
    FILTERED = "filtered-language-only"


class MetricDefinition(BaseModel):
    model_config = ConfigDict(frozen=True)

    metric_id: str
    category: MetricCategory
    language_scope: LanguageScope
    description: str


class MetricCatalog(BaseModel):
    """Benannte Menge von Metriken mit fester Kategorie und fester Scope pro ID"""

    model_config = ConfigDict(frozen=True)

    version: str
    entries: Tuple[MetricDefinition, ...]

    @field_validator("entries")
    @classmethod
    def _unique_ids(cls, entries):
        ids = [entry.metric_id for entry in entries]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"Doppelte Metrik-IDs: {duplicates}")
        return entries

    @property
    def metric_ids(self) -> List[str]:
        return [entry.metric_id for entry in self.entries]

    def get(self, metric_id: str) -> MetricDefinition:
        for entry in self.entries:
            if entry.metric_id == metric_id:
                return entry
        raise MissingMetricError(metric_id)

    def check(self, vector: "MetricVector") -> "MetricVector":
        """Prüft, dass die Schlüssel exakt dem Katalog entsprechen."""
        expected = set(self.metric_ids)
        actual = set(vector.values)
        if expected != actual:
            missing = sorted(expected - actual)
            extra = sorted(actual - expected)
            raise ValidationError(
                f"Metrik-Vektor von Release {vector.release_id} passt nicht zum Katalog {self.version}",
                f"fehlend={missing} zusätzlich={extra}"
            )
        return vector


class MetricVector(BaseModel):
    """Gemessene Metrikwerte eines Releases"""

    model_config = ConfigDict(frozen=True)

    release_id: int
    values: Dict[str, float]

    @field_validator("values")
    @classmethod
    def _finite_non_negative(cls, values):
        for metric_id, value in values.items():
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"Metrik {metric_id} muss endlich und >= 0 sein, ist {value}")
        return values

    def value(self, metric_id: str) -> float:
        try:
            return self.values[metric_id]
        except KeyError:
            raise MissingMetricError(metric_id, self.release_id)

    def select(self, metric_ids: Iterable[str]) -> List[float]:
        return [self.value(metric_id) for metric_id in metric_ids]


# ===== Standard-Katalog =====

SCOPE_SUFFIX = {LanguageScope.ALL: "", LanguageScope.FILTERED: "_lang"}
THRESHOLDS = (10, 15, 20)

_SIZE_CHANGE = [
    ("loc", MetricCategory.SIZE, "Code-Zeilen im t_f-Snapshot"),
    ("new_loc", MetricCategory.CHANGE, "neue Code-Zeilen zwischen t_s und t_f"),
    ("modified_loc", MetricCategory.CHANGE, "geänderte Code-Zeilen zwischen t_s und t_f"),
    ("removed_loc", MetricCategory.CHANGE, "entfernte Code-Zeilen zwischen t_s und t_f"),
    ("new_modified_loc", MetricCategory.CHANGE, "Summe neuer und geänderter Code-Zeilen"),
    ("files", MetricCategory.SIZE, "Dateien im t_f-Snapshot"),
    ("new_files", MetricCategory.CHANGE, "neue Dateien"),
    ("modified_files", MetricCategory.CHANGE, "geänderte Dateien"),
]

_COMPLEXITY = [
    ("functions", "Anzahl Funktionen im t_f-Snapshot"),
    ("new_modified_functions", "neue und geänderte Funktionen"),
    ("total_cc", "Summe der zyklomatischen Komplexität"),
] + [
    (f"functions_cc_gt{t}", f"Funktionen mit CC > {t}") for t in THRESHOLDS
] + [
    (f"new_modified_functions_cc_gt{t}", f"neue/geänderte Funktionen mit CC > {t}") for t in THRESHOLDS
]

_PROCESS = [
    ("commits", "Commits auf der Hauptlinie zwischen t_s und t_f"),
    ("contributors", "verschiedene Autoren dieser Commits"),
]

# metric_id -> (Summanden, Scope, Beschreibung)
DERIVED_SUMS: Dict[str, Tuple[Tuple[str, ...], LanguageScope, str]] = {
    "changed_loc": (("new_loc", "modified_loc", "removed_loc"), LanguageScope.ALL,
                    "Summe neuer, geänderter und entfernter Code-Zeilen"),
    "changed_loc_lang": (("new_loc_lang", "modified_loc_lang", "removed_loc_lang"), LanguageScope.FILTERED,
                         "Summe neuer, geänderter und entfernter Code-Zeilen (gefilterte Sprache)"),
    "changed_files": (("new_files", "modified_files"), LanguageScope.ALL,
                      "Summe neuer und geänderter Dateien"),
    "changed_files_lang": (("new_files_lang", "modified_files_lang"), LanguageScope.FILTERED,
                           "Summe neuer und geänderter Dateien (gefilterte Sprache)"),
    "churn_loc": (("new_loc", "removed_loc"), LanguageScope.ALL,
                  "Summe neuer und entfernter Code-Zeilen"),
    "churn_loc_lang": (("new_loc_lang", "removed_loc_lang"), LanguageScope.FILTERED,
                       "Summe neuer und entfernter Code-Zeilen (gefilterte Sprache)"),
}

# loc_other ist die einzige Differenz; per Scope-Monotonie nie negativ
LOC_OTHER = "loc_other"


def _build_default_catalog() -> MetricCatalog:
    entries: List[MetricDefinition] = []
    for scope, suffix in SCOPE_SUFFIX.items():
        for base, category, text in _SIZE_CHANGE:
            entries.append(MetricDefinition(
                metric_id=f"{base}{suffix}", category=category, language_scope=scope, description=text))
    for scope, suffix in SCOPE_SUFFIX.items():
        for base, text in _COMPLEXITY:
            entries.append(MetricDefinition(
                metric_id=f"{base}{suffix}", category=MetricCategory.COMPLEXITY, language_scope=scope,
                description=text))
    for base, text in _PROCESS:
        entries.append(MetricDefinition(
            metric_id=base, category=MetricCategory.PROCESS, language_scope=LanguageScope.ALL, description=text))
    for metric_id, (parts, scope, text) in DERIVED_SUMS.items():
        entries.append(MetricDefinition(
            metric_id=metric_id, category=MetricCategory.CHANGE, language_scope=scope, description=text))
    entries.append(MetricDefinition(
        metric_id=LOC_OTHER, category=MetricCategory.SIZE, language_scope=LanguageScope.ALL,
        description="Code-Zeilen außerhalb der gefilterten Sprache"))
    return MetricCatalog(version="catalog-v1", entries=tuple(entries))


DEFAULT_CATALOG = _build_default_catalog()
