"""
Release Modell - Release-Zyklen (t_s, t_f, t_r) und die Timeline eines Projekts
"""
from datetime import date
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from core.errors import ValidationError


class ReleaseSpec(BaseModel):
    """
    Ein Release-Zyklus: Start der Entwicklung (t_s), Code-Freeze (t_f)
    und Veröffentlichung (t_r). Alle Daten sind Kalendertage in UTC.
    """

    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=1)
    name: str
    t_s: date
    t_f: date
    t_r: date
    lts: bool = False


class Timeline(BaseModel):
    """Alle Releases eines Projekts plus die Projekt-Konfiguration aus dem Deskriptor"""

    model_config = ConfigDict(frozen=True)

    project: str
    releases: Tuple[ReleaseSpec, ...]
    repo_location: str
    bug_export_location: str
    language_filter: Tuple[str, ...] = ("Java",)
    excluded_languages: Tuple[str, ...] = ("YAML", "XML")
    repo_branch: Optional[str] = None
    bug_export_format: Optional[str] = None
    tracker_url: Optional[str] = None
    tracker_project_key: Optional[str] = None

    def release(self, release_id: int) -> ReleaseSpec:
        """
        Release anhand der ID.

        Raises:
            ValidationError: wenn die ID nicht existiert
        """
        for spec in self.releases:
            if spec.id == release_id:
                return spec
        raise ValidationError(f"Release {release_id} fehlt im Deskriptor", f"Projekt {self.project}")

    def by_name(self) -> Dict[str, ReleaseSpec]:
        return {spec.name: spec for spec in self.releases}

    def ordered(self) -> List[ReleaseSpec]:
        """Releases sortiert nach Code-Freeze (entspricht der ID-Reihenfolge)."""
        return sorted(self.releases, key=lambda spec: (spec.t_f, spec.id))

    @property
    def release_ids(self) -> List[int]:
        return [spec.id for spec in self.ordered()]


def validate_timeline(timeline: Timeline) -> List[str]:
    """
    Prüft alle Invarianten von ReleaseSpec und Timeline.

    Verletzungen sind Daten, keine Fehler: die Funktion wirft nie.

    Args:
        timeline: zu prüfende Timeline

    Returns:
        Liste der Verletzungen (leer, wenn alles passt). Jede Meldung nennt
        Release und verletzte Bedingung.
    """
    violations: List[str] = []
    releases = list(timeline.releases)

    if not releases:
        return ["timeline: at least one release required"]

    ids = [spec.id for spec in releases]
    if sorted(ids) != list(range(1, len(releases) + 1)):
        violations.append(f"timeline: release ids must be consecutive 1..{len(releases)}, got {ids}")

    names = [spec.name for spec in releases]
    for name in sorted({n for n in names if names.count(n) > 1}):
        violations.append(f"release {name}: duplicate release name")

    for spec in releases:
        label = f"release {spec.id} ({spec.name})"
        if not spec.t_s < spec.t_f:
            violations.append(f"{label}: t_s before t_f required")
        if not spec.t_f <= spec.t_r:
            violations.append(f"{label}: t_f not after t_r required")

    # Reihenfolge nach ID muss der Reihenfolge nach Code-Freeze entsprechen
    by_id = sorted(releases, key=lambda spec: spec.id)
    for previous, current in zip(by_id, by_id[1:]):
        label = f"release {current.id} ({current.name})"
        if current.t_f == previous.t_f:
            violations.append(f"{label}: duplicate code-freeze date")
        elif current.t_f < previous.t_f:
            violations.append(f"{label}: code-freeze dates must increase with release id")

    overlap = set(timeline.language_filter) & set(timeline.excluded_languages)
    if overlap:
        violations.append(f"timeline: languages both filtered and excluded: {sorted(overlap)}")

    return violations


def require_valid(timeline: Timeline) -> Timeline:
    """Wirft ValidationError, falls die Timeline Verletzungen hat."""
    violations = validate_timeline(timeline)
    if violations:
        raise ValidationError(f"Ungültiger Deskriptor für {timeline.project}", "; ".join(violations))
    return timeline
