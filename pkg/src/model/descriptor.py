"""
Projekt-Deskriptor - YAML-Datei mit allen Timeline-Feldern

Beispiel:

    schema_version: 1
    project: onap
    repository:
      location: ../repos/onap
      branch: master
    bug_export:
      location: exports/onap_bugs.json
      format: tracker_json
    tracker:
      url: https://jira.example.org
      project_key: ONAP
    languages:
      filter: [Java]
      excluded: [YAML, XML]
    releases:
      - {id: 1, name: Amsterdam, start: 2017-05-01, code_freeze: 2017-09-28, release: 2017-11-16, lts: false}
"""
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from core.errors import InputNotFoundError, ValidationError
from model.release import ReleaseSpec, Timeline
from utils.date_utils import parse_date
from utils.logger import setup_logger

logger = setup_logger("descriptor")

SCHEMA_VERSION = 1


def timeline_from_dict(data: Dict[str, Any]) -> Timeline:
    """
    Baut eine Timeline aus dem geparsten Deskriptor.

    Raises:
        ValidationError: bei fehlenden Schlüsseln oder falscher schema_version
    """
    if not isinstance(data, dict):
        raise ValidationError("Deskriptor muss ein Mapping sein")

    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(
            "Nicht unterstützte schema_version",
            f"erwartet {SCHEMA_VERSION}, gefunden {version!r}"
        )

    try:
        repository = data.get("repository") or {}
        bug_export = data.get("bug_export") or {}
        tracker = data.get("tracker") or {}
        languages = data.get("languages") or {}

        releases = tuple(
            ReleaseSpec(
                id=int(entry["id"]),
                name=str(entry["name"]),
                t_s=parse_date(entry["start"]),
                t_f=parse_date(entry["code_freeze"]),
                t_r=parse_date(entry["release"]),
                lts=bool(entry.get("lts", False)),
            )
            for entry in data.get("releases") or []
        )

        return Timeline(
            project=str(data["project"]),
            releases=releases,
            repo_location=str(repository["location"]),
            bug_export_location=str(bug_export["location"]),
            language_filter=tuple(languages.get("filter", ["Java"])),
            excluded_languages=tuple(languages.get("excluded", ["YAML", "XML"])),
            repo_branch=repository.get("branch"),
            bug_export_format=bug_export.get("format"),
            tracker_url=tracker.get("url"),
            tracker_project_key=tracker.get("project_key"),
        )
    except KeyError as e:
        raise ValidationError("Pflichtschlüssel fehlt im Deskriptor", str(e))
    except (TypeError, ValueError) as e:
        raise ValidationError("Ungültiger Wert im Deskriptor", str(e))


def timeline_to_dict(timeline: Timeline) -> Dict[str, Any]:
    """Gegenstück zu timeline_from_dict; optionale Felder nur wenn gesetzt."""
    repository: Dict[str, Any] = {"location": timeline.repo_location}
    if timeline.repo_branch is not None:
        repository["branch"] = timeline.repo_branch

    bug_export: Dict[str, Any] = {"location": timeline.bug_export_location}
    if timeline.bug_export_format is not None:
        bug_export["format"] = timeline.bug_export_format

    data: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "project": timeline.project,
        "repository": repository,
        "bug_export": bug_export,
    }
    if timeline.tracker_url is not None or timeline.tracker_project_key is not None:
        data["tracker"] = {
            "url": timeline.tracker_url,
            "project_key": timeline.tracker_project_key,
        }
    data["languages"] = {
        "filter": list(timeline.language_filter),
        "excluded": list(timeline.excluded_languages),
    }
    data["releases"] = [
        {
            "id": spec.id,
            "name": spec.name,
            "start": spec.t_s,
            "code_freeze": spec.t_f,
            "release": spec.t_r,
            "lts": spec.lts,
        }
        for spec in timeline.releases
    ]
    return data


def load_descriptor(path: Union[str, Path]) -> Timeline:
    """
    Liest einen Projekt-Deskriptor.

    Args:
        path: Pfad zur YAML-Datei

    Returns:
        Timeline (noch nicht auf Invarianten geprüft, siehe validate_timeline)
    """
    path = Path(path)
    if not path.is_file():
        raise InputNotFoundError(path)

    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ValidationError(f"Deskriptor nicht lesbar: {path}", str(e))

    timeline = timeline_from_dict(data)
    logger.debug(f"Deskriptor geladen: {path} ({len(timeline.releases)} Releases)")
    return timeline


def save_descriptor(timeline: Timeline, path: Union[str, Path]) -> Path:
    """Schreibt die Timeline als Deskriptor (deterministische Schlüssel-Reihenfolge)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(timeline_to_dict(timeline), f, sort_keys=False, allow_unicode=True)
    return path


def resolve_location(location: str, descriptor_path: Optional[Union[str, Path]]) -> str:
    """
    Relative Pfade im Deskriptor gelten relativ zum Verzeichnis des Deskriptors.
    URLs bleiben unverändert.
    """
    if "://" in location or location.startswith("git@"):
        return location
    candidate = Path(location)
    if candidate.is_absolute() or descriptor_path is None:
        return str(candidate)
    return str((Path(descriptor_path).resolve().parent / candidate).resolve())
