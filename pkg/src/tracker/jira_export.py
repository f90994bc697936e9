"""
Jira Export Parser - Liest Tracker-Exporte (JSON oder CSV) und filtert Issues vom Typ Bug

Der Tracker führt viele Issue-Typen ("Bug", "Milestone", "Improvement",
"Project Plan", ...). Für die Bug-Historie zählen nur die Bugs; alle
anderen Issues werden gezählt und gemeldet, aber nicht zurückgegeben.
"""
import csv
import io
import json
import re
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import BinaryIO, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, ValidationError as PydanticValidationError

from core.errors import ExportFormatError, ValidationError
from model.bugs import BugRecord, status_from_tracker
from utils.date_utils import hours_between, parse_timestamp
from utils.logger import setup_logger

logger = setup_logger("jira_export")

DEFAULT_BUG_TYPES = frozenset({"Bug"})


class ExportFormat(str, Enum):
    TRACKER_JSON = "tracker_json"
    TRACKER_CSV = "tracker_csv"


class RawIssue(BaseModel):
    """Ein Tracker-Issue beliebigen Typs, Felder flach als Strings"""

    model_config = ConfigDict(frozen=True)

    key: str
    issue_type: str
    fields: Dict[str, str]
    affected_versions: Tuple[str, ...] = ()
    created: datetime


class ExportParseResult(BaseModel):
    """Ergebnis von parse_bug_export: Bugs plus Zähler und Warnungen"""

    model_config = ConfigDict(frozen=True)

    bugs: Tuple[BugRecord, ...] = ()
    issue_count: int = 0
    non_bug_count: int = 0
    warnings: Tuple[str, ...] = ()


def infer_export_format(path: Union[str, Path], declared: Optional[str] = None) -> ExportFormat:
    """Format aus Deskriptor/Flag oder aus der Dateiendung."""
    if declared:
        try:
            return ExportFormat(declared)
        except ValueError:
            raise ValidationError(f"Unbekanntes Export-Format: {declared}")
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return ExportFormat.TRACKER_CSV
    return ExportFormat.TRACKER_JSON


def issue_sort_key(key: str) -> Tuple[str, int, str]:
    """AAF-2 vor AAF-10: Präfix alphabetisch, Nummer numerisch."""
    match = re.match(r"^(.*?)-(\d+)$", key)
    if match:
        return match.group(1), int(match.group(2)), key
    return key, -1, key


def _named(value) -> str:
    """Jira liefert viele Felder als {"name": ...}-Objekte."""
    if value is None:
        return ""
    if isinstance(value, dict):
        return str(value.get("name") or value.get("key") or value.get("value") or "")
    return str(value)


# ===== JSON =====

def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        raise ExportFormatError(e.start, "kein gültiges UTF-8")


def _raw_issues_from_json(text: str, warnings: List[str]) -> List[RawIssue]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        offset = len(text[:e.pos].encode("utf-8"))
        raise ExportFormatError(offset, e.msg)

    if isinstance(document, dict) and isinstance(document.get("issues"), list):
        records = document["issues"]
    elif isinstance(document, list):
        records = document
    else:
        raise ExportFormatError(0, "erwartet Array von Issues oder Objekt mit 'issues'")

    issues: List[RawIssue] = []
    for index, record in enumerate(records):
        try:
            issues.append(_raw_issue_from_json_record(record))
        except (KeyError, TypeError, ValueError) as e:
            message = f"record {index}: malformed issue skipped ({e})"
            logger.warning(message)
            warnings.append(message)
    return issues


def _raw_issue_from_json_record(record) -> RawIssue:
    if not isinstance(record, dict):
        raise TypeError("Issue ist kein Objekt")
    fields = record.get("fields")
    if not isinstance(fields, dict):
        raise KeyError("fields")

    key = str(record.get("key") or "").strip()
    if not key:
        raise KeyError("key")

    issue_type = _named(fields.get("issuetype")).strip()
    if not issue_type:
        raise ValueError("issuetype leer")

    created = parse_timestamp(fields.get("created"))
    if created is None:
        raise ValueError(f"created nicht lesbar: {fields.get('created')!r}")

    versions = fields.get("versions") or []
    affected = tuple(_named(v).strip() for v in versions if _named(v).strip())

    project = _named(fields.get("project")) or key.split("-")[0]
    resolution = fields.get("resolution")
    flat = {
        "project": project,
        "status": _named(fields.get("status")),
        "priority": _named(fields.get("priority")),
        "resolution": _named(resolution) if resolution is not None else "Unresolved",
        "resolved": str(fields.get("resolutiondate") or ""),
        "created": str(fields.get("created")),
    }
    return RawIssue(key=key, issue_type=issue_type, fields=flat, affected_versions=affected, created=created)


# ===== CSV =====

_CSV_COLUMNS = {
    "key": ("issue key", "key"),
    "issue_type": ("issue type", "issuetype", "type"),
    "created": ("created", "create date"),
    "resolved": ("resolved", "resolutiondate", "resolved date"),
    "status": ("status",),
    "priority": ("priority",),
    "resolution": ("resolution",),
    "project": ("project key", "project", "sub-project name"),
    "affected": ("affects version/s", "affected releases", "affects versions", "versions"),
}


def _column_index(header: Sequence[str]) -> Dict[str, List[int]]:
    normalized = [h.strip().lower() for h in header]
    index: Dict[str, List[int]] = {}
    for name, aliases in _CSV_COLUMNS.items():
        # Jira wiederholt "Affects Version/s" für jede Version
        index[name] = [i for i, h in enumerate(normalized) if h in aliases]
    return index


def _raw_issues_from_csv(text: str, warnings: List[str]) -> List[RawIssue]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return []
    except csv.Error as e:
        raise ExportFormatError(0, f"Header nicht lesbar: {e}")

    columns = _column_index(header)
    for required in ("key", "issue_type", "created"):
        if not columns[required]:
            raise ExportFormatError(0, f"Pflichtspalte fehlt: {required}")

    def cell(row: Sequence[str], name: str) -> str:
        for i in columns[name]:
            if i < len(row) and row[i].strip():
                return row[i].strip()
        return ""

    issues: List[RawIssue] = []
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as e:
            message = f"line {reader.line_num}: malformed row skipped ({e})"
            logger.warning(message)
            warnings.append(message)
            continue

        if not any(value.strip() for value in row):
            continue
        try:
            key = cell(row, "key")
            if not key:
                raise KeyError("key")
            issue_type = cell(row, "issue_type")
            if not issue_type:
                raise ValueError("issue type leer")
            created = parse_timestamp(cell(row, "created"))
            if created is None:
                raise ValueError(f"created nicht lesbar: {cell(row, 'created')!r}")

            affected: List[str] = []
            for i in columns["affected"]:
                if i < len(row):
                    # Auch "Frankfurt, Guilin" in einer Zelle zulassen
                    affected.extend(part.strip() for part in row[i].split(",") if part.strip())

            flat = {
                "project": cell(row, "project") or key.split("-")[0],
                "status": cell(row, "status"),
                "priority": cell(row, "priority"),
                "resolution": cell(row, "resolution") or "Unresolved",
                "resolved": cell(row, "resolved"),
                "created": cell(row, "created"),
            }
            issues.append(RawIssue(
                key=key, issue_type=issue_type, fields=flat,
                affected_versions=tuple(affected), created=created))
        except (KeyError, ValueError) as e:
            message = f"line {reader.line_num}: malformed issue skipped ({e})"
            logger.warning(message)
            warnings.append(message)
    return issues


# ===== Mapping auf BugRecord =====

def _first_affected(affected: Sequence[str], release_order: Optional[Sequence[str]]) -> Optional[str]:
    if not affected:
        return None
    if release_order:
        position = {name: i for i, name in enumerate(release_order)}
        known = [name for name in affected if name in position]
        if known:
            return min(known, key=lambda name: position[name])
    return affected[0]


def to_bug_record(raw: RawIssue, release_order: Optional[Sequence[str]] = None,
                  warnings: Optional[List[str]] = None) -> BugRecord:
    """
    Bildet ein RawIssue auf einen BugRecord ab.

    Ein unlesbares oder vor "created" liegendes Resolved-Datum wird als
    fehlend behandelt (mit Warnung), der Bug selbst bleibt erhalten.
    """
    resolved = parse_timestamp(raw.fields.get("resolved"))
    if raw.fields.get("resolved") and resolved is None:
        message = f"{raw.key}: resolved date unreadable, treated as absent"
        logger.warning(message)
        if warnings is not None:
            warnings.append(message)
    if resolved is not None and resolved < raw.created:
        message = f"{raw.key}: resolved before created, treated as absent"
        logger.warning(message)
        if warnings is not None:
            warnings.append(message)
        resolved = None

    return BugRecord(
        key=raw.key,
        subproject=raw.fields.get("project", ""),
        status=status_from_tracker(raw.fields.get("status")),
        priority=raw.fields.get("priority", ""),
        affected_releases=raw.affected_versions,
        first_affected=_first_affected(raw.affected_versions, release_order),
        resolution=raw.fields.get("resolution", ""),
        created=raw.created,
        resolved=resolved,
        time_to_solve=hours_between(raw.created, resolved) if resolved is not None else None,
    )


def parse_bug_export(
        stream: Union[bytes, BinaryIO],
        export_format: Union[ExportFormat, str] = ExportFormat.TRACKER_JSON,
        bug_types: Iterable[str] = DEFAULT_BUG_TYPES,
        release_order: Optional[Sequence[str]] = None
) -> ExportParseResult:
    """
    Parsed einen Tracker-Export und liefert nur die Bugs.

    Args:
        stream: kompletter Export als Bytes oder Binär-Stream
        export_format: tracker_json (Array von Issues mit "fields") oder tracker_csv
        bug_types: Issue-Typen, die als Bug zählen (Vergleich ohne Groß/Klein)
        release_order: Release-Namen in Timeline-Reihenfolge, für first_affected

    Returns:
        ExportParseResult mit Bugs (sortiert nach Key), Zählern und Warnungen

    Raises:
        ExportFormatError: wenn der Stream als Ganzes nicht lesbar ist
    """
    data = stream if isinstance(stream, (bytes, bytearray)) else stream.read()
    export_format = ExportFormat(export_format)
    text = _decode(bytes(data))

    if not text.strip():
        return ExportParseResult()

    warnings: List[str] = []
    if export_format == ExportFormat.TRACKER_JSON:
        issues = _raw_issues_from_json(text, warnings)
    else:
        issues = _raw_issues_from_csv(text, warnings)

    wanted = {t.strip().lower() for t in bug_types}
    bugs: List[BugRecord] = []
    non_bug_count = 0
    for raw in issues:
        if raw.issue_type.strip().lower() not in wanted:
            non_bug_count += 1
            continue
        try:
            bugs.append(to_bug_record(raw, release_order, warnings))
        except PydanticValidationError as e:
            message = f"{raw.key}: malformed bug skipped ({e.errors()[0].get('msg')})"
            logger.warning(message)
            warnings.append(message)

    bugs.sort(key=lambda bug: issue_sort_key(bug.key))
    logger.info(f"Export gelesen: {len(issues)} Issues, {len(bugs)} Bugs, {non_bug_count} andere Typen")
    return ExportParseResult(
        bugs=tuple(bugs),
        issue_count=len(issues),
        non_bug_count=non_bug_count,
        warnings=tuple(warnings),
    )
