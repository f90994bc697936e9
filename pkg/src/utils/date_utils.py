"""
Date Utilities - Gemeinsame Funktionen für Kalenderdaten und Zeitstempel

Alle Datumsangaben im Projekt sind Kalendertage in UTC. Wird ein Datum als
Obergrenze verwendet, gilt das Tagesende (23:59:59.999999 UTC).

Diese Funktionen werden von mehreren Modulen verwendet:
- tracker (Zeitstempel aus Jira-Exporten)
- metrics (Commit-Fenster zwischen t_s und t_f)
- model (Deskriptor-Daten)
"""
import re
from datetime import date, datetime, time, timedelta, timezone
from typing import Optional, Union

# Reihenfolge ist wichtig: spezifische Formate zuerst
_TIMESTAMP_FORMATS = [
    "%Y-%m-%dT%H:%M:%S.%f%z",   # Jira REST: 2020-08-25T14:27:21.000+0000
    "%Y-%m-%dT%H:%M:%S%z",
    "%Y-%m-%dT%H:%M:%S.%f",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S.%f",
    "%Y-%m-%d %H:%M:%S",        # Tabellen-Export: 2020-08-25 14:27:21
    "%Y-%m-%d %H:%M",
    "%d/%b/%y %I:%M %p",        # Jira CSV: 25/Aug/20 2:27 PM
    "%d/%b/%Y %I:%M %p",
    "%d/%b/%y %H:%M",
    "%Y-%m-%d",
]


def start_of_day(day: date) -> datetime:
    """
    Beginn eines Kalendertages in UTC.

    Example:
        >>> start_of_day(date(2020, 8, 25)).isoformat()
        '2020-08-25T00:00:00+00:00'
    """
    return datetime.combine(day, time.min, tzinfo=timezone.utc)


def end_of_day(day: date) -> datetime:
    """
    Ende eines Kalendertages in UTC (für Obergrenzen).

    Example:
        >>> end_of_day(date(2020, 8, 25)).isoformat()
        '2020-08-25T23:59:59.999999+00:00'
    """
    return datetime.combine(day, time.max, tzinfo=timezone.utc)


def to_utc(value: datetime) -> datetime:
    """Naive Zeitstempel gelten als UTC, alle anderen werden nach UTC konvertiert."""
    if value.tzinfo is None:
        return value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


def parse_timestamp(raw: Union[str, datetime, None]) -> Optional[datetime]:
    """
    Parsed einen Tracker-Zeitstempel nach UTC.

    Args:
        raw: Zeitstempel als String (verschiedene Jira-Formate) oder datetime

    Returns:
        Zeitstempel in UTC oder None, wenn leer bzw. nicht lesbar
    """
    if raw is None:
        return None
    if isinstance(raw, datetime):
        return to_utc(raw)

    text = str(raw).strip().strip("'\"")
    if not text or text.lower() in ("none", "null"):
        return None

    # "+0000" ohne Doppelpunkt versteht strptime, "Z" nicht
    text = re.sub(r"Z$", "+0000", text)

    for fmt in _TIMESTAMP_FORMATS:
        try:
            return to_utc(datetime.strptime(text, fmt))
        except ValueError:
            continue

    try:
        return to_utc(datetime.fromisoformat(text))
    except ValueError:
        return None


def parse_date(raw: Union[str, date, datetime]) -> date:
    """
    Parsed ein Kalenderdatum (YYYY-MM-DD).

    Raises:
        ValueError: wenn das Datum nicht lesbar ist
    """
    if isinstance(raw, datetime):
        return to_utc(raw).date()
    if isinstance(raw, date):
        return raw
    return date.fromisoformat(str(raw).strip())


def hours_between(start: datetime, end: datetime) -> float:
    """Dauer zwischen zwei Zeitstempeln in Stunden."""
    return (end - start) / timedelta(hours=1)
