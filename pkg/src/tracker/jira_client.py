"""
Jira Client - Holt alle Issues eines Projekts über die Such-API (startAt/maxResults Paging)

Optional: normalerweise wird der Export manuell aus der Tracker-Oberfläche
geladen. Das Ergebnis ist ein tracker_json Export, den parse_bug_export liest.
"""
import json
import time
from typing import Callable, List, Optional

import requests

from core.config import TRACKER_BACKOFF_SECONDS, TRACKER_MAX_RETRIES, TRACKER_TOKEN
from core.errors import TrackerError, ValidationError
from tracker.jira_export import issue_sort_key
from utils.logger import setup_logger

logger = setup_logger("jira_client")

DEFAULT_FIELDS = "issuetype,project,status,priority,versions,resolution,created,resolutiondate"
REQUEST_TIMEOUT = 30


class JiraClient:
    """
    Kleiner Client für die Jira-Suche.

    Args:
        endpoint: vollständige URL der Such-API (z.B. https://jira.example.org/rest/api/2/search)
        token: Bearer-Token (default: TRACKER_TOKEN aus .env)
        session: requests.Session oder kompatibles Objekt (für Tests austauschbar)
        max_retries: Wiederholungen pro Seite bei HTTP-Fehlern
        backoff: Basis-Wartezeit in Sekunden, verdoppelt sich pro Versuch
    """

    def __init__(
            self,
            endpoint: str,
            token: Optional[str] = TRACKER_TOKEN,
            session=None,
            max_retries: int = TRACKER_MAX_RETRIES,
            backoff: float = TRACKER_BACKOFF_SECONDS,
            sleep: Callable[[float], None] = time.sleep
    ):
        self.endpoint = endpoint
        self.session = session or requests.Session()
        self.max_retries = max_retries
        self.backoff = backoff
        self._sleep = sleep
        self.headers = {"Accept": "application/json"}
        if token:
            self.headers["Authorization"] = f"Bearer {token}"

    def _get_page(self, params: dict) -> dict:
        """Eine Seite laden, mit exponentiellem Backoff bei Fehlern."""
        last_error = ""
        for attempt in range(self.max_retries + 1):
            if attempt:
                delay = self.backoff * (2 ** (attempt - 1))
                logger.warning(f"Versuch {attempt + 1}/{self.max_retries + 1} in {delay:.1f}s ({last_error})")
                self._sleep(delay)
            try:
                response = self.session.get(
                    self.endpoint, params=params, headers=self.headers, timeout=REQUEST_TIMEOUT)
            except requests.RequestException as e:
                last_error = f"{type(e).__name__}: {e}"
                continue

            if response.status_code == 429 or response.status_code >= 500:
                last_error = f"HTTP {response.status_code}"
                continue
            if response.status_code >= 400:
                raise TrackerError(f"Tracker lehnt Anfrage ab: HTTP {response.status_code}", self.endpoint)
            try:
                return response.json()
            except ValueError as e:
                last_error = f"keine JSON-Antwort ({e})"
                continue

        raise TrackerError(
            f"Tracker nicht erreichbar nach {self.max_retries + 1} Versuchen",
            last_error
        )

    def search(self, project_key: str, page_size: int = 100) -> List[dict]:
        """Alle Issues des Projekts, sortiert nach Issue-Key."""
        issues: List[dict] = []
        start_at = 0
        while True:
            page = self._get_page({
                "jql": f"project = \"{project_key}\" ORDER BY key ASC",
                "startAt": start_at,
                "maxResults": page_size,
                "fields": DEFAULT_FIELDS,
            })
            page_issues = page.get("issues")
            total = page.get("total")
            if not isinstance(page_issues, list) or not isinstance(total, int):
                raise TrackerError("Unvollständige Seite", f"startAt={start_at}: 'issues' oder 'total' fehlt")

            # der Server darf maxResults unter page_size kappen
            granted = page.get("maxResults")
            effective = min(page_size, granted) if isinstance(granted, int) and granted > 0 else page_size
            expected = min(effective, total - start_at)
            if len(page_issues) < expected:
                raise TrackerError(
                    "Abgeschnittene Seite",
                    f"startAt={start_at}: {len(page_issues)} statt {expected} Issues"
                )

            issues.extend(page_issues)
            start_at += len(page_issues)
            logger.debug(f"Seite geladen: {len(issues)}/{total}")
            if start_at >= total or not page_issues:
                break

        issues.sort(key=lambda issue: issue_sort_key(str(issue.get("key", ""))))
        logger.info(f"{len(issues)} Issues von {project_key} geladen")
        return issues


def fetch_issues(endpoint: str, project_key: str, page_size: int = 100, **client_options) -> bytes:
    """
    Lädt alle Issues eines Projekts als tracker_json Export.

    Args:
        endpoint: URL der Such-API
        project_key: Jira Projekt-Key (z.B. "ONAP")
        page_size: Issues pro Anfrage (> 0)
        **client_options: weitere Argumente für JiraClient (session, max_retries, ...)

    Returns:
        UTF-8 JSON-Bytes {"issues": [...]}, deterministisch nach Key sortiert
    """
    if not project_key:
        raise ValidationError("project_key darf nicht leer sein")
    if page_size < 1:
        raise ValidationError("page_size muss positiv sein", f"page_size={page_size}")

    client = JiraClient(endpoint, **client_options)
    issues = client.search(project_key, page_size)
    return json.dumps({"issues": issues}, ensure_ascii=False, sort_keys=True).encode("utf-8")
