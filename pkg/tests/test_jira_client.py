import json

import pytest
import requests

from core.errors import TrackerError, ValidationError
from tracker.jira_client import JiraClient, fetch_issues
from tracker.jira_export import parse_bug_export


class FakeResponse:

    def __init__(self, status_code=200, payload=None, text=None):
        self.status_code = status_code
        self._payload = payload
        self._text = text

    def json(self):
        if self._text is not None:
            return json.loads(self._text)
        return self._payload


class FakeSession:
    """Liefert vorbereitete Antworten der Reihe nach und merkt sich die Parameter."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def get(self, url, params=None, headers=None, timeout=None):
        self.calls.append({"url": url, "params": dict(params), "headers": dict(headers)})
        response = self.responses.pop(0)
        if isinstance(response, Exception):
            raise response
        return response


def _issue(number, issue_type="Bug"):
    return {"key": f"ONAP-{number}", "fields": {
        "issuetype": {"name": issue_type},
        "created": "2021-01-01T10:00:00.000+0000",
        "versions": [{"name": "Honolulu"}],
    }}


def _page(issues, total, max_results=None):
    payload = {"issues": issues, "total": total, "startAt": 0}
    if max_results is not None:
        payload["maxResults"] = max_results
    return FakeResponse(payload=payload)


ENDPOINT = "https://jira.example.org/rest/api/2/search"


class TestFetchIssues:

    def test_pages_are_concatenated_and_sorted(self):
        session = FakeSession([
            _page([_issue(3), _issue(1)], 5),
            _page([_issue(10), _issue(2)], 5),
            _page([_issue(4, "Improvement")], 5),
        ])
        data = fetch_issues(ENDPOINT, "ONAP", page_size=2, session=session, token="secret")

        issues = json.loads(data)["issues"]
        assert [issue["key"] for issue in issues] == ["ONAP-1", "ONAP-2", "ONAP-3", "ONAP-4", "ONAP-10"]
        assert [call["params"]["startAt"] for call in session.calls] == [0, 2, 4]
        assert all(call["params"]["maxResults"] == 2 for call in session.calls)
        assert session.calls[0]["headers"]["Authorization"] == "Bearer secret"

        result = parse_bug_export(data)
        assert len(result.bugs) == 4
        assert result.non_bug_count == 1

    def test_output_is_deterministic(self):
        pages = lambda: [_page([_issue(2), _issue(1)], 2)]  # noqa: E731
        first = fetch_issues(ENDPOINT, "ONAP", session=FakeSession(pages()))
        second = fetch_issues(ENDPOINT, "ONAP", session=FakeSession(pages()))
        assert first == second

    def test_retries_with_exponential_backoff(self):
        delays = []
        session = FakeSession([
            FakeResponse(503),
            requests.ConnectionError("reset"),
            FakeResponse(429),
            _page([_issue(1)], 1),
        ])
        client = JiraClient(ENDPOINT, token=None, session=session, max_retries=4, backoff=0.5, sleep=delays.append)
        issues = client.search("ONAP")
        assert [issue["key"] for issue in issues] == ["ONAP-1"]
        assert delays == [0.5, 1.0, 2.0]
        assert "Authorization" not in session.calls[0]["headers"]

    def test_gives_up_after_max_retries(self):
        session = FakeSession([FakeResponse(500)] * 3)
        client = JiraClient(ENDPOINT, session=session, max_retries=2, backoff=0.0, sleep=lambda _: None)
        with pytest.raises(TrackerError) as excinfo:
            client.search("ONAP")
        assert excinfo.value.exit_code == 7
        assert len(session.calls) == 3

    def test_client_error_is_not_retried(self):
        session = FakeSession([FakeResponse(401)])
        client = JiraClient(ENDPOINT, session=session, sleep=lambda _: None)
        with pytest.raises(TrackerError):
            client.search("ONAP")
        assert len(session.calls) == 1

    def test_invalid_json_is_retried(self):
        session = FakeSession([FakeResponse(text="<html>"), _page([_issue(1)], 1)])
        client = JiraClient(ENDPOINT, session=session, sleep=lambda _: None)
        assert len(client.search("ONAP")) == 1

    def test_truncated_page(self):
        session = FakeSession([_page([_issue(1)], 5)])
        client = JiraClient(ENDPOINT, session=session, sleep=lambda _: None)
        with pytest.raises(TrackerError, match="Abgeschnittene Seite"):
            client.search("ONAP", page_size=2)

    def test_server_caps_page_size(self):
        numbers = list(range(1, 251))
        session = FakeSession([
            _page([_issue(n) for n in numbers[:100]], 250, max_results=100),
            _page([_issue(n) for n in numbers[100:200]], 250, max_results=100),
            _page([_issue(n) for n in numbers[200:]], 250, max_results=100),
        ])
        client = JiraClient(ENDPOINT, session=session, sleep=lambda _: None)
        issues = client.search("ONAP", page_size=500)
        assert len(issues) == 250
        assert [call["params"]["startAt"] for call in session.calls] == [0, 100, 200]
        assert all(call["params"]["maxResults"] == 500 for call in session.calls)

    def test_truncated_page_below_server_cap(self):
        session = FakeSession([_page([_issue(n) for n in range(1, 80)], 250, max_results=100)])
        client = JiraClient(ENDPOINT, session=session, sleep=lambda _: None)
        with pytest.raises(TrackerError, match="Abgeschnittene Seite"):
            client.search("ONAP", page_size=500)

    def test_page_without_total(self):
        session = FakeSession([FakeResponse(payload={"issues": []})])
        client = JiraClient(ENDPOINT, session=session, sleep=lambda _: None)
        with pytest.raises(TrackerError):
            client.search("ONAP")

    @pytest.mark.parametrize("key, size", [("", 10), ("ONAP", 0)])
    def test_invalid_arguments(self, key, size):
        with pytest.raises(ValidationError):
            fetch_issues(ENDPOINT, key, page_size=size, session=FakeSession([]))
