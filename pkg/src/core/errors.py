"""
Error Handling - Einheitliche Fehler und Exit-Codes für Bibliothek und CLI
"""
import json
import traceback
from typing import Optional

from utils.logger import setup_logger

logger = setup_logger("errors")


class PredictorError(Exception):
    """
    Basisklasse aller fachlichen Fehler.

    Jeder Fehler wird auf der Kommandozeile als genau eine Zeile ausgegeben:
    {
        "error": {
            "code": "ERROR_CODE",
            "message": "Lesbare Nachricht",
            "details": "Technische Details (optional)"
        }
    }
    """

    error_code = "INTERNAL_ERROR"
    exit_code = 1

    def __init__(
            self,
            message: str,
            details: Optional[str] = None,
            error_code: Optional[str] = None
    ):
        self.message = message
        self.details = details
        if error_code:
            self.error_code = error_code
        super().__init__(message if not details else f"{message} ({details})")

    def to_record(self) -> dict:
        record = {
            "error": {
                "code": self.error_code,
                "message": self.message
            }
        }
        if self.details:
            record["error"]["details"] = self.details
        return record


# ===== Vordefinierte Fehler-Typen =====

class UsageError(PredictorError):
    """2 - Falscher Aufruf der Kommandozeile"""

    error_code = "USAGE_ERROR"
    exit_code = 2


class InputNotFoundError(PredictorError):
    """3 - Eingabedatei oder Verzeichnis fehlt"""

    error_code = "INPUT_NOT_FOUND"
    exit_code = 3

    def __init__(self, path, details: Optional[str] = None):
        self.path = str(path)
        super().__init__(f"Eingabe nicht gefunden: {path}", details)


class ValidationError(PredictorError):
    """4 - Ungültige Eingabe (Deskriptor, Flags, Daten)"""

    error_code = "VALIDATION_ERROR"
    exit_code = 4


class ExportFormatError(ValidationError):
    """4 - Tracker-Export ist als Ganzes nicht lesbar"""

    error_code = "EXPORT_UNPARSEABLE"

    def __init__(self, byte_offset: int, details: Optional[str] = None):
        self.byte_offset = byte_offset
        super().__init__(f"Export nicht lesbar ab Byte-Offset {byte_offset}", details)


class MissingMetricError(ValidationError):
    """4 - Metrik fehlt im Metrik-Vektor"""

    error_code = "MISSING_METRIC"

    def __init__(self, metric_id: str, release_id: Optional[int] = None):
        self.metric_id = metric_id
        where = f" (Release {release_id})" if release_id is not None else ""
        super().__init__(f"Metrik fehlt: {metric_id}{where}")


class NoTrainingDataError(ValidationError):
    """4 - Keine Trainingsdaten für das Regressionsmodell"""

    error_code = "NO_TRAINING_DATA"

    def __init__(self, details: Optional[str] = None):
        super().__init__("no training data", details)


class ExtractionError(PredictorError):
    """5 - Metrik-Extraktion fehlgeschlagen"""

    error_code = "EXTRACTION_ERROR"
    exit_code = 5


class VcsError(ExtractionError):
    """5 - git-Aufruf fehlgeschlagen"""

    error_code = "VCS_ERROR"


class ReleasePredatesRepositoryError(ExtractionError):
    """5 - Kein Commit vor dem Start des Releases"""

    error_code = "RELEASE_PREDATES_REPOSITORY"

    def __init__(self, release_name: str, details: Optional[str] = None):
        super().__init__(f"release predates repository: {release_name}", details)


class NumericError(PredictorError):
    """6 - Numerischer Fehler (Regression, Statistik)"""

    error_code = "NUMERIC_ERROR"
    exit_code = 6


class ConvergenceError(NumericError):
    """6 - NNLS nicht konvergiert"""

    error_code = "NOT_CONVERGED"


class TrackerError(PredictorError):
    """7 - Issue-Tracker nicht erreichbar oder Antwort unvollständig"""

    error_code = "TRACKER_ERROR"
    exit_code = 7


# ===== CLI Handler =====

def format_error_record(exc: BaseException) -> str:
    """Einzeilige, maschinenlesbare Fehlerzeile für stderr."""
    if isinstance(exc, PredictorError):
        record = exc.to_record()
    else:
        # Keine technischen Details von unerwarteten Fehlern nach aussen geben
        record = {
            "error": {
                "code": "INTERNAL_ERROR",
                "message": "Ein unerwarteter Fehler ist aufgetreten",
                "details": type(exc).__name__
            }
        }
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, PredictorError):
        return exc.exit_code
    return PredictorError.exit_code


def handle_cli_error(exc: BaseException, stream) -> int:
    """
    Schreibt den Fehler als eine Zeile auf stream und liefert den Exit-Code.

    Unerwartete Exceptions werden mit Stacktrace geloggt.
    """
    if isinstance(exc, PredictorError):
        logger.error(f"{exc.error_code}: {exc}")
    else:
        logger.error(f"Unerwarteter Fehler: {exc}\n{traceback.format_exc()}")
    print(format_error_record(exc), file=stream)
    return exit_code_for(exc)
