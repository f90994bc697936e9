"""
Konfiguration - .env Defaults und validierte Laufzeit-Konfiguration der CLI
"""
import os
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, model_validator

from core.errors import ValidationError

# Lade .env aus dem Projekt-Root (src/core/config.py -> src/ -> projekt-root/)
PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent
load_dotenv(PROJECT_ROOT / ".env")

DEFAULT_OUT_DIR = os.getenv("PREDICTOR_OUT_DIR", "output")
DEFAULT_CACHE_DIR = os.getenv("PREDICTOR_CACHE_DIR", ".metric_cache")
DEFAULT_WORKERS = int(os.getenv("PREDICTOR_WORKERS", "1"))
DEFAULT_GRACE_DAYS = 14
DEFAULT_MIN_PCC = 0.7
DEFAULT_MAX_METRICS = 5
DEFAULT_THRESHOLDS = (10, 15, 20)

TRACKER_TOKEN = os.getenv("TRACKER_TOKEN")
TRACKER_MAX_RETRIES = int(os.getenv("TRACKER_MAX_RETRIES", "4"))
TRACKER_BACKOFF_SECONDS = float(os.getenv("TRACKER_BACKOFF_SECONDS", "1.0"))
GIT_BINARY = os.getenv("GIT_BINARY")


class RunConfig(BaseModel):
    """Aufgelöste Flag-Werte eines CLI-Aufrufs"""

    model_config = ConfigDict(frozen=True)

    project: Optional[Path] = None
    out_dir: Path = Path(DEFAULT_OUT_DIR)
    cache_dir: Path = Path(DEFAULT_CACHE_DIR)
    grace_days: int = Field(DEFAULT_GRACE_DAYS, ge=0)
    min_pcc: float = Field(DEFAULT_MIN_PCC, ge=0.0, le=1.0)
    max_metrics: int = Field(DEFAULT_MAX_METRICS, ge=1)
    require_positive: bool = True
    with_intercept: bool = False
    nonneg: bool = True
    windows: List[int] = Field(default_factory=list)
    source: Optional[Path] = None
    workers: int = Field(DEFAULT_WORKERS, ge=1)

    @model_validator(mode="after")
    def _check_ranges(self) -> "RunConfig":
        if self.out_dir.resolve() == self.cache_dir.resolve():
            raise ValueError("Output- und Cache-Verzeichnis müssen verschieden sein")
        if any(w < 1 for w in self.windows):
            raise ValueError("Fenstergrößen müssen >= 1 sein")
        return self


def build_run_config(**values) -> RunConfig:
    """
    Baut eine RunConfig und übersetzt pydantic-Fehler in ValidationError.

    None-Werte werden ignoriert, damit die Defaults greifen.
    """
    cleaned = {key: value for key, value in values.items() if value is not None}
    try:
        return RunConfig(**cleaned)
    except PydanticValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ())) or "config"
        raise ValidationError("Ungültige Konfiguration", f"{location}: {first.get('msg')}")
