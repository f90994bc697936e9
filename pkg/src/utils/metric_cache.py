"""
Metric Cache - Inhaltsadressierter Cache für extrahierte Metrik-Vektoren

Aufbau:
    <cache_dir>/metadata.json
    <cache_dir>/entries/<2 Zeichen>/<sha256>.json

Jeder Eintrag trägt einen Digest seiner Werte. Unlesbare oder manipulierte
Einträge werden mit Warnung verworfen und neu berechnet.
"""
import hashlib
import json
import os
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Dict, Iterable, Optional

from utils.logger import setup_logger

logger = setup_logger("metric_cache")


def cache_key(*parts: object) -> str:
    """sha256 über die Schlüsselteile (Reihenfolge zählt)."""
    text = "\x1e".join(str(part) for part in parts)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _digest(values: Dict[str, float]) -> str:
    canonical = json.dumps(values, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class MetricCache:
    """Verwaltet das Cache-Verzeichnis"""

    def __init__(self, cache_dir):
        """
        Args:
            cache_dir: Basis-Verzeichnis des Caches (wird angelegt)
        """
        self.cache_dir = Path(cache_dir)
        self.entries_dir = self.cache_dir / "entries"
        self.entries_dir.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

        metadata_path = self.cache_dir / "metadata.json"
        if not metadata_path.exists():
            self._write_json(metadata_path, {
                "created_at": datetime.now().isoformat(),
                "format": 1,
            })
        logger.debug(f"Metric Cache: {self.cache_dir.resolve()}")

    def _entry_path(self, key: str) -> Path:
        return self.entries_dir / key[:2] / f"{key}.json"

    @staticmethod
    def _write_json(path: Path, data: dict) -> None:
        """Atomar schreiben: erst temporäre Datei, dann umbenennen."""
        path.parent.mkdir(parents=True, exist_ok=True)
        handle, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(handle, 'w', encoding='utf-8') as f:
                json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True)
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise

    def get(self, key: str) -> Optional[Dict[str, float]]:
        """
        Liest einen Eintrag.

        Returns:
            Metrik-Werte oder None (fehlt oder korrupt)
        """
        path = self._entry_path(key)
        if not path.exists():
            self.misses += 1
            return None

        try:
            with open(path, 'r', encoding='utf-8') as f:
                entry = json.load(f)
            values = {str(k): float(v) for k, v in entry["values"].items()}
            if entry.get("key") != key or entry.get("digest") != _digest(values):
                raise ValueError("Digest stimmt nicht")
        except (OSError, ValueError, KeyError, TypeError, AttributeError) as e:
            logger.warning(f"Cache-Eintrag {key[:12]} korrupt, wird neu berechnet ({e})")
            path.unlink(missing_ok=True)
            self.misses += 1
            return None

        self.hits += 1
        logger.info(f"Cache-Treffer {key[:12]}")
        return values

    def put(self, key: str, values: Dict[str, float], context: Optional[Dict[str, str]] = None) -> Path:
        """Speichert einen vollständigen Metrik-Satz."""
        path = self._entry_path(key)
        self._write_json(path, {
            "key": key,
            "values": values,
            "digest": _digest(values),
            "context": context or {},
        })
        logger.debug(f"Cache-Eintrag geschrieben: {path.name}")
        return path

    def keys(self) -> Iterable[str]:
        return sorted(p.stem for p in self.entries_dir.glob("*/*.json"))
