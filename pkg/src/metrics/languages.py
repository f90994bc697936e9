"""
Sprachen - Dateiendungen, Kommentar-Syntax und der Sprachfilter eines Projekts
"""
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from utils.logger import setup_logger

logger = setup_logger("languages")

OTHER = "other"
_BINARY_PROBE_BYTES = 8192
_SKIPPED_DIRS = {".git", ".hg", ".svn"}


class LanguageDef(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    extensions: Tuple[str, ...]
    line_comments: Tuple[str, ...] = ()
    block_comments: Tuple[Tuple[str, str], ...] = ()
    string_quotes: Tuple[str, ...] = ('"', "'")


_C_STYLE = dict(line_comments=("//",), block_comments=(("/*", "*/"),))
_HASH_STYLE = dict(line_comments=("#",))

LANGUAGES: Tuple[LanguageDef, ...] = (
    LanguageDef(name="Java", extensions=(".java",), **_C_STYLE),
    LanguageDef(name="C", extensions=(".c", ".h"), **_C_STYLE),
    LanguageDef(name="C++", extensions=(".cpp", ".cc", ".cxx", ".hpp", ".hh", ".hxx"), **_C_STYLE),
    LanguageDef(name="C#", extensions=(".cs",), **_C_STYLE),
    LanguageDef(name="Go", extensions=(".go",), **_C_STYLE, string_quotes=('"', "'", "`")),
    LanguageDef(name="JavaScript", extensions=(".js", ".jsx", ".mjs"), **_C_STYLE,
                string_quotes=('"', "'", "`")),
    LanguageDef(name="TypeScript", extensions=(".ts", ".tsx"), **_C_STYLE, string_quotes=('"', "'", "`")),
    LanguageDef(name="Scala", extensions=(".scala",), **_C_STYLE),
    LanguageDef(name="Kotlin", extensions=(".kt", ".kts"), **_C_STYLE),
    LanguageDef(name="Python", extensions=(".py",), **_HASH_STYLE),
    LanguageDef(name="Shell", extensions=(".sh", ".bash"), **_HASH_STYLE),
    LanguageDef(name="Ruby", extensions=(".rb",), **_HASH_STYLE),
    LanguageDef(name="YAML", extensions=(".yaml", ".yml"), **_HASH_STYLE),
    LanguageDef(name="XML", extensions=(".xml", ".xsd", ".wsdl"), block_comments=(("<!--", "-->"),),
                string_quotes=()),
    LanguageDef(name="JSON", extensions=(".json",), string_quotes=('"',)),
    LanguageDef(name="SQL", extensions=(".sql",), line_comments=("--",), block_comments=(("/*", "*/"),),
                string_quotes=("'",)),
)

_BY_EXTENSION: Dict[str, LanguageDef] = {ext: lang for lang in LANGUAGES for ext in lang.extensions}
_BY_NAME: Dict[str, LanguageDef] = {lang.name: lang for lang in LANGUAGES}


def language_of(path) -> str:
    """Sprache anhand der Dateiendung, unbekannt -> "other"."""
    lang = _BY_EXTENSION.get(Path(path).suffix.lower())
    return lang.name if lang else OTHER


def definition(name: str) -> Optional[LanguageDef]:
    return _BY_NAME.get(name)


class LanguageFilter(BaseModel):
    """
    Gefilterte Sprachen (Scope filtered-language-only) und ausgeschlossene Sprachen.

    Ausgeschlossene Sprachen fehlen in beiden Scopes, "other" zählt nur
    im Scope all.
    """

    model_config = ConfigDict(frozen=True)

    filtered: FrozenSet[str] = frozenset({"Java"})
    excluded: FrozenSet[str] = frozenset({"YAML", "XML"})

    @classmethod
    def of(cls, filtered: Iterable[str], excluded: Iterable[str]) -> "LanguageFilter":
        return cls(filtered=frozenset(filtered), excluded=frozenset(excluded))

    def in_all(self, language: str) -> bool:
        return language not in self.excluded

    def in_filtered(self, language: str) -> bool:
        return language in self.filtered and language not in self.excluded

    def cache_token(self) -> str:
        return f"filter={','.join(sorted(self.filtered))};excluded={','.join(sorted(self.excluded))}"


def walk_tree(root) -> List[str]:
    """Alle Dateien unter root als relative POSIX-Pfade, sortiert, ohne VCS-Verzeichnisse."""
    root = Path(root)
    if not root.is_dir():
        return []
    files: List[str] = []
    for path in root.rglob("*"):
        relative = path.relative_to(root)
        if any(part in _SKIPPED_DIRS for part in relative.parts):
            continue
        if path.is_file() and not path.is_symlink():
            files.append(relative.as_posix())
    return sorted(files)


def read_source(path) -> Optional[str]:
    """
    Liest eine Quelltext-Datei.

    Returns:
        Inhalt als Text, None für Binärdateien (NUL-Byte im Dateianfang)
    """
    data = Path(path).read_bytes()
    if b"\x00" in data[:_BINARY_PROBE_BYTES]:
        return None
    return data.decode("utf-8", errors="replace")
