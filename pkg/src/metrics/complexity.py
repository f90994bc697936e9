"""
Complexity - Zyklomatische Komplexität pro Funktion (lizard) und neue/geänderte Funktionen

CC = 1 + Anzahl verzweigender Tokens (if, for, while, case, catch, ?, &&, ||).
Funktionen werden lexikalisch erkannt, nicht über eine Grammatik.
"""
import hashlib
import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import lizard
from pydantic import BaseModel, ConfigDict, Field

from core.config import DEFAULT_THRESHOLDS
from metrics.languages import LanguageFilter, definition, language_of, read_source, walk_tree
from metrics.loc_counter import code_lines
from utils.logger import setup_logger

logger = setup_logger("complexity")

# Sprachen, die lizard analysieren kann
LIZARD_LANGUAGES = frozenset({
    "Java", "C", "C++", "C#", "Go", "JavaScript", "TypeScript", "Scala", "Kotlin", "Python", "Ruby",
})


class FunctionRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    file_path: str
    name: str
    signature: str
    cc: int = Field(ge=1)
    body_hash: str


class ScopeComplexity(BaseModel):
    functions: int = 0
    total_cc: int = 0
    above: Dict[int, int] = Field(default_factory=dict)


class ComplexityMetrics(BaseModel):
    all: ScopeComplexity = Field(default_factory=ScopeComplexity)
    filtered: ScopeComplexity = Field(default_factory=ScopeComplexity)
    functions: Tuple[FunctionRecord, ...] = ()
    skipped_files: Tuple[str, ...] = ()


class ChangedFunctions(BaseModel):
    count: int = 0
    above: Dict[int, int] = Field(default_factory=dict)


def _normalize(text: str) -> str:
    return " ".join(text.split())


def unqualified_name(name: str) -> str:
    """Funktionsname ohne Klassen- oder Namespace-Präfix (lizard meldet je nach Version A::f oder f)."""
    return re.split(r"::|\.", name)[-1]


def function_signature(long_name: str) -> str:
    """Normalisierte Signatur ohne Präfix, z.B. "A::f( int x )" -> "f( int x )"."""
    head, paren, rest = long_name.partition("(")
    return _normalize(unqualified_name(head.strip()) + paren + rest)


def analyze_source(relative: str, text: str) -> List[FunctionRecord]:
    """
    Funktionen einer Datei mit CC und Hash des normalisierten Rumpfs.

    Raises:
        Exception: wenn lizard die Datei nicht lesen kann
    """
    analyzer = lizard.FileAnalyzer(lizard.get_extensions([]))
    info = analyzer.analyze_source_code(relative, text)
    source_lines = text.splitlines()
    language = definition(language_of(relative))

    records = []
    for function in info.function_list:
        body = "\n".join(source_lines[function.start_line - 1:function.end_line])
        normalized = "\n".join(code_lines(body, language))
        records.append(FunctionRecord(
            file_path=relative,
            name=unqualified_name(function.name),
            signature=function_signature(function.long_name),
            cc=max(int(function.cyclomatic_complexity), 1),
            body_hash=hashlib.sha256(normalized.encode("utf-8")).hexdigest(),
        ))
    return records


def _summarize(records: Iterable[FunctionRecord], thresholds: Sequence[int]) -> ScopeComplexity:
    records = list(records)
    return ScopeComplexity(
        functions=len(records),
        total_cc=sum(r.cc for r in records),
        above={t: sum(1 for r in records if r.cc > t) for t in thresholds},
    )


def complexity_metrics(
        snapshot,
        language_filter: LanguageFilter,
        thresholds: Sequence[int] = DEFAULT_THRESHOLDS,
        workers: int = 1
) -> ComplexityMetrics:
    """
    Komplexität aller analysierbaren Dateien eines Snapshots.

    Scope all umfasst jede nicht ausgeschlossene Sprache, die lizard kennt,
    Scope filtered nur die gefilterten Sprachen.

    Args:
        snapshot: Verzeichnis des Code-Stands
        language_filter: gefilterte und ausgeschlossene Sprachen
        thresholds: CC-Schwellen (gezählt wird cc > Schwelle)
        workers: Threads für die Analyse

    Returns:
        ComplexityMetrics mit Funktionsliste und übersprungenen Dateien
    """
    root = Path(snapshot)
    candidates = [
        relative for relative in walk_tree(root)
        if language_of(relative) in LIZARD_LANGUAGES and language_filter.in_all(language_of(relative))
    ]

    def analyze(relative: str) -> Tuple[str, Optional[List[FunctionRecord]]]:
        text = read_source(root / relative)
        if text is None:
            return relative, None
        try:
            return relative, analyze_source(relative, text)
        except Exception as e:
            logger.warning(f"Komplexität nicht bestimmbar für {relative}: {e}")
            return relative, None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(analyze, candidates))
    else:
        results = [analyze(relative) for relative in candidates]

    functions: List[FunctionRecord] = []
    skipped: List[str] = []
    for relative, records in results:
        if records is None:
            skipped.append(relative)
        else:
            functions.extend(records)

    filtered = [r for r in functions if language_filter.in_filtered(language_of(r.file_path))]
    return ComplexityMetrics(
        all=_summarize(functions, thresholds),
        filtered=_summarize(filtered, thresholds),
        functions=tuple(functions),
        skipped_files=tuple(skipped),
    )


def changed_function_metrics(
        old: Iterable[FunctionRecord],
        new: Iterable[FunctionRecord],
        thresholds: Sequence[int] = DEFAULT_THRESHOLDS
) -> ChangedFunctions:
    """
    Neue und geänderte Funktionen, gepaart über (file_path, signature).

    Nicht im alten Stand -> neu; gleicher Schlüssel mit anderem Rumpf-Hash -> geändert.
    """
    old_hashes: Dict[Tuple[str, str], str] = {}
    for record in old:
        old_hashes[(record.file_path, record.signature)] = record.body_hash

    changed = [
        record for record in new
        if old_hashes.get((record.file_path, record.signature)) != record.body_hash
    ]
    return ChangedFunctions(
        count=len(changed),
        above={t: sum(1 for r in changed if r.cc > t) for t in thresholds},
    )
