"""
LoC Counter - Code-Zeilen eines Snapshots und Zeilen-Diff zwischen zwei Snapshots

Gezählt werden nur Code-Zeilen: Leerzeilen und reine Kommentarzeilen
fallen weg. Kommentare werden zeichenweise entfernt (Zeilen- und
Blockkommentare, Strings bleiben erhalten, keine verschachtelten Blöcke).
"""
import difflib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from metrics.languages import LanguageDef, LanguageFilter, definition, language_of, read_source, walk_tree
from utils.logger import setup_logger

logger = setup_logger("loc_counter")


class ScopeSize(BaseModel):
    loc: int = 0
    files: int = 0


class SizeMetrics(BaseModel):
    """Größe eines Snapshots je Scope plus LoC pro Sprache"""

    all: ScopeSize = Field(default_factory=ScopeSize)
    filtered: ScopeSize = Field(default_factory=ScopeSize)
    per_language: Dict[str, int] = Field(default_factory=dict)


class ScopeChange(BaseModel):
    new_loc: int = 0
    modified_loc: int = 0
    removed_loc: int = 0
    new_files: int = 0
    modified_files: int = 0

    def add(self, other: "ScopeChange") -> None:
        self.new_loc += other.new_loc
        self.modified_loc += other.modified_loc
        self.removed_loc += other.removed_loc
        self.new_files += other.new_files
        self.modified_files += other.modified_files


class ChangeMetrics(BaseModel):
    all: ScopeChange = Field(default_factory=ScopeChange)
    filtered: ScopeChange = Field(default_factory=ScopeChange)
    skipped_binary: List[str] = Field(default_factory=list)


# ===== Kommentare entfernen =====

def code_lines(text: str, language: Optional[LanguageDef]) -> List[str]:
    """
    Code-Zeilen eines Dateiinhalts (getrimmt, ohne Leer- und Kommentarzeilen).

    Example:
        >>> code_lines('int a; // x\\n/* y */\\n\\n', definition("Java"))
        ['int a;']
    """
    line_markers = language.line_comments if language else ()
    blocks = language.block_comments if language else ()
    quotes = language.string_quotes if language else ()

    lines: List[str] = []
    buffer: List[str] = []
    block_end: Optional[str] = None
    quote: Optional[str] = None
    in_line_comment = False
    i = 0
    n = len(text)

    while i < n:
        char = text[i]

        if char == "\n":
            lines.append("".join(buffer).strip())
            buffer = []
            in_line_comment = False
            # Strings enden am Zeilenende, außer Template-Strings
            if quote is not None and quote != "`":
                quote = None
            i += 1
            continue

        if in_line_comment:
            i += 1
            continue

        if block_end is not None:
            if text.startswith(block_end, i):
                i += len(block_end)
                block_end = None
            else:
                i += 1
            continue

        if quote is not None:
            buffer.append(char)
            if char == "\\" and i + 1 < n and text[i + 1] != "\n":
                buffer.append(text[i + 1])
                i += 2
                continue
            if char == quote:
                quote = None
            i += 1
            continue

        matched = False
        for marker in line_markers:
            if text.startswith(marker, i):
                in_line_comment = True
                i += len(marker)
                matched = True
                break
        if matched:
            continue

        for start, end in blocks:
            if text.startswith(start, i):
                block_end = end
                i += len(start)
                matched = True
                break
        if matched:
            continue

        if char in quotes:
            quote = char
        buffer.append(char)
        i += 1

    lines.append("".join(buffer).strip())
    return [line for line in lines if line]


def _file_code_lines(root: Path, relative: str) -> Optional[List[str]]:
    """Code-Zeilen einer Datei, None bei Binärdateien."""
    text = read_source(root / relative)
    if text is None:
        return None
    return code_lines(text, definition(language_of(relative)))


def _load_tree(root: Path, language_filter: LanguageFilter, workers: int = 1,
               skipped: Optional[List[str]] = None) -> Dict[str, Tuple[str, List[str]]]:
    """relativer Pfad -> (Sprache, Code-Zeilen) für alle nicht ausgeschlossenen Textdateien."""
    candidates = [
        (relative, language_of(relative))
        for relative in walk_tree(root)
        if language_filter.in_all(language_of(relative))
    ]

    def load(item):
        relative, language = item
        return relative, language, _file_code_lines(root, relative)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            loaded = list(pool.map(load, candidates))
    else:
        loaded = [load(item) for item in candidates]

    tree: Dict[str, Tuple[str, List[str]]] = {}
    for relative, language, lines in loaded:
        if lines is None:
            logger.warning(f"Binärdatei übersprungen: {relative}")
            if skipped is not None:
                skipped.append(relative)
            continue
        tree[relative] = (language, lines)
    return tree


# ===== Größe =====

def count_lines(snapshot, language_filter: LanguageFilter, workers: int = 1) -> SizeMetrics:
    """
    Zählt Code-Zeilen und Dateien eines Snapshots.

    Args:
        snapshot: Verzeichnis des Code-Stands
        language_filter: gefilterte und ausgeschlossene Sprachen
        workers: Threads für das Einlesen der Dateien

    Returns:
        SizeMetrics für die Scopes all und filtered
    """
    tree = _load_tree(Path(snapshot), language_filter, workers)
    metrics = SizeMetrics()
    per_language: Dict[str, int] = {}
    for relative in sorted(tree):
        language, lines = tree[relative]
        per_language[language] = per_language.get(language, 0) + len(lines)
        metrics.all.loc += len(lines)
        metrics.all.files += 1
        if language_filter.in_filtered(language):
            metrics.filtered.loc += len(lines)
            metrics.filtered.files += 1
    metrics.per_language = dict(sorted(per_language.items()))
    return metrics


# ===== Diff =====

def diff_lines(old: List[str], new: List[str]) -> ScopeChange:
    """
    Zeilen-Diff zweier Code-Zeilen-Listen.

    Gepaarte Änderungen in einem Hunk zählen einmal als modified,
    überzählige Zeilen als new bzw. removed.
    """
    change = ScopeChange()
    matcher = difflib.SequenceMatcher(a=old, b=new, autojunk=False)
    for tag, i1, i2, j1, j2 in matcher.get_opcodes():
        removed = i2 - i1
        added = j2 - j1
        if tag == "replace":
            paired = min(removed, added)
            change.modified_loc += paired
            change.new_loc += added - paired
            change.removed_loc += removed - paired
        elif tag == "insert":
            change.new_loc += added
        elif tag == "delete":
            change.removed_loc += removed
    return change


def _file_change(old_lines: Optional[List[str]], new_lines: Optional[List[str]]) -> ScopeChange:
    if old_lines is None:
        return ScopeChange(new_loc=len(new_lines), new_files=1)
    if new_lines is None:
        return ScopeChange(removed_loc=len(old_lines))
    if old_lines == new_lines:
        return ScopeChange()
    change = diff_lines(old_lines, new_lines)
    change.modified_files = 1
    return change


def diff_metrics(old, new, language_filter: LanguageFilter, workers: int = 1) -> ChangeMetrics:
    """
    Änderungen zwischen zwei Snapshots, Dateien per relativem Pfad gepaart.

    Args:
        old: Verzeichnis des alten Stands (vor t_s)
        new: Verzeichnis des neuen Stands (t_f)
        language_filter: gefilterte und ausgeschlossene Sprachen
        workers: Threads für Einlesen und Diff

    Returns:
        ChangeMetrics für die Scopes all und filtered
    """
    skipped: List[str] = []
    old_tree = _load_tree(Path(old), language_filter, workers, skipped)
    new_tree = _load_tree(Path(new), language_filter, workers, skipped)
    paths = sorted(set(old_tree) | set(new_tree))

    def compare(relative: str) -> Tuple[str, ScopeChange]:
        old_entry = old_tree.get(relative)
        new_entry = new_tree.get(relative)
        language = (new_entry or old_entry)[0]
        change = _file_change(old_entry[1] if old_entry else None, new_entry[1] if new_entry else None)
        return language, change

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(compare, paths))
    else:
        results = [compare(relative) for relative in paths]

    metrics = ChangeMetrics(skipped_binary=sorted(set(skipped)))
    for language, change in results:
        metrics.all.add(change)
        if language_filter.in_filtered(language):
            metrics.filtered.add(change)
    return metrics
