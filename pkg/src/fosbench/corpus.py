"""Concept-taxonomy and publication-record ingestion.

Input is line-delimited JSON (one object per line, UTF-8). The minimal
schemas are:

concepts.jsonl
    {"id": "C1", "display_name": "Art", "level": 0,
     "ancestors": [{"id": "C0"}, ...] | ["C0", ...],
     "related_concepts": [{"display_name": "..."}] | ["...", ...],
     "description": "..."}          # ancestors/related/description optional

works.jsonl
    {"id": "W1", "publication_year": 2010,
     "concepts": [{"id": "C1"}, ...] | ["C1", ...]}

Parsing is lenient by default: malformed lines are counted and skipped so
that irregular public dumps do not abort a multi-hour run. ``strict=True``
turns every skip into a hard error. Duplicate concept ids are always fatal.
"""

import json
from dataclasses import dataclass, field

__all__ = [
    "CorpusError",
    "ConceptRecord",
    "ConceptCatalog",
    "WorkRecord",
    "ParseReport",
    "parse_concepts",
    "parse_works",
    "filter_domain",
]


class CorpusError(Exception):
    """Raised for unrecoverable data problems (duplicates, cycles, bad roots)."""


@dataclass(frozen=True)
class ConceptRecord:
    field_id: str
    display_name: str
    level: int
    ancestor_ids: tuple[str, ...] = ()
    related_texts: tuple[str, ...] = ()
    description: str | None = None


@dataclass(frozen=True)
class WorkRecord:
    work_id: str
    year: int
    field_ids: frozenset[str]


@dataclass
class ParseReport:
    """Counters for one parse pass. Invariant: lines == parsed + skipped."""

    lines: int = 0
    parsed: int = 0
    skipped: int = 0
    warnings: list[str] = field(default_factory=list)

    def skip(self, message: str) -> None:
        self.skipped += 1
        self.warnings.append(message)


class ConceptCatalog:
    """Immutable id -> ConceptRecord map with ancestor-closure queries.

    The ancestor relation must be acyclic; closures are memoized, so the
    catalog is cheap to share read-only across workers.
    """

    def __init__(self, records: dict[str, ConceptRecord], parse_report: ParseReport | None = None):
        self.records: dict[str, ConceptRecord] = dict(records)
        self.root_ids: list[str] = [r.field_id for r in self.records.values() if r.level == 0]
        self.parse_report = parse_report
        self._closures: dict[str, frozenset[str]] = {}
        self._check_acyclic()

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, field_id: str) -> bool:
        return field_id in self.records

    def get(self, field_id: str) -> ConceptRecord:
        return self.records[field_id]

    def ancestor_closure(self, field_id: str) -> frozenset[str]:
        """All ancestors of ``field_id`` reachable through ancestor_ids (exclusive)."""
        cached = self._closures.get(field_id)
        if cached is not None:
            return cached
        out: set[str] = set()
        stack = list(self.records[field_id].ancestor_ids)
        while stack:
            a = stack.pop()
            if a in out or a not in self.records:
                continue
            out.add(a)
            done = self._closures.get(a)
            if done is not None:
                out |= done
            else:
                stack.extend(self.records[a].ancestor_ids)
        closure = frozenset(out)
        self._closures[field_id] = closure
        return closure

    def field_closure(self, field_ids) -> frozenset[str]:
        """Inclusive closure of a set of ids, restricted to the catalog."""
        out: set[str] = set()
        for f in field_ids:
            if f in self.records:
                out.add(f)
                out |= self.ancestor_closure(f)
        return frozenset(out)

    def validate(self) -> None:
        """Full invariant check: level-0 iff no ancestors, roots reach everything."""
        for r in self.records.values():
            if (r.level == 0) != (len(r.ancestor_ids) == 0):
                raise CorpusError(
                    f"concept {r.field_id}: level {r.level} inconsistent with "
                    f"{len(r.ancestor_ids)} ancestors"
                )
        roots = set(self.root_ids)
        for r in self.records.values():
            if r.level > 0 and not (self.ancestor_closure(r.field_id) & roots):
                raise CorpusError(f"concept {r.field_id} unreachable from any root")

    def _check_acyclic(self) -> None:
        # Iterative three-color DFS; recursion would overflow on deep taxonomies.
        WHITE, GRAY, BLACK = 0, 1, 2
        color = {fid: WHITE for fid in self.records}
        for start in self.records:
            if color[start] != WHITE:
                continue
            stack: list[tuple[str, int]] = [(start, 0)]
            color[start] = GRAY
            while stack:
                node, i = stack[-1]
                parents = [a for a in self.records[node].ancestor_ids if a in self.records]
                if i < len(parents):
                    stack[-1] = (node, i + 1)
                    nxt = parents[i]
                    if color[nxt] == GRAY:
                        raise CorpusError(f"ancestor cycle through {nxt}")
                    if color[nxt] == WHITE:
                        color[nxt] = GRAY
                        stack.append((nxt, 0))
                else:
                    color[node] = BLACK
                    stack.pop()


def _as_id_list(value) -> list[str]:
    """Accept ["C1", ...] or [{"id": "C1"}, ...]."""
    out = []
    for item in value:
        if isinstance(item, str):
            out.append(item)
        elif isinstance(item, dict) and isinstance(item.get("id"), str):
            out.append(item["id"])
        else:
            raise ValueError(f"unusable id entry: {item!r}")
    return out


def _as_text_list(value) -> list[str]:
    """Accept ["text", ...] or [{"display_name": "text"}, ...]."""
    out = []
    for item in value:
        if isinstance(item, str):
            out.append(item)
        elif isinstance(item, dict) and isinstance(item.get("display_name"), str):
            out.append(item["display_name"])
        else:
            raise ValueError(f"unusable text entry: {item!r}")
    return out


def parse_concepts(stream, strict: bool = False) -> ConceptCatalog:
    """Parse a concepts.jsonl stream into a ConceptCatalog.

    ``stream`` is any iterable of lines. Malformed lines are skipped and
    counted (fatal with strict=True); duplicate ids are fatal either way;
    ancestor ids that never resolve within the catalog are dropped from the
    records with a warning. The returned catalog carries its ParseReport
    as ``catalog.parse_report``.
    """
    report = ParseReport()
    records: dict[str, ConceptRecord] = {}
    for lineno, line in enumerate(stream, start=1):
        report.lines += 1
        line = line.strip()
        if not line:
            report.skip(f"line {lineno}: empty")
            continue
        try:
            obj = json.loads(line)
            fid = obj["id"]
            name = obj["display_name"]
            level = obj["level"]
            if not isinstance(fid, str) or not isinstance(name, str):
                raise ValueError("id/display_name must be strings")
            if not isinstance(level, int) or isinstance(level, bool) or level < 0:
                raise ValueError(f"bad level: {level!r}")
            ancestors = _as_id_list(obj.get("ancestors") or [])
            related = _as_text_list(obj.get("related_concepts") or [])
            desc = obj.get("description")
            if desc is not None and not isinstance(desc, str):
                raise ValueError("description must be a string or null")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            if strict:
                raise CorpusError(f"concepts line {lineno}: {exc}") from exc
            report.skip(f"line {lineno}: {exc}")
            continue
        if fid in records:
            raise CorpusError(f"duplicate concept id {fid} at line {lineno}")
        records[fid] = ConceptRecord(
            field_id=fid,
            display_name=name,
            level=level,
            ancestor_ids=tuple(ancestors),
            related_texts=tuple(related),
            description=desc if desc else None,
        )
        report.parsed += 1

    # Second pass: drop ancestor ids that never resolved.
    for fid, rec in list(records.items()):
        resolved = tuple(a for a in rec.ancestor_ids if a in records)
        if len(resolved) != len(rec.ancestor_ids):
            dangling = [a for a in rec.ancestor_ids if a not in records]
            report.warnings.append(f"concept {fid}: dropped dangling ancestors {dangling}")
            records[fid] = ConceptRecord(
                field_id=rec.field_id,
                display_name=rec.display_name,
                level=rec.level,
                ancestor_ids=resolved,
                related_texts=rec.related_texts,
                description=rec.description,
            )
    return ConceptCatalog(records, parse_report=report)


def parse_works(stream, catalog: ConceptCatalog, horizon: tuple[int, int],
                report: ParseReport | None = None, strict: bool = False):
    """Yield WorkRecords from a works.jsonl stream, one pass, bounded memory.

    Each record's field set is replaced by its inclusive ancestor closure
    restricted to ``catalog``. Works whose closure is empty or whose year
    falls outside ``horizon`` are dropped and counted. Pass a ParseReport
    to collect counters while streaming.
    """
    if report is None:
        report = ParseReport()
    t_min, t_max = horizon
    for lineno, line in enumerate(stream, start=1):
        report.lines += 1
        line = line.strip()
        if not line:
            report.skip(f"line {lineno}: empty")
            continue
        try:
            obj = json.loads(line)
            wid = obj["id"]
            year_raw = obj.get("publication_year", obj.get("year"))
            year = int(year_raw)
            tags = _as_id_list(obj.get("concepts") or [])
            if not isinstance(wid, str):
                raise ValueError("work id must be a string")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            if strict:
                raise CorpusError(f"works line {lineno}: {exc}") from exc
            report.skip(f"line {lineno}: {exc}")
            continue
        if not (t_min <= year <= t_max):
            report.skip(f"line {lineno}: year {year} outside horizon")
            continue
        closure = catalog.field_closure(tags)
        if not closure:
            report.skip(f"line {lineno}: no in-catalog fields")
            continue
        report.parsed += 1
        yield WorkRecord(work_id=wid, year=year, field_ids=closure)


def filter_domain(catalog: ConceptCatalog, roots) -> ConceptCatalog:
    """Subcatalog of every node with an ancestor path into ``roots`` (roots included)."""
    roots = set(roots)
    known_roots = set(catalog.root_ids)
    unknown = roots - known_roots
    if unknown:
        raise CorpusError(f"unknown root ids: {sorted(unknown)}")
    keep: set[str] = set()
    for fid in catalog.records:
        if fid in roots or (catalog.ancestor_closure(fid) & roots):
            keep.add(fid)
    sub: dict[str, ConceptRecord] = {}
    for fid in catalog.records:
        if fid not in keep:
            continue
        rec = catalog.records[fid]
        sub[fid] = ConceptRecord(
            field_id=rec.field_id,
            display_name=rec.display_name,
            level=rec.level,
            ancestor_ids=tuple(a for a in rec.ancestor_ids if a in keep),
            related_texts=rec.related_texts,
            description=rec.description,
        )
    return ConceptCatalog(sub)
