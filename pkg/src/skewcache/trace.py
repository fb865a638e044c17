"""Text trace parsing and replay.

One access per line: ``<domain_id> <R|W> <hex_address>``.  Full-line and
trailing ``#`` comments plus blank lines are ignored.  The read/write
flag is recorded in the per-domain operation counts but does not affect
placement.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple


class TraceRecord(NamedTuple):
    domain: int
    op: str  # "R" or "W"
    addr: int


class TraceError(ValueError):
    """Malformed trace line; carries the 1-based line number."""

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"trace line {line_number}: {reason}")
        self.line_number = line_number


def parse_trace_lines(lines: Iterable[str]) -> list[TraceRecord]:
    records = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        fields = text.split()
        if len(fields) != 3:
            raise TraceError(lineno, f"expected 3 fields, got {len(fields)}")
        dom_s, op, addr_s = fields
        try:
            domain = int(dom_s, 10)
        except ValueError:
            raise TraceError(lineno, f"bad domain id {dom_s!r}") from None
        if domain < 0:
            raise TraceError(lineno, f"domain id must be nonnegative, got {domain}")
        op = op.upper()
        if op not in ("R", "W"):
            raise TraceError(lineno, f"operation must be R or W, got {fields[1]!r}")
        try:
            addr = int(addr_s, 16)
        except ValueError:
            raise TraceError(lineno, f"bad hex address {addr_s!r}") from None
        if addr < 0:
            raise TraceError(lineno, "addresses are unsigned")
        records.append(TraceRecord(domain, op, addr))
    return records


def load_trace(path) -> list[TraceRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trace_lines(fh)


def replay(cache, records: Iterable[TraceRecord]) -> dict[int, dict[str, int]]:
    """Run every record through the cache; returns per-domain R/W counts.

    Hit/miss/eviction counters accumulate in the cache's own stats.
    """
    ops: dict[int, dict[str, int]] = {}
    for rec in records:
        cache.access(rec.domain, rec.addr)
        row = ops.setdefault(rec.domain, {"reads": 0, "writes": 0})
        row["reads" if rec.op == "R" else "writes"] += 1
    return ops
