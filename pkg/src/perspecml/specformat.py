"""The .psml specification language: parser, canonical serializer, JSON.

Grammar
-------
::

    doc      := header block*
    header   := "perspecml" INT NL "project" QUOTED NL
    block    := "[" pid "]" NL entry*            pid in {objectives, ux,
                                                  infrastructure, model, data}
    entry    := CID (app | "n/a" ("because" QUOTED)?) NL
    app      := relevance "experimental"? attrs?
    attrs    := "{" (key ":" value ","?)* "}"    keys: by, spec, status
    relevance := "desirable" | "important" | "essential"

``by`` takes a comma list of role codes, ``spec`` a quoted string or a
triple-quoted block, ``status`` one of draft/refined/approved. ``#`` starts
a comment running to end of line. Concern ids are uppercase; block ids
lowercase. Newlines are insignificant inside ``{ … }``.

Parsing is total: after an error the parser resynchronizes at the next
entry or block header and keeps going, so one pass reports every problem.
A document is only returned when there are no error findings.

The canonical serialization is line-oriented and byte-deterministic:
blocks in flow order, entries in catalog order, attributes ordered
by/spec/status, 2-space indent, LF endings, all strings single-line quoted
with escapes. ``parse_spec(serialize_spec(d))`` reproduces ``d`` up to
source spans.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from . import catalog as cat
from .diagnostics import Finding, Span, sort_findings

FORMAT_VERSION = 1
RELEVANCES = ("desirable", "important", "essential")
STATUSES = ("draft", "refined", "approved")

_WORD_RE = re.compile(r"[A-Za-z0-9_/-]+")
_CID_SHAPE_RE = re.compile(r"^[A-Z][0-9]+$")
_ENTRY_START_RE = re.compile(r"^[ \t]*(\[|[A-Z][0-9]+\b)")


@dataclass(frozen=True)
class ConcernEntry:
    """One concern's disposition inside a project specification."""

    concern: str
    applicable: bool
    relevance: str | None = None          # required when applicable
    spec_text: str = ""
    by: tuple[str, ...] = ()              # sorted role codes
    status: str | None = None
    experimental_override: bool | None = None
    reason: str | None = None             # only for n/a entries
    source_span: Span | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.applicable and self.relevance not in RELEVANCES:
            raise ValueError(f"applicable entry {self.concern} needs a relevance")
        if not self.applicable and self.relevance is not None:
            raise ValueError(f"n/a entry {self.concern} cannot carry a relevance")


@dataclass(frozen=True)
class SpecDocument:
    """A parsed project specification; equality ignores entry order and spans."""

    project_name: str
    entries: tuple[ConcernEntry, ...] = ()
    format_version: int = FORMAT_VERSION

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for e in self.entries:
            if e.concern in seen:
                raise ValueError(f"duplicate entry for {e.concern}")
            seen.add(e.concern)

    def entry_map(self) -> dict[str, ConcernEntry]:
        return {e.concern: e for e in self.entries}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpecDocument):
            return NotImplemented
        return (
            self.format_version == other.format_version
            and self.project_name == other.project_name
            and self.entry_map() == other.entry_map()
        )

    def __hash__(self) -> int:
        return hash((self.format_version, self.project_name, frozenset(self.entry_map())))


@dataclass
class ParseResult:
    """Either a document (no findings) or error findings (no document)."""

    document: SpecDocument | None
    findings: list[Finding]

    @property
    def ok(self) -> bool:
        return self.document is not None


class _Scanner:
    """Character scanner with 1-based line/col tracking."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def span(self) -> Span:
        return Span(self.line, self.col)

    def skip_inline_ws(self) -> None:
        while not self.at_end() and self.peek() in " \t\r":
            self.advance()

    def skip_comment(self) -> bool:
        if self.peek() == "#":
            while not self.at_end() and self.peek() != "\n":
                self.advance()
            return True
        return False

    def skip_blank(self) -> None:
        """Skip whitespace, newlines and comments."""
        while not self.at_end():
            self.skip_inline_ws()
            if self.skip_comment():
                continue
            if self.peek() == "\n":
                self.advance()
                continue
            break

    def read_word(self) -> str:
        m = _WORD_RE.match(self.text, self.pos)
        if not m:
            return ""
        word = m.group(0)
        for _ in word:
            self.advance()
        return word

    def skip_to_next_line(self) -> None:
        while not self.at_end() and self.peek() != "\n":
            self.advance()
        if not self.at_end():
            self.advance()

    def at_line_start_of_entry(self) -> bool:
        """True when the current line (from its start) opens a block or entry."""
        start = self.text.rfind("\n", 0, self.pos) + 1
        return bool(_ENTRY_START_RE.match(self.text, start))


class _ParseError(Exception):
    def __init__(self, code: str, message: str, span: Span):
        super().__init__(message)
        self.code = code
        self.message = message
        self.span = span


_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}
_UNESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


def _quote(text: str) -> str:
    return '"' + "".join(_UNESCAPES.get(ch, ch) for ch in text) + '"'


def _read_quoted(sc: _Scanner) -> str:
    start = sc.span()
    if sc.peek() != '"':
        raise _ParseError("E004", "expected a quoted string", start)
    sc.advance()
    if sc.text.startswith('""', sc.pos):  # triple-quoted block
        sc.advance()
        sc.advance()
        chunk_start = sc.pos
        end = sc.text.find('"""', sc.pos)
        if end < 0:
            raise _ParseError("E004", "unterminated triple-quoted block", start)
        while sc.pos < end:
            sc.advance()
        value = sc.text[chunk_start:end]
        sc.advance()
        sc.advance()
        sc.advance()
        return value
    out: list[str] = []
    while True:
        if sc.at_end() or sc.peek() == "\n":
            raise _ParseError("E004", "unterminated string", start)
        ch = sc.advance()
        if ch == '"':
            return "".join(out)
        if ch == "\\":
            if sc.at_end():
                raise _ParseError("E004", "unterminated string", start)
            esc = sc.advance()
            if esc not in _ESCAPES:
                raise _ParseError("E004", f"unknown escape \\{esc}", start)
            out.append(_ESCAPES[esc])
        else:
            out.append(ch)


def parse_spec(text: str, catalog: cat.Catalog | None = None) -> ParseResult:
    """Parse .psml source; report every syntax error with its position."""
    catalog = catalog if catalog is not None else cat.load_catalog()
    valid_ids = {c.id for c in catalog.concerns}
    role_codes = set(catalog.role_codes())

    sc = _Scanner(text)
    findings: list[Finding] = []
    entries: list[ConcernEntry] = []
    seen: dict[str, Span] = {}
    project_name = ""
    version = FORMAT_VERSION

    def err(code: str, message: str, span: Span, concern: str | None = None) -> None:
        findings.append(Finding(code=code, message=message, concern=concern, span=span))

    def recover() -> None:
        """Resynchronize at the next line that opens an entry or block."""
        sc.skip_to_next_line()
        while not sc.at_end():
            probe = _Scanner(sc.text)
            probe.pos, probe.line, probe.col = sc.pos, sc.line, sc.col
            probe.skip_inline_ws()
            nxt = probe.peek()
            if nxt == "[" or _WORD_RE.match(sc.text, probe.pos) and _CID_SHAPE_RE.match(
                _WORD_RE.match(sc.text, probe.pos).group(0)
            ):
                sc.pos, sc.line, sc.col = probe.pos, probe.line, probe.col
                return
            sc.skip_to_next_line()

    def expect_eol(where: str) -> None:
        sc.skip_inline_ws()
        sc.skip_comment()
        if sc.at_end():
            return
        if sc.peek() == "\n":
            sc.advance()
            return
        raise _ParseError("E004", f"unexpected trailing content after {where}", sc.span())

    # --- header -----------------------------------------------------------
    sc.skip_blank()
    span = sc.span()
    if sc.read_word() == "perspecml":
        sc.skip_inline_ws()
        vspan = sc.span()
        vword = sc.read_word()
        try:
            if not vword.isdigit():
                raise _ParseError("E004", "expected format version number after 'perspecml'", vspan)
            version = int(vword)
            if version != FORMAT_VERSION:
                raise _ParseError("E004", f"unsupported format version {version}", vspan)
            expect_eol("header")
        except _ParseError as exc:
            err(exc.code, exc.message, exc.span)
            recover()
    else:
        err("E004", "missing 'perspecml <version>' header", span)
        sc.pos, sc.line, sc.col = 0, 1, 1  # reparse same text as body

    sc.skip_blank()
    mark = (sc.pos, sc.line, sc.col)
    span = sc.span()
    if sc.read_word() == "project":
        sc.skip_inline_ws()
        try:
            project_name = _read_quoted(sc)
            expect_eol("project line")
        except _ParseError as exc:
            err(exc.code, exc.message, exc.span)
            recover()
    else:
        err("E004", "missing 'project \"<name>\"' line", span)
        sc.pos, sc.line, sc.col = mark

    # --- body -------------------------------------------------------------
    current_pid: str | None = None
    block_seen = False

    while True:
        sc.skip_blank()
        if sc.at_end():
            break
        span = sc.span()
        ch = sc.peek()
        if ch == "[":
            sc.advance()
            pid = sc.read_word()
            block_seen = True
            if sc.peek() == "]":
                sc.advance()
            else:
                err("E004", "missing ']' after perspective name", sc.span())
                recover()
                current_pid = pid if pid in cat.PERSPECTIVE_ORDER else None
                continue
            if pid in cat.PERSPECTIVE_ORDER:
                current_pid = pid
            else:
                err("E004", f"unknown perspective block [{pid}]", span)
                current_pid = None
            try:
                expect_eol("block header")
            except _ParseError as exc:
                err(exc.code, exc.message, exc.span)
                recover()
            continue

        word = sc.read_word()
        if not word:
            err("E004", f"unexpected character {ch!r}", span)
            recover()
            continue
        if not _CID_SHAPE_RE.match(word):
            err("E004", f"expected a concern id or perspective block, got {word!r}", span)
            recover()
            continue

        cid = word
        entry_bad = False
        if cid not in valid_ids:
            err("E001", f"unknown concern id {cid}", span, cid)
            entry_bad = True
        elif not block_seen:
            err("E004", f"entry {cid} appears before any perspective block", span, cid)
            entry_bad = True
        elif current_pid is not None and cat.perspective_of(cid) != current_pid:
            err(
                "E002",
                f"{cid} belongs to perspective {cat.perspective_of(cid)}, not [{current_pid}]",
                span,
                cid,
            )
            entry_bad = True

        try:
            entry = _parse_entry_tail(sc, cid, span, role_codes)
            expect_eol("entry")
        except _ParseError as exc:
            err(exc.code, exc.message, exc.span, cid)
            recover()
            continue

        if cid in seen:
            err("E003", f"duplicate entry for {cid} (first at {seen[cid]})", span, cid)
            entry_bad = True
        else:
            seen[cid] = span
        if not entry_bad:
            entries.append(entry)

    if any(f.severity == "error" for f in findings):
        return ParseResult(None, sort_findings(findings, cat.flow_index(catalog)))
    return ParseResult(
        SpecDocument(project_name=project_name, entries=tuple(entries), format_version=version),
        [],
    )


def _parse_entry_tail(sc: _Scanner, cid: str, start: Span, role_codes: set[str]) -> ConcernEntry:
    sc.skip_inline_ws()
    wspan = sc.span()
    word = sc.read_word()

    if word == "n/a":
        reason = None
        sc.skip_inline_ws()
        save = (sc.pos, sc.line, sc.col)
        nxt = sc.read_word()
        if nxt == "because":
            sc.skip_inline_ws()
            reason = _read_quoted(sc)
        elif nxt:
            raise _ParseError("E004", f"expected 'because \"<reason>\"' after n/a, got {nxt!r}", wspan)
        else:
            sc.pos, sc.line, sc.col = save
        end = sc.span()
        return ConcernEntry(
            concern=cid,
            applicable=False,
            reason=reason,
            source_span=Span(start.line, start.col, end.line, end.col),
        )

    if word not in RELEVANCES:
        raise _ParseError(
            "E004",
            f"expected relevance ({'|'.join(RELEVANCES)}) or n/a, got {word!r}",
            wspan,
        )
    relevance = word

    experimental: bool | None = None
    sc.skip_inline_ws()
    save = (sc.pos, sc.line, sc.col)
    nxt = sc.read_word()
    if nxt == "experimental":
        experimental = True
    elif nxt:
        raise _ParseError("E004", f"unexpected token {nxt!r} after relevance", wspan)
    else:
        sc.pos, sc.line, sc.col = save

    spec_text = ""
    by: tuple[str, ...] = ()
    status = None
    sc.skip_inline_ws()
    if sc.peek() == "{":
        spec_text, by, status = _parse_attrs(sc, role_codes)

    end = sc.span()
    return ConcernEntry(
        concern=cid,
        applicable=True,
        relevance=relevance,
        spec_text=spec_text,
        by=by,
        status=status,
        experimental_override=experimental,
        source_span=Span(start.line, start.col, end.line, end.col),
    )


def _parse_attrs(sc: _Scanner, role_codes: set[str]) -> tuple[str, tuple[str, ...], str | None]:
    open_span = sc.span()
    sc.advance()  # consume {
    spec_text = ""
    by: list[str] = []
    status: str | None = None
    present: set[str] = set()

    def skip_attr_ws() -> None:
        while not sc.at_end():
            sc.skip_inline_ws()
            if sc.skip_comment():
                continue
            if sc.peek() == "\n":
                sc.advance()
                continue
            break

    while True:
        skip_attr_ws()
        if sc.at_end():
            raise _ParseError("E004", "unclosed attribute block", open_span)
        if sc.peek() == "}":
            sc.advance()
            return spec_text, tuple(sorted(by)), status
        kspan = sc.span()
        key = sc.read_word()
        if key not in ("by", "spec", "status"):
            raise _ParseError("E004", f"unknown attribute {key!r} (expected by, spec or status)", kspan)
        if key in present:
            raise _ParseError("E004", f"duplicate attribute {key!r}", kspan)
        present.add(key)
        skip_attr_ws()
        if sc.peek() != ":":
            raise _ParseError("E004", f"expected ':' after attribute {key!r}", sc.span())
        sc.advance()
        skip_attr_ws()

        if key == "spec":
            spec_text = _read_quoted(sc)
        elif key == "status":
            vspan = sc.span()
            value = sc.read_word()
            if value not in STATUSES:
                raise _ParseError("E004", f"status must be one of {', '.join(STATUSES)}, got {value!r}", vspan)
            status = value
        else:  # by: comma list of role codes
            while True:
                vspan = sc.span()
                code = sc.read_word()
                if not code:
                    raise _ParseError("E004", "expected a role code in 'by' list", vspan)
                if code not in role_codes:
                    raise _ParseError("E004", f"unknown role code {code!r}", vspan)
                if code in by:
                    raise _ParseError("E004", f"role {code!r} listed twice in 'by'", vspan)
                by.append(code)
                skip_attr_ws()
                if sc.peek() != ",":
                    break
                sc.advance()  # consume comma; may be a separator or trailing
                skip_attr_ws()
                probe = _Scanner(sc.text)
                probe.pos, probe.line, probe.col = sc.pos, sc.line, sc.col
                nxt = probe.read_word()
                if not nxt or sc.peek() == "}":
                    break  # trailing comma before }
                probe.skip_inline_ws()
                if probe.peek() == ":":
                    break  # next attribute key
            continue

        skip_attr_ws()
        if sc.peek() == ",":
            sc.advance()


def serialize_spec(doc: SpecDocument) -> str:
    """Canonical text form: deterministic, diff-friendly, reparses to doc."""
    lines = [f"perspecml {doc.format_version}", f"project {_quote(doc.project_name)}"]
    by_perspective: dict[str, list[ConcernEntry]] = {}
    for e in doc.entries:
        pid = cat.perspective_of(e.concern)
        by_perspective.setdefault(pid or "?", []).append(e)
    for pid in cat.PERSPECTIVE_ORDER:
        block = by_perspective.get(pid)
        if not block:
            continue
        lines.append("")
        lines.append(f"[{pid}]")
        for e in sorted(block, key=lambda e: cat.concern_sort_key(e.concern)):
            lines.append("  " + _entry_line(e))
    return "\n".join(lines) + "\n"


def _entry_line(e: ConcernEntry) -> str:
    if not e.applicable:
        if e.reason is not None:
            return f"{e.concern} n/a because {_quote(e.reason)}"
        return f"{e.concern} n/a"
    parts = [e.concern, e.relevance or ""]
    if e.experimental_override:
        parts.append("experimental")
    attrs: list[str] = []
    if e.by:
        attrs.append("by: " + ", ".join(e.by))
    if e.spec_text:
        attrs.append("spec: " + _quote(e.spec_text))
    if e.status is not None:
        attrs.append("status: " + e.status)
    head = " ".join(p for p in parts if p)
    if attrs:
        return head + " { " + ", ".join(attrs) + " }"
    return head


def to_json(doc: SpecDocument) -> str:
    """Canonical JSON projection; entries in flow order, fixed key order."""
    entries = []
    for e in sorted(doc.entries, key=lambda e: (cat.PERSPECTIVE_ORDER.index(cat.perspective_of(e.concern)), cat.concern_sort_key(e.concern))):
        item: dict = {"concern": e.concern}
        if e.applicable:
            item["disposition"] = "applicable"
            item["relevance"] = e.relevance
            if e.spec_text:
                item["spec"] = e.spec_text
            if e.by:
                item["by"] = list(e.by)
            if e.status is not None:
                item["status"] = e.status
            if e.experimental_override:
                item["experimental"] = True
        else:
            item["disposition"] = "not_applicable"
            if e.reason is not None:
                item["reason"] = e.reason
        entries.append(item)
    payload = {
        "format_version": doc.format_version,
        "project": doc.project_name,
        "entries": entries,
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def from_json(text: str, catalog: cat.Catalog | None = None) -> ParseResult:
    """Inverse of to_json; schema violations come back as E005 findings."""
    catalog = catalog if catalog is not None else cat.load_catalog()
    valid_ids = {c.id for c in catalog.concerns}
    role_codes = set(catalog.role_codes())
    findings: list[Finding] = []

    def err(path: str, message: str) -> None:
        findings.append(Finding(code="E005", message=f"{path}: {message}"))

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        err("/", f"malformed JSON at {exc.lineno}:{exc.colno}: {exc.msg}")
        return ParseResult(None, findings)

    if not isinstance(raw, dict):
        err("/", "document must be a JSON object")
        return ParseResult(None, findings)
    version = raw.get("format_version")
    if version != FORMAT_VERSION:
        err("/format_version", f"must be {FORMAT_VERSION}")
    project = raw.get("project")
    if not isinstance(project, str):
        err("/project", "must be a string")
        project = ""
    items = raw.get("entries")
    if not isinstance(items, list):
        err("/entries", "must be an array")
        items = []

    entries: list[ConcernEntry] = []
    seen: set[str] = set()
    for i, item in enumerate(items):
        path = f"/entries/{i}"
        if not isinstance(item, dict):
            err(path, "must be an object")
            continue
        cid = item.get("concern")
        if not isinstance(cid, str) or cid not in valid_ids:
            err(f"{path}/concern", f"unknown concern id {cid!r}")
            continue
        if cid in seen:
            err(f"{path}/concern", f"duplicate entry for {cid}")
            continue
        seen.add(cid)
        disposition = item.get("disposition")
        if disposition == "applicable":
            relevance = item.get("relevance")
            if relevance not in RELEVANCES:
                err(f"{path}/relevance", f"must be one of {', '.join(RELEVANCES)}")
                continue
            spec_text = item.get("spec", "")
            if not isinstance(spec_text, str):
                err(f"{path}/spec", "must be a string")
                continue
            by_raw = item.get("by", [])
            if not isinstance(by_raw, list) or not all(isinstance(b, str) for b in by_raw):
                err(f"{path}/by", "must be an array of role codes")
                continue
            bad_roles = [b for b in by_raw if b not in role_codes]
            if bad_roles:
                err(f"{path}/by", f"unknown role code {bad_roles[0]!r}")
                continue
            status = item.get("status")
            if status is not None and status not in STATUSES:
                err(f"{path}/status", f"must be one of {', '.join(STATUSES)}")
                continue
            experimental = item.get("experimental")
            if experimental not in (None, True):
                err(f"{path}/experimental", "must be true when present")
                continue
            entries.append(
                ConcernEntry(
                    concern=cid,
                    applicable=True,
                    relevance=relevance,
                    spec_text=spec_text,
                    by=tuple(sorted(set(by_raw))),
                    status=status,
                    experimental_override=experimental,
                )
            )
        elif disposition == "not_applicable":
            reason = item.get("reason")
            if reason is not None and not isinstance(reason, str):
                err(f"{path}/reason", "must be a string")
                continue
            entries.append(ConcernEntry(concern=cid, applicable=False, reason=reason))
        else:
            err(f"{path}/disposition", "must be 'applicable' or 'not_applicable'")

    if findings:
        return ParseResult(None, findings)
    return ParseResult(SpecDocument(project_name=project, entries=tuple(entries)), [])
