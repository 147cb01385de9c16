"""Guided elicitation sessions: a resumable walk over the concern flow.

A session traverses flow order in pass 1, prompting one concern at a time.
Concerns may be decided (applicable / not applicable) or skipped; when
pass 1 runs out, pass 2 walks the skipped concerns once more. Revisiting
jumps the cursor back to an already-handled concern.

Every state change is an event in an append-only log, and replaying the
log from scratch reproduces the live state exactly — including timestamps,
which are carried in the events rather than regenerated. Log files hold
one JSON event per line ({seq, at, kind, payload}) and are named
``<session-id>.psml-log``; session objects themselves are immutable, every
transition returns a new value.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from . import catalog as cat
from .diagnostics import SessionError
from .specformat import RELEVANCES, ConcernEntry, SpecDocument

PENDING = "pending"
DECIDED = "decided"
SKIPPED = "skipped"


@dataclass(frozen=True)
class Decision:
    """What the team concluded for one concern."""

    kind: str  # applicable | not_applicable | skip
    relevance: str | None = None
    spec_text: str = ""
    by: tuple[str, ...] = ()
    status: str | None = None
    experimental_override: bool | None = None
    reason: str | None = None

    def to_payload(self) -> dict:
        payload: dict = {"kind": self.kind}
        if self.kind == "applicable":
            payload["relevance"] = self.relevance
            if self.spec_text:
                payload["spec"] = self.spec_text
            if self.by:
                payload["by"] = list(self.by)
            if self.status is not None:
                payload["status"] = self.status
            if self.experimental_override:
                payload["experimental"] = True
        elif self.kind == "not_applicable" and self.reason is not None:
            payload["reason"] = self.reason
        return payload

    @classmethod
    def from_payload(cls, payload: dict) -> "Decision":
        return cls(
            kind=payload["kind"],
            relevance=payload.get("relevance"),
            spec_text=payload.get("spec", ""),
            by=tuple(sorted(payload.get("by", ()))),
            status=payload.get("status"),
            experimental_override=payload.get("experimental"),
            reason=payload.get("reason"),
        )


@dataclass(frozen=True)
class Event:
    seq: int
    at: str  # RFC 3339 timestamp
    kind: str  # started | decided | revisited
    payload: dict

    def to_line(self) -> str:
        return json.dumps(
            {"seq": self.seq, "at": self.at, "kind": self.kind, "payload": self.payload},
            ensure_ascii=False,
            sort_keys=True,
        )


@dataclass(frozen=True)
class RelatedStatus:
    related: cat.RelatedConcern
    status: str  # addressed | unaddressed


@dataclass(frozen=True)
class Prompt:
    concern: cat.Concern
    perspective: cat.Perspective
    task: cat.Task | None
    related: tuple[RelatedStatus, ...]
    experimental: bool
    position: int   # 1-based within the full flow
    total: int
    pass_no: int


@dataclass(frozen=True)
class Session:
    id: str
    catalog_version: int
    project: str
    pass_no: int
    queue: tuple[str, ...]            # concerns still ahead; head is the cursor
    status: tuple[tuple[str, str], ...]   # (concern id, pending|decided|skipped)
    entries: tuple[ConcernEntry, ...]     # document under construction
    log: tuple[Event, ...]

    @property
    def done(self) -> bool:
        return not self.queue

    @property
    def cursor(self) -> str | None:
        return self.queue[0] if self.queue else None

    def status_map(self) -> dict[str, str]:
        return dict(self.status)

    def entry_map(self) -> dict[str, ConcernEntry]:
        return {e.concern: e for e in self.entries}

    def to_state_dict(self) -> dict:
        """Serializable snapshot used for equality checks and the API."""
        return {
            "id": self.id,
            "catalog_version": self.catalog_version,
            "project": self.project,
            "pass": self.pass_no,
            "cursor": self.cursor,
            "queue": list(self.queue),
            "status": {cid: st for cid, st in self.status},
            "entries": json.loads(_doc_to_json(self.entries, self.project)),
            "log_length": len(self.log),
        }


def _doc_to_json(entries: tuple[ConcernEntry, ...], project: str) -> str:
    from .specformat import to_json

    return to_json(SpecDocument(project_name=project, entries=entries))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _entry_from_decision(concern: str, d: Decision) -> ConcernEntry:
    if d.kind == "applicable":
        if d.relevance not in RELEVANCES:
            raise SessionError("E-SES-DEC", f"applicable decision for {concern} needs a relevance")
        return ConcernEntry(
            concern=concern,
            applicable=True,
            relevance=d.relevance,
            spec_text=d.spec_text,
            by=tuple(sorted(d.by)),
            status=d.status,
            experimental_override=d.experimental_override,
        )
    if d.kind == "not_applicable":
        return ConcernEntry(concern=concern, applicable=False, reason=d.reason)
    raise SessionError("E-SES-DEC", f"unknown decision kind {d.kind!r}")


def start_session(
    catalog: cat.Catalog,
    seed: SpecDocument | None = None,
    project: str = "",
    session_id: str | None = None,
    now: str | None = None,
) -> Session:
    """Fresh session with the cursor at the first pending concern."""
    if seed is not None:
        known = set(catalog.concern_index())
        bad = [e.concern for e in seed.entries if e.concern not in known]
        if bad:
            raise SessionError("E-SES-SEED", f"seed document references unknown concern {bad[0]}")
        if not project:
            project = seed.project_name
    sid = session_id or uuid.uuid4().hex[:12]
    started = Event(
        seq=1,
        at=now or _now(),
        kind="started",
        payload={
            "session": sid,
            "catalog_version": catalog.version,
            "project": project,
            "seed": [
                {"concern": e.concern, "decision": _decision_of_entry(e).to_payload()}
                for e in seed.entries
            ]
            if seed is not None
            else None,
        },
    )
    return _apply_started(catalog, started)


def _decision_of_entry(e: ConcernEntry) -> Decision:
    if e.applicable:
        return Decision(
            kind="applicable",
            relevance=e.relevance,
            spec_text=e.spec_text,
            by=e.by,
            status=e.status,
            experimental_override=e.experimental_override,
        )
    return Decision(kind="not_applicable", reason=e.reason)


def _apply_started(catalog: cat.Catalog, event: Event) -> Session:
    payload = event.payload
    flow = cat.flow_order(catalog)
    entries: dict[str, ConcernEntry] = {}
    for item in payload.get("seed") or ():
        try:
            entries[item["concern"]] = _entry_from_decision(
                item["concern"], Decision.from_payload(item["decision"])
            )
        except (SessionError, ValueError) as exc:
            raise SessionError("E-SES-SEED", f"invalid seed entry: {exc}") from exc
    status = {cid: (DECIDED if cid in entries else PENDING) for cid in flow}
    queue = tuple(cid for cid in flow if status[cid] == PENDING)
    return Session(
        id=payload["session"],
        catalog_version=payload["catalog_version"],
        project=payload.get("project", ""),
        pass_no=1,
        queue=queue,
        status=tuple(status.items()),
        entries=tuple(entries[cid] for cid in flow if cid in entries),
        log=(event,),
    )


def next_prompt(catalog: cat.Catalog, session: Session) -> Prompt | None:
    """The prompt for the cursor concern, or None when the session is done."""
    cid = session.cursor
    if cid is None:
        return None
    concern = catalog.concern(cid)
    entry_map = session.entry_map()
    related = tuple(
        RelatedStatus(rc, "addressed" if rc.concern.id in entry_map else "unaddressed")
        for rc in cat.related_concerns(catalog, cid)
    )
    flow = cat.flow_order(catalog)
    return Prompt(
        concern=concern,
        perspective=catalog.perspective(concern.perspective),
        task=catalog.task_of_concern(cid),
        related=related,
        experimental=concern.experimental,
        position=flow.index(cid) + 1,
        total=len(flow),
        pass_no=session.pass_no,
    )


def submit_decision(
    catalog: cat.Catalog,
    session: Session,
    concern: str,
    decision: Decision,
    now: str | None = None,
) -> Session:
    """Record a decision for the cursor concern and advance the traversal."""
    if session.done:
        raise SessionError("E-SES-ORDER", "session is complete; nothing to decide")
    if concern != session.cursor:
        raise SessionError(
            "E-SES-ORDER",
            f"cursor is at {session.cursor}, not {concern}; use revisit to jump",
        )
    if decision.kind not in ("applicable", "not_applicable", "skip"):
        raise SessionError("E-SES-DEC", f"unknown decision kind {decision.kind!r}")
    if decision.kind != "skip":
        _entry_from_decision(concern, decision)  # validate before logging
    event = Event(
        seq=len(session.log) + 1,
        at=now or _now(),
        kind="decided",
        payload={"concern": concern, "decision": decision.to_payload()},
    )
    return _apply_decided(catalog, session, event)


def _apply_decided(catalog: cat.Catalog, session: Session, event: Event) -> Session:
    concern = event.payload["concern"]
    decision = Decision.from_payload(event.payload["decision"])
    status = session.status_map()
    entries = session.entry_map()

    if decision.kind == "skip":
        status[concern] = SKIPPED
        entries.pop(concern, None)
    else:
        status[concern] = DECIDED
        entries[concern] = _entry_from_decision(concern, decision)

    queue = session.queue[1:]
    pass_no = session.pass_no
    flow = cat.flow_order(catalog)
    if not queue and pass_no == 1:
        skipped = tuple(cid for cid in flow if status[cid] == SKIPPED)
        if skipped:
            pass_no = 2
            queue = skipped

    return replace(
        session,
        pass_no=pass_no,
        queue=queue,
        status=tuple((cid, status[cid]) for cid in flow),
        entries=tuple(entries[cid] for cid in flow if cid in entries),
        log=session.log + (event,),
    )


def revisit(catalog: cat.Catalog, session: Session, concern: str, now: str | None = None) -> Session:
    """Jump the cursor back to an already-handled concern."""
    status = session.status_map()
    if concern not in status:
        raise SessionError("E-SES-REV", f"unknown concern {concern!r}")
    if status[concern] == PENDING:
        raise SessionError("E-SES-REV", f"{concern} is still pending; it will come up in order")
    event = Event(
        seq=len(session.log) + 1,
        at=now or _now(),
        kind="revisited",
        payload={"concern": concern},
    )
    return _apply_revisited(catalog, session, event)


def _apply_revisited(catalog: cat.Catalog, session: Session, event: Event) -> Session:
    concern = event.payload["concern"]
    queue = (concern,) + tuple(cid for cid in session.queue if cid != concern)
    return replace(session, queue=queue, log=session.log + (event,))


def export_spec(session: Session) -> SpecDocument:
    """The document built so far; valid at every step of the session."""
    return SpecDocument(project_name=session.project, entries=session.entries)


def replay(catalog: cat.Catalog, events: list[Event]) -> Session:
    """Rebuild a session from its event log."""
    if not events or events[0].kind != "started":
        raise SessionError("E-SES-LOG", "log must begin with a started event")
    session = _apply_started(catalog, events[0])
    for event in events[1:]:
        if event.seq != len(session.log) + 1:
            raise SessionError("E-SES-LOG", f"event sequence gap at seq {event.seq}")
        if event.kind == "decided":
            session = _apply_decided(catalog, session, event)
        elif event.kind == "revisited":
            session = _apply_revisited(catalog, session, event)
        else:
            raise SessionError("E-SES-LOG", f"unknown event kind {event.kind!r}")
    return session


# --- log file I/O ----------------------------------------------------------

def log_path(directory: Path, session_id: str) -> Path:
    return Path(directory) / f"{session_id}.psml-log"


def read_log(path: Path) -> list[Event]:
    events: list[Event] = []
    for i, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            events.append(Event(raw["seq"], raw["at"], raw["kind"], raw["payload"]))
        except (json.JSONDecodeError, KeyError) as exc:
            raise SessionError("E-SES-LOG", f"{path}:{i}: bad event line: {exc}") from exc
    return events


def append_events(path: Path, events: list[Event]) -> None:
    """Append events and flush to disk before acknowledging."""
    with open(path, "a", encoding="utf-8") as fh:
        for event in events:
            fh.write(event.to_line() + "\n")
        fh.flush()
        import os

        os.fsync(fh.fileno())


def load_session(catalog: cat.Catalog, path: Path) -> Session:
    return replay(catalog, read_log(path))
