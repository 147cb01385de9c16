"""Semantic analysis of a specification document against a catalog.

All functions here are pure; findings come back in a deterministic order
(severity, then flow position of the concern, then code) so text and JSON
reports are byte-stable for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import catalog as cat
from .diagnostics import Finding, sort_findings
from .specformat import ConcernEntry, SpecDocument

_RELEVANCE_RANK = {"essential": 0, "important": 1, "desirable": 2}


@dataclass(frozen=True)
class PerspectiveCoverage:
    perspective: str
    addressed: int          # applicable + n/a entries
    applicable: int
    total: int
    unaddressed: tuple[str, ...]


@dataclass(frozen=True)
class CoverageReport:
    per_perspective: tuple[PerspectiveCoverage, ...]
    addressed: int
    applicable: int
    total: int

    @property
    def fraction(self) -> float:
        return self.addressed / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "addressed": self.addressed,
            "applicable": self.applicable,
            "total": self.total,
            "per_perspective": [
                {
                    "perspective": p.perspective,
                    "addressed": p.addressed,
                    "applicable": p.applicable,
                    "total": p.total,
                    "unaddressed": list(p.unaddressed),
                }
                for p in self.per_perspective
            ],
        }


@dataclass(frozen=True)
class DiffEntry:
    concern: str
    kind: str  # added | removed | disposition_changed | relevance_changed | text_changed | unchanged
    detail: str = ""


@dataclass(frozen=True)
class DiffReport:
    entries: tuple[DiffEntry, ...]

    def changed(self) -> tuple[DiffEntry, ...]:
        return tuple(e for e in self.entries if e.kind != "unchanged")


def relationship_alerts(
    catalog: cat.Catalog, doc: SpecDocument
) -> list[tuple[cat.Relationship, str, str]]:
    """Catalog edges with one applicable endpoint and one with no entry.

    Returns (relationship, applicable endpoint, missing endpoint) per edge,
    ordered by the applicable endpoint's flow position then edge key.
    """
    entry_map = doc.entry_map()
    alerts: list[tuple[cat.Relationship, str, str]] = []
    for rel in catalog.relationships:
        a, b = rel.endpoints()
        ea, eb = entry_map.get(a), entry_map.get(b)
        if ea is not None and ea.applicable and eb is None:
            alerts.append((rel, a, b))
        elif eb is not None and eb.applicable and ea is None:
            alerts.append((rel, b, a))
    index = cat.flow_index(catalog)
    alerts.sort(key=lambda t: (index[t[1]], t[0].kind, index[t[2]]))
    return alerts


def check(catalog: cat.Catalog, doc: SpecDocument) -> list[Finding]:
    """Advisory diagnostics for a parsed document.

    W101 applicable entry without specification text; W102 a related concern
    was never brought up; W103 n/a without reason on a dependency target;
    W104 a trade-off pair marked essential on both sides; I201 experimental
    concern already approved. Relationship rules advise, they never error.
    """
    findings: list[Finding] = []
    entry_map = doc.entry_map()
    index = catalog.concern_index()

    for e in doc.entries:
        if e.applicable and not e.spec_text:
            findings.append(
                Finding(
                    code="W101",
                    concern=e.concern,
                    span=e.source_span,
                    message=f"{e.concern} is {e.relevance} but has no specification text",
                )
            )

    kind_phrases = {"influences": "influences", "depends_on": "depends on", "trade_off": "trades off against"}
    for rel, present, missing in relationship_alerts(catalog, doc):
        kind = kind_phrases[rel.kind]
        findings.append(
            Finding(
                code="W102",
                concern=present,
                span=entry_map[present].source_span,
                message=(
                    f"{present} is applicable and {kind} {missing}"
                    f" ({index[missing].name}), which is unaddressed: {rel.rationale}"
                ),
            )
        )

    for rel in catalog.relationships:
        if rel.kind != "depends_on":
            continue
        source, target = entry_map.get(rel.from_id), entry_map.get(rel.to_id)
        if (
            source is not None
            and source.applicable
            and target is not None
            and not target.applicable
            and not target.reason
        ):
            findings.append(
                Finding(
                    code="W103",
                    concern=rel.to_id,
                    span=target.source_span,
                    message=(
                        f"{rel.to_id} is n/a without a reason, but applicable"
                        f" {rel.from_id} depends on it"
                    ),
                )
            )

    for rel in catalog.relationships:
        if rel.kind != "trade_off":
            continue
        a, b = entry_map.get(rel.from_id), entry_map.get(rel.to_id)
        if (
            a is not None
            and b is not None
            and a.relevance == "essential"
            and b.relevance == "essential"
        ):
            findings.append(
                Finding(
                    code="W104",
                    concern=rel.from_id,
                    span=a.source_span,
                    message=(
                        f"{rel.from_id} and {rel.to_id} trade off against each other"
                        f" yet both are essential; record how the balance is struck"
                    ),
                )
            )

    for e in doc.entries:
        if not e.applicable or e.status != "approved":
            continue
        effective = e.experimental_override if e.experimental_override is not None else index[e.concern].experimental
        if effective:
            findings.append(
                Finding(
                    code="I201",
                    concern=e.concern,
                    span=e.source_span,
                    message=(
                        f"{e.concern} is experimental but already approved;"
                        f" expect this choice to be revisited as experiments land"
                    ),
                )
            )

    return sort_findings(findings, cat.flow_index(catalog))


def coverage(catalog: cat.Catalog, doc: SpecDocument) -> CoverageReport:
    """Addressed / applicable / unaddressed tallies; n/a counts as addressed."""
    entry_map = doc.entry_map()
    per: list[PerspectiveCoverage] = []
    for pid in cat.PERSPECTIVE_ORDER:
        concerns = sorted(catalog.concerns_of(pid), key=lambda c: cat.concern_sort_key(c.id))
        addressed = [c.id for c in concerns if c.id in entry_map]
        applicable = [cid for cid in addressed if entry_map[cid].applicable]
        unaddressed = tuple(c.id for c in concerns if c.id not in entry_map)
        per.append(
            PerspectiveCoverage(
                perspective=pid,
                addressed=len(addressed),
                applicable=len(applicable),
                total=len(concerns),
                unaddressed=unaddressed,
            )
        )
    return CoverageReport(
        per_perspective=tuple(per),
        addressed=sum(p.addressed for p in per),
        applicable=sum(p.applicable for p in per),
        total=sum(p.total for p in per),
    )


def prioritize(catalog: cat.Catalog, doc: SpecDocument) -> list[ConcernEntry]:
    """Applicable entries, essential first, flow order breaking ties."""
    index = cat.flow_index(catalog)
    applicable = [e for e in doc.entries if e.applicable]
    applicable.sort(key=lambda e: (_RELEVANCE_RANK[e.relevance], index[e.concern]))
    return applicable


def diff(catalog: cat.Catalog, old: SpecDocument, new: SpecDocument) -> DiffReport:
    """Classify every concern touched by either document, in flow order."""
    old_map, new_map = old.entry_map(), new.entry_map()
    index = cat.flow_index(catalog)
    out: list[DiffEntry] = []
    for cid in sorted(set(old_map) | set(new_map), key=lambda c: index.get(c, 10**6)):
        before, after = old_map.get(cid), new_map.get(cid)
        out.append(_classify(cid, before, after))
    return DiffReport(tuple(out))


def _classify(cid: str, before: ConcernEntry | None, after: ConcernEntry | None) -> DiffEntry:
    if before is None:
        assert after is not None
        what = after.relevance if after.applicable else "n/a"
        return DiffEntry(cid, "added", f"added as {what}")
    if after is None:
        return DiffEntry(cid, "removed", "entry removed")
    if before.applicable != after.applicable:
        frm = "applicable" if before.applicable else "n/a"
        to = "applicable" if after.applicable else "n/a"
        return DiffEntry(cid, "disposition_changed", f"{frm} -> {to}")
    if before.applicable and before.relevance != after.relevance:
        return DiffEntry(cid, "relevance_changed", f"{before.relevance} -> {after.relevance}")
    if before == after:
        return DiffEntry(cid, "unchanged")
    changed = []
    if before.spec_text != after.spec_text:
        changed.append("spec")
    if before.by != after.by:
        changed.append("by")
    if before.status != after.status:
        changed.append("status")
    if before.experimental_override != after.experimental_override:
        changed.append("experimental")
    if before.reason != after.reason:
        changed.append("reason")
    return DiffEntry(cid, "text_changed", ", ".join(changed) + " changed")
