"""Typed data model of the perspective/task/concern method, plus the bundled
default catalog, integrity validation, and the relationship/flow queries
every other module builds on.

Catalog values are deeply immutable (frozen dataclasses over tuples); every
operation here is a pure function of its inputs, so catalogs can be shared
freely across threads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .diagnostics import CatalogError, Finding, Span, has_errors

PERSPECTIVE_ORDER = ("objectives", "ux", "infrastructure", "model", "data")

PREFIX_TO_PERSPECTIVE = {
    "O": "objectives",
    "U": "ux",
    "I": "infrastructure",
    "M": "model",
    "D": "data",
}

RELATIONSHIP_KINDS = ("depends_on", "influences", "trade_off")

_CONCERN_ID_RE = re.compile(r"^([A-Z])([0-9]+)$")


def parse_concern_id(cid: str) -> tuple[str, int] | None:
    """Split a concern id into (prefix, number); None if not id-shaped."""
    m = _CONCERN_ID_RE.match(cid)
    if not m:
        return None
    number = int(m.group(2))
    if number <= 0 or m.group(2) != str(number):
        return None
    return m.group(1), number


def perspective_of(cid: str) -> str | None:
    """Perspective a concern id belongs to by its letter prefix, or None."""
    parsed = parse_concern_id(cid)
    if parsed is None:
        return None
    return PREFIX_TO_PERSPECTIVE.get(parsed[0])


def concern_sort_key(cid: str) -> tuple[str, int]:
    parsed = parse_concern_id(cid)
    if parsed is None:
        raise ValueError(f"not a concern id: {cid!r}")
    return parsed


@dataclass(frozen=True)
class Perspective:
    id: str
    display_name: str
    color: str
    description: str


@dataclass(frozen=True)
class StakeholderRole:
    code: str
    display_name: str
    description: str


@dataclass(frozen=True)
class Task:
    id: str
    perspective: str
    name: str
    description: str
    suggested_roles: tuple[str, ...]
    concern_ids: tuple[str, ...]


@dataclass(frozen=True)
class Concern:
    id: str
    name: str
    prompt: str
    description: str
    experimental: bool

    @property
    def perspective(self) -> str:
        p = perspective_of(self.id)
        assert p is not None
        return p


@dataclass(frozen=True)
class Relationship:
    from_id: str
    to_id: str
    kind: str
    rationale: str
    provenance: str

    def endpoints(self) -> tuple[str, str]:
        return (self.from_id, self.to_id)

    def key(self) -> tuple[str, str, str]:
        return (self.from_id, self.to_id, self.kind)


@dataclass(frozen=True)
class RelatedConcern:
    """One relationship viewed from a given concern.

    direction is "out" for an edge leaving the concern, "in" for an edge
    arriving at it, and "both" for undirected trade-offs.
    """

    relationship: Relationship
    concern: Concern
    direction: str


@dataclass(frozen=True)
class Catalog:
    version: int
    perspectives: tuple[Perspective, ...]
    roles: tuple[StakeholderRole, ...]
    tasks: tuple[Task, ...]
    concerns: tuple[Concern, ...]
    relationships: tuple[Relationship, ...]
    mapping_provenance: str = "extension"

    def perspective(self, pid: str) -> Perspective:
        for p in self.perspectives:
            if p.id == pid:
                return p
        raise CatalogError("E-CAT-UNKNOWN", f"unknown perspective {pid!r}")

    def concern(self, cid: str) -> Concern:
        c = self.concern_index().get(cid)
        if c is None:
            raise CatalogError("E-CAT-UNKNOWN", f"unknown concern id {cid!r}")
        return c

    def concern_index(self) -> dict[str, Concern]:
        return {c.id: c for c in self.concerns}

    def role_codes(self) -> tuple[str, ...]:
        return tuple(r.code for r in self.roles)

    def concerns_of(self, pid: str) -> tuple[Concern, ...]:
        return tuple(c for c in self.concerns if c.perspective == pid)

    def tasks_of(self, pid: str) -> tuple[Task, ...]:
        return tuple(t for t in self.tasks if t.perspective == pid)

    def task_of_concern(self, cid: str) -> Task | None:
        """The first task (catalog order) that lists the concern."""
        for t in self.tasks:
            if cid in t.concern_ids:
                return t
        return None

    def to_dict(self) -> dict:
        """Canonical JSON-ready form; deterministic ordering throughout."""
        return {
            "version": self.version,
            "mapping_provenance": self.mapping_provenance,
            "perspectives": [
                {
                    "id": p.id,
                    "display_name": p.display_name,
                    "color": p.color,
                    "description": p.description,
                }
                for p in self.perspectives
            ],
            "roles": [
                {
                    "code": r.code,
                    "display_name": r.display_name,
                    "description": r.description,
                }
                for r in self.roles
            ],
            "tasks": [
                {
                    "id": t.id,
                    "perspective": t.perspective,
                    "name": t.name,
                    "description": t.description,
                    "suggested_roles": list(t.suggested_roles),
                    "concern_ids": list(t.concern_ids),
                }
                for t in self.tasks
            ],
            "concerns": [
                {
                    "id": c.id,
                    "name": c.name,
                    "prompt": c.prompt,
                    "description": c.description,
                    "experimental": c.experimental,
                }
                for c in self.concerns
            ],
            "relationships": [
                {
                    "from": r.from_id,
                    "to": r.to_id,
                    "kind": r.kind,
                    "rationale": r.rationale,
                    "provenance": r.provenance,
                }
                for r in sorted(self.relationships, key=lambda r: (r.kind, concern_sort_key(r.from_id), concern_sort_key(r.to_id)))
            ],
        }


def default_prompt(description: str) -> str:
    """Mechanical prompt derivation from a concern description."""
    return f"What/How: {description.rstrip('.')}?"


def _canonical_trade_off(rel: Relationship) -> Relationship:
    """Trade-offs are undirected; store endpoints in (letter, number) order."""
    if rel.kind != "trade_off":
        return rel
    a, b = rel.from_id, rel.to_id
    try:
        if concern_sort_key(b) < concern_sort_key(a):
            return replace(rel, from_id=b, to_id=a)
    except ValueError:
        pass  # malformed ids surface via validate_catalog instead
    return rel


def _build_catalog(raw: dict, prompt_overrides: dict[str, str] | None = None) -> Catalog:
    overrides = prompt_overrides or {}
    perspectives = tuple(
        Perspective(p["id"], p["display_name"], p["color"], p["description"])
        for p in raw.get("perspectives", ())
    )
    roles = tuple(
        StakeholderRole(r["code"], r["display_name"], r["description"])
        for r in raw.get("roles", ())
    )
    tasks = tuple(
        Task(
            t["id"],
            t["perspective"],
            t["name"],
            t["description"],
            tuple(sorted(t["suggested_roles"])),
            tuple(t["concern_ids"]),
        )
        for t in raw.get("tasks", ())
    )
    concerns = tuple(
        Concern(
            c["id"],
            c["name"],
            overrides.get(c["id"]) or c.get("prompt") or default_prompt(c["description"]),
            c["description"],
            bool(c.get("experimental", False)),
        )
        for c in raw.get("concerns", ())
    )
    relationships = tuple(
        _canonical_trade_off(
            Relationship(
                r["from"],
                r["to"],
                r["kind"],
                r.get("rationale", ""),
                r.get("provenance", "extension"),
            )
        )
        for r in raw.get("relationships", ())
    )
    return Catalog(
        version=int(raw.get("version", 1)),
        perspectives=perspectives,
        roles=roles,
        tasks=tasks,
        concerns=concerns,
        relationships=relationships,
        mapping_provenance=raw.get("mapping_provenance", "extension"),
    )


def _read_default_raw() -> dict:
    data = resources.files("perspecml").joinpath("data/catalog.json").read_text("utf-8")
    return json.loads(data)


def _parse_overlay_json(text: str) -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(
            "E-CAT-PARSE",
            f"overlay parse error at {exc.lineno}:{exc.colno}: {exc.msg}",
        ) from exc
    if not isinstance(raw, dict):
        raise CatalogError("E-CAT-PARSE", "overlay must be a JSON object")
    return raw


def _merge_overlay(base: dict, overlay: dict) -> dict:
    """Merge overlay into the raw catalog dict.

    perspectives/roles/tasks: replace-by-id (new role/task ids are added);
    concerns: additive only, an existing id is a conflict;
    relationships: additive, provenance forced to "extension";
    prompts: {"<concern-id>": "text"} replace-by-id.
    """
    merged = json.loads(json.dumps(base))  # deep copy, JSON-shaped by construction

    known_cids = {c["id"] for c in merged.get("concerns", ())}

    for section in ("perspectives", "roles", "tasks"):
        items = overlay.get(section)
        if items is None:
            continue
        id_key = "code" if section == "roles" else "id"
        by_id = {item[id_key]: i for i, item in enumerate(merged.get(section, []))}
        for item in items:
            key = item.get(id_key)
            if key is None:
                raise CatalogError("E-CAT-PARSE", f"overlay {section} entry missing {id_key!r}")
            if section == "perspectives" and key not in by_id:
                raise CatalogError("E-CAT-REF", f"overlay references unknown perspective {key!r}")
            if key in by_id:
                merged[section][by_id[key]] = item
            else:
                merged[section].append(item)

    for item in overlay.get("concerns", ()) or ():
        cid = item.get("id")
        if cid is None:
            raise CatalogError("E-CAT-PARSE", "overlay concern entry missing 'id'")
        if cid in known_cids:
            raise CatalogError("E-CAT-DUP", f"overlay declares concern {cid!r} which already exists")
        merged["concerns"].append(item)
        known_cids.add(cid)

    existing_edges = {
        (r["from"], r["to"], r["kind"]) for r in merged.get("relationships", ())
    }
    for item in overlay.get("relationships", ()) or ():
        for field in ("from", "to", "kind"):
            if field not in item:
                raise CatalogError("E-CAT-PARSE", f"overlay relationship missing {field!r}")
        for endpoint in (item["from"], item["to"]):
            if endpoint not in known_cids:
                raise CatalogError("E-CAT-REF", f"overlay relationship references unknown concern {endpoint!r}")
        edge = dict(item)
        edge["provenance"] = "extension"
        key = _edge_key(edge)
        if key in existing_edges:
            raise CatalogError("E-CAT-DUP", f"overlay duplicates relationship {key}")
        existing_edges.add(key)
        merged["relationships"].append(edge)

    prompts = overlay.get("prompts")
    if prompts:
        if not isinstance(prompts, dict):
            raise CatalogError("E-CAT-PARSE", "overlay 'prompts' must map concern ids to text")
        for cid in prompts:
            if cid not in known_cids:
                raise CatalogError("E-CAT-REF", f"overlay prompt references unknown concern {cid!r}")
        merged["_prompt_overrides"] = prompts

    return merged


def _edge_key(edge: dict) -> tuple[str, str, str]:
    a, b, kind = edge["from"], edge["to"], edge["kind"]
    if kind == "trade_off" and parse_concern_id(a) and parse_concern_id(b):
        if concern_sort_key(b) < concern_sort_key(a):
            a, b = b, a
    return (a, b, kind)


def load_catalog(overlay: str | Path | None = None) -> Catalog:
    """Load the bundled default catalog, optionally merged with an overlay.

    The overlay argument may be a path to an overlay file or overlay JSON
    text itself. Overlay relationships always get provenance "extension".
    The merged result is re-validated; any integrity finding aborts the load.
    """
    raw = _read_default_raw()
    if overlay is not None:
        if isinstance(overlay, Path) or (isinstance(overlay, str) and not overlay.lstrip().startswith("{")):
            text = Path(overlay).read_text("utf-8")
        else:
            text = overlay
        raw = _merge_overlay(raw, _parse_overlay_json(text))
    catalog = _build_catalog(raw, raw.get("_prompt_overrides"))
    findings = validate_catalog(catalog)
    if has_errors(findings):
        raise CatalogError(
            "E-CAT-INVALID",
            "catalog failed integrity validation: " + "; ".join(f.message for f in findings[:5]),
            findings,
        )
    return catalog


def validate_catalog(catalog: Catalog) -> list[Finding]:
    """Every integrity violation in the catalog; empty iff well-formed."""
    findings: list[Finding] = []

    def bad(code: str, message: str, concern: str | None = None) -> None:
        findings.append(Finding(code=code, message=message, concern=concern))

    for label, ids in (
        ("perspective", [p.id for p in catalog.perspectives]),
        ("role", [r.code for r in catalog.roles]),
        ("task", [t.id for t in catalog.tasks]),
        ("concern", [c.id for c in catalog.concerns]),
    ):
        seen: set[str] = set()
        for item_id in ids:
            if item_id in seen:
                bad("E-CAT-DUP", f"duplicate {label} id {item_id!r}")
            seen.add(item_id)

    for p in catalog.perspectives:
        if p.id not in PERSPECTIVE_ORDER:
            bad("E-CAT-ID", f"unknown perspective id {p.id!r}")
    known_pids = {p.id for p in catalog.perspectives}
    for pid in PERSPECTIVE_ORDER:
        if pid not in known_pids:
            bad("E-CAT-GAP", f"perspective {pid!r} is missing from the catalog")

    colors: dict[str, str] = {}
    for p in catalog.perspectives:
        if p.color in colors:
            bad("E-CAT-COLOR", f"perspectives {colors[p.color]!r} and {p.id!r} share color {p.color}")
        colors[p.color] = p.id

    concern_ids = {c.id for c in catalog.concerns}
    role_codes = set(catalog.role_codes())

    for c in catalog.concerns:
        parsed = parse_concern_id(c.id)
        if parsed is None or parsed[0] not in PREFIX_TO_PERSPECTIVE:
            bad("E-CAT-ID", f"concern id {c.id!r} is not letter-prefix + positive number", c.id)

    # Numbering within each perspective must be contiguous from 1.
    for pid in PERSPECTIVE_ORDER:
        numbers = sorted(
            parse_concern_id(c.id)[1]
            for c in catalog.concerns
            if parse_concern_id(c.id) and c.perspective == pid
        )
        if not numbers:
            continue
        expected = numbers[-1]
        if numbers != list(range(1, expected + 1)):
            missing = sorted(set(range(1, expected + 1)) - set(numbers))
            prefix = next(k for k, v in PREFIX_TO_PERSPECTIVE.items() if v == pid)
            bad(
                "E-CAT-GAP",
                f"perspective {pid} expects {expected} concerns, found {len(numbers)}"
                f" (missing {', '.join(prefix + str(n) for n in missing)})",
            )

    owned: set[str] = set()
    for t in catalog.tasks:
        if t.perspective not in known_pids:
            bad("E-CAT-REF", f"task {t.id} references unknown perspective {t.perspective!r}")
        if not t.suggested_roles:
            bad("E-CAT-ROLES", f"task {t.id} has no suggested roles")
        for code in t.suggested_roles:
            if code not in role_codes:
                bad("E-CAT-REF", f"task {t.id} references unknown role {code!r}")
        if not t.concern_ids:
            bad("E-CAT-REF", f"task {t.id} lists no concerns")
        for cid in t.concern_ids:
            if cid not in concern_ids:
                bad("E-CAT-REF", f"task {t.id} references unknown concern {cid!r}", cid)
            elif perspective_of(cid) != t.perspective:
                bad(
                    "E-CAT-PERSPECTIVE",
                    f"task {t.id} ({t.perspective}) lists concern {cid} of perspective {perspective_of(cid)}",
                    cid,
                )
            owned.add(cid)

    for c in catalog.concerns:
        if c.id not in owned:
            bad("E-CAT-ORPHAN", f"concern {c.id} is not listed by any task", c.id)

    seen_edges: set[tuple[str, str, str]] = set()
    for r in catalog.relationships:
        if r.kind not in RELATIONSHIP_KINDS:
            bad("E-CAT-ID", f"relationship {r.from_id}->{r.to_id} has unknown kind {r.kind!r}")
        if r.from_id == r.to_id:
            bad("E-CAT-SELF", f"relationship joins {r.from_id} to itself", r.from_id)
        for endpoint in r.endpoints():
            if endpoint not in concern_ids:
                bad("E-CAT-REF", f"relationship endpoint {endpoint!r} is not a catalog concern")
        key = _edge_key({"from": r.from_id, "to": r.to_id, "kind": r.kind})
        if key in seen_edges:
            bad("E-CAT-DUP", f"duplicate relationship {key}")
        seen_edges.add(key)

    return findings


def related_concerns(catalog: Catalog, cid: str) -> list[RelatedConcern]:
    """All relationships touching a concern, paired with the far endpoint.

    Directed edges leaving the concern come back as "out", arriving ones as
    "in"; trade-offs appear from both endpoints as "both". Deterministic
    order: kind, then far-endpoint id.
    """
    index = catalog.concern_index()
    if cid not in index:
        raise CatalogError("E-CAT-UNKNOWN", f"unknown concern id {cid!r}")
    out: list[RelatedConcern] = []
    for rel in catalog.relationships:
        if cid not in rel.endpoints():
            continue
        far = rel.to_id if rel.from_id == cid else rel.from_id
        if rel.kind == "trade_off":
            direction = "both"
        else:
            direction = "out" if rel.from_id == cid else "in"
        out.append(RelatedConcern(rel, index[far], direction))
    out.sort(key=lambda rc: (rc.relationship.kind, concern_sort_key(rc.concern.id)))
    return out


def flow_order(catalog: Catalog) -> list[str]:
    """All concern ids in analysis order: perspective order, then number."""
    order: list[str] = []
    for pid in PERSPECTIVE_ORDER:
        order.extend(
            c.id for c in sorted(catalog.concerns_of(pid), key=lambda c: concern_sort_key(c.id))
        )
    return order


def flow_index(catalog: Catalog) -> dict[str, int]:
    return {cid: i for i, cid in enumerate(flow_order(catalog))}
