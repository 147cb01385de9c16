"""Shared test machinery: seeded random documents and text mutations.

Everything takes an explicit random.Random so failures reproduce exactly.
"""

from __future__ import annotations

import random
import re

from perspecml import catalog as cat
from perspecml.specformat import (
    RELEVANCES,
    STATUSES,
    ConcernEntry,
    SpecDocument,
    serialize_spec,
)

# Deliberately nasty: quotes, backslashes, newlines, tabs, comment and
# block characters, non-ASCII.
TEXT_ALPHABET = 'abcdef XYZ 019_.,;:!?()' + '"\\\n\t#{}[]' + "≥éµ中'"


def rand_text(rng: random.Random, max_len: int = 36) -> str:
    return "".join(rng.choice(TEXT_ALPHABET) for _ in range(rng.randrange(max_len)))


def random_entry(rng: random.Random, cid: str, roles: tuple[str, ...]) -> ConcernEntry:
    if rng.random() < 0.8:
        by = tuple(sorted(rng.sample(roles, rng.randrange(len(roles) + 1))))
        return ConcernEntry(
            concern=cid,
            applicable=True,
            relevance=rng.choice(RELEVANCES),
            spec_text=rand_text(rng) if rng.random() < 0.85 else "",
            by=by,
            status=rng.choice(STATUSES) if rng.random() < 0.5 else None,
            experimental_override=True if rng.random() < 0.15 else None,
        )
    reason = rand_text(rng) if rng.random() < 0.6 else None
    return ConcernEntry(concern=cid, applicable=False, reason=reason)


def random_document(
    rng: random.Random, catalog: cat.Catalog, min_entries: int = 0, max_entries: int | None = None
) -> SpecDocument:
    flow = cat.flow_order(catalog)
    upper = len(flow) if max_entries is None else max_entries
    n = rng.randrange(min_entries, upper + 1)
    cids = rng.sample(flow, n)
    rng.shuffle(cids)
    roles = catalog.role_codes()
    entries = tuple(random_entry(rng, cid, roles) for cid in cids)
    return SpecDocument(project_name=rand_text(rng, 24), entries=entries)


_ENTRY_LINE_RE = re.compile(r"^  ([A-Z][0-9]+) ")


def entry_lines(text: str) -> list[int]:
    """0-based indexes of canonical entry lines."""
    return [i for i, line in enumerate(text.splitlines()) if _ENTRY_LINE_RE.match(line)]


def seed_mutation(rng: random.Random, catalog: cat.Catalog) -> tuple[str, int, str]:
    """A broken .psml text plus the 1-based line carrying the seeded error.

    Returns (text, line, mutation kind). The document under mutation always
    has at least one entry so every mutation kind is applicable.
    """
    doc = random_document(rng, catalog, min_entries=3, max_entries=45)
    text = serialize_spec(doc)
    lines = text.splitlines()
    candidates = entry_lines(text)
    target = rng.choice(candidates)
    line = lines[target]
    cid = _ENTRY_LINE_RE.match(line).group(1)
    kind = rng.choice(
        ["unknown_id", "wrong_block", "duplicate", "bad_relevance", "bad_header", "bad_word"]
    )

    if kind == "unknown_id":
        lines[target] = line.replace(cid, "Z9", 1)
        expected = target + 1
    elif kind == "wrong_block":
        # Swap the id for one of a different perspective that is unused.
        used = {e.concern for e in doc.entries}
        other = next(
            c for c in cat.flow_order(catalog)
            if c not in used and cat.perspective_of(c) != cat.perspective_of(cid)
        )
        lines[target] = line.replace(cid, other, 1)
        expected = target + 1
    elif kind == "duplicate":
        lines.insert(target + 1, line)
        expected = target + 2
    elif kind == "bad_relevance":
        lines[target] = _ENTRY_LINE_RE.sub(f"  {cid} sometimes ", line, count=1)
        # keep the rest of the line intact only when it was an n/a entry;
        # simplest robust form: rebuild a minimal broken line
        lines[target] = f"  {cid} sometimes"
        expected = target + 1
    elif kind == "bad_header":
        lines[0] = "perspecml one"
        expected = 1
    else:  # bad_word after the id
        lines[target] = f"  {cid} essential wat"
        expected = target + 1

    return "\n".join(lines) + "\n", expected, kind


def w102_oracle(catalog: cat.Catalog, doc: SpecDocument) -> set[tuple[str, str, str, str, str]]:
    """Brute force: every catalog edge with one applicable endpoint and one
    endpoint that has no entry at all. Independent of the analyzer."""
    entry_map = doc.entry_map()
    expected = set()
    for rel in catalog.relationships:
        for x, y in ((rel.from_id, rel.to_id), (rel.to_id, rel.from_id)):
            ex = entry_map.get(x)
            if ex is not None and ex.applicable and y not in entry_map:
                expected.add((rel.from_id, rel.to_id, rel.kind, x, y))
    return expected
