"""Deterministic generators for the two documentation artifacts.

render_diagram produces Graphviz DOT: one colored cluster per perspective,
one record node per task (roles top left, task name top right, concerns
along the bottom), and labeled relationship edges between concern ports.

render_template produces the Markdown specification template: one section
per perspective in flow order, one subsection per task, and one table row
per concern. Both outputs are byte-deterministic for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import catalog as cat
from .diagnostics import RenderError
from .specformat import ConcernEntry, SpecDocument

_EDGE_STYLE = {
    "influences": "",
    "depends_on": ", style=dashed",
    "trade_off": ", dir=none, style=dotted",
}


@dataclass(frozen=True)
class DiagramOptions:
    include_relationships: bool = True
    overlay: SpecDocument | None = None
    palette: dict[str, str] | None = None


def _record_escape(text: str) -> str:
    out = []
    for ch in text:
        if ch in '\\{}|<>"':
            out.append("\\" + ch)
        else:
            out.append(ch)
    return "".join(out)


def _concern_cell(concern: cat.Concern, entry: ConcernEntry | None) -> str:
    label = f"{concern.id} {concern.name}"
    if entry is not None:
        label += f" [{entry.relevance}]" if entry.applicable else " [n/a]"
    return f"<{concern.id}> {_record_escape(label)}"


def render_diagram(catalog: cat.Catalog, opts: DiagramOptions | None = None) -> str:
    """The perspective/task/concern diagram as DOT text."""
    opts = opts or DiagramOptions()
    entry_map: dict[str, ConcernEntry] = {}
    if opts.overlay is not None:
        unknown = [e.concern for e in opts.overlay.entries if e.concern not in catalog.concern_index()]
        if unknown:
            raise RenderError("E-REN-OVERLAY", f"overlay entry {unknown[0]} is not in the catalog")
        entry_map = opts.overlay.entry_map()
    palette = {p.id: p.color for p in catalog.perspectives}
    if opts.palette:
        palette.update(opts.palette)

    index = catalog.concern_index()
    task_of = {cid: t.id for t in reversed(catalog.tasks) for cid in t.concern_ids}

    lines = ["digraph perspecml {"]
    lines.append("  // perspective color legend:")
    for pid in cat.PERSPECTIVE_ORDER:
        p = catalog.perspective(pid)
        lines.append(f"  //   {pid}: {palette[pid]} ({p.display_name})")
    lines.append('  graph [fontname="Helvetica", compound=true];')
    lines.append('  node [shape=record, style=filled, fillcolor=white, fontname="Helvetica"];')
    lines.append('  edge [fontname="Helvetica", fontsize=10];')

    for pid in cat.PERSPECTIVE_ORDER:
        p = catalog.perspective(pid)
        lines.append(f"  subgraph cluster_{pid} {{")
        lines.append(f'    label="{p.display_name}";')
        lines.append("    style=filled;")
        lines.append(f'    fillcolor="{palette[pid]}";')
        for task in catalog.tasks_of(pid):
            roles = " ".join(task.suggested_roles)
            top = f"{{{_record_escape(roles)}|{_record_escape(task.name)}}}"
            cells = "|".join(
                _concern_cell(index[cid], entry_map.get(cid)) for cid in task.concern_ids if cid in index
            )
            lines.append(f'    "{task.id}" [label="{{{top}|{{{cells}}}}}"];')
        lines.append("  }")

    if opts.include_relationships:
        edges = sorted(
            catalog.relationships,
            key=lambda r: (r.kind, cat.concern_sort_key(r.from_id), cat.concern_sort_key(r.to_id)),
        )
        for rel in edges:
            src, dst = task_of.get(rel.from_id), task_of.get(rel.to_id)
            if src is None or dst is None:
                continue
            label = rel.kind.replace("_", "-")
            lines.append(
                f'  "{src}":{rel.from_id} -> "{dst}":{rel.to_id}'
                f' [label="{label}"{_EDGE_STYLE[rel.kind]}];'
            )

    lines.append("}")
    return "\n".join(lines) + "\n"


def _md_escape(text: str) -> str:
    return text.replace("|", "\\|").replace("\n", "<br>")


def render_template(catalog: cat.Catalog, doc: SpecDocument | None = None) -> str:
    """The specification template as Markdown, optionally filled in."""
    entry_map = doc.entry_map() if doc is not None else {}
    title = doc.project_name if doc is not None and doc.project_name else "Specification template"
    index = catalog.concern_index()

    lines = [f"# {title}", ""]
    for pid in cat.PERSPECTIVE_ORDER:
        p = catalog.perspective(pid)
        lines.append(f"## {p.display_name}")
        lines.append("")
        lines.append(p.description)
        lines.append("")
        for task in catalog.tasks_of(pid):
            lines.append(f"### {task.name}")
            lines.append("")
            lines.append(f"Suggested roles: {', '.join(task.suggested_roles)}")
            lines.append("")
            lines.append("| Id | Prompt | E | Relevance | Specification | Stakeholders |")
            lines.append("| --- | --- | --- | --- | --- | --- |")
            for cid in task.concern_ids:
                concern = index[cid]
                marker = "E" if concern.experimental else ""
                entry = entry_map.get(cid)
                if entry is None:
                    relevance, spec_text, stakeholders = "", "", ""
                elif entry.applicable:
                    relevance = entry.relevance or ""
                    if entry.experimental_override:
                        marker = "E"
                    spec_text = _md_escape(entry.spec_text)
                    stakeholders = ", ".join(entry.by)
                else:
                    relevance = "n/a"
                    spec_text = _md_escape(entry.reason) if entry.reason else ""
                    stakeholders = ""
                lines.append(
                    f"| {cid} | {_md_escape(concern.prompt)} | {marker} |"
                    f" {relevance} | {spec_text} | {stakeholders} |"
                )
            lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"
