"""Command line entry point: the `perspecml` tool.

Exit status contract: 0 success (warnings allowed unless --strict),
1 error-level findings, 2 usage or I/O problems. With --format json every
subcommand prints a single JSON object on stdout, error paths included.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis, catalog as cat, render, session as ses, specformat
from .diagnostics import Finding, PerspecmlError, has_errors

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2


class _Output:
    def __init__(self, fmt: str):
        self.fmt = fmt

    def emit(self, payload: dict, text_lines: list[str]) -> None:
        if self.fmt == "json":
            print(json.dumps(payload, ensure_ascii=False, indent=2))
        else:
            for line in text_lines:
                print(line)

    def fail(self, message: str, code: str = "E-CLI") -> int:
        if self.fmt == "json":
            print(json.dumps({"error": {"code": code, "message": message}}))
        else:
            print(f"error: {message}", file=sys.stderr)
        return EXIT_USAGE


def _load_catalog(args) -> cat.Catalog:
    return cat.load_catalog(Path(args.catalog_overlay)) if args.catalog_overlay else cat.load_catalog()


def _read_file(path: str, out: _Output) -> str | None:
    try:
        return Path(path).read_text("utf-8")
    except OSError as exc:
        out.fail(f"cannot read {path}: {exc.strerror or exc}")
        return None


def _findings_payload(findings: list[Finding]) -> list[dict]:
    return [f.to_dict() for f in findings]


def _coverage_lines(report: analysis.CoverageReport) -> list[str]:
    lines = [f"addressed {report.addressed}/{report.total} ({report.applicable} applicable)"]
    for p in report.per_perspective:
        missing = f" missing: {', '.join(p.unaddressed)}" if p.unaddressed else ""
        lines.append(f"  {p.perspective}: {p.addressed}/{p.total}{missing}")
    return lines


def _exit_for(findings: list[Finding], strict: bool) -> int:
    if has_errors(findings):
        return EXIT_FINDINGS
    if strict and any(f.severity == "warning" for f in findings):
        return EXIT_FINDINGS
    return EXIT_OK


# --- subcommands ------------------------------------------------------------

def cmd_init(args, out: _Output) -> int:
    catalog = _load_catalog(args)
    name = args.project
    target = Path(args.output) if args.output else Path(f"{name}.psml")
    lines = ["perspecml 1", f'project "{name}"']
    for pid in cat.PERSPECTIVE_ORDER:
        lines.append("")
        lines.append(f"[{pid}]")
        for concern in sorted(catalog.concerns_of(pid), key=lambda c: cat.concern_sort_key(c.id)):
            lines.append(f'  # {concern.id} essential {{ spec: "" }}  # {concern.name}')
    try:
        target.write_text("\n".join(lines) + "\n", "utf-8")
    except OSError as exc:
        return out.fail(f"cannot write {target}: {exc.strerror or exc}")
    out.emit({"written": str(target)}, [f"wrote {target}"])
    return EXIT_OK


def cmd_check(args, out: _Output) -> int:
    catalog = _load_catalog(args)
    text = _read_file(args.file, out)
    if text is None:
        return EXIT_USAGE
    result = specformat.parse_spec(text, catalog)
    if not result.ok:
        out.emit(
            {"findings": _findings_payload(result.findings), "coverage": None},
            [f.render_text() for f in result.findings],
        )
        return EXIT_FINDINGS
    findings = analysis.check(catalog, result.document)
    report = analysis.coverage(catalog, result.document)
    out.emit(
        {"findings": _findings_payload(findings), "coverage": report.to_dict()},
        [f.render_text() for f in findings] + _coverage_lines(report),
    )
    return _exit_for(findings, args.strict)


def cmd_report(args, out: _Output) -> int:
    catalog = _load_catalog(args)
    text = _read_file(args.file, out)
    if text is None:
        return EXIT_USAGE
    result = specformat.parse_spec(text, catalog)
    if not result.ok:
        out.emit(
            {"findings": _findings_payload(result.findings)},
            [f.render_text() for f in result.findings],
        )
        return EXIT_FINDINGS
    ordered = analysis.prioritize(catalog, result.document)
    index = catalog.concern_index()
    payload = [
        {
            "concern": e.concern,
            "name": index[e.concern].name,
            "relevance": e.relevance,
            "spec": e.spec_text,
            "by": list(e.by),
        }
        for e in ordered
    ]
    lines = [
        f"{i}. [{e.relevance}] {e.concern} {index[e.concern].name}"
        + (f": {e.spec_text}" if e.spec_text else "")
        for i, e in enumerate(ordered, start=1)
    ]
    out.emit({"prioritized": payload}, lines or ["no applicable entries"])
    return EXIT_OK


def _load_optional_doc(args, catalog: cat.Catalog, out: _Output):
    """(document, exit code) for the --spec flag; document may be None."""
    if not args.spec:
        return None, EXIT_OK
    text = _read_file(args.spec, out)
    if text is None:
        return None, EXIT_USAGE
    result = specformat.parse_spec(text, catalog)
    if not result.ok:
        out.emit(
            {"findings": _findings_payload(result.findings)},
            [f.render_text() for f in result.findings],
        )
        return None, EXIT_FINDINGS
    return result.document, EXIT_OK


def _write_or_print(text: str, output: str | None, out: _Output, label: str) -> int:
    if output:
        try:
            Path(output).write_text(text, "utf-8")
        except OSError as exc:
            return out.fail(f"cannot write {output}: {exc.strerror or exc}")
        out.emit({"written": output}, [f"wrote {output}"])
    else:
        if out.fmt == "json":
            print(json.dumps({label: text}, ensure_ascii=False))
        else:
            print(text, end="")
    return EXIT_OK


def cmd_diagram(args, out: _Output) -> int:
    catalog = _load_catalog(args)
    doc, code = _load_optional_doc(args, catalog, out)
    if code != EXIT_OK:
        return code
    text = render.render_diagram(
        catalog,
        render.DiagramOptions(include_relationships=not args.no_relationships, overlay=doc),
    )
    return _write_or_print(text, args.output, out, "dot")


def cmd_template(args, out: _Output) -> int:
    catalog = _load_catalog(args)
    doc, code = _load_optional_doc(args, catalog, out)
    if code != EXIT_OK:
        return code
    text = render.render_template(catalog, doc)
    return _write_or_print(text, args.output, out, "markdown")


def _print_prompt(prompt: ses.Prompt) -> None:
    task = f" / {prompt.task.name}" if prompt.task else ""
    roles = ", ".join(prompt.task.suggested_roles) if prompt.task else ""
    flags = " [experimental]" if prompt.experimental else ""
    print(f"[{prompt.position}/{prompt.total}] pass {prompt.pass_no}: "
          f"{prompt.concern.id} {prompt.concern.name}{flags} "
          f"({prompt.perspective.display_name}{task}; roles {roles})")
    print(f"  {prompt.concern.prompt}")
    for rs in prompt.related:
        rel = rs.related
        arrow = {"out": "->", "in": "<-", "both": "<->"}[rel.direction]
        print(f"  related: {arrow} {rel.concern.id} {rel.concern.name} "
              f"({rel.relationship.kind}, {rs.status})")


def cmd_session(args, out: _Output) -> int:
    catalog = _load_catalog(args)
    path = Path(args.logfile)

    if path.exists():
        try:
            session = ses.load_session(catalog, path)
        except PerspecmlError as exc:
            return out.fail(exc.message, exc.code)
    else:
        session = ses.start_session(catalog, project=path.stem, session_id=path.stem)
        ses.append_events(path, list(session.log))

    if args.export:
        doc = ses.export_spec(session)
        try:
            Path(args.export).write_text(specformat.serialize_spec(doc), "utf-8")
        except OSError as exc:
            return out.fail(f"cannot write {args.export}: {exc.strerror or exc}")
        out.emit({"written": args.export, "entries": len(doc.entries)},
                 [f"wrote {args.export} ({len(doc.entries)} entries)"])
        return EXIT_OK

    report = analysis.coverage(catalog, ses.export_spec(session))
    print(f"session {session.id} (pass {session.pass_no}, "
          f"{report.addressed}/{report.total} addressed)")

    while True:
        prompt = ses.next_prompt(catalog, session)
        if prompt is None:
            print("session complete")
            break
        _print_prompt(prompt)
        try:
            line = input("> ").strip()
        except EOFError:
            break
        if not line or line in ("q", "quit"):
            break
        try:
            decision = _parse_decision_line(line)
        except ValueError as exc:
            print(f"  ? {exc}")
            continue
        try:
            before = session
            session = ses.submit_decision(catalog, session, prompt.concern.id, decision)
            ses.append_events(path, list(session.log[len(before.log):]))
        except PerspecmlError as exc:
            print(f"  ! {exc.code}: {exc.message}")
    return EXIT_OK


def _parse_decision_line(line: str) -> ses.Decision:
    """Tiny decision syntax for stdin sessions.

    a <relevance> <spec text...>   applicable
    n [reason...]                  not applicable
    s                              skip
    """
    parts = line.split(maxsplit=1)
    verb = parts[0]
    rest = parts[1] if len(parts) > 1 else ""
    if verb in ("s", "skip"):
        return ses.Decision(kind="skip")
    if verb in ("n", "n/a"):
        return ses.Decision(kind="not_applicable", reason=rest or None)
    if verb in ("a", "applicable"):
        sub = rest.split(maxsplit=1)
        if not sub or sub[0] not in specformat.RELEVANCES:
            raise ValueError("usage: a <desirable|important|essential> <spec text>")
        return ses.Decision(
            kind="applicable",
            relevance=sub[0],
            spec_text=sub[1] if len(sub) > 1 else "",
        )
    raise ValueError("commands: a <relevance> <text> | n [reason] | s | q")


def cmd_serve(args, out: _Output) -> int:
    from . import server

    try:
        server.serve(bind=args.bind, data_dir=args.data, static_dir=args.static)
    except PerspecmlError as exc:
        return out.fail(exc.message, exc.code)
    except (OSError, SystemExit) as exc:
        return out.fail(f"server failed to start: {exc}", "E-SRV-BIND")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perspecml",
        description="Perspective-based specification toolkit for ML-enabled systems",
    )
    parser.add_argument("--catalog-overlay", metavar="FILE", help="catalog overlay JSON")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--strict", action="store_true", help="warnings also fail")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="write a skeleton .psml for a project")
    p.add_argument("project")
    p.add_argument("-o", "--output", help="target file (default <project>.psml)")
    p.set_defaults(fn=cmd_init)

    p = sub.add_parser("check", help="findings and coverage for a .psml file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("report", help="prioritized applicable concerns")
    p.add_argument("file")
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("diagram", help="task-and-concern diagram as DOT")
    p.add_argument("--spec", help=".psml file to overlay")
    p.add_argument("--no-relationships", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_diagram)

    p = sub.add_parser("template", help="specification template as Markdown")
    p.add_argument("--spec", help=".psml file to fill in")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_template)

    p = sub.add_parser("session", help="run or resume a guided session")
    p.add_argument("logfile", help="session log (created when missing)")
    p.add_argument("--export", metavar="FILE", help="write the current document and exit")
    p.set_defaults(fn=cmd_session)

    p = sub.add_parser("serve", help="run the HTTP service and web board")
    p.add_argument("--bind", default="127.0.0.1:8765")
    p.add_argument("--data", help="data directory (default ./perspecml-data)")
    p.add_argument("--static", help="web board asset directory")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Output(args.format)
    try:
        return args.fn(args, out)
    except PerspecmlError as exc:
        return out.fail(exc.message, exc.code)


if __name__ == "__main__":
    sys.exit(main())
