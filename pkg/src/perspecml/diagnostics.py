"""Diagnostics shared by every analysis surface: findings, spans, and errors.

A Finding is a non-fatal diagnostic (catalog integrity check, parse error,
semantic warning). A PerspecmlError is a fatal condition carrying a stable
code, raised where the caller cannot reasonably continue (unknown ids,
merge conflicts, session order violations).

Code index
----------
Catalog:    E-CAT-DUP, E-CAT-REF, E-CAT-UNKNOWN, E-CAT-ID, E-CAT-PERSPECTIVE,
            E-CAT-ORPHAN, E-CAT-ROLES, E-CAT-COLOR, E-CAT-GAP, E-CAT-SELF,
            E-CAT-PARSE, E-CAT-INVALID
Parsing:    E001 unknown concern id, E002 concern in wrong perspective block,
            E003 duplicate entry, E004 malformed header/relevance/attribute,
            E005 JSON schema violation
Analysis:   W101 applicable entry without specification text,
            W102 related concern left unaddressed,
            W103 n/a without reason on a dependency target,
            W104 trade-off pair both essential,
            I201 experimental concern already approved
Rendering:  E-REN-OVERLAY, E-REN-KIND
Sessions:   E-SES-SEED, E-SES-ORDER, E-SES-DEC, E-SES-REV, E-SES-LOG
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    """Position range in source text, 1-based lines and columns."""

    line: int
    col: int
    end_line: int | None = None
    end_col: int | None = None

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def severity_for_code(code: str) -> str:
    if code.startswith(("E", "E-")):
        return "error"
    if code.startswith("W"):
        return "warning"
    if code.startswith("I"):
        return "info"
    raise ValueError(f"cannot derive severity from code {code!r}")


_SEVERITY_RANK = {"error": 0, "warning": 1, "info": 2}


@dataclass(frozen=True)
class Finding:
    """One diagnostic: stable code, derived severity, optional anchor."""

    code: str
    message: str
    concern: str | None = None
    span: Span | None = None

    def __post_init__(self) -> None:
        if not self.message:
            raise ValueError("finding message must be non-empty")

    @property
    def severity(self) -> str:
        return severity_for_code(self.code)

    def render_text(self) -> str:
        concern = self.concern or "-"
        pos = str(self.span) if self.span else "-"
        return f"{self.code} {self.severity} {concern} {pos} {self.message}"

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "concern": self.concern,
            "line": self.span.line if self.span else None,
            "col": self.span.col if self.span else None,
            "message": self.message,
        }


def sort_findings(findings: list[Finding], flow_index: dict[str, int] | None = None) -> list[Finding]:
    """Deterministic order: severity, then concern flow position, then code."""

    def key(f: Finding):
        if f.concern is None:
            concern_key = (-1, "")
        elif flow_index is not None and f.concern in flow_index:
            concern_key = (flow_index[f.concern], f.concern)
        else:
            concern_key = (10**6, f.concern)
        line = f.span.line if f.span else 0
        return (_SEVERITY_RANK[f.severity], concern_key, f.code, line, f.message)

    return sorted(findings, key=key)


def has_errors(findings: list[Finding]) -> bool:
    return any(f.severity == "error" for f in findings)


class PerspecmlError(Exception):
    """Fatal condition with a stable code; findings carry extra detail."""

    def __init__(self, code: str, message: str, findings: list[Finding] | None = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.findings = list(findings or [])


class CatalogError(PerspecmlError):
    pass


class RenderError(PerspecmlError):
    pass


class SessionError(PerspecmlError):
    pass
