"""perspecml: perspective-based specification toolkit for ML-enabled systems.

The package ships the method itself as data (a catalog of perspectives,
tasks, concerns, stakeholders and relationships), a textual specification
language (.psml) with a recovering parser and canonical serializer, a
semantic analyzer with coverage and relationship diagnostics, DOT and
Markdown generators, a guided elicitation session engine, and an HTTP
service for the web board.
"""

from .analysis import CoverageReport, check, coverage, diff, prioritize
from .catalog import (
    Catalog,
    Concern,
    Perspective,
    Relationship,
    StakeholderRole,
    Task,
    flow_order,
    load_catalog,
    related_concerns,
    validate_catalog,
)
from .diagnostics import Finding, PerspecmlError, Span
from .render import DiagramOptions, render_diagram, render_template
from .session import Decision, Session, export_spec, next_prompt, revisit, start_session, submit_decision
from .specformat import ConcernEntry, SpecDocument, from_json, parse_spec, serialize_spec, to_json

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "Concern",
    "ConcernEntry",
    "CoverageReport",
    "Decision",
    "DiagramOptions",
    "Finding",
    "Perspective",
    "PerspecmlError",
    "Relationship",
    "Session",
    "Span",
    "SpecDocument",
    "StakeholderRole",
    "Task",
    "check",
    "coverage",
    "diff",
    "export_spec",
    "flow_order",
    "from_json",
    "load_catalog",
    "next_prompt",
    "parse_spec",
    "prioritize",
    "related_concerns",
    "render_diagram",
    "render_template",
    "revisit",
    "serialize_spec",
    "start_session",
    "submit_decision",
    "to_json",
    "validate_catalog",
    "__version__",
]
