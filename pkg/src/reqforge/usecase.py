"""Minimal parser for the textual use-case-diagram notation.

Requirements models embed one fenced ``plantuml`` block per diagram. Each
block must parse under this grammar (a small, PlantUML-compatible subset):

    @startuml
    ' comment
    left to right direction
    title Policy Management
    actor "Insurance Agent" as agent
    actor Admin
    usecase "Create Policy" as UC1
    agent --> UC1
    UC1 ..> UC2 : <<include>>
    @enduml

Statements: actor/usecase declarations, associations between declared
names, optional direction and title lines, comments, blank lines.
Anything else is a parse error carrying the offending line number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ReqForgeError

__all__ = [
    "DiagramParseError",
    "Association",
    "UseCaseDiagram",
    "parse_diagram",
    "extract_diagram_blocks",
    "validate_requirements_model",
]


class DiagramParseError(ReqForgeError):
    def __init__(self, message: str, line_no: int | None = None):
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(prefix + message)
        self.line_no = line_no


@dataclass(frozen=True)
class Association:
    source: str
    target: str
    arrow: str
    label: str | None = None


@dataclass
class UseCaseDiagram:
    title: str | None = None
    actors: dict[str, str] = field(default_factory=dict)  # alias -> display name
    usecases: dict[str, str] = field(default_factory=dict)
    associations: list[Association] = field(default_factory=list)


_QUOTED_DECL = re.compile(r'^(actor|usecase)\s+"([^"]+)"\s+as\s+(\w+)\s*$')
_ALIAS_DECL = re.compile(r"^(actor|usecase)\s+(\w+)\s+as\s+(\w+)\s*$")
_BARE_DECL = re.compile(r"^(actor|usecase)\s+(\w+)\s*$")
_ASSOC = re.compile(r"^(\w+)\s+(-->|--|\.\.>)\s+(\w+)(?:\s*:\s*(.+?))?\s*$")
_DIRECTION = re.compile(r"^(left to right|top to bottom)\s+direction$")
_TITLE = re.compile(r"^title\s+(.+)$")


def parse_diagram(text: str) -> UseCaseDiagram:
    """Parse one diagram block (with or without the @startuml fence lines)."""
    diagram = UseCaseDiagram()
    lines = text.splitlines()
    in_block = False
    saw_start = False
    for idx, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("'"):
            continue
        if line == "@startuml":
            if saw_start:
                raise DiagramParseError("nested @startuml", idx)
            saw_start = in_block = True
            continue
        if line == "@enduml":
            if not in_block:
                raise DiagramParseError("@enduml without @startuml", idx)
            in_block = False
            continue
        if saw_start and not in_block:
            raise DiagramParseError("statement after @enduml", idx)

        m = _QUOTED_DECL.match(line) or _ALIAS_DECL.match(line)
        if m:
            table = diagram.actors if m.group(1) == "actor" else diagram.usecases
            table[m.group(3)] = m.group(2)
            continue
        m = _BARE_DECL.match(line)
        if m:
            table = diagram.actors if m.group(1) == "actor" else diagram.usecases
            table[m.group(2)] = m.group(2)
            continue
        m = _ASSOC.match(line)
        if m:
            source, arrow, target, label = m.group(1), m.group(2), m.group(3), m.group(4)
            for name in (source, target):
                if name not in diagram.actors and name not in diagram.usecases:
                    raise DiagramParseError(f"association references undeclared name {name!r}", idx)
            diagram.associations.append(Association(source, target, arrow, label))
            continue
        m = _DIRECTION.match(line)
        if m:
            continue
        m = _TITLE.match(line)
        if m:
            diagram.title = m.group(1).strip()
            continue
        raise DiagramParseError(f"unrecognized statement {line!r}", idx)

    if saw_start and in_block:
        raise DiagramParseError("missing @enduml")
    if not diagram.actors:
        raise DiagramParseError("diagram declares no actor")
    if not diagram.usecases:
        raise DiagramParseError("diagram declares no use case")
    return diagram


_FENCE = re.compile(r"^```plantuml\s*$")
_FENCE_END = re.compile(r"^```\s*$")


def extract_diagram_blocks(markdown: str) -> list[str]:
    """Return the body of every ```plantuml fenced block, in order."""
    blocks: list[str] = []
    current: list[str] | None = None
    for line in markdown.splitlines():
        if current is None:
            if _FENCE.match(line):
                current = []
        elif _FENCE_END.match(line):
            blocks.append("\n".join(current))
            current = None
        else:
            current.append(line)
    return blocks


def validate_requirements_model(markdown: str, expected_blocks: int | None = None) -> list[str]:
    """Validate an RM body. Returns a list of problems (empty = valid)."""
    problems: list[str] = []
    blocks = extract_diagram_blocks(markdown)
    if not blocks:
        problems.append("no fenced plantuml diagram blocks found")
    if expected_blocks is not None and len(blocks) != expected_blocks:
        problems.append(f"expected {expected_blocks} diagram blocks, found {len(blocks)}")
    for i, block in enumerate(blocks, start=1):
        try:
            parse_diagram(block)
        except DiagramParseError as exc:
            problems.append(f"diagram {i}: {exc}")
    return problems
