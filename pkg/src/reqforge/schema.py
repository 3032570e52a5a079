"""Per-kind markdown content schemes, validators, and normalizers.

Artifacts are markdown documents with a level-1 title and, for several
kinds, a fixed set of level-2 sections. Validators enforce the heading
lines exactly; section bodies stay free-form. Normalizers perform the
deterministic assembly steps the engine guarantees regardless of backend
text (SRS skeleton, PAR Sources section, OEL notes).
"""

from __future__ import annotations

import re

from .pool import ArtifactKind
from .usecase import validate_requirements_model

__all__ = [
    "DEFAULT_TITLES",
    "REQUIRED_SECTIONS",
    "ensure_title",
    "document_title",
    "get_section",
    "set_section",
    "strip_title",
    "req_ids",
    "sys_entries",
    "check_traceability",
    "validate_classification",
    "validate_content",
    "assemble_srs",
]

DEFAULT_TITLES: dict[ArtifactKind, str] = {
    ArtifactKind.BRIEF_DESCRIPTION: "Brief Description",
    ArtifactKind.PRODUCT_ANALYSIS_REPORT: "Product Analysis Report",
    ArtifactKind.INTERVIEW_QUESTION_LIST: "Interview Question List",
    ArtifactKind.INTERVIEW_RECORD: "Interview Record",
    ArtifactKind.USER_REQUIREMENTS_LIST: "User Requirements List",
    ArtifactKind.CLASSIFICATION_REPORT: "Requirements Classification Report",
    ArtifactKind.OPERATING_ENVIRONMENT_LIST: "Operating Environment List",
    ArtifactKind.SYSTEM_REQUIREMENTS_LIST: "System Requirements List",
    ArtifactKind.REQUIREMENTS_MODEL: "Requirements Model",
    ArtifactKind.SOFTWARE_REQUIREMENTS_SPECIFICATION: "Software Requirements Specification",
    ArtifactKind.REVIEW_COMMENTS: "Review Comments",
    ArtifactKind.VALIDATION_REPORT: "Validation Report",
    ArtifactKind.DIALOGUE_TRANSCRIPT: "Dialogue Transcript",
}

# fixed level-2 section sets, enforced on heading lines exactly
REQUIRED_SECTIONS: dict[ArtifactKind, tuple[str, ...]] = {
    ArtifactKind.PRODUCT_ANALYSIS_REPORT: (
        "Background",
        "Related Products",
        "Candidate Features",
        "Sources",
    ),
    ArtifactKind.OPERATING_ENVIRONMENT_LIST: (
        "Hardware",
        "Software",
        "Network",
        "Constraints",
    ),
    ArtifactKind.SOFTWARE_REQUIREMENTS_SPECIFICATION: (
        "Introduction",
        "Overall Description",
        "Operating Environment",
        "System Requirements",
        "Requirements Models",
        "Appendices",
    ),
}

_H1 = re.compile(r"^#\s+(.+?)\s*$")
_H2 = re.compile(r"^##\s+(.+?)\s*$")


def ensure_title(markdown: str, title: str) -> str:
    """Prepend a level-1 title when the document has none."""
    for line in markdown.splitlines():
        if not line.strip():
            continue
        if _H1.match(line):
            return markdown
        break
    return f"# {title}\n\n{markdown.lstrip()}" if markdown.strip() else f"# {title}\n"


def document_title(markdown: str) -> str | None:
    """Text of a leading level-1 heading, if the document starts with one."""
    for line in markdown.splitlines():
        if not line.strip():
            continue
        m = _H1.match(line)
        return m.group(1) if m else None
    return None


def strip_title(markdown: str) -> str:
    """Drop a leading level-1 title line, returning the body."""
    lines = markdown.splitlines()
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        if _H1.match(line):
            return "\n".join(lines[i + 1 :]).lstrip("\n")
        break
    return markdown


def _split_sections(markdown: str) -> tuple[list[str], list[tuple[str, list[str]]]]:
    """Split into (lines before the first H2, [(section name, body lines)])."""
    head: list[str] = []
    sections: list[tuple[str, list[str]]] = []
    current: list[str] | None = None
    for line in markdown.splitlines():
        m = _H2.match(line)
        if m:
            current = []
            sections.append((m.group(1), current))
        elif current is None:
            head.append(line)
        else:
            current.append(line)
    return head, sections


def get_section(markdown: str, name: str) -> str | None:
    _, sections = _split_sections(markdown)
    for section, body in sections:
        if section == name:
            return "\n".join(body).strip("\n")
    return None


def set_section(markdown: str, name: str, body: str) -> str:
    """Replace a section's body, appending the section if absent."""
    head, sections = _split_sections(markdown)
    out: list[str] = list(head)
    replaced = False
    for section, lines in sections:
        out.append(f"## {section}")
        if section == name and not replaced:
            out.extend(["", body.rstrip("\n"), ""])
            replaced = True
        else:
            out.extend(lines)
    if not replaced:
        if out and out[-1].strip():
            out.append("")
        out.extend([f"## {name}", "", body.rstrip("\n"), ""])
    return "\n".join(out).rstrip("\n") + "\n"


_REQ_ENTRY = re.compile(r"^\s*(?:[-*]|\d+[.)])?\s*(REQ-\d+)\s*:", re.MULTILINE)
_REQ_REF = re.compile(r"\bREQ-\d+\b")
_SYS_ENTRY = re.compile(r"^\s*(?:[-*]|\d+[.)])?\s*(SYS-\d+)\s*:(.*)$", re.MULTILINE)


def req_ids(url_content: str) -> list[str]:
    """Declared REQ-n entry ids, in document order."""
    return [m.group(1) for m in _REQ_ENTRY.finditer(url_content)]


def sys_entries(srl_content: str) -> list[tuple[str, list[str]]]:
    """Declared SYS-n entries with the REQ ids referenced on each entry line."""
    return [
        (m.group(1), _REQ_REF.findall(m.group(2)))
        for m in _SYS_ENTRY.finditer(srl_content)
    ]


def check_traceability(srl_content: str, url_content: str) -> list[str]:
    """Problems with SYS-to-REQ traceability (empty list = fully traced)."""
    known = set(req_ids(url_content))
    problems: list[str] = []
    entries = sys_entries(srl_content)
    if not entries:
        problems.append("no SYS-n entries found")
    for sys_id, refs in entries:
        if not refs:
            problems.append(f"{sys_id} traces no REQ id")
            continue
        missing = [r for r in refs if r not in known]
        if missing:
            problems.append(f"{sys_id} references unknown {', '.join(missing)}")
    return problems


_CLASS_TOKEN = re.compile(r"\b(NonFunctional|Functional)\b")
_PRIORITY_TOKEN = re.compile(r"\b(High|Medium|Low)\b")


def validate_classification(content: str, url_req_ids: list[str]) -> list[str]:
    """Every REQ id must be classified exactly once with class and priority."""
    problems: list[str] = []
    lines_by_req: dict[str, list[str]] = {rid: [] for rid in url_req_ids}
    for line in content.splitlines():
        for rid in _REQ_REF.findall(line):
            if rid in lines_by_req:
                lines_by_req[rid].append(line)
    for rid in url_req_ids:
        lines = lines_by_req[rid]
        if not lines:
            problems.append(f"{rid} is not classified")
        elif len(lines) > 1:
            problems.append(f"{rid} is classified more than once")
        else:
            line = lines[0]
            if not _CLASS_TOKEN.search(line):
                problems.append(f"{rid} lacks a Functional/NonFunctional class")
            if not _PRIORITY_TOKEN.search(line):
                problems.append(f"{rid} lacks a High/Medium/Low priority")
    return problems


def _check_required_sections(kind: ArtifactKind, content: str) -> list[str]:
    required = REQUIRED_SECTIONS.get(kind, ())
    present = {line.strip()[3:].strip() for line in content.splitlines() if _H2.match(line)}
    return [f"missing section heading '## {name}'" for name in required if name not in present]


_NUMBERED_ITEM = re.compile(r"^\s*(?:\d+[.)]|[-*])\s+\S", re.MULTILINE)


def validate_content(
    kind: ArtifactKind,
    content: str,
    *,
    url_content: str | None = None,
) -> list[str]:
    """Structural validation for a draft of the given kind.

    ``url_content`` supplies the REQ id universe for kinds that must trace
    or classify against the User Requirements List.
    """
    problems: list[str] = []
    if not content.strip():
        return ["empty document"]
    problems.extend(_check_required_sections(kind, content))

    if kind is ArtifactKind.INTERVIEW_QUESTION_LIST:
        if not _NUMBERED_ITEM.search(content):
            problems.append("no questions found (expected a numbered or bulleted list)")
    elif kind is ArtifactKind.USER_REQUIREMENTS_LIST:
        ids = req_ids(content)
        if not ids:
            problems.append("no REQ-n requirement entries found")
        elif len(ids) != len(set(ids)):
            problems.append("duplicate REQ ids")
    elif kind is ArtifactKind.SYSTEM_REQUIREMENTS_LIST:
        problems.extend(check_traceability(content, url_content or ""))
    elif kind is ArtifactKind.REQUIREMENTS_MODEL:
        problems.extend(validate_requirements_model(content))
    elif kind is ArtifactKind.CLASSIFICATION_REPORT:
        problems.extend(validate_classification(content, req_ids(url_content or "")))
    return problems


_ANY_HEADING = re.compile(r"^(#{1,5})(\s)")


def _demote_headings(body: str) -> str:
    """Push headings down one level so embedded documents nest cleanly."""
    out: list[str] = []
    in_fence = False
    for line in body.splitlines():
        if line.lstrip().startswith("```"):
            in_fence = not in_fence
        elif not in_fence:
            line = _ANY_HEADING.sub(r"#\1\2", line)
        out.append(line)
    return "\n".join(out)


def assemble_srs(
    reply: str,
    *,
    oel_body: str,
    srl_body: str,
    rm_body: str,
) -> str:
    """Deterministically assemble the SRS skeleton around a backend reply.

    Sections the reply provides are kept verbatim; mandatory sections it
    omits are synthesized from the consumed inputs so the skeleton headings
    are always present. Extra reply sections survive at the end.
    """
    title = DEFAULT_TITLES[ArtifactKind.SOFTWARE_REQUIREMENTS_SPECIFICATION]
    head, sections = _split_sections(ensure_title(reply, title))
    provided = {name: "\n".join(lines).strip("\n") for name, lines in sections}
    fallbacks = {
        "Introduction": "(to be completed)",
        "Overall Description": "(to be completed)",
        "Operating Environment": _demote_headings(strip_title(oel_body)).strip("\n"),
        "System Requirements": _demote_headings(strip_title(srl_body)).strip("\n"),
        "Requirements Models": _demote_headings(strip_title(rm_body)).strip("\n"),
        "Appendices": "(none)",
    }
    required = REQUIRED_SECTIONS[ArtifactKind.SOFTWARE_REQUIREMENTS_SPECIFICATION]
    out: list[str] = ["\n".join(head).strip("\n")]
    for name in required:
        body = provided.get(name)
        if body is None or not body.strip():
            body = fallbacks[name]
        out.append(f"## {name}\n\n{body}")
    for name, lines in sections:
        if name not in required:
            body = "\n".join(lines).strip("\n")
            out.append(f"## {name}\n\n{body}")
    return "\n\n".join(part for part in out if part.strip()) + "\n"
