"""Product research providers feeding the analysis report's Sources section.

Live web search is deliberately out of scope: research is a pluggable
provider, and the default serves canned results from a packaged fixture
table so offline runs stay deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol

from .errors import ConfigError

__all__ = [
    "ResearchResult",
    "ResearchProvider",
    "NullResearchProvider",
    "FixtureResearchProvider",
    "render_sources",
]


@dataclass(frozen=True)
class ResearchResult:
    title: str
    url: str
    summary: str


class ResearchProvider(Protocol):
    def search(self, query: str) -> list[ResearchResult]: ...


class NullResearchProvider:
    """Always returns zero results; never fails."""

    def search(self, query: str) -> list[ResearchResult]:
        return []


class FixtureResearchProvider:
    """Offline lookup table: lowercase query substring -> canned results.

    The first table key contained in the query wins (insertion order);
    a ``"*"`` key acts as catch-all. Missing query -> no results.
    """

    def __init__(self, table: dict[str, list[ResearchResult]]):
        self._table = dict(table)

    @classmethod
    def from_mapping(cls, raw: dict) -> "FixtureResearchProvider":
        table: dict[str, list[ResearchResult]] = {}
        for pattern, rows in raw.items():
            if not isinstance(rows, list):
                raise ConfigError(f"research fixture entry {pattern!r} must be a list")
            results = []
            for row in rows:
                try:
                    results.append(
                        ResearchResult(
                            title=str(row["title"]),
                            url=str(row["url"]),
                            summary=str(row.get("summary", "")),
                        )
                    )
                except (TypeError, KeyError) as exc:
                    raise ConfigError(
                        f"research fixture entry {pattern!r} has a malformed row: {exc}"
                    ) from None
            table[pattern.lower()] = results
        return cls(table)

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureResearchProvider":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load research fixtures from {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"research fixture file {path} must be a JSON object")
        return cls.from_mapping(raw)

    @classmethod
    def default(cls) -> "FixtureResearchProvider":
        ref = resources.files("reqforge").joinpath("data/research.json")
        raw = json.loads(ref.read_text(encoding="utf-8"))
        return cls.from_mapping(raw)

    def search(self, query: str) -> list[ResearchResult]:
        q = query.lower()
        catch_all: list[ResearchResult] | None = None
        for pattern, results in self._table.items():
            if pattern == "*":
                catch_all = results
            elif pattern in q:
                return list(results)
        return list(catch_all) if catch_all is not None else []


def render_sources(results: list[ResearchResult]) -> str:
    """Markdown bullet list for the Sources section; empty text for no results."""
    lines = []
    for r in results:
        line = f"- [{r.title}]({r.url})"
        if r.summary:
            line += f": {r.summary}"
        lines.append(line)
    return "\n".join(lines)
