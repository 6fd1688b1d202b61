"""Parse trees and their textual / JSON renderings.

Internal nodes are labeled by ranked production letters and have exactly
``rank`` children; leaves are terminal occurrences.  A leaf may instead be
a *wildcard* standing for "any subtree derived from this nonterminal" —
candidate shapes shown to the user elide irrelevant subtrees this way.

The JSON shape is ``{"sym": ..., "rank": ..., "children": [...]}`` for
internal nodes, ``{"leaf": name}`` for terminals and
``{"leaf": name, "wildcard": true}`` for wildcards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from gramata.grammar import RankedSymbol


class TreeError(ValueError):
    """Raised for malformed tree JSON or arity violations."""


@dataclass(frozen=True)
class Leaf:
    name: str
    wildcard: bool = False


@dataclass(frozen=True)
class Node:
    label: RankedSymbol
    children: tuple["ParseTree", ...]

    def __post_init__(self) -> None:
        if len(self.children) != self.label.rank:
            raise TreeError(
                f"node {self.label.name} expects {self.label.rank} children, "
                f"got {len(self.children)}"
            )


ParseTree = Leaf | Node


def depth(t: ParseTree) -> int:
    """Internal nodes on the longest root-to-leaf path (leaves count 0)."""
    if isinstance(t, Leaf):
        return 0
    return 1 + max((depth(c) for c in t.children), default=0)


def node_count(t: ParseTree) -> int:
    if isinstance(t, Leaf):
        return 1
    return 1 + sum(node_count(c) for c in t.children)


def to_json(t: ParseTree) -> dict:
    if isinstance(t, Leaf):
        if t.wildcard:
            return {"leaf": t.name, "wildcard": True}
        return {"leaf": t.name}
    return {
        "sym": t.label.sym,
        "rank": t.label.rank,
        "children": [to_json(c) for c in t.children],
    }


def from_json(data: dict) -> ParseTree:
    if not isinstance(data, dict):
        raise TreeError(f"tree node must be an object, got {type(data).__name__}")
    if "leaf" in data:
        name = data["leaf"]
        if not isinstance(name, str):
            raise TreeError("leaf name must be a string")
        return Leaf(name, bool(data.get("wildcard", False)))
    try:
        sym, rank = data["sym"], data["rank"]
    except KeyError as missing:
        raise TreeError(f"tree node missing key {missing}") from None
    if not isinstance(sym, str) or not isinstance(rank, int):
        raise TreeError("internal node needs string 'sym' and integer 'rank'")
    children = data.get("children", [])
    if not isinstance(children, list):
        raise TreeError("'children' must be a list")
    return Node(RankedSymbol(sym, rank), tuple(from_json(c) for c in children))


def dumps(t: ParseTree) -> str:
    return json.dumps(to_json(t), sort_keys=True, separators=(",", ":"))


def loads(text: str) -> ParseTree:
    return from_json(json.loads(text))


def tree_key(t: ParseTree) -> str:
    """A canonical serialization; equal trees have equal keys."""
    return dumps(t)


def render_ascii(t: ParseTree, indent: int = 0) -> str:
    """One node per line, children indented two spaces below the parent.

    Wildcard leaves print as their nonterminal name.
    """
    pad = "  " * indent
    if isinstance(t, Leaf):
        return pad + t.name
    lines = [pad + t.label.name]
    lines.extend(render_ascii(c, indent + 1) for c in t.children)
    return "\n".join(lines)


def collapse_pass_through(t: ParseTree) -> ParseTree:
    """Drop synthesized forwarding nodes, splicing their child in place."""
    if isinstance(t, Leaf):
        return t
    if t.label.pass_through and len(t.children) == 1:
        return collapse_pass_through(t.children[0])
    return Node(t.label, tuple(collapse_pass_through(c) for c in t.children))
