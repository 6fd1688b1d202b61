"""Conflict examples: binary parse-shape choices and recorded facts.

Each addressable conflict class is turned into a pair of candidate parse
shapes.  A shape nests one production letter directly under another at a
specific right-hand-side position, with every irrelevant subtree elided to
a wildcard.  The user picks the shape they want; the rejected shape joins
the set of forbidden nestings that learning compiles away.

Recorded facts are keyed by printable letter names like ``(PLUS,3)`` so
they survive grammar rewrites between repair rounds: a precedence fact
says one letter binds tighter than another (a digraph kept cycle-free and
queried transitively), an associativity fact forbids a letter from
nesting under itself at one of its nonterminal positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gramata.grammar import Grammar, RankedSymbol, can_derive, ranked_alphabet
from gramata.lr import ConflictClass
from gramata.trees import Leaf, Node, ParseTree, collapse_pass_through


class UnrealizableExampleError(ValueError):
    """Raised when the requested nesting cannot occur in any parse tree."""


class ContradictionError(ValueError):
    """Raised when a recorded fact would contradict earlier facts."""


@dataclass(frozen=True)
class TreeExample:
    """Letter ``bottom`` nested at right-hand-side slot ``idx`` of ``top``."""

    top: RankedSymbol
    bottom: RankedSymbol
    idx: int
    kind: str  # "associativity" | "precedence"


@dataclass(frozen=True)
class Prompt:
    id: int
    kind: str
    pair: tuple[str, str]
    options: tuple[TreeExample, TreeExample]
    trees: tuple[ParseTree, ParseTree]

    def to_json(self) -> dict:
        from gramata.trees import to_json

        return {
            "id": self.id,
            "kind": self.kind,
            "pair": list(self.pair),
            "options": [to_json(self.trees[0]), to_json(self.trees[1])],
        }


def nonterminal_positions(g: Grammar, sym: RankedSymbol) -> list[int]:
    """Right-hand-side indices of ``sym``'s production holding nonterminals."""
    p = _production_of(g, sym)
    terms = set(g.terminals)
    return [i for i, s in enumerate(p.rhs) if s not in terms]


def nonterminal_ordinal(g: Grammar, sym: RankedSymbol, idx: int) -> int:
    """How many nonterminal slots precede ``idx`` in ``sym``'s production."""
    positions = nonterminal_positions(g, sym)
    if idx not in positions:
        raise UnrealizableExampleError(
            f"slot {idx} of {sym.name} is not a nonterminal position"
        )
    return positions.index(idx)


def _production_of(g: Grammar, sym: RankedSymbol):
    alphabet = ranked_alphabet(g)
    for s, p in zip(alphabet, g.productions):
        if s.name == sym.name and not p.pass_through:
            return p
    raise UnrealizableExampleError(f"no production for letter {sym.name}")


def realizable_positions(g: Grammar, top: RankedSymbol, bottom: RankedSymbol) -> list[int]:
    """Slots of ``top`` where a ``bottom``-rooted subtree can occur."""
    p_top = _production_of(g, top)
    p_bot = _production_of(g, bottom)
    terms = set(g.terminals)
    out = []
    for i, s in enumerate(p_top.rhs):
        if s in terms:
            continue
        if can_derive(g, s, p_bot.lhs):
            out.append(i)
    return out


def make_example(g: Grammar, top: RankedSymbol, bottom: RankedSymbol, idx: int) -> TreeExample:
    """Validated nesting example; raises when the nesting cannot parse."""
    if idx not in realizable_positions(g, top, bottom):
        raise UnrealizableExampleError(
            f"{bottom.name} cannot occur at slot {idx} of {top.name}"
        )
    kind = "associativity" if top.name == bottom.name else "precedence"
    return TreeExample(top, bottom, idx, kind)


def skeleton(g: Grammar, e: TreeExample) -> ParseTree:
    """The example as a parse shape with wildcards for elided subtrees."""
    terms = set(g.terminals)

    def frame(sym: RankedSymbol, nest_at: int | None, nested: ParseTree | None) -> ParseTree:
        p = _production_of(g, sym)
        children: list[ParseTree] = []
        for i, s in enumerate(p.rhs):
            if i == nest_at and nested is not None:
                children.append(nested)
            elif s in terms:
                children.append(Leaf(s))
            else:
                children.append(Leaf(s, wildcard=True))
        return Node(sym, tuple(children))

    inner = frame(e.bottom, None, None)
    return frame(e.top, e.idx, inner)


def matches_forbidden(t: ParseTree, e: TreeExample) -> bool:
    """Does ``t`` contain the forbidden nesting anywhere?

    Forwarding nodes are spliced out first, so the check sees through
    synthesized unit productions.  Associativity examples pin the nesting
    to the example's slot; precedence examples forbid the nesting at every
    slot.
    """
    t = collapse_pass_through(t)

    def walk(node: ParseTree) -> bool:
        if isinstance(node, Leaf):
            return False
        if node.label.name == e.top.name:
            if e.kind == "associativity":
                if e.idx < len(node.children):
                    c = node.children[e.idx]
                    if isinstance(c, Node) and c.label.name == e.bottom.name:
                        return True
            else:
                for c in node.children:
                    if isinstance(c, Node) and c.label.name == e.bottom.name:
                        return True
        return any(walk(c) for c in node.children)

    return walk(t)


@dataclass
class Facts:
    """Accumulated user decisions, keyed by printable letter names."""

    tighter: dict[str, set[str]] = field(default_factory=dict)  # name -> binds tighter
    assoc: set[tuple[str, int]] = field(default_factory=set)  # (name, nt ordinal)

    def add_precedence(self, looser: str, tighter_name: str) -> None:
        if looser == tighter_name:
            raise ContradictionError(f"{looser} cannot bind tighter than itself")
        if self.binds_tighter(looser, tighter_name):
            raise ContradictionError(
                f"recording {looser} < {tighter_name} contradicts earlier choices"
            )
        self.tighter.setdefault(looser, set()).add(tighter_name)

    def binds_tighter(self, a: str, b: str) -> bool:
        """True when a recorded chain says ``a`` binds tighter than ``b``."""
        seen = set()
        frontier = [b]
        while frontier:
            cur = frontier.pop()
            for nxt in self.tighter.get(cur, ()):  # cur < nxt
                if nxt == a:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return False

    def knows_order(self, a: str, b: str) -> bool:
        return self.binds_tighter(a, b) or self.binds_tighter(b, a)

    def add_assoc(self, name: str, ordinal: int) -> None:
        self.assoc.add((name, ordinal))

    def knows_assoc(self, name: str) -> bool:
        return any(n == name for n, _ in self.assoc)


def plan_prompts(
    g: Grammar,
    classes: list[ConflictClass],
    facts: Facts,
    groups: list[frozenset[str]] | None = None,
) -> list[Prompt]:
    """Prompts for all classes the facts do not already settle.

    Classes are grouped by example group; groups are ordered by their
    earliest source conflict, precedence questions come before
    associativity questions inside a group, then classes follow the
    conflict-report order (earliest source state first).  Asking in
    report order lets later answers settle whole classes transitively —
    e.g. two operator-vs-operator choices can pin down the operators'
    mutual order before it is ever asked.  Ids are positional; the
    session layer keeps them stable.
    """
    if groups is None:
        groups = partition_classes(g, classes)
    group_of: dict[str, int] = {}
    for gi, members in enumerate(groups):
        for name in members:
            group_of[name] = gi

    unresolved: list[ConflictClass] = []
    for cc in classes:
        a, b = cc.pair
        if cc.kind == "associativity":
            if facts.knows_assoc(a.name):
                continue
        else:
            if facts.knows_order(a.name, b.name):
                continue
        unresolved.append(cc)

    group_rank: dict[int, tuple] = {}
    for cc in unresolved:
        gi = group_of.get(cc.pair[0].name, len(groups))
        first = min(cc.sources)
        if gi not in group_rank or first < group_rank[gi]:
            group_rank[gi] = first

    def sort_key(cc: ConflictClass):
        gi = group_of.get(cc.pair[0].name, len(groups))
        return (
            group_rank[gi],
            0 if cc.kind == "precedence" else 1,
            min(cc.sources),
            cc.key,
        )

    prompts: list[Prompt] = []
    for i, cc in enumerate(sorted(unresolved, key=sort_key)):
        a, b = cc.pair
        if cc.kind == "associativity":
            positions = [
                p
                for p in nonterminal_positions(g, a)
                if p in realizable_positions(g, a, a)
            ]
            if len(positions) < 2:
                raise UnrealizableExampleError(
                    f"{a.name} has no two slots where it can nest under itself"
                )
            e0 = make_example(g, a, a, positions[0])
            e1 = make_example(g, a, a, positions[-1])
        else:
            pos_ab = realizable_positions(g, a, b)
            pos_ba = realizable_positions(g, b, a)
            if not pos_ab or not pos_ba:
                raise UnrealizableExampleError(
                    f"no two-sided nesting examples for {a.name} and {b.name}"
                )
            e0 = make_example(g, a, b, pos_ab[0])
            e1 = make_example(g, b, a, pos_ba[0])
        prompts.append(
            Prompt(
                id=i,
                kind=cc.kind,
                pair=cc.key,
                options=(e0, e1),
                trees=(skeleton(g, e0), skeleton(g, e1)),
            )
        )
    return prompts


def partition_classes(g: Grammar, classes: list[ConflictClass]) -> list[frozenset[str]]:
    """Example groups: letters connected by two-sided nesting realizability."""
    by_name: dict[str, RankedSymbol] = {}
    for cc in classes:
        for s in cc.pair:
            by_name[s.name] = s
    names = sorted(by_name)
    parent = {n: n for n in names}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            sa, sb = by_name[a], by_name[b]
            if realizable_positions(g, sa, sb) and realizable_positions(g, sb, sa):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
    components: dict[str, set[str]] = {}
    for n in names:
        components.setdefault(find(n), set()).add(n)
    return sorted((frozenset(v) for v in components.values()), key=min)


def record_answer(
    g: Grammar, facts: Facts, prompt: Prompt, choice: int
) -> TreeExample:
    """Apply the user's choice to the facts; returns the rejected example.

    Choosing a precedence shape records that its nested letter binds
    tighter than its root letter.  Choosing an associativity shape forbids
    the rejected nesting slot.  Raises ContradictionError when the choice
    conflicts with earlier recorded facts.
    """
    if choice not in (0, 1):
        raise ValueError(f"choice must be 0 or 1, got {choice!r}")
    selected = prompt.options[choice]
    rejected = prompt.options[1 - choice]
    if prompt.kind == "precedence":
        facts.add_precedence(selected.top.name, selected.bottom.name)
    else:
        facts.add_assoc(
            rejected.top.name, nonterminal_ordinal(g, rejected.top, rejected.idx)
        )
    return rejected
