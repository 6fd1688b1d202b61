"""Bottom-up tree automata over the ranked production alphabet.

A transition ``q <-(f,n)- k1 ... kn`` says state ``q`` generates a tree
whose root is the letter ``(f,n)`` once each child slot is satisfied:
terminal slots must match the leaf exactly, state slots accept any tree
generated by that state or by anything that promotes into it.  Epsilon
transitions ``q <-eps- q'`` promote ``q'`` into ``q`` without consuming a
node; their closure is applied both on child slots and at the root.

Grammars convert to automata state-per-nonterminal, and back; synthesized
pass-through productions travel as epsilon transitions so a repaired
grammar generates the same trees its automaton accepts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from gramata.grammar import Grammar, GrammarError, Production, RankedSymbol, ranked_alphabet
from gramata.trees import Leaf, Node, ParseTree, tree_key

EPSILON = RankedSymbol("ε", 1, -1)


class AutomatonError(ValueError):
    """Raised for ill-formed automata."""


class ResourceLimitError(RuntimeError):
    """Raised when tree enumeration exceeds its cap."""


@dataclass(frozen=True)
class Transition:
    """``target <-(label)- children``; children name states or terminals."""

    target: str
    label: RankedSymbol
    children: tuple[str, ...]

    @property
    def is_epsilon(self) -> bool:
        return self.label.sym == EPSILON.sym and self.label.rank == 1

    def key(self) -> tuple:
        return (self.target, self.label.sym, self.label.rank, self.children)


@dataclass(frozen=True)
class TreeAutomaton:
    states: tuple[str, ...]
    terminals: tuple[str, ...]
    finals: tuple[str, ...]
    transitions: tuple[Transition, ...]

    def __post_init__(self) -> None:
        states = set(self.states)
        terms = set(self.terminals)
        if states & terms:
            raise AutomatonError(
                f"state and terminal names overlap: {sorted(states & terms)}"
            )
        for f in self.finals:
            if f not in states:
                raise AutomatonError(f"final state {f!r} is not a state")
        for t in self.transitions:
            if t.target not in states:
                raise AutomatonError(f"transition target {t.target!r} is not a state")
            if t.is_epsilon:
                if len(t.children) != 1 or t.children[0] not in states:
                    raise AutomatonError(
                        f"epsilon transition into {t.target!r} must name one state"
                    )
                continue
            if len(t.children) != t.label.rank:
                raise AutomatonError(
                    f"transition {t.label.name} into {t.target!r} has "
                    f"{len(t.children)} children, expected {t.label.rank}"
                )
            for c in t.children:
                if c not in states and c not in terms:
                    raise AutomatonError(
                        f"unknown child {c!r} in transition into {t.target!r}"
                    )

    def rules_of(self, state: str) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.target == state)


def epsilon_closure(a: TreeAutomaton, state: str) -> frozenset[str]:
    """States reachable downward from ``state`` via epsilon, inclusive.

    ``q2 in epsilon_closure(a, q1)`` means any tree generated at ``q2`` is
    also generated at ``q1``.
    """
    return _closures(a)[state]


@lru_cache(maxsize=None)
def _closures(a: TreeAutomaton) -> dict[str, frozenset[str]]:
    down: dict[str, set[str]] = {q: set() for q in a.states}
    for t in a.transitions:
        if t.is_epsilon:
            down[t.target].add(t.children[0])
    out: dict[str, frozenset[str]] = {}
    for q in a.states:
        seen = {q}
        frontier = [q]
        while frontier:
            cur = frontier.pop()
            for nxt in down[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        out[q] = frozenset(seen)
    return out


def generating_states(a: TreeAutomaton, t: ParseTree) -> frozenset[str]:
    """States that directly generate ``t`` (epsilon applied below the root)."""
    closures = _closures(a)
    terms = set(a.terminals)

    def walk(node: ParseTree) -> frozenset[str]:
        if isinstance(node, Leaf):
            return frozenset()
        child_sets = [walk(c) for c in node.children]
        result: set[str] = set()
        for tr in a.transitions:
            if tr.is_epsilon:
                continue
            if tr.label != node.label:
                continue
            ok = True
            for k, (slot, child) in enumerate(zip(tr.children, node.children)):
                if slot in terms:
                    if not (isinstance(child, Leaf) and not child.wildcard and child.name == slot):
                        ok = False
                        break
                else:
                    if isinstance(child, Leaf):
                        ok = False
                        break
                    if not (closures[slot] & child_sets[k]):
                        ok = False
                        break
            if ok:
                result.add(tr.target)
        return frozenset(result)

    return walk(t)


def accepts(a: TreeAutomaton, t: ParseTree) -> bool:
    """True when some final state generates ``t`` up to epsilon promotion."""
    roots = generating_states(a, t)
    closures = _closures(a)
    return any(closures[f] & roots for f in a.finals)


def cfg_to_ta(g: Grammar) -> TreeAutomaton:
    """State-per-nonterminal automaton generating exactly g's parse trees.

    Pass-through productions become epsilon transitions, so the trees of
    the automaton never contain forwarding nodes.
    """
    alphabet = ranked_alphabet(g)
    transitions = []
    for sym, p in zip(alphabet, g.productions):
        if p.pass_through:
            transitions.append(Transition(p.lhs, EPSILON, (p.rhs[0],)))
        else:
            transitions.append(Transition(p.lhs, sym, p.rhs))
    return TreeAutomaton(
        states=g.nonterminals,
        terminals=g.terminals,
        finals=(g.start,),
        transitions=tuple(transitions),
    )


def ta_to_cfg(a: TreeAutomaton, token_labels: tuple[tuple[str, str], ...] = ()) -> Grammar:
    """Grammar whose parse trees are the automaton's accepted trees.

    Requires a single final state (the start symbol).  Epsilon transitions
    become pass-through unit productions.
    """
    if len(a.finals) != 1:
        raise AutomatonError(
            f"cannot convert automaton with {len(a.finals)} final states to a grammar"
        )
    start = a.finals[0]
    prods = []
    for t in a.transitions:
        if t.is_epsilon:
            prods.append(Production(t.target, (t.children[0],), pass_through=True))
        else:
            prods.append(Production(t.target, t.children))
    used_labels = tuple((n, l) for n, l in token_labels if n in set(a.terminals))
    return Grammar(
        start=start,
        terminals=a.terminals,
        productions=tuple(prods),
        token_labels=used_labels,
    )


def enumerate_trees(
    a: TreeAutomaton, max_depth: int, cap: int = 1_000_000
) -> list[ParseTree]:
    """All accepted trees of depth <= max_depth, sorted by depth then key.

    Depth counts internal nodes on the longest root-to-leaf path.  Raises
    ResourceLimitError once more than ``cap`` distinct trees accumulate.
    """
    closures = _closures(a)
    terms = set(a.terminals)
    # per state: canonical key -> tree, grown one depth level at a time
    pool: dict[str, dict[str, ParseTree]] = {q: {} for q in a.states}
    rules = [t for t in a.transitions if not t.is_epsilon]
    total = 0

    for _level in range(max_depth):
        additions: dict[str, dict[str, ParseTree]] = {q: {} for q in a.states}
        for tr in rules:
            options: list[list[ParseTree]] = []
            feasible = True
            for slot in tr.children:
                if slot in terms:
                    options.append([Leaf(slot)])
                else:
                    merged: dict[str, ParseTree] = {}
                    for q in closures[slot]:
                        merged.update(pool[q])
                    if not merged:
                        feasible = False
                        break
                    options.append(list(merged.values()))
            if not feasible:
                continue
            for combo in _product(options):
                tree = Node(tr.label, tuple(combo))
                k = tree_key(tree)
                if k not in pool[tr.target] and k not in additions[tr.target]:
                    additions[tr.target][k] = tree
                    total += 1
                    # check as trees accumulate: one level's cross products
                    # can be astronomically larger than the cap
                    if total > cap:
                        raise ResourceLimitError(
                            f"enumeration exceeded {cap} trees at depth {_level + 1}"
                        )
        changed = False
        for q, extra in additions.items():
            if extra:
                changed = True
                pool[q].update(extra)
        if not changed:
            break

    accepted: dict[str, ParseTree] = {}
    for f in a.finals:
        for q in closures[f]:
            accepted.update(pool[q])
    from gramata.trees import depth as tree_depth

    return sorted(accepted.values(), key=lambda t: (tree_depth(t), tree_key(t)))


def _product(options: list[list[ParseTree]]):
    if not options:
        yield ()
        return
    head, *rest = options
    for h in head:
        for r in _product(rest):
            yield (h, *r)


def language_keys(a: TreeAutomaton, max_depth: int, cap: int = 1_000_000) -> frozenset[str]:
    """Canonical keys of the depth-bounded language (set comparisons)."""
    return frozenset(tree_key(t) for t in enumerate_trees(a, max_depth, cap))
