"""Compiling recorded choices into a restriction tree automaton.

The idea: assign every production letter one or more *orders* — depths in
a layered automaton ``e_0, e_1, ...`` where each state only generates
letters at its own order or deeper (via an epsilon chain
``e_i <- e_{i+1}``).  Letters the user ordered by precedence land on
consecutive orders, loosest first, so a tighter-binding letter can never
sit directly above a looser one.  A forbidden associativity slot is
compiled by pointing that child one order deeper than the rest of the
production, cutting off same-letter nesting on that side.

Non-conflicting letters are replicated across the orders a conflict class
expands into, so everything else still nests freely.  Letters whose
production re-enters a shallower layer from below (say, parentheses
around a whole expression) get one extra transition that admits the
shallowest relevant layer again.
"""

from __future__ import annotations

from dataclasses import dataclass

from gramata.automata import EPSILON, Transition, TreeAutomaton
from gramata.examples import TreeExample, nonterminal_ordinal
from gramata.grammar import Grammar, RankedSymbol, ranked_alphabet
from gramata.lr import ConflictClass


class LearningError(ValueError):
    """Raised when recorded facts cannot be compiled for this grammar."""


OrderPairs = frozenset[tuple[RankedSymbol, int]]
OrderMap = dict[int, list[list[tuple[RankedSymbol, ...]]]]


def nonterminal_levels(g: Grammar) -> dict[str, int]:
    """Distance of each nonterminal from the start in rhs-mention steps."""
    nts = set(g.nonterminals)
    levels = {g.start: 0}
    frontier = [g.start]
    while frontier:
        nxt: list[str] = []
        for nt in frontier:
            for p in g.prods_of(nt):
                for s in p.rhs:
                    if s in nts and s not in levels:
                        levels[s] = levels[nt] + 1
                        nxt.append(s)
        frontier = nxt
    for nt in nts:
        levels.setdefault(nt, 0)  # unreachable nonterminals
    return levels


def trivial_symbols(g: Grammar) -> frozenset[RankedSymbol]:
    """Letters of nonterminals that only ever derive terminal strings."""
    terms = set(g.terminals)
    all_flat: dict[str, bool] = {}
    for p in g.productions:
        flat = len(p.rhs) >= 1 and all(s in terms for s in p.rhs)
        all_flat[p.lhs] = all_flat.get(p.lhs, True) and flat
    return frozenset(
        s
        for s, p in zip(ranked_alphabet(g), g.productions)
        if all_flat.get(p.lhs, False)
    )


def base_orders(g: Grammar) -> dict[RankedSymbol, int]:
    """Starting order of each non-trivial letter: its nonterminal's level.

    Trivial letters keep their own verbatim states and pass-through
    productions are epsilon moves, so neither participates in ordering.
    """
    levels = nonterminal_levels(g)
    trivial = trivial_symbols(g)
    return {
        s: levels[p.lhs]
        for s, p in zip(ranked_alphabet(g), g.productions)
        if s not in trivial and not p.pass_through
    }


def build_order_map(
    facts,
    groups: list[frozenset[str]],
    base: dict[RankedSymbol, int],
    classes: list[ConflictClass],
) -> OrderMap:
    """Layer each example group by the recorded precedence facts.

    Every group is keyed at the smallest base order of its members;
    members one order deeper are pulled down to the key, anything further
    apart is rejected.  Within a group, letters are layered loosest
    binding first; two letters may share a layer only if no conflict
    class pits them against each other.
    """
    by_name = {s.name: s for s in base}
    conflict_pairs = {
        frozenset(cc.key) for cc in classes if cc.kind == "precedence"
    }
    out: OrderMap = {}
    for members in groups:
        syms = [by_name[n] for n in sorted(members) if n in by_name]
        if not syms:
            continue
        orders = {base[s] for s in syms}
        key = min(orders)
        if max(orders) > key + 1:
            raise LearningError(
                f"conflicting letters {sorted(members)} sit more than one "
                f"level apart; cannot order them on consecutive layers"
            )
        # longest-path layering over recorded "binds tighter" facts
        edges = {
            s.name: {
                t for t in facts.tighter.get(s.name, set()) if t in members
            }
            for s in syms
        }
        for cc_pair in conflict_pairs:
            if cc_pair <= members and len(cc_pair) == 2:
                a, b = sorted(cc_pair)
                if not facts.knows_order(a, b):
                    raise LearningError(
                        f"no recorded precedence between {a} and {b}"
                    )
        layer: dict[str, int] = {}

        def assign(name: str, seen: tuple[str, ...] = ()) -> int:
            if name in layer:
                return layer[name]
            if name in seen:
                raise LearningError(f"precedence cycle through {name}")
            preds = [
                s.name
                for s in syms
                if name in edges.get(s.name, set())
            ]
            val = 0 if not preds else 1 + max(
                assign(p, seen + (name,)) for p in preds
            )
            layer[name] = val
            return val

        for s in syms:
            assign(s.name)
        depth = max(layer.values()) + 1
        levels = [
            tuple(s for s in syms if layer[s.name] == i) for i in range(depth)
        ]
        out.setdefault(key, []).append(levels)
    return out


def _normalize_group(group) -> list[tuple[RankedSymbol, ...]]:
    levels = []
    for entry in group:
        if isinstance(entry, RankedSymbol):
            levels.append((entry,))
        else:
            levels.append(tuple(entry))
    return levels


def learn_orders(
    t_minus: list[TreeExample],
    order_map: OrderMap,
    g: Grammar,
    base: dict[RankedSymbol, int] | None = None,
) -> tuple[OrderPairs, OrderPairs]:
    """Forbidden self-nesting slots and the final letter/order assignment.

    Starting from each letter at its base order, conflict groups are
    expanded deepest key first: the group's layers occupy consecutive
    orders, deeper entries shift out of the way, and the non-conflicting
    letters that shared the key order are replicated across the new
    layers.  When the deepest layer of a group contains a letter with a
    forbidden self-nesting slot, one more replica order is appended so
    that the slot still has somewhere deeper to point.  Orders are
    renumbered contiguously at the end.
    """
    if base is None:
        base = base_orders(g)
    alphabet = ranked_alphabet(g)
    by_name = {s.name: s for s in alphabet if not s.pass_through}

    o_a: set[tuple[RankedSymbol, int]] = set()
    for e in t_minus:
        if e.top.name != e.bottom.name:
            continue
        s = by_name.get(e.top.name)
        if s is None:
            continue
        try:
            o_a.add((s, nonterminal_ordinal(g, s, e.idx)))
        except ValueError:
            continue
    o_a_syms = {s.name for s, _ in o_a}

    entries: set[tuple[RankedSymbol, int]] = {(s, o) for s, o in base.items()}

    for key in sorted(order_map, reverse=True):
        groups = [_normalize_group(grp) for grp in order_map[key]]
        members = {s for grp in groups for lvl in grp for s in lvl}
        size = max(len(grp) for grp in groups)
        at_key = {s for s, o in entries if o == key}
        shared = at_key - members
        entries = {
            (s, o)
            for s, o in entries
            if s not in members and not (o == key and s in shared)
        }
        entries = {
            (s, o + size - 1) if o >= key + 1 else (s, o) for s, o in entries
        }
        last_level: set[RankedSymbol] = set()
        for i in range(size):
            level: set[RankedSymbol] = set()
            for grp in groups:
                if i < len(grp):
                    level.update(grp[i])
            for s in level | shared:
                entries.add((s, key + i))
            if i == size - 1:
                last_level = level
        if any(s.name in o_a_syms for s in last_level):
            entries = {
                (s, o + 1) if o >= key + size else (s, o) for s, o in entries
            }
            for s in shared:
                entries.add((s, key + size))

    used = sorted({o for _, o in entries})
    renumber = {o: i for i, o in enumerate(used)}
    o_p = frozenset((s, renumber[o]) for s, o in entries)
    return frozenset(o_a), o_p


@dataclass(frozen=True)
class Reentry:
    """A letter whose deepest transition re-admits a shallower layer."""

    symbol: RankedSymbol
    high: int  # the deepest order the letter occupies
    low: int  # the shallowest order among letters of its rhs nonterminals


def level_reentries(
    g: Grammar, o_p: OrderPairs, conflicting: frozenset[str] = frozenset()
) -> list[Reentry]:
    """Letters that wrap deeper layers around shallower material.

    A non-conflicting letter whose right-hand side holds nonterminals
    living at strictly shallower orders (say parentheses around a whole
    expression) needs an extra transition at its deepest order pointing
    back at that shallow layer; otherwise the layering would forbid
    nestings the user never rejected.  Conflicting letters are excluded —
    their layering *is* the learned restriction.
    """
    trivial = trivial_symbols(g)
    terms = set(g.terminals)
    orders: dict[str, list[int]] = {}
    for s, o in o_p:
        orders.setdefault(s.name, []).append(o)
    alphabet = ranked_alphabet(g)
    min_order_by_lhs: dict[str, int] = {}
    for s, p in zip(alphabet, g.productions):
        if s in trivial or p.pass_through or s.name not in orders:
            continue
        lo = min(orders[s.name])
        cur = min_order_by_lhs.get(p.lhs)
        min_order_by_lhs[p.lhs] = lo if cur is None else min(cur, lo)

    trivial_lhs = {p.lhs for s, p in zip(alphabet, g.productions) if s in trivial}
    out: list[Reentry] = []
    for s, p in zip(alphabet, g.productions):
        if s in trivial or p.pass_through or s.name in conflicting or s.name not in orders:
            continue
        rhs_nts = [x for x in p.rhs if x not in terms and x not in trivial_lhs]
        if not rhs_nts:
            continue
        lows = [min_order_by_lhs[nt] for nt in rhs_nts if nt in min_order_by_lhs]
        if not lows:
            continue
        high = max(orders[s.name])
        low = min(lows)
        if high > low:
            out.append(Reentry(s, high, low))
    return out


def build_restriction_ta(
    o_a: OrderPairs,
    o_p: OrderPairs,
    g: Grammar,
    conflicting: frozenset[str] = frozenset(),
) -> TreeAutomaton:
    """The layered automaton encoding every recorded restriction.

    States ``e_0..e_m`` chain by epsilon so deeper orders promote upward;
    each (letter, order) pair contributes one transition whose nonterminal
    slots stay at the same order except forbidden self-nesting slots,
    which point one order deeper.  Nonterminals that only derive terminal
    strings keep their own verbatim states.
    """
    trivial = trivial_symbols(g)
    terms = set(g.terminals)
    alphabet = ranked_alphabet(g)
    prod_by_name = {
        s.name: p
        for s, p in zip(alphabet, g.productions)
        if not p.pass_through
    }

    m = max((o for _, o in o_p), default=0)
    forbidden: dict[str, set[int]] = {}
    for s, i in o_a:
        forbidden.setdefault(s.name, set()).add(i)

    trivial_states: dict[str, str] = {}
    for s, p in zip(alphabet, g.productions):
        if s in trivial:
            trivial_states[p.lhs] = p.lhs

    def state(i: int) -> str:
        return f"e{i}"

    for nt in trivial_states:
        if nt in {state(i) for i in range(m + 2)}:
            raise LearningError(
                f"nonterminal name {nt!r} collides with a layer state name"
            )

    transitions: list[Transition] = []
    needs_dead = False
    for s, i in sorted(o_p, key=lambda pair: (pair[1], pair[0].name)):
        p = prod_by_name[s.name]
        children: list[str] = []
        nt_ordinal = 0
        for x in p.rhs:
            if x in terms:
                children.append(x)
                continue
            if x in trivial_states:
                children.append(trivial_states[x])
                nt_ordinal += 1
                continue
            if nt_ordinal in forbidden.get(s.name, ()):
                children.append(state(i + 1))
                if i + 1 > m:
                    needs_dead = True
            else:
                children.append(state(i))
            nt_ordinal += 1
        transitions.append(Transition(state(i), s, tuple(children)))

    for i in range(m):
        transitions.append(Transition(state(i), EPSILON, (state(i + 1),)))

    for s, p in zip(alphabet, g.productions):
        if s in trivial:
            transitions.append(Transition(p.lhs, s, p.rhs))

    for r in level_reentries(g, o_p, conflicting):
        p = prod_by_name[r.symbol.name]
        children = []
        for x in p.rhs:
            if x in terms:
                children.append(x)
            elif x in trivial_states:
                children.append(trivial_states[x])
            else:
                children.append(state(r.low))
        tr = Transition(state(r.high), r.symbol, tuple(children))
        if tr not in transitions:
            transitions.append(tr)

    states = [state(i) for i in range(m + 1)]
    if needs_dead:
        states.append(state(m + 1))
    states.extend(trivial_states.values())
    return TreeAutomaton(
        states=tuple(states),
        terminals=g.terminals,
        finals=(state(0),),
        transitions=tuple(transitions),
    )
