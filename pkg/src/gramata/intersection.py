"""Intersection of tree automata, with the cleanups LR parsing needs.

The product construction pairs a grammar automaton with a restriction
automaton.  Starting from the pair of final states, each reachable pair
collects every way the two sides can generate the same root letter —
epsilon promotions are resolved on both sides while pairing, and the
paired children are taken literally from the lifted transitions.

The raw product is correct but unusable as a grammar for a deterministic
parser, so three cleanups follow: states with identical producing rules
(up to self-reference) merge; a state whose rules strictly contain
another's delegates the shared part to an epsilon move; and any rule made
redundant by a more permissive rule reachable through epsilon is dropped.
Each pass preserves the accepted tree language exactly.

``naive_intersect`` is the textbook whole-cross-product construction with
componentwise epsilon rules and no cleanup; it exists as an oracle to test
the optimized pipeline against.
"""

from __future__ import annotations

from dataclasses import dataclass

from gramata.automata import (
    EPSILON,
    AutomatonError,
    Transition,
    TreeAutomaton,
    epsilon_closure,
)
from gramata.grammar import RankedSymbol

MODES = ("default", "no_reach", "no_dedup", "no_eps", "none")


def transitions_match(tg: Transition, tr: Transition, terms: set[str]) -> bool:
    """Can these two non-epsilon transitions generate the same root node?

    Labels must agree by printable name and every slot must be a terminal
    on both sides (the same one) or a state on both sides.
    """
    if tg.is_epsilon or tr.is_epsilon:
        return False
    if tg.label != tr.label:
        return False
    if len(tg.children) != len(tr.children):
        return False
    for a, b in zip(tg.children, tr.children):
        a_term, b_term = a in terms, b in terms
        if a_term != b_term:
            return False
        if a_term and a != b:
            return False
    return True


def _single_final(a: TreeAutomaton, side: str) -> str:
    if len(a.finals) != 1:
        raise AutomatonError(
            f"intersection needs a single final state on the {side} side, "
            f"got {len(a.finals)}"
        )
    return a.finals[0]


def _product_rules(a_g: TreeAutomaton, a_r: TreeAutomaton, pairs):
    """Lifted transitions for each product pair in ``pairs``.

    Yields (pair, label, children) where children entries are terminals or
    product pairs, resolved literally from transitions made visible by the
    epsilon closures of the two component states.
    """
    terms = set(a_g.terminals) | set(a_r.terminals)
    g_rules: dict[str, list[Transition]] = {}
    for t in a_g.transitions:
        if not t.is_epsilon:
            g_rules.setdefault(t.target, []).append(t)
    r_rules: dict[str, list[Transition]] = {}
    for t in a_r.transitions:
        if not t.is_epsilon:
            r_rules.setdefault(t.target, []).append(t)

    out: dict[tuple[str, str], list[tuple[RankedSymbol, tuple]]] = {}
    for x, y in pairs:
        rules = []
        seen = set()
        for gx in sorted(epsilon_closure(a_g, x)):
            for tg in g_rules.get(gx, ()):  # lifted grammar-side rules
                for ry in sorted(epsilon_closure(a_r, y)):
                    for tr in r_rules.get(ry, ()):
                        if not transitions_match(tg, tr, terms):
                            continue
                        children = tuple(
                            a if a in terms else (a, b)
                            for a, b in zip(tg.children, tr.children)
                        )
                        key = (tg.label.name, children)
                        if key not in seen:
                            seen.add(key)
                            rules.append((tg.label, children))
        out[(x, y)] = rules
    return out


def _pair_name(pair: tuple[str, str]) -> str:
    return f"({pair[0]},{pair[1]})"


def _assemble(
    a_g: TreeAutomaton,
    a_r: TreeAutomaton,
    pairs: list[tuple[str, str]],
    rules,
    finals: list[tuple[str, str]],
) -> TreeAutomaton:
    terms = set(a_g.terminals) | set(a_r.terminals)
    transitions = []
    for pair in pairs:
        for label, children in rules[pair]:
            names = tuple(
                c if isinstance(c, str) else _pair_name(c) for c in children
            )
            transitions.append(Transition(_pair_name(pair), label, names))
    return TreeAutomaton(
        states=tuple(_pair_name(p) for p in pairs),
        terminals=tuple(sorted(terms)),
        finals=tuple(_pair_name(p) for p in finals),
        transitions=tuple(transitions),
    )


def _reachable_product(a_g: TreeAutomaton, a_r: TreeAutomaton) -> TreeAutomaton:
    start = (_single_final(a_g, "grammar"), _single_final(a_r, "restriction"))
    discovered: list[tuple[str, str]] = [start]
    seen = {start}
    rules: dict[tuple[str, str], list] = {}
    queue = [start]
    while queue:
        batch = queue
        queue = []
        batch_rules = _product_rules(a_g, a_r, batch)
        for pair in batch:
            rules[pair] = batch_rules[pair]
            for _label, children in batch_rules[pair]:
                for c in children:
                    if isinstance(c, tuple) and c not in seen:
                        seen.add(c)
                        discovered.append(c)
                        queue.append(c)
    return _assemble(a_g, a_r, discovered, rules, [start])


def _full_product(a_g: TreeAutomaton, a_r: TreeAutomaton) -> TreeAutomaton:
    start = (_single_final(a_g, "grammar"), _single_final(a_r, "restriction"))
    pairs = [(x, y) for x in a_g.states for y in a_r.states]
    rules = _product_rules(a_g, a_r, pairs)
    return _assemble(a_g, a_r, pairs, rules, [start])


def _rules_by_state(a: TreeAutomaton) -> dict[str, list[Transition]]:
    out: dict[str, list[Transition]] = {q: [] for q in a.states}
    for t in a.transitions:
        out[t.target].append(t)
    return out


def _prune_unreachable(a: TreeAutomaton) -> TreeAutomaton:
    rules = _rules_by_state(a)
    seen = set(a.finals)
    frontier = list(a.finals)
    while frontier:
        q = frontier.pop()
        for t in rules[q]:
            for c in t.children:
                if c in rules and c not in seen:
                    seen.add(c)
                    frontier.append(c)
    states = tuple(q for q in a.states if q in seen)
    transitions = tuple(t for t in a.transitions if t.target in seen)
    return TreeAutomaton(states, a.terminals, a.finals, transitions)


def _prune_nongenerating(a: TreeAutomaton) -> TreeAutomaton:
    """Drop states that cannot generate any tree, and rules using them.

    A state generates once some rule has all state children generating
    (epsilon rules forward generation from their child).  Product states
    can come out empty-handed — reachable from the final pair yet with
    no producing rules — and any rule referencing such a state can never
    fire, so both go.
    """
    live: set[str] = set()
    changed = True
    while changed:
        changed = False
        for t in a.transitions:
            if t.target in live:
                continue
            if all(c in a.terminals or c in live for c in t.children):
                live.add(t.target)
                changed = True
    if len(live) == len(a.states):
        return a
    states = tuple(q for q in a.states if q in live)
    finals = tuple(q for q in a.finals if q in live)
    transitions = tuple(
        t
        for t in a.transitions
        if t.target in live
        and all(c in a.terminals or c in live for c in t.children)
    )
    return TreeAutomaton(states, a.terminals, finals, transitions)


def _trim(a: TreeAutomaton) -> TreeAutomaton:
    return _prune_unreachable(_prune_nongenerating(a))


PLACEHOLDER = "§self"


def find_dup_states(a: TreeAutomaton) -> list[tuple[str, str]]:
    """State pairs with identical producing rules up to self-reference.

    Both states' names are replaced by a shared placeholder in both rule
    sets before comparing, so mutually recursive twins are recognized.
    """
    rules = _rules_by_state(a)

    def keyed(q1: str, q2: str, q: str) -> frozenset:
        subst = {q1: PLACEHOLDER, q2: PLACEHOLDER}
        out = set()
        for t in rules[q]:
            children = tuple(subst.get(c, c) for c in t.children)
            out.add((t.label.name, t.label.rank, t.is_epsilon, children))
        return frozenset(out)

    pairs = []
    states = list(a.states)
    for i, q1 in enumerate(states):
        for q2 in states[i + 1 :]:
            if keyed(q1, q2, q1) == keyed(q1, q2, q2):
                pairs.append((q1, q2))
    return pairs


def _merge_states(a: TreeAutomaton, pairs: list[tuple[str, str]]) -> TreeAutomaton:
    # union-find the pairs; earliest state in declaration order survives
    order = {q: i for i, q in enumerate(a.states)}
    parent = {q: q for q in a.states}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for q1, q2 in pairs:
        r1, r2 = find(q1), find(q2)
        if r1 == r2:
            continue
        keep, drop = (r1, r2) if order[r1] < order[r2] else (r2, r1)
        parent[drop] = keep

    def canon(x: str) -> str:
        return find(x) if x in parent else x

    states = tuple(q for q in a.states if find(q) == q)
    finals = tuple(dict.fromkeys(canon(f) for f in a.finals))
    seen = set()
    transitions = []
    for t in a.transitions:
        nt = Transition(canon(t.target), t.label, tuple(canon(c) for c in t.children))
        if nt.key() not in seen:
            seen.add(nt.key())
            transitions.append(nt)
    return TreeAutomaton(states, a.terminals, finals, tuple(transitions))


def dedup_states(a: TreeAutomaton) -> TreeAutomaton:
    """Merge duplicate states until none remain."""
    while True:
        pairs = find_dup_states(a)
        if not pairs:
            return a
        a = _merge_states(a, pairs)


def canonical_rename(a: TreeAutomaton) -> TreeAutomaton:
    """Deterministic names derived from grammar-side nonterminals.

    States are discovered breadth-first from the final state over rules
    sorted by label and children.  A product state named ``(x,y)`` gets
    the base ``x``; the base alone when it has a single surviving state,
    otherwise base plus discovery ordinal.
    """
    rules = _rules_by_state(a)

    def base_of(q: str) -> str:
        if q.startswith("(") and q.endswith(")") and "," in q:
            return q[1:-1].split(",", 1)[0]
        return q

    discovery: list[str] = []
    seen = set()
    queue = list(a.finals)
    seen.update(a.finals)
    while queue:
        q = queue.pop(0)
        discovery.append(q)
        for t in sorted(rules[q], key=lambda t: (t.label.name, t.label.rank, t.children)):
            for c in t.children:
                if c in rules and c not in seen:
                    seen.add(c)
                    queue.append(c)
    # states unreachable from the final keep their place after the rest
    for q in a.states:
        if q not in seen:
            discovery.append(q)
            seen.add(q)

    per_base: dict[str, list[str]] = {}
    for q in discovery:
        per_base.setdefault(base_of(q), []).append(q)
    mapping: dict[str, str] = {}
    for base, members in per_base.items():
        if len(members) == 1:
            mapping[members[0]] = base
        else:
            for i, q in enumerate(members):
                mapping[q] = f"{base}{i}"
    if len(set(mapping.values())) != len(mapping):
        # extremely unlikely collision between a bare base and an
        # ordinal-suffixed name; disambiguate with an underscore
        used: set[str] = set()
        for q in discovery:
            name = mapping[q]
            while name in used:
                name = name + "_"
            mapping[q] = name
            used.add(name)

    order = {q: i for i, q in enumerate(discovery)}
    states = tuple(mapping[q] for q in sorted(a.states, key=lambda q: order[q]))
    finals = tuple(mapping[f] for f in a.finals)
    transitions = []
    for q in sorted(a.states, key=lambda q: order[q]):
        for t in sorted(
            rules[q], key=lambda t: (t.is_epsilon, t.label.name, t.label.rank, t.children)
        ):
            transitions.append(
                Transition(
                    mapping[t.target],
                    t.label,
                    tuple(mapping.get(c, c) for c in t.children),
                )
            )
    return TreeAutomaton(states, a.terminals, finals, tuple(transitions))


def introduce_epsilons(a: TreeAutomaton) -> TreeAutomaton:
    """Replace shared rule sets with epsilon delegation.

    States are visited smallest rule set first; whenever one state's rules
    are a strict subset of another's, the larger state keeps only its
    extra rules plus an epsilon move to the smaller.  Comparisons use the
    live, already-rewritten sets, so chains delegate stepwise.
    """
    rules = _rules_by_state(a)
    live: dict[str, set] = {
        q: {(t.label.name, t.label.rank, t.is_epsilon, t.children) for t in rules[q]}
        for q in a.states
    }
    by_size = sorted(a.states, key=lambda q: (len(live[q]), q))
    eps_key_of = lambda q: (EPSILON.name, EPSILON.rank, True, (q,))
    for i, small in enumerate(by_size):
        for big in by_size[i + 1 :]:
            if small == big:
                continue
            s, b = live[small], live[big]
            if s and s < b:
                live[big] = (b - s) | {eps_key_of(small)}
    label_of: dict[tuple[str, int], RankedSymbol] = {}
    for t in a.transitions:
        label_of[(t.label.name, t.label.rank)] = t.label
    label_of[(EPSILON.name, EPSILON.rank)] = EPSILON
    transitions = []
    for q in a.states:
        for name, rank, is_eps, children in sorted(live[q]):
            transitions.append(Transition(q, label_of[(name, rank)], children))
    return TreeAutomaton(a.states, a.terminals, a.finals, tuple(transitions))


def prune_subsumed(a: TreeAutomaton) -> TreeAutomaton:
    """Drop rules strictly covered by a more permissive rule.

    Rule ``t`` is covered by ``t'`` when they share a label, ``t'`` feeds
    a state that epsilon-promotes into ``t``'s target, and every state
    child of ``t`` epsilon-promotes out of the corresponding child of
    ``t'`` — everything ``t`` generates, ``t'`` already generates
    somewhere the target can reach.  Mutually covering rules both stay.
    """
    terms = set(a.terminals)
    non_eps = [t for t in a.transitions if not t.is_epsilon]

    def covers(tp: Transition, t: Transition) -> bool:
        if tp is t or tp.label != t.label:
            return False
        if tp.target not in epsilon_closure(a, t.target):
            return False
        for cp, c in zip(tp.children, t.children):
            if (cp in terms) != (c in terms):
                return False
            if cp in terms:
                if cp != c:
                    return False
            elif c not in epsilon_closure(a, cp):
                return False
        return True

    dropped = set()
    for t in non_eps:
        for tp in non_eps:
            if covers(tp, t) and not covers(t, tp):
                dropped.add(t.key())
                break
    transitions = tuple(t for t in a.transitions if t.key() not in dropped)
    return TreeAutomaton(a.states, a.terminals, a.finals, transitions)


def intersect(a_g: TreeAutomaton, a_r: TreeAutomaton, mode: str = "default") -> TreeAutomaton:
    """Intersection automaton, cleaned up according to ``mode``.

    Modes: ``default`` explores reachable product pairs then merges
    duplicates, introduces epsilon delegation and prunes covered rules;
    ``no_reach`` builds the whole cross product first (then prunes back to
    the reachable part and continues identically); ``no_dedup``,
    ``no_eps`` skip one cleanup each; ``none`` is the bare reachable
    product.  All modes accept exactly the same trees.
    """
    if mode not in MODES:
        raise ValueError(f"unknown intersection mode {mode!r}")
    if mode == "no_reach":
        a = _prune_unreachable(_full_product(a_g, a_r))
    else:
        a = _reachable_product(a_g, a_r)
    a = _prune_nongenerating(a)
    if mode in ("default", "no_reach", "no_eps"):
        a = dedup_states(a)
    a = canonical_rename(a)
    if mode in ("default", "no_reach", "no_dedup"):
        a = introduce_epsilons(a)
        a = prune_subsumed(a)
    a = _trim(a)
    return a


def naive_intersect(a_g: TreeAutomaton, a_r: TreeAutomaton) -> TreeAutomaton:
    """Whole cross product with componentwise epsilon rules, no cleanup."""
    terms = set(a_g.terminals) | set(a_r.terminals)
    pairs = [(x, y) for x in a_g.states for y in a_r.states]
    transitions = []
    for x, y in pairs:
        name = _pair_name((x, y))
        for tg in a_g.transitions:
            if tg.target != x or tg.is_epsilon:
                continue
            for tr in a_r.transitions:
                if tr.target != y or tr.is_epsilon:
                    continue
                if not transitions_match(tg, tr, terms):
                    continue
                children = tuple(
                    a if a in terms else _pair_name((a, b))
                    for a, b in zip(tg.children, tr.children)
                )
                transitions.append(Transition(name, tg.label, children))
    for tg in a_g.transitions:
        if tg.is_epsilon:
            for y in a_r.states:
                transitions.append(
                    Transition(
                        _pair_name((tg.target, y)),
                        EPSILON,
                        (_pair_name((tg.children[0], y)),),
                    )
                )
    for tr in a_r.transitions:
        if tr.is_epsilon:
            for x in a_g.states:
                transitions.append(
                    Transition(
                        _pair_name((x, tr.target)),
                        EPSILON,
                        (_pair_name((x, tr.children[0])),),
                    )
                )
    finals = [
        _pair_name((x, y)) for x in a_g.finals for y in a_r.finals
    ]
    unique: dict[tuple, Transition] = {}
    for t in transitions:
        unique.setdefault(t.key(), t)
    return TreeAutomaton(
        states=tuple(_pair_name(p) for p in pairs),
        terminals=tuple(sorted(terms)),
        finals=tuple(finals),
        transitions=tuple(unique.values()),
    )


def structurally_equal(a: TreeAutomaton, b: TreeAutomaton) -> bool:
    """Equality after canonical renaming, ignoring transition order."""
    ca, cb = canonical_rename(a), canonical_rename(b)
    return (
        set(ca.states) == set(cb.states)
        and set(ca.finals) == set(cb.finals)
        and {t.key() for t in ca.transitions} == {t.key() for t in cb.transitions}
    )
