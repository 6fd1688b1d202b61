"""Canonical LR(1) construction and conflict classification.

The automaton is built from an internal augmented start production; that
production never appears in reports.  A conflict is a parser state where a
lookahead admits both shifting and reducing, or two different reductions.
Conflicts are an over-approximation of grammatical ambiguity, and they are
what the repair loop works from.

Each conflict is *classified* by the pair of production letters competing
in it.  When that pair has exactly two members (or one member against
itself) the conflict can be posed to a user as a binary choice between two
parse shapes; anything wider, anything touching an empty production, and
any reduction of a forwarding production that cannot be pinned to a unique
parent is declared non-addressable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gramata.grammar import Grammar, Production, RankedSymbol, ranked_alphabet

END = "$end"


@dataclass(frozen=True)
class Item:
    prod: int  # index into the augmented production list
    dot: int
    lookahead: str


@dataclass(frozen=True)
class Conflict:
    state: int
    lookahead: str
    kind: str  # "shift-reduce" | "reduce-reduce"
    productions: tuple[int, ...]  # involved grammar production indices, sorted

    def to_json(self) -> dict:
        return {
            "state": self.state,
            "lookahead": self.lookahead,
            "kind": self.kind,
            "productions": list(self.productions),
        }


@dataclass(frozen=True)
class ConflictClass:
    """The pair of production letters competing across source conflicts."""

    pair: tuple[RankedSymbol, RankedSymbol]  # sorted by printable name
    kind: str  # "associativity" | "precedence"
    sources: tuple[tuple[int, str], ...]  # (state, lookahead) of merged conflicts

    @property
    def key(self) -> tuple[str, str]:
        return (self.pair[0].name, self.pair[1].name)


@dataclass(frozen=True)
class NonAddressable:
    reason: str
    sources: tuple[tuple[int, str], ...]


@dataclass
class Lr1Automaton:
    grammar: Grammar
    productions: tuple[Production, ...]  # grammar productions + augmented last
    states: list[frozenset[Item]]
    gotos: dict[tuple[int, str], int]

    @property
    def augmented_index(self) -> int:
        return len(self.productions) - 1


def _first_sets(g: Grammar, productions: tuple[Production, ...]):
    terms = set(g.terminals)
    nullable: set[str] = set()
    first: dict[str, set[str]] = {nt: set() for nt in g.nonterminals}
    first["$accept"] = set()
    changed = True
    while changed:
        changed = False
        for p in productions:
            fs = first.setdefault(p.lhs, set())
            all_nullable = True
            for s in p.rhs:
                if s in terms:
                    if s not in fs:
                        fs.add(s)
                        changed = True
                    all_nullable = False
                    break
                added = first.get(s, set()) - fs
                if added:
                    fs |= added
                    changed = True
                if s not in nullable:
                    all_nullable = False
                    break
            if all_nullable and p.lhs not in nullable:
                nullable.add(p.lhs)
                changed = True
    return first, nullable


def _first_of_seq(seq: tuple[str, ...], lookahead: str, first, nullable, terms) -> set[str]:
    out: set[str] = set()
    for s in seq:
        if s in terms:
            out.add(s)
            return out
        out |= first.get(s, set())
        if s not in nullable:
            return out
    out.add(lookahead)
    return out


def build_lr1(g: Grammar) -> Lr1Automaton:
    """Canonical LR(1) state machine with deterministic state numbering."""
    augmented = g.productions + (Production("$accept", (g.start,)),)
    terms = set(g.terminals)
    first, nullable = _first_sets(g, augmented)
    by_lhs: dict[str, list[int]] = {}
    for i, p in enumerate(augmented):
        by_lhs.setdefault(p.lhs, []).append(i)

    def closure(items: frozenset[Item]) -> frozenset[Item]:
        out = set(items)
        frontier = list(items)
        while frontier:
            it = frontier.pop()
            p = augmented[it.prod]
            if it.dot >= len(p.rhs):
                continue
            nxt = p.rhs[it.dot]
            if nxt in terms:
                continue
            suffix = p.rhs[it.dot + 1 :]
            las = _first_of_seq(suffix, it.lookahead, first, nullable, terms)
            for pi in by_lhs.get(nxt, ()):
                for la in las:
                    cand = Item(pi, 0, la)
                    if cand not in out:
                        out.add(cand)
                        frontier.append(cand)
        return frozenset(out)

    start_state = closure(frozenset({Item(len(augmented) - 1, 0, END)}))
    states: list[frozenset[Item]] = [start_state]
    index = {start_state: 0}
    gotos: dict[tuple[int, str], int] = {}
    work = [0]
    while work:
        si = work.pop(0)
        state = states[si]
        moves: dict[str, set[Item]] = {}
        for it in state:
            p = augmented[it.prod]
            if it.dot < len(p.rhs):
                moves.setdefault(p.rhs[it.dot], set()).add(
                    Item(it.prod, it.dot + 1, it.lookahead)
                )
        for sym in sorted(moves):
            nxt = closure(frozenset(moves[sym]))
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
                work.append(index[nxt])
            gotos[(si, sym)] = index[nxt]
    return Lr1Automaton(g, augmented, states, gotos)


def detect_conflicts(g: Grammar) -> list[Conflict]:
    """All LR(1) conflicts, ordered by (state, lookahead)."""
    return detect_conflicts_in(build_lr1(g))


def detect_conflicts_in(lr: Lr1Automaton) -> list[Conflict]:
    aug = lr.augmented_index
    terms = set(lr.grammar.terminals)
    conflicts: list[Conflict] = []
    for si, state in enumerate(lr.states):
        shifts: dict[str, set[int]] = {}
        reduces: dict[str, set[int]] = {}
        for it in state:
            p = lr.productions[it.prod]
            if it.dot < len(p.rhs):
                nxt = p.rhs[it.dot]
                if nxt in terms:
                    shifts.setdefault(nxt, set()).add(it.prod)
            elif it.prod != aug:
                reduces.setdefault(it.lookahead, set()).add(it.prod)
        for la in sorted(set(shifts) | set(reduces)):
            red = reduces.get(la, set())
            shf = shifts.get(la, set()) if la in reduces else set()
            if len(red) >= 2:
                involved = sorted(red | shf)
                conflicts.append(Conflict(si, la, "reduce-reduce", tuple(involved)))
            elif red and shf:
                conflicts.append(
                    Conflict(si, la, "shift-reduce", tuple(sorted(red | shf)))
                )
    conflicts.sort(key=lambda c: (c.state, c.lookahead))
    return conflicts


def _peel_pass_through(
    lr: Lr1Automaton, prod_index: int, lookahead: str
) -> int | None:
    """Map a forwarding-production reduction to the unique parent production.

    A reduction of ``q : q'`` under lookahead ``a`` stands in for reducing
    whatever production mentions ``q`` at a position where ``a`` can
    follow.  Mention sites inside further pass-through productions are
    climbed through, so chains of forwarding productions resolve to the
    real production at the top.  Returns that production's index, or
    None when it is not unique.
    """
    g = lr.grammar
    terms = set(g.terminals)
    first, nullable = _first_sets(g, g.productions)
    candidates: set[int] = set()
    seen: set[str] = set()
    queue = [lr.productions[prod_index].lhs]
    while queue:
        q = queue.pop()
        if q in seen:
            continue
        seen.add(q)
        for i, p in enumerate(g.productions):
            for pos, s in enumerate(p.rhs):
                if s != q:
                    continue
                suffix = p.rhs[pos + 1 :]
                las = _first_of_seq(suffix, lookahead, first, nullable, terms)
                if lookahead not in las:
                    continue
                if p.pass_through:
                    queue.append(p.lhs)
                else:
                    candidates.add(i)
    if len(candidates) == 1:
        return candidates.pop()
    return None


def classify_conflicts(
    g: Grammar, conflicts: list[Conflict], lr: Lr1Automaton | None = None
) -> tuple[list[ConflictClass], list[NonAddressable]]:
    """Group conflicts into binary-choice classes.

    Returns the addressable classes (deduplicated across states, with all
    source conflicts attached) and the reasons for anything that cannot be
    posed as a binary choice.
    """
    if lr is None:
        lr = build_lr1(g)
    alphabet = ranked_alphabet(g)
    classes: dict[tuple[str, str], ConflictClass] = {}
    failures: list[NonAddressable] = []
    for c in conflicts:
        reason = None
        symbols: dict[str, RankedSymbol] = {}
        for pi in c.productions:
            p = g.productions[pi]
            effective = pi
            if p.pass_through:
                peeled = _peel_pass_through(lr, pi, c.lookahead)
                if peeled is None:
                    reason = "pass-through reduction has no unique parent production"
                    break
                effective = peeled
            ep = g.productions[effective]
            if len(ep.rhs) == 0:
                reason = "conflict involves an empty production"
                break
            sym = alphabet[effective]
            symbols[sym.name] = sym
        if reason is None:
            if len(symbols) == 1:
                pair = (next(iter(symbols.values())),) * 2
                kind = "associativity"
            elif len(symbols) == 2:
                a, b = sorted(symbols.values(), key=lambda s: s.name)
                pair = (a, b)
                kind = "precedence"
            else:
                reason = f"conflict spans {len(symbols)} distinct production letters"
        if reason is not None:
            failures.append(NonAddressable(reason, ((c.state, c.lookahead),)))
            continue
        key = (pair[0].name, pair[1].name)
        prev = classes.get(key)
        if prev is None:
            classes[key] = ConflictClass(pair, kind, ((c.state, c.lookahead),))
        else:
            classes[key] = ConflictClass(
                prev.pair, prev.kind, prev.sources + ((c.state, c.lookahead),)
            )
    ordered = sorted(classes.values(), key=lambda cc: cc.sources[0])
    return ordered, failures
