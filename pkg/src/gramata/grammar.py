"""Context-free grammars and their ranked production alphabet.

A grammar is read from a small line-oriented text format:

    %start stmt
    %token SEMI IF THEN ELSE
    %token LPAREN "()"
    stmt : decl SEMI | IF expr THEN stmt ;
    expr : ;                # an empty right-hand side is allowed

``%token`` declares terminals; a token name may be followed by a quoted
display label used wherever the symbol is printed (so a parenthesis pair
can print as ``()`` even though that is not a valid identifier).  Comments
run from ``#`` to end of line.  The special comment ``# pass-through`` on a
production line marks unit productions that merely forward one nonterminal;
the repair pipeline emits those and treats them as epsilon moves.

Every production is also a letter of a ranked alphabet: its name is the
display label of the first terminal on the right-hand side (or a delta
placeholder when there is none) and its rank is the length of the
right-hand side.  Names are disambiguated with ``#1``, ``#2``, ... only
when the (name, rank) pair would otherwise collide.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache

DELTA = "δ"

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class GrammarError(ValueError):
    """Raised for malformed grammar text or inconsistent grammar data."""


@dataclass(frozen=True)
class Production:
    """One rewriting rule ``lhs -> rhs``.

    ``pass_through`` marks synthesized unit productions whose only purpose
    is to forward another nonterminal; they must have a single nonterminal
    on the right-hand side.
    """

    lhs: str
    rhs: tuple[str, ...]
    pass_through: bool = False


@dataclass(frozen=True)
class RankedSymbol:
    """A production viewed as a letter of the ranked alphabet.

    ``sym`` and ``rank`` form the printable name, e.g. ``(PLUS,3)``;
    ``prod_index`` ties the letter back to its production.  Symbols from
    different grammars compare equal when their printable names agree,
    which is what lets recorded user choices survive a repair round.
    """

    sym: str
    rank: int
    prod_index: int = -1
    pass_through: bool = False

    @property
    def name(self) -> str:
        return f"({self.sym},{self.rank})"

    def __str__(self) -> str:
        return self.name

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RankedSymbol):
            return NotImplemented
        return self.sym == other.sym and self.rank == other.rank

    def __hash__(self) -> int:
        return hash((self.sym, self.rank))


@dataclass(frozen=True)
class Grammar:
    """An immutable CFG with ordered terminal and production lists.

    ``token_labels`` maps token names to display labels; order of
    ``terminals`` and ``productions`` is the declaration order and is
    preserved by serialization.
    """

    start: str
    terminals: tuple[str, ...]
    productions: tuple[Production, ...]
    token_labels: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        _validate(self)

    @property
    def nonterminals(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for p in self.productions:
            seen.setdefault(p.lhs, None)
        return tuple(seen)

    @property
    def labels(self) -> dict[str, str]:
        return dict(self.token_labels)

    def display(self, token: str) -> str:
        """The printable label for a terminal (defaults to its name)."""
        return self.labels.get(token, token)

    def prods_of(self, nt: str) -> tuple[Production, ...]:
        return tuple(p for p in self.productions if p.lhs == nt)

    def is_terminal(self, name: str) -> bool:
        return name in set(self.terminals)


def _validate(g: Grammar) -> None:
    terms = set(g.terminals)
    if len(terms) != len(g.terminals):
        raise GrammarError("duplicate %token declaration")
    nts = {p.lhs for p in g.productions}
    if terms & nts:
        raise GrammarError(
            f"symbols declared both terminal and nonterminal: {sorted(terms & nts)}"
        )
    if g.start not in nts:
        raise GrammarError(f"start symbol {g.start!r} has no production")
    seen: set[tuple[str, tuple[str, ...]]] = set()
    for p in g.productions:
        key = (p.lhs, p.rhs)
        if key in seen:
            raise GrammarError(f"duplicate production {p.lhs} : {' '.join(p.rhs)}")
        seen.add(key)
        for s in p.rhs:
            if s not in terms and s not in nts:
                raise GrammarError(
                    f"undeclared symbol {s!r} in production for {p.lhs!r}"
                )
        if p.pass_through and not (
            len(p.rhs) == 1 and p.rhs[0] in nts
        ):
            raise GrammarError(
                f"pass-through production for {p.lhs!r} must have a single "
                f"nonterminal on the right-hand side"
            )
    for name, _label in g.token_labels:
        if name not in terms:
            raise GrammarError(f"label for undeclared token {name!r}")


def parse_grammar(text: str) -> Grammar:
    """Parse grammar text, reporting the line number of the first fault."""
    start: str | None = None
    terminals: list[str] = []
    labels: list[tuple[str, str]] = []
    productions: list[Production] = []

    pending: list[str] = []  # symbols of the production being read
    pending_line = 0

    def fail(line_no: int, msg: str) -> None:
        raise GrammarError(f"line {line_no}: {msg}")

    def finish(line_no: int, pass_through: bool) -> None:
        # pending holds "lhs : sym ... [| sym ...]" for one statement
        if ":" not in pending:
            fail(line_no, "production is missing ':'")
        head = pending[: pending.index(":")]
        if len(head) != 1:
            fail(line_no, f"expected a single left-hand side, got {head}")
        lhs = head[0]
        if not _NAME_RE.fullmatch(lhs):
            fail(line_no, f"invalid name {lhs!r}")
        body = pending[pending.index(":") + 1 :]
        alts: list[list[str]] = [[]]
        for s in body:
            if s == "|":
                alts.append([])
            elif s == ":":
                fail(line_no, "unexpected ':' inside production body")
            else:
                if not _NAME_RE.fullmatch(s):
                    fail(line_no, f"invalid symbol name {s!r}")
                alts[-1].append(s)
        for alt in alts:
            productions.append(Production(lhs, tuple(alt)))
        if pass_through:
            last = productions[-1]
            productions[-1] = Production(last.lhs, last.rhs, pass_through=True)

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw
        comment = ""
        if "#" in line:
            line, comment = line.split("#", 1)
        is_pass_through = comment.strip() == "pass-through"
        stripped = line.strip()
        if not stripped and not pending:
            continue
        if stripped.startswith("%"):
            if pending:
                fail(line_no, "directive inside an unterminated production")
            parts = stripped.split()
            if parts[0] == "%start":
                if len(parts) != 2:
                    fail(line_no, "%start expects exactly one symbol")
                if start is not None:
                    fail(line_no, "duplicate %start directive")
                start = parts[1]
            elif parts[0] == "%token":
                rest = stripped[len("%token") :].strip()
                if not rest:
                    fail(line_no, "%token expects at least one name")
                for name, label in _parse_token_entries(rest, line_no, fail):
                    terminals.append(name)
                    if label is not None:
                        labels.append((name, label))
            else:
                fail(line_no, f"unknown directive {parts[0]!r}")
            continue
        # production text; may span lines until ';'
        if not pending:
            pending_line = line_no
        for tok in _split_production_tokens(stripped, line_no, fail):
            if tok == ";":
                finish(pending_line, is_pass_through)
                pending = []
            else:
                pending.append(tok)
    if pending:
        fail(pending_line, "unterminated production (missing ';')")
    if start is None:
        raise GrammarError("missing %start directive")
    return Grammar(
        start=start,
        terminals=tuple(terminals),
        productions=tuple(productions),
        token_labels=tuple(labels),
    )


def _parse_token_entries(rest: str, line_no: int, fail) -> list[tuple[str, str | None]]:
    entries: list[tuple[str, str | None]] = []
    i = 0
    while i < len(rest):
        if rest[i].isspace():
            i += 1
            continue
        m = _NAME_RE.match(rest, i)
        if not m:
            fail(line_no, f"invalid token name near {rest[i:]!r}")
        name = m.group(0)
        i = m.end()
        while i < len(rest) and rest[i].isspace():
            i += 1
        label: str | None = None
        if i < len(rest) and rest[i] == '"':
            end = rest.find('"', i + 1)
            if end < 0:
                fail(line_no, "unterminated token label")
            label = rest[i + 1 : end]
            i = end + 1
        entries.append((name, label))
    return entries


def _split_production_tokens(text: str, line_no: int, fail) -> list[str]:
    toks: list[str] = []
    for piece in text.replace(":", " : ").replace(";", " ; ").replace("|", " | ").split():
        toks.append(piece)
    return toks


def serialize_grammar(g: Grammar) -> str:
    """Render a grammar back to its text format.

    ``parse_grammar(serialize_grammar(g)) == g`` holds field for field.
    """
    out: list[str] = [f"%start {g.start}"]
    labels = g.labels
    plain = [t for t in g.terminals if t not in labels]
    if plain:
        out.append("%token " + " ".join(plain))
    for t in g.terminals:
        if t in labels:
            out.append(f'%token {t} "{labels[t]}"')
    for p in g.productions:
        body = " ".join(p.rhs)
        line = f"{p.lhs} : {body} ;" if body else f"{p.lhs} : ;"
        if p.pass_through:
            line += " # pass-through"
        out.append(line)
    return "\n".join(out) + "\n"


def ranked_alphabet(g: Grammar) -> tuple[RankedSymbol, ...]:
    """One ranked letter per production, in production order.

    The letter's name is the display label of the first terminal in the
    right-hand side, or a delta placeholder when the production derives
    only nonterminals.  When two productions would print identically, the
    later ones get ``#1``, ``#2``, ... suffixes in production order.

    Pass-through productions stay outside the suffix numbering: they are
    epsilon moves, never printable letters, and letting them claim
    suffixes would shift the names of real letters between repair rounds.
    """
    terms = set(g.terminals)
    symbols: list[RankedSymbol] = []
    used: dict[tuple[str, int], int] = {}
    for idx, p in enumerate(g.productions):
        base = DELTA
        for s in p.rhs:
            if s in terms:
                base = g.display(s)
                break
        rank = len(p.rhs)
        if p.pass_through:
            symbols.append(RankedSymbol(base, rank, idx, True))
            continue
        n = used.get((base, rank), 0)
        used[(base, rank)] = n + 1
        sym = base if n == 0 else f"{base}#{n}"
        symbols.append(RankedSymbol(sym, rank, idx, p.pass_through))
    return tuple(symbols)


def symbol_by_name(alphabet: tuple[RankedSymbol, ...], name: str) -> RankedSymbol | None:
    """Find a ranked symbol by its printable ``(sym,rank)`` name."""
    for s in alphabet:
        if s.name == name:
            return s
    return None


@lru_cache(maxsize=None)
def _reachable_from(g: Grammar, root: str) -> frozenset[str]:
    seen = {root}
    frontier = [root]
    nts = set(g.nonterminals)
    while frontier:
        nt = frontier.pop()
        for p in g.prods_of(nt):
            for s in p.rhs:
                if s in nts and s not in seen:
                    seen.add(s)
                    frontier.append(s)
    return frozenset(seen)


def can_derive(g: Grammar, src: str, dst: str) -> bool:
    """True when nonterminal ``dst`` is reachable from ``src``."""
    return dst in _reachable_from(g, src)
