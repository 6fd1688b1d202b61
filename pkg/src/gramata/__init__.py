"""Interactive repair of ambiguous context-free grammars.

The package detects LR(1) conflicts in a grammar, turns each conflict into
a binary choice between two candidate parse shapes, and compiles the user's
choices into a conflict-free grammar by learning a restriction tree
automaton and intersecting it with the automaton of the original grammar.
"""

from gramata.grammar import Grammar, Production, RankedSymbol, GrammarError, parse_grammar, serialize_grammar, ranked_alphabet

__all__ = [
    "Grammar",
    "Production",
    "RankedSymbol",
    "GrammarError",
    "parse_grammar",
    "serialize_grammar",
    "ranked_alphabet",
]
