import pytest
from hypothesis import given, strategies as st

from gramata.examples import (
    ContradictionError,
    Facts,
    UnrealizableExampleError,
    make_example,
    matches_forbidden,
    nonterminal_ordinal,
    nonterminal_positions,
    partition_classes,
    plan_prompts,
    realizable_positions,
    record_answer,
    skeleton,
)
from gramata.grammar import ranked_alphabet, symbol_by_name
from gramata.lr import classify_conflicts, detect_conflicts
from gramata.trees import Leaf, Node, node_count, to_json


@pytest.fixture(scope="module")
def sym(g0):
    alpha = ranked_alphabet(g0)
    return lambda name: symbol_by_name(alpha, name)


@pytest.fixture(scope="module")
def g0_classes(g0):
    classes, failures = classify_conflicts(g0, detect_conflicts(g0))
    assert not failures
    return classes


def test_nonterminal_positions(g0, sym):
    assert nonterminal_positions(g0, sym("(PLUS,3)")) == [0, 2]
    assert nonterminal_positions(g0, sym("(IF,6)")) == [1, 3, 5]
    assert nonterminal_positions(g0, sym("(SEMI,2)")) == [0]
    assert nonterminal_positions(g0, sym("(INT,1)")) == []


def test_nonterminal_ordinal(g0, sym):
    assert nonterminal_ordinal(g0, sym("(IF,6)"), 1) == 0
    assert nonterminal_ordinal(g0, sym("(IF,6)"), 3) == 1
    assert nonterminal_ordinal(g0, sym("(IF,6)"), 5) == 2
    with pytest.raises(UnrealizableExampleError):
        nonterminal_ordinal(g0, sym("(IF,6)"), 0)


def test_realizable_positions(g0, sym):
    plus, star = sym("(PLUS,3)"), sym("(STAR,3)")
    assert realizable_positions(g0, plus, star) == [0, 2]
    assert realizable_positions(g0, sym("(SEMI,2)"), plus) == [0]  # via decl
    # statements never nest inside expressions
    assert realizable_positions(g0, plus, sym("(IF,4)")) == []


def test_make_example(g0, sym):
    e = make_example(g0, sym("(PLUS,3)"), sym("(STAR,3)"), 0)
    assert e.kind == "precedence"
    e2 = make_example(g0, sym("(PLUS,3)"), sym("(PLUS,3)"), 2)
    assert e2.kind == "associativity"
    with pytest.raises(UnrealizableExampleError):
        make_example(g0, sym("(PLUS,3)"), sym("(IF,4)"), 0)
    with pytest.raises(UnrealizableExampleError):
        make_example(g0, sym("(PLUS,3)"), sym("(STAR,3)"), 1)  # terminal slot


def test_skeleton_shape(g0, sym):
    e = make_example(g0, sym("(PLUS,3)"), sym("(STAR,3)"), 0)
    t = skeleton(g0, e)
    assert to_json(t) == {
        "sym": "PLUS",
        "rank": 3,
        "children": [
            {
                "sym": "STAR",
                "rank": 3,
                "children": [
                    {"leaf": "expr", "wildcard": True},
                    {"leaf": "STAR"},
                    {"leaf": "expr", "wildcard": True},
                ],
            },
            {"leaf": "PLUS"},
            {"leaf": "expr", "wildcard": True},
        ],
    }


def test_skeleton_has_exactly_two_internal_nodes(g0, g0_classes):
    for p in plan_prompts(g0, g0_classes, Facts()):
        for t in p.trees:
            internal = node_count(t) - sum(
                1 for _ in _leaves(t)
            )
            assert internal == 2


def _leaves(t):
    if isinstance(t, Leaf):
        yield t
        return
    for c in t.children:
        yield from _leaves(c)


def test_matches_forbidden_precedence_any_slot(g0, sym):
    plus, star = sym("(PLUS,3)"), sym("(STAR,3)")
    e = make_example(g0, plus, star, 0)  # forbid STAR under PLUS
    x = Node(sym("(INT,1)"), (Leaf("INT"),))
    star_t = Node(star, (x, Leaf("STAR"), x))
    left = Node(plus, (star_t, Leaf("PLUS"), x))
    right = Node(plus, (x, Leaf("PLUS"), star_t))
    assert matches_forbidden(left, e)
    assert matches_forbidden(right, e)  # precedence ignores the slot
    assert not matches_forbidden(Node(plus, (x, Leaf("PLUS"), x)), e)


def test_matches_forbidden_associativity_pins_slot(g0, sym):
    plus = sym("(PLUS,3)")
    e = make_example(g0, plus, plus, 2)  # forbid PLUS under its right arm
    x = Node(sym("(INT,1)"), (Leaf("INT"),))
    inner = Node(plus, (x, Leaf("PLUS"), x))
    assert matches_forbidden(Node(plus, (x, Leaf("PLUS"), inner)), e)
    assert not matches_forbidden(Node(plus, (inner, Leaf("PLUS"), x)), e)


def test_matches_forbidden_sees_through_forwarding(g0, sym):
    from gramata.grammar import RankedSymbol

    plus = sym("(PLUS,3)")
    fwd = RankedSymbol("δ", 1, pass_through=True)
    e = make_example(g0, plus, plus, 2)
    x = Node(sym("(INT,1)"), (Leaf("INT"),))
    inner = Node(fwd, (Node(plus, (x, Leaf("PLUS"), x)),))
    assert matches_forbidden(Node(plus, (x, Leaf("PLUS"), inner)), e)


def test_facts_precedence_and_contradictions():
    f = Facts()
    f.add_precedence("(a,1)", "(b,1)")  # b binds tighter than a
    assert f.binds_tighter("(b,1)", "(a,1)")
    assert not f.binds_tighter("(a,1)", "(b,1)")
    assert f.knows_order("(a,1)", "(b,1)")
    f.add_precedence("(b,1)", "(c,1)")
    assert f.binds_tighter("(c,1)", "(a,1)")  # transitive
    with pytest.raises(ContradictionError):
        f.add_precedence("(c,1)", "(a,1)")  # would close a cycle
    with pytest.raises(ContradictionError):
        f.add_precedence("(a,1)", "(a,1)")


def test_facts_assoc():
    f = Facts()
    assert not f.knows_assoc("(PLUS,3)")
    f.add_assoc("(PLUS,3)", 1)
    assert f.knows_assoc("(PLUS,3)")
    assert ("(PLUS,3)", 1) in f.assoc


def test_partition_classes_g0(g0, g0_classes):
    groups = partition_classes(g0, g0_classes)
    assert groups == [
        frozenset({"(IF,4)", "(IF,6)"}),
        frozenset({"(PLUS,3)", "(STAR,3)"}),
    ]


def test_plan_prompts_g0_order(g0, g0_classes):
    prompts = plan_prompts(g0, g0_classes, Facts())
    assert [(p.id, p.kind, p.pair) for p in prompts] == [
        (0, "precedence", ("(PLUS,3)", "(STAR,3)")),
        (1, "associativity", ("(PLUS,3)", "(PLUS,3)")),
        (2, "associativity", ("(STAR,3)", "(STAR,3)")),
        (3, "precedence", ("(IF,4)", "(IF,6)")),
    ]


def test_plan_prompts_skips_settled_classes(g0, g0_classes):
    facts = Facts()
    facts.add_precedence("(PLUS,3)", "(STAR,3)")
    facts.add_assoc("(PLUS,3)", 1)
    prompts = plan_prompts(g0, g0_classes, facts)
    assert [p.pair for p in prompts] == [
        ("(STAR,3)", "(STAR,3)"),
        ("(IF,4)", "(IF,6)"),
    ]


def test_plan_prompts_settles_transitively():
    """Two operator-vs-operator answers can pin the operators' own order."""
    from gramata.benchmarks import load_benchmark

    g = load_benchmark("g_ifstar")
    classes, _ = classify_conflicts(g, detect_conflicts(g))
    facts = Facts()
    facts.add_precedence("(IF,4)", "(STAR,3)")  # STAR tighter than IF4
    facts.add_precedence("(STAR,3)", "(IF,6)")  # IF6 tighter than STAR
    prompts = plan_prompts(g, classes, facts)
    assert prompts == []  # (IF,4) vs (IF,6) follows transitively


def test_prompt_to_json(g0, g0_classes):
    p = plan_prompts(g0, g0_classes, Facts())[0]
    j = p.to_json()
    assert j["id"] == 0
    assert j["kind"] == "precedence"
    assert j["pair"] == ["(PLUS,3)", "(STAR,3)"]
    assert [o["sym"] for o in j["options"]] == ["PLUS", "STAR"]


def test_record_answer_precedence(g0, g0_classes):
    facts = Facts()
    p = plan_prompts(g0, g0_classes, Facts())[0]
    rejected = record_answer(g0, facts, p, 0)
    # option 0 nests STAR inside PLUS: STAR binds tighter
    assert facts.binds_tighter("(STAR,3)", "(PLUS,3)")
    assert rejected == p.options[1]


def test_record_answer_associativity(g0, g0_classes):
    facts = Facts()
    p = plan_prompts(g0, g0_classes, Facts())[1]
    assert p.kind == "associativity"
    rejected = record_answer(g0, facts, p, 0)
    # option 0 nests on the left arm; the right-arm slot becomes forbidden
    assert facts.assoc == {("(PLUS,3)", 1)}
    assert rejected.idx == 2


def test_record_answer_rejects_bad_choice(g0, g0_classes):
    p = plan_prompts(g0, g0_classes, Facts())[0]
    with pytest.raises(ValueError, match="choice must be 0 or 1"):
        record_answer(g0, Facts(), p, 2)


@given(st.lists(st.integers(0, 1), min_size=4, max_size=4))
def test_any_answer_script_yields_consistent_facts(g0, answers):
    """No four-answer script on the statement grammar can self-contradict."""
    classes, _ = classify_conflicts(g0, detect_conflicts(g0))
    facts = Facts()
    i = 0
    while True:
        prompts = plan_prompts(g0, classes, facts)
        if not prompts:
            break
        record_answer(g0, facts, prompts[0], answers[i])
        i += 1
    assert i == 4
