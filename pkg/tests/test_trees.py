import json

import pytest
from hypothesis import given, strategies as st

from gramata.grammar import RankedSymbol
from gramata.trees import (
    Leaf,
    Node,
    TreeError,
    collapse_pass_through,
    depth,
    dumps,
    from_json,
    loads,
    node_count,
    render_ascii,
    to_json,
    tree_key,
)

PLUS = RankedSymbol("PLUS", 3)
INT = RankedSymbol("INT", 1)

ONE = Node(INT, (Leaf("INT"),))
SUM = Node(PLUS, (ONE, Leaf("PLUS"), ONE))


def test_depth_and_node_count():
    assert depth(Leaf("X")) == 0
    assert depth(ONE) == 1
    assert depth(SUM) == 2
    assert node_count(Leaf("X")) == 1
    assert node_count(ONE) == 2
    assert node_count(SUM) == 6


def test_node_arity_checked():
    with pytest.raises(TreeError, match="expects 3 children, got 1"):
        Node(PLUS, (ONE,))


def test_json_shapes():
    assert to_json(Leaf("INT")) == {"leaf": "INT"}
    assert to_json(Leaf("expr", wildcard=True)) == {"leaf": "expr", "wildcard": True}
    assert to_json(ONE) == {"sym": "INT", "rank": 1, "children": [{"leaf": "INT"}]}


def test_json_round_trip():
    for t in (Leaf("X"), Leaf("e", wildcard=True), ONE, SUM):
        assert from_json(to_json(t)) == t
        assert loads(dumps(t)) == t


def test_dumps_is_canonical():
    assert dumps(ONE) == '{"children":[{"leaf":"INT"}],"rank":1,"sym":"INT"}'
    assert tree_key(SUM) == dumps(SUM)


@pytest.mark.parametrize(
    "data",
    [
        "not a dict",
        {"leaf": 3},
        {"sym": "PLUS"},
        {"rank": 3},
        {"sym": "PLUS", "rank": "3", "children": []},
        {"sym": 3, "rank": 1, "children": []},
        {"sym": "PLUS", "rank": 3, "children": "xyz"},
        {"sym": "PLUS", "rank": 3, "children": [{"leaf": "a"}]},  # arity
    ],
)
def test_from_json_rejects_malformed(data):
    with pytest.raises(TreeError):
        from_json(data)


def test_loads_rejects_bad_json_text():
    with pytest.raises(json.JSONDecodeError):
        loads("{nope")


def test_render_ascii():
    assert render_ascii(SUM) == (
        "(PLUS,3)\n"
        "  (INT,1)\n"
        "    INT\n"
        "  PLUS\n"
        "  (INT,1)\n"
        "    INT"
    )
    assert render_ascii(Leaf("e", wildcard=True)) == "e"
    assert render_ascii(ONE, indent=2).startswith("    (INT,1)")


def test_collapse_pass_through():
    fwd = RankedSymbol("δ", 1, pass_through=True)
    wrapped = Node(PLUS, (Node(fwd, (ONE,)), Leaf("PLUS"), ONE))
    assert collapse_pass_through(wrapped) == SUM
    # a chain of forwarders collapses entirely
    assert collapse_pass_through(Node(fwd, (Node(fwd, (ONE,)),))) == ONE
    # a real unit production is kept
    assert collapse_pass_through(ONE) == ONE


_leaves = st.builds(Leaf, st.sampled_from(["A", "B"]), st.booleans())


def _nodes(children):
    return st.builds(
        lambda cs: Node(RankedSymbol("f", len(cs)), tuple(cs)),
        st.lists(children, min_size=1, max_size=3),
    )


_trees = st.recursive(_leaves, _nodes, max_leaves=12)


@given(_trees)
def test_json_round_trip_property(t):
    assert loads(dumps(t)) == t


@given(_trees)
def test_tree_key_is_stable_and_injective_on_equality(t):
    assert tree_key(t) == tree_key(loads(dumps(t)))


@given(_trees)
def test_render_has_one_line_per_node(t):
    assert len(render_ascii(t).splitlines()) == node_count(t)
