import itertools
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moelab import (
    BudgetError,
    Cyclic,
    DirectPower,
    Exceeds,
    FiniteTable,
    Free,
    FreeProduct,
    GroupError,
)
from moelab.groups import (
    all_elements,
    ball,
    element_order,
    format_bigint,
    get_budget,
    nonidentity_coordinate_count,
    product,
    reduced_decomposition,
    reduced_length,
    symmetric_ball,
    word_length,
)

from conftest import CORPUS


# ---------------------------------------------------------------------------
# strategies: elements built as products of random generator letters


def words(G, max_len=8):
    letters = list(G.generators) + [G.inverse(s) for s in G.generators]
    return st.lists(st.sampled_from(letters), max_size=max_len).map(lambda w: product(G, w))


F2 = Free(2)
F3 = Free(3)
Z3Z4 = FreeProduct(((Cyclic(3), 1), (Cyclic(4), 1)))
Z5P3 = FreeProduct(((Cyclic(5), 3),))
Z3SQ = DirectPower(Cyclic(3), 2)
INFINITE = [F2, F3, Z3Z4, Z5P3, DirectPower(F2, 2)]


@pytest.mark.parametrize("G", INFINITE, ids=str)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_axioms_sampled(G, data):
    a, b, c = (data.draw(words(G)) for _ in range(3))
    e = G.identity()
    assert G.multiply(G.multiply(a, b), c) == G.multiply(a, G.multiply(b, c))
    assert G.multiply(a, e) == a == G.multiply(e, a)
    assert G.multiply(G.inverse(a), a) == e == G.multiply(a, G.inverse(a))


def test_axioms_exhaustive(small_group):
    G = small_group
    els = all_elements(G)
    assert len(els) == G.order
    e = G.identity()
    for a in els:
        assert G.multiply(G.inverse(a), a) == e
        for b in els:
            ab = G.multiply(a, b)
            for c in els[:6]:
                assert G.multiply(ab, c) == G.multiply(a, G.multiply(b, c))


def test_associativity_on_ball3():
    for G in (F2, Z3Z4):
        b3 = ball(G, 3)
        for a, b, c in itertools.product(b3, repeat=3):
            assert G.multiply(G.multiply(a, b), c) == G.multiply(a, G.multiply(b, c))


@settings(max_examples=80, deadline=None)
@given(words(F2, 12))
def test_free_normal_form_is_reduced(g):
    assert all(x != -y for x, y in zip(g, g[1:]))
    assert all(x != 0 and abs(x) <= 2 for x in g)


@settings(max_examples=80, deadline=None)
@given(words(Z3Z4, 12))
def test_free_product_syllables_alternate(g):
    factors = [k for k, _ in g]
    assert all(x != y for x, y in zip(factors, factors[1:]))
    assert all(x != 0 for _, x in g)


@settings(max_examples=80, deadline=None)
@given(words(Z5P3, 10))
def test_reduced_decomposition_round_trip(g):
    dec = reduced_decomposition(Z5P3, g)
    assert product(Z5P3, [Z5P3.embed(k, x) for k, x in dec]) == g
    assert reduced_length(Z5P3, g) == len(dec)


def test_multiply_examples():
    assert Cyclic(5).multiply(3, 4) == 2
    assert F2.multiply(F2.parse_element("ab^-1"), F2.parse_element("ba")) == F2.parse_element("aa")
    P = FreeProduct(((Cyclic(3), 2),))
    x1 = P.embed(0, 1)
    assert P.multiply(x1, P.embed(0, 2)) == P.identity()


def test_reduced_decomposition_examples():
    P = FreeProduct(((Cyclic(3), 2),))
    x, y = P.embed(0, 1), P.embed(1, 1)
    g = product(P, [x, y, x])
    assert reduced_decomposition(P, g) == [(0, 1), (1, 1), (0, 1)]
    assert reduced_length(P, g) == 3
    assert reduced_decomposition(P, P.identity()) == []
    Q = FreeProduct(((Cyclic(5), 2),))
    assert reduced_decomposition(Q, Q.multiply(Q.embed(0, 2), Q.embed(0, 3))) == []


def test_word_length_examples():
    assert word_length(Cyclic(5), 3) == 3
    assert word_length(F2, F2.parse_element("ab")) == 2
    assert word_length(F2, F2.identity()) == 0
    for cutoff in (5, 64):
        w = word_length(F2, F2.parse_element("a^-1"), cutoff=cutoff)
        assert isinstance(w, Exceeds) and str(w) == f"> {cutoff}"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([1, 2, 3]), max_size=6), st.lists(st.sampled_from([1, 2, 3]), max_size=6))
def test_word_length_positive_words_free(u, v):
    g, h = tuple(u), tuple(v)
    assert word_length(F3, g) == len(u)
    assert word_length(F3, F3.multiply(g, h)) == len(u) + len(v)


def test_word_length_subadditive(small_group):
    G = small_group
    els = all_elements(G)
    lengths = {g: word_length(G, g) for g in els}
    for g in els:
        for h in els:
            lg, lh = lengths[g], lengths[h]
            if isinstance(lg, int) and isinstance(lh, int):
                assert lengths[G.multiply(g, h)] <= lg + lh


def _free_product_ball_size(factor_order, copies, m):
    """Positive ball of a free power of Z_n: syllables x^j have length j."""
    parts = range(1, factor_order)

    @__import__("functools").lru_cache(None)
    def count(L, first):
        if L == 0:
            return 1
        choices = copies if first else copies - 1
        return sum(choices * count(L - p, False) for p in parts if p <= L)

    return sum(count(L, True) for L in range(m + 1))


@pytest.mark.parametrize("m", range(5))
def test_ball_sizes(m):
    assert len(ball(F2, m)) == sum(2**j for j in range(m + 1))
    assert len(ball(F3, m)) == sum(3**j for j in range(m + 1))
    assert len(ball(Cyclic(5), m)) == min(m + 1, 5)
    assert len(ball(Z5P3, m)) == _free_product_ball_size(5, 3, m)
    assert len(symmetric_ball(F2, m)) == (1 if m == 0 else 1 + 4 * (3**m - 1) // 2)


def test_ball_examples():
    assert [F2.format(x) for x in ball(F2, 2)] == ["e", "a", "b", "aa", "ab", "ba", "bb"]
    assert ball(Cyclic(5), 2) == [0, 1, 2]
    for G in list(CORPUS.values()) + INFINITE:
        assert ball(G, 0) == [G.identity()]


def test_ball_nested_and_bounded(small_group):
    G = small_group
    n = len(G.generators)
    for m in range(4):
        assert set(ball(G, m)) <= set(ball(G, m + 1))
    assert len(ball(G, 2)) <= n * n + n + 1
    assert all(word_length(G, g) <= 2 for g in ball(G, 2))


def test_ball_is_deterministic():
    assert ball(Z3Z4, 4) == ball(Z3Z4, 4)
    assert ball(DirectPower(F2, 2), 3) == ball(DirectPower(F2, 2), 3)


def test_element_order_examples():
    assert element_order(Cyclic(5), 2) == 5
    assert element_order(Cyclic(4), 2) == 2
    assert str(element_order(F2, (1,), cutoff=100)) == "> 100"
    for n in range(2, 13):
        for g in range(n):
            assert element_order(Cyclic(n), g) == n // math.gcd(n, g)


def test_nonidentity_coordinate_count():
    assert nonidentity_coordinate_count(DirectPower(Cyclic(3), 3), (1, 0, 2)) == 2
    assert nonidentity_coordinate_count(DirectPower(Cyclic(3), 3), (0, 0, 0)) == 0
    G = DirectPower(F2, 2)
    assert nonidentity_coordinate_count(G, (F2.parse_element("ab"), ())) == 1


def test_generators_exclude_identity():
    with pytest.raises(GroupError):
        Cyclic(5, (0, 1))
    with pytest.raises(GroupError):
        FiniteTable(("e", "x"), ((0, 1), (1, 0)), (0,))


@pytest.mark.parametrize(
    "elements,table",
    [
        (("e", "x"), ((0, 1), (1, 1))),  # no inverse for x
        (("e", "x", "y"), ((0, 1, 2), (1, 2, 0), (2, 1, 0))),  # not associative / not a group
        (("e", "x"), ((0, 1),)),  # wrong shape
    ],
)
def test_table_axioms_checked(elements, table):
    with pytest.raises(GroupError):
        FiniteTable(elements, table, (1,))


def test_table_from_json_labels(tmp_path):
    path = tmp_path / "z3.json"
    path.write_text(json.dumps({"elements": ["e", "r", "rr"], "table": [["e", "r", "rr"], ["r", "rr", "e"], ["rr", "e", "r"]], "generators": ["r"]}))
    G = FiniteTable.from_json(path)
    assert G.order == 3 and [G.format(x) for x in ball(G, 2)] == ["e", "r", "rr"]


def test_huge_free_product_guards():
    G = FreeProduct(((Cyclic(5), 10**84),))
    assert G.factor_count == 10**84
    assert G.generator_count == 10**84
    with pytest.raises(BudgetError):
        ball(G, 1)


def test_budget_environment_override(monkeypatch):
    monkeypatch.setenv("MOELAB_BUDGET", "10")
    assert get_budget(4096) == 10
    with pytest.raises(BudgetError) as info:
        ball(F2, 3)
    assert "budget 10" in str(info.value)


def test_format_bigint():
    assert format_bigint(10**84) == "10^84"
    assert format_bigint(999) == "999"
    assert format_bigint(1234) == "1234"
