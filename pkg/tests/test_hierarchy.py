import pytest
from hypothesis import given, settings, strategies as st

from stratmc import logic
from stratmc.cgs import abstraction, reachable_positions, shift
from stratmc.errors import BoundExceeded, UnknownAgent
from stratmc.hierarchy import (coalition_hierarchy, formula_hierarchical_in,
                               has_hierarchical_observation, observes_no_more,
                               prefix_hierarchy, qctl_hierarchical)

from generators import hierarchical_atlsc, random_game, rng_for


def sc(text):
    return logic.parse(text, logic.ATLSCI)


class TestObservesNoMore:
    def test_a_below_n(self, coin):
        assert observes_no_more(coin, "a", "n")

    def test_n_not_below_a(self, coin):
        assert not observes_no_more(coin, "n", "a")

    def test_reflexive(self, coin):
        assert observes_no_more(coin, "a", "a")

    def test_unknown(self, coin):
        with pytest.raises(UnknownAgent):
            observes_no_more(coin, "a", "zed")


class TestCoalitions:
    def test_coin_total(self, coin):
        h = coalition_hierarchy(coin, {"n", "a"})
        assert h.total and h.leq("a", "n") and not h.leq("n", "a")
        assert h.describe() == "a ⊑ n"

    def test_singleton(self, coin):
        assert coalition_hierarchy(coin, {"a"}).total

    def test_blind_incomparable(self, blind):
        h = coalition_hierarchy(blind, {"x", "y"})
        assert not h
        assert h.pair == ("x", "y")
        assert str(h).startswith("not hierarchical: agents x,y incomparable (positions ")

    def test_whole_game(self, coin, blind):
        assert has_hierarchical_observation(coin)
        assert not has_hierarchical_observation(blind)

    def test_one_agent(self):
        g = random_game(rng_for(3), nagents=1)
        assert has_hierarchical_observation(g)

    def test_ascending_order(self, coin):
        assert has_hierarchical_observation(coin).ascending() == ["a", "n"]


class TestFormulaHierarchy:
    def test_nested_more_informed(self, coin):
        assert formula_hierarchical_in(coin, sc("<<a>> X <<n,a>> F win"))

    def test_nested_less_informed(self, coin):
        rep = formula_hierarchical_in(coin, sc("<<n>> X <<a>> F win"))
        assert not rep
        assert rep.violations == ["binds <<n>> and <<a>>: n ⋢ a"]

    def test_no_binds(self, coin):
        assert formula_hierarchical_in(coin, sc("win or lose"))

    def test_non_hierarchical_coalition(self, blind):
        rep = formula_hierarchical_in(blind, sc("<<x,y>> F goal"))
        assert not rep and "coalition {x,y}" in rep.violations[0]


class TestQctlHierarchy:
    def test_growing(self):
        f = logic.parse("exists p obs {1} . exists q obs {1,2} . A G (p or q)", logic.QCTLI)
        assert qctl_hierarchical(f)

    def test_shrinking(self):
        f = logic.parse("exists p obs {1,2} . exists q obs {1} . A G p", logic.QCTLI)
        assert not qctl_hierarchical(f)

    def test_single(self):
        assert qctl_hierarchical(logic.parse("exists p obs {2} . A G p", logic.QCTLI))

    def test_full_observation_is_top(self):
        f = logic.parse("exists p obs {1} . exists q . A G q", logic.QCTLI)
        assert qctl_hierarchical(f, components=2)
        f = logic.parse("exists p . exists q obs {1} . A G q", logic.QCTLI)
        assert not qctl_hierarchical(f, components=2)


class TestPrefixHierarchy:
    def test_coin(self, coin):
        h = prefix_hierarchy(coin, "v0", ("v0", "vH"))
        assert h.leq("a", "n") and not h.leq("n", "a")

    def test_single_position(self, coin):
        assert prefix_hierarchy(coin, "v0", ("v0",)).total

    def test_blind_bits(self, blind):
        assert not prefix_hierarchy(blind, "s00", ("s00", "s01"))

    def test_bound(self, coin):
        with pytest.raises(BoundExceeded):
            prefix_hierarchy(coin, "v0", ("v0", "vH", "w", "w"), bound=3)


# ------------------------------------------------------------ properties

seeds = st.integers(0, 10**6)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_observes_no_more_is_a_preorder(seed):
    g = random_game(rng_for(seed), hierarchical=False)
    ags = g.agents
    for a in ags:
        assert observes_no_more(g, a, a)
        for b in ags:
            for c in ags:
                if observes_no_more(g, a, b) and observes_no_more(g, b, c):
                    assert observes_no_more(g, a, c)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_abstraction_preserves_hierarchy(seed):
    rng = rng_for(seed)
    g = random_game(rng, npos=rng.randint(2, 6))
    assert has_hierarchical_observation(g)
    keep = [a for a in g.agents if rng.random() < 0.5]
    assert has_hierarchical_observation(abstraction(g, keep))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_shift_keeps_classifier_output(seed):
    g = random_game(rng_for(seed), hierarchical=bool(seed % 2))
    base = bool(has_hierarchical_observation(g))
    for v in reachable_positions(g, g.init):
        shifted, start = shift(g, g.init, v)
        assert start == v
        assert bool(has_hierarchical_observation(shifted)) == base


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_suffix_play_keeps_comparabilities(seed):
    rng = rng_for(seed)
    g = random_game(rng, hierarchical=rng.random() < 0.5, sinks=False)
    play = [g.init]
    for _ in range(rng.randint(1, 5)):
        play.append(rng.choice(sorted(g.succ[play[-1]])))
    k = rng.randrange(1, len(play))
    whole = prefix_hierarchy(g, play[0], play)
    if not whole:
        return
    suffix = prefix_hierarchy(g, play[k], play[k:])
    assert suffix
    assert all(suffix.leq(a, b) for a, b in whole.relation)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_bind_subformulas_stay_hierarchical(seed):
    rng = rng_for(seed)
    g = random_game(rng)
    f = hierarchical_atlsc(rng, g)
    if not formula_hierarchical_in(g, f):
        return
    for _, sub in logic.subformulas(f):
        if sub.kind == "bind":
            assert formula_hierarchical_in(g, sub)
