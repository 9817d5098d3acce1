from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from stratmc import cgs
from stratmc.cgs import (FiniteMemoryStrategy, StrategyContext, abstraction,
                         determinize_nature, outcomes_bounded, play_equiv,
                         reachable_positions, shift)
from stratmc.errors import InvalidPlay, NotReachable, UnknownAgent

from generators import random_game, rng_for


def always(agent, move):
    return FiniteMemoryStrategy.constant(agent, move)


class TestPlayEquiv:
    def test_a_confuses_heads_and_tails(self, coin):
        assert play_equiv(coin, "a", ("v0", "vH"), ("v0", "vT"))

    def test_n_sees_everything(self, coin):
        assert not play_equiv(coin, "n", ("v0", "vH"), ("v0", "vT"))

    def test_reflexive(self, coin):
        assert play_equiv(coin, "a", ("v0", "vH", "w"), ("v0", "vH", "w"))

    def test_lengths_differ(self, coin):
        assert not play_equiv(coin, "a", ("v0",), ("v0", "vH"))

    def test_unknown_agent(self, coin):
        with pytest.raises(UnknownAgent):
            play_equiv(coin, "zed", ("v0",), ("v0",))

    def test_invalid_play(self, coin):
        with pytest.raises(InvalidPlay):
            play_equiv(coin, "a", ("v0", "w"), ("v0", "vH"))


class TestOutcomes:
    def test_n_always_heads(self, coin):
        ctx = StrategyContext({"n": always("n", "h")})
        assert outcomes_bounded(coin, ("v0",), ctx, 3) == {("v0", "vH", "w"), ("v0", "vH", "l")}

    def test_empty_context(self, coin):
        assert outcomes_bounded(coin, ("v0",), StrategyContext(), 2) == {("v0", "vH"), ("v0", "vT")}

    def test_fully_determined(self, coin):
        ctx = StrategyContext({"n": always("n", "h"), "a": always("a", "h")})
        assert outcomes_bounded(coin, ("v0",), ctx, 3) == {("v0", "vH", "w")}

    def test_horizon_shorter_than_prefix(self, coin):
        with pytest.raises(InvalidPlay):
            outcomes_bounded(coin, ("v0", "vH"), StrategyContext(), 1)


def test_context_compose_overrides_and_release():
    s1, s2 = always("a", "h"), always("a", "t")
    ctx = StrategyContext({"a": s1, "n": always("n", "h")})
    composed = ctx.compose({"a": s2})
    assert composed["a"] is s2 and "n" in composed
    assert "a" not in composed.release(["a"])


class TestAbstraction:
    def test_remove_a(self, coin):
        g = abstraction(coin, {"a"})
        assert g.agents == ("n",) and not g.deterministic
        for m in g.moves:
            assert g.successors("vH", (m,)) == {"w", "l"}

    def test_remove_nobody(self, coin):
        g = abstraction(coin, set())
        for (v, c), t in coin.transitions.items():
            assert g.successors(v, c) == {t}

    def test_remove_everyone(self, coin):
        g = abstraction(coin, {"n", "a"})
        assert g.agents == ()
        assert g.successors("v0", ()) == {"vH", "vT"}

    def test_unknown_agent(self, coin):
        with pytest.raises(UnknownAgent):
            abstraction(coin, {"zed"})

    def test_keeps_labels_and_observation(self, coin):
        g = abstraction(coin, {"n"})
        assert g.labels == coin.labels
        assert g.observation["a"] == coin.observation["a"]


class TestShift:
    def test_one_step(self, coin):
        assert shift(coin, "v0", "vH") == (coin, "vH")

    def test_reflexive(self, coin):
        assert shift(coin, "v0", "v0") == (coin, "v0")

    def test_unreachable(self, coin):
        with pytest.raises(NotReachable):
            shift(coin, "w", "v0")


class TestReachable:
    def test_from_root(self, coin):
        assert reachable_positions(coin, "v0") == set(coin.positions)

    def test_sink(self, coin):
        assert reachable_positions(coin, "w") == {"w"}

    def test_cycle(self):
        pos = ("x", "y", "z")
        trans = {(v, c): pos[(pos.index(v) + 1) % 3] for v in pos for c in product("m", repeat=1)}
        g = cgs.GameStructure(("a",), ("m",), pos, trans, {}, {"a": [list(pos)]})
        assert reachable_positions(g, "y") == set(pos)


class TestDeterminizeNature:
    def test_abstraction_of_a(self, coin):
        d = determinize_nature(abstraction(coin, {"a"}))
        assert d.deterministic and d.agents[:-1] == ("n",)
        nature = d.agents[-1]
        targets = {d.successors("vH", (m, k)) for m in coin.moves for k in d.moves}
        assert set().union(*targets) == {"w", "l"}
        assert len(d.observation[nature]) == len(coin.positions)

    def test_singleton_successors(self, coin):
        d = determinize_nature(abstraction(coin, set()))
        assert d.agents == ("n", "a", "nature")
        for v in coin.positions:
            for c in coin.joint_moves():
                assert {d.successors(v, c + (k,)) for k in d.moves} == {frozenset({coin.transitions[(v, c)]})}

    def test_zero_agents(self, coin):
        d = determinize_nature(abstraction(coin, {"n", "a"}))
        assert d.agents == ("nature",)

    def test_deterministic_input_untouched(self, coin):
        assert determinize_nature(coin) is coin


def _plays(g, v, depth, succ):
    plays = [(v,)]
    for _ in range(depth - 1):
        plays = [p + (w,) for p in plays for w in succ(p[-1])]
    return set(plays)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_determinize_preserves_plays(seed):
    rng = rng_for(seed)
    g = random_game(rng, deterministic=False)
    ab = abstraction(g, [g.agents[0]])
    d = determinize_nature(ab)
    for depth in range(1, 5):
        assert _plays(ab, ab.init, depth, ab.succ.get) == _plays(d, d.init, depth, d.succ.get)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_play_equiv_is_equivalence(seed):
    rng = rng_for(seed)
    g = random_game(rng)
    plays = sorted(_plays(g, g.init, 3, g.succ.get))
    a = rng.choice(g.agents)
    for r1 in plays:
        assert play_equiv(g, a, r1, r1)
        for r2 in plays:
            assert play_equiv(g, a, r1, r2) == play_equiv(g, a, r2, r1)
            for r3 in plays:
                if play_equiv(g, a, r1, r2) and play_equiv(g, a, r2, r3):
                    assert play_equiv(g, a, r1, r3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_abstraction_of_nobody_is_identity(seed):
    g = random_game(rng_for(seed))
    ab = abstraction(g, ())
    for (v, c), t in g.transitions.items():
        assert ab.successors(v, c) == {t}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_finite_memory_strategies_are_uniform(seed):
    rng = rng_for(seed)
    g = random_game(rng)
    a = rng.choice(g.agents)
    blocks = g.observation[a]
    # a random two-state machine over a's observation classes
    update = {(m, b): rng.randint(0, 1) for m in (0, 1) for b in blocks}
    output = {m: rng.choice(g.moves) for m in (0, 1)}
    s = FiniteMemoryStrategy(a, 0, update, output)
    plays = sorted(set().union(*(_plays(g, v, 4, g.succ.get) for v in g.positions)))
    for r1 in plays:
        for r2 in plays:
            if play_equiv(g, a, r1, r2):
                assert s.move_for(g, r1) == s.move_for(g, r2)
