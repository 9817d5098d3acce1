import pytest

from stratmc import logic
from stratmc.errors import BoundExceeded
from stratmc.oracle import (Verdict, and3, not3, or3, oracle_bounded_atl,
                            oracle_bounded_qctl, oracle_single)
from stratmc.translate import build_cks, translate

from generators import random_game, rng_for


def atl(text):
    return logic.parse(text, logic.ATLI)


def sc(text):
    return logic.parse(text, logic.ATLSCI)


class TestKleene:
    def test_tables(self):
        assert and3(True, None) is None and and3(False, None) is False
        assert or3(True, None) is True and or3(False, None) is None
        assert not3(None) is None and not3(True) is False

    def test_verdict(self):
        assert Verdict.of(True) is Verdict.TRUE
        assert not Verdict.of(None).definite


class TestSingle:
    def test_coin_blind_guess(self, coin):
        assert oracle_single(coin, "v0", "a", ("reach", {"w"})) is False

    def test_coin_from_heads(self, coin):
        assert oracle_single(coin, "vH", "a", ("reach", {"w"})) is True

    def test_vacuous_safety(self, coin):
        for v in coin.positions:
            for a in coin.agents:
                assert oracle_single(coin, v, a, ("safe", set(coin.positions)))

    def test_buchi(self, coin):
        # from vH the agent can stay in w forever
        assert oracle_single(coin, "vH", "a", ("buchi", {"w"}))
        assert not oracle_single(coin, "v0", "a", ("buchi", {"w"}))

    def test_cap(self, coin):
        with pytest.raises(BoundExceeded):
            oracle_single(coin, "v0", "a", ("reach", {"w"}), cap=1)


class TestBoundedATL:
    def test_a_alone(self, coin):
        assert oracle_bounded_atl(coin, "v0", atl("<<a>> F win"), 3) is Verdict.FALSE

    def test_grand_coalition(self, coin):
        assert oracle_bounded_atl(coin, "v0", atl("<<n,a>> F win"), 3) is Verdict.TRUE

    def test_rebind(self, coin):
        f = sc("<<a>> X <<n,a>> F win")
        assert oracle_bounded_atl(coin, "v0", f, 4) is Verdict.TRUE

    def test_committed_move(self, coin):
        f = sc("<<a>> X <<n>> F win")
        assert oracle_bounded_atl(coin, "v0", f, 4) is Verdict.FALSE

    def test_horizon_cap(self, coin):
        with pytest.raises(BoundExceeded):
            oracle_bounded_atl(coin, "v0", atl("<<a>> F win"), 7)

    def test_open_formula(self, coin):
        with pytest.raises(ValueError):
            oracle_bounded_atl(coin, "v0", logic.parse("F win", logic.LTL), 3)


class TestBoundedQCTL:
    def test_label_everything(self, coin):
        k = build_cks(coin, ("a", "n"))
        f = logic.parse("exists p obs {1} . A G p", logic.QCTLI)
        assert oracle_bounded_qctl(k, k.state_of["v0"], f, 2) is Verdict.TRUE

    def test_translated_coin(self, coin):
        tr = translate(coin, "v0", sc("<<a>> F win"))
        assert oracle_bounded_qctl(tr.cks, tr.state, tr.formula, 3) is Verdict.FALSE

    def test_win_reachable(self, coin):
        k = build_cks(coin, ("a", "n"))
        f = logic.parse("A G not win", logic.QCTLI)
        assert oracle_bounded_qctl(k, k.state_of["v0"], f, 3) is Verdict.FALSE

    def test_depth_cap(self, coin):
        k = build_cks(coin, ("a", "n"))
        with pytest.raises(BoundExceeded):
            oracle_bounded_qctl(k, k.state_of["v0"], logic.parse("A G p", logic.QCTLI), 6)


# ------------------------------------------------------------ properties

def _singleton_instances(n=100):
    for i in range(n):
        rng = rng_for(i)
        g = random_game(rng, npos=rng.randint(2, 5), deterministic=rng.random() < 0.7)
        a = rng.choice(g.agents)
        target = {v for v in g.positions if rng.random() < 0.5} or {g.positions[-1]}
        g = g.with_labels({v: {"t"} for v in target})
        kind = rng.choice(["reach", "safe"])
        f = atl(f"<<{a}>> " + ("F t" if kind == "reach" else "G t"))
        yield g, a, kind, target, f


def test_single_agrees_with_bounded():
    definite = 0
    for g, a, kind, target, f in _singleton_instances():
        exact = oracle_single(g, g.init, a, (kind, target))
        try:
            bounded = oracle_bounded_atl(g, g.init, f, 4, search_cap=20_000)
        except BoundExceeded:
            continue
        if bounded.definite:
            definite += 1
            assert (bounded is Verdict.TRUE) == exact
    assert definite >= 60


def test_definite_verdicts_survive_longer_horizons():
    for g, a, kind, target, f in _singleton_instances(60):
        try:
            vs = [oracle_bounded_atl(g, g.init, f, h, search_cap=20_000) for h in (2, 3, 4)]
        except BoundExceeded:
            continue
        for short, long in zip(vs, vs[1:]):
            if short.definite and long.definite:
                assert short is long
