import pytest
from hypothesis import given, settings, strategies as st

from stratmc import logic
from stratmc.errors import BoundExceeded, NotClosed, NotHierarchicalFormula
from stratmc.hierarchy import qctl_hierarchical
from stratmc.oracle import Verdict, oracle_bounded_qctl
from stratmc.qctl_engine import (check_uniform_labeling, mc_ctl_star, mc_qctl,
                                 run_qctl, unfolding)
from stratmc.translate import build_cks, translate

from generators import (random_ctl_state, random_game, random_qctl, rng_for)


def q(text):
    return logic.parse(text, logic.QCTLI)


@pytest.fixture
def coin_cks(coin):
    return build_cks(coin, ("a", "n"))


class TestEngine:
    def test_a_g_not_win(self, coin_cks):
        assert mc_qctl(coin_cks, coin_cks.state_of["v0"], q("A G not win")) is False

    @pytest.mark.parametrize("obs", ["{1}", "{2}", "{1,2,3}"])
    def test_unconstrained_label(self, coin_cks, obs):
        s = coin_cks.state_of["v0"]
        assert mc_qctl(coin_cks, s, q(f"exists p obs {obs} . p")) is True

    def test_coin_translation(self, coin):
        tr = translate(coin, "v0", logic.parse("<<a>> F win", logic.ATLSCI))
        assert mc_qctl(tr.cks, tr.state, tr.formula) is False

    def test_coin_translation_vh(self, coin):
        tr = translate(coin, "vH", logic.parse("<<a>> F win", logic.ATLSCI))
        assert mc_qctl(tr.cks, tr.state, tr.formula) is True

    def test_blind_guess_cannot_track_position(self, coin_cks):
        # a labelling uniform for a cannot separate vH from vT
        s = coin_cks.state_of["v0"]
        assert not mc_qctl(coin_cks, s, q("exists x obs {1} . A X (x <-> p_vH)"))
        assert mc_qctl(coin_cks, s, q("exists x obs {2} . A X (x <-> p_vH)"))

    def test_full_observation_shorthand(self, coin_cks):
        s = coin_cks.state_of["v0"]
        assert mc_qctl(coin_cks, s, q("exists x . A G (x <-> win)"))

    def test_project_example(self, coin_cks):
        s = coin_cks.state_of["v0"]
        assert mc_qctl(coin_cks, s, q("exists p . A G (p <-> win)"))

    def test_rejects_open(self, coin_cks):
        with pytest.raises(NotClosed):
            mc_qctl(coin_cks, coin_cks.state_of["v0"], q("exists p obs {1} . G p"))

    def test_rejects_shrinking_observation(self, coin_cks):
        f = q("exists p obs {1,2} . exists r obs {1} . A G (p or r)")
        with pytest.raises(NotHierarchicalFormula):
            mc_qctl(coin_cks, coin_cks.state_of["v0"], f)

    def test_budget_is_reported(self, coin):
        from stratmc.errors import StateBudgetExceeded
        tr = translate(coin, "v0", logic.parse("<<n,a>> F win", logic.ATLSCI))
        with pytest.raises(StateBudgetExceeded) as exc:
            run_qctl(tr.cks, tr.state, tr.formula, budget=50)
        assert exc.value.construction

    def test_unknown_state(self, coin_cks):
        with pytest.raises(ValueError):
            run_qctl(coin_cks, "nowhere", q("A G not win"))


class TestUniformLabeling:
    def _tree(self, cks, depth, marked):
        return {n: ({"p"} if marked(n) else set())
                for n in unfolding(cks, cks.state_of["v0"], depth)}

    def test_constant(self, coin_cks):
        assert check_uniform_labeling(coin_cks, self._tree(coin_cks, 2, lambda n: True), "p", {1})

    def test_split_by_hidden_coin(self, coin_cks):
        t = self._tree(coin_cks, 2, lambda n: coin_cks.position_of[n[-1]] == "vH")
        assert not check_uniform_labeling(coin_cks, t, "p", {1})

    def test_coin_visible_to_n(self, coin_cks):
        t = self._tree(coin_cks, 2, lambda n: coin_cks.position_of[n[-1]] == "vH")
        assert check_uniform_labeling(coin_cks, t, "p", {1, 2})


class TestCtlStar:
    def test_e_f_win(self, coin_cks):
        assert mc_ctl_star(coin_cks, coin_cks.state_of["v0"], q("E F win"))

    def test_a_f_win(self, coin_cks):
        assert not mc_ctl_star(coin_cks, coin_cks.state_of["v0"], q("A F win"))

    def test_true(self, coin_cks):
        assert mc_ctl_star(coin_cks, coin_cks.state_of["l"], logic.TRUE)

    def test_nested(self, coin_cks):
        assert mc_ctl_star(coin_cks, coin_cks.state_of["v0"], q("A X E X win"))
        assert not mc_ctl_star(coin_cks, coin_cks.state_of["v0"], q("E X A X win"))


# ------------------------------------------------------------ properties

def _model(rng):
    g = random_game(rng, npos=rng.randint(2, 5), nagents=rng.randint(1, 2))
    k = build_cks(g)
    return k, k.state_of[g.init]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_quantifier_free_matches_ctl_star(seed):
    rng = rng_for(seed)
    k, s = _model(rng)
    f = random_ctl_state(rng, ("p", "q"), 2)
    assert mc_qctl(k, s, f) == mc_ctl_star(k, s, f)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_more_observation_never_hurts(seed):
    rng = rng_for(seed)
    k, s = _model(rng)
    n = k.ncomponents
    small = frozenset(rng.sample(range(1, n + 1), rng.randint(1, n)))
    big = small | frozenset(rng.sample(range(1, n + 1), rng.randint(0, n)))
    body = random_ctl_state(rng, ("p", "q", "x"), 1)
    if mc_qctl(k, s, logic.Exists("x", small, body)):
        assert mc_qctl(k, s, logic.Exists("x", big, body))


def test_full_observation_is_unrestricted_relabelling():
    """With identity observations the shorthand agrees with the oracle."""
    rng = rng_for(99)
    compared = 0
    for _ in range(40):
        g = random_game(rng, npos=rng.randint(2, 3), nagents=1, hierarchical=False)
        g = g.__class__(g.agents, g.moves, g.positions, g.transitions, g.labels,
                        {a: [[v] for v in g.positions] for a in g.agents}, init=g.init)
        k = build_cks(g)
        s = k.state_of[g.init]
        f = logic.Exists("x", None, random_ctl_state(rng, ("p", "q", "x"), 1))
        try:
            o = oracle_bounded_qctl(k, s, f, 3, search_cap=100_000)
        except BoundExceeded:
            continue
        if o.definite:
            compared += 1
            assert (o is Verdict.TRUE) == mc_qctl(k, s, f)
    assert compared >= 20


def test_engine_never_contradicts_bounded_oracle():
    definite = 0
    for i in range(300):
        rng = rng_for(10_000 + i)
        k, s = _model(rng)
        f = random_qctl(rng, k.ncomponents, rng.randint(1, 2))
        assert qctl_hierarchical(f)
        value = mc_qctl(k, s, f)
        try:
            o = oracle_bounded_qctl(k, s, f, 3, search_cap=100_000)
        except BoundExceeded:
            continue
        if o.definite:
            definite += 1
            assert (o is Verdict.TRUE) == value, logic.to_text(f)
    assert definite >= 150
