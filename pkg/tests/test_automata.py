from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from stratmc import logic
from stratmc.automata import pbf
from stratmc.automata.budget import Budget
from stratmc.automata.ltl import eval_lasso, ltl_to_nbw, nbw_accepts_lasso
from stratmc.automata.parity import ParityGame, parity_solve
from stratmc.automata.safra import nbw_to_dpw
from stratmc.automata.tree import (ExplicitTreeAutomaton, Nondeterminized,
                                   RegularTree, accepts_regular, narrow, project,
                                   remove_alternation, tree_emptiness)
from stratmc.errors import StateBudgetExceeded

from generators import random_lasso, random_ltl, rng_for


def ltl(text):
    return logic.parse(text, logic.LTL)


# ------------------------------------------------------------ word automata

class TestWordAutomata:
    def test_f_win_small(self):
        a = ltl_to_nbw(ltl("F win"))
        states, _ = a.explore()
        assert len(states) <= 2
        assert nbw_accepts_lasso(a, [frozenset()], [frozenset({"win"})])
        assert not nbw_accepts_lasso(a, [], [frozenset()])

    def test_true_accepts_everything(self):
        a = ltl_to_nbw(logic.TRUE)
        states, _ = a.explore()
        assert len(states) == 1 and a.accepting(states[0])

    def test_contradiction_is_empty(self):
        assert ltl_to_nbw(ltl("G not win and F win")).is_empty()

    def test_universal_dpw(self):
        d = nbw_to_dpw(ltl_to_nbw(logic.TRUE))
        assert len(d.states) == 1 and d.priority[0] % 2 == 0

    def test_f_win_dpw(self):
        d = nbw_to_dpw(ltl_to_nbw(ltl("F win")))
        assert len(d.states) <= 3
        assert d.accepts_lasso([], [frozenset({"win"})])
        assert not d.accepts_lasso([], [frozenset()])

    def test_gf_q_dpw(self):
        d = nbw_to_dpw(ltl_to_nbw(ltl("G F q")))
        q, none = frozenset({"q"}), frozenset()
        assert d.accepts_lasso([none], [none, q])
        assert not d.accepts_lasso([q, q], [none])

    def test_dpw_priority_bound(self):
        for text in ("G F q", "F G q", "G F p and F G q", "p U (q U G p)"):
            d = nbw_to_dpw(ltl_to_nbw(ltl(text)))
            assert max(d.priority.values()) <= 2 * len(d.states)

    def test_budget(self):
        f = ltl("(G F p or F G q) and (G F q or F G p) and G (p or X q)")
        with pytest.raises(StateBudgetExceeded):
            nbw_to_dpw(ltl_to_nbw(f), cap=3)

    def test_vocabulary_mismatch(self):
        from stratmc.automata.ltl import VocabularyMismatch
        with pytest.raises(VocabularyMismatch):
            ltl_to_nbw(ltl("F win"), atoms={"p"})


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_lasso_agreement(seed):
    rng = rng_for(seed)
    f = random_ltl(rng, 3)
    prefix, cycle = random_lasso(rng)
    want = eval_lasso(f, prefix, cycle)
    nbw = ltl_to_nbw(f)
    assert nbw_accepts_lasso(nbw, prefix, cycle) == want
    letters = [frozenset(s) for s in ([], ["p"], ["q"], ["p", "q"])]
    assert nbw_to_dpw(nbw, letters).accepts_lasso(prefix, cycle) == want


# ------------------------------------------------------------ parity games

def random_parity_game(rng, n):
    g = ParityGame()
    for v in range(n):
        g.add_vertex(v, rng.randint(0, 1), rng.randint(0, 4))
    for v in range(n):
        for w in rng.sample(range(n), rng.randint(1, min(3, n))):
            g.add_edge(v, w)
    return g


def _odd_cycle_reachable(edges, start, priority):
    """Some cycle reachable from ``start`` has an odd least priority."""
    reach = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in edges[v]:
            if w not in reach:
                reach.add(w)
                stack.append(w)
    for p in sorted({priority[v] for v in reach}):
        if p % 2 == 0:
            continue
        allowed = {v for v in reach if priority[v] >= p}
        for v in allowed:
            if priority[v] != p:
                continue
            # cycle through v inside ``allowed``
            seen, stack = set(), [w for w in edges[v] if w in allowed]
            while stack:
                w = stack.pop()
                if w == v:
                    return True
                if w in seen:
                    continue
                seen.add(w)
                stack.extend(x for x in edges[w] if x in allowed)
    return False


def brute_force_win0(g):
    mine = [v for v in g.vertices if g.owner[v] == 0]
    win = set()
    for choice in product(*(g.edges[v] for v in mine)):
        edges = dict(g.edges)
        edges.update({v: [w] for v, w in zip(mine, choice)})
        for v in g.vertices:
            if v not in win and not _odd_cycle_reachable(edges, v, g.priority):
                win.add(v)
    return win


class TestParity:
    def test_even_loop(self):
        g = ParityGame()
        g.add_vertex("x", 1, 2)
        g.add_edge("x", "x")
        assert parity_solve(g).winner("x") == 0

    def test_odd_loop(self):
        g = ParityGame()
        g.add_vertex("x", 0, 3)
        g.add_edge("x", "x")
        assert parity_solve(g).winner("x") == 1

    def test_dead_end_rejected(self):
        g = ParityGame()
        g.add_vertex("x", 0, 0)
        with pytest.raises(ValueError):
            parity_solve(g)

    def test_brute_force_small(self):
        rng = rng_for(11)
        for _ in range(50):
            g = random_parity_game(rng, rng.randint(1, 8))
            assert parity_solve(g).win[0] == brute_force_win0(g)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_parity_strategies_stay_and_win(seed):
    rng = rng_for(seed)
    g = random_parity_game(rng, rng.randint(1, 40))
    sol = parity_solve(g)
    assert sol.win[0] | sol.win[1] == set(g.vertices)
    assert not sol.win[0] & sol.win[1]
    for i in (0, 1):
        region = sol.win[i]
        for v in region:
            if g.owner[v] == i:
                assert sol.strategy[i][v] in region
            else:
                assert set(g.edges[v]) <= region
        # fixing the strategy, every reachable cycle is won by player i
        edges = {v: ([sol.strategy[i][v]] if g.owner[v] == i else g.edges[v])
                 for v in region}
        prio = g.priority if i == 0 else {v: p + 1 for v, p in g.priority.items()}
        for v in region:
            assert not _odd_cycle_reachable(edges, v, prio)


# ------------------------------------------------------------ tree automata

DIRS = (0, 1)


def random_tree_automaton(rng, nondeterministic, nstates=3):
    states = list(range(nstates))
    trans = {}
    for q in states:
        for letter in (frozenset(), frozenset({"p"})):
            clauses = []
            for _ in range(rng.randint(0, 2)):
                if nondeterministic:
                    dirs = [x for x in DIRS if rng.random() < 0.8]
                else:
                    dirs = [rng.choice(DIRS) for _ in range(rng.randint(0, 3))]
                clauses.append(frozenset((x, rng.choice(states)) for x in dirs))
            trans[(q, letter)] = pbf.minimize(clauses)
    prio = {q: rng.randint(0, 3) for q in states}
    return ExplicitTreeAutomaton(DIRS, {"p"}, 0, trans, prio)


def small_regular_trees():
    """Every regular tree with at most two transducer states."""
    labels = (frozenset(), frozenset({"p"}))
    yield RegularTree(0, {0: labels[0]}, {(0, 0): 0, (0, 1): 0})
    yield RegularTree(0, {0: labels[1]}, {(0, 0): 0, (0, 1): 0})
    for l0, l1 in product(labels, repeat=2):
        for succ in product((0, 1), repeat=4):
            yield RegularTree(0, {0: l0, 1: l1},
                              dict(zip([(0, 0), (0, 1), (1, 0), (1, 1)], succ)))


def root_has(letter_test):
    trans = {("r", frozenset(s)): (pbf.TRUE if letter_test(set(s)) else pbf.FALSE)
             for s in ([], ["p"], ["q"], ["p", "q"])}
    return ExplicitTreeAutomaton(DIRS, {"p", "q"}, "r", trans, {"r": 0})


class TestTreeAutomata:
    def test_universal_nonempty(self):
        a = ExplicitTreeAutomaton(DIRS, set(), 0, {(0, frozenset()): pbf.TRUE}, {0: 0})
        res = tree_emptiness(a)
        assert res.nonempty and accepts_regular(a, res.witness)

    def test_contradictory_safety_empty(self):
        a = ExplicitTreeAutomaton(DIRS, set(), 0, {(0, frozenset()): pbf.FALSE}, {0: 0})
        assert not tree_emptiness(a)

    def test_odd_loop_empty(self):
        a = ExplicitTreeAutomaton(DIRS, set(), 0,
                                  {(0, frozenset()): pbf.atom(0, 0)}, {0: 1})
        assert not tree_emptiness(a)

    def test_project_root_p(self):
        a = project(root_has(lambda s: "p" in s), "p")
        assert a.delta("r", frozenset()) == pbf.TRUE
        assert a.delta("r", frozenset({"q"})) == pbf.TRUE

    def test_project_root_p_and_q(self):
        a = project(root_has(lambda s: {"p", "q"} <= s), "p")
        assert a.delta("r", frozenset({"q"})) == pbf.TRUE
        assert a.delta("r", frozenset()) == pbf.FALSE

    def test_narrow_all_components_is_identity(self):
        a = root_has(lambda s: "p" in s)
        assert narrow(a, (1, 2), (1, 2)) is a

    def test_narrow_to_nothing_is_word_like(self):
        trans = {(0, frozenset()): pbf.conj(pbf.atom(("x", "y"), 0), pbf.atom(("x", "z"), 0))}
        a = ExplicitTreeAutomaton([("x", "y"), ("x", "z")], set(), 0, trans, {0: 0})
        n = narrow(a, (1, 2), ())
        assert {x for c in n.delta(0, frozenset()) for x, _ in c} == {()}

    def test_nondeterministic_passes_through(self):
        rng = rng_for(5)
        a = random_tree_automaton(rng, True)
        assert a.mode == "nondeterministic"
        assert remove_alternation(a) is a

    def test_conjunction_of_safety(self):
        # state 0 asks for p everywhere, state 1 for p at the right child
        p, none = frozenset({"p"}), frozenset()
        trans = {
            ("s", p): pbf.conj(pbf.atom(0, 0), pbf.atom(1, 0), pbf.atom(0, 1)),
            (0, p): pbf.conj(pbf.atom(0, 0), pbf.atom(1, 0)),
            (1, p): pbf.TRUE,
        }
        a = ExplicitTreeAutomaton(DIRS, {"p"}, "s", trans, {"s": 0, 0: 0, 1: 0})
        assert a.mode == "alternating"
        n = remove_alternation(a)
        assert n.mode == "nondeterministic"
        res = tree_emptiness(n)
        assert res.nonempty and accepts_regular(a, res.witness)
        only_p = RegularTree(0, {0: p}, {(0, 0): 0, (0, 1): 0})
        assert accepts_regular(n, only_p)
        assert not accepts_regular(n, RegularTree(0, {0: none}, {}))

    def test_budget(self):
        rng = rng_for(8)
        a = random_tree_automaton(rng, False, nstates=4)
        with pytest.raises(StateBudgetExceeded):
            tree_emptiness(Nondeterminized(a, Budget(1)), Budget(1))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_alternation_removal_keeps_language(seed):
    rng = rng_for(seed)
    a = random_tree_automaton(rng, False)
    n = Nondeterminized(a, Budget(200_000))
    for letter in (frozenset(), frozenset({"p"})):
        assert all(len({x for x, _ in c}) == len(c) for c in n.delta(n.initial, letter))
    trees = list(small_regular_trees())
    for t in rng.sample(trees, 20):
        assert accepts_regular(a, t) == accepts_regular(n, t)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_emptiness_witness_and_bounded_search(seed):
    rng = rng_for(seed)
    a = random_tree_automaton(rng, True)
    res = tree_emptiness(a)
    found = any(accepts_regular(a, t) for t in small_regular_trees())
    if res.nonempty:
        assert accepts_regular(a, res.witness)
    else:
        assert not found
    if found:
        assert res.nonempty
