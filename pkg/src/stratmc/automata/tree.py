"""Parity tree automata and the operations the engine composes.

Every automaton exposes ``initial``, ``basis`` (the atoms letters are built
from), ``mode``, ``delta(q, letter)`` returning a DNF over (direction,
state) atoms (see ``pbf``) and ``priority(q)`` (min-parity).  Automata are
explored lazily; ``explore`` materialises the reachable part for dumps and
tests.

Nondeterministic automata keep, for each transition clause they produce, a
record of the choice that produced it (``explain``).  The checker walks
those records to turn an emptiness witness into strategies.
"""

from itertools import chain, combinations, product

from . import pbf
from .budget import Budget
from .parity import ParityGame, compress_priorities, parity_solve
from .safra import NEUTRAL, SafraConstruction


def letters_of(basis):
    basis = sorted(basis)
    return [frozenset(c) for c in chain.from_iterable(
        combinations(basis, r) for r in range(len(basis) + 1))]


class TreeAutomaton:
    mode = "alternating"
    basis = frozenset()
    initial = None

    def delta(self, q, letter):
        raise NotImplementedError

    def priority(self, q):
        raise NotImplementedError

    def explain(self, q, letter, clause):
        return None


class ExplicitTreeAutomaton(TreeAutomaton):
    """Automaton given by tables; missing transitions are FALSE."""

    def __init__(self, directions, basis, initial, transitions, priorities, mode=None):
        self.directions = tuple(directions)
        self.basis = frozenset(basis)
        self.initial = initial
        self.transitions = {(q, frozenset(a)): f for (q, a), f in transitions.items()}
        self.priorities = dict(priorities)
        if mode is None:
            mode = "nondeterministic" if all(
                pbf.is_nondeterministic(f) for f in self.transitions.values()) else "alternating"
        self.mode = mode

    @property
    def states(self):
        return list(self.priorities)

    def delta(self, q, letter):
        return self.transitions.get((q, frozenset(letter) & self.basis), pbf.FALSE)

    def priority(self, q):
        return self.priorities[q]


# ------------------------------------------------------------ alternation


class _Interner:
    def __init__(self):
        self.ids = {}
        self.items = []

    def __call__(self, x):
        i = self.ids.get(x)
        if i is None:
            i = len(self.items)
            self.ids[x] = i
            self.items.append(x)
        return i


def _minimal_sets(table):
    """Entries of ``table`` whose key has no strict subset among the keys."""
    if len(table) < 2:
        return table
    keys = sorted(table, key=len)
    kept = []
    for k in keys:
        if not any(m < k for m in kept):
            kept.append(k)
    return {k: table[k] for k in kept}


class Nondeterminized(TreeAutomaton):
    """Nondeterministic automaton equivalent to an alternating one.

    Acceptance games of alternating parity automata admit positional
    strategies, so a run tree can be replaced by a tree labelled with local
    strategies (one transition clause per active automaton state).  The
    traces through those choices must all satisfy the parity condition; a
    Büchi automaton that guesses a bad trace (reading sets of state pairs)
    is determinized with Safra trees and complemented, and its states are
    the states of this automaton.
    """

    mode = "nondeterministic"

    def __init__(self, alt, budget=None, name="remove_alternation"):
        self.alt = alt
        self.basis = alt.basis
        self.budget = budget or Budget()
        self.intern = _Interner()
        self._prio = []
        q0 = self._id(alt.initial)
        p0 = self._prio[q0]
        init = [(q0, -1)] + ([(q0, p0)] if p0 % 2 else [])
        self.safra = SafraConstruction(init, self._succ, self._accepting,
                                       self.budget, name)
        self.initial = self.safra.initial
        self._delta = {}
        self._explain = {}

    def _id(self, q):
        i = self.intern(q)
        if i == len(self._prio):
            self._prio.append(self.alt.priority(q))
        return i

    def alt_state(self, i):
        return self.intern.items[i]

    def _succ(self, node, rel):
        q, mode = node
        out = []
        prio = self._prio
        for x, y in rel:
            if x != q:
                continue
            p = prio[y]
            if mode < 0:
                out.append((y, -1))
                if p % 2:
                    out.append((y, p))
            elif p >= mode:
                out.append((y, mode))
        return out

    def _accepting(self, node):
        q, mode = node
        return mode >= 0 and self._prio[q] == mode

    def priority(self, d):
        return d[1] + 1

    def support(self, d):
        tree = d[0]
        if not tree:
            return []
        return sorted({q for q, _ in tree[0][2]})

    def delta(self, d, letter):
        letter = frozenset(letter)
        key = (d, letter)
        hit = self._delta.get(key)
        if hit is not None:
            return hit
        support = self.support(d)
        options = []
        for qi in support:
            f = self.alt.delta(self.intern.items[qi], letter)
            if f == pbf.FALSE:
                self._delta[key] = pbf.FALSE
                return pbf.FALSE
            options.append(list(f))
        # Fold the choices state by state.  A partial choice whose
        # obligations strictly contain another's is dropped: fewer
        # obligations mean fewer traces, so it can never be needed.
        partial = {frozenset(): ()}
        for qi, opts in zip(support, options):
            grown = {}
            for rel, combo in partial.items():
                for clause in opts:
                    r2 = rel | {(x, qi, self._id(q2)) for x, q2 in clause}
                    if r2 not in grown:
                        grown[r2] = combo + (clause,)
            self.budget.tick("local strategies", len(grown))
            partial = _minimal_sets(grown)
        clauses = {}
        for rel, combo in partial.items():
            by_dir = {}
            for x, qi, q2 in rel:
                by_dir.setdefault(x, set()).add((qi, q2))
            cl = frozenset((x, self.safra.step(d, frozenset(pairs)))
                           for x, pairs in by_dir.items())
            if cl not in clauses:
                clauses[cl] = combo
        out = pbf.minimize(clauses)
        self._explain[key] = {c: dict(zip(support, clauses[c])) for c in out}
        self._delta[key] = out
        return out

    def explain(self, d, letter, clause):
        """Local strategy behind ``clause``: alternating state -> clause."""
        self.delta(d, letter)
        choice = self._explain[(d, frozenset(letter))].get(clause)
        if choice is None:
            return None
        return {self.intern.items[qi]: c for qi, c in choice.items()}


def remove_alternation(a, budget=None, force=False):
    if a.mode == "nondeterministic" and not force:
        return a
    return Nondeterminized(a, budget)


class Projected(TreeAutomaton):
    """Existential projection of propositions out of the alphabet."""

    def __init__(self, inner, props):
        self.inner = inner
        self.props = tuple(sorted(props))
        self.basis = inner.basis - frozenset(self.props)
        self.initial = inner.initial
        self.mode = inner.mode
        self._subsets = letters_of(self.props)
        self._delta = {}

    def priority(self, q):
        return self.inner.priority(q)

    def delta(self, q, letter):
        letter = frozenset(letter) & self.basis
        key = (q, letter)
        hit = self._delta.get(key)
        if hit is not None:
            return hit[0]
        parts = []
        why = {}
        for s in self._subsets:
            f = self.inner.delta(q, letter | s)
            for c in f:
                why.setdefault(c, s)
            parts.append(f)
        out = pbf.disj_all(parts)
        self._delta[key] = (out, why)
        return out

    def explain(self, q, letter, clause):
        """Letter of the inner automaton that produced ``clause``."""
        self.delta(q, letter)
        s = self._delta[(q, frozenset(letter) & self.basis)][1].get(clause)
        return None if s is None else (frozenset(letter) & self.basis) | s


def project(a, props):
    if isinstance(props, str):
        props = (props,)
    return Projected(a, props)


class Narrowed(TreeAutomaton):
    """Reads trees whose directions keep only some components.

    Directions of ``inner`` are tuples aligned with ``components``; the
    narrowed automaton maps each direction to its restriction on ``kept``
    and accepts a narrow tree when ``inner`` accepts its widening.
    """

    def __init__(self, inner, components, kept, restrict=None):
        self.inner = inner
        self.components = tuple(components)
        self.kept = tuple(c for c in self.components if c in set(kept))
        self.index = [self.components.index(c) for c in self.kept]
        if restrict is not None:
            self.restrict = restrict
        self.basis = inner.basis
        self.initial = inner.initial
        self.mode = "alternating"
        self._delta = {}

    def priority(self, q):
        return self.inner.priority(q)

    def restrict(self, x):
        return tuple(x[i] for i in self.index)

    def delta(self, q, letter):
        letter = frozenset(letter)
        key = (q, letter)
        hit = self._delta.get(key)
        if hit is not None:
            return hit[0]
        f = self.inner.delta(q, letter)
        why = {}
        for c in f:
            nc = frozenset((self.restrict(x), s) for x, s in c)
            why.setdefault(nc, c)
        out = pbf.minimize(why)
        self._delta[key] = (out, why)
        return out

    def explain(self, q, letter, clause):
        """Wide clause of ``inner`` behind a narrowed ``clause``."""
        self.delta(q, letter)
        return self._delta[(q, frozenset(letter))][1].get(clause)


def narrow(a, components, kept):
    if tuple(c for c in components if c in set(kept)) == tuple(components):
        return a
    return Narrowed(a, components, kept)


class Dual(TreeAutomaton):
    """Complement of an alternating automaton (swap and/or, shift priorities)."""

    def __init__(self, inner):
        self.inner = inner
        self.basis = inner.basis
        self.initial = inner.initial
        self._delta = {}

    def priority(self, q):
        return self.inner.priority(q) + 1

    def delta(self, q, letter):
        key = (q, frozenset(letter))
        hit = self._delta.get(key)
        if hit is None:
            hit = pbf.dual(self.inner.delta(q, letter))
            self._delta[key] = hit
        return hit


# ------------------------------------------------------------ emptiness


class RegularTree:
    """Finite transducer generating a regular labelled tree.

    ``label[s]`` is the letter at nodes in state s; ``succ[(s, x)]`` the
    state of the child in direction x.  Missing entries lead to ``FREE``,
    a state whose subtree is labelled with empty letters.
    """

    FREE = "free"

    def __init__(self, initial, label, succ):
        self.initial = initial
        self.label = dict(label)
        self.label.setdefault(self.FREE, frozenset())
        self.succ = dict(succ)

    def letter(self, s):
        return self.label[s]

    def child(self, s, x):
        if s == self.FREE:
            return self.FREE
        return self.succ.get((s, x), self.FREE)

    def node_state(self, path):
        s = self.initial
        for x in path:
            s = self.child(s, x)
        return s


class EmptinessResult:
    def __init__(self, nonempty, witness=None, game=None, solution=None, choice=None):
        self.nonempty = nonempty
        self.witness = witness
        self.game = game
        self.solution = solution
        self.choice = choice

    def __bool__(self):
        return self.nonempty


def tree_emptiness(a, budget=None, name="tree_emptiness"):
    """Nonemptiness of a nondeterministic automaton over full trees."""
    budget = budget or Budget()
    letters = letters_of(a.basis)
    game = ParityGame()
    game.add_vertex("TOP", 0, 0)
    game.add_edge("TOP", "TOP")
    game.add_vertex("BOT", 0, 1)
    game.add_edge("BOT", "BOT")
    choice = {}
    stack = [a.initial]
    seen = {a.initial}
    top_prio = 0
    clause_vertices = []
    while stack:
        q = stack.pop()
        budget.tick(name)
        v = ("q", q)
        p = a.priority(q)
        top_prio = max(top_prio, p)
        game.add_vertex(v, 0, p)
        found = False
        for sigma in letters:
            for c in a.delta(q, sigma):
                found = True
                cv = ("c", c)
                choice.setdefault((q, c), sigma)
                game.add_edge(v, cv)
                if cv not in game.owner:
                    game.add_vertex(cv, 1, None)
                    clause_vertices.append(cv)
                    if not c:
                        game.add_edge(cv, "TOP")
                    for _, q2 in c:
                        game.add_edge(cv, ("q", q2))
                        if q2 not in seen:
                            seen.add(q2)
                            stack.append(q2)
        if not found:
            game.add_edge(v, "BOT")
    for cv in clause_vertices:
        game.priority[cv] = top_prio + 2
    for v in game.owner:
        game.edges[v] = list(dict.fromkeys(game.edges[v]))
    compress_priorities(game)
    sol = parity_solve(game)
    root = ("q", a.initial)
    if root not in sol.win[0]:
        return EmptinessResult(False, game=game, solution=sol)
    label, succ = {}, {}
    for v in sol.win[0]:
        if v[0] != "q":
            continue
        cv = sol.strategy[0].get(v)
        if cv is None or cv[0] != "c":
            continue
        q, c = v[1], cv[1]
        label[q] = choice[(q, c)]
        for x, q2 in c:
            succ[(q, x)] = q2
    return EmptinessResult(True, RegularTree(a.initial, label, succ), game, sol, choice)


def accepts_regular(a, tree, budget=None):
    """Exact membership of a regular tree in an (alternating) automaton."""
    budget = budget or Budget()
    game = ParityGame()
    game.add_vertex("TOP", 0, 0)
    game.add_edge("TOP", "TOP")
    game.add_vertex("BOT", 0, 1)
    game.add_edge("BOT", "BOT")
    start = ("q", tree.initial, a.initial)
    stack = [start]
    seen = {start}
    top_prio = 0
    clause_vertices = []
    while stack:
        v = stack.pop()
        budget.tick("membership")
        _, t, q = v
        p = a.priority(q)
        top_prio = max(top_prio, p)
        game.add_vertex(v, 0, p)
        f = a.delta(q, tree.letter(t))
        if not f:
            game.add_edge(v, "BOT")
        for c in f:
            cv = ("c", t, c)
            game.add_edge(v, cv)
            if cv in game.owner:
                continue
            game.add_vertex(cv, 1, None)
            clause_vertices.append(cv)
            if not c:
                game.add_edge(cv, "TOP")
            for x, q2 in c:
                w = ("q", tree.child(t, x), q2)
                game.add_edge(cv, w)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    for cv in clause_vertices:
        game.priority[cv] = top_prio + 2
    for v in game.owner:
        game.edges[v] = list(dict.fromkeys(game.edges[v]))
    compress_priorities(game)
    return start in parity_solve(game).win[0]


def explore(a, budget=None, limit=10000):
    """Reachable states and transitions of an automaton, over all letters."""
    letters = letters_of(a.basis)
    states = [a.initial]
    seen = {a.initial}
    trans = {}
    i = 0
    while i < len(states) and i < limit:
        q = states[i]
        i += 1
        for sigma in letters:
            f = a.delta(q, sigma)
            trans[(q, sigma)] = f
            for q2 in pbf.states(f):
                if q2 not in seen:
                    seen.add(q2)
                    states.append(q2)
    return states, trans


def dump_automaton(a, title="automaton", limit=2000):
    states, trans = explore(a, limit=limit)
    index = {q: i for i, q in enumerate(states)}

    def fmt(x):
        return f"q{index[x]}" if x in index else repr(x)

    lines = [f"{title}: mode={a.mode} basis={sorted(a.basis)} states={len(states)}"]
    for q in states:
        lines.append(f"q{index[q]} prio={a.priority(q)} state={q!r}")
    for (q, sigma), f in trans.items():
        body = pbf.to_text(f, lambda x: fmt(x) if x in index else repr(x))
        lines.append(f"  q{index[q]} {{{' '.join(sorted(sigma))}}} -> {body}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ reduction


def _sccs(nodes, succ):
    """Tarjan over an explicit graph; returns a list of components."""
    index, low, on, stack, out = {}, {}, set(), [], []
    counter = [0]
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def reduce_priorities(states, succ, priority):
    """Smallest priorities with the same parity on every cycle.

    Acceptance of every trace only depends on the least priority of the
    strongly connected set it visits infinitely often, so the nested SCC
    decomposition can renumber priorities per component.  States on no
    cycle at all get 0.
    """
    out = {q: 0 for q in states}

    def assign(region, base):
        sub = {q: [r for r in succ[q] if r in region] for q in region}
        for comp in _sccs(list(region), sub):
            if len(comp) == 1 and comp[0] not in sub[comp[0]]:
                continue
            m = min(priority[q] for q in comp)
            value = base if base % 2 == m % 2 else base + 1
            rest = set()
            for q in comp:
                # every state of the component lies on a cycle through the
                # minimal ones; nested components may raise this later
                out[q] = value
                if priority[q] != m:
                    rest.add(q)
            if rest:
                assign(rest, value)

    assign(set(states), 0)
    return out


class Reduced(TreeAutomaton):
    """Explicit quotient of a fully explored automaton.

    States are class numbers.  Priorities are renumbered by
    ``reduce_priorities`` first and bisimilar states are then merged.
    ``explain`` maps a quotient clause back to the clause of a
    representative of the class in the original automaton.
    """

    def __init__(self, a, budget=None, limit=None):
        self.inner = a
        self.basis = a.basis
        self.mode = a.mode
        budget = budget or Budget()
        letters = letters_of(a.basis)
        states = [a.initial]
        seen = {a.initial}
        trans = {}
        i = 0
        while i < len(states):
            q = states[i]
            i += 1
            for sigma in letters:
                f = a.delta(q, sigma)
                trans[(q, sigma)] = f
                for q2 in pbf.states(f):
                    if q2 not in seen:
                        seen.add(q2)
                        states.append(q2)
                        budget.tick("explicit chain")
        succ = {q: set() for q in states}
        for (q, _), f in trans.items():
            succ[q] |= pbf.states(f)
        prio = reduce_priorities(states, succ, {q: a.priority(q) for q in states})
        # partition refinement
        cls = {q: prio[q] for q in states}
        while True:
            sig = {}
            for q in states:
                sig[q] = (cls[q], tuple(
                    pbf.map_atoms(trans[(q, s)], lambda x: (x[0], cls[x[1]]))
                    for s in letters))
            ids = {}
            new = {}
            for q in states:
                new[q] = ids.setdefault(sig[q], len(ids))
            stable = len(ids) == len(set(cls.values()))
            cls = new
            if stable:
                break
        self.cls = cls
        self.rep = {}
        for q in states:
            self.rep.setdefault(cls[q], q)
        self.initial = cls[a.initial]
        self._prio = {c: prio[q] for c, q in self.rep.items()}
        self._delta = {}
        self._why = {}
        for c, q in self.rep.items():
            for s in letters:
                why = {}
                for clause in trans[(q, s)]:
                    why.setdefault(frozenset((x, cls[r]) for x, r in clause), clause)
                self._delta[(c, s)] = pbf.minimize(why)
                self._why[(c, s)] = why
        self._trans = trans
        self.size = len(self.rep)
        self.original_size = len(states)

    def priority(self, q):
        return self._prio[q]

    def delta(self, q, letter):
        return self._delta[(q, frozenset(letter) & self.basis)]

    def explain(self, q, letter, clause):
        """Clause of the representative state behind a quotient clause."""
        return self._why[(q, frozenset(letter) & self.basis)].get(clause)

    def explain_at(self, q, letter, clause):
        """Clause of original state ``q`` whose class image is ``clause``.

        Bisimilar states have clauses with the same images, so this exists
        whenever ``clause`` is a clause of the class of q.
        """
        for c in self._trans[(q, frozenset(letter) & self.basis)]:
            if frozenset((x, self.cls[r]) for x, r in c) == clause:
                return c
        return None
