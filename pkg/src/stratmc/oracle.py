"""Reference procedures used to cross-check the automata pipeline.

Nothing here shares code with the engine beyond the data structures:

* ``oracle_single`` solves a one-agent game with a knowledge-set
  construction (exact, exponential in the number of positions);
* ``oracle_bounded_atl`` evaluates ATL*i / ATL*sc,i over plays cut at a
  horizon, searching uniform strategies lazily;
* ``oracle_bounded_qctl`` evaluates QCTL*i on a depth-bounded unfolding by
  enumerating o-uniform relabellings.

The bounded procedures are three-valued (Kleene): a definite answer is only
returned when it does not depend on what happens after the cut.  Beyond
the cut a formula is approximated by its value on every position reachable
from the last one; at positions whose only successor is themselves the
continuation is known exactly.
"""

from enum import Enum
from itertools import product

from . import logic
from .errors import BoundExceeded

HORIZON_CAP = 6
DEPTH_CAP = 5
SEARCH_CAP = 2_000_000


class Verdict(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @property
    def definite(self):
        return self is not Verdict.UNKNOWN

    @classmethod
    def of(cls, value):
        if value is None:
            return cls.UNKNOWN
        return cls.TRUE if value else cls.FALSE

    def __str__(self):
        return self.value


def not3(x):
    return None if x is None else not x


def and3(x, y):
    if x is False or y is False:
        return False
    if x is None or y is None:
        return None
    return True


def or3(x, y):
    if x is True or y is True:
        return True
    if x is None or y is None:
        return None
    return False


# ------------------------------------------------------------ single agent


def _post(g, agent, u, m):
    i = g.agents.index(agent)
    out = set()
    for c in g.joint_moves():
        if c[i] == m:
            out |= g.successors(u, c)
    return out


def oracle_single(g, v, agent, objective, cap=200_000):
    """Does ``agent`` alone enforce ``objective`` from ``v``?

    ``objective`` is ``(kind, positions)`` with kind one of ``reach``,
    ``safe`` or ``buchi``.  Every other agent and Nature are adversarial.
    """
    kind, target = objective
    target = frozenset(target)
    g.check_agent(agent)
    order = {p: i for i, p in enumerate(g.positions)}

    def split(states):
        """Knowledge successors grouped by the agent's observation."""
        groups = {}
        for s in states:
            groups.setdefault(g.block(agent, s[0] if isinstance(s, tuple) else s), set()).add(s)
        return [frozenset(x) for _, x in sorted(groups.items())]

    if kind == "reach":
        start = frozenset({(v, v in target)})

        def moves(k):
            out = []
            for m in g.moves:
                nxt = set()
                for u, flag in k:
                    for w in _post(g, agent, u, m):
                        nxt.add((w, flag or w in target))
                out.append(split(nxt))
            return out

        good = lambda k: all(f for _, f in k)
        graph = _explore(start, moves, cap)
        return start in _reach_win(graph, good)
    if kind == "safe":
        start = frozenset({v})

        def moves(k):
            return [split({w for u in k for w in _post(g, agent, u, m)}) for m in g.moves]

        graph = _explore(start, moves, cap)
        bad = lambda k: not k <= target
        return start not in _reach_win_adversary(graph, bad)
    if kind == "buchi":
        start = (frozenset({v}), frozenset() if v in target else frozenset({v}))

        def moves(state):
            k, owe = state
            out = []
            for m in g.moves:
                nxt = {w for u in k for w in _post(g, agent, u, m)}
                owing = {w for u in owe for w in _post(g, agent, u, m)} if owe else set(nxt)
                opts = []
                for cls in split(nxt):
                    o = frozenset(w for w in owing if w in cls and w not in target)
                    opts.append((cls, o))
                out.append(opts)
            return out

        graph = _explore(start, moves, cap)
        return start in _buchi_win(graph, lambda s: not s[1])
    raise ValueError(f"unknown objective kind {kind!r}")


def _explore(start, moves, cap):
    """Game graph: state -> list (per move) of lists of successor states."""
    graph = {}
    stack = [start]
    while stack:
        s = stack.pop()
        if s in graph:
            continue
        if len(graph) >= cap:
            raise BoundExceeded(f"knowledge construction exceeded {cap} states")
        graph[s] = moves(s)
        for opts in graph[s]:
            for t in opts:
                if t not in graph:
                    stack.append(t)
    return graph


def _cpre(graph, target):
    """States where some move leads only into ``target``."""
    return {s for s, ms in graph.items()
            if any(opts and all(t in target for t in opts) for opts in ms)}


def _reach_win(graph, good):
    win = {s for s in graph if good(s)}
    while True:
        new = win | _cpre(graph, win)
        if new == win:
            return win
        win = new


def _reach_win_adversary(graph, bad):
    """States from which the adversary forces a bad state."""
    lose = {s for s in graph if bad(s)}
    while True:
        new = set(lose)
        for s, ms in graph.items():
            if s not in lose and all(any(t in lose for t in opts) for opts in ms):
                new.add(s)
        if new == lose:
            return lose
        lose = new


def _buchi_win(graph, accepting):
    """Player with the moves visits ``accepting`` infinitely often."""
    z = set(graph)
    while True:
        acc = {s for s in z if accepting(s)}
        # states that can force reaching acc ∩ CPre(z), staying in z
        base = acc & _cpre(graph, z)
        y = set(base)
        while True:
            new = y | (_cpre(graph, y) & z)
            if new == y:
                break
            y = new
        if y == z:
            return z
        z = y


# ------------------------------------------------------------ bounded ATL


class _Need(Exception):
    def __init__(self, owner, agent, key):
        self.owner = owner
        self.agent = agent
        self.key = key


class _LazyStrategy:
    """Uniform strategy whose moves are fixed on demand by a search."""

    def __init__(self, owner, agent, table):
        self.owner = owner
        self.agent = agent
        self.table = table

    def move(self, g, history):
        key = tuple(g.block(self.agent, u) for u in history)
        m = self.table.get(key)
        if m is None:
            raise _Need(self.owner, self.agent, key)
        return m


class _BoundedATL:
    def __init__(self, g, horizon, search_cap=SEARCH_CAP):
        self.g = g
        self.horizon = horizon
        self.search_cap = search_cap
        self.steps = 0
        self.binds = 0
        self._reach = {}
        self._strat_memo = {}
        self.sinks = {u for u in g.positions if g.succ[u] == frozenset({u})}

    def tick(self):
        self.steps += 1
        if self.steps > self.search_cap:
            raise BoundExceeded(f"bounded search exceeded {self.search_cap} steps")

    def reach_plus(self, u):
        hit = self._reach.get(u)
        if hit is None:
            seen = set()
            stack = list(self.g.succ[u])
            while stack:
                w = stack.pop()
                if w not in seen:
                    seen.add(w)
                    stack.extend(self.g.succ[w])
            hit = frozenset(seen)
            self._reach[u] = hit
        return hit

    # -- state formulas at a history

    def state(self, f, h, ctx, cut):
        k = f.kind
        if k == "true":
            return True
        if k == "false":
            return False
        if k == "atom":
            return f.name in self.g.labels[h[-1]]
        if k == "not":
            return not3(self.state(f.args[0], h, ctx, cut))
        if k == "and":
            a = self.state(f.args[0], h, ctx, cut)
            if a is False:
                return False
            return and3(a, self.state(f.args[1], h, ctx, cut))
        if k == "or":
            a = self.state(f.args[0], h, ctx, cut)
            if a is True:
                return True
            return or3(a, self.state(f.args[1], h, ctx, cut))
        if k == "strat":
            return self.strat_at(f, h[-1])
        if k == "bind":
            return self.bind(f, h, ctx, cut)
        if k == "release":
            rest = {a: s for a, s in ctx.items() if a not in f.agents}
            return self.state(f.args[0], h, rest, cut)
        raise ValueError(f"{k} is not a state connective here")

    def strat_at(self, f, v):
        key = (f, v)
        if key not in self._strat_memo:
            self._strat_memo[key] = self.bind(f, (v,), {}, self.horizon)
        return self._strat_memo[key]

    def bind(self, f, h, ctx, cut):
        self.binds += 1
        owner = self.binds
        agents = f.agents
        tables = {a: {} for a in agents}
        strategies = {a: _LazyStrategy(owner, a, tables[a]) for a in agents}
        ctx2 = dict(ctx)
        ctx2.update(strategies)
        body = f.args[0]

        def search():
            self.tick()
            try:
                return self.all_outcomes(body, h, ctx2, cut)
            except _Need as need:
                if need.owner != owner:
                    raise
                table = tables[need.agent]
                result = False
                for m in self.g.moves:
                    table[need.key] = m
                    r = search()
                    result = or3(result, r)
                    if result is True:
                        break
                del table[need.key]
                return result

        return search()

    def all_outcomes(self, body, h, ctx, cut):
        """Kleene conjunction of ``body`` over all plays extending ``h``."""
        result = True
        stack = [h]
        while stack:
            p = stack.pop()
            u = p[-1]
            if len(p) - 1 >= cut or u in self.sinks:
                v = self.path(body, p, len(h) - 1, ctx, cut)
                result = and3(result, v)
                if result is False:
                    return False
                continue
            opts = []
            for a in self.g.agents:
                if a in ctx:
                    opts.append((ctx[a].move(self.g, p),))
                else:
                    opts.append(self.g.moves)
            succ = set()
            for c in product(*opts):
                succ |= self.g.successors(u, c)
            for w in sorted(succ, key=self.g.positions.index, reverse=True):
                stack.append(p + (w,))
        return result

    # -- path formulas on a finite play

    def path(self, f, p, i, ctx, cut):
        """Value of path formula ``f`` at index i of play ``p`` (cut or sink)."""
        last = len(p) - 1
        if i > last:
            return self.beyond(f, p, ctx, cut)
        k = f.kind
        if k in ("true", "false", "atom", "strat", "bind", "release"):
            return self.state(f, p[:i + 1], ctx, cut)
        if k == "not":
            return not3(self.path(f.args[0], p, i, ctx, cut))
        if k == "and":
            a = self.path(f.args[0], p, i, ctx, cut)
            if a is False:
                return False
            return and3(a, self.path(f.args[1], p, i, ctx, cut))
        if k == "or":
            a = self.path(f.args[0], p, i, ctx, cut)
            if a is True:
                return True
            return or3(a, self.path(f.args[1], p, i, ctx, cut))
        if k == "X":
            return self.path(f.args[0], p, i + 1, ctx, cut)
        if k == "F":
            return self.until(logic.TRUE, f.args[0], p, i, ctx, cut)
        if k == "G":
            return not3(self.until(logic.TRUE, logic.Not(f.args[0]), p, i, ctx, cut))
        if k == "U":
            return self.until(f.args[0], f.args[1], p, i, ctx, cut)
        raise ValueError(f"{k} cannot appear in a path formula")

    def until(self, a, b, p, i, ctx, cut):
        acc = False
        pre = True
        for j in range(i, len(p)):
            acc = or3(acc, and3(pre, self.path(b, p, j, ctx, cut)))
            if acc is True:
                return True
            pre = and3(pre, self.path(a, p, j, ctx, cut))
            if pre is False:
                return acc
        return or3(acc, and3(pre, self.beyond(logic.Until(a, b), p, ctx, cut)))

    def beyond(self, f, p, ctx, cut):
        """Value of ``f`` at any index after the end of ``p``."""
        u = p[-1]
        if u in self.sinks:
            # the play stays in u forever; later indices look like the last
            return self.at_sink(f, p, ctx, cut)
        return self.tail(f, u)

    def at_sink(self, f, p, ctx, cut):
        k = f.kind
        if k in ("X", "F", "G"):
            return self.at_sink(f.args[0], p, ctx, cut)
        if k == "U":
            return self.at_sink(f.args[1], p, ctx, cut)
        if k == "not":
            return not3(self.at_sink(f.args[0], p, ctx, cut))
        if k in ("and", "or"):
            a = self.at_sink(f.args[0], p, ctx, cut)
            b = self.at_sink(f.args[1], p, ctx, cut)
            return and3(a, b) if k == "and" else or3(a, b)
        return self.state(f, p, ctx, cut)

    def tail(self, f, u):
        """Value shared by all positions reachable from u, if determined."""
        k = f.kind
        if k == "true":
            return True
        if k == "false":
            return False
        if k == "not":
            return not3(self.tail(f.args[0], u))
        if k in ("and", "or"):
            a = self.tail(f.args[0], u)
            b = self.tail(f.args[1], u)
            return and3(a, b) if k == "and" else or3(a, b)
        if k in ("X", "F", "G"):
            return self.tail(f.args[0], u)
        if k == "U":
            return self.tail(f.args[1], u)
        later = self.reach_plus(u)
        if k == "atom":
            vals = {f.name in self.g.labels[w] for w in later}
        elif k == "strat":
            vals = {self.strat_at(f, w) for w in later}
        else:
            return None
        if vals == {True}:
            return True
        if vals == {False}:
            return False
        return None


def oracle_bounded_atl(g, v, f, horizon, cap=HORIZON_CAP, search_cap=SEARCH_CAP):
    """Three-valued truth of a closed ATL*i or ATL*sc,i formula at ``v``."""
    if horizon > cap:
        raise BoundExceeded(f"horizon {horizon} exceeds cap {cap}")
    if not logic.is_closed(f):
        raise ValueError("formula is not closed")
    value = _BoundedATL(g, horizon, search_cap).state(f, (v,), {}, horizon)
    if value is not None and horizon > 1:
        # stability guard: a shorter horizon must not disagree
        shorter = _BoundedATL(g, horizon - 1, search_cap).state(f, (v,), {}, horizon - 1)
        if shorter is not None and shorter != value:
            return Verdict.UNKNOWN
    return Verdict.of(value)


# ------------------------------------------------------------ bounded QCTL


class _BoundedQCTL:
    def __init__(self, k, depth, search_cap=SEARCH_CAP):
        self.k = k
        self.depth = depth
        self.search_cap = search_cap
        self.steps = 0
        self.full = tuple(range(1, k.ncomponents + 1))

    def tick(self):
        self.steps += 1
        if self.steps > self.search_cap:
            raise BoundExceeded(f"labelling search exceeded {self.search_cap} steps")

    def subtree(self, n):
        out = [n]
        frontier = [n]
        while frontier and len(frontier[0]) <= self.depth:
            nxt = []
            for m in frontier:
                for t in self.k.successors(m[-1]):
                    nxt.append(m + (t,))
            out.extend(nxt)
            frontier = nxt
        return out

    def state(self, f, n, env):
        self.tick()
        kd = f.kind
        if kd == "true":
            return True
        if kd == "false":
            return False
        if kd == "atom":
            if f.name in env:
                marked, beyond = env[f.name]
                if len(n) - 1 > self.depth:
                    return beyond
                return n in marked
            return f.name in self.k.labels[n[-1]]
        if kd == "not":
            return not3(self.state(f.args[0], n, env))
        if kd == "and":
            a = self.state(f.args[0], n, env)
            if a is False:
                return False
            return and3(a, self.state(f.args[1], n, env))
        if kd == "or":
            a = self.state(f.args[0], n, env)
            if a is True:
                return True
            return or3(a, self.state(f.args[1], n, env))
        if kd in ("E", "A"):
            if len(n) - 1 > self.depth:
                return None
            result = False if kd == "E" else True
            for p in self.branches(n):
                v = self.path(f.args[0], p, len(n) - 1, env)
                result = or3(result, v) if kd == "E" else and3(result, v)
                if result is (kd == "E"):
                    break
            return result
        if kd == "exists":
            if len(n) - 1 > self.depth:
                return None
            obs = self.full if f.obs is None else tuple(sorted(f.obs))
            classes = {}
            for m in self.subtree(n):
                key = (len(m), tuple(self.k.project(s, obs) for s in m))
                classes.setdefault(key, []).append(m)
            groups = list(classes.values())
            result = False
            for bits in product((False, True), repeat=len(groups)):
                marked = {m for grp, b in zip(groups, bits) if b for m in grp}
                result = or3(result, self.labelled(f, n, env, frozenset(marked)))
                if result is True:
                    break
            return result
        raise ValueError(f"{kd} is not a QCTL*i state connective")

    def labelled(self, f, n, env, marked):
        """Value of the body for one labelling of the nodes up to the cut.

        Nodes below the cut get either an unknown bit or one constant bit;
        a constant is uniform since uniformity only relates equal depths, so
        a constant extension that makes the body true is a real witness.
        """
        env2 = dict(env)
        env2[f.name] = (marked, None)
        value = self.state(f.args[0], n, env2)
        if value is not None:
            return value
        for bit in (True, False):
            env2[f.name] = (marked, bit)
            if self.state(f.args[0], n, env2) is True:
                return True
        return None

    def branches(self, n):
        out = []
        stack = [n]
        while stack:
            m = stack.pop()
            if len(m) - 1 >= self.depth:
                out.append(m)
                continue
            for t in self.k.successors(m[-1]):
                stack.append(m + (t,))
        return out

    def path(self, f, p, i, env):
        kd = f.kind
        if i >= len(p):
            return self.tail(f, p, env)
        if kd in ("true", "false", "atom", "E", "A", "exists"):
            return self.state(f, p[:i + 1], env)
        if kd == "not":
            return not3(self.path(f.args[0], p, i, env))
        if kd == "and":
            a = self.path(f.args[0], p, i, env)
            if a is False:
                return False
            return and3(a, self.path(f.args[1], p, i, env))
        if kd == "or":
            a = self.path(f.args[0], p, i, env)
            if a is True:
                return True
            return or3(a, self.path(f.args[1], p, i, env))
        if kd == "X":
            return self.path(f.args[0], p, i + 1, env)
        a, b = (logic.TRUE, f.args[0]) if kd == "F" else \
            (logic.TRUE, logic.Not(f.args[0])) if kd == "G" else f.args
        acc, pre = False, True
        for j in range(i, len(p)):
            acc = or3(acc, and3(pre, self.path(b, p, j, env)))
            if acc is True:
                break
            pre = and3(pre, self.path(a, p, j, env))
            if pre is False:
                break
        else:
            acc = or3(acc, and3(pre, self.tail(logic.Until(a, b), p, env)))
        return not3(acc) if kd == "G" else acc

    def tail(self, f, p, env):
        kd = f.kind
        if kd == "true":
            return True
        if kd == "false":
            return False
        if kd == "not":
            return not3(self.tail(f.args[0], p, env))
        if kd in ("and", "or"):
            a = self.tail(f.args[0], p, env)
            b = self.tail(f.args[1], p, env)
            return and3(a, b) if kd == "and" else or3(a, b)
        if kd in ("X", "F", "G"):
            return self.tail(f.args[0], p, env)
        if kd == "U":
            return self.tail(f.args[1], p, env)
        if kd == "atom" and f.name in env:
            return env[f.name][1]
        if kd == "atom":
            later = set()
            stack = list(self.k.successors(p[-1]))
            while stack:
                s = stack.pop()
                if s not in later:
                    later.add(s)
                    stack.extend(self.k.successors(s))
            vals = {f.name in self.k.labels[s] for s in later}
            if vals == {True}:
                return True
            if vals == {False}:
                return False
        return None


def oracle_bounded_qctl(k, s, f, depth, cap=DEPTH_CAP, search_cap=SEARCH_CAP):
    """Three-valued QCTL*i truth on the unfolding of ``k`` cut at ``depth``."""
    if depth > cap:
        raise BoundExceeded(f"depth {depth} exceeds cap {cap}")
    if not logic.is_closed(f):
        raise ValueError("formula is not closed")
    ev = _BoundedQCTL(k, depth, search_cap)
    return Verdict.of(ev.state(f, (s,), {}))
