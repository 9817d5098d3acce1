"""Concurrent game structures with imperfect information.

Positions, agents and moves are strings.  A joint move is a tuple of moves
aligned with ``GameStructure.agents``.  Observations are partitions stored
as a block index per position, so ``v ~a v'`` is a dictionary lookup.

Plays are tuples of positions; infinite plays only appear as lassos in the
oracle and automata code.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

from .errors import InvalidPlay, NotReachable, UnknownAgent


class GameStructure:
    """Finite CGS, deterministic or nondeterministic.

    ``transitions`` maps ``(position, joint_move)`` to a position in the
    deterministic variant and to a frozenset of positions otherwise.
    ``observation`` maps each agent to a list of blocks (sets of positions).
    """

    def __init__(self, agents, moves, positions, transitions, labels,
                 observation, deterministic=True, init=None):
        self.agents = tuple(agents)
        self.moves = tuple(moves)
        self.positions = tuple(positions)
        self.deterministic = deterministic
        self.labels = {v: frozenset(labels.get(v, ())) for v in self.positions}
        self.init = init if init is not None else self.positions[0]
        if len(set(self.agents)) != len(self.agents):
            raise ValueError("duplicate agent")
        if not self.moves or not self.positions:
            raise ValueError("moves and positions must be nonempty")
        pos = set(self.positions)
        self.observation = {}
        self._block = {}
        for a in self.agents:
            blocks = [frozenset(b) for b in observation[a]]
            blocks.sort(key=lambda b: min(self.positions.index(v) for v in b))
            seen = set()
            index = {}
            for i, b in enumerate(blocks):
                if not b or b & seen or not b <= pos:
                    raise ValueError(f"observation of {a} is not a partition")
                seen |= b
                for v in b:
                    index[v] = i
            if seen != pos:
                raise ValueError(f"observation of {a} does not cover all positions")
            self.observation[a] = tuple(blocks)
            self._block[a] = index
        self.transitions = {}
        for v in self.positions:
            for c in self.joint_moves():
                if (v, c) not in transitions:
                    raise ValueError(f"no transition from {v} under {c}")
                t = transitions[(v, c)]
                if deterministic:
                    if t not in pos:
                        raise ValueError(f"unknown target {t}")
                else:
                    t = frozenset(t)
                    if not t or not t <= pos:
                        raise ValueError(f"bad successor set from {v} under {c}")
                self.transitions[(v, c)] = t

    def __repr__(self):
        kind = "det" if self.deterministic else "nondet"
        return (f"GameStructure({kind}, agents={list(self.agents)}, "
                f"positions={list(self.positions)})")

    # -- basic lookups

    def joint_moves(self, agents=None):
        agents = self.agents if agents is None else agents
        return product(self.moves, repeat=len(agents))

    def check_agent(self, a):
        if a not in self._block:
            raise UnknownAgent(f"unknown agent {a!r}")

    def block(self, a, v):
        """Index of the observation class of ``v`` for agent ``a``."""
        return self._block[a][v]

    def obs_class(self, a, v):
        return self.observation[a][self._block[a][v]]

    def equiv(self, a, v, w):
        return self._block[a][v] == self._block[a][w]

    def successors(self, v, c):
        t = self.transitions[(v, c)]
        return frozenset((t,)) if self.deterministic else t

    @cached_property
    def succ(self):
        """Position -> set of positions reachable in one step."""
        out = {}
        for v in self.positions:
            s = set()
            for c in self.joint_moves():
                s |= self.successors(v, c)
            out[v] = frozenset(s)
        return out

    def move_index(self, a):
        return self.agents.index(a)

    def with_labels(self, extra):
        """Copy with additional atoms: ``extra`` maps position -> atoms."""
        labels = {v: self.labels[v] | frozenset(extra.get(v, ())) for v in self.positions}
        return GameStructure(self.agents, self.moves, self.positions,
                             self.transitions, labels, self.observation,
                             self.deterministic, self.init)

    def atoms(self):
        out = set()
        for v in self.positions:
            out |= self.labels[v]
        return out

    def check_play(self, play):
        if not play:
            raise InvalidPlay("empty play")
        for v in play:
            if v not in self.labels:
                raise InvalidPlay(f"unknown position {v!r}")
        for u, v in zip(play, play[1:]):
            if v not in self.succ[u]:
                raise InvalidPlay(f"no transition from {u} to {v}")


@dataclass(frozen=True)
class FiniteMemoryStrategy:
    """Moore machine over the owner's observation classes.

    ``update`` maps (memory, observation block) to memory; ``output`` maps
    memory to a move.  The first move is ``output[update[(initial, o0)]]``
    where o0 is the class of the first position, so the strategy reads the
    whole observation sequence of a history.
    """

    owner: str
    initial: object
    update: dict = field(hash=False)
    output: dict = field(hash=False)

    @classmethod
    def constant(cls, owner, move):
        return cls(owner, 0, _AnyKey(0), {0: move})

    def memory_after(self, g, play):
        m = self.initial
        for v in play:
            m = self.update[(m, g.obs_class(self.owner, v))]
        return m

    def move_for(self, g, play):
        return self.output[self.memory_after(g, play)]

    @property
    def states(self):
        return sorted(set(self.output), key=repr)


class _AnyKey(dict):
    """Update table that maps every key to a fixed memory state."""

    def __init__(self, target):
        super().__init__()
        self.target = target

    def __missing__(self, key):
        return self.target


class StrategyContext:
    """Partial assignment agent -> FiniteMemoryStrategy."""

    def __init__(self, bindings=None):
        self.bindings = dict(bindings or {})

    def compose(self, other):
        """``other`` overrides; corresponds to sigma_A o sigma."""
        out = dict(self.bindings)
        out.update(other.bindings if isinstance(other, StrategyContext) else other)
        return StrategyContext(out)

    def release(self, agents):
        return StrategyContext({a: s for a, s in self.bindings.items()
                                if a not in set(agents)})

    def __contains__(self, a):
        return a in self.bindings

    def __getitem__(self, a):
        return self.bindings[a]

    def __iter__(self):
        return iter(self.bindings)

    def __len__(self):
        return len(self.bindings)


def play_equiv(g, a, r1, r2):
    g.check_agent(a)
    g.check_play(r1)
    g.check_play(r2)
    return len(r1) == len(r2) and all(g.equiv(a, u, v) for u, v in zip(r1, r2))


def _moves_at(g, ctx, history):
    """Per-agent move options at ``history`` under ``ctx``."""
    opts = []
    for a in g.agents:
        if a in ctx:
            opts.append((ctx[a].move_for(g, history),))
        else:
            opts.append(g.moves)
    return opts


def outcomes_bounded(g, prefix, ctx, horizon):
    prefix = tuple(prefix)
    g.check_play(prefix)
    if horizon < len(prefix):
        raise InvalidPlay("horizon shorter than prefix")
    ctx = ctx if isinstance(ctx, StrategyContext) else StrategyContext(ctx)
    frontier = [prefix]
    for _ in range(horizon - len(prefix)):
        nxt = []
        for h in frontier:
            succ = set()
            for c in product(*_moves_at(g, ctx, h)):
                succ |= g.successors(h[-1], c)
            nxt.extend(h + (w,) for w in sorted(succ, key=g.positions.index))
        frontier = nxt
    return set(frontier)


def abstraction(g, coalition):
    """Remove ``coalition`` and let Nature resolve their moves."""
    coalition = set(coalition)
    for a in coalition:
        g.check_agent(a)
    rest = tuple(a for a in g.agents if a not in coalition)
    idx_rest = [g.agents.index(a) for a in rest]
    idx_coal = [i for i, a in enumerate(g.agents) if a in coalition]
    trans = {}
    for v in g.positions:
        for c in product(g.moves, repeat=len(rest)):
            out = set()
            for d in product(g.moves, repeat=len(idx_coal)):
                full = [None] * len(g.agents)
                for i, m in zip(idx_rest, c):
                    full[i] = m
                for i, m in zip(idx_coal, d):
                    full[i] = m
                out |= g.successors(v, tuple(full))
            trans[(v, c)] = frozenset(out)
    return GameStructure(rest, g.moves, g.positions, trans, g.labels,
                         {a: g.observation[a] for a in rest},
                         deterministic=False, init=g.init)


def fresh_name(base, taken):
    name, k = base, 1
    while name in taken:
        name = f"{base}{k}"
        k += 1
    return name


def determinize_nature(g, nature=None):
    """Resolve nondeterminism by a fresh, fully informed Nature agent.

    Nature's k-th move picks the (k mod |S|)-th successor of the sorted
    successor set S.  Extra moves are appended to the shared move set when
    some successor set is larger than it; other agents playing one of those
    extra moves behave as if playing the first original move.
    """
    if g.deterministic:
        return g
    nature = nature or fresh_name("nature", set(g.agents))
    width = max(len(s) for s in g.transitions.values())
    moves = list(g.moves)
    for k in range(len(g.moves), width):
        moves.append(fresh_name(f"n{k}", set(moves)))
    original = set(g.moves)
    agents = g.agents + (nature,)
    order = {v: i for i, v in enumerate(g.positions)}
    trans = {}
    for v in g.positions:
        for c in product(moves, repeat=len(agents)):
            base = tuple(m if m in original else g.moves[0] for m in c[:-1])
            succ = sorted(g.transitions[(v, base)], key=order.get)
            trans[(v, c)] = succ[moves.index(c[-1]) % len(succ)]
    obs = dict(g.observation)
    obs[nature] = [[v] for v in g.positions]
    return GameStructure(agents, moves, g.positions, trans, g.labels, obs,
                         deterministic=True, init=g.init)


def reachable_positions(g, v):
    seen = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for w in g.succ[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return frozenset(seen)


def shift(g, source, target):
    if target not in reachable_positions(g, source):
        raise NotReachable(f"{target} is not reachable from {source}")
    return g, target


# ---------------------------------------------------------------- fixtures

def g_coin():
    """Coin game: n hides a coin, a must guess it without seeing it."""
    agents = ("n", "a")
    moves = ("h", "t")
    positions = ("v0", "vH", "vT", "w", "l")
    trans = {}
    for c in product(moves, repeat=2):
        n, a = c
        trans[("v0", c)] = "vH" if n == "h" else "vT"
        trans[("vH", c)] = "w" if a == "h" else "l"
        trans[("vT", c)] = "w" if a == "t" else "l"
        trans[("w", c)] = "w"
        trans[("l", c)] = "l"
    obs = {"n": [[v] for v in positions],
           "a": [["v0"], ["vH", "vT"], ["w"], ["l"]]}
    return GameStructure(agents, moves, positions, trans, {"w": {"win"}}, obs,
                         init="v0")


def g_3blind():
    """Two independent bits; x observes the first, y the second."""
    positions = ("s00", "s01", "s10", "s11")
    agents = ("x", "y")
    moves = ("0", "1")
    trans = {}
    for v in positions:
        for c in product(moves, repeat=2):
            trans[(v, c)] = "s" + c[0] + c[1]
    labels = {"s11": {"goal"}}
    obs = {"x": [["s00", "s01"], ["s10", "s11"]],
           "y": [["s00", "s10"], ["s01", "s11"]]}
    return GameStructure(agents, moves, positions, trans, labels, obs, init="s00")
