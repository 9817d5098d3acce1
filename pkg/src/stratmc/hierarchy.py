"""Hierarchy analyses over observation partitions and formulas.

Throughout, ``a <= b`` (written ⊑ in reports) means that agent a observes
no more than agent b: whenever b confuses two positions, so does a.
"""

from dataclasses import dataclass, field
from itertools import product

from .errors import BoundExceeded

PREFIX_BOUND = 8


@dataclass(frozen=True)
class ObservationPreorder:
    """Restriction of the observes-no-more relation to ``agents``."""

    agents: tuple
    relation: frozenset

    hierarchical = True

    def leq(self, a, b):
        return (a, b) in self.relation

    @property
    def total(self):
        return all(self.leq(a, b) or self.leq(b, a)
                   for a in self.agents for b in self.agents)

    def ascending(self, order=None):
        """Agents sorted from least to most informed, ties by ``order``."""
        order = list(order or self.agents)
        rank = {a: sum(1 for b in self.agents if self.leq(b, a)) for a in self.agents}
        return sorted(self.agents, key=lambda a: (rank[a], order.index(a)))

    def maximal(self, agents=None):
        agents = self.agents if agents is None else agents
        return [a for a in agents if all(self.leq(b, a) for b in agents)]

    def minimal(self, agents=None):
        agents = self.agents if agents is None else agents
        return [a for a in agents if all(self.leq(a, b) for b in agents)]

    def describe(self):
        """Chain rendering such as ``a ⊑ n``; equal agents joined by ``≡``."""
        groups = []
        for a in self.ascending():
            if groups and self.leq(a, groups[-1][0]):
                groups[-1].append(a)
            else:
                groups.append([a])
        return " ⊑ ".join(" ≡ ".join(g) for g in groups)

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NotHierarchical:
    """Failed totality check with a witnessing incomparable pair."""

    pair: tuple
    positions: tuple = None

    hierarchical = False

    def __bool__(self):
        return False

    def __str__(self):
        x, y = self.pair
        s = f"not hierarchical: agents {x},{y} incomparable"
        if self.positions:
            s += f" (positions {self.positions[0]},{self.positions[1]})"
        return s


def _leq_table(g):
    table = g.__dict__.get("_obs_leq")
    if table is None:
        table = {}
        for a in g.agents:
            for b in g.agents:
                # every b-block must sit inside one a-block
                table[(a, b)] = all(len({g.block(a, v) for v in blk}) == 1
                                    for blk in g.observation[b])
        g.__dict__["_obs_leq"] = table
    return table


def observes_no_more(g, a, b):
    g.check_agent(a)
    g.check_agent(b)
    return _leq_table(g)[(a, b)]


def _separating_pair(g, a, b):
    """Positions p, q with p ~b q but not p ~a q."""
    for blk in g.observation[b]:
        blk = sorted(blk, key=g.positions.index)
        for p in blk:
            for q in blk:
                if not g.equiv(a, p, q):
                    return (p, q)
    return None


def coalition_hierarchy(g, coalition):
    coalition = [a for a in g.agents if a in set(coalition)]
    for a in coalition:
        g.check_agent(a)
    table = _leq_table(g)
    rel = frozenset((a, b) for a in coalition for b in coalition if table[(a, b)])
    for i, a in enumerate(coalition):
        for b in coalition[i + 1:]:
            if (a, b) not in rel and (b, a) not in rel:
                return NotHierarchical((a, b), _separating_pair(g, a, b))
    return ObservationPreorder(tuple(coalition), rel)


def has_hierarchical_observation(g):
    return coalition_hierarchy(g, g.agents)


def observation_preorder(g, agents=None):
    """The relation on ``agents`` whether or not it is total."""
    agents = list(g.agents if agents is None else agents)
    table = _leq_table(g)
    return ObservationPreorder(tuple(agents), frozenset(
        (a, b) for a in agents for b in agents if table[(a, b)]))


@dataclass
class HierarchyReport:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _binds(f, stack=()):
    """Yield (enclosing bind coalitions, bind node) for every bind."""
    if f.kind == "bind":
        yield stack, f
        stack = stack + (f.agents,)
    for a in f.args:
        yield from _binds(a, stack)


def formula_hierarchical_in(g, f):
    table = _leq_table(g)
    violations = []
    seen_coal = set()
    bad = set()
    for outer, node in _binds(f):
        A = node.agents
        if A not in seen_coal:
            seen_coal.add(A)
            h = coalition_hierarchy(g, A)
            if not h.hierarchical:
                violations.append(f"coalition {{{','.join(A)}}}: {h}")
                bad.add(A)
        for A1 in outer:
            if A1 in bad or A in bad:
                continue
            pre = observation_preorder(g, sorted(set(A1) | set(A)))
            for x in pre.maximal(list(A1)):
                for y in pre.minimal(list(A)):
                    if not table[(x, y)]:
                        msg = (f"binds <<{','.join(A1)}>> and <<{','.join(A)}>>: "
                               f"{x} ⋢ {y}")
                        if msg not in violations:
                            violations.append(msg)
    return HierarchyReport(not violations, violations)


def qctl_hierarchical(f, components=None):
    """Nested quantifiers must have growing observation sets.

    ``None`` observations mean every component; pass ``components`` (the
    number of components of the model) to compare them with explicit sets.
    """
    full = frozenset(range(1, components + 1)) if components else None

    def resolve(o):
        return full if o is None else o

    def subset(o1, o2):
        o1, o2 = resolve(o1), resolve(o2)
        if o2 is None:
            return True
        if o1 is None:
            return False
        return o1 <= o2

    def walk(g, outer):
        if g.kind == "exists":
            if any(not subset(o, g.obs) for o in outer):
                return False
            outer = outer + (g.obs,)
        return all(walk(a, outer) for a in g.args)

    return walk(f, ())


def _plays_from(g, start, length):
    plays = [(start,)]
    order = g.positions.index
    for _ in range(length - 1):
        plays = [p + (w,) for p in plays for w in sorted(g.succ[p[-1]], key=order)]
    return plays


def information_set(g, a, start, play):
    return frozenset(r for r in _plays_from(g, start, len(play))
                     if all(g.equiv(a, u, v) for u, v in zip(r, play)))


def prefix_hierarchy(g, start, play, bound=PREFIX_BOUND):
    """Preorder over agents induced by bounded information sets at ``play``."""
    play = tuple(play)
    if len(play) > bound:
        raise BoundExceeded(f"play length {len(play)} exceeds bound {bound}")
    if play[0] != start:
        raise ValueError("play must start at the start position")
    g.check_play(play)
    info = {a: information_set(g, a, start, play) for a in g.agents}
    rel = frozenset((a, b) for a in g.agents for b in g.agents if info[a] >= info[b])
    for i, a in enumerate(g.agents):
        for b in g.agents[i + 1:]:
            if (a, b) not in rel and (b, a) not in rel:
                return NotHierarchical((a, b))
    return ObservationPreorder(g.agents, rel)
