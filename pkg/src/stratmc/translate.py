"""From ATL*sc,i on game structures to hierarchical QCTL*i on compound
Kripke structures.

Component i of a compound state is agent i's observation class of the
position, the last component is the position itself.  Strategies become
propositional labellings: one atom per (agent, move) at each bind site,
quantified with the observation of the agent after merging in the
components of every agent that observes no more.
"""

from itertools import product

from . import logic
from .cgs import fresh_name
from .errors import BoundExceeded, NotHierarchicalCoalition, NotHierarchicalInstance
from .hierarchy import coalition_hierarchy, formula_hierarchical_in, observation_preorder
from .kripke import Kripke

FINAL = "final"
POUT = "pout"
VARIANTS = (FINAL, POUT)


def agent_order(g):
    """Default indexing of agents: least informed first, input order on ties."""
    return tuple(observation_preorder(g).ascending(g.agents))


class CompoundKripke(Kripke):
    """Kripke structure of a game; ``state_of[v]`` is the state s_v."""

    def __init__(self, game, order, states, relation, labels, components, names, state_of):
        super().__init__(states, relation, labels, components, names)
        self.game = game
        self.order = tuple(order)
        self.state_of = dict(state_of)
        self.position_of = {s: v for v, s in self.state_of.items()}


def build_cks(g, order=None, vocabulary=None):
    """Compound Kripke structure of a deterministic game."""
    if not g.deterministic:
        raise ValueError("build_cks needs a deterministic game structure")
    order = agent_order(g) if order is None else tuple(order)
    if sorted(order) != sorted(g.agents):
        raise ValueError("agent order must list every agent once")
    vocab = vocabulary or AtomVocabulary(g)
    state_of = {}
    for v in g.positions:
        state_of[v] = tuple(g.obs_class(a, v) for a in order) + (v,)
    states = [state_of[v] for v in g.positions]
    relation = {state_of[v]: tuple(state_of[w] for w in g.positions if w in g.succ[v])
                for v in g.positions}
    labels = {state_of[v]: g.labels[v] | {vocab.position(v)} for v in g.positions}
    components = [tuple(g.observation[a]) for a in order] + [tuple(g.positions)]
    names = {state_of[v]: f"s_{v}" for v in g.positions}
    return CompoundKripke(g, order, states, relation, labels, components, names, state_of)


def effective_obs(g, order=None):
    """o'_i = {j | a_j observes no more than a_i} (1-based, agents only)."""
    order = agent_order(g) if order is None else tuple(order)
    pre = observation_preorder(g, order)
    return {a: frozenset(j + 1 for j, b in enumerate(order) if pre.leq(b, a))
            for a in order}


class AtomVocabulary:
    """Position, move and marker atoms kept apart from the game's atoms."""

    def __init__(self, g, taken=()):
        self.g = g
        self.taken = set(g.atoms()) | set(taken)
        self._pos = {}
        self._moves = {}
        self._pout = {}
        for v in g.positions:
            self._pos[v] = self._claim(f"p_{v}")

    def _claim(self, name):
        while name in self.taken:
            name += "_"
        self.taken.add(name)
        return name

    def position(self, v):
        return self._pos[v]

    def positions(self):
        return dict(self._pos)

    def move(self, m, a, site=0):
        key = (m, a, site)
        hit = self._moves.get(key)
        if hit is None:
            hit = self._claim(f"{m}_{a}" if site == 0 else f"{m}_{a}_{site}")
            self._moves[key] = hit
        return hit

    def pout(self, site=0):
        hit = self._pout.get(site)
        if hit is None:
            hit = self._claim("pout" if site == 0 else f"pout_{site}")
            self._pout[site] = hit
        return hit

    def fresh(self, base):
        return self._claim(fresh_name(base, self.taken))


# ------------------------------------------------------------ plays and nodes


class NodePlayMap:
    """Finite plays from v0 versus nodes of the unfolding from s_v0."""

    def __init__(self, g, v0, cks=None, bound=8):
        self.g = g
        self.v0 = v0
        self.cks = cks or build_cks(g)
        self.bound = bound

    def _check(self, n):
        if n > self.bound:
            raise BoundExceeded(f"length {n} exceeds bound {self.bound}")

    def node(self, play):
        play = tuple(play)
        self._check(len(play))
        if play[0] != self.v0:
            raise ValueError("play must start at v0")
        self.g.check_play(play)
        return tuple(self.cks.state_of[v] for v in play)

    def play(self, node):
        node = tuple(node)
        self._check(len(node))
        if node[0] != self.cks.state_of[self.v0]:
            raise ValueError("node must start at s_v0")
        for s, t in zip(node, node[1:]):
            if t not in self.cks.successors(s):
                raise ValueError("not a node of the unfolding")
        return tuple(self.cks.position_of[s] for s in node)

    def plays_equivalent(self, a, r1, r2):
        return len(r1) == len(r2) and all(self.g.equiv(a, u, v) for u, v in zip(r1, r2))

    def nodes_equivalent(self, obs, n1, n2):
        return len(n1) == len(n2) and all(
            self.cks.project(s, obs) == self.cks.project(t, obs) for s, t in zip(n1, n2))


def node_play_bijection(g, v0, cks=None, bound=8):
    return NodePlayMap(g, v0, cks, bound)


# ------------------------------------------------------------ formulas


def build_phi_strat(coalition, moves, names):
    """Each agent of ``coalition`` plays exactly one move at every node.

    ``names[(m, a)]`` is the atom for agent a playing m.
    """
    parts = []
    for a in coalition:
        options = []
        for m in moves:
            lits = [logic.Atom(names[(m, a)])]
            lits += [logic.Not(logic.Atom(names[(m2, a)])) for m2 in moves if m2 != m]
            options.append(logic.conj(lits))
        parts.append(logic.PathA(logic.Globally(logic.disj(options))))
    return logic.conj(parts)


def _outcome_targets(g, coalition, v, c):
    idx = [g.agents.index(a) for a in coalition]
    out = set()
    for full in g.joint_moves():
        if all(full[i] == m for i, m in zip(idx, c)):
            out |= g.successors(v, full)
    return out


def build_psi_out(g, coalition, vocab, names):
    """Paths that follow the moves currently chosen for ``coalition``."""
    coalition = [a for a in g.agents if a in set(coalition)]
    parts = []
    for v in g.positions:
        for c in product(g.moves, repeat=len(coalition)):
            targets = _outcome_targets(g, coalition, v, c)
            if targets == set(g.succ[v]):
                continue
            guard = logic.conj([logic.Atom(vocab.position(v))] +
                               [logic.Atom(names[(m, a)]) for a, m in zip(coalition, c)])
            nxt = logic.disj([logic.Atom(vocab.position(w))
                              for w in g.positions if w in targets])
            parts.append(logic.Implies(guard, logic.Next(nxt)))
    return logic.Globally(logic.conj(parts))


def build_phi_out(g, coalition, vocab, names, pout):
    """Marker ``pout`` holds exactly on the outcome of the chosen moves."""
    coalition = [a for a in g.agents if a in set(coalition)]
    p = logic.Atom(pout)
    stay_out = logic.PathA(logic.Globally(logic.Implies(
        logic.Not(p), logic.PathA(logic.Next(logic.Not(p))))))
    options = []
    for v in g.positions:
        for c in product(g.moves, repeat=len(coalition)):
            targets = _outcome_targets(g, coalition, v, c)
            guard = [logic.Atom(vocab.position(v))]
            guard += [logic.Atom(names[(m, a)]) for a, m in zip(coalition, c)]
            nxt = logic.disj([logic.Atom(vocab.position(w))
                              for w in g.positions if w in targets])
            guard.append(logic.PathA(logic.Next(logic.Iff(nxt, p))))
            options.append(logic.conj(guard))
    follow = logic.PathA(logic.Globally(logic.Implies(p, logic.disj(options))))
    return logic.conj([p, stay_out, follow])


class Translator:
    """Structural translation with per-bind fresh move atoms."""

    def __init__(self, g, variant=FINAL, order=None, vocab=None):
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        self.g = g
        self.variant = variant
        self.order = agent_order(g) if order is None else tuple(order)
        self.vocab = vocab or AtomVocabulary(g)
        self.obs = effective_obs(g, self.order)
        self.pre = observation_preorder(g)
        self.sites = 0

    def coalition_order(self, coalition):
        """Coalition sorted least informed first, agent index on ties."""
        h = coalition_hierarchy(self.g, coalition)
        if not h.hierarchical:
            raise NotHierarchicalCoalition(h)
        return h.ascending(self.order)

    def tr(self, f, env):
        """``env`` maps each bound agent to its current move atoms."""
        k = f.kind
        if k in ("true", "false", "atom"):
            return f
        if k in ("not", "and", "or", "X", "U", "F", "G"):
            return logic.Formula(k, tuple(self.tr(a, env) for a in f.args))
        if k == "release":
            return self.tr(f.args[0], {a: n for a, n in env.items() if a not in f.agents})
        if k == "bind":
            return self.bind(f.agents, f.args[0], env)
        if k == "strat":
            # restart semantics: no outer strategy stays in force
            return self.bind(f.agents, f.args[0], {})
        raise ValueError(f"{k} cannot be translated")

    def bind(self, coalition, body, env):
        site = self.sites
        self.sites += 1
        agents = self.coalition_order(coalition)
        moves = self.g.moves
        local = {(m, a): self.vocab.move(m, a, site) for a in agents for m in moves}
        env2 = dict(env)
        for a in agents:
            env2[a] = {m: local[(m, a)] for m in moves}
        names = {(m, a): env2[a][m] for a in env2 for m in moves}
        bound = [a for a in self.g.agents if a in env2]
        strat = build_phi_strat(agents, moves, local)
        inner = self.tr(body, env2)
        if self.variant == FINAL:
            out = build_psi_out(self.g, bound, self.vocab, names)
            matrix = logic.And(strat, logic.PathA(logic.Implies(out, inner)))
        else:
            pout = self.vocab.pout(site)
            marked = build_phi_out(self.g, bound, self.vocab, names, pout)
            matrix = logic.conj([strat, marked, logic.PathA(logic.Implies(
                logic.Globally(logic.Atom(pout)), inner))])
            matrix = logic.Exists(pout, None, matrix)
        for a in reversed(agents):
            o = self.obs[a]
            for m in reversed(moves):
                matrix = logic.Exists(local[(m, a)], o, matrix)
        return matrix


class Translation:
    """Result bundle: structure, start state and QCTL*i formula."""

    def __init__(self, cks, state, formula, translator):
        self.cks = cks
        self.state = state
        self.formula = formula
        self.translator = translator

    def render(self):
        return dump_cks(self.cks) + "formula:\n  " + logic.to_text(self.formula) + "\n"


def translate_sc(g, f, gamma=(), variant=FINAL, order=None, check=True):
    """QCTL*i formula for the ATL*sc,i formula ``f`` (bound agents ``gamma``)."""
    if check:
        rep = formula_hierarchical_in(g, f)
        if not rep:
            raise NotHierarchicalInstance(rep.violations)
    t = Translator(g, variant, order)
    env = {a: {m: t.vocab.move(m, a, "ctx") for m in g.moves} for a in gamma}
    return t.tr(f, env)


def translate(g, v, f, variant=FINAL, order=None, check=True):
    """Full pipeline for a deterministic game: structure plus formula."""
    if check:
        rep = formula_hierarchical_in(g, f)
        if not rep:
            raise NotHierarchicalInstance(rep.violations)
    t = Translator(g, variant, order)
    cks = build_cks(g, t.order, t.vocab)
    return Translation(cks, cks.state_of[v], t.tr(f, {}), t)


def translate_atl_innermost(g, coalition, psi, variant=FINAL, order=None):
    """Translation of a single strategic quantifier over an LTL objective."""
    t = Translator(g, variant, order)
    return t.bind(tuple(coalition), psi, {})


def dump_cks(cks):
    """Text rendering in the model-file style with a components section."""
    lines = ["# compound Kripke structure", "components:"]
    for i, a in enumerate(cks.order, 1):
        blocks = " ".join("{" + " ".join(sorted(b, key=cks.game.positions.index)) + "}"
                          for b in cks.components[i - 1])
        lines.append(f"  {i} obs {a}: {blocks}")
    lines.append(f"  {len(cks.order) + 1} position")
    lines.append("states:")
    for s in cks.states:
        atoms = " ".join(sorted(cks.labels[s]))
        lines.append(f"  {cks.name(s)} = {cks.position_of[s]} {{{atoms}}}")
    lines.append("relation:")
    for s in cks.states:
        succ = " ".join(cks.name(t) for t in cks.successors(s))
        lines.append(f"  {cks.name(s)} -> {succ}")
    return "\n".join(lines) + "\n"
