"""Top-level decision procedures.

Two routes are supported:

* ``bottom-up`` for ATL*i on structures with hierarchical observation:
  innermost strategic subformulas are decided position by position with the
  QCTL*i engine and replaced by fresh atoms;
* ``translation`` for hierarchical ATL*sc,i instances: the whole formula is
  translated once and handed to the engine.

Anything else is rejected with diagnostics.
"""

import time
from dataclasses import dataclass, field

from . import logic
from .automata.budget import Budget
from .automata.ltl import ltl_to_nbw
from .automata.safra import ParityWordAutomaton, nbw_to_dpw
from .cgs import (FiniteMemoryStrategy, GameStructure, StrategyContext,
                  determinize_nature, fresh_name, outcomes_bounded,
                  reachable_positions, shift)
from .errors import (NoWitnessAvailable, NotHierarchicalCoalition,
                     NotHierarchicalInstance, RouteMismatch,
                     UnsupportedObjectiveIndex)
from .hierarchy import (coalition_hierarchy, formula_hierarchical_in,
                        has_hierarchical_observation, observation_preorder)
from .qctl_engine import ENGINE_CAP, run_qctl
from .translate import AtomVocabulary, Translator, build_cks, translate

BOTTOM_UP = "bottom-up"
TRANSLATION = "translation"
REJECT = "reject"

REPLAY_HORIZON = 8

UNSUPPORTED_CLASSES = (
    "static hierarchical information: recognized, no solving route",
    "dynamic hierarchical information: recognized, no solving route",
)


# ------------------------------------------------------------ classification


def infer_logic(f):
    k = logic.kinds(f)
    if k & {"bind", "release"}:
        return logic.ATLSCI
    return logic.ATLI


@dataclass
class ClassifyReport:
    route: str
    logic: str
    hierarchy: str = ""
    diagnostics: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def accepted(self):
        return self.route != REJECT

    def lines(self):
        out = [f"logic: {self.logic}", f"route: {self.route}"]
        if self.hierarchy:
            out.append(f"hierarchical observation: {self.hierarchy}")
        out += [f"diagnostic: {d}" for d in self.diagnostics]
        out += [f"note: {n}" for n in self.notes]
        return out


def describe_observation(g):
    """``yes (a ⊑ n)`` or ``no (...)`` for the whole agent set."""
    h = has_hierarchical_observation(g)
    if h.hierarchical:
        return f"yes ({h.describe()})"
    return f"no ({h})"


def classify(g, v, f, logic_tag=None):
    """Which decision route applies to the instance (g, v, f)."""
    tag = logic_tag or infer_logic(f)
    g.check_play((v,))
    if not logic.is_closed(f):
        return ClassifyReport(REJECT, tag, describe_observation(g),
                              ["formula is not closed"], list(UNSUPPORTED_CLASSES))
    if tag == logic.ATLI:
        if logic.kinds(f) & {"bind", "release"}:
            return ClassifyReport(REJECT, tag, describe_observation(g),
                                  ["context operators under the ATL*i route"],
                                  list(UNSUPPORTED_CLASSES))
        h = has_hierarchical_observation(g)
        if h.hierarchical:
            return ClassifyReport(BOTTOM_UP, tag, f"yes ({h.describe()})",
                                  notes=list(UNSUPPORTED_CLASSES))
        return ClassifyReport(REJECT, tag, f"no ({h})", [str(h)],
                              list(UNSUPPORTED_CLASSES))
    if tag == logic.ATLSCI:
        if "strat" in logic.kinds(f):
            return ClassifyReport(REJECT, tag, describe_observation(g),
                                  ["restarting strategic operators under the ATL*sc,i route"],
                                  list(UNSUPPORTED_CLASSES))
        rep = formula_hierarchical_in(g, f)
        if rep:
            return ClassifyReport(TRANSLATION, tag, describe_observation(g),
                                  notes=list(UNSUPPORTED_CLASSES))
        return ClassifyReport(REJECT, tag, describe_observation(g),
                              list(rep.violations), list(UNSUPPORTED_CLASSES))
    return ClassifyReport(REJECT, tag, describe_observation(g),
                          [f"logic {tag} has no game route"], list(UNSUPPORTED_CLASSES))


# ------------------------------------------------------------ queries


@dataclass
class StrategicQuery:
    """One engine call for a single strategic quantifier over an LTL body."""

    game: GameStructure
    position: str
    coalition: tuple
    objective: logic.Formula
    translator: Translator
    cks: object
    run: object
    budget_used: int

    @property
    def value(self):
        return bool(self.run.value)

    def __bool__(self):
        return self.value


@dataclass
class CheckResult:
    value: bool
    route: str
    budget_used: int = 0
    elapsed: float = 0.0
    markings: dict = field(default_factory=dict)
    query: StrategicQuery = None
    runs: list = field(default_factory=list)

    def __bool__(self):
        return self.value


_last = {"query": None}


def last_query():
    return _last["query"]


def _budget(budget):
    if budget is None:
        return Budget(ENGINE_CAP)
    if isinstance(budget, int):
        return Budget(budget)
    return budget


def _deterministic(g):
    return g if g.deterministic else determinize_nature(g)


def strategic_query(g, v, coalition, psi, budget=None, variant="final"):
    """Decide <<coalition>> psi at v (psi an LTL formula) with the engine."""
    g = _deterministic(g)
    coalition = tuple(a for a in g.agents if a in set(coalition))
    vocab = AtomVocabulary(g, taken=logic.atoms(psi))
    t = Translator(g, variant, vocab=vocab)
    formula = t.bind(coalition, psi, {})
    cks = build_cks(g, t.order, t.vocab)
    b = _budget(budget)
    run = run_qctl(cks, cks.state_of[v], formula, b)
    return StrategicQuery(g, v, coalition, psi, t, cks, run, b.used)


def _propositional(f, labels):
    k = f.kind
    if k == "true":
        return True
    if k == "false":
        return False
    if k == "atom":
        return f.name in labels
    if k == "not":
        return not _propositional(f.args[0], labels)
    if k == "and":
        return _propositional(f.args[0], labels) and _propositional(f.args[1], labels)
    if k == "or":
        return _propositional(f.args[0], labels) or _propositional(f.args[1], labels)
    raise ValueError(f"{k} left after marking")


def check_atli(g, v, f, budget=None):
    """Bottom-up route; returns a CheckResult with the per-subformula marks."""
    start = time.perf_counter()
    rep = classify(g, v, f, logic.ATLI)
    if rep.route != BOTTOM_UP:
        raise RouteMismatch("; ".join(rep.diagnostics) or "not on the bottom-up route")
    cap = _budget(budget).cap
    g = _deterministic(g)
    reach = sorted(reachable_positions(g, v), key=g.positions.index)
    taken = set(g.atoms()) | logic.atoms(f) | {f"p_{u}" for u in g.positions}
    marks = {}
    runs = []
    used = 0
    top_query = None
    whole = f
    cache = {}
    while logic.count_strategic(f):
        path = logic.innermost_strategic(f)[0]
        node = logic.get(f, path)
        hit = cache.get(node)
        if hit is None:
            hit = set()
            for u in reach:
                _, u = shift(g, v, u)
                q = strategic_query(g, u, node.agents, node.args[0], Budget(cap))
                used += q.budget_used
                runs.append((f"m{len(marks)}_{u}", q.run))
                if q.value:
                    hit.add(u)
                if node == whole and u == v:
                    top_query = q
            cache[node] = hit
        name = fresh_name("m", taken)
        taken.add(name)
        marks[name] = (node, frozenset(hit))
        g = g.with_labels({u: {name} for u in hit})
        f = logic.substitute_atom(f, path, name, expect=node)
    value = _propositional(f, g.labels[v])
    if top_query is not None and top_query.value:
        _last["query"] = top_query
    return CheckResult(value, BOTTOM_UP, used, time.perf_counter() - start, marks,
                       top_query, runs)


def mc_atli(g, v, f, budget=None):
    return check_atli(g, v, f, budget).value


def check_atlsc(g, v, f, budget=None, variant="final"):
    start = time.perf_counter()
    rep = classify(g, v, f, logic.ATLSCI)
    if rep.route != TRANSLATION:
        raise NotHierarchicalInstance(rep.diagnostics)
    g = _deterministic(g)
    b = _budget(budget)
    query = None
    if f.kind == "bind" and logic.count_strategic(f.args[0]) == 0 \
            and not logic.kinds(f.args[0]) & {"release"}:
        query = strategic_query(g, v, f.agents, f.args[0], b, variant)
        run = query.run
        if query.value:
            _last["query"] = query
    else:
        tr = translate(g, v, f, variant)
        run = run_qctl(tr.cks, tr.state, tr.formula, b)
    return CheckResult(bool(run.value), TRANSLATION, b.used, time.perf_counter() - start,
                       {}, query, [("top", run)])


def mc_atlsc(g, v, f, budget=None, variant="final"):
    return check_atlsc(g, v, f, budget, variant).value


def check(g, v, f, logic_tag=None, budget=None):
    """Classify, then run whichever route applies."""
    rep = classify(g, v, f, logic_tag)
    if rep.route == BOTTOM_UP:
        return check_atli(g, v, f, budget)
    if rep.route == TRANSLATION:
        return check_atlsc(g, v, f, budget)
    raise NotHierarchicalInstance(rep.diagnostics)


# ------------------------------------------------------------ A-strategy problem


def _parity_ltl(priorities, atom_of):
    """LTL condition "least priority seen infinitely often is even"."""
    ps = sorted(set(priorities))
    if len(ps) > 3:
        raise UnsupportedObjectiveIndex(f"parity index {len(ps)} exceeds 3")
    at = lambda p: logic.Atom(atom_of[p])
    if len(ps) == 1:
        return logic.TRUE if ps[0] % 2 == 0 else logic.FALSE
    if len(ps) == 2:
        low = ps[0]
        if low % 2 == 0:
            return logic.Globally(logic.Finally(at(low)))
        return logic.Finally(logic.Globally(logic.Not(at(low))))
    low, mid, high = ps
    if low % 2 == 0:
        # low infinitely often, or eventually only the top priority
        return logic.Or(logic.Globally(logic.Finally(at(low))),
                        logic.Finally(logic.Globally(at(high))))
    return logic.And(logic.Finally(logic.Globally(logic.Not(at(low)))),
                     logic.Globally(logic.Finally(at(mid))))


def parity_product(g, v, dpw, letter_of):
    """Product of g with a DPW read on positions; returns (game, start, ltl)."""
    taken = set(g.atoms())
    prio_atom = {}
    for p in sorted(set(dpw.priority.values())):
        prio_atom[p] = fresh_name(f"prio{p}", taken)
        taken.add(prio_atom[p])
    start = (v, dpw.step(dpw.initial, letter_of(v)))
    name = lambda s: f"{s[0]}.q{s[1]}"
    positions = [start]
    seen = {start}
    trans = {}
    i = 0
    while i < len(positions):
        s = positions[i]
        i += 1
        for c in g.joint_moves():
            out = set()
            for w in g.successors(s[0], c):
                t = (w, dpw.step(s[1], letter_of(w)))
                out.add(t)
                if t not in seen:
                    seen.add(t)
                    positions.append(t)
            trans[(name(s), c)] = frozenset(name(t) for t in out)
    labels = {name(s): g.labels[s[0]] | {prio_atom[dpw.priority[s[1]]]} for s in positions}
    obs = {}
    for a in g.agents:
        obs[a] = [[name(s) for s in positions if s[0] in blk] for blk in g.observation[a]]
        obs[a] = [b for b in obs[a] if b]
    if g.deterministic:
        trans = {k: next(iter(t)) for k, t in trans.items()}
    prod = GameStructure(g.agents, g.moves, [name(s) for s in positions], trans, labels,
                         obs, deterministic=g.deterministic, init=name(start))
    ltl = _parity_ltl([dpw.priority[s[1]] for s in positions], prio_atom)
    return prod, name(start), ltl


def solve_strategy(g, v, coalition, objective, budget=None):
    """A-strategy problem as a StrategicQuery (kept for witness extraction)."""
    for a in coalition:
        g.check_agent(a)
    h = coalition_hierarchy(g, coalition)
    if not h.hierarchical:
        raise NotHierarchicalCoalition(h)
    if isinstance(objective, str):
        objective = logic.parse(objective, logic.LTL)
    if isinstance(objective, ParityWordAutomaton):
        basis = frozenset().union(*objective.alphabet) if objective.alphabet else frozenset()
        pos_atoms = {u: f"p_{u}" for u in g.positions}

        def letter_of(u):
            return frozenset(x for x in basis if x in g.labels[u] or x == pos_atoms[u])

        g, v, objective = parity_product(g, v, objective, letter_of)
    else:
        g = g.with_labels({u: {f"p_{u}"} for u in g.positions})
    q = strategic_query(g, v, tuple(coalition), objective, budget)
    if q.value:
        _last["query"] = q
    return q


def a_strategy(g, v, coalition, objective, budget=None):
    """Does ``coalition`` have a uniform profile enforcing ``objective`` from v?

    ``objective`` is an LTL formula (text or Formula) over the labels and
    the position atoms ``p_<position>``, or a ParityWordAutomaton reading
    sets of those atoms.
    """
    return solve_strategy(g, v, coalition, objective, budget).value


def objective_dpw(text, g):
    """DPW for an LTL objective over the position atoms and labels of g."""
    f = logic.parse(text, logic.LTL) if isinstance(text, str) else text
    atoms = logic.atoms(f)
    nbw = ltl_to_nbw(f, atoms)
    return nbw_to_dpw(nbw)


# ------------------------------------------------------------ witnesses


class _Free:
    """Memory marker for subtrees where every labelling is accepted."""

    def __repr__(self):
        return "free"


FREE = _Free()


def extract_witness(query=None, replay_horizon=REPLAY_HORIZON):
    """Uniform finite-memory profile for the last successful strategic query.

    Each agent's memory is its knowledge of (witness-tree memory, position)
    pairs; the move at that memory is read from the witness labelling.
    """
    query = query if query is not None else _last["query"]
    if query is None or not isinstance(query, StrategicQuery) or not query.value:
        raise NoWitnessAvailable("no successful engine query to explain")
    if not query.coalition:
        return {}
    g = query.game
    cks = query.cks
    run = query.run
    try:
        bw = run.labelling()
    except ValueError as exc:
        raise NoWitnessAvailable(str(exc)) from exc
    eng = bw.engine
    inner = bw.blocks[-1].obs
    ids = eng.dirs(inner)[0]
    direction = {u: ids[eng.index[cks.state_of[u]]] for u in g.positions}
    props = bw.source_names()
    t = query.translator
    atom_of = {(m, a): t.vocab.move(m, a, 0) for a in query.coalition for m in g.moves}
    by_name = {n: p for p, n in props.items()}

    def move_at(mem, agent):
        if mem is FREE:
            return None
        letter = bw.letter(mem)
        if letter is None:
            return None
        for m in g.moves:
            p = by_name.get(atom_of[(m, agent)])
            if p is not None and p in letter:
                return m
        return None

    def child(mem, w):
        if mem is FREE:
            return FREE
        nxt = bw.step(mem, direction[w])
        return FREE if nxt is None else nxt

    profile = {}
    for a in query.coalition:
        init = "start"
        update = {}
        output = {init: g.moves[0]}
        classes = list(g.observation[a])
        k0 = frozenset({(bw.initial, query.position)})
        todo = []
        known = {}

        def intern(k):
            if k not in known:
                known[k] = len(known)
                todo.append(k)
            return known[k]

        for cls in classes:
            update[(init, cls)] = intern(k0 if query.position in cls else frozenset())
        while todo:
            k = todo.pop()
            me = known[k]
            moves = {move_at(mem, a) for mem, _ in k} - {None}
            if len(moves) > 1:
                raise NoWitnessAvailable(f"labelling for {a} is not uniform")
            output[me] = moves.pop() if moves else g.moves[0]
            for cls in classes:
                nxt = frozenset((child(mem, w), w) for mem, u in k
                                for w in g.succ[u] if w in cls)
                update[(me, cls)] = intern(nxt)
        profile[a] = FiniteMemoryStrategy(a, init, update, output)
    validate_witness(query, profile, replay_horizon)
    return profile


def validate_witness(query, profile, horizon=REPLAY_HORIZON):
    """Replay: uniform on bounded histories and no definitely losing outcome."""
    from .oracle import _BoundedATL

    g = query.game
    plays = outcomes_bounded(g, (query.position,), StrategyContext(profile), horizon)
    ev = _BoundedATL(g, horizon)
    for p in plays:
        if ev.path(query.objective, p, 0, {}, horizon) is False:
            raise NoWitnessAvailable(f"witness loses on {'.'.join(p)}")
    prefixes = {p[:i] for p in plays for i in range(1, len(p) + 1)}
    for a, s in profile.items():
        seen = {}
        for h in prefixes:
            key = tuple(g.block(a, u) for u in h)
            m = s.move_for(g, h)
            if seen.setdefault(key, m) != m:
                raise NoWitnessAvailable(f"witness for {a} is not uniform")
    return plays
