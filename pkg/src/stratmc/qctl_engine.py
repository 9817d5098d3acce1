"""Model checking hierarchical QCTL*i on finite compound Kripke structures.

The formula is compiled into one alternating parity automaton per
observation level.  A level reads the tree whose directions are the
projections of model states on the level's observation; the top level
observes nothing and so reads a single branch.  A block of consecutive
quantifiers with one observation o becomes

    narrow(project(nondeterminize(A_body), props), o, parent observation)

which the parent level uses as a subautomaton.  Path quantifiers are
handled by threads that follow model states and run a Büchi automaton for
the path formula; complex state subformulas under a path quantifier are
decided on the fly at each step.

Tree semantics is respected because every automaton at level o reads the
labelling chosen for that level's propositions on the o-tree, so
o-indistinguishable nodes necessarily carry the same letters.
"""

import os
from dataclasses import dataclass
from itertools import product

from . import logic
from .automata import pbf
from .automata.budget import Budget
from .automata.ltl import FF, TT, BuchiWordAutomaton, mk, negate_nnf, nnf_atoms
from .automata.parity import ParityGame, compress_priorities, parity_solve
from .automata.safra import SafraConstruction
from .automata.tree import (Narrowed, Nondeterminized, Projected, Reduced,
                            TreeAutomaton, dump_automaton)
from .errors import NotClosed, NotHierarchicalFormula

ENGINE_CAP = 200_000
PROP_PREFIX = "§"


@dataclass
class EngineQuery:
    model: object
    initial: object
    formula: logic.Formula
    cap: int = ENGINE_CAP


# ------------------------------------------------------------ compilation


class Block:
    """Consecutive existential quantifiers sharing one observation."""

    def __init__(self, bid, props, names, obs, parent_obs, free):
        self.bid = bid
        self.props = tuple(props)
        self.names = tuple(names)
        self.obs = obs
        self.parent_obs = parent_obs
        self.free = frozenset(free)
        self.body = None

    @property
    def scope(self):
        return self.free | frozenset(self.props)

    def __repr__(self):
        return f"Block({self.bid}, {self.names}, obs={self.obs})"


class Compiler:
    """Turns a closed QCTL*i Formula into internal NNF state formulas.

    State formulas are tuples: ('tt',) ('ff',) ('ap', x) ('nap', x)
    ('and', f, g) ('or', f, g) ('E', pid) ('A', pid) ('blk', bid)
    ('dual', bid).  Quantified propositions are renamed apart with the
    PROP_PREFIX so they never clash with model atoms.
    """

    def __init__(self, ncomponents):
        self.ncomp = ncomponents
        self.full = tuple(range(1, ncomponents + 1))
        self.blocks = []
        self.paths = []
        self._pid = {}
        self.cx = []
        self._cid = {}
        self._fresh = 0

    def obs_of(self, obs):
        if obs is None:
            return self.full
        bad = [i for i in obs if not 1 <= i <= self.ncomp]
        if bad:
            raise ValueError(f"observation {sorted(obs)} mentions unknown components {bad}")
        return tuple(sorted(obs))

    def compile(self, f):
        if not logic.is_closed(f):
            raise NotClosed(f"formula is not closed: {logic.to_text(f)}")
        return self.state(f, False, {}, ())

    def path_id(self, p):
        i = self._pid.get(p)
        if i is None:
            i = len(self.paths)
            self._pid[p] = i
            self.paths.append(p)
        return i

    def cx_id(self, sf):
        i = self._cid.get(sf)
        if i is None:
            i = len(self.cx)
            self._cid[sf] = i
            self.cx.append(sf)
        return i

    def state(self, f, neg, scope, obs):
        k = f.kind
        if k == "true":
            return FF if neg else TT
        if k == "false":
            return TT if neg else FF
        if k == "atom":
            return ("nap" if neg else "ap", scope.get(f.name, f.name))
        if k == "not":
            return self.state(f.args[0], not neg, scope, obs)
        if k in ("and", "or"):
            op = k if not neg else ("or" if k == "and" else "and")
            a = self.state(f.args[0], neg, scope, obs)
            b = self.state(f.args[1], neg, scope, obs)
            # A p and A q is A (p and q), E p or E q is E (p or q): one
            # path thread instead of two
            quant = "A" if op == "and" else "E"
            if a[0] == quant and b[0] == quant:
                p = mk(op, self.paths[a[1]], self.paths[b[1]])
                return (quant, self.path_id(p))
            return mk(op, a, b)
        if k in ("E", "A"):
            p = self.path(f.args[0], neg, scope, obs)
            universal = (k == "A") != neg
            return ("A" if universal else "E", self.path_id(p))
        if k == "exists":
            return self.block(f, neg, scope, obs)
        if k in logic.TEMPORAL:
            raise NotClosed(f"temporal operator {k} outside a path quantifier")
        raise ValueError(f"{k} is not a QCTL*i connective")

    def block(self, f, neg, scope, parent_obs):
        o = self.obs_of(f.obs)
        if not set(parent_obs) <= set(o):
            raise NotHierarchicalFormula(
                f"quantifier on {f.name} observes {sorted(o)}, "
                f"which does not include the enclosing {sorted(parent_obs)}")
        inner = dict(scope)
        props, names = [], []
        g = f
        while g.kind == "exists" and self.obs_of(g.obs) == o:
            internal = f"{PROP_PREFIX}{g.name}{self._fresh}"
            self._fresh += 1
            inner[g.name] = internal
            props.append(internal)
            names.append(g.name)
            g = g.args[0]
        blk = Block(len(self.blocks), props, names, o, parent_obs, scope.values())
        self.blocks.append(blk)
        blk.body = self.state(g, False, inner, o)
        # enclosing propositions the body never reads stay out of the alphabet
        blk.free = blk.free & self.props_read(blk.body)
        return ("dual" if neg else "blk", blk.bid)

    def props_read(self, f, acc=None):
        """Quantified propositions a compiled state or path formula depends on."""
        acc = set() if acc is None else acc
        k = f[0]
        if k in ("ap", "nap"):
            x = f[1]
            if x.startswith(PROP_PREFIX):
                acc.add(x)
            elif x.startswith("#"):
                self.props_read(self.cx[int(x[1:])], acc)
        elif k in ("E", "A"):
            self.props_read(self.paths[f[1]], acc)
        elif k in ("blk", "dual"):
            acc |= self.blocks[f[1]].free
        else:
            for x in f[1:]:
                if isinstance(x, tuple):
                    self.props_read(x, acc)
        return acc

    def path(self, f, neg, scope, obs):
        k = f.kind
        if k == "true":
            return FF if neg else TT
        if k == "false":
            return TT if neg else FF
        if k == "atom":
            return ("nap" if neg else "ap", scope.get(f.name, f.name))
        if k == "not":
            return self.path(f.args[0], not neg, scope, obs)
        if k in ("and", "or"):
            op = k if not neg else ("or" if k == "and" else "and")
            return mk(op, self.path(f.args[0], neg, scope, obs),
                      self.path(f.args[1], neg, scope, obs))
        if k == "X":
            return ("X", self.path(f.args[0], neg, scope, obs))
        if k == "F":
            inner = self.path(f.args[0], neg, scope, obs)
            return ("R", FF, inner) if neg else ("U", TT, inner)
        if k == "G":
            inner = self.path(f.args[0], neg, scope, obs)
            return ("U", TT, inner) if neg else ("R", FF, inner)
        if k == "U":
            a = self.path(f.args[0], neg, scope, obs)
            b = self.path(f.args[1], neg, scope, obs)
            return ("R", a, b) if neg else ("U", a, b)
        if k in ("E", "A", "exists"):
            c = self.cx_id(self.state(f, False, scope, obs))
            return ("nap" if neg else "ap", f"#{c}")
        raise ValueError(f"{k} is not a QCTL*i connective")


def negate_state(sf, compiler):
    k = sf[0]
    if k == "tt":
        return FF
    if k == "ff":
        return TT
    if k == "ap":
        return ("nap", sf[1])
    if k == "nap":
        return ("ap", sf[1])
    if k == "and":
        return mk("or", negate_state(sf[1], compiler), negate_state(sf[2], compiler))
    if k == "or":
        return mk("and", negate_state(sf[1], compiler), negate_state(sf[2], compiler))
    if k in ("E", "A"):
        pid = compiler.path_id(negate_nnf(compiler.paths[sf[1]]))
        return ("A" if k == "E" else "E", pid)
    if k == "blk":
        return ("dual", sf[1])
    if k == "dual":
        return ("blk", sf[1])
    raise ValueError(k)


# ------------------------------------------------------------ boolean covers

_COVERS = {}


def cube_cover(n, on):
    """Small set of cubes whose union is exactly ``on`` (a set of n-bit tuples).

    A cube is a tuple of (index, value) literals.  Uses prime implicants and
    a greedy cover for n <= 6, minterms beyond that.
    """
    on = frozenset(on)
    key = (n, on)
    hit = _COVERS.get(key)
    if hit is not None:
        return hit
    if not on:
        out = ()
    elif len(on) == 1 << n:
        out = ((),)
    elif n > 6:
        out = tuple(tuple(enumerate(m)) for m in sorted(on))
    else:
        implicants = []
        for pat in product((None, False, True), repeat=n):
            free = [i for i, b in enumerate(pat) if b is None]
            members = []
            for vals in product((False, True), repeat=len(free)):
                m = list(pat)
                for i, v in zip(free, vals):
                    m[i] = v
                members.append(tuple(m))
            if all(m in on for m in members):
                implicants.append((pat, frozenset(members)))
        primes = [(p, ms) for p, ms in implicants
                  if not any(ms < ms2 for _, ms2 in implicants)]
        left = set(on)
        chosen = []
        while left:
            p, ms = max(primes, key=lambda x: (len(x[1] & left),
                                               sum(b is None for b in x[0]),
                                               repr(x[0])))
            chosen.append(tuple((i, b) for i, b in enumerate(p) if b is not None))
            left -= ms
        out = tuple(chosen)
    _COVERS[key] = out
    return out


# ------------------------------------------------------------ automata


class Level(TreeAutomaton):
    """Alternating automaton for one observation level.

    States: ('sf', s, f) evaluates state formula f at model state s;
    ('E'|'A', s, pid, q) is a path thread in Büchi state q;
    ('N'|'D', bid, s0, d) is state d of the chain of block bid started at s0
    (D for its dual).
    """

    def __init__(self, engine, obs, basis):
        self.engine = engine
        self.obs = obs
        self.basis = frozenset(basis)
        self._delta = {}

    def priority(self, q):
        k = q[0]
        eng = self.engine
        if k == "sf":
            return 0
        if k == "E":
            return 0 if eng.nbw(q[2], "E").accepting(q[3]) else 1
        if k == "A":
            return eng.nbw(q[2], "A").priority(q[3])
        w = eng.chain(q[1], q[2]).W
        return w.priority(q[3]) + (1 if k == "D" else 0)

    def delta(self, q, letter):
        letter = frozenset(letter) & self.basis
        key = (q, letter)
        hit = self._delta.get(key)
        if hit is not None:
            return hit
        eng = self.engine
        k = q[0]
        if k == "sf":
            out = eng.expand(self, q[2], q[1], letter)
        elif k in ("E", "A"):
            out = eng.thread(self, q, letter)
        elif k == "N":
            out = eng.block_delta(q[1], q[2], q[3], letter, "N")
        else:
            out = pbf.dual(eng.block_delta(q[1], q[2], q[3], letter, "D"))
        self._delta[key] = out
        return out


class Rooted(TreeAutomaton):
    """A level automaton with a chosen initial state."""

    def __init__(self, level, initial):
        self.level = level
        self.basis = level.basis
        self.initial = initial

    def delta(self, q, letter):
        return self.level.delta(q, letter)

    def priority(self, q):
        return self.level.priority(q)


class Chain:
    """The automaton standing for block ``blk`` evaluated at model state s0."""

    def __init__(self, engine, blk, s0):
        self.block = blk
        self.s0 = s0
        self.level = engine.level(blk.obs, blk.scope)
        self.root = Rooted(self.level, engine.state_for(s0, blk.body))
        self.N = Nondeterminized(self.root, engine.budget)
        self.P = Projected(self.N, blk.props)
        if blk.obs == blk.parent_obs:
            self.raw = self.P
        else:
            self.raw = Narrowed(self.P, blk.obs, blk.parent_obs,
                                restrict=engine.restrictor(blk.obs, blk.parent_obs))
        if engine.reduce:
            self.W = Reduced(self.raw, engine.budget)
        else:
            self.W = self.raw
        self.initial = self.W.initial

    def rep(self, d):
        return self.W.rep[d] if self.W is not self.raw else d

    def cls(self, d):
        return self.W.cls[d] if self.W is not self.raw else d

    def unreduce(self, q, letter, clause):
        """Clause of ``raw`` at raw state q behind a clause of ``W`` at cls(q)."""
        if self.W is self.raw:
            return clause
        return self.W.explain_at(q, letter, clause)


class DeterministicPath:
    """Lazily determinized automaton for a path formula (Safra states).

    Universal path threads run this automaton, so a tree node carries at
    most one copy per universal path obligation.
    """

    def __init__(self, nbw, budget):
        self.nbw = nbw
        self.safra = SafraConstruction(nbw.initial, nbw.delta, nbw.accepting,
                                       budget, "path determinization")
        self.initial = (self.safra.initial,)

    def delta(self, q, word):
        return (self.safra.step(q, frozenset(word)),)

    def priority(self, q):
        return q[1]

    @staticmethod
    def dead(q):
        return not q[0]


def _literals(f, acc):
    if f[0] in ("ap", "nap"):
        acc.add((f[0], f[1]))
        return acc
    for x in f[1:]:
        if isinstance(x, tuple):
            _literals(x, acc)
    return acc


class PathInfo:
    def __init__(self, nbw, formula):
        atoms = nnf_atoms(formula)
        self.nbw = nbw
        self.model_atoms = frozenset(a for a in atoms if a[0] not in (PROP_PREFIX, "#"))
        self.props = frozenset(a for a in atoms if a.startswith(PROP_PREFIX))
        self.cx = tuple(sorted(int(a[1:]) for a in atoms if a.startswith("#")))
        lits = _literals(formula, set())
        # +1: the state subformula only occurs positively, -1: only negatively
        self.polarity = tuple((("ap", f"#{c}") in lits) - (("nap", f"#{c}") in lits)
                              if not (("ap", f"#{c}") in lits and ("nap", f"#{c}") in lits)
                              else 0 for c in self.cx)


class Engine:
    """One query: model, formula, shared budget and all lazily built automata."""

    def __init__(self, model, formula, budget=None, reduce=True):
        self.model = model
        self.reduce = reduce
        self.budget = budget if budget is not None else Budget(ENGINE_CAP)
        self.states = list(model.states)
        self.index = {s: i for i, s in enumerate(self.states)}
        self.labels = [model.labels[s] for s in self.states]
        self.succ = [tuple(self.index[t] for t in model.successors(s)) for s in self.states]
        self.compiler = Compiler(model.ncomponents)
        self.top = self.compiler.compile(formula)
        self._dirs = {}
        self._levels = {}
        self._chains = {}
        self._nbw = {}
        self._info = {}
        self._expand = {}
        self._restrict = {}

    # -- directions

    def dirs(self, obs):
        """(per-state direction id, list of projection tuples) at ``obs``."""
        hit = self._dirs.get(obs)
        if hit is None:
            ids, values, table = [], [], {}
            for s in self.states:
                v = self.model.project(s, obs)
                if v not in table:
                    table[v] = len(values)
                    values.append(v)
                ids.append(table[v])
            hit = (ids, values, table)
            self._dirs[obs] = hit
        return hit

    def restrictor(self, obs, kept):
        key = (obs, kept)
        hit = self._restrict.get(key)
        if hit is None:
            wide = self.dirs(obs)[0]
            narrow = self.dirs(kept)[0]
            table = {}
            for i in range(len(self.states)):
                table[wide[i]] = narrow[i]
            hit = table.__getitem__
            self._restrict[key] = hit
        return hit

    # -- components

    def level(self, obs, basis):
        key = (obs, frozenset(basis))
        hit = self._levels.get(key)
        if hit is None:
            hit = Level(self, obs, basis)
            self._levels[key] = hit
        return hit

    def chain(self, bid, s0):
        key = (bid, s0)
        hit = self._chains.get(key)
        if hit is None:
            hit = Chain(self, self.compiler.blocks[bid], s0)
            self._chains[key] = hit
        return hit

    def nbw(self, pid, kind):
        key = (pid, kind)
        hit = self._nbw.get(key)
        if hit is None:
            f = self.compiler.paths[pid]
            hit = BuchiWordAutomaton(f, budget=self.budget)
            if kind == "A":
                hit = DeterministicPath(hit, self.budget)
            self._nbw[key] = hit
            self._info[key] = PathInfo(hit, f)
        return hit

    def info(self, pid, kind):
        self.nbw(pid, kind)
        return self._info[(pid, kind)]

    def state_for(self, s, f):
        if f[0] in ("blk", "dual"):
            return ("N" if f[0] == "blk" else "D", f[1], s, self.chain(f[1], s).initial)
        return ("sf", s, f)

    # -- transitions

    def block_delta(self, bid, s0, d, letter, tag):
        w = self.chain(bid, s0).W
        f = w.delta(d, letter & w.basis)
        return pbf.map_atoms(f, lambda a: (a[0], (tag, bid, s0, a[1])))

    def expand(self, level, f, s, letter):
        key = (level.obs, f, s, letter)
        hit = self._expand.get(key)
        if hit is not None:
            return hit
        k = f[0]
        if k == "tt":
            out = pbf.TRUE
        elif k == "ff":
            out = pbf.FALSE
        elif k in ("ap", "nap"):
            x = f[1]
            val = (x in letter) if x.startswith(PROP_PREFIX) else (x in self.labels[s])
            out = pbf.TRUE if val == (k == "ap") else pbf.FALSE
        elif k == "and":
            out = pbf.conj(self.expand(level, f[1], s, letter),
                           self.expand(level, f[2], s, letter))
        elif k == "or":
            out = pbf.disj(self.expand(level, f[1], s, letter),
                           self.expand(level, f[2], s, letter))
        elif k in ("E", "A"):
            b = self.nbw(f[1], k)
            parts = [self.thread(level, (k, s, f[1], q0), letter) for q0 in b.initial]
            out = pbf.disj_all(parts) if k == "E" else pbf.conj_all(parts)
        elif k == "blk":
            out = self.block_delta(f[1], s, self.chain(f[1], s).initial, letter, "N")
        elif k == "dual":
            out = pbf.dual(self.block_delta(f[1], s, self.chain(f[1], s).initial, letter, "D"))
        else:
            raise ValueError(k)
        self._expand[key] = out
        return out

    def _condition(self, level, cx, minterms, s, letter):
        """Formula saying that the complex atoms take values in ``minterms``."""
        parts = []
        for cube in cube_cover(len(cx), minterms):
            lits = []
            for i, val in cube:
                sf = self.compiler.cx[cx[i]]
                if not val:
                    sf = negate_state(sf, self.compiler)
                lits.append(self.expand(level, sf, s, letter))
            parts.append(pbf.conj_all(lits))
        return pbf.disj_all(parts)

    def thread(self, level, q, letter):
        kind, s, pid, nq = q
        info = self.info(pid, kind)
        if all(info.polarity):
            return self._monotone_thread(level, q, letter, info)
        base = (info.model_atoms & self.labels[s]) | (info.props & letter)
        cx = info.cx
        groups = {}
        for bits in product((False, True), repeat=len(cx)):
            word = base | {f"#{cx[i]}" for i, b in enumerate(bits) if b}
            nxt = frozenset(info.nbw.delta(nq, word))
            groups.setdefault(nxt, []).append(bits)
        ids = self.dirs(level.obs)[0]
        allbits = set(product((False, True), repeat=len(cx)))
        parts = []
        for nxt, minterms in sorted(groups.items(), key=lambda kv: repr(sorted(kv[0]))):
            moves = [pbf.atom(ids[t], (kind, t, pid, q2))
                     for q2 in sorted(nxt, key=repr) for t in self.succ[s]]
            if kind == "E":
                if not moves:
                    continue
                parts.append(pbf.conj(self._condition(level, cx, minterms, s, letter),
                                      pbf.disj_all(moves)))
            else:
                rest = allbits - set(minterms)
                if all(DeterministicPath.dead(q2) for q2 in nxt):
                    # the path formula is already violated on this branch
                    parts.append(self._condition(level, cx, rest, s, letter))
                    continue
                parts.append(pbf.disj(pbf.conj_all(moves),
                                      self._condition(level, cx, rest, s, letter)))
        return pbf.disj_all(parts) if kind == "E" else pbf.conj_all(parts)

    def _monotone_thread(self, level, q, letter, info):
        """Thread whose state subformulas each occur with a single polarity.

        The thread guesses values for them and only proves the guesses that
        help: a positive subformula guessed true, a negative one guessed
        false.  The language of the path formula is monotone in such values,
        so a weaker guess never makes a rejected path accepted, and guessing
        the actual values is always possible.  No dual chains are needed.
        """
        kind, s, pid, nq = q
        base = (info.model_atoms & self.labels[s]) | (info.props & letter)
        cx = info.cx
        ids = self.dirs(level.obs)[0]
        parts = []
        for bits in product((False, True), repeat=len(cx)):
            word = base | {f"#{cx[i]}" for i, b in enumerate(bits) if b}
            nxt = sorted(info.nbw.delta(nq, word), key=repr)
            if kind == "A" and all(DeterministicPath.dead(q2) for q2 in nxt):
                continue
            lits = []
            for i, b in enumerate(bits):
                sf = self.compiler.cx[cx[i]]
                if b and info.polarity[i] > 0:
                    lits.append(self.expand(level, sf, s, letter))
                elif not b and info.polarity[i] < 0:
                    lits.append(self.expand(level, negate_state(sf, self.compiler), s, letter))
            moves = [pbf.atom(ids[t], (kind, t, pid, q2)) for q2 in nxt for t in self.succ[s]]
            if kind == "E":
                if moves:
                    parts.append(pbf.conj(pbf.conj_all(lits), pbf.disj_all(moves)))
            else:
                parts.append(pbf.conj(pbf.conj_all(lits), pbf.conj_all(moves)))
        return pbf.disj_all(parts)

    # -- decision

    def run(self, s):
        s = self.index[s]
        top = Rooted(self.level((), frozenset()), self.state_for(s, self.top))
        game, root = acceptance_game(top, self.budget)
        sol = parity_solve(game)
        return EngineRun(self, top, game, sol, root in sol.win[0], s)


def acceptance_game(a, budget, name="acceptance game"):
    """Parity game of an automaton over the one-branch tree with empty letters."""
    game = ParityGame()
    game.add_vertex("TOP", 0, 0)
    game.add_edge("TOP", "TOP")
    game.add_vertex("BOT", 0, 1)
    game.add_edge("BOT", "BOT")
    root = ("q", a.initial)
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
        f = a.delta(q, frozenset())
        if not f:
            game.add_edge(v, "BOT")
        for c in sorted(f, key=repr):
            cv = ("c", c)
            game.add_edge(v, cv)
            if cv in game.owner:
                continue
            game.add_vertex(cv, 1, None)
            clause_vertices.append(cv)
            if not c:
                game.add_edge(cv, "TOP")
            for _, q2 in c:
                game.add_edge(cv, ("q", q2))
                if q2 not in seen:
                    seen.add(q2)
                    stack.append(q2)
    for cv in clause_vertices:
        game.priority[cv] = top_prio + 2
    for v in game.owner:
        game.edges[v] = list(dict.fromkeys(game.edges[v]))
    compress_priorities(game)
    return game, root


class EngineRun:
    """Verdict plus everything needed to explain a true verdict."""

    def __init__(self, engine, top, game, solution, value, s):
        self.engine = engine
        self.top = top
        self.game = game
        self.solution = solution
        self.value = value
        self.state = s

    def __bool__(self):
        return self.value

    def top_clause(self, q):
        """Clause chosen by the winning strategy at top-level state q."""
        cv = self.solution.strategy[0].get(("q", q))
        if cv is None or cv[0] != "c":
            return None
        return cv[1]

    def dump(self, directory, limit=300):
        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, "top_game.txt"), "w") as fh:
            fh.write(self.game.dump())
        for (bid, s0), ch in sorted(self.engine._chains.items()):
            title = f"block {bid} at state {self.engine.model.name(self.engine.states[s0])}"
            with open(os.path.join(directory, f"block{bid}_s{s0}.txt"), "w") as fh:
                fh.write(dump_automaton(ch.W, title, limit=limit))

    def labelling(self):
        """Transducer for the propositions of the outermost block chain.

        Only defined when the top formula is a chain of nested blocks
        started at the query state (the shape produced for a single
        strategic quantifier).  Returns a BlockWitness.
        """
        return BlockWitness(self)


class BlockWitness:
    """Regular labelling read off a winning top-level strategy.

    Memory is a tuple with one unreduced nondeterministic state per block
    level (class representatives would forget nested obligations); the
    labelling at a node of the innermost level is read from the choices the
    automata recorded when they produced the clauses the strategy follows.
    """

    def __init__(self, run):
        eng = run.engine
        self.run = run
        self.engine = eng
        chain_ids = []
        f = eng.top
        while f[0] == "blk":
            chain_ids.append(f[1])
            f = eng.compiler.blocks[f[1]].body
        if not chain_ids or not run.value:
            raise ValueError("no block chain to explain")
        self.bids = chain_ids
        self.chains = [eng.chain(b, run.state) for b in chain_ids]
        self.blocks = [eng.compiler.blocks[b] for b in chain_ids]
        self.initial = tuple(ch.raw.initial for ch in self.chains)
        self._memo = {}

    def source_names(self):
        out = {}
        for blk in self.blocks:
            out.update(zip(blk.props, blk.names))
        return out

    def node(self, memory):
        """(letter, per-level wide clauses) at a node with this memory."""
        hit = self._memo.get(memory)
        if hit is not None:
            return hit
        eng = self.engine
        s0 = self.run.state
        tag0 = ("N", self.bids[0], s0, self.chains[0].cls(memory[0]))
        clause = self.run.top_clause(tag0)
        if clause is None:
            self._memo[memory] = None
            return None
        narrow = frozenset((x, q[3]) for x, q in clause)
        letter = frozenset()
        wides = []
        for i, ch in enumerate(self.chains):
            r = memory[i]
            sigma = letter & ch.W.basis
            raw = ch.unreduce(r, sigma, narrow)
            wide = raw
            if raw is not None and ch.raw is not ch.P:
                wide = ch.raw.explain(r, sigma, raw)
            if wide is None:
                self._memo[memory] = None
                return None
            full = ch.P.explain(r, sigma, wide)
            wides.append(wide)
            letter = full
            if i + 1 < len(self.chains):
                local = ch.N.explain(r, full, wide)
                nxt = ("N", self.bids[i + 1], s0, self.chains[i + 1].cls(memory[i + 1]))
                c = local.get(nxt) if local else None
                if c is None:
                    self._memo[memory] = None
                    return None
                narrow = frozenset((x, q[3]) for x, q in c)
        hit = (letter, tuple(wides))
        self._memo[memory] = hit
        return hit

    def letter(self, memory):
        hit = self.node(memory)
        return None if hit is None else hit[0]

    def step(self, memory, direction):
        """Memory at the child in ``direction`` (innermost-level direction id)."""
        hit = self.node(memory)
        if hit is None:
            return None
        eng = self.engine
        wides = hit[1]
        out = [None] * len(self.chains)
        x = direction
        for i in reversed(range(len(self.chains))):
            targets = [q for y, q in wides[i] if y == x]
            if not targets:
                return None
            out[i] = targets[0]
            blk = self.blocks[i]
            if i:
                x = eng.restrictor(blk.obs, blk.parent_obs)(x) if blk.obs != blk.parent_obs else x
        return tuple(out)


# ------------------------------------------------------------ public API


def run_qctl(model, state=None, formula=None, budget=None):
    if isinstance(model, EngineQuery):
        q = model
        model, state, formula = q.model, q.initial, q.formula
        if budget is None:
            budget = Budget(q.cap)
    if budget is None:
        budget = Budget(ENGINE_CAP)
    elif isinstance(budget, int):
        budget = Budget(budget)
    if state not in model.relation:
        raise ValueError(f"state {state!r} is not in the model")
    return Engine(model, formula, budget).run(state)


def mc_qctl(model, state=None, formula=None, budget=None):
    """Truth of a closed hierarchical QCTL*i formula at ``state``."""
    return run_qctl(model, state, formula, budget).value


def check_uniform_labeling(model, tree, p, obs):
    """Whether ``p`` is uniform on o-indistinguishable nodes of ``tree``.

    ``tree`` maps nodes (tuples of model states) to their label sets;
    ``obs=None`` means every component.
    """
    if obs is None:
        obs = range(1, model.ncomponents + 1)
    obs = sorted(obs)
    seen = {}
    for node, lab in tree.items():
        key = (len(node), tuple(model.project(s, obs) for s in node))
        val = p in lab
        if seen.setdefault(key, val) != val:
            return False
    return True


def unfolding(model, state, depth):
    """Nodes of the unfolding from ``state`` up to ``depth`` steps."""
    nodes = [(state,)]
    frontier = [(state,)]
    for _ in range(depth):
        nxt = []
        for n in frontier:
            for t in model.successors(n[-1]):
                nxt.append(n + (t,))
        nodes.extend(nxt)
        frontier = nxt
    return nodes


# ------------------------------------------------------------ CTL*


def mc_ctl_star(model, state, f):
    """Plain CTL* model checking by bottom-up labelling and Büchi products."""
    return state in CtlStar(model).sat(f)


class CtlStar:
    def __init__(self, model):
        self.model = model
        self.states = list(model.states)
        self._sat = {}

    def sat(self, f):
        hit = self._sat.get(f)
        if hit is not None:
            return hit
        k = f.kind
        all_states = frozenset(self.states)
        if k == "true":
            out = all_states
        elif k == "false":
            out = frozenset()
        elif k == "atom":
            out = frozenset(s for s in self.states if f.name in self.model.labels[s])
        elif k == "not":
            out = all_states - self.sat(f.args[0])
        elif k == "and":
            out = self.sat(f.args[0]) & self.sat(f.args[1])
        elif k == "or":
            out = self.sat(f.args[0]) | self.sat(f.args[1])
        elif k == "E":
            out = self.exists_path(f.args[0])
        elif k == "A":
            out = all_states - self.exists_path(logic.Not(f.args[0]))
        elif k in logic.TEMPORAL:
            raise NotClosed(f"temporal operator {k} outside a path quantifier")
        else:
            raise ValueError(f"{k} is not a CTL* connective")
        self._sat[f] = out
        return out

    def exists_path(self, psi):
        marks = {}

        def strip(g):
            if g.kind in ("E", "A"):
                name = f"#{len(marks)}"
                marks[name] = self.sat(g)
                return logic.Atom(name)
            if g.kind == "atom":
                return logic.Atom("@" + g.name)
            if not g.args:
                return g
            return logic.Formula(g.kind, tuple(strip(a) for a in g.args))

        from .automata.ltl import nnf
        nbw = BuchiWordAutomaton(nnf(strip(psi)))

        def word(s):
            w = {"@" + a for a in self.model.labels[s]}
            w |= {m for m, ss in marks.items() if s in ss}
            return frozenset(w)

        nodes = []
        index = {}
        edges = []
        stack = []
        for s in self.states:
            for q in nbw.initial:
                if (s, q) not in index:
                    index[(s, q)] = len(nodes)
                    nodes.append((s, q))
                    edges.append(None)
                    stack.append((s, q))
        while stack:
            s, q = stack.pop()
            i = index[(s, q)]
            out = []
            for q2 in nbw.delta(q, word(s)):
                for t in self.model.successors(s):
                    n = (t, q2)
                    j = index.get(n)
                    if j is None:
                        j = len(nodes)
                        index[n] = j
                        nodes.append(n)
                        edges.append(None)
                        stack.append(n)
                    out.append(j)
            edges[i] = out
        comp = scc(len(nodes), edges)
        size = {}
        for c in comp:
            size[c] = size.get(c, 0) + 1
        good = set()
        for i, (s, q) in enumerate(nodes):
            if nbw.accepting(q):
                c = comp[i]
                if size[c] > 1 or i in edges[i]:
                    good.add(c)
        alive = {i for i in range(len(nodes)) if comp[i] in good}
        preds = [[] for _ in nodes]
        for i, es in enumerate(edges):
            for j in es:
                preds[j].append(i)
        # nodes in a good component reach an accepting cycle
        good_nodes = set()
        for i in alive:
            good_nodes.add(i)
        stack = list(good_nodes)
        while stack:
            j = stack.pop()
            for i in preds[j]:
                if i not in good_nodes:
                    good_nodes.add(i)
                    stack.append(i)
        return frozenset(s for s in self.states
                         if any(index[(s, q)] in good_nodes for q in nbw.initial))


def scc(n, edges):
    """Iterative Tarjan; returns a component id per node."""
    index = [None] * n
    low = [0] * n
    on = [False] * n
    comp = [None] * n
    stack = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on[v] = True
            recurse = False
            es = edges[v]
            while i < len(es):
                w = es[i]
                i += 1
                if index[w] is None:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if on[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comp
