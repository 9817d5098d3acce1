"""Formula syntax trees for LTL, CTL*, ATL*i, ATL*sc,i and QCTL*i.

A single immutable node type `Formula` covers all logics.  The logic tag is
carried by the caller (``parse`` takes it and enforces which node kinds may
appear) rather than stored on every node, so that rewriting across logics
does not need to touch tags.

Text syntax (precedence: unary > U > and > or > ->)::

    atoms      win, p_v0, h_a
    boolean    not f, f and g, f or g, f -> g, true, false
    temporal   X f, F f, G f, f U g
    paths      E f, A f
    strategic  <<a,b>> f          (bind under the ATL*sc,i tag)
    release    unbind(a,b) f
    quantifier exists p obs {1,2} . f,  forall p obs {1} . f,  exists p . f

`->` and `forall` are sugar: they are expanded while parsing.
"""

from dataclasses import dataclass
import re

from .errors import LogicTagError, ParseError, StaleReference, UnknownAgent

LTL = "ltl"
CTLSTAR = "ctlstar"
ATLI = "atli"
ATLSCI = "atlsci"
QCTLI = "qctli"
LOGICS = (LTL, CTLSTAR, ATLI, ATLSCI, QCTLI)

TEMPORAL = frozenset({"X", "U", "F", "G"})
UNARY_TEMPORAL = frozenset({"X", "F", "G"})


@dataclass(frozen=True)
class Formula:
    """One syntax-tree node.

    kind is one of: true, false, atom, not, and, or, X, U, F, G, E, A,
    strat (<<A>> in ATL*i), bind (<<A>> in ATL*sc,i), release, exists.
    ``name`` holds the atom or quantified proposition, ``agents`` a sorted
    coalition and ``obs`` the observation set of a quantifier (None means
    every component).
    """

    kind: str
    args: tuple = ()
    name: str = None
    agents: tuple = None
    obs: frozenset = None

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"Formula({to_text(self)!r})"


TRUE = Formula("true")
FALSE = Formula("false")


def Atom(name):
    return Formula("atom", name=name)


def Not(f):
    return Formula("not", (f,))


def And(a, b):
    return Formula("and", (a, b))


def Or(a, b):
    return Formula("or", (a, b))


def Next(f):
    return Formula("X", (f,))


def Until(a, b):
    return Formula("U", (a, b))


def Finally(f):
    return Formula("F", (f,))


def Globally(f):
    return Formula("G", (f,))


def PathE(f):
    return Formula("E", (f,))


def PathA(f):
    return Formula("A", (f,))


def _coalition(agents):
    return tuple(sorted(set(agents)))


def Strat(agents, f):
    return Formula("strat", (f,), agents=_coalition(agents))


def Bind(agents, f):
    return Formula("bind", (f,), agents=_coalition(agents))


def Release(agents, f):
    return Formula("release", (f,), agents=_coalition(agents))


def Exists(prop, obs, f):
    return Formula("exists", (f,), name=prop,
                   obs=None if obs is None else frozenset(obs))


def Forall(prop, obs, f):
    return Not(Exists(prop, obs, Not(f)))


def Implies(a, b):
    return Or(Not(a), b)


def Iff(a, b):
    return And(Implies(a, b), Implies(b, a))


def conj(items):
    """Conjunction of an iterable, dropping `true`; empty gives TRUE."""
    items = [f for f in items if f != TRUE]
    if any(f == FALSE for f in items):
        return FALSE
    if not items:
        return TRUE
    out = items[-1]
    for f in reversed(items[:-1]):
        out = And(f, out)
    return out


def disj(items):
    items = [f for f in items if f != FALSE]
    if any(f == TRUE for f in items):
        return TRUE
    if not items:
        return FALSE
    out = items[-1]
    for f in reversed(items[:-1]):
        out = Or(f, out)
    return out


# ---------------------------------------------------------------- printing

_PREC = {"or": 1, "and": 2, "U": 3}


def _prec(f):
    if f.kind in _PREC:
        return _PREC[f.kind]
    if f.kind == "exists":
        return 0
    return 4


def _fmt_obs(obs):
    return "{" + ",".join(str(i) for i in sorted(obs)) + "}"


def to_text(f):
    """Render a formula in the parser's syntax."""
    k = f.kind
    if k in ("true", "false"):
        return k
    if k == "atom":
        return f.name
    if k == "exists":
        head = "exists " + f.name
        if f.obs is not None:
            head += " obs " + _fmt_obs(f.obs)
        return head + ". " + to_text(f.args[0])
    if k in _PREC:
        a, b = f.args
        p = _PREC[k]
        # or/and associate to the right; U is wrapped on both sides
        left = to_text(a)
        if _prec(a) <= p:
            left = "(" + left + ")"
        right = to_text(b)
        if _prec(b) < p or (_prec(b) == p and k == "U") or b.kind == "exists":
            right = "(" + right + ")"
        return f"{left} {k} {right}"
    if k == "not":
        head = "not "
    elif k in ("X", "F", "G", "E", "A"):
        head = k + " "
    elif k in ("strat", "bind"):
        head = "<<" + ",".join(f.agents) + ">> "
    elif k == "release":
        head = "unbind(" + ",".join(f.agents) + ") "
    else:
        raise ValueError(f"unknown node kind {k}")
    body = f.args[0]
    inner = to_text(body)
    if _prec(body) < 4:
        inner = "(" + inner + ")"
    return head + inner


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<op><->|->|<<|>>|[(),{}.])
  | (?P<num>\d+(?![A-Za-z_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)

_KEYWORDS = {"not", "and", "or", "X", "F", "G", "U", "E", "A", "true",
             "false", "exists", "forall", "obs", "unbind"}


def _tokenize(text):
    pos, line, col = 0, 1, 1
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        val = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind != "ws":
                if kind == "ident" and val in _KEYWORDS:
                    kind = "kw"
                out.append((kind, val, line, col))
            col += len(val)
        pos = m.end()
    out.append(("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, text, logic, universe):
        self.toks = _tokenize(text)
        self.i = 0
        self.logic = logic
        self.universe = None if universe is None else frozenset(universe)

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], tok[3])

    def expect(self, val):
        tok = self.next()
        if tok[1] != val or tok[0] == "eof":
            self.error(f"expected {val!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def at(self, val):
        tok = self.peek()
        return tok[0] in ("op", "kw") and tok[1] == val

    def tag_error(self, what, tok):
        raise LogicTagError(f"{what} not allowed in {self.logic} formulas",
                            tok[2], tok[3])

    def parse(self):
        f = self.implication()
        if self.peek()[0] != "eof":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return f

    def implication(self):
        left = self.disjunction()
        if self.at("->"):
            self.next()
            return Implies(left, self.implication())
        if self.at("<->"):
            self.next()
            return Iff(left, self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        if self.at("or"):
            self.next()
            return Or(left, self.disjunction())
        return left

    def conjunction(self):
        left = self.until()
        if self.at("and"):
            self.next()
            return And(left, self.conjunction())
        return left

    def until(self):
        left = self.unary()
        if self.at("U"):
            self.next()
            return Until(left, self.until())
        return left

    def agent_list(self, close):
        agents = []
        if self.at(close):
            return agents
        while True:
            tok = self.next()
            if tok[0] != "ident":
                self.error("expected agent name", tok)
            if self.universe is not None and tok[1] not in self.universe:
                raise UnknownAgent(f"unknown agent {tok[1]!r} (line {tok[2]}, column {tok[3]})")
            agents.append(tok[1])
            if not self.at(","):
                return agents
            self.next()

    def unary(self):
        tok = self.peek()
        kind, val = tok[0], tok[1]
        lg = self.logic
        if kind == "ident":
            self.next()
            return Atom(val)
        if kind == "op" and val == "(":
            self.next()
            f = self.implication()
            self.expect(")")
            return f
        if kind == "kw":
            if val in ("true", "false"):
                self.next()
                return TRUE if val == "true" else FALSE
            if val == "not":
                self.next()
                return Not(self.unary())
            if val in ("X", "F", "G"):
                self.next()
                return Formula(val, (self.unary(),))
            if val in ("E", "A"):
                if lg in (LTL, ATLI, ATLSCI):
                    self.tag_error("path quantifier " + val, tok)
                self.next()
                return Formula(val, (self.unary(),))
            if val == "unbind":
                if lg != ATLSCI:
                    self.tag_error("release", tok)
                self.next()
                self.expect("(")
                agents = self.agent_list(")")
                self.expect(")")
                return Release(agents, self.unary())
            if val in ("exists", "forall"):
                if lg != QCTLI:
                    self.tag_error("propositional quantifier", tok)
                return self.quantifier()
        if kind == "op" and val == "<<":
            if lg not in (ATLI, ATLSCI):
                self.tag_error("strategic operator", tok)
            self.next()
            agents = self.agent_list(">>")
            self.expect(">>")
            body = self.unary()
            return Bind(agents, body) if lg == ATLSCI else Strat(agents, body)
        if kind == "eof":
            self.error("unexpected end of input")
        self.error(f"unexpected token {val!r}")

    def quantifier(self):
        which = self.next()[1]
        tok = self.next()
        if tok[0] != "ident":
            self.error("expected proposition name", tok)
        obs = None
        if self.at("obs"):
            self.next()
            self.expect("{")
            obs = set()
            if not self.at("}"):
                while True:
                    t = self.next()
                    if t[0] != "num" or int(t[1]) < 1:
                        self.error("expected positive component index", t)
                    obs.add(int(t[1]))
                    if not self.at(","):
                        break
                    self.next()
            self.expect("}")
        self.expect(".")
        body = self.implication()
        if which == "exists":
            return Exists(tok[1], obs, body)
        return Forall(tok[1], obs, body)


def parse(text, logic=ATLI, universe=None):
    """Parse ``text`` under ``logic``; ``universe`` restricts coalition names."""
    if logic not in LOGICS:
        raise ValueError(f"unknown logic {logic!r}")
    return _Parser(text, logic, universe).parse()


# ---------------------------------------------------------------- queries

def subformulas(f):
    """Pre-order walk yielding (path, node); paths index into ``args``."""
    stack = [((), f)]
    while stack:
        path, g = stack.pop()
        yield path, g
        for i in reversed(range(len(g.args))):
            stack.append((path + (i,), g.args[i]))


def kinds(f):
    return {g.kind for _, g in subformulas(f)}


def atoms(f):
    """Free atoms: names not bound by an enclosing quantifier."""
    out = set()

    def walk(g, bound):
        if g.kind == "atom":
            if g.name not in bound:
                out.add(g.name)
        elif g.kind == "exists":
            walk(g.args[0], bound | {g.name})
        else:
            for a in g.args:
                walk(a, bound)

    walk(f, frozenset())
    return out


def size(f):
    return sum(1 for _ in subformulas(f))


def temporal_depth(f):
    if f.kind in TEMPORAL:
        return 1 + max(temporal_depth(a) for a in f.args)
    return max((temporal_depth(a) for a in f.args), default=0)


def is_closed(f):
    """Every temporal node lies under a strategic/bind node or a path quantifier."""
    def walk(g, guarded):
        if g.kind in TEMPORAL and not guarded:
            return False
        if g.kind in ("strat", "bind", "E", "A"):
            guarded = True
        elif g.kind == "exists":
            # a quantifier starts a new state formula
            guarded = False
        return all(walk(a, guarded) for a in g.args)

    return walk(f, False)


def is_state_formula(f):
    """Closed and built only from state-level connectives at the top."""
    return is_closed(f)


def get(f, path):
    for i in path:
        if i >= len(f.args):
            raise StaleReference(f"path {path} not valid")
        f = f.args[i]
    return f


def count_strategic(f):
    return sum(1 for _, g in subformulas(f) if g.kind in ("strat", "bind"))


def innermost_strategic(f):
    """Paths of strategic nodes whose bodies contain no strategic node."""
    out = []
    for path, g in subformulas(f):
        if g.kind in ("strat", "bind") and count_strategic(g.args[0]) == 0:
            out.append(path)
    return out


def replace(f, path, new):
    if not path:
        return new
    i = path[0]
    if i >= len(f.args):
        raise StaleReference(f"path {path} not valid")
    args = list(f.args)
    args[i] = replace(args[i], path[1:], new)
    return Formula(f.kind, tuple(args), f.name, f.agents, f.obs)


def substitute_atom(f, target, fresh, expect=None):
    """Replace the subtree at path ``target`` by the atom ``fresh``.

    When ``expect`` is given, the subtree currently at ``target`` must equal
    it; otherwise StaleReference is raised.
    """
    node = get(f, target)
    if expect is not None and node != expect:
        raise StaleReference(f"subformula at {target} changed")
    return replace(f, target, Atom(fresh))


def map_atoms(f, fn):
    if f.kind == "atom":
        return fn(f)
    if not f.args:
        return f
    return Formula(f.kind, tuple(map_atoms(a, fn) for a in f.args),
                   f.name, f.agents, f.obs)


def rename_atoms(f, mapping):
    return map_atoms(f, lambda a: Atom(mapping.get(a.name, a.name)))
