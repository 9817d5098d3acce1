"""LTL to nondeterministic Büchi word automata.

The construction is an on-the-fly tableau: a state is a set of pending
obligations (formulas in negation normal form that must hold from the next
letter on) plus a degeneralisation counter.  Transitions are computed per
letter and memoised, so only the relevant part of the automaton is ever
built.  Letters are frozensets of the atoms that are true.
"""

from itertools import chain, combinations

from ..errors import StratError
from .budget import Budget

TT = ("tt",)
FF = ("ff",)


class VocabularyMismatch(StratError):
    pass


def nnf(f, neg=False):
    """Convert a quantifier-free LTL Formula into tuple-encoded NNF.

    Node forms: ('tt',), ('ff',), ('ap', a), ('nap', a), ('and', x, y),
    ('or', x, y), ('X', x), ('U', x, y), ('R', x, y).
    """
    k = f.kind
    if k == "true":
        return FF if neg else TT
    if k == "false":
        return TT if neg else FF
    if k == "atom":
        return ("nap" if neg else "ap", f.name)
    if k == "not":
        return nnf(f.args[0], not neg)
    if k in ("and", "or"):
        a, b = nnf(f.args[0], neg), nnf(f.args[1], neg)
        op = k if not neg else ("or" if k == "and" else "and")
        return mk(op, a, b)
    if k == "X":
        return ("X", nnf(f.args[0], neg))
    if k == "F":
        inner = nnf(f.args[0], neg)
        return ("R", FF, inner) if neg else ("U", TT, inner)
    if k == "G":
        inner = nnf(f.args[0], neg)
        return ("U", TT, inner) if neg else ("R", FF, inner)
    if k == "U":
        a, b = nnf(f.args[0], neg), nnf(f.args[1], neg)
        return ("R", a, b) if neg else ("U", a, b)
    raise VocabularyMismatch(f"{k} is not an LTL connective")


def mk(op, a, b):
    if op == "and":
        if a == FF or b == FF:
            return FF
        if a == TT:
            return b
        if b == TT:
            return a
    else:
        if a == TT or b == TT:
            return TT
        if a == FF:
            return b
        if b == FF:
            return a
    if a == b:
        return a
    return (op, a, b)


def negate_nnf(f):
    k = f[0]
    if k == "tt":
        return FF
    if k == "ff":
        return TT
    if k == "ap":
        return ("nap", f[1])
    if k == "nap":
        return ("ap", f[1])
    if k == "and":
        return mk("or", negate_nnf(f[1]), negate_nnf(f[2]))
    if k == "or":
        return mk("and", negate_nnf(f[1]), negate_nnf(f[2]))
    if k == "X":
        return ("X", negate_nnf(f[1]))
    if k == "U":
        return ("R", negate_nnf(f[1]), negate_nnf(f[2]))
    if k == "R":
        return ("U", negate_nnf(f[1]), negate_nnf(f[2]))
    raise ValueError(k)


def nnf_atoms(f):
    if f[0] in ("ap", "nap"):
        return {f[1]}
    out = set()
    for x in f[1:]:
        if isinstance(x, tuple):
            out |= nnf_atoms(x)
    return out


def _subformulas(f, acc):
    if f in acc:
        return
    acc.add(f)
    for x in f[1:]:
        if isinstance(x, tuple):
            _subformulas(x, acc)


def _prop_value(f, letter, temporal):
    """Truth of a propositional NNF formula, or None when it is temporal."""
    if f in temporal:
        return None
    k = f[0]
    if k == "tt":
        return True
    if k == "ff":
        return False
    if k == "ap":
        return f[1] in letter
    if k == "nap":
        return f[1] not in letter
    a = _prop_value(f[1], letter, temporal)
    b = _prop_value(f[2], letter, temporal)
    return (a and b) if k == "and" else (a or b)


class BuchiWordAutomaton:
    """Lazily explored NBW for an NNF formula.

    States are triples (obligations, counter, accepting-flag).  The
    alphabet is the powerset of ``atoms``; extra atoms in a letter are
    ignored.
    """

    def __init__(self, formula, atoms=None, budget=None):
        self.formula = formula
        used = nnf_atoms(formula)
        if atoms is not None:
            atoms = frozenset(atoms)
            if not used <= atoms:
                raise VocabularyMismatch(
                    f"atoms {sorted(used - atoms)} missing from vocabulary")
        self.atoms = frozenset(used if atoms is None else atoms)
        self._used = frozenset(used)
        subs = set()
        _subformulas(formula, subs)
        self._temporal = set()
        for g in sorted(subs, key=_depth):
            if g[0] in ("X", "U", "R") or any(
                    isinstance(x, tuple) and x in self._temporal for x in g[1:]):
                self._temporal.add(g)
        self.untils = sorted((g for g in subs if g[0] == "U"), key=repr)
        self.budget = budget or Budget(None)
        start = frozenset() if formula == TT else frozenset({formula})
        if formula == FF:
            self.initial = []
        else:
            self.initial = [(start, 0, not self.untils)]
        self._delta = {}
        self._expand_memo = {}

    def accepting(self, q):
        return q[2]

    def _expand(self, obligations, letter):
        key = (obligations, letter)
        hit = self._expand_memo.get(key)
        if hit is not None:
            return hit
        temporal = self._temporal
        results = []

        def pv(f):
            return _prop_value(f, letter, temporal)

        def go(todo, nxt, post):
            while todo:
                f, todo = todo[0], todo[1:]
                k = f[0]
                if k == "tt":
                    continue
                if k == "ff":
                    return
                if k == "ap":
                    if f[1] in letter:
                        continue
                    return
                if k == "nap":
                    if f[1] not in letter:
                        continue
                    return
                if k == "and":
                    todo = (f[1], f[2]) + todo
                    continue
                if k == "X":
                    nxt = nxt | {f[1]} if f[1] != TT else nxt
                    continue
                if k == "or":
                    va, vb = pv(f[1]), pv(f[2])
                    if va or vb:
                        continue
                    if va is False and vb is False:
                        return
                    if va is False:
                        todo = (f[2],) + todo
                        continue
                    if vb is False:
                        todo = (f[1],) + todo
                        continue
                    go((f[1],) + todo, nxt, post)
                    go((f[2],) + todo, nxt, post)
                    return
                if k == "U":
                    vb = pv(f[2])
                    if vb:
                        continue
                    if vb is False:
                        todo = (f[1],) + todo
                        nxt = nxt | {f}
                        post = post | {f}
                        continue
                    go((f[2],) + todo, nxt, post)
                    go((f[1],) + todo, nxt | {f}, post | {f})
                    return
                if k == "R":
                    va = pv(f[1])
                    if va:
                        todo = (f[2],) + todo
                        continue
                    if va is False:
                        todo = (f[2],) + todo
                        nxt = nxt | {f}
                        continue
                    go((f[1], f[2]) + todo, nxt, post)
                    go((f[2],) + todo, nxt | {f}, post)
                    return
                raise ValueError(k)
            results.append((nxt, post))

        go(tuple(sorted(obligations, key=repr)), frozenset(), frozenset())
        uniq = sorted(set(results), key=lambda r: (len(r[0]) + len(r[1]), repr(r)))
        kept = []
        for n, p in uniq:
            if not any(n2 <= n and p2 <= p for n2, p2 in kept):
                kept.append((n, p))
        self._expand_memo[key] = kept
        return kept

    def delta(self, q, letter):
        letter = frozenset(letter) & self._used
        key = (q, letter)
        hit = self._delta.get(key)
        if hit is not None:
            return hit
        obligations, i, _ = q
        k = len(self.untils)
        out = []
        for nxt, post in self._expand(obligations, letter):
            if k == 0:
                out.append((nxt, 0, True))
                continue
            j = i
            while j < k and self.untils[j] not in post:
                j += 1
            if j == k:
                out.append((nxt, 0, True))
            else:
                out.append((nxt, j, False))
        out = tuple(dict.fromkeys(out))
        self.budget.tick("ltl_to_nbw", 1)
        self._delta[key] = out
        return out

    def letters(self):
        return all_letters(self.atoms)

    def explore(self, alphabet=None):
        """Reachable states and transitions over ``alphabet``."""
        alphabet = list(self.letters() if alphabet is None else alphabet)
        states = list(dict.fromkeys(self.initial))
        seen = set(states)
        trans = {}
        i = 0
        while i < len(states):
            q = states[i]
            i += 1
            for a in alphabet:
                succ = self.delta(q, a)
                trans[(q, a)] = succ
                for r in succ:
                    if r not in seen:
                        seen.add(r)
                        states.append(r)
        return states, trans

    def is_empty(self, alphabet=None):
        states, trans = self.explore(alphabet)
        alphabet = list(self.letters() if alphabet is None else alphabet)
        graph = {q: set() for q in states}
        for (q, _), succ in trans.items():
            graph[q].update(succ)
        return not any(self.accepting(q) and _on_cycle(graph, q) for q in states)


def _depth(f):
    return 1 + max((_depth(x) for x in f[1:] if isinstance(x, tuple)), default=0)


def _on_cycle(graph, q):
    stack = list(graph[q])
    seen = set()
    while stack:
        r = stack.pop()
        if r == q:
            return True
        if r in seen:
            continue
        seen.add(r)
        stack.extend(graph[r])
    return False


def all_letters(atoms):
    atoms = sorted(atoms)
    return [frozenset(c) for c in chain.from_iterable(
        combinations(atoms, r) for r in range(len(atoms) + 1))]


def ltl_to_nbw(f, atoms=None, budget=None):
    """NBW for a quantifier-free LTL Formula (or an NNF tuple)."""
    if not isinstance(f, tuple):
        f = nnf(f)
    return BuchiWordAutomaton(f, atoms, budget)


def nbw_accepts_lasso(nbw, prefix, cycle):
    """Exact membership of prefix.cycle^omega."""
    word = list(prefix) + list(cycle)
    n, start = len(word), len(prefix)

    def nxt(i):
        return i + 1 if i + 1 < n else start

    nodes = [(0, q) for q in nbw.initial]
    seen = set(nodes)
    graph = {}
    stack = list(nodes)
    while stack:
        i, q = stack.pop()
        succ = [(nxt(i), r) for r in nbw.delta(q, word[i])]
        graph[(i, q)] = succ
        for s in succ:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    for node in seen:
        i, q = node
        if i >= start and nbw.accepting(q) and _on_cycle(graph, node):
            return True
    return False


def eval_lasso(f, prefix, cycle):
    """Two-valued LTL truth of a Formula on prefix.cycle^omega."""
    word = list(prefix) + list(cycle)
    n, start = len(word), len(prefix)
    memo = {}

    def nxt(i):
        return i + 1 if i + 1 < n else start

    def val(g):
        if g in memo:
            return memo[g]
        k = g.kind
        if k == "true":
            out = [True] * n
        elif k == "false":
            out = [False] * n
        elif k == "atom":
            out = [g.name in word[i] for i in range(n)]
        elif k == "not":
            out = [not x for x in val(g.args[0])]
        elif k == "and":
            a, b = val(g.args[0]), val(g.args[1])
            out = [x and y for x, y in zip(a, b)]
        elif k == "or":
            a, b = val(g.args[0]), val(g.args[1])
            out = [x or y for x, y in zip(a, b)]
        elif k == "X":
            a = val(g.args[0])
            out = [a[nxt(i)] for i in range(n)]
        elif k in ("U", "F", "G"):
            if k == "U":
                a, b = val(g.args[0]), val(g.args[1])
            elif k == "F":
                a, b = [True] * n, val(g.args[0])
            else:
                a, b = val(g.args[0]), [False] * n
            # least fixpoint for U; G is the dual greatest fixpoint
            if k == "G":
                out = [True] * n
                changed = True
                while changed:
                    changed = False
                    for i in reversed(range(n)):
                        v = a[i] and out[nxt(i)]
                        if v != out[i]:
                            out[i] = v
                            changed = True
            else:
                out = [False] * n
                changed = True
                while changed:
                    changed = False
                    for i in reversed(range(n)):
                        v = b[i] or (a[i] and out[nxt(i)])
                        if v != out[i]:
                            out[i] = v
                            changed = True
        else:
            raise VocabularyMismatch(f"{k} is not an LTL connective")
        memo[g] = out
        return out

    return val(f)[0]
