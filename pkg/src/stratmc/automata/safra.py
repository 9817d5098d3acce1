"""Safra trees with Piterman's compact naming: NBW -> DPW.

A tree is a tuple of ``(name, parent, label)`` triples sorted by name; the
root is named 1 and has parent 0.  Older siblings carry smaller names, so
sorting by name is also a valid pre-order tie-break.  Each step returns the
new tree and a priority (min-parity): ``2e`` when node e turned green,
``2f - 1`` when node f was removed or renamed, ``NEUTRAL`` otherwise.
"""

from .budget import Budget
from ..errors import StateBudgetExceeded

NEUTRAL = 2 ** 31 - 1


class SafraConstruction:
    """Determinize an NBW given by callbacks.

    ``succ(q, letter)`` returns an iterable of successors and
    ``accepting(q)`` the Büchi flag.  DPW states are pairs (tree, priority
    of the step that produced the tree).
    """

    def __init__(self, initial, succ, accepting, budget=None, name="nbw_to_dpw"):
        self.succ = succ
        self.accepting = accepting
        self.budget = budget or Budget()
        self.name = name
        label = frozenset(initial)
        tree = ((1, 0, label),) if label else ()
        self.initial = (tree, NEUTRAL)
        self._step = {}
        self._succ = {}
        self._seen = {tree}

    def priority(self, state):
        return state[1]

    def _successors(self, q, letter):
        key = (q, letter)
        hit = self._succ.get(key)
        if hit is None:
            hit = frozenset(self.succ(q, letter))
            self._succ[key] = hit
        return hit

    def step(self, state, letter):
        tree = state[0]
        key = (tree, letter)
        hit = self._step.get(key)
        if hit is not None:
            return hit
        hit = self._compute(tree, letter)
        if hit[0] not in self._seen:
            self._seen.add(hit[0])
            self.budget.tick(self.name)
        self._step[key] = hit
        return hit

    def _compute(self, tree, letter):
        if not tree:
            return ((), NEUTRAL)
        parent = {}
        label = {}
        children = {}
        for name, par, lab in tree:
            parent[name] = par
            label[name] = lab
            children.setdefault(name, [])
            if par:
                children[par].append(name)
        top = tree[-1][0]
        # 1. spawn children carrying accepting states
        for name, _, lab in tree:
            acc = frozenset(q for q in lab if self.accepting(q))
            if acc:
                top += 1
                parent[top] = name
                label[top] = acc
                children[top] = []
                children[name].append(top)
        # 2. successor sets
        for name in label:
            out = set()
            for q in label[name]:
                out |= self._successors(q, letter)
            label[name] = out
        # 3. horizontal merge: a state stays only in the oldest branch
        def visit(n, forbidden):
            label[n] -= forbidden
            local = set()
            for c in children[n]:
                visit(c, forbidden | local)
                local |= label[c]

        visit(1, frozenset())
        removed = []
        alive = set()
        # 4. drop empty nodes (their subtrees are empty as well)
        for n in sorted(label):
            if label[n] and (n == 1 or parent[n] in alive):
                alive.add(n)
            else:
                removed.append(n)
        green = []
        # 5. vertical merge
        for n in sorted(alive):
            if n not in alive:
                continue
            kids = [c for c in children[n] if c in alive]
            if kids and set().union(*(label[c] for c in kids)) == label[n]:
                green.append(n)
                stack = list(kids)
                while stack:
                    c = stack.pop()
                    if c in alive:
                        alive.discard(c)
                        removed.append(c)
                        stack.extend(children[c])
        prio = NEUTRAL
        if green:
            prio = min(prio, 2 * min(green))
        if removed:
            prio = min(prio, 2 * min(removed) - 1)
        if 1 not in alive:
            return ((), prio)
        order = sorted(alive)
        rename = {n: i + 1 for i, n in enumerate(order)}
        new = tuple((rename[n], rename.get(parent[n], 0), frozenset(label[n]))
                    for n in order)
        return (new, prio)


class ParityWordAutomaton:
    """Explicit DPW with state priorities (min-parity, even accepts)."""

    def __init__(self, states, initial, delta, priority, alphabet):
        self.states = states
        self.initial = initial
        self.delta = delta
        self.priority = priority
        self.alphabet = alphabet

    def step(self, q, letter):
        return self.delta[(q, letter)]

    def accepts_lasso(self, prefix, cycle):
        q = self.initial
        for a in prefix:
            q = self.step(q, a)
        seen = {}
        trace = []
        while (q, 0) not in seen:
            seen[(q, 0)] = len(trace)
            for a in cycle:
                trace.append(self.priority[q])
                q = self.step(q, a)
        start = seen[(q, 0)]
        return min(trace[start:]) % 2 == 0


def _compress(values):
    """Order- and parity-preserving relabelling onto small integers."""
    out = {}
    cur = -1
    for v in sorted(set(values)):
        nxt = cur + 1
        if nxt % 2 != v % 2:
            nxt += 1
        out[v] = nxt
        cur = nxt
    return out


def nbw_to_dpw(nbw, alphabet=None, cap=None, budget=None):
    """Explicit DPW equivalent to ``nbw`` over ``alphabet``.

    ``cap`` bounds the number of DPW states (default 10**6).
    """
    alphabet = list(nbw.letters() if alphabet is None else alphabet)
    budget = budget or Budget(cap if cap is not None else 10 ** 6)
    sc = SafraConstruction(nbw.initial, nbw.delta, nbw.accepting, budget)
    init = sc.initial
    states = [init]
    index = {init: 0}
    delta = {}
    i = 0
    while i < len(states):
        s = states[i]
        i += 1
        for a in alphabet:
            t = sc.step(s, a)
            if t not in index:
                index[t] = len(states)
                states.append(t)
                if budget.cap is not None and len(states) > budget.cap:
                    raise StateBudgetExceeded("nbw_to_dpw", budget.cap)
            delta[(index[s], a)] = index[t]
    # the initial priority is never repeated, so the initial state may be
    # merged with any reachable state carrying the same tree
    start = 0
    incoming = any(t == 0 for t in delta.values())
    if not incoming:
        for j, st in enumerate(states):
            if j and st[0] == init[0]:
                start = j
                break
    keep = _reachable(start, delta, alphabet)
    ren = {old: new for new, old in enumerate(sorted(keep, key=lambda k: (k != start, k)))}
    comp = _compress(states[k][1] for k in keep)
    return ParityWordAutomaton(
        list(range(len(ren))), 0,
        {(ren[s], a): ren[t] for (s, a), t in delta.items() if s in keep},
        {ren[k]: comp[states[k][1]] for k in keep},
        alphabet)


def _reachable(start, delta, alphabet):
    seen = {start}
    stack = [start]
    while stack:
        s = stack.pop()
        for a in alphabet:
            t = delta[(s, a)]
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return seen
