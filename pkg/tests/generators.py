"""Seeded random instances shared by the property and acceptance tests."""

import random
from itertools import product

from stratmc import logic
from stratmc.cgs import GameStructure
from stratmc.hierarchy import formula_hierarchical_in

ATOMS = ("p", "q")


def random_partition(rng, items):
    items = list(items)
    rng.shuffle(items)
    blocks = []
    for x in items:
        if blocks and rng.random() < 0.5:
            rng.choice(blocks).append(x)
        else:
            blocks.append([x])
    return blocks


def coarsen(rng, blocks):
    blocks = [list(b) for b in blocks]
    while len(blocks) > 1 and rng.random() < 0.6:
        i, j = rng.sample(range(len(blocks)), 2)
        blocks[i] += blocks[j]
        del blocks[j]
    return blocks


def random_game(rng, npos=None, nagents=None, hierarchical=True, deterministic=True,
                sinks=True):
    npos = npos or rng.randint(2, 5)
    nagents = nagents or rng.randint(2, 3)
    positions = [f"v{i}" for i in range(npos)]
    agents = [chr(ord("a") + i) for i in range(nagents)]
    moves = ("0", "1")
    sink = set()
    if sinks:
        sink = {v for v in positions[1:] if rng.random() < 0.3}
    trans = {}
    for v in positions:
        for c in product(moves, repeat=nagents):
            if v in sink:
                trans[(v, c)] = v if deterministic else frozenset({v})
            elif deterministic:
                trans[(v, c)] = rng.choice(positions)
            else:
                trans[(v, c)] = frozenset(rng.sample(positions, rng.randint(1, 2)))
    labels = {v: {a for a in ATOMS if rng.random() < 0.4} for v in positions}
    if hierarchical:
        blocks = random_partition(rng, positions)
        order = list(agents)
        rng.shuffle(order)
        obs = {}
        for a in reversed(order):
            obs[a] = blocks
            blocks = coarsen(rng, blocks)
    else:
        obs = {a: random_partition(rng, positions) for a in agents}
    return GameStructure(agents, moves, positions, trans, labels, obs,
                         deterministic=deterministic, init=positions[0])


def random_ltl(rng, depth, atoms=ATOMS):
    """Random LTL formula of temporal depth at most ``depth``."""
    if depth == 0 or rng.random() < 0.25:
        a = logic.Atom(rng.choice(atoms))
        return logic.Not(a) if rng.random() < 0.3 else a
    op = rng.choice(["X", "F", "G", "U", "and", "or", "not"])
    if op in ("X", "F", "G"):
        return logic.Formula(op, (random_ltl(rng, depth - 1, atoms),))
    if op == "U":
        return logic.Until(random_ltl(rng, depth - 1, atoms), random_ltl(rng, depth - 1, atoms))
    if op == "not":
        return logic.Not(random_ltl(rng, depth, atoms))
    return logic.Formula(op, (random_ltl(rng, depth - 1, atoms), random_ltl(rng, depth - 1, atoms)))


def random_coalition(rng, agents):
    k = rng.randint(1, len(agents))
    return tuple(sorted(rng.sample(list(agents), k)))


def random_atlsc(rng, g, binds=2, depth=2, kind="bind"):
    """Random closed formula with at most ``binds`` strategic operators."""
    mk = logic.Bind if kind == "bind" else logic.Strat
    coal = random_coalition(rng, g.agents)
    if binds <= 1 or rng.random() < 0.4:
        return mk(coal, random_ltl(rng, depth))
    inner = mk(random_coalition(rng, g.agents), random_ltl(rng, max(depth - 1, 0)))
    if kind == "bind" and rng.random() < 0.2:
        inner = logic.Release(rng.sample(list(g.agents), 1), inner)
    op = rng.choice(["X", "F", "G", "and"])
    if op == "and":
        body = logic.And(inner, logic.Finally(logic.Atom(rng.choice(ATOMS))))
        body = logic.Next(body) if depth >= 1 else inner
    else:
        body = logic.Formula(op, (inner,))
    return mk(coal, body)


def hierarchical_atlsc(rng, g, **kw):
    for _ in range(100):
        f = random_atlsc(rng, g, **kw)
        if formula_hierarchical_in(g, f):
            return f
    return logic.Bind((g.agents[0],), logic.Finally(logic.Atom("p")))


def random_lasso(rng, atoms=ATOMS, maxlen=8):
    n = rng.randint(1, maxlen)
    k = rng.randint(1, n)
    letters = [frozenset(a for a in atoms if rng.random() < 0.5) for _ in range(n)]
    return letters[:n - k], letters[n - k:]


def rng_for(seed):
    return random.Random(seed)


def random_ctl_state(rng, atoms, depth):
    """Closed CTL* state formula: boolean combinations of E/A over LTL."""
    if depth == 0 or rng.random() < 0.3:
        q = rng.choice([logic.PathE, logic.PathA])
        return q(random_ltl(rng, rng.randint(1, 2), atoms))
    a = random_ctl_state(rng, atoms, depth - 1)
    if rng.random() < 0.3:
        return logic.Not(a)
    b = random_ctl_state(rng, atoms, depth - 1)
    return logic.Formula(rng.choice(["and", "or"]), (a, b))


def random_qctl(rng, ncomp, quantifiers=2, atoms=ATOMS):
    """Closed hierarchical QCTL*i formula with a chain of quantifiers."""
    obs = sorted(rng.sample(range(1, ncomp + 1), rng.randint(1, ncomp)))
    chain = []
    names = []
    for i in range(quantifiers):
        name = f"x{i}"
        chain.append((name, frozenset(obs)))
        names.append(name)
        extra = [c for c in range(1, ncomp + 1) if c not in obs]
        if extra and rng.random() < 0.5:
            obs = sorted(obs + [rng.choice(extra)])
    body = random_ctl_state(rng, tuple(atoms) + tuple(names), 1)
    for name, o in reversed(chain):
        body = logic.Exists(name, o, body)
        if rng.random() < 0.2:
            body = logic.Not(body)
    return body
