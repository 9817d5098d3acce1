"""Parity games (min-parity: player 0 wins when the least priority seen
infinitely often is even) and Zielonka's recursive solver."""

import sys
import threading


class ParityGame:
    def __init__(self, owner=None, priority=None, edges=None):
        self.owner = dict(owner or {})
        self.priority = dict(priority or {})
        self.edges = {v: list(es) for v, es in (edges or {}).items()}

    def add_vertex(self, v, owner, priority):
        self.owner[v] = owner
        self.priority[v] = priority
        self.edges.setdefault(v, [])

    def add_edge(self, u, v):
        self.edges[u].append(v)

    @property
    def vertices(self):
        return list(self.owner)

    def validate(self):
        for v in self.owner:
            if not self.edges.get(v):
                raise ValueError(f"vertex {v!r} has no successor")
            for w in self.edges[v]:
                if w not in self.owner:
                    raise ValueError(f"edge to unknown vertex {w!r}")

    def dump(self):
        lines = [f"parity game: {len(self.owner)} vertices"]
        for v in sorted(self.owner, key=repr):
            succ = " ".join(sorted(map(repr, self.edges[v])))
            lines.append(f"{v!r} owner={self.owner[v]} prio={self.priority[v]} -> {succ}")
        return "\n".join(lines) + "\n"


class Solution:
    def __init__(self, win0, win1, strategy0, strategy1):
        self.win = (win0, win1)
        self.strategy = (strategy0, strategy1)

    def winner(self, v):
        return 0 if v in self.win[0] else 1


def _attractor(game, preds, region, target, player):
    """Vertices in ``region`` from which ``player`` forces reaching ``target``.

    Returns the attractor and an attractor strategy for ``player``.
    """
    attr = set(target)
    strategy = {}
    count = {}
    queue = list(target)
    while queue:
        v = queue.pop()
        for u in preds.get(v, ()):
            if u not in region or u in attr:
                continue
            if game.owner[u] == player:
                attr.add(u)
                strategy[u] = v
                queue.append(u)
            else:
                if u not in count:
                    count[u] = sum(1 for w in game.edges[u] if w in region)
                count[u] -= 1
                if count[u] == 0:
                    attr.add(u)
                    queue.append(u)
    return attr, strategy


def _zielonka(game, preds, region):
    if not region:
        return set(), set(), {}, {}
    p = min(game.priority[v] for v in region)
    i = p % 2
    top = {v for v in region if game.priority[v] == p}
    a, astrat = _attractor(game, preds, region, top, i)
    sub = region - a
    w = [None, None]
    s = [None, None]
    w[0], w[1], s[0], s[1] = _zielonka(game, preds, sub)
    if not w[1 - i]:
        win = set(region)
        strat = dict(s[i])
        strat.update(astrat)
        for v in top:
            if game.owner[v] == i:
                strat[v] = next(x for x in game.edges[v] if x in region)
        out = [None, None]
        st = [None, None]
        out[i], out[1 - i] = win, set()
        st[i], st[1 - i] = strat, {}
        return out[0], out[1], st[0], st[1]
    b, bstrat = _attractor(game, preds, region, w[1 - i], 1 - i)
    opp_strat = dict(s[1 - i])
    opp_strat.update(bstrat)
    w2 = [None, None]
    s2 = [None, None]
    w2[0], w2[1], s2[0], s2[1] = _zielonka(game, preds, region - b)
    win_opp = b | w2[1 - i]
    opp_strat.update(s2[1 - i])
    out = [None, None]
    st = [None, None]
    out[i], out[1 - i] = w2[i], win_opp
    st[i], st[1 - i] = dict(s2[i]), opp_strat
    return out[0], out[1], st[0], st[1]


def parity_solve(game):
    """Winning regions and positional strategies for both players."""
    game.validate()
    preds = {}
    for u, es in game.edges.items():
        for v in es:
            preds.setdefault(v, []).append(u)
    region = set(game.owner)
    if len(region) < 500:
        w0, w1, s0, s1 = _zielonka(game, preds, region)
    else:
        # the recursion can be as deep as the game is large
        result = []
        old_limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old_limit, 4 * len(region) + 1000))
        old_size = threading.stack_size(512 * 1024 * 1024)
        try:
            t = threading.Thread(
                target=lambda: result.append(_zielonka(game, preds, region)))
            t.start()
            t.join()
        finally:
            threading.stack_size(old_size)
            sys.setrecursionlimit(old_limit)
        if not result:
            raise RuntimeError("parity solver failed")
        w0, w1, s0, s1 = result[0]
    s0 = {v: x for v, x in s0.items() if v in w0 and game.owner[v] == 0}
    s1 = {v: x for v, x in s1.items() if v in w1 and game.owner[v] == 1}
    return Solution(w0, w1, s0, s1)


def compress_priorities(game):
    values = sorted(set(game.priority.values()))
    mapping = {}
    cur = -1
    for v in values:
        nxt = cur + 1
        if nxt % 2 != v % 2:
            nxt += 1
        mapping[v] = nxt
        cur = nxt
    game.priority = {v: mapping[p] for v, p in game.priority.items()}
    return game
