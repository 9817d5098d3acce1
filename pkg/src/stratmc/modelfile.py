"""Reader and writer for the line-oriented ``.cgs`` model format.

Example::

    agents: n a
    moves: h t
    init: v0
    positions:
      v0
      vH
      vT
      w {win}
      l
    obs n: identity
    obs a: {v0} {vH vT} {w} {l}
    trans:
      v0 (n=h) -> vH
      v0 (n=t) -> vT
      vH (a=h) -> w
      vH (a=t) -> l
      vT (a=t) -> w
      vT (a=h) -> l
      w _ -> w
      l _ -> l

Transition rules are tried top-down and the first rule whose guard matches
a joint move wins.  Agents missing from a guard, or assigned ``_``, match
any move.  A target written ``{v1 v2}`` lists several successors and makes
the structure nondeterministic.  Every (position, joint move) pair must be
covered.  ``obs`` accepts brace blocks or the keywords ``identity`` and
``blind``.  ``#`` starts a comment.
"""

import re

from .cgs import GameStructure
from .errors import ParseError

_HEADER = re.compile(r"^(agents|moves|init|positions|trans|obs\s+([A-Za-z_][\w']*))\s*:(.*)$")
_NAME = r"[A-Za-z0-9_][\w'.-]*"


def _split_sections(text):
    sections = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _HEADER.match(line)
        if m and not raw[:1].isspace():
            key = "obs" if m.group(1).startswith("obs") else m.group(1)
            sections.append([key, m.group(2), [(lineno, m.group(3).strip())]])
            continue
        if not sections or not raw[:1].isspace():
            raise ParseError(f"unexpected line {line.strip()!r}", lineno, 1)
        sections[-1][2].append((lineno, line.strip()))
    return sections


def _words(lines):
    out = []
    for lineno, content in lines:
        for w in re.split(r"[\s,]+", content):
            if w:
                out.append((lineno, w))
    return out


def _blocks(lines, what):
    """Parse ``{a b} {c}`` style groups; returns list of (lineno, [names])."""
    text = " ".join(c for _, c in lines if c)
    lineno = next((n for n, c in lines if c), lines[0][0])
    out = []
    pos = 0
    for m in re.finditer(r"\{([^{}]*)\}|(\S+)", text):
        if m.group(2):
            raise ParseError(f"expected brace block in {what}, found {m.group(2)!r}",
                             lineno, m.start() + 1)
        names = [w for w in re.split(r"[\s,]+", m.group(1)) if w]
        out.append(names)
        pos = m.end()
    return lineno, out


def _parse_guard(text, agents, lineno):
    text = text.strip()
    if text == "_" or text == "()":
        return {}
    if not (text.startswith("(") and text.endswith(")")):
        raise ParseError(f"bad guard {text!r}", lineno, 1)
    guard = {}
    for item in text[1:-1].split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ParseError(f"bad guard item {item!r}", lineno, 1)
        a, m = (s.strip() for s in item.split("=", 1))
        if a not in agents:
            raise ParseError(f"unknown agent {a!r} in guard", lineno, 1)
        if m != "_":
            guard[a] = m
    return guard


_RULE = re.compile(r"^(\S+)\s+(_|\([^)]*\))\s*->\s*(.+)$")


def parse_model(text):
    """Parse ``.cgs`` text into a GameStructure."""
    sections = _split_sections(text)
    found = {}
    obs_sections = []
    for key, arg, lines in sections:
        if key == "obs":
            obs_sections.append((arg, lines))
        else:
            if key in found:
                raise ParseError(f"duplicate section {key}", lines[0][0], 1)
            found[key] = lines
    for key in ("agents", "moves", "positions", "trans"):
        if key not in found:
            raise ParseError(f"missing section {key}:", 1, 1)
    agents = [w for _, w in _words(found["agents"])]
    moves = [w for _, w in _words(found["moves"])]
    if not moves:
        raise ParseError("no moves declared", found["moves"][0][0], 1)

    positions, labels = [], {}
    for lineno, content in found["positions"]:
        for m in re.finditer(r"(" + _NAME + r")\s*(\{[^}]*\})?", content):
            name = m.group(1)
            if name in labels:
                raise ParseError(f"duplicate position {name!r}", lineno, m.start() + 1)
            positions.append(name)
            atoms = m.group(2)[1:-1] if m.group(2) else ""
            labels[name] = {w for w in re.split(r"[\s,]+", atoms) if w}
    if not positions:
        raise ParseError("no positions declared", found["positions"][0][0], 1)

    init = positions[0]
    if "init" in found:
        words = _words(found["init"])
        if len(words) != 1 or words[0][1] not in labels:
            raise ParseError("init must name one position", found["init"][0][0], 1)
        init = words[0][1]

    observation = {}
    for agent, lines in obs_sections:
        if agent not in agents:
            raise ParseError(f"obs for unknown agent {agent!r}", lines[0][0], 1)
        words = [w for _, w in _words(lines)]
        if words == ["identity"]:
            observation[agent] = [[v] for v in positions]
            continue
        if words == ["blind"]:
            observation[agent] = [list(positions)]
            continue
        lineno, blocks = _blocks(lines, f"obs {agent}")
        seen = set()
        for b in blocks:
            for v in b:
                if v not in labels:
                    raise ParseError(f"unknown position {v!r} in obs {agent}", lineno, 1)
                if v in seen:
                    raise ParseError(f"position {v!r} in two blocks of obs {agent}", lineno, 1)
                seen.add(v)
        missing = [v for v in positions if v not in seen]
        if missing:
            raise ParseError(f"obs {agent} does not cover {', '.join(missing)}", lineno, 1)
        observation[agent] = blocks
    for a in agents:
        if a not in observation:
            raise ParseError(f"missing obs section for agent {a!r}", 1, 1)

    rules = []
    nondet = False
    for lineno, content in found["trans"]:
        if not content:
            continue
        m = _RULE.match(content)
        if not m:
            raise ParseError(f"bad transition rule {content!r}", lineno, 1)
        src, guard, target = m.groups()
        if src not in labels:
            raise ParseError(f"unknown position {src!r}", lineno, 1)
        guard = _parse_guard(guard, agents, lineno)
        for a, mv in guard.items():
            if mv not in moves:
                raise ParseError(f"unknown move {mv!r}", lineno, 1)
        target = target.strip()
        if target.startswith("{"):
            if not target.endswith("}"):
                raise ParseError("unterminated target set", lineno, 1)
            targets = [w for w in re.split(r"[\s,]+", target[1:-1]) if w]
            nondet = True
        else:
            targets = [target]
        for t in targets:
            if t not in labels:
                raise ParseError(f"unknown target {t!r}", lineno, 1)
        rules.append((lineno, src, guard, targets))

    from itertools import product
    trans = {}
    for v in positions:
        for c in product(moves, repeat=len(agents)):
            jm = dict(zip(agents, c))
            for _, src, guard, targets in rules:
                if src == v and all(jm[a] == mv for a, mv in guard.items()):
                    trans[(v, c)] = frozenset(targets) if nondet else targets[0]
                    break
            else:
                desc = ", ".join(f"{a}={m}" for a, m in jm.items())
                raise ParseError(f"no transition from {v} under ({desc})",
                                 found["trans"][-1][0], 1)
    return GameStructure(agents, moves, positions, trans, labels, observation,
                         deterministic=not nondet, init=init)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def dump_model(g):
    """Render a structure; one explicit rule per (position, joint move)."""
    lines = [f"agents: {' '.join(g.agents)}", f"moves: {' '.join(g.moves)}",
             f"init: {g.init}", "positions:"]
    for v in g.positions:
        atoms = " ".join(sorted(g.labels[v]))
        lines.append(f"  {v} {{{atoms}}}" if atoms else f"  {v}")
    for a in g.agents:
        blocks = " ".join("{" + " ".join(sorted(b, key=g.positions.index)) + "}"
                          for b in g.observation[a])
        lines.append(f"obs {a}: {blocks}")
    lines.append("trans:")
    for v in g.positions:
        for c in g.joint_moves():
            guard = ", ".join(f"{a}={m}" for a, m in zip(g.agents, c))
            guard = f"({guard})" if guard else "_"
            t = g.transitions[(v, c)]
            if g.deterministic:
                tgt = t
            else:
                tgt = "{" + " ".join(sorted(t, key=g.positions.index)) + "}"
            lines.append(f"  {v} {guard} -> {tgt}")
    return "\n".join(lines) + "\n"


G_COIN_TEXT = """\
# coin game: n hides a coin, a guesses it without seeing it
agents: n a
moves: h t
init: v0
positions:
  v0
  vH
  vT
  w {win}
  l
obs n: identity
obs a: {v0} {vH vT} {w} {l}
trans:
  v0 (n=h) -> vH
  v0 (n=t) -> vT
  vH (a=h) -> w
  vH (a=t) -> l
  vT (a=t) -> w
  vT (a=h) -> l
  w _ -> w
  l _ -> l
"""
