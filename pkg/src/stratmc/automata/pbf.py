"""Positive boolean formulas over (direction, state) atoms, kept in DNF.

A formula is a frozenset of clauses; a clause is a frozenset of atoms.
TRUE is the set holding the empty clause and FALSE the empty set.  Clauses
are kept subsumption-free: no clause contains another.
"""

TRUE = frozenset({frozenset()})
FALSE = frozenset()


def atom(direction, state):
    return frozenset({frozenset({(direction, state)})})


def minimize(clauses):
    """Drop clauses that are supersets of other clauses."""
    cl = sorted(set(clauses), key=len)
    kept = []
    for c in cl:
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


def disj(*fs):
    out = set()
    for f in fs:
        if f == TRUE:
            return TRUE
        out |= f
    if len(fs) <= 1:
        return frozenset(out)
    return minimize(out)


def conj(*fs):
    out = TRUE
    for f in fs:
        if f == FALSE:
            return FALSE
        if f == TRUE:
            continue
        if out == TRUE:
            out = f
            continue
        out = minimize(a | b for a in out for b in f)
    return out


def disj_all(fs):
    return disj(*fs) if fs else FALSE


def conj_all(fs):
    return conj(*fs)


def dual(f):
    """Swap and/or: the DNF of the conjunction of the clauses' disjunctions."""
    out = TRUE
    for clause in f:
        out = conj(out, frozenset(frozenset({a}) for a in clause))
        if out == FALSE:
            break
    return out


def map_atoms(f, fn):
    """Apply ``fn`` to each atom; ``fn`` returns a new atom."""
    return minimize(frozenset(fn(a) for a in c) for c in f)


def states(f):
    return {q for c in f for (_, q) in c}


def is_nondeterministic(f):
    """Each clause mentions every direction at most once."""
    for c in f:
        dirs = [d for d, _ in c]
        if len(dirs) != len(set(dirs)):
            return False
    return True


def evaluate(f, model):
    """Truth under a set of atoms assumed true."""
    return any(c <= model for c in f)


def to_text(f, fmt=repr):
    if f == TRUE:
        return "true"
    if f == FALSE:
        return "false"
    parts = []
    for c in sorted(f, key=lambda c: sorted(map(repr, c))):
        items = sorted(f"({fmt(d)},{fmt(q)})" for d, q in c)
        parts.append(" & ".join(items) if items else "true")
    return " | ".join(parts)
