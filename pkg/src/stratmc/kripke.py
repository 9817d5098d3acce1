"""Finite Kripke structures, optionally with tuple-valued (compound) states."""


class Kripke:
    """States, a left-total successor relation and a labelling.

    When ``components`` is given, states are tuples with one entry per
    component and ``component(s, i)`` reads the i-th entry (1-based).
    """

    def __init__(self, states, relation, labels, components=None, names=None):
        self.states = list(states)
        self.relation = {s: tuple(relation[s]) for s in self.states}
        self.labels = {s: frozenset(labels.get(s, ())) for s in self.states}
        self.components = tuple(components) if components else ()
        self.names = dict(names or {})
        for s in self.states:
            if not self.relation[s]:
                raise ValueError(f"state {self.name(s)} has no successor")

    @property
    def ncomponents(self):
        return len(self.components)

    def successors(self, s):
        return self.relation[s]

    def label(self, s):
        return self.labels[s]

    def component(self, s, i):
        return s[i - 1]

    def project(self, s, obs):
        """Values of ``s`` on the components in ``obs`` (sorted)."""
        n = len(self.components)
        return tuple(s[i - 1] for i in sorted(obs) if 1 <= i <= n)

    def name(self, s):
        return self.names.get(s, str(s))

    def state_named(self, name):
        for s in self.states:
            if self.name(s) == name or s == name:
                return s
        raise KeyError(name)

    def atoms(self):
        out = set()
        for s in self.states:
            out |= self.labels[s]
        return out
