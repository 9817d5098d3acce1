from ..errors import StateBudgetExceeded

DEFAULT_CAP = 10 ** 6


class Budget:
    """Shared state counter for one query; fails closed past ``cap``."""

    def __init__(self, cap=DEFAULT_CAP):
        self.cap = cap
        self.used = 0
        self.by_construction = {}

    def tick(self, construction, n=1):
        self.used += n
        self.by_construction[construction] = self.by_construction.get(construction, 0) + n
        if self.cap is not None and self.used > self.cap:
            raise StateBudgetExceeded(construction, self.cap)


def unlimited():
    return Budget(None)
