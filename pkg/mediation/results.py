import numpy as np


class TestResults:
    """Stores the per-candidate test records"""
    __test__ = False

    def __init__(self, items=None):
        self.records = list(items or [])

    def indices(self):
        """Returns the mediator indices of the records"""
        return [row.index for row in self.records]

    def p_alpha(self):
        """Returns the exposure-to-mediator p-values"""
        return np.array([row.p_alpha for row in self.records], dtype=float)

    def p_beta(self):
        """Returns the mediator-to-outcome p-values"""
        return np.array([row.p_beta for row in self.records], dtype=float)

    def p_max(self):
        """Returns the joint-significance p-values"""
        return np.array([row.p_max for row in self.records], dtype=float)

    def by_p_max(self):
        """Returns the records sorted by p_max, ties by index"""
        return sorted(self.records, key=lambda row: (row.p_max, row.index))

    def __getitem__(self, index):
        return self.records[index]

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __str__(self):
        return f'<TestResults ({len(self.records)} records)>'

    def extend(self, items):
        """Appends records."""
        self.records.extend(items)
