"""Shared solution-grid container used by both solver paths."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SolutionGrid:
    """Values u[i, j] = u(xs[i], ts[j]) plus provenance metadata."""

    xs: np.ndarray
    ts: np.ndarray
    values: np.ndarray  # real or complex, shape (len(xs), len(ts))
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.ts = np.asarray(self.ts, dtype=float)
        self.values = np.asarray(self.values)
        if self.values.shape != (self.xs.size, self.ts.size):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.xs.size}, {self.ts.size})")

    @property
    def real(self):
        return np.real(self.values)

    def max_abs_imag(self):
        if np.iscomplexobj(self.values):
            return float(np.max(np.abs(self.values.imag))) if self.values.size else 0.0
        return 0.0
