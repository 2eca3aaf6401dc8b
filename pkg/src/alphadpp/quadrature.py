"""Composite Gauss-Legendre rules on dyadic cells."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError

DEFAULT_FINE_LEVEL = 6


@lru_cache(maxsize=None)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre order per cell and the dyadic level of integration cells.

    ``refinement_level=None`` lets each caller pick the coarsest level that
    resolves both the basis and the kernel's own breakpoints.
    """

    order: int = 8
    refinement_level: int | None = None

    def __post_init__(self):
        if self.order < 2:
            raise ConfigurationError(f"quadrature order must be >= 2, got {self.order}")

    def resolve(self, level: int, max_rank: int, kernel=None) -> int:
        need = level + max_rank - 1
        if self.refinement_level is not None and self.refinement_level < need:
            raise ConfigurationError(
                f"refinement_level={self.refinement_level} cannot resolve rank {max_rank} "
                f"at level {level}; need >= {need}"
            )
        fine = max(need, self.refinement_level or 0)
        return max(fine, kernel_breakpoint_level(kernel))

    def fine_level_for(self, kernel=None, floor: int = DEFAULT_FINE_LEVEL) -> int:
        """Integration level when no basis needs resolving."""
        base = self.refinement_level if self.refinement_level is not None else floor
        return max(base, kernel_breakpoint_level(kernel))


def kernel_breakpoint_level(kernel) -> int:
    lvl = getattr(kernel, "breakpoint_level", None)
    return 0 if lvl is None else lvl


def interval_nodes(lo: float, hi: float, fine_level: int, order: int):
    """Nodes and weights on [lo, hi) split into level-L cells (at least one)."""
    h = 2.0 ** (1 - fine_level)
    n = max(1, int(round((hi - lo) / h)))
    t, w = _leggauss(order)
    width = (hi - lo) / n
    starts = lo + width * np.arange(n)
    x = (starts[:, None] + width * t[None, :])
    return x, np.broadcast_to(width * w, x.shape).copy()
