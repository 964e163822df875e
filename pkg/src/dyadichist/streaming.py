"""On-the-fly histogram estimation under a conservative stream-size cap.

Only the finest-level bin counts are stored; every coarser snapshot is an
exact aggregation by dyadic nesting, so outputs match the batch fit of the
same prefix while the footprint stays within 2^{d+1} M^{d/2v} when d < 2v.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DyadicHistogram,
    ModelConfig,
    aggregate_dyadic,
    auto_depth,
    bin_index,
)
from .errors import DomainError


@dataclass(frozen=True)
class StreamConfig:
    M: int  # conservative upper bound on the stream length
    d: int
    v: float
    p: float = 2.0
    prior: object = "zero"

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("cap M must be >= 1")
        if self.d < 1 or self.v < 1 or self.p < 1:
            raise ValueError("need d >= 1, v >= 1, p >= 1")


class MultiResCounter:
    """Streaming state: finest-level counts at the depth matched to the cap."""

    def __init__(self, config: StreamConfig):
        self.config = config
        _, self.K_M, _ = auto_depth(config.M, config.d, config.v)
        self.finest_counts = np.zeros(2 ** (self.K_M * config.d), dtype=np.int64)
        self.r = 0
        self.cap_exceeded = False

    def push(self, point) -> None:
        """Place one point into the finest partition; state untouched on error."""
        pt = np.atleast_1d(np.asarray(point, dtype=float))
        if pt.shape != (self.config.d,):
            raise DomainError(
                f"point has dimension {pt.size}, stream expects {self.config.d}"
            )
        _, flat = bin_index(pt, self.K_M)
        self.finest_counts[flat] += 1
        self.r += 1
        if self.r > self.config.M:
            self.cap_exceeded = True

    def current_depth(self) -> int:
        _, R_r, _ = auto_depth(self.r, self.config.d, self.config.v)
        return min(R_r, self.K_M)

    def current_estimate(self) -> DyadicHistogram:
        """Histogram at depth min(ceil(log2 k_r), K_M); equals the batch fit."""
        if self.r == 0:
            raise ValueError("empty stream: no estimate before the first point")
        depth = self.current_depth()
        counts = aggregate_dyadic(self.finest_counts, self.config.d, self.K_M, depth)
        cfg = ModelConfig(
            self.config.d, self.config.v, self.config.p, depth=depth, prior=self.config.prior
        )
        prior = cfg.resolve_prior(self.r, counts.size)
        return DyadicHistogram(self.config.d, depth, self.r, counts, prior)

    def memory_footprint(self) -> int:
        """Number of stored counters."""
        return int(self.finest_counts.size)


def new_stream(config: StreamConfig) -> MultiResCounter:
    return MultiResCounter(config)
