"""Candidate-block scoring for one streamed node within one subproblem.

Three assignment rules share one selection contract:

* additive-penalty greedy ("fennel"): neighbors_in_block - alpha * gamma *
  weight^(gamma-1) with gamma fixed at 3/2
* multiplicative-penalty greedy ("ldg"): neighbors_in_block * (1 - weight /
  capacity), using each candidate's own capacity
* "hashing": a stable mix of (node id, seed, parent block id), blind to
  adjacency

A candidate is open when the node still fits under its capacity. Selection
only ever returns a closed candidate when every sibling is closed, which is
reported as an overflow event. Ties break toward the lighter block, then the
lower block id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .hierarchy import Block

__all__ = [
    "GAMMA",
    "NEG_INF",
    "ScorerConfig",
    "SubproblemView",
    "fennel_score",
    "ldg_score",
    "hashing_assign",
    "select_block",
]

GAMMA = 1.5
NEG_INF = float("-inf")

_ALGORITHMS = ("fennel", "ldg", "hashing")
_TIE_BREAKS = ("weight-id", "id")


@dataclass(frozen=True)
class ScorerConfig:
    """Which rule to apply, the hashing seed, and the tie-break rule.

    The "id" tie-break exists for mutation tests that need a deliberately
    different deterministic rule; production paths use "weight-id".
    """

    algorithm: str = "fennel"
    seed: int = 0
    tie_break: str = "weight-id"

    def __post_init__(self) -> None:
        if self.algorithm not in _ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected {_ALGORITHMS}")
        if self.tie_break not in _TIE_BREAKS:
            raise ValueError(f"unknown tie-break {self.tie_break!r}; expected {_TIE_BREAKS}")

    @property
    def gamma(self) -> float:
        return GAMMA


@dataclass
class SubproblemView:
    """Sibling candidates for one placement decision.

    ``neighbor_counts[j]`` is the accumulated edge weight from the streamed
    node into candidate j's subtree; ``node_weight`` is the weight being
    placed.
    """

    blocks: Sequence[Block]
    neighbor_counts: Sequence[float]
    node_weight: int | float


def fennel_score(view: SubproblemView, j: int) -> float:
    """Additive-penalty score of candidate j; -inf when the node no longer fits."""
    b = view.blocks[j]
    w = b.weight
    if w + view.node_weight > b.capacity:
        return NEG_INF
    return view.neighbor_counts[j] - (b.alpha * GAMMA) * math.sqrt(w)


def ldg_score(view: SubproblemView, j: int) -> float:
    """Multiplicative-penalty score of candidate j (0 at full capacity)."""
    b = view.blocks[j]
    return view.neighbor_counts[j] * (1.0 - b.weight / b.capacity)


_M64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    # murmur3 finalizer; full avalanche over 64 bits
    x &= _M64
    x ^= x >> 33
    x = (x * 0xFF51AFD7ED558CCD) & _M64
    x ^= x >> 33
    x = (x * 0xC4CEB9FE1A85EC53) & _M64
    x ^= x >> 33
    return x


def hashing_assign(node_id: int, s: int, seed: int, parent_id: int = 0) -> int:
    """Deterministic candidate index in [0, s), uniform over node ids.

    The parent block id is mixed in so sibling subproblems hash
    independently of each other.
    """
    if s < 1:
        raise ValueError(f"need at least one candidate, got {s}")
    return _mix64(node_id ^ _mix64(seed ^ _mix64(parent_id))) % s


def _min_weight_index(blocks: Sequence[Block]) -> int:
    best = 0
    bw = blocks[0].weight
    bid = blocks[0].id
    for j in range(1, len(blocks)):
        b = blocks[j]
        if b.weight < bw or (b.weight == bw and b.id < bid):
            best, bw, bid = j, b.weight, b.id
    return best


def select_block(
    view: SubproblemView,
    config: ScorerConfig,
    node_id: int = 0,
    parent_id: int = 0,
) -> tuple[int, bool]:
    """Pick a candidate index; the flag reports an all-candidates-full overflow.

    Scored rules take the argmax over open candidates with deterministic tie
    breaking. Hashing takes the hashed index when open, else probes forward
    cyclically. When nothing is open the lightest candidate wins and the
    overflow flag is set.
    """
    blocks = view.blocks
    s = len(blocks)
    if s == 0:
        raise ValueError("empty candidate set")
    cw = view.node_weight

    if config.algorithm == "hashing":
        start = hashing_assign(node_id, s, config.seed, parent_id)
        for step in range(s):
            j = (start + step) % s
            b = blocks[j]
            if b.weight + cw <= b.capacity:
                return j, False
        return _min_weight_index(blocks), True

    counts = view.neighbor_counts
    fennel = config.algorithm == "fennel"
    by_weight = config.tie_break == "weight-id"
    best_j = -1
    best_score = NEG_INF
    best_w: int | float = 0
    best_id = -1
    for j in range(s):
        b = blocks[j]
        w = b.weight
        if w + cw > b.capacity:
            continue
        if fennel:
            score = counts[j] - (b.alpha * GAMMA) * math.sqrt(w)
        else:
            score = counts[j] * (1.0 - w / b.capacity)
        if best_j < 0 or score > best_score:
            better = True
        elif score != best_score:
            better = False
        elif by_weight:
            better = w < best_w or (w == best_w and b.id < best_id)
        else:
            better = b.id < best_id
        if better:
            best_j, best_score, best_w, best_id = j, score, w, b.id
    if best_j < 0:
        return _min_weight_index(blocks), True
    return best_j, False
