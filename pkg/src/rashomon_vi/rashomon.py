"""Empirical Rashomon set: reference selection, extraction at a loss
tolerance epsilon, and summary statistics.

Loss is 1 - validation accuracy throughout, so an epsilon of 0.05 admits
every model within five accuracy points of the best one found.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .search import ModelSpace

LOSS_METRIC = "1-accuracy"


@dataclass(frozen=True)
class RashomonSet:
    reference_id: int
    member_ids: tuple[int, ...]
    epsilon: float
    loss_metric: str = LOSS_METRIC

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if len(set(self.member_ids)) != len(self.member_ids):
            raise ValueError("member_ids contain duplicates")
        if self.reference_id not in self.member_ids:
            raise ValueError("reference model must be a member of its own set")

    @property
    def size(self) -> int:
        return len(self.member_ids)


def select_reference(space: ModelSpace) -> int:
    """Model id with minimal empirical loss; ties go to the lowest id."""
    if len(space) == 0:
        raise ValueError("model space is empty")
    losses = 1.0 - space.accuracies()
    return int(np.argmin(losses))


def extract_rashomon(space: ModelSpace, epsilon: float) -> RashomonSet:
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    reference_id = select_reference(space)
    losses = 1.0 - space.accuracies()
    threshold = losses[reference_id] + epsilon
    member_ids = tuple(int(i) for i in np.nonzero(losses <= threshold)[0])
    return RashomonSet(reference_id=reference_id, member_ids=member_ids, epsilon=epsilon)


@dataclass(frozen=True)
class RashomonSummary:
    space_mean: float
    space_sd: float
    set_mean: float
    set_sd: float
    set_size: int


def _sample_sd(values: np.ndarray) -> float:
    # singleton sets report sd 0 rather than NaN
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1))


def rashomon_summary(space: ModelSpace, rset: RashomonSet) -> RashomonSummary:
    """Mean ± sd accuracy for the whole space and for the set."""
    accs = space.accuracies()
    ids = set(rset.member_ids)
    if not ids <= set(range(len(space))):
        raise ValueError("set members are not drawn from this space")
    member_accs = np.array([accs[i] for i in sorted(ids)])
    return RashomonSummary(
        space_mean=float(accs.mean()),
        space_sd=_sample_sd(accs),
        set_mean=float(member_accs.mean()),
        set_sd=_sample_sd(member_accs),
        set_size=len(ids),
    )


def epsilon_sweep(space: ModelSpace, epsilons: list[float]) -> list[tuple[float, int]]:
    """Set size at each epsilon; the input grid must be ascending."""
    for a, b in zip(epsilons, epsilons[1:]):
        if b < a:
            raise ValueError("epsilons must be ascending")
    if epsilons and epsilons[0] < 0:
        raise ValueError("epsilons must be non-negative")
    return [(float(eps), extract_rashomon(space, eps).size) for eps in epsilons]
