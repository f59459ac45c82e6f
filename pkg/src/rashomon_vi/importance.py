"""Permutation variable importance over the Rashomon set.

A variable's importance for one model is the average drop in validation
accuracy over M shuffles of that variable, where each shuffle moves the
variable's entire one-hot column group through one shared row permutation
(shuffling columns independently would fabricate rows that cannot occur).
Drops may be negative; nothing is clamped.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import EncodedMatrix
from .ensembles import TrainedModel, accuracy, model_used_variables
from .rashomon import RashomonSet
from .search import ModelSpace
from .seeding import derive_rng, derive_seed


@dataclass(frozen=True)
class PviConfig:
    repeats: int = 10
    metric: str = "accuracy"
    seed: int = 0

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.metric != "accuracy":
            raise ValueError(f"unsupported metric {self.metric!r}")


@dataclass(frozen=True)
class PviRecord:
    model_id: int
    variable: str
    baseline: float
    drops: tuple[float, ...]
    mean_drop: float

    def __post_init__(self):
        if not self.drops:
            raise ValueError("drops must be non-empty")
        if abs(self.mean_drop - sum(self.drops) / len(self.drops)) > 1e-12:
            raise ValueError("mean_drop must equal the arithmetic mean of drops")


@dataclass
class PviReport:
    records: list[PviRecord]
    config: PviConfig
    course: str
    setup: str
    variables: tuple[str, ...]

    def __post_init__(self):
        model_ids = {r.model_id for r in self.records}
        if self.records and len(self.records) != len(model_ids) * len(self.variables):
            raise ValueError("records must form a complete (model, variable) grid")

    def for_model(self, model_id: int) -> list[PviRecord]:
        return [r for r in self.records if r.model_id == model_id]

    def mean_drops(self, model_id: int) -> dict[str, float]:
        return {r.variable: r.mean_drop for r in self.records if r.model_id == model_id}


def permute_variable(matrix: EncodedMatrix, variable: str, seed: int) -> EncodedMatrix:
    """Copy of the matrix with one variable's group rows shuffled jointly."""
    if variable not in matrix.group_map:
        raise ValueError(f"unknown variable {variable!r}")
    perm = derive_rng(seed, "permute-variable").permutation(matrix.n_rows)
    cols = matrix.group_map[variable]
    X = matrix.X.copy()
    X[:, cols.start:cols.stop] = X[perm, cols.start:cols.stop]
    return EncodedMatrix(
        X=X,
        group_map=matrix.group_map,
        labels=matrix.labels,
        target_levels=matrix.target_levels,
    )


def pvi_for_model(
    model: TrainedModel, valid: EncodedMatrix, cfg: PviConfig
) -> list[PviRecord]:
    """One record per variable; repeat seeds depend only on
    (cfg.seed, model_id, variable, repeat), never on evaluation order."""
    if valid.n_rows == 0:
        raise ValueError("validation matrix must be non-empty")
    baseline = accuracy(model, valid)
    used = model_used_variables(model, valid)
    records = []
    for variable in valid.variables:
        if variable not in used:
            # No split inspects this group, so every permutation yields the
            # same predictions: the drop is identically zero.
            drops = (0.0,) * cfg.repeats
        else:
            drops = tuple(
                baseline
                - accuracy(
                    model,
                    permute_variable(
                        valid,
                        variable,
                        derive_seed(cfg.seed, "pvi", model.model_id, variable, i),
                    ),
                )
                for i in range(cfg.repeats)
            )
        records.append(
            PviRecord(
                model_id=model.model_id,
                variable=variable,
                baseline=baseline,
                drops=drops,
                mean_drop=float(sum(drops) / len(drops)),
            )
        )
    return records


def pvi_over_set(
    rset: RashomonSet,
    space: ModelSpace,
    valid: EncodedMatrix,
    cfg: PviConfig,
    course: str = "",
    setup: str = "",
    workers: int = 1,
) -> PviReport:
    """Complete (member, variable) grid in canonical model_id order."""
    if rset.size == 0:
        raise ValueError("Rashomon set is empty")
    member_ids = sorted(rset.member_ids)
    members = [space.models[i] for i in member_ids]

    def run_one(model: TrainedModel) -> list[PviRecord]:
        return pvi_for_model(model, valid, cfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_one, members))
    else:
        chunks = [run_one(m) for m in members]
    records = [record for chunk in chunks for record in chunk]
    return PviReport(
        records=records,
        config=cfg,
        course=course,
        setup=setup,
        variables=valid.variables,
    )
