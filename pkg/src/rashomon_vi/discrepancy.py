"""Variable-importance orderings and their disagreement across the
Rashomon set: Kendall's tau against the reference model and the extremal
summary VIOD.

The headline VIOD number is configurable between the most-dissimilar
member (min tau, the default) and the most-similar one (max tau); both
extremes are always computed and emitted side by side.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .importance import PviRecord, PviReport
from .rashomon import RashomonSet

VIOD_MODES = ("min", "max")


@dataclass(frozen=True)
class Ranking:
    variables: tuple[str, ...]
    source_model_id: int
    tie_note: bool = False

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("ranking contains duplicate variables")

    def position(self, variable: str) -> int:
        return self.variables.index(variable)


def rank_variables(
    records: list[PviRecord], variable_order: tuple[str, ...] | None = None
) -> Ranking:
    """Descending mean_drop; ties fall back to the canonical variable order
    (and set tie_note so downstream reports can flag the ambiguity)."""
    if not records:
        raise ValueError("no records to rank")
    model_ids = {r.model_id for r in records}
    if len(model_ids) != 1:
        raise ValueError("records must belong to a single model")
    if variable_order is None:
        variable_order = tuple(r.variable for r in records)
    seen = {r.variable for r in records}
    if seen != set(variable_order) or len(records) != len(variable_order):
        missing = sorted(set(variable_order) - seen)
        raise ValueError(f"records must cover each variable exactly once; missing {missing}")
    rank_index = {name: i for i, name in enumerate(variable_order)}
    ordered = sorted(records, key=lambda r: (-r.mean_drop, rank_index[r.variable]))
    drops = [r.mean_drop for r in records]
    return Ranking(
        variables=tuple(r.variable for r in ordered),
        source_model_id=next(iter(model_ids)),
        tie_note=len(set(drops)) < len(drops),
    )


def kendall_tau(r1: Ranking, r2: Ranking) -> float:
    """Tau-a over all pairs; rankings are strict permutations upstream.

    Degenerate rankings with fewer than two variables compare as 1.0.
    """
    if set(r1.variables) != set(r2.variables):
        raise ValueError("rankings cover different variable sets")
    n = len(r1.variables)
    if n < 2:
        return 1.0
    pos2 = {name: i for i, name in enumerate(r2.variables)}
    concordant = 0
    discordant = 0
    for a, b in combinations(r1.variables, 2):
        if pos2[a] < pos2[b]:
            concordant += 1
        else:
            discordant += 1
    return (concordant - discordant) / (n * (n - 1) / 2)


@dataclass(frozen=True)
class ViodReport:
    course: str
    setup: str
    taus: dict[int, float]
    viod_min: float
    viod_max: float
    viod_min_id: int
    viod_max_id: int
    reported_mode: str

    def __post_init__(self):
        if self.reported_mode not in VIOD_MODES:
            raise ValueError(f"reported_mode must be one of {VIOD_MODES}")
        if self.viod_min > self.viod_max:
            raise ValueError("viod_min exceeds viod_max")
        for tau in self.taus.values():
            if not -1.0 <= tau <= 1.0:
                raise ValueError(f"tau out of bounds: {tau}")

    @property
    def reported(self) -> float:
        return self.viod_min if self.reported_mode == "min" else self.viod_max

    @property
    def n_members(self) -> int:
        # members counted including the reference
        return len(self.taus) + 1


def _member_rankings(
    report: PviReport, rset: RashomonSet
) -> tuple[Ranking, dict[int, Ranking]]:
    covered = {r.model_id for r in report.records}
    missing = sorted(set(rset.member_ids) - covered)
    if missing:
        raise ValueError(f"report lacks PVI records for members {missing}")
    reference = rank_variables(report.for_model(rset.reference_id), report.variables)
    others = {
        mid: rank_variables(report.for_model(mid), report.variables)
        for mid in sorted(rset.member_ids)
        if mid != rset.reference_id
    }
    return reference, others


def viod(report: PviReport, rset: RashomonSet, mode: str = "min") -> ViodReport:
    """Extremal tau between the reference ranking and every other member."""
    if mode not in VIOD_MODES:
        raise ValueError(f"mode must be one of {VIOD_MODES}")
    if rset.size < 2:
        raise ValueError("VIOD undefined for singleton set")
    reference, others = _member_rankings(report, rset)
    taus = {mid: kendall_tau(reference, ranking) for mid, ranking in others.items()}
    ids = sorted(taus)
    min_id = min(ids, key=lambda i: (taus[i], i))
    max_id = min(ids, key=lambda i: (-taus[i], i))
    return ViodReport(
        course=report.course,
        setup=report.setup,
        taus=taus,
        viod_min=taus[min_id],
        viod_max=taus[max_id],
        viod_min_id=min_id,
        viod_max_id=max_id,
        reported_mode=mode,
    )


def tau_distribution(report: PviReport, rset: RashomonSet) -> list[tuple[int, float]]:
    """(model_id, tau) for every non-reference member, id-ordered."""
    if rset.size < 2:
        return []
    reference, others = _member_rankings(report, rset)
    return [(mid, kendall_tau(reference, others[mid])) for mid in sorted(others)]
