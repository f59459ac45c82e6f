"""Tabular demographic datasets: OULAD ingestion, synthetic generation,
target construction, stratified splitting, and one-hot encoding.

All functions are pure: datasets are immutable once built and every random
operation takes an explicit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError, IngestError, StratificationError
from .seeding import derive_rng

MISSING_LEVEL = "Missing"

TARGET_BINARY = ("Fail", "Pass")
TARGET_MULTICLASS = ("Fail", "Pass", "Distinction")

OULAD_COURSES = ("AAA", "BBB", "DDD", "EEE")

# Fixed predictor order; every report and encoded matrix uses it, so output
# files are byte-stable across runs.
OULAD_VARIABLES = (
    "age_band",
    "disability",
    "highest_education",
    "gender",
    "imd_band",
    "region",
)

_OULAD_REQUIRED_COLUMNS = ("code_module", "final_result") + OULAD_VARIABLES


@dataclass(frozen=True)
class ColumnSchema:
    """One categorical predictor: its name and the ordered set of levels."""

    name: str
    levels: tuple[str, ...]
    kind: str = "categorical"

    def __post_init__(self):
        if len(self.levels) == 0:
            raise ValueError(f"column {self.name!r} has no levels")
        if len(set(self.levels)) != len(self.levels):
            raise ValueError(f"column {self.name!r} has duplicate levels")

    def level_index(self, value: str) -> int:
        return self.levels.index(value)


@dataclass(frozen=True)
class TabularDataset:
    """Rows of categorical feature values plus a class label."""

    schema: tuple[ColumnSchema, ...]
    cells: tuple[tuple[str, ...], ...]
    labels: tuple[str, ...]
    target_levels: tuple[str, ...]
    course_tag: str

    def __post_init__(self):
        if len(self.cells) == 0:
            raise DataError(f"dataset {self.course_tag!r} has no rows")
        if len(self.labels) != len(self.cells):
            raise DataError("row/label count mismatch")
        width = len(self.schema)
        for row in self.cells:
            if len(row) != width:
                raise DataError("row width does not match schema")
        allowed = [set(col.levels) for col in self.schema]
        for row in self.cells:
            for value, ok, col in zip(row, allowed, self.schema):
                if value not in ok:
                    raise DataError(
                        f"value {value!r} not a level of column {col.name!r}"
                    )
        target = set(self.target_levels)
        for label in self.labels:
            if label not in target:
                raise DataError(f"label {label!r} not in target levels")

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(col.name for col in self.schema)

    def column_values(self, name: str) -> tuple[str, ...]:
        idx = self.variables.index(name)
        return tuple(row[idx] for row in self.cells)


@dataclass(frozen=True)
class SplitPair:
    """Disjoint stratified train/validation partition of one dataset."""

    train: TabularDataset
    valid: TabularDataset
    seed: int
    ratio: float


@dataclass(frozen=True)
class EncodedMatrix:
    """Dense 0/1 design matrix with per-variable column groups.

    Missingness is encoded as an ordinary level, so within each variable's
    group every row has exactly one hot column.
    """

    X: np.ndarray
    group_map: dict[str, range]
    labels: np.ndarray
    target_levels: tuple[str, ...]

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def width(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.target_levels)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.group_map)


def load_oulad(data_dir, course: str, target_mode: str) -> TabularDataset:
    """Load one course from the OULAD ``studentInfo.csv`` table.

    Keeps the six demographic predictors, drops students whose final result
    is Withdrawn, maps empty ``imd_band`` cells to the level ``Missing``, and
    builds the requested binary or multiclass target.
    """
    if course not in OULAD_COURSES:
        raise ValueError(
            f"unknown course code {course!r}; expected one of {OULAD_COURSES}"
        )
    if target_mode not in ("binary", "multiclass"):
        raise ValueError(f"target_mode must be 'binary' or 'multiclass', got {target_mode!r}")

    from pathlib import Path

    path = Path(data_dir) / "studentInfo.csv"
    if not path.is_file():
        raise IngestError(f"missing OULAD file: {path}")

    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing_cols = [c for c in _OULAD_REQUIRED_COLUMNS if c not in frame.columns]
    if missing_cols:
        raise IngestError(f"{path} lacks required columns: {missing_cols}")

    frame = frame[frame["code_module"] == course]
    frame = frame[frame["final_result"] != "Withdrawn"]
    if len(frame) == 0:
        raise DataError(f"no completed-student rows for course {course!r}")

    bad = sorted(set(frame["final_result"]) - set(TARGET_MULTICLASS))
    if bad:
        raise DataError(f"unexpected final_result values: {bad}")

    columns = {}
    for name in OULAD_VARIABLES:
        values = frame[name].str.strip()
        if name == "imd_band":
            values = values.replace("", MISSING_LEVEL)
        elif (values == "").any():
            raise DataError(f"column {name!r} has empty cells")
        columns[name] = values.tolist()

    schema = tuple(
        ColumnSchema(name, _level_order(columns[name])) for name in OULAD_VARIABLES
    )
    cells = tuple(zip(*(columns[name] for name in OULAD_VARIABLES)))
    labels = tuple(frame["final_result"].tolist())

    dataset = TabularDataset(
        schema=schema,
        cells=cells,
        labels=labels,
        target_levels=TARGET_MULTICLASS,
        course_tag=course,
    )
    if target_mode == "binary":
        dataset = make_binary(dataset)
    return dataset


def _level_order(values) -> tuple[str, ...]:
    """Observed levels, sorted, with the Missing level forced last."""
    observed = sorted(set(values))
    if MISSING_LEVEL in observed:
        observed.remove(MISSING_LEVEL)
        observed.append(MISSING_LEVEL)
    return tuple(observed)


def make_binary(d: TabularDataset) -> TabularDataset:
    """Merge Distinction into Pass. A no-op on already-binary datasets."""
    if d.target_levels == TARGET_BINARY:
        return d
    if d.target_levels != TARGET_MULTICLASS:
        raise ValueError(f"unexpected target levels {d.target_levels!r}")
    labels = tuple("Pass" if lab == "Distinction" else lab for lab in d.labels)
    return TabularDataset(
        schema=d.schema,
        cells=d.cells,
        labels=labels,
        target_levels=TARGET_BINARY,
        course_tag=d.course_tag,
    )


def stratified_split(d: TabularDataset, ratio: float, seed: int) -> SplitPair:
    """Deterministic stratified holdout; ``ratio`` is the validation share.

    Per-class validation counts follow the largest-remainder rule and are
    clamped to leave at least one row of each class on both sides.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")

    label_arr = np.asarray(d.labels, dtype=object)
    class_indices = []
    for level in d.target_levels:
        idx = np.nonzero(label_arr == level)[0]
        if idx.size < 2:
            raise StratificationError(
                f"class {level!r} has {idx.size} row(s); need at least 2 to split"
            )
        class_indices.append(idx)

    n = d.n_rows
    total_valid = int(math.floor(ratio * n + 0.5))
    targets = [ratio * idx.size for idx in class_indices]
    counts = [int(math.floor(t)) for t in targets]
    leftovers = total_valid - sum(counts)
    by_remainder = sorted(
        range(len(counts)), key=lambda c: (-(targets[c] - counts[c]), c)
    )
    for c in by_remainder[: max(leftovers, 0)]:
        counts[c] += 1
    counts = [min(max(c, 1), idx.size - 1) for c, idx in zip(counts, class_indices)]

    rng = derive_rng(seed, "stratified-split")
    valid_rows: list[int] = []
    for idx, take in zip(class_indices, counts):
        shuffled = idx[rng.permutation(idx.size)]
        valid_rows.extend(int(i) for i in shuffled[:take])
    valid_set = frozenset(valid_rows)
    valid_order = sorted(valid_rows)
    train_order = [i for i in range(n) if i not in valid_set]

    def take(rows: list[int]) -> TabularDataset:
        return TabularDataset(
            schema=d.schema,
            cells=tuple(d.cells[i] for i in rows),
            labels=tuple(d.labels[i] for i in rows),
            target_levels=d.target_levels,
            course_tag=d.course_tag,
        )

    return SplitPair(train=take(train_order), valid=take(valid_order), seed=seed, ratio=ratio)


def one_hot_encode(d: TabularDataset) -> EncodedMatrix:
    """One column per (variable, level) pair in schema order."""
    n = d.n_rows
    widths = [len(col.levels) for col in d.schema]
    total = sum(widths)
    X = np.zeros((n, total), dtype=np.float64)

    group_map: dict[str, range] = {}
    offset = 0
    for col, width in zip(d.schema, widths):
        group_map[col.name] = range(offset, offset + width)
        lookup = {level: k for k, level in enumerate(col.levels)}
        var_idx = d.variables.index(col.name)
        codes = np.fromiter(
            (lookup[row[var_idx]] for row in d.cells), count=n, dtype=np.intp
        )
        X[np.arange(n), offset + codes] = 1.0
        offset += width

    target_lookup = {level: k for k, level in enumerate(d.target_levels)}
    labels = np.fromiter(
        (target_lookup[lab] for lab in d.labels), count=n, dtype=np.int64
    )
    return EncodedMatrix(
        X=X, group_map=group_map, labels=labels, target_levels=d.target_levels
    )


@dataclass(frozen=True)
class SynthSpec:
    """Planted-importance recipe for synthetic categorical data.

    Each variable gets ``levels_per_variable`` levels with evenly spaced
    scores in [-1, 1]; a row's latent value is the strength-weighted sum of
    its level scores plus logistic noise, thresholded into Fail / Pass /
    Distinction. A strength of zero plants a pure-noise variable.
    """

    strengths: dict[str, float]
    levels_per_variable: int = 4
    scale: float = 3.0
    course_tag: str = "synth"
    thresholds: tuple[float, float] = (0.0, 2.0)

    def __post_init__(self):
        if len(self.strengths) == 0:
            raise ValueError("at least one variable is required")
        for name, s in self.strengths.items():
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"strength of {name!r} must be in [0, 1], got {s}")
        zero = [name for name, s in self.strengths.items() if s == 0.0]
        if len(zero) > 1:
            raise ValueError(f"at most one pure-noise variable allowed, got {zero}")
        if self.levels_per_variable < 2:
            raise ValueError("variables need at least 2 levels")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.strengths)

    def strength_order(self) -> tuple[str, ...]:
        """Ground-truth importance order, strongest first."""
        names = list(self.strengths)
        return tuple(sorted(names, key=lambda v: (-self.strengths[v], names.index(v))))


def synth_generate(n_rows: int, spec: SynthSpec, seed: int) -> TabularDataset:
    """Generate a multiclass dataset with planted variable importance.

    Use :func:`make_binary` for the two-class view; merging Pass and
    Distinction collapses the two latent thresholds into one, so the binary
    labels follow a plain logistic model with the same strengths.
    """
    if n_rows < 50:
        raise ValueError(f"n_rows must be at least 50 to measure importance, got {n_rows}")

    rng = derive_rng(seed, "synth", spec.course_tag)
    n_levels = spec.levels_per_variable
    scores = np.linspace(-1.0, 1.0, n_levels)

    latent = np.zeros(n_rows)
    level_idx: dict[str, np.ndarray] = {}
    for name in spec.variables:
        idx = rng.integers(0, n_levels, size=n_rows)
        level_idx[name] = idx
        latent += spec.strengths[name] * scores[idx]
    u = spec.scale * latent + rng.logistic(0.0, 1.0, size=n_rows)

    t1, t2 = spec.thresholds
    labels = np.where(u < t1, "Fail", np.where(u < t2, "Pass", "Distinction"))

    level_names = tuple(f"lv{k}" for k in range(n_levels))
    schema = tuple(ColumnSchema(name, level_names) for name in spec.variables)
    cells = tuple(
        tuple(level_names[level_idx[name][i]] for name in spec.variables)
        for i in range(n_rows)
    )
    return TabularDataset(
        schema=schema,
        cells=cells,
        labels=tuple(labels.tolist()),
        target_levels=TARGET_MULTICLASS,
        course_tag=spec.course_tag,
    )
