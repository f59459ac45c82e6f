"""CART-style decision tree over one-hot encoded categorical data.

Splits are binary tests on single 0/1 columns, searched exhaustively with a
closed-form count kernel: for a candidate column c, the class counts of the
``c == 1`` side are one matrix product away, so a node evaluates every
candidate column at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import EncodedMatrix

IMPURITY_KINDS = ("gini", "entropy")


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 6
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    impurity: str = "gini"

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.min_samples_split < 2:
            raise ValueError(f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if self.impurity not in IMPURITY_KINDS:
            raise ValueError(f"impurity must be one of {IMPURITY_KINDS}, got {self.impurity!r}")
        # min_samples_split < 2 * min_samples_leaf is allowed; the leaf
        # constraint then dominates inside best_split.

    def to_dict(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "min_samples_split": self.min_samples_split,
            "impurity": self.impurity,
        }


@dataclass(frozen=True)
class TreeNode:
    depth: int
    column: int = -1          # -1 marks a leaf
    left: int = -1
    right: int = -1
    dist: tuple[float, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return self.column < 0


def impurity(class_counts, kind: str = "gini") -> float:
    """Gini or base-2 entropy of a class-count vector."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.ndim != 1:
        raise ValueError("class_counts must be one-dimensional")
    if (counts < 0).any():
        raise ValueError("class counts must be non-negative")
    if counts.sum() <= 0:
        raise ValueError("class counts must not all be zero")
    return float(_impurity_rows(counts[None, :], kind)[0])


def _impurity_rows(counts: np.ndarray, kind: str) -> np.ndarray:
    """Impurity of each row of a (m, k) count matrix; all-zero rows give 0."""
    if kind not in IMPURITY_KINDS:
        raise ValueError(f"impurity must be one of {IMPURITY_KINDS}, got {kind!r}")
    totals = counts.sum(axis=1, keepdims=True)
    safe = np.where(totals > 0, totals, 1.0)
    p = counts / safe
    if kind == "gini":
        out = 1.0 - np.square(p).sum(axis=1)
    else:
        logp = np.zeros_like(p)
        np.log2(p, out=logp, where=p > 0)
        out = -(p * logp).sum(axis=1)
    return np.where(totals[:, 0] > 0, out, 0.0)


def best_split(
    matrix: EncodedMatrix,
    row_subset: np.ndarray,
    column_subset: np.ndarray,
    *,
    impurity_kind: str = "gini",
    min_samples_leaf: int = 1,
) -> tuple[int, float] | None:
    """Column maximizing weighted impurity decrease of its 0/1 partition.

    Returns None when no candidate yields a strictly positive decrease with
    both sides holding at least ``min_samples_leaf`` rows. Ties go to the
    lowest column index.
    """
    rows = np.asarray(row_subset, dtype=np.intp)
    if rows.size == 0:
        raise ValueError("row_subset must be non-empty")
    columns = np.sort(np.asarray(column_subset, dtype=np.intp))
    if columns.size == 0:
        return None

    y = matrix.labels[rows]
    onehot = np.zeros((rows.size, matrix.n_classes), dtype=np.float64)
    onehot[np.arange(rows.size), y] = 1.0
    return _best_split_counts(
        matrix.X[np.ix_(rows, columns)],
        onehot,
        columns,
        impurity_kind,
        min_samples_leaf,
    )


def _best_split_counts(
    X_node: np.ndarray,
    y_onehot: np.ndarray,
    columns: np.ndarray,
    impurity_kind: str,
    min_samples_leaf: int,
) -> tuple[int, float] | None:
    n = X_node.shape[0]
    parent = y_onehot.sum(axis=0)
    right = X_node.T @ y_onehot
    left = parent - right
    n_right = right.sum(axis=1)
    n_left = n - n_right

    parent_imp = _impurity_rows(parent[None, :], impurity_kind)[0]
    child = (
        n_left * _impurity_rows(left, impurity_kind)
        + n_right * _impurity_rows(right, impurity_kind)
    ) / n
    decrease = parent_imp - child

    valid = (
        (n_left >= min_samples_leaf)
        & (n_right >= min_samples_leaf)
        & (decrease > 0.0)
    )
    if not valid.any():
        return None
    scored = np.where(valid, decrease, -np.inf)
    # Mathematically tied columns can differ in the last ulp depending on
    # summation order; treating near-ties as ties keeps the lowest-column
    # rule independent of rounding. First True -> lowest column after sort.
    best = int(np.argmax(scored >= scored.max() - 1e-12))
    return int(columns[best]), float(decrease[best])


@dataclass
class DecisionTree:
    """Fitted tree: a node array rooted at index 0."""

    nodes: list[TreeNode]
    params: TreeParams
    seed: int
    n_features: int
    n_classes: int
    _column_arr: np.ndarray = field(init=False, repr=False)
    _left_arr: np.ndarray = field(init=False, repr=False)
    _right_arr: np.ndarray = field(init=False, repr=False)
    _dist_arr: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._column_arr = np.array([node.column for node in self.nodes], dtype=np.intp)
        self._left_arr = np.array([node.left for node in self.nodes], dtype=np.intp)
        self._right_arr = np.array([node.right for node in self.nodes], dtype=np.intp)
        dist = np.zeros((len(self.nodes), self.n_classes))
        for i, node in enumerate(self.nodes):
            if node.is_leaf:
                dist[i] = node.dist
        self._dist_arr = dist

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def used_columns(self) -> set[int]:
        return {node.column for node in self.nodes if not node.is_leaf}

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"row width {X.shape[1]} does not match training width {self.n_features}"
            )
        pos = np.zeros(X.shape[0], dtype=np.intp)
        while True:
            cols = self._column_arr[pos]
            active = np.nonzero(cols >= 0)[0]
            if active.size == 0:
                break
            at = pos[active]
            goes_right = X[active, cols[active]] != 0.0
            pos[active] = np.where(
                goes_right, self._right_arr[at], self._left_arr[at]
            )
        return self._dist_arr[pos]

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "depth": node.depth,
                    "column": node.column,
                    "left": node.left,
                    "right": node.right,
                    "dist": list(node.dist),
                }
                for node in self.nodes
            ],
            "params": self.params.to_dict(),
            "seed": self.seed,
            "n_features": self.n_features,
            "n_classes": self.n_classes,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DecisionTree":
        nodes = [
            TreeNode(
                depth=item["depth"],
                column=item["column"],
                left=item["left"],
                right=item["right"],
                dist=tuple(item["dist"]),
            )
            for item in payload["nodes"]
        ]
        return cls(
            nodes=nodes,
            params=TreeParams(**payload["params"]),
            seed=payload["seed"],
            n_features=payload["n_features"],
            n_classes=payload["n_classes"],
        )


def fit_tree(
    matrix: EncodedMatrix,
    params: TreeParams,
    seed: int,
    *,
    rng: np.random.Generator | None = None,
    feature_fraction: float = 1.0,
    bootstrap_rows: np.ndarray | None = None,
) -> DecisionTree:
    """Grow a tree by recursive exhaustive split search.

    ``rng``/``feature_fraction``/``bootstrap_rows`` exist for forests: the
    generator drives per-node column subsampling, and duplicated bootstrap
    row indices weight the counts. A plain call is fully deterministic.
    """
    if matrix.n_rows == 0:
        raise ValueError("matrix must be non-empty")
    n = matrix.n_rows
    width = matrix.width
    onehot = np.zeros((n, matrix.n_classes), dtype=np.float64)
    onehot[np.arange(n), matrix.labels] = 1.0

    n_candidates = width
    if feature_fraction < 1.0:
        n_candidates = max(1, int(np.ceil(feature_fraction * width)))
    all_columns = np.arange(width, dtype=np.intp)

    rows0 = (
        np.arange(n, dtype=np.intp)
        if bootstrap_rows is None
        else np.asarray(bootstrap_rows, dtype=np.intp)
    )

    nodes: list[TreeNode] = []

    def leaf(depth: int, counts: np.ndarray) -> int:
        dist = counts / counts.sum()
        nodes.append(TreeNode(depth=depth, dist=tuple(float(v) for v in dist)))
        return len(nodes) - 1

    def grow(rows: np.ndarray, depth: int) -> int:
        counts = onehot[rows].sum(axis=0)
        pure = np.count_nonzero(counts) <= 1
        if depth >= params.max_depth or rows.size < params.min_samples_split or pure:
            return leaf(depth, counts)

        if n_candidates < width:
            columns = np.sort(rng.choice(width, size=n_candidates, replace=False))
        else:
            columns = all_columns
        found = _best_split_counts(
            matrix.X[np.ix_(rows, columns)],
            onehot[rows],
            columns,
            params.impurity,
            params.min_samples_leaf,
        )
        if found is None:
            return leaf(depth, counts)
        column, _ = found

        mask = matrix.X[rows, column] != 0.0
        index = len(nodes)
        nodes.append(TreeNode(depth=depth))  # placeholder until children exist
        left = grow(rows[~mask], depth + 1)
        right = grow(rows[mask], depth + 1)
        nodes[index] = TreeNode(depth=depth, column=column, left=left, right=right)
        return index

    grow(rows0, 0)
    return DecisionTree(
        nodes=nodes,
        params=params,
        seed=seed,
        n_features=width,
        n_classes=matrix.n_classes,
    )


def predict_tree(tree: DecisionTree, row: np.ndarray) -> np.ndarray:
    """Class distribution of the leaf the row routes to."""
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] != tree.n_features:
        raise ValueError(
            f"expected a row of width {tree.n_features}, got shape {row.shape}"
        )
    node = tree.nodes[0]
    while not node.is_leaf:
        node = tree.nodes[node.right if row[node.column] != 0.0 else node.left]
    return np.asarray(node.dist, dtype=np.float64)
