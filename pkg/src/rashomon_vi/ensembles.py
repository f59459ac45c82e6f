"""Tree ensembles sharing the one-hot split kernel: bagged forests and
gradient-boosted trees with depth-wise or leaf-wise growth.

Four model families are exposed under stable tags so downstream reports can
break results down by family: ``dtree``, ``rforest``, ``gbdt_depthwise``,
``gbdt_leafwise``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .dataset import EncodedMatrix
from .seeding import seed_sequence
from .trees import DecisionTree, TreeParams, fit_tree

FAMILIES = ("dtree", "rforest", "gbdt_depthwise", "gbdt_leafwise")

_EPS = 1e-12


@dataclass(frozen=True)
class ForestParams:
    n_trees: int
    max_depth: int = 6
    min_samples_leaf: int = 1
    feature_fraction: float = 1.0
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if not 0.0 < self.feature_fraction <= 1.0:
            raise ValueError(
                f"feature_fraction must be in (0, 1], got {self.feature_fraction}"
            )

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "feature_fraction": self.feature_fraction,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class GbdtParams:
    n_rounds: int
    learning_rate: float
    growth: str
    max_depth: int | None = None
    max_leaves: int | None = None
    min_samples_leaf: int = 1
    l2_reg: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_rounds < 0:
            raise ValueError(f"n_rounds must be >= 0, got {self.n_rounds}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if self.l2_reg < 0.0:
            raise ValueError(f"l2_reg must be >= 0, got {self.l2_reg}")
        if self.growth == "depthwise":
            if self.max_depth is None or self.max_leaves is not None:
                raise ValueError("depthwise growth takes max_depth and no max_leaves")
            if self.max_depth < 1:
                raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        elif self.growth == "leafwise":
            if self.max_leaves is None or self.max_depth is not None:
                raise ValueError("leafwise growth takes max_leaves and no max_depth")
            if self.max_leaves < 2:
                raise ValueError(f"max_leaves must be >= 2, got {self.max_leaves}")
        else:
            raise ValueError(f"growth must be 'depthwise' or 'leafwise', got {self.growth!r}")

    def to_dict(self) -> dict:
        return {
            "n_rounds": self.n_rounds,
            "learning_rate": self.learning_rate,
            "growth": self.growth,
            "max_depth": self.max_depth,
            "max_leaves": self.max_leaves,
            "min_samples_leaf": self.min_samples_leaf,
            "l2_reg": self.l2_reg,
            "seed": self.seed,
        }


@dataclass
class Forest:
    trees: list[DecisionTree]
    params: ForestParams
    n_features: int
    n_classes: int

    def used_columns(self) -> set[int]:
        used: set[int] = set()
        for tree in self.trees:
            used |= tree.used_columns()
        return used

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"row width {X.shape[1]} does not match training width {self.n_features}"
            )
        stacked = np.stack([tree.predict_proba(X) for tree in self.trees])
        # Sorting before the reduction makes the average bit-identical under
        # any permutation of the trees.
        stacked.sort(axis=0)
        return stacked.sum(axis=0) / len(self.trees)

    def to_dict(self) -> dict:
        return {
            "trees": [tree.to_dict() for tree in self.trees],
            "params": self.params.to_dict(),
            "n_features": self.n_features,
            "n_classes": self.n_classes,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Forest":
        return cls(
            trees=[DecisionTree.from_dict(t) for t in payload["trees"]],
            params=ForestParams(**payload["params"]),
            n_features=payload["n_features"],
            n_classes=payload["n_classes"],
        )


def fit_forest(train: EncodedMatrix, p: ForestParams) -> Forest:
    """Bag ``n_trees`` trees with per-node column subsampling."""
    if train.n_rows == 0:
        raise ValueError("training matrix must be non-empty")
    tree_params = TreeParams(
        max_depth=p.max_depth,
        min_samples_leaf=p.min_samples_leaf,
        min_samples_split=2,
        impurity="gini",
    )
    n = train.n_rows
    children = seed_sequence(p.seed, "forest").spawn(p.n_trees)
    trees = []
    for t, child in enumerate(children):
        rng = np.random.default_rng(child)
        rows = rng.integers(0, n, size=n) if p.bootstrap else None
        trees.append(
            fit_tree(
                train,
                tree_params,
                seed=t,
                rng=rng,
                feature_fraction=p.feature_fraction,
                bootstrap_rows=rows,
            )
        )
    return Forest(trees=trees, params=p, n_features=train.width, n_classes=train.n_classes)


# ----------------------------------------------------------------------------
# Gradient boosting


@dataclass(frozen=True)
class RegNode:
    depth: int
    column: int = -1
    left: int = -1
    right: int = -1
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.column < 0


@dataclass
class RegressionTree:
    nodes: list[RegNode]
    n_features: int

    def used_columns(self) -> set[int]:
        return {node.column for node in self.nodes if not node.is_leaf}

    def predict(self, X: np.ndarray) -> np.ndarray:
        column = np.array([n.column for n in self.nodes], dtype=np.intp)
        left = np.array([n.left for n in self.nodes], dtype=np.intp)
        right = np.array([n.right for n in self.nodes], dtype=np.intp)
        value = np.array([n.value for n in self.nodes])
        pos = np.zeros(X.shape[0], dtype=np.intp)
        while True:
            cols = column[pos]
            active = np.nonzero(cols >= 0)[0]
            if active.size == 0:
                break
            at = pos[active]
            goes_right = X[active, cols[active]] != 0.0
            pos[active] = np.where(goes_right, right[at], left[at])
        return value[pos]

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "depth": n.depth,
                    "column": n.column,
                    "left": n.left,
                    "right": n.right,
                    "value": n.value,
                }
                for n in self.nodes
            ],
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RegressionTree":
        nodes = [
            RegNode(
                depth=item["depth"],
                column=item["column"],
                left=item["left"],
                right=item["right"],
                value=item["value"],
            )
            for item in payload["nodes"]
        ]
        return cls(nodes=nodes, n_features=payload["n_features"])


def _reg_split_gain(
    X_node: np.ndarray, g: np.ndarray, h: np.ndarray, l2: float, msl: int
) -> tuple[int, float] | None:
    """Best 0/1 column by second-order gain; None when nothing improves."""
    n = X_node.shape[0]
    G, H = g.sum(), h.sum()
    G_right = X_node.T @ g
    H_right = X_node.T @ h
    n_right = X_node.sum(axis=0)
    G_left, H_left, n_left = G - G_right, H - H_right, n - n_right

    def score(gs, hs):
        return np.square(gs) / np.maximum(hs + l2, _EPS)

    gain = 0.5 * (score(G_left, H_left) + score(G_right, H_right) - score(G, H))
    valid = (n_left >= msl) & (n_right >= msl) & (gain > 0.0)
    if not valid.any():
        return None
    best = int(np.argmax(np.where(valid, gain, -np.inf)))
    return best, float(gain[best])


class _GrowingNode:
    __slots__ = ("depth", "rows", "column", "left", "right", "value")

    def __init__(self, depth: int, rows: np.ndarray):
        self.depth = depth
        self.rows = rows
        self.column = -1
        self.left = -1
        self.right = -1
        self.value = 0.0


def _fit_reg_tree(X: np.ndarray, g: np.ndarray, h: np.ndarray, p: GbdtParams) -> RegressionTree:
    if p.growth == "depthwise":
        nodes = _grow_depthwise(X, g, h, p)
    else:
        nodes = _grow_leafwise(X, g, h, p)
    frozen = [
        RegNode(depth=n.depth, column=n.column, left=n.left, right=n.right, value=n.value)
        for n in nodes
    ]
    return RegressionTree(nodes=frozen, n_features=X.shape[1])


def _leaf_value(g: np.ndarray, h: np.ndarray, rows: np.ndarray, l2: float) -> float:
    return float(-g[rows].sum() / max(h[rows].sum() + l2, _EPS))


def _grow_depthwise(X, g, h, p: GbdtParams) -> list[_GrowingNode]:
    nodes = [_GrowingNode(0, np.arange(X.shape[0], dtype=np.intp))]
    frontier = [0]
    while frontier:
        next_frontier = []
        for idx in frontier:
            node = nodes[idx]
            if node.depth >= p.max_depth:
                continue
            found = _reg_split_gain(X[node.rows], g[node.rows], h[node.rows], p.l2_reg, p.min_samples_leaf)
            if found is None:
                continue
            column, _ = found
            mask = X[node.rows, column] != 0.0
            node.column = column
            node.left = len(nodes)
            nodes.append(_GrowingNode(node.depth + 1, node.rows[~mask]))
            node.right = len(nodes)
            nodes.append(_GrowingNode(node.depth + 1, node.rows[mask]))
            next_frontier.extend((node.left, node.right))
        frontier = next_frontier
    _finalize_leaves(nodes, g, h, p.l2_reg)
    return nodes


def _grow_leafwise(X, g, h, p: GbdtParams) -> list[_GrowingNode]:
    nodes = [_GrowingNode(0, np.arange(X.shape[0], dtype=np.intp))]
    heap: list[tuple[float, int, int]] = []  # (-gain, node index, column)

    def consider(idx: int) -> None:
        node = nodes[idx]
        found = _reg_split_gain(X[node.rows], g[node.rows], h[node.rows], p.l2_reg, p.min_samples_leaf)
        if found is not None:
            column, gain = found
            # node index breaks gain ties toward the earliest-created leaf
            heapq.heappush(heap, (-gain, idx, column))

    consider(0)
    n_leaves = 1
    while heap and n_leaves < p.max_leaves:
        _, idx, column = heapq.heappop(heap)
        node = nodes[idx]
        mask = X[node.rows, column] != 0.0
        node.column = column
        node.left = len(nodes)
        nodes.append(_GrowingNode(node.depth + 1, node.rows[~mask]))
        node.right = len(nodes)
        nodes.append(_GrowingNode(node.depth + 1, node.rows[mask]))
        n_leaves += 1
        consider(node.left)
        consider(node.right)
    _finalize_leaves(nodes, g, h, p.l2_reg)
    return nodes


def _finalize_leaves(nodes: list[_GrowingNode], g, h, l2: float) -> None:
    for node in nodes:
        if node.column < 0:
            node.value = _leaf_value(g, h, node.rows, l2)
        node.rows = None


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500, 500)))


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class Gbdt:
    params: GbdtParams
    base_scores: list[float]
    rounds: list[list[RegressionTree]]
    n_features: int
    n_classes: int
    train_loss_curve: list[float]

    def used_columns(self) -> set[int]:
        used: set[int] = set()
        for trees in self.rounds:
            for tree in trees:
                used |= tree.used_columns()
        return used

    def _scores(self, X: np.ndarray) -> np.ndarray:
        if self.n_classes == 2:
            scores = np.full(X.shape[0], self.base_scores[0])
            for trees in self.rounds:
                scores += self.params.learning_rate * trees[0].predict(X)
            return scores
        scores = np.tile(np.asarray(self.base_scores), (X.shape[0], 1))
        for trees in self.rounds:
            for k, tree in enumerate(trees):
                scores[:, k] += self.params.learning_rate * tree.predict(X)
        return scores

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"row width {X.shape[1]} does not match training width {self.n_features}"
            )
        scores = self._scores(X)
        if self.n_classes == 2:
            p1 = _sigmoid(scores)
            return np.column_stack([1.0 - p1, p1])
        return _softmax(scores)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "base_scores": list(self.base_scores),
            "rounds": [[tree.to_dict() for tree in trees] for trees in self.rounds],
            "n_features": self.n_features,
            "n_classes": self.n_classes,
            "train_loss_curve": list(self.train_loss_curve),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Gbdt":
        return cls(
            params=GbdtParams(**payload["params"]),
            base_scores=list(payload["base_scores"]),
            rounds=[
                [RegressionTree.from_dict(t) for t in trees]
                for trees in payload["rounds"]
            ],
            n_features=payload["n_features"],
            n_classes=payload["n_classes"],
            train_loss_curve=list(payload["train_loss_curve"]),
        )


def fit_gbdt(train: EncodedMatrix, p: GbdtParams) -> Gbdt:
    """Additive boosting on logistic (binary) or softmax (multiclass)
    gradients; leaf values are Newton steps with l2 regularization."""
    if train.n_rows == 0:
        raise ValueError("training matrix must be non-empty")
    if train.n_classes < 2:
        raise ValueError("boosting needs at least 2 classes")

    n = train.n_rows
    K = train.n_classes
    y = train.labels
    priors = np.clip(np.bincount(y, minlength=K) / n, _EPS, None)

    rounds: list[list[RegressionTree]] = []
    losses: list[float] = []

    if K == 2:
        base = [float(np.log(priors[1] / priors[0]))]
        scores = np.full(n, base[0])
        y1 = (y == 1).astype(np.float64)

        def loss() -> float:
            prob = np.clip(_sigmoid(scores), _EPS, 1 - _EPS)
            return float(-np.mean(y1 * np.log(prob) + (1 - y1) * np.log(1 - prob)))

        losses.append(loss())
        for _ in range(p.n_rounds):
            prob = _sigmoid(scores)
            g = prob - y1
            h = prob * (1.0 - prob)
            tree = _fit_reg_tree(train.X, g, h, p)
            scores = scores + p.learning_rate * tree.predict(train.X)
            rounds.append([tree])
            losses.append(loss())
    else:
        base = [float(v) for v in np.log(priors)]
        scores = np.tile(np.asarray(base), (n, 1))
        onehot = np.zeros((n, K))
        onehot[np.arange(n), y] = 1.0

        def loss() -> float:
            prob = np.clip(_softmax(scores)[np.arange(n), y], _EPS, None)
            return float(-np.mean(np.log(prob)))

        losses.append(loss())
        for _ in range(p.n_rounds):
            prob = _softmax(scores)
            trees_k = []
            for k in range(K):
                g = prob[:, k] - onehot[:, k]
                h = prob[:, k] * (1.0 - prob[:, k])
                trees_k.append(_fit_reg_tree(train.X, g, h, p))
            for k, tree in enumerate(trees_k):
                scores[:, k] = scores[:, k] + p.learning_rate * tree.predict(train.X)
            rounds.append(trees_k)
            losses.append(loss())

    return Gbdt(
        params=p,
        base_scores=base,
        rounds=rounds,
        n_features=train.width,
        n_classes=K,
        train_loss_curve=losses,
    )


# ----------------------------------------------------------------------------
# Trained-model wrapper shared by the search and reporting layers


@dataclass(frozen=True)
class TrainedModel:
    """A fitted classifier of any family plus its bookkeeping."""

    model_id: int
    family: str
    params: object
    seed: int
    valid_accuracy: float
    payload: object = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not 0.0 <= self.valid_accuracy <= 1.0:
            raise ValueError(f"valid_accuracy must be in [0, 1], got {self.valid_accuracy}")


def predict(model: TrainedModel, rows: EncodedMatrix) -> np.ndarray:
    """Per-row class-probability vectors from the model's payload."""
    if model.payload is None:
        raise ValueError(f"model {model.model_id} has no fitted payload")
    return model.payload.predict_proba(rows.X)


def accuracy(model: TrainedModel, data: EncodedMatrix) -> float:
    """Fraction of rows whose argmax prediction matches the label.

    Empirical loss is 1 - accuracy everywhere downstream.
    """
    if data.n_rows == 0:
        raise ValueError("data must be non-empty")
    probs = predict(model, data)
    return float(np.mean(np.argmax(probs, axis=1) == data.labels))


def model_used_variables(model: TrainedModel, matrix: EncodedMatrix) -> set[str]:
    """Variables whose one-hot group contains at least one split column."""
    used_cols = model.payload.used_columns()
    return {
        name
        for name, cols in matrix.group_map.items()
        if any(c in used_cols for c in cols)
    }


def payload_to_dict(family: str, payload) -> dict:
    return payload.to_dict()


def payload_from_dict(family: str, data: dict):
    if family == "dtree":
        return DecisionTree.from_dict(data)
    if family == "rforest":
        return Forest.from_dict(data)
    if family in ("gbdt_depthwise", "gbdt_leafwise"):
        return Gbdt.from_dict(data)
    raise ValueError(f"unknown family {family!r}")
