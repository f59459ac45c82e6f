"""Independent reference implementations used as oracles.

Everything here is written in plain Python on purpose: loops and Counters
instead of the vectorized code paths under test, so agreement between the
two is meaningful.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np

from rashomon_vi.ensembles import TrainedModel
from rashomon_vi.search import ModelSpace, Trial


def py_impurity(labels: list[int], kind: str) -> float:
    n = len(labels)
    probs = [c / n for c in Counter(labels).values()]
    if kind == "gini":
        return 1.0 - sum(p * p for p in probs)
    return -sum(p * math.log2(p) for p in probs if p > 0)


def brute_force_best_split(
    X: np.ndarray,
    y: np.ndarray,
    columns: list[int],
    kind: str = "gini",
    min_samples_leaf: int = 1,
) -> tuple[int, float] | None:
    """Enumerate every column partition explicitly; the tie rule is lowest
    column index, matching the contract of best_split."""
    labels = [int(v) for v in y]
    parent = py_impurity(labels, kind)
    n = len(labels)
    scored: list[tuple[int, float]] = []
    for col in sorted(columns):
        left = [labels[i] for i in range(n) if X[i, col] == 0.0]
        right = [labels[i] for i in range(n) if X[i, col] != 0.0]
        if len(left) < min_samples_leaf or len(right) < min_samples_leaf:
            continue
        decrease = (
            parent
            - len(left) / n * py_impurity(left, kind)
            - len(right) / n * py_impurity(right, kind)
        )
        if decrease > 0.0:
            scored.append((col, decrease))
    if not scored:
        return None
    # near-ties count as ties, lowest column wins (same rule as best_split)
    top = max(d for _, d in scored)
    return next((col, d) for col, d in scored if d >= top - 1e-12)


def naive_tree_predict(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int,
    min_samples_leaf: int,
    min_samples_split: int,
    kind: str,
    probe: np.ndarray,
) -> np.ndarray:
    """Grow a CART on (X, y) with independent code and predict probe rows."""

    def distribution(rows: list[int]) -> list[float]:
        counts = Counter(int(y[i]) for i in rows)
        return [counts.get(k, 0) / len(rows) for k in range(n_classes)]

    def grow(rows: list[int], depth: int):
        pure = len({int(y[i]) for i in rows}) <= 1
        if depth >= max_depth or len(rows) < min_samples_split or pure:
            return {"dist": distribution(rows)}
        found = brute_force_best_split(
            X[rows], y[rows], list(range(X.shape[1])), kind, min_samples_leaf
        )
        if found is None:
            return {"dist": distribution(rows)}
        col = found[0]
        left = [i for i in rows if X[i, col] == 0.0]
        right = [i for i in rows if X[i, col] != 0.0]
        return {
            "col": col,
            "left": grow(left, depth + 1),
            "right": grow(right, depth + 1),
        }

    root = grow(list(range(X.shape[0])), 0)

    def walk(row: np.ndarray) -> list[float]:
        node = root
        while "col" in node:
            node = node["right"] if row[node["col"]] != 0.0 else node["left"]
        return node["dist"]

    return np.array([walk(row) for row in probe])


def exhaustive_tau(order1: list, order2: list) -> float:
    """Pair-by-pair Kendall tau-a for two strict rankings."""
    n = len(order1)
    pos1 = {v: i for i, v in enumerate(order1)}
    pos2 = {v: i for i, v in enumerate(order2)}
    concordant = discordant = 0
    items = list(order1)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = items[i], items[j]
            s1 = pos1[a] - pos1[b]
            s2 = pos2[a] - pos2[b]
            if s1 * s2 > 0:
                concordant += 1
            else:
                discordant += 1
    return (concordant - discordant) / (n * (n - 1) / 2)


def stub_space(accuracies: list[float]) -> ModelSpace:
    """A ModelSpace of payload-free models, for set-extraction tests."""
    models = [
        TrainedModel(model_id=i, family="dtree", params=None, seed=0,
                     valid_accuracy=float(a))
        for i, a in enumerate(accuracies)
    ]
    trials = [
        Trial(family="dtree", params={}, seed=0, valid_accuracy=float(a), origin="random")
        for a in accuracies
    ]
    return ModelSpace(models=models, trials=trials, fingerprint="stub", master_seed=0)


def check_rashomon_invariants(space: ModelSpace, epsilons: list[float]) -> None:
    """Property oracle for set extraction, shared with the acceptance suite.

    Checks reference optimality and tie-breaking, membership soundness and
    completeness at each epsilon, size bounds, and nestedness as epsilon grows.
    """
    from rashomon_vi.rashomon import extract_rashomon, select_reference

    losses = [1.0 - m.valid_accuracy for m in space.models]
    best = min(losses)
    ref = select_reference(space)
    assert losses[ref] == best
    assert ref == min(i for i, l in enumerate(losses) if l == best)
    previous = None
    for eps in sorted(epsilons):
        rset = extract_rashomon(space, eps)
        members = set(rset.member_ids)
        assert rset.reference_id == ref
        assert ref in members
        for i, loss in enumerate(losses):
            assert (i in members) == (loss <= best + eps)
        assert 1 <= rset.size <= len(space.models)
        assert list(rset.member_ids) == sorted(members)
        if previous is not None:
            assert previous <= members
        previous = members
