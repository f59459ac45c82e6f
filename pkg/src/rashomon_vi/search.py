"""Hyperparameter search over the four model families.

Two samplers build the model space: plain random search (round-robin over
families) and a per-family Bayesian optimizer whose surrogate is a small
regression forest over encoded hyperparameters, with expected improvement
estimated from the per-tree prediction spread.

Every trial's randomness is derived from the master seed and the trial's
coordinates (family, origin, index), never from evaluation order, so results
are identical whether trials run serially or on a worker pool.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import EncodedMatrix, SplitPair, one_hot_encode
from .ensembles import (
    FAMILIES,
    ForestParams,
    GbdtParams,
    TrainedModel,
    fit_forest,
    fit_gbdt,
    payload_from_dict,
    payload_to_dict,
)
from .seeding import derive_rng, derive_seed
from .trees import TreeParams, fit_tree

REGISTRY_COLUMNS = ("model_id", "family", "origin", "params", "seed", "valid_accuracy")


@dataclass(frozen=True)
class Dimension:
    """One searchable hyperparameter: an integer/real range or a choice list."""

    name: str
    kind: str
    low: float | None = None
    high: float | None = None
    choices: tuple | None = None
    scale: str = "linear"

    def __post_init__(self):
        if self.kind not in ("integer", "real", "choice"):
            raise ValueError(f"unknown dimension kind {self.kind!r}")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"unknown scale {self.scale!r}")
        if self.kind == "choice":
            if not self.choices:
                raise ValueError(f"dimension {self.name!r} has an empty choice list")
        else:
            if self.low is None or self.high is None or not self.low < self.high:
                raise ValueError(f"dimension {self.name!r} has a degenerate range")
            if self.scale == "log" and self.low <= 0:
                raise ValueError(f"log-scaled dimension {self.name!r} needs low > 0")

    def sample(self, rng: np.random.Generator):
        if self.kind == "choice":
            return self.choices[int(rng.integers(len(self.choices)))]
        if self.scale == "log":
            raw = math.exp(rng.uniform(math.log(self.low), math.log(self.high)))
        else:
            raw = rng.uniform(self.low, self.high)
        if self.kind == "integer":
            return int(min(max(round(raw), self.low), self.high))
        return float(raw)

    def encode(self, value) -> float:
        """Map a sampled value into [0, 1] for the surrogate."""
        if self.kind == "choice":
            if len(self.choices) == 1:
                return 0.0
            return self.choices.index(value) / (len(self.choices) - 1)
        if self.scale == "log":
            lo, hi = math.log(self.low), math.log(self.high)
            return (math.log(value) - lo) / (hi - lo)
        return (value - self.low) / (self.high - self.low)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "low": self.low,
            "high": self.high,
            "choices": list(self.choices) if self.choices is not None else None,
            "scale": self.scale,
        }


@dataclass(frozen=True)
class ParamSpace:
    dims: dict[str, tuple[Dimension, ...]]

    def __post_init__(self):
        for family, dims in self.dims.items():
            if family not in FAMILIES:
                raise ValueError(f"unknown family {family!r}")
            if not dims:
                raise ValueError(f"family {family!r} has no dimensions")
            names = [d.name for d in dims]
            if len(set(names)) != len(names):
                raise ValueError(f"family {family!r} has duplicate dimension names")

    def families(self) -> tuple[str, ...]:
        return tuple(f for f in FAMILIES if f in self.dims)

    def sample_family(self, family: str, rng: np.random.Generator) -> dict:
        return {d.name: d.sample(rng) for d in self.dims[family]}

    def encode_params(self, family: str, sampled: dict) -> np.ndarray:
        return np.array([d.encode(sampled[d.name]) for d in self.dims[family]])

    def to_dict(self) -> dict:
        return {
            family: [d.to_dict() for d in dims] for family, dims in self.dims.items()
        }


def default_param_space() -> ParamSpace:
    """Declared default ranges for all four families."""
    return ParamSpace(
        dims={
            "dtree": (
                Dimension("max_depth", "integer", 1, 12),
                Dimension("min_samples_leaf", "integer", 1, 32, scale="log"),
                Dimension("min_samples_split", "integer", 2, 64, scale="log"),
                Dimension("impurity", "choice", choices=("gini", "entropy")),
            ),
            "rforest": (
                Dimension("n_trees", "integer", 20, 300, scale="log"),
                Dimension("max_depth", "integer", 2, 12),
                Dimension("min_samples_leaf", "integer", 1, 32, scale="log"),
                Dimension("feature_fraction", "real", 0.2, 1.0),
            ),
            "gbdt_depthwise": (
                Dimension("n_rounds", "integer", 10, 300, scale="log"),
                Dimension("learning_rate", "real", 0.01, 0.3, scale="log"),
                Dimension("max_depth", "integer", 2, 8),
            ),
            "gbdt_leafwise": (
                Dimension("n_rounds", "integer", 10, 300, scale="log"),
                Dimension("learning_rate", "real", 0.01, 0.3, scale="log"),
                Dimension("max_leaves", "integer", 4, 64, scale="log"),
            ),
        }
    )


@dataclass(frozen=True)
class Trial:
    family: str
    params: dict
    seed: int
    valid_accuracy: float
    origin: str

    def __post_init__(self):
        if self.origin not in ("random", "bayes"):
            raise ValueError(f"origin must be 'random' or 'bayes', got {self.origin!r}")
        if not 0.0 <= self.valid_accuracy <= 1.0:
            raise ValueError(f"valid_accuracy must be in [0, 1], got {self.valid_accuracy}")


@dataclass(frozen=True)
class BayesSettings:
    n_iter: int = 30
    n_init: int = 26

    def __post_init__(self):
        if self.n_iter < 1:
            raise ValueError(f"n_iter must be >= 1, got {self.n_iter}")
        if self.n_init < 2:
            raise ValueError(f"n_init must be >= 2, got {self.n_init}")


@dataclass(frozen=True)
class SearchConfig:
    n_random: int = 200
    bayes: BayesSettings | None = field(default_factory=BayesSettings)
    param_space: ParamSpace = field(default_factory=default_param_space)

    def total_models(self) -> int:
        total = self.n_random
        if self.bayes is not None:
            n_families = len(self.param_space.families())
            total += (self.bayes.n_iter + self.bayes.n_init) * n_families
        return total

    def describe(self) -> dict:
        return {
            "n_random": self.n_random,
            "bayes": None
            if self.bayes is None
            else {"n_iter": self.bayes.n_iter, "n_init": self.bayes.n_init},
            "param_space": self.param_space.to_dict(),
        }


def fit_candidate(
    family: str, sampled: dict, seed: int, train: EncodedMatrix
) -> tuple[object, object]:
    """Materialize family params from a sampled dict and fit the payload."""
    if family == "dtree":
        params = TreeParams(
            max_depth=sampled["max_depth"],
            min_samples_leaf=sampled["min_samples_leaf"],
            min_samples_split=sampled["min_samples_split"],
            impurity=sampled["impurity"],
        )
        return params, fit_tree(train, params, seed)
    if family == "rforest":
        params = ForestParams(
            n_trees=sampled["n_trees"],
            max_depth=sampled["max_depth"],
            min_samples_leaf=sampled["min_samples_leaf"],
            feature_fraction=sampled["feature_fraction"],
            bootstrap=True,
            seed=seed,
        )
        return params, fit_forest(train, params)
    if family == "gbdt_depthwise":
        params = GbdtParams(
            n_rounds=sampled["n_rounds"],
            learning_rate=sampled["learning_rate"],
            growth="depthwise",
            max_depth=sampled["max_depth"],
            seed=seed,
        )
        return params, fit_gbdt(train, params)
    if family == "gbdt_leafwise":
        params = GbdtParams(
            n_rounds=sampled["n_rounds"],
            learning_rate=sampled["learning_rate"],
            growth="leafwise",
            max_leaves=sampled["max_leaves"],
            seed=seed,
        )
        return params, fit_gbdt(train, params)
    raise ValueError(f"unknown family {family!r}")


def _valid_accuracy(payload, valid: EncodedMatrix) -> float:
    probs = payload.predict_proba(valid.X)
    return float(np.mean(np.argmax(probs, axis=1) == valid.labels))


def random_search(
    space: ParamSpace,
    n_evals: int,
    train: EncodedMatrix,
    valid: EncodedMatrix,
    master_seed: int,
    workers: int = 1,
) -> list[tuple[Trial, object, object]]:
    """Round-robin random sampling; returns (trial, params, payload) triples."""
    if n_evals < 1:
        raise ValueError(f"n_evals must be >= 1, got {n_evals}")
    families = space.families()

    def run_one(i: int) -> tuple[Trial, object, object]:
        family = families[i % len(families)]
        rng = derive_rng(master_seed, "random-search", i)
        sampled = space.sample_family(family, rng)
        seed = derive_seed(master_seed, "random-search-fit", i)
        params, payload = fit_candidate(family, sampled, seed, train)
        acc = _valid_accuracy(payload, valid)
        return Trial(family, sampled, seed, acc, "random"), params, payload

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_one, range(n_evals)))
    return [run_one(i) for i in range(n_evals)]


# ----------------------------------------------------------------------------
# Surrogate regression forest (continuous features, SSE splits)


class _SurrogateTree:
    __slots__ = ("column", "threshold", "left", "right", "value")

    def __init__(self):
        self.column = np.empty(0, dtype=np.intp)
        self.threshold = np.empty(0)
        self.left = np.empty(0, dtype=np.intp)
        self.right = np.empty(0, dtype=np.intp)
        self.value = np.empty(0)

    def predict(self, X: np.ndarray) -> np.ndarray:
        pos = np.zeros(X.shape[0], dtype=np.intp)
        while True:
            cols = self.column[pos]
            active = np.nonzero(cols >= 0)[0]
            if active.size == 0:
                break
            at = pos[active]
            goes_right = X[active, cols[active]] > self.threshold[at]
            pos[active] = np.where(goes_right, self.right[at], self.left[at])
        return self.value[pos]


def _sse_best_split(X: np.ndarray, y: np.ndarray) -> tuple[int, float] | None:
    """(column, threshold) minimizing summed squared error; None if no gain."""
    n, d = X.shape
    best = None
    best_sse = float(np.sum((y - y.mean()) ** 2)) - 1e-12
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs, ys = X[order, j], y[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys**2)
        boundary = np.nonzero(xs[1:] > xs[:-1])[0]  # split after these positions
        if boundary.size == 0:
            continue
        nl = boundary + 1
        nr = n - nl
        sse_l = csq[boundary] - csum[boundary] ** 2 / nl
        sse_r = (csq[-1] - csq[boundary]) - (csum[-1] - csum[boundary]) ** 2 / nr
        total = sse_l + sse_r
        k = int(np.argmin(total))
        if total[k] < best_sse:
            best_sse = float(total[k])
            thr = 0.5 * (xs[boundary[k]] + xs[boundary[k] + 1])
            best = (j, float(thr))
    return best


def _fit_surrogate_tree(X: np.ndarray, y: np.ndarray, max_depth: int = 8) -> _SurrogateTree:
    columns: list[int] = []
    thresholds: list[float] = []
    lefts: list[int] = []
    rights: list[int] = []
    values: list[float] = []

    def grow(rows: np.ndarray, depth: int) -> int:
        idx = len(columns)
        columns.append(-1)
        thresholds.append(0.0)
        lefts.append(-1)
        rights.append(-1)
        values.append(float(y[rows].mean()))
        if depth >= max_depth or rows.size < 4:
            return idx
        found = _sse_best_split(X[rows], y[rows])
        if found is None:
            return idx
        col, thr = found
        mask = X[rows, col] > thr
        columns[idx] = col
        thresholds[idx] = thr
        lefts[idx] = grow(rows[~mask], depth + 1)
        rights[idx] = grow(rows[mask], depth + 1)
        return idx

    grow(np.arange(X.shape[0], dtype=np.intp), 0)
    tree = _SurrogateTree()
    tree.column = np.array(columns, dtype=np.intp)
    tree.threshold = np.array(thresholds)
    tree.left = np.array(lefts, dtype=np.intp)
    tree.right = np.array(rights, dtype=np.intp)
    tree.value = np.array(values)
    return tree


_SURROGATE_TREES = 24
_CANDIDATE_POOL = 256


def _surrogate_predictions(
    Xh: np.ndarray, yh: np.ndarray, Xc: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Per-tree predictions for candidates, shape (trees, candidates)."""
    n = Xh.shape[0]
    preds = np.empty((_SURROGATE_TREES, Xc.shape[0]))
    for t in range(_SURROGATE_TREES):
        rows = rng.integers(0, n, size=n)
        preds[t] = _fit_surrogate_tree(Xh[rows], yh[rows]).predict(Xc)
    return preds


def _expected_improvement(mu: np.ndarray, sigma: np.ndarray, best: float) -> np.ndarray:
    """EI for minimization under a normal posterior approximation."""
    improve = best - mu
    ei = np.maximum(improve, 0.0)
    positive = sigma > 0
    z = np.zeros_like(mu)
    z[positive] = improve[positive] / sigma[positive]
    cdf = 0.5 * (1.0 + np.vectorize(math.erf)(z / math.sqrt(2.0)))
    pdf = np.exp(-0.5 * z**2) / math.sqrt(2.0 * math.pi)
    ei[positive] = improve[positive] * cdf[positive] + sigma[positive] * pdf[positive]
    return ei


def bayes_minimize(
    dims: tuple[Dimension, ...],
    objective,
    n_iter: int,
    n_init: int,
    master_seed: int,
    label: str = "bayes",
) -> list[tuple[dict, float]]:
    """Core sequential optimizer; ``objective(sampled, origin, index) -> loss``.

    Returns evaluated (params, loss) pairs in order: n_init warm-ups then
    n_iter surrogate-guided picks.
    """
    if n_iter < 1:
        raise ValueError(f"n_iter must be >= 1, got {n_iter}")
    if n_init < 2:
        raise ValueError(f"n_init must be >= 2, got {n_init}")

    def draw(rng: np.random.Generator) -> dict:
        return {d.name: d.sample(rng) for d in dims}

    def encode(sampled: dict) -> np.ndarray:
        return np.array([d.encode(sampled[d.name]) for d in dims])

    history: list[tuple[dict, float]] = []
    for j in range(n_init):
        sampled = draw(derive_rng(master_seed, label, "init", j))
        history.append((sampled, float(objective(sampled, "init", j))))

    for t in range(n_iter):
        Xh = np.array([encode(s) for s, _ in history])
        yh = np.array([l for _, l in history])
        cand_rng = derive_rng(master_seed, label, "candidates", t)
        candidates = [draw(cand_rng) for _ in range(_CANDIDATE_POOL)]
        Xc = np.array([encode(c) for c in candidates])
        preds = _surrogate_predictions(
            Xh, yh, Xc, derive_rng(master_seed, label, "surrogate", t)
        )
        mu = preds.mean(axis=0)
        sigma = preds.std(axis=0)
        ei = _expected_improvement(mu, sigma, float(yh.min()))
        chosen = candidates[int(np.argmax(ei))]
        history.append((chosen, float(objective(chosen, "iter", t))))
    return history


def bayes_opt(
    space: ParamSpace,
    n_iter: int,
    n_init: int,
    train: EncodedMatrix,
    valid: EncodedMatrix,
    master_seed: int,
    workers: int = 1,
) -> list[tuple[Trial, object, object]]:
    """Per-family Bayesian optimization; families are independent streams."""
    families = space.families()

    def run_family(family: str) -> list[tuple[Trial, object, object]]:
        fitted: list[tuple[Trial, object, object]] = []

        def objective(sampled: dict, origin: str, index: int) -> float:
            seed = derive_seed(master_seed, "bayes-fit", family, origin, index)
            params, payload = fit_candidate(family, sampled, seed, train)
            acc = _valid_accuracy(payload, valid)
            fitted.append((Trial(family, sampled, seed, acc, "bayes"), params, payload))
            return 1.0 - acc

        bayes_minimize(
            space.dims[family],
            objective,
            n_iter,
            n_init,
            master_seed,
            label=f"bayes/{family}",
        )
        return fitted

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_family = list(pool.map(run_family, families))
    else:
        per_family = [run_family(f) for f in families]
    return [item for chunk in per_family for item in chunk]


# ----------------------------------------------------------------------------
# Model space assembly and persistence


@dataclass
class ModelSpace:
    models: list[TrainedModel]
    trials: list[Trial]
    fingerprint: str
    master_seed: int

    def __post_init__(self):
        ids = [m.model_id for m in self.models]
        if ids != list(range(len(self.models))):
            raise ValueError("model_ids must be dense 0..n-1 in list order")
        if len(self.trials) != len(self.models):
            raise ValueError("trials must align with models")

    def __len__(self) -> int:
        return len(self.models)

    def accuracies(self) -> np.ndarray:
        return np.array([m.valid_accuracy for m in self.models])


def space_fingerprint(
    config: SearchConfig, master_seed: int, train: EncodedMatrix, valid: EncodedMatrix
) -> str:
    digest = hashlib.sha256()
    digest.update(
        json.dumps({"config": config.describe(), "master_seed": master_seed},
                   sort_keys=True).encode()
    )
    for part in (train.X, train.labels, valid.X, valid.labels):
        digest.update(np.ascontiguousarray(part).tobytes())
    return digest.hexdigest()


def registry_rows(space_obj: ModelSpace) -> list[list[str]]:
    rows = []
    for model, trial in zip(space_obj.models, space_obj.trials):
        rows.append(
            [
                str(model.model_id),
                model.family,
                trial.origin,
                json.dumps(trial.params, sort_keys=True),
                str(model.seed),
                str(model.valid_accuracy),
            ]
        )
    return rows


def save_model_space(space_obj: ModelSpace, out_dir: Path) -> None:
    import csv

    out_dir = Path(out_dir)
    model_dir = out_dir / "models"
    model_dir.mkdir(parents=True, exist_ok=True)
    for model, trial in zip(space_obj.models, space_obj.trials):
        doc = {
            "model_id": model.model_id,
            "family": model.family,
            "origin": trial.origin,
            "params": trial.params,
            "seed": model.seed,
            "valid_accuracy": model.valid_accuracy,
            "payload": payload_to_dict(model.family, model.payload),
        }
        with open(model_dir / f"{model.model_id}.json", "w") as fh:
            json.dump(doc, fh)
    with open(out_dir / "registry.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REGISTRY_COLUMNS)
        writer.writerows(registry_rows(space_obj))
    with open(out_dir / "fingerprint.json", "w") as fh:
        json.dump(
            {"fingerprint": space_obj.fingerprint, "master_seed": space_obj.master_seed},
            fh,
        )


def load_model_space(out_dir: Path) -> ModelSpace:
    import csv

    out_dir = Path(out_dir)
    with open(out_dir / "fingerprint.json") as fh:
        meta = json.load(fh)
    models: list[TrainedModel] = []
    trials: list[Trial] = []
    with open(out_dir / "registry.csv", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            model_id = int(row["model_id"])
            with open(out_dir / "models" / f"{model_id}.json") as mh:
                doc = json.load(mh)
            sampled = doc["params"]
            seed = doc["seed"]
            params, _ = _params_only(doc["family"], sampled, seed)
            payload = payload_from_dict(doc["family"], doc["payload"])
            models.append(
                TrainedModel(
                    model_id=model_id,
                    family=doc["family"],
                    params=params,
                    seed=seed,
                    valid_accuracy=doc["valid_accuracy"],
                    payload=payload,
                )
            )
            trials.append(
                Trial(doc["family"], sampled, seed, doc["valid_accuracy"], doc["origin"])
            )
    return ModelSpace(
        models=models,
        trials=trials,
        fingerprint=meta["fingerprint"],
        master_seed=meta["master_seed"],
    )


def _params_only(family: str, sampled: dict, seed: int):
    """Rebuild the family params record without fitting."""
    if family == "dtree":
        return (
            TreeParams(
                max_depth=sampled["max_depth"],
                min_samples_leaf=sampled["min_samples_leaf"],
                min_samples_split=sampled["min_samples_split"],
                impurity=sampled["impurity"],
            ),
            None,
        )
    if family == "rforest":
        return (
            ForestParams(
                n_trees=sampled["n_trees"],
                max_depth=sampled["max_depth"],
                min_samples_leaf=sampled["min_samples_leaf"],
                feature_fraction=sampled["feature_fraction"],
                bootstrap=True,
                seed=seed,
            ),
            None,
        )
    growth = "depthwise" if family == "gbdt_depthwise" else "leafwise"
    kwargs = {"max_depth": sampled["max_depth"]} if growth == "depthwise" else {
        "max_leaves": sampled["max_leaves"]
    }
    return (
        GbdtParams(
            n_rounds=sampled["n_rounds"],
            learning_rate=sampled["learning_rate"],
            growth=growth,
            seed=seed,
            **kwargs,
        ),
        None,
    )


def build_model_space(
    config: SearchConfig,
    split: SplitPair,
    master_seed: int,
    out_dir: Path | None = None,
    workers: int = 1,
) -> ModelSpace:
    """Run both samplers, assign dense model_ids, optionally persist/resume.

    Canonical id order: random trials before bayes trials; within an origin,
    families in declared order; within a family, sample index.
    """
    if config.total_models() < 1:
        raise ValueError("search config requests an empty model space")
    train = one_hot_encode(split.train)
    valid = one_hot_encode(split.valid)
    fingerprint = space_fingerprint(config, master_seed, train, valid)

    if out_dir is not None:
        out_dir = Path(out_dir)
        marker = out_dir / "fingerprint.json"
        if marker.exists():
            with open(marker) as fh:
                meta = json.load(fh)
            if meta.get("fingerprint") == fingerprint:
                return load_model_space(out_dir)

    triples: list[tuple[Trial, object, object]] = []
    if config.n_random >= 1:
        random_triples = random_search(
            config.param_space, config.n_random, train, valid, master_seed, workers
        )
        family_rank = {f: k for k, f in enumerate(config.param_space.families())}
        order = sorted(
            range(len(random_triples)),
            key=lambda i: (family_rank[random_triples[i][0].family], i),
        )
        triples.extend(random_triples[i] for i in order)
    if config.bayes is not None:
        triples.extend(
            bayes_opt(
                config.param_space,
                config.bayes.n_iter,
                config.bayes.n_init,
                train,
                valid,
                master_seed,
                workers,
            )
        )

    models = []
    trials = []
    for model_id, (trial, params, payload) in enumerate(triples):
        models.append(
            TrainedModel(
                model_id=model_id,
                family=trial.family,
                params=params,
                seed=trial.seed,
                valid_accuracy=trial.valid_accuracy,
                payload=payload,
            )
        )
        trials.append(trial)
    space_obj = ModelSpace(
        models=models, trials=trials, fingerprint=fingerprint, master_seed=master_seed
    )
    if out_dir is not None:
        save_model_space(space_obj, out_dir)
    return space_obj
