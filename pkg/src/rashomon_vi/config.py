"""Run configuration: a single JSON document, strictly validated.

Unknown keys are rejected (typo guard) and every default is materialized
into the returned record so downstream code never guesses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import OULAD_COURSES, SynthSpec
from .errors import ConfigError
from .search import BayesSettings, SearchConfig

TARGET_MODES = ("binary", "multiclass")

_TOP_KEYS = {
    "data",
    "target_modes",
    "split_ratio",
    "master_seed",
    "search",
    "epsilon",
    "pvi_repeats",
    "viod_mode",
    "out_dir",
}
_DATA_KEYS = {"source", "oulad_dir", "courses", "n_rows", "strengths",
              "levels_per_variable", "scale", "course_tag"}
_SEARCH_KEYS = {"n_random", "bayes"}
_BAYES_KEYS = {"n_iter", "n_init"}


@dataclass(frozen=True)
class SyntheticConfig:
    n_rows: int
    strengths: dict[str, float]
    levels_per_variable: int = 4
    scale: float = 3.0
    course_tag: str = "synth"

    def to_spec(self) -> SynthSpec:
        return SynthSpec(
            strengths=dict(self.strengths),
            levels_per_variable=self.levels_per_variable,
            scale=self.scale,
            course_tag=self.course_tag,
        )


@dataclass(frozen=True)
class DataConfig:
    source: str
    oulad_dir: str | None = None
    courses: tuple[str, ...] = ()
    synthetic: SyntheticConfig | None = None


@dataclass(frozen=True)
class RunConfig:
    data: DataConfig
    master_seed: int
    target_modes: tuple[str, ...] = TARGET_MODES
    split_ratio: float = 0.25
    search: SearchConfig = field(default_factory=SearchConfig)
    epsilon: float = 0.05
    pvi_repeats: int = 10
    viod_mode: str = "min"
    out_dir: str = "runs/rashomon"

    def courses(self) -> tuple[str, ...]:
        if self.data.source == "oulad":
            return self.data.courses
        return (self.data.synthetic.course_tag,)

    def resolved(self) -> dict:
        """Every effective setting, defaults included; no CLI-only knobs."""
        data: dict = {"source": self.data.source}
        if self.data.source == "oulad":
            data["oulad_dir"] = self.data.oulad_dir
            data["courses"] = list(self.data.courses)
        else:
            synth = self.data.synthetic
            data.update(
                n_rows=synth.n_rows,
                strengths=dict(synth.strengths),
                levels_per_variable=synth.levels_per_variable,
                scale=synth.scale,
                course_tag=synth.course_tag,
            )
        return {
            "data": data,
            "target_modes": list(self.target_modes),
            "split_ratio": self.split_ratio,
            "master_seed": self.master_seed,
            "search": self.search.describe(),
            "epsilon": self.epsilon,
            "pvi_repeats": self.pvi_repeats,
            "viod_mode": self.viod_mode,
            "out_dir": self.out_dir,
        }


def _reject_unknown(doc: dict, allowed: set[str], prefix: str, problems: list[str]):
    for key in sorted(set(doc) - allowed):
        problems.append(f"{prefix}{key}: unknown key")


def _expect(cond: bool, message: str, problems: list[str]) -> bool:
    if not cond:
        problems.append(message)
    return cond


def parse_config(doc: dict) -> RunConfig:
    """Validate a parsed JSON document; raise ConfigError listing every
    violation with its field path."""
    problems: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigError(["config root must be a JSON object"])
    _reject_unknown(doc, _TOP_KEYS, "", problems)

    data_cfg = None
    data = doc.get("data")
    if not _expect(isinstance(data, dict), "data: required object", problems):
        pass
    else:
        _reject_unknown(data, _DATA_KEYS, "data.", problems)
        source = data.get("source")
        if source == "oulad":
            oulad_dir = data.get("oulad_dir")
            _expect(isinstance(oulad_dir, str) and oulad_dir,
                    "data.oulad_dir: required non-empty string", problems)
            courses = data.get("courses", list(OULAD_COURSES))
            ok = isinstance(courses, list) and courses and all(
                c in OULAD_COURSES for c in courses
            )
            _expect(ok, f"data.courses: must be a non-empty subset of {list(OULAD_COURSES)}",
                    problems)
            for key in ("n_rows", "strengths", "levels_per_variable", "scale", "course_tag"):
                if key in data:
                    problems.append(f"data.{key}: only valid for synthetic source")
            if not problems:
                data_cfg = DataConfig(source="oulad", oulad_dir=oulad_dir,
                                      courses=tuple(courses))
        elif source == "synthetic":
            if "oulad_dir" in data or "courses" in data:
                problems.append("data.oulad_dir/courses: only valid for oulad source")
            strengths = data.get("strengths")
            ok = (
                isinstance(strengths, dict)
                and strengths
                and all(
                    isinstance(k, str) and isinstance(v, (int, float)) and 0.0 <= v <= 1.0
                    for k, v in strengths.items()
                )
            )
            _expect(ok, "data.strengths: required map of variable -> strength in [0,1]",
                    problems)
            n_rows = data.get("n_rows", 1000)
            _expect(isinstance(n_rows, int) and n_rows >= 50,
                    "data.n_rows: integer >= 50", problems)
            levels = data.get("levels_per_variable", 4)
            _expect(isinstance(levels, int) and levels >= 2,
                    "data.levels_per_variable: integer >= 2", problems)
            scale = data.get("scale", 3.0)
            _expect(isinstance(scale, (int, float)) and scale > 0,
                    "data.scale: positive number", problems)
            tag = data.get("course_tag", "synth")
            _expect(isinstance(tag, str) and tag, "data.course_tag: non-empty string",
                    problems)
            if not problems:
                data_cfg = DataConfig(
                    source="synthetic",
                    synthetic=SyntheticConfig(
                        n_rows=n_rows,
                        strengths={k: float(v) for k, v in strengths.items()},
                        levels_per_variable=levels,
                        scale=float(scale),
                        course_tag=tag,
                    ),
                )
        else:
            problems.append("data.source: must be 'oulad' or 'synthetic'")

    modes = doc.get("target_modes", list(TARGET_MODES))
    ok = (
        isinstance(modes, list)
        and modes
        and all(m in TARGET_MODES for m in modes)
        and len(set(modes)) == len(modes)
    )
    _expect(ok, "target_modes: non-empty list drawn from ['binary', 'multiclass']", problems)

    ratio = doc.get("split_ratio", 0.25)
    _expect(isinstance(ratio, (int, float)) and 0.0 < ratio < 1.0,
            "split_ratio: number in (0, 1)", problems)

    seed = doc.get("master_seed")
    _expect(isinstance(seed, int) and seed >= 0, "master_seed: required non-negative integer",
            problems)

    search_cfg = SearchConfig()
    search = doc.get("search", {"n_random": 200, "bayes": {"n_iter": 30, "n_init": 26}})
    if _expect(isinstance(search, dict), "search: must be an object", problems):
        _reject_unknown(search, _SEARCH_KEYS, "search.", problems)
        n_random = search.get("n_random", 200)
        _expect(isinstance(n_random, int) and n_random >= 0,
                "search.n_random: integer >= 0", problems)
        bayes = search.get("bayes", {"n_iter": 30, "n_init": 26})
        bayes_settings = None
        if bayes is not None:
            if _expect(isinstance(bayes, dict), "search.bayes: object or null", problems):
                _reject_unknown(bayes, _BAYES_KEYS, "search.bayes.", problems)
                n_iter = bayes.get("n_iter", 30)
                n_init = bayes.get("n_init", 26)
                _expect(isinstance(n_iter, int) and n_iter >= 1,
                        "search.bayes.n_iter: integer >= 1", problems)
                _expect(isinstance(n_init, int) and n_init >= 2,
                        "search.bayes.n_init: integer >= 2", problems)
                if not problems:
                    bayes_settings = BayesSettings(n_iter=n_iter, n_init=n_init)
        if not problems:
            if n_random == 0 and bayes_settings is None:
                problems.append("search: n_random 0 with no bayes stage yields an empty space")
            else:
                search_cfg = SearchConfig(n_random=n_random, bayes=bayes_settings)

    epsilon = doc.get("epsilon", 0.05)
    _expect(isinstance(epsilon, (int, float)) and epsilon >= 0,
            "epsilon: number >= 0", problems)

    repeats = doc.get("pvi_repeats", 10)
    _expect(isinstance(repeats, int) and repeats >= 1, "pvi_repeats: integer >= 1", problems)

    mode = doc.get("viod_mode", "min")
    _expect(mode in ("min", "max"), "viod_mode: 'min' or 'max'", problems)

    out_dir = doc.get("out_dir", "runs/rashomon")
    _expect(isinstance(out_dir, str) and out_dir, "out_dir: non-empty string", problems)

    if problems:
        raise ConfigError(problems)
    return RunConfig(
        data=data_cfg,
        master_seed=seed,
        target_modes=tuple(modes),
        split_ratio=float(ratio),
        search=search_cfg,
        epsilon=float(epsilon),
        pvi_repeats=repeats,
        viod_mode=mode,
        out_dir=out_dir,
    )


def validate_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config file not found: {path}"])
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"invalid JSON: {exc}"]) from exc
    return parse_config(doc)
