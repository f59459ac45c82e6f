"""End-to-end orchestration: ingest → split → model space → Rashomon set →
PVI → VIOD, with every report file emitted under one run directory.

All artifacts are byte-determined by the resolved config and master seed;
no timestamps or machine facts leak into outputs, and the worker count
never changes a byte. A failure leaves a ``FAILED`` marker naming the
stage alongside whatever partial artifacts were completed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .dataset import (
    SplitPair,
    TabularDataset,
    load_oulad,
    make_binary,
    one_hot_encode,
    stratified_split,
    synth_generate,
)
from .discrepancy import ViodReport, tau_distribution, viod
from .errors import PipelineStageError
from .importance import PviConfig, PviRecord, PviReport, pvi_over_set
from .rashomon import RashomonSet, RashomonSummary, extract_rashomon, rashomon_summary
from .search import REGISTRY_COLUMNS, ModelSpace, build_model_space, registry_rows
from .seeding import derive_seed

STAGES = ("ingest", "split", "space", "rashomon", "pvi", "viod")


@dataclass
class ComboResult:
    """Everything produced for one (target mode, course) combination."""

    setup: str
    course: str
    data: TabularDataset | None = None
    split: SplitPair | None = None
    space: ModelSpace | None = None
    rset: RashomonSet | None = None
    summary: RashomonSummary | None = None
    pvi: PviReport | None = None
    viod_report: ViodReport | None = None
    taus: list[tuple[int, float]] | None = None


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def _write_csv(path: Path, header: tuple[str, ...], rows: list[list[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _ingest(cfg: RunConfig, course: str, setup: str) -> TabularDataset:
    if cfg.data.source == "oulad":
        return load_oulad(cfg.data.oulad_dir, course, setup)
    synth = cfg.data.synthetic
    data = synth_generate(
        synth.n_rows, synth.to_spec(), derive_seed(cfg.master_seed, "synth-data", course)
    )
    return make_binary(data) if setup == "binary" else data


def _guarded(stage: str, out: Path, setup: str, course: str, fn):
    try:
        return fn()
    except Exception as exc:
        _write_text(
            out / "FAILED",
            f"stage: {stage}\ncombo: {setup}_{course}\nerror: {exc}\n",
        )
        raise PipelineStageError(stage, exc, context=f"{setup}/{course}") from exc


def run_pipeline(
    cfg: RunConfig,
    out_dir: str | Path | None = None,
    workers: int = 1,
    until: str = "viod",
) -> dict:
    """Execute stages up to ``until`` for every (setup, course) combination
    and emit the corresponding artifacts; returns the run summary."""
    if until not in STAGES:
        raise ValueError(f"until must be one of {STAGES}, got {until!r}")
    rank = STAGES.index(until)
    out = Path(out_dir) if out_dir is not None else Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / "FAILED"
    if marker.exists():
        marker.unlink()
    _write_text(
        out / "config.resolved.json",
        json.dumps(cfg.resolved(), indent=2, sort_keys=True) + "\n",
    )

    results: list[ComboResult] = []
    for setup in cfg.target_modes:
        for course in cfg.courses():
            res = ComboResult(setup=setup, course=course)
            results.append(res)
            res.data = _guarded(
                "ingest", out, setup, course, lambda: _ingest(cfg, course, setup)
            )
            if rank < STAGES.index("split"):
                continue
            res.split = _guarded(
                "split",
                out,
                setup,
                course,
                lambda: stratified_split(
                    res.data, cfg.split_ratio, derive_seed(cfg.master_seed, "split", course, setup)
                ),
            )
            if rank < STAGES.index("space"):
                continue
            space_dir = out / "spaces" / f"{setup}_{course}"
            res.space = _guarded(
                "space",
                out,
                setup,
                course,
                lambda: build_model_space(
                    cfg.search,
                    res.split,
                    derive_seed(cfg.master_seed, "search", course, setup),
                    out_dir=space_dir,
                    workers=workers,
                ),
            )
            if rank < STAGES.index("rashomon"):
                continue

            def _rashomon():
                rset = extract_rashomon(res.space, cfg.epsilon)
                return rset, rashomon_summary(res.space, rset)

            res.rset, res.summary = _guarded("rashomon", out, setup, course, _rashomon)
            if rank < STAGES.index("pvi"):
                continue
            res.pvi = _guarded(
                "pvi",
                out,
                setup,
                course,
                lambda: pvi_over_set(
                    res.rset,
                    res.space,
                    one_hot_encode(res.split.valid),
                    PviConfig(
                        repeats=cfg.pvi_repeats,
                        seed=derive_seed(cfg.master_seed, "pvi-set", course, setup),
                    ),
                    course=course,
                    setup=setup,
                    workers=workers,
                ),
            )
            if rank < STAGES.index("viod"):
                continue

            def _viod():
                report = viod(res.pvi, res.rset, cfg.viod_mode)
                return report, tau_distribution(res.pvi, res.rset)

            res.viod_report, res.taus = _guarded("viod", out, setup, course, _viod)

    _emit_artifacts(out, results, cfg, until)
    return _run_summary(results, cfg)


def _emit_artifacts(out: Path, results: list[ComboResult], cfg: RunConfig, until: str) -> None:
    rank = STAGES.index(until)
    if until == "ingest":
        for res in results:
            _write_ingest(out / "ingest", res)
    if rank >= STAGES.index("space"):
        rows = [
            [res.setup, res.course] + row
            for res in results
            for row in registry_rows(res.space)
        ]
        _write_csv(out / "registry.csv", ("setup", "course") + REGISTRY_COLUMNS, rows)
    if rank >= STAGES.index("rashomon"):
        _write_csv(
            out / "rashomon_summary.csv",
            ("setup", "course", "space_mean", "space_sd", "set_mean", "set_sd", "set_size"),
            [_summary_row(res) for res in results],
        )
    if rank >= STAGES.index("pvi"):
        _write_pvi(out, results)
    if rank >= STAGES.index("viod"):
        _write_viod(out, results)
        _write_text(
            out / "run_summary.json",
            json.dumps(_run_summary(results, cfg), indent=2, sort_keys=True) + "\n",
        )


def _write_ingest(ingest_dir: Path, res: ComboResult) -> None:
    d = res.data
    header = d.variables + ("label",)
    rows = [list(cells) + [label] for cells, label in zip(d.cells, d.labels)]
    _write_csv(ingest_dir / f"{res.setup}_{res.course}.csv", header, rows)
    schema = {
        "course": d.course_tag,
        "target_levels": list(d.target_levels),
        "levels": {c.name: list(c.levels) for c in d.schema},
    }
    _write_text(
        ingest_dir / f"{res.setup}_{res.course}.schema.json",
        json.dumps(schema, indent=2, sort_keys=True) + "\n",
    )


def _summary_row(res: ComboResult) -> list[str]:
    s = res.summary
    return [
        res.setup,
        res.course,
        f"{s.space_mean:.4f}",
        f"{s.space_sd:.3f}",
        f"{s.set_mean:.4f}",
        f"{s.set_sd:.3f}",
        str(s.set_size),
    ]


def _write_pvi(out: Path, results: list[ComboResult]) -> None:
    long_rows = []
    summary_rows = []
    for res in results:
        family = {m.model_id: m.family for m in res.space.models}
        for record in res.pvi.records:
            for repeat, drop in enumerate(record.drops):
                long_rows.append(
                    [
                        res.setup,
                        res.course,
                        str(record.model_id),
                        family[record.model_id],
                        record.variable,
                        str(repeat),
                        str(drop),
                    ]
                )
        for variable in res.pvi.variables:
            means = np.array(
                [r.mean_drop for r in res.pvi.records if r.variable == variable]
            )
            q1, med, q3 = np.percentile(means, [25, 50, 75])
            summary_rows.append(
                [
                    res.setup,
                    res.course,
                    variable,
                    str(float(means.mean())),
                    str(float(q1)),
                    str(float(med)),
                    str(float(q3)),
                ]
            )
    _write_csv(
        out / "pvi_long.csv",
        ("setup", "course", "model_id", "family", "variable", "repeat", "drop"),
        long_rows,
    )
    _write_csv(
        out / "pvi_summary.csv",
        ("setup", "course", "variable", "mean", "q1", "median", "q3"),
        summary_rows,
    )


def _write_viod(out: Path, results: list[ComboResult]) -> None:
    viod_rows = []
    tau_rows = []
    for res in results:
        report = res.viod_report
        viod_rows.append(
            [
                res.setup,
                res.course,
                str(report.viod_min),
                str(report.viod_max),
                report.reported_mode,
                str(report.n_members),
            ]
        )
        family = {m.model_id: m.family for m in res.space.models}
        for model_id, tau in res.taus:
            tau_rows.append(
                [res.setup, res.course, str(model_id), family[model_id], str(tau)]
            )
    _write_csv(
        out / "viod.csv",
        ("setup", "course", "viod_min", "viod_max", "reported_mode", "n_members"),
        viod_rows,
    )
    _write_csv(
        out / "tau_long.csv", ("setup", "course", "model_id", "family", "tau"), tau_rows
    )


def _run_summary(results: list[ComboResult], cfg: RunConfig) -> dict:
    combos = []
    for res in results:
        entry: dict = {"setup": res.setup, "course": res.course}
        if res.space is not None:
            entry["n_models"] = len(res.space)
        if res.summary is not None:
            ref = res.rset.reference_id
            entry.update(
                reference_id=ref,
                reference_family=res.space.models[ref].family,
                epsilon=cfg.epsilon,
                space_mean=res.summary.space_mean,
                space_sd=res.summary.space_sd,
                set_mean=res.summary.set_mean,
                set_sd=res.summary.set_sd,
                set_size=res.summary.set_size,
            )
        if res.viod_report is not None:
            taus = [t for _, t in res.taus]
            entry.update(
                viod_min=res.viod_report.viod_min,
                viod_max=res.viod_report.viod_max,
                viod_min_id=res.viod_report.viod_min_id,
                viod_max_id=res.viod_report.viod_max_id,
                reported_mode=res.viod_report.reported_mode,
                reported_viod=res.viod_report.reported,
                mean_tau=float(np.mean(taus)),
                n_taus=len(taus),
            )
        combos.append(entry)
    return {"combos": combos}


def format_summary(summary: dict) -> str:
    """Readable echo of the accuracy and discrepancy tables."""
    lines = []
    rows = summary.get("combos", [])
    if rows and "set_mean" in rows[0]:
        lines.append("setup        course  space acc (mean+/-sd)  set acc (mean+/-sd)  size")
        for r in rows:
            lines.append(
                f"{r['setup']:<12} {r['course']:<7} "
                f"{r['space_mean']:.4f} +/- {r['space_sd']:.3f}      "
                f"{r['set_mean']:.4f} +/- {r['set_sd']:.3f}     {r['set_size']}"
            )
    if rows and "viod_min" in rows[0]:
        lines.append("")
        lines.append("setup        course  viod_min  viod_max  reported  mean_tau")
        for r in rows:
            lines.append(
                f"{r['setup']:<12} {r['course']:<7} "
                f"{r['viod_min']:>8.3f}  {r['viod_max']:>8.3f}  "
                f"{r['reported_viod']:>8.3f}  {r['mean_tau']:>8.3f}"
            )
    return "\n".join(lines)


# ----------------------------------------------------------------------------
# Re-emission from a completed run directory


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def report_from_dir(run_dir: str | Path) -> dict:
    """Recompute and rewrite every summary artifact from the long-format
    files (registry + pvi_long) plus the resolved config.

    The rewrite is byte-identical to the original emission, which doubles
    as an integrity check of the run directory.
    """
    run_dir = Path(run_dir)
    resolved = json.loads((run_dir / "config.resolved.json").read_text())
    epsilon = resolved["epsilon"]
    mode = resolved["viod_mode"]
    registry = _read_csv(run_dir / "registry.csv")
    pvi_rows = _read_csv(run_dir / "pvi_long.csv")

    combos: list[tuple[str, str]] = []
    for row in registry:
        key = (row["setup"], row["course"])
        if key not in combos:
            combos.append(key)

    results: list[ComboResult] = []
    for setup, course in combos:
        reg = [r for r in registry if (r["setup"], r["course"]) == (setup, course)]
        accs = np.array([float(r["valid_accuracy"]) for r in reg])
        family = {int(r["model_id"]): r["family"] for r in reg}
        losses = 1.0 - accs
        reference_id = int(np.argmin(losses))

        rows = [r for r in pvi_rows if (r["setup"], r["course"]) == (setup, course)]
        variables: list[str] = []
        drops: dict[tuple[int, str], list[float]] = {}
        for r in rows:
            mid, var = int(r["model_id"]), r["variable"]
            if var not in variables:
                variables.append(var)
            drops.setdefault((mid, var), []).append(float(r["drop"]))
        member_ids = sorted({mid for mid, _ in drops})
        records = [
            PviRecord(
                model_id=mid,
                variable=var,
                baseline=float(accs[mid]),
                drops=tuple(drops[(mid, var)]),
                mean_drop=float(sum(drops[(mid, var)]) / len(drops[(mid, var)])),
            )
            for mid in member_ids
            for var in variables
        ]
        repeats = len(records[0].drops) if records else 1
        report = PviReport(
            records=records,
            config=PviConfig(repeats=repeats, seed=0),
            course=course,
            setup=setup,
            variables=tuple(variables),
        )
        rset = RashomonSet(
            reference_id=reference_id, member_ids=tuple(member_ids), epsilon=epsilon
        )
        member_accs = accs[member_ids]
        summary = RashomonSummary(
            space_mean=float(accs.mean()),
            space_sd=float(np.std(accs, ddof=1)) if accs.size > 1 else 0.0,
            set_mean=float(member_accs.mean()),
            set_sd=float(np.std(member_accs, ddof=1)) if member_accs.size > 1 else 0.0,
            set_size=len(member_ids),
        )

        res = ComboResult(setup=setup, course=course)
        res.summary = summary
        res.rset = rset
        res.pvi = report
        res.viod_report = viod(report, rset, mode)
        res.taus = tau_distribution(report, rset)
        res.space = _RegistryView(family, accs)
        results.append(res)

    _write_csv(
        run_dir / "rashomon_summary.csv",
        ("setup", "course", "space_mean", "space_sd", "set_mean", "set_sd", "set_size"),
        [_summary_row(res) for res in results],
    )
    _write_pvi_summary_only(run_dir, results)
    _write_viod(run_dir, results)
    cfg_stub = _ReportConfig(epsilon)
    _write_text(
        run_dir / "run_summary.json",
        json.dumps(_run_summary(results, cfg_stub), indent=2, sort_keys=True) + "\n",
    )
    return _run_summary(results, cfg_stub)


class _RegistryView:
    """Just enough of ModelSpace for the report writers: id → family."""

    def __init__(self, family: dict[int, str], accs: np.ndarray):
        self._family = family
        self._accs = accs
        self.models = [
            _ModelStub(mid, fam) for mid, fam in sorted(family.items())
        ]

    def __len__(self) -> int:
        return len(self.models)


class _ModelStub:
    def __init__(self, model_id: int, family: str):
        self.model_id = model_id
        self.family = family


class _ReportConfig:
    def __init__(self, epsilon: float):
        self.epsilon = epsilon


def _write_pvi_summary_only(out: Path, results: list[ComboResult]) -> None:
    summary_rows = []
    for res in results:
        for variable in res.pvi.variables:
            means = np.array(
                [r.mean_drop for r in res.pvi.records if r.variable == variable]
            )
            q1, med, q3 = np.percentile(means, [25, 50, 75])
            summary_rows.append(
                [
                    res.setup,
                    res.course,
                    variable,
                    str(float(means.mean())),
                    str(float(q1)),
                    str(float(med)),
                    str(float(q3)),
                ]
            )
    _write_csv(
        out / "pvi_summary.csv",
        ("setup", "course", "variable", "mean", "q1", "median", "q3"),
        summary_rows,
    )
