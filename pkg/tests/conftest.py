import csv
import os
from pathlib import Path

import numpy as np
import pytest

from rashomon_vi.dataset import SynthSpec, one_hot_encode, stratified_split, synth_generate

OULAD_COLUMNS = [
    "code_module",
    "code_presentation",
    "id_student",
    "gender",
    "region",
    "highest_education",
    "imd_band",
    "age_band",
    "num_of_prev_attempts",
    "studied_credits",
    "disability",
    "final_result",
]


@pytest.fixture()
def fake_oulad_dir(tmp_path: Path) -> Path:
    """A miniature studentInfo.csv with the real column layout: two courses,
    Withdrawn rows to drop, and blank imd_band cells."""
    rng = np.random.default_rng(5)
    rows = []
    levels = {
        "gender": ["F", "M"],
        "region": ["East Anglian Region", "Scotland", "Wales"],
        "highest_education": ["A Level or Equivalent", "HE Qualification", "Lower Than A Level"],
        "imd_band": ["0-10%", "20-30%", "90-100%", ""],
        "age_band": ["0-35", "35-55", "55<="],
        "disability": ["N", "Y"],
    }
    outcomes = ["Pass", "Fail", "Distinction", "Withdrawn"]
    student = 1000
    for module, count in [("AAA", 40), ("BBB", 60)]:
        for presentation in ["2013J", "2014J"]:
            for _ in range(count):
                student += 1
                rows.append(
                    {
                        "code_module": module,
                        "code_presentation": presentation,
                        "id_student": str(student),
                        "gender": str(rng.choice(levels["gender"])),
                        "region": str(rng.choice(levels["region"])),
                        "highest_education": str(rng.choice(levels["highest_education"])),
                        "imd_band": str(rng.choice(levels["imd_band"])),
                        "age_band": str(rng.choice(levels["age_band"])),
                        "num_of_prev_attempts": "0",
                        "studied_credits": "60",
                        "disability": str(rng.choice(levels["disability"])),
                        "final_result": str(rng.choice(outcomes)),
                    }
                )
    path = tmp_path / "oulad"
    path.mkdir()
    with open(path / "studentInfo.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=OULAD_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    return path


PLANTED = SynthSpec(strengths={"a": 0.95, "b": 0.45, "c": 0.2, "z": 0.0})


@pytest.fixture(scope="session")
def planted_data():
    return synth_generate(600, PLANTED, seed=404)


@pytest.fixture(scope="session")
def planted_split(planted_data):
    return stratified_split(planted_data, 0.25, seed=7)


@pytest.fixture(scope="session")
def planted_train(planted_split):
    return one_hot_encode(planted_split.train)


@pytest.fixture(scope="session")
def planted_valid(planted_split):
    return one_hot_encode(planted_split.valid)


def oulad_dir() -> Path | None:
    """Real-dataset gate for the OULAD acceptance tests."""
    env = os.environ.get("RASHOMON_OULAD_DIR")
    candidates = [Path(env)] if env else []
    candidates.append(Path(__file__).resolve().parent.parent / "data" / "oulad")
    for cand in candidates:
        if (cand / "studentInfo.csv").exists():
            return cand
    return None
