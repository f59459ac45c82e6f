import statistics

import numpy as np
import pytest

from rashomon_vi.rashomon import (
    LOSS_METRIC,
    RashomonSet,
    epsilon_sweep,
    extract_rashomon,
    rashomon_summary,
    select_reference,
)
from rashomon_vi.seeding import derive_rng

from helpers import check_rashomon_invariants, stub_space


class TestSelectReference:
    def test_picks_minimum_loss(self):
        assert select_reference(stub_space([0.80, 0.90, 0.85])) == 1

    def test_ties_go_to_lowest_id(self):
        assert select_reference(stub_space([0.85, 0.90, 0.90, 0.88])) == 1

    def test_empty_space_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            select_reference(stub_space([]))


class TestExtractRashomon:
    def test_worked_example(self):
        # losses 0.14, 0.16, 0.20; threshold 0.14 + 0.05 = 0.19
        rset = extract_rashomon(stub_space([0.86, 0.84, 0.80]), 0.05)
        assert rset.reference_id == 0
        assert rset.member_ids == (0, 1)
        assert rset.size == 2
        assert rset.loss_metric == LOSS_METRIC

    def test_zero_epsilon_keeps_exact_ties(self):
        rset = extract_rashomon(stub_space([0.9, 0.8, 0.9, 0.85]), 0.0)
        assert rset.member_ids == (0, 2)
        assert rset.reference_id == 0

    def test_large_epsilon_admits_everything(self):
        rset = extract_rashomon(stub_space([0.9, 0.1, 0.5]), 1.0)
        assert rset.member_ids == (0, 1, 2)

    def test_negative_epsilon_rejected(self):
        with pytest.raises(ValueError, match="epsilon"):
            extract_rashomon(stub_space([0.9, 0.8]), -0.01)

    def test_set_validation(self):
        with pytest.raises(ValueError, match="duplicates"):
            RashomonSet(reference_id=0, member_ids=(0, 0, 1), epsilon=0.05)
        with pytest.raises(ValueError, match="member"):
            RashomonSet(reference_id=3, member_ids=(0, 1), epsilon=0.05)

    def test_invariants_over_random_spaces(self):
        rng = derive_rng(0, "rashomon-invariants-unit")
        for _ in range(40):
            n = int(rng.integers(1, 40))
            accs = rng.uniform(0.3, 1.0, size=n)
            if rng.random() < 0.5:
                accs = np.round(accs, 2)  # force ties
            check_rashomon_invariants(
                stub_space(list(accs)), [0.0, 0.01, 0.05, 0.1, 0.5]
            )


class TestSummary:
    def test_worked_example(self):
        space = stub_space([0.9, 0.8, 0.7, 0.88])
        rset = extract_rashomon(space, 0.05)
        summary = rashomon_summary(space, rset)
        assert rset.member_ids == (0, 3)
        assert summary.space_mean == pytest.approx(0.82)
        assert summary.space_sd == pytest.approx(statistics.stdev([0.9, 0.8, 0.7, 0.88]))
        assert summary.set_mean == pytest.approx(0.89)
        assert summary.set_sd == pytest.approx(statistics.stdev([0.9, 0.88]))
        assert summary.set_size == 2

    def test_singleton_set_sd_is_zero(self):
        space = stub_space([0.9, 0.5, 0.4])
        rset = extract_rashomon(space, 0.01)
        summary = rashomon_summary(space, rset)
        assert summary.set_size == 1
        assert summary.set_sd == 0.0

    def test_sample_sd_uses_ddof_one(self):
        space = stub_space([0.6, 0.8])
        summary = rashomon_summary(space, extract_rashomon(space, 1.0))
        assert summary.space_sd == pytest.approx(np.std([0.6, 0.8], ddof=1))
        assert summary.space_sd != pytest.approx(np.std([0.6, 0.8]))

    def test_foreign_members_rejected(self):
        space = stub_space([0.9, 0.8])
        rset = RashomonSet(reference_id=0, member_ids=(0, 5), epsilon=0.1)
        with pytest.raises(ValueError, match="space"):
            rashomon_summary(space, rset)


class TestEpsilonSweep:
    def test_matches_direct_filtering(self):
        rng = derive_rng(1, "sweep-oracle")
        accs = list(rng.uniform(0.4, 1.0, size=30))
        space = stub_space(accs)
        grid = [0.0, 0.02, 0.05, 0.05, 0.1, 0.3, 1.0]
        sweep = epsilon_sweep(space, grid)
        best_loss = 1.0 - max(accs)
        for eps, size in sweep:
            expected = sum(1 for a in accs if 1.0 - a <= best_loss + eps)
            assert size == expected

    def test_sizes_non_decreasing(self):
        space = stub_space([0.9, 0.88, 0.8, 0.7, 0.65])
        sizes = [size for _, size in epsilon_sweep(space, [0.0, 0.05, 0.15, 0.3])]
        assert sizes == sorted(sizes)
        assert sizes[0] >= 1 and sizes[-1] == 5

    def test_staircase_hits_every_size(self):
        space = stub_space([0.9, 0.85, 0.8, 0.75])
        sweep = epsilon_sweep(space, [0.0, 0.07, 0.12, 0.17])
        assert [size for _, size in sweep] == [1, 2, 3, 4]

    def test_unsorted_grid_rejected(self):
        with pytest.raises(ValueError, match="ascending"):
            epsilon_sweep(stub_space([0.9]), [0.1, 0.05])

    def test_negative_grid_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            epsilon_sweep(stub_space([0.9]), [-0.1, 0.05])

    def test_empty_grid(self):
        assert epsilon_sweep(stub_space([0.9]), []) == []
