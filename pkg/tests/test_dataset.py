import numpy as np
import pytest

from rashomon_vi.dataset import (
    MISSING_LEVEL,
    OULAD_VARIABLES,
    ColumnSchema,
    SynthSpec,
    TabularDataset,
    load_oulad,
    make_binary,
    one_hot_encode,
    stratified_split,
    synth_generate,
)
from rashomon_vi.errors import DataError, IngestError, StratificationError


def tiny_dataset(labels=("Fail", "Pass", "Pass", "Fail"), n=4):
    schema = (
        ColumnSchema("color", ("blue", "red")),
        ColumnSchema("size", ("L", "M", "S")),
    )
    cells = tuple(
        (("blue", "red")[i % 2], ("L", "M", "S")[i % 3]) for i in range(n)
    )
    return TabularDataset(
        schema=schema,
        cells=cells,
        labels=tuple(labels),
        target_levels=("Fail", "Pass"),
        course_tag="tiny",
    )


class TestTabularDataset:
    def test_rejects_unknown_level(self):
        with pytest.raises(ValueError, match="level"):
            TabularDataset(
                schema=(ColumnSchema("x", ("a", "b")),),
                cells=(("c",),),
                labels=("Fail",),
                target_levels=("Fail", "Pass"),
                course_tag="t",
            )

    def test_rejects_unknown_label(self):
        with pytest.raises(ValueError, match="label"):
            TabularDataset(
                schema=(ColumnSchema("x", ("a",)),),
                cells=(("a",),),
                labels=("Mystery",),
                target_levels=("Fail", "Pass"),
                course_tag="t",
            )

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            TabularDataset(
                schema=(ColumnSchema("x", ("a",)),),
                cells=(),
                labels=(),
                target_levels=("Fail", "Pass"),
                course_tag="t",
            )

    def test_variables_order(self):
        assert tiny_dataset().variables == ("color", "size")


class TestLoadOulad:
    def test_loads_course_with_six_predictors(self, fake_oulad_dir):
        data = load_oulad(fake_oulad_dir, "AAA", "multiclass")
        assert data.variables == OULAD_VARIABLES
        assert data.target_levels == ("Fail", "Pass", "Distinction")
        assert data.course_tag == "AAA"
        assert all(label != "Withdrawn" for label in data.labels)

    def test_course_filter_separates_modules(self, fake_oulad_dir):
        a = load_oulad(fake_oulad_dir, "AAA", "multiclass")
        b = load_oulad(fake_oulad_dir, "BBB", "multiclass")
        # fixture seeds 80 AAA and 120 BBB rows before Withdrawn removal
        assert a.n_rows < b.n_rows

    def test_missing_imd_band_becomes_level(self, fake_oulad_dir):
        data = load_oulad(fake_oulad_dir, "AAA", "multiclass")
        imd = next(c for c in data.schema if c.name == "imd_band")
        assert MISSING_LEVEL in imd.levels
        assert imd.levels[-1] == MISSING_LEVEL  # sorted, Missing last
        assert MISSING_LEVEL in data.column_values("imd_band")
        assert "" not in data.column_values("imd_band")

    def test_binary_mode(self, fake_oulad_dir):
        data = load_oulad(fake_oulad_dir, "AAA", "binary")
        assert data.target_levels == ("Fail", "Pass")
        assert "Distinction" not in data.labels

    def test_binary_and_multiclass_share_rows(self, fake_oulad_dir):
        multi = load_oulad(fake_oulad_dir, "AAA", "multiclass")
        binary = load_oulad(fake_oulad_dir, "AAA", "binary")
        assert multi.n_rows == binary.n_rows
        assert multi.cells == binary.cells

    def test_unknown_course_rejected(self, fake_oulad_dir):
        with pytest.raises(ValueError, match="course"):
            load_oulad(fake_oulad_dir, "ZZZ", "binary")

    def test_missing_file_is_ingest_error(self, tmp_path):
        with pytest.raises(IngestError, match="studentInfo.csv"):
            load_oulad(tmp_path, "AAA", "binary")

    def test_missing_columns_is_ingest_error(self, tmp_path):
        (tmp_path / "studentInfo.csv").write_text("code_module,gender\nAAA,F\n")
        with pytest.raises(IngestError, match="columns"):
            load_oulad(tmp_path, "AAA", "binary")

    def test_no_rows_is_data_error(self, tmp_path, fake_oulad_dir):
        text = (fake_oulad_dir / "studentInfo.csv").read_text().splitlines()
        kept = [text[0]] + [line for line in text[1:] if not line.startswith("AAA") or "Withdrawn" in line]
        (tmp_path / "studentInfo.csv").write_text("\n".join(kept) + "\n")
        with pytest.raises(DataError):
            load_oulad(tmp_path, "AAA", "binary")


class TestMakeBinary:
    def test_distinction_becomes_pass(self):
        d = TabularDataset(
            schema=(ColumnSchema("x", ("a",)),),
            cells=(("a",), ("a",), ("a",)),
            labels=("Fail", "Pass", "Distinction"),
            target_levels=("Fail", "Pass", "Distinction"),
            course_tag="t",
        )
        b = make_binary(d)
        assert b.labels == ("Fail", "Pass", "Pass")
        assert b.target_levels == ("Fail", "Pass")
        assert b.n_rows == d.n_rows
        assert b.cells == d.cells

    def test_binary_input_is_noop(self):
        d = tiny_dataset()
        assert make_binary(d) is d


class TestStratifiedSplit:
    def make_5050(self):
        labels = tuple("Fail" if i < 50 else "Pass" for i in range(100))
        schema = (ColumnSchema("x", ("a", "b")),)
        cells = tuple((("a", "b")[i % 2],) for i in range(100))
        return TabularDataset(
            schema=schema, cells=cells, labels=labels,
            target_levels=("Fail", "Pass"), course_tag="t",
        )

    def test_quarter_split_counts(self):
        pair = stratified_split(self.make_5050(), 0.25, seed=7)
        assert pair.valid.n_rows == 25
        per_class = [pair.valid.labels.count(c) for c in ("Fail", "Pass")]
        assert sorted(per_class) in ([12, 13], [12, 12], [13, 13])
        assert all(12 <= c <= 13 for c in per_class)

    def test_deterministic(self):
        a = stratified_split(self.make_5050(), 0.25, seed=7)
        b = stratified_split(self.make_5050(), 0.25, seed=7)
        assert a.valid.cells == b.valid.cells
        assert a.train.cells == b.train.cells

    def test_partition_is_disjoint_union(self, planted_data, planted_split):
        train, valid = planted_split.train, planted_split.valid
        assert train.n_rows + valid.n_rows == planted_data.n_rows
        all_rows = sorted(train.cells + valid.cells)
        assert all_rows == sorted(planted_data.cells)

    def test_single_class_errors(self):
        d = TabularDataset(
            schema=(ColumnSchema("x", ("a",)),),
            cells=tuple((("a",)) for _ in range(10)),
            labels=("Fail",) * 10,
            target_levels=("Fail", "Pass"),
            course_tag="t",
        )
        with pytest.raises(StratificationError):
            stratified_split(d, 0.25, seed=1)

    def test_bad_ratio_rejected(self):
        with pytest.raises(ValueError, match="ratio"):
            stratified_split(self.make_5050(), 1.5, seed=1)


class TestOneHotEncode:
    def test_group_map_partitions_width(self, planted_data):
        enc = one_hot_encode(planted_data)
        spans = sorted(enc.group_map.values(), key=lambda r: r.start)
        assert spans[0].start == 0
        assert spans[-1].stop == enc.width
        for left, right in zip(spans, spans[1:]):
            assert left.stop == right.start

    def test_rows_one_hot_per_group(self, planted_data):
        enc = one_hot_encode(planted_data)
        for name, cols in enc.group_map.items():
            sums = enc.X[:, cols.start:cols.stop].sum(axis=1)
            assert np.array_equal(sums, np.ones(enc.n_rows))

    def test_encoding_matches_cells(self):
        d = tiny_dataset()
        enc = one_hot_encode(d)
        for r, cells in enumerate(d.cells):
            for c, schema in enumerate(d.schema):
                span = enc.group_map[schema.name]
                hot = np.nonzero(enc.X[r, span.start:span.stop])[0]
                assert schema.levels[hot[0]] == cells[c]

    def test_labels_are_target_indices(self):
        d = tiny_dataset()
        enc = one_hot_encode(d)
        assert enc.labels.tolist() == [d.target_levels.index(l) for l in d.labels]


class TestSynth:
    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SynthSpec(strengths={})
        with pytest.raises(ValueError, match="strength"):
            SynthSpec(strengths={"a": 1.5})
        with pytest.raises(ValueError, match="noise"):
            SynthSpec(strengths={"a": 0.0, "b": 0.0})
        with pytest.raises(ValueError, match="levels"):
            SynthSpec(strengths={"a": 0.5}, levels_per_variable=1)

    def test_strength_order(self):
        spec = SynthSpec(strengths={"a": 0.2, "b": 0.9, "c": 0.5})
        assert spec.strength_order() == ("b", "c", "a")

    def test_generate_shape_and_determinism(self):
        spec = SynthSpec(strengths={"a": 0.8, "b": 0.0})
        d1 = synth_generate(120, spec, seed=3)
        d2 = synth_generate(120, spec, seed=3)
        assert d1.n_rows == 120
        assert d1.variables == ("a", "b")
        assert d1.target_levels == ("Fail", "Pass", "Distinction")
        assert d1.cells == d2.cells and d1.labels == d2.labels
        d3 = synth_generate(120, spec, seed=4)
        assert d1.cells != d3.cells or d1.labels != d3.labels

    def test_generate_rejects_tiny_n(self):
        with pytest.raises(ValueError, match="n_rows"):
            synth_generate(10, SynthSpec(strengths={"a": 0.5}), seed=1)

    def test_all_classes_present(self, planted_data):
        assert set(planted_data.labels) == {"Fail", "Pass", "Distinction"}
