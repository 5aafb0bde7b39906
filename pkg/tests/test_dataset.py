import numpy as np
import pytest

from fuzzids.dataset import (
    DatasetSchema,
    LabeledDataset,
    SplitSpec,
    class_distribution,
    load_csv,
    stratified_split,
)
from fuzzids.errors import LoadError, SchemaError

from conftest import make_dataset


NSL_ENCODING = {"normal": 0, "r2l": 1, "u2r": 2, "probe": 3, "dos": 4}
UG_ENCODING = {"A": 0, "S": 1, "SS": 2}


def small_schema(encoding=None):
    return DatasetSchema(
        name="toy",
        columns=(("a", "numeric"), ("b", "categorical"), ("y", "categorical")),
        label_column="y",
        label_encoding=encoding or NSL_ENCODING,
    )


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestSchema:
    def test_duplicate_columns_rejected(self):
        with pytest.raises(SchemaError):
            DatasetSchema("bad", (("a", "numeric"), ("a", "numeric")), "a", {"x": 0})

    def test_label_column_must_exist(self):
        with pytest.raises(SchemaError):
            DatasetSchema("bad", (("a", "numeric"),), "y", {"x": 0})

    def test_encoding_must_be_injective(self):
        with pytest.raises(SchemaError):
            small_schema({"normal": 0, "dos": 0})

    def test_encoding_round_trip(self):
        schema = small_schema()
        for name, code in NSL_ENCODING.items():
            assert schema.decode_label(code) == name

    def test_yaml_round_trip(self, tmp_path):
        import yaml

        schema = small_schema()
        path = tmp_path / "schema.yaml"
        path.write_text(yaml.safe_dump(schema.to_dict()), encoding="utf-8")
        assert DatasetSchema.from_file(path) == schema


class TestLoadCsv:
    def test_nsl_kdd_label_codes(self, tmp_path):
        path = write_csv(tmp_path / "d.csv",
                         "a,b,y\n1,x,normal\n2,x,dos\n3,x,normal\n")
        ds = load_csv(path, small_schema())
        assert ds.labels.tolist() == [0, 4, 0]

    def test_header_only_file_is_empty_dataset(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,b,y\n")
        ds = load_csv(path, small_schema())
        assert len(ds) == 0

    def test_ugransome_label_code(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,b,y\n1,x,SS\n")
        ds = load_csv(path, small_schema(UG_ENCODING))
        assert ds.labels.tolist() == [2]

    def test_reordered_header_accepted(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "y,a,b\nnormal,1,x\n")
        ds = load_csv(path, small_schema())
        assert ds.features[0, 0] == 1.0 and ds.features[0, 1] == "x"

    def test_unparseable_numeric_cell(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,b,y\nnope,x,normal\n")
        with pytest.raises(LoadError, match="column 'a'"):
            load_csv(path, small_schema())

    def test_unknown_label_reported(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,b,y\n1,x,zzz\n")
        with pytest.raises(LoadError, match="zzz"):
            load_csv(path, small_schema())

    def test_missing_column_is_schema_error(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,y\n1,normal\n")
        with pytest.raises(SchemaError, match="missing"):
            load_csv(path, small_schema())

    def test_missing_value_is_error(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,b,y\n,x,normal\n")
        with pytest.raises(LoadError, match="missing value"):
            load_csv(path, small_schema())


class TestClassDistribution:
    def test_direct_count(self):
        ds = make_dataset([[0.0], [0.0], [1.0]], [0, 0, 1])
        assert class_distribution(ds) == {0: 2, 1: 1}

    def test_empty_dataset_all_zero(self):
        ds = make_dataset(np.empty((0, 1)), [], labels={"a": 0, "b": 1})
        assert class_distribution(ds) == {0: 0, 1: 0}

    def test_every_encoded_class_present(self):
        ds = make_dataset([[0.0]], [0], labels={"a": 0, "b": 1, "c": 2})
        assert class_distribution(ds) == {0: 1, 1: 0, 2: 0}

    def test_counts_sum_to_n(self, rng):
        y = rng.integers(0, 3, size=100)
        ds = make_dataset(rng.uniform(size=(100, 2)), y,
                          labels={"a": 0, "b": 1, "c": 2})
        assert sum(class_distribution(ds).values()) == 100


class TestStratifiedSplit:
    def test_exact_stratification(self):
        y = [0] * 5 + [1] * 5
        ds = make_dataset(np.arange(10).reshape(-1, 1), y)
        train, val = stratified_split(ds, SplitSpec((0.8, 0.2), seed=1))
        assert len(train) == 8 and len(val) == 2
        assert class_distribution(train) == {0: 4, 1: 4}
        assert class_distribution(val) == {0: 1, 1: 1}

    def test_same_seed_identical_partition(self):
        ds = make_dataset(np.arange(30).reshape(-1, 1), [0, 1, 2] * 10,
                          labels={"a": 0, "b": 1, "c": 2})
        t1, v1 = stratified_split(ds, SplitSpec(seed=1))
        t2, v2 = stratified_split(ds, SplitSpec(seed=1))
        assert np.array_equal(t1.features, t2.features)
        assert np.array_equal(v1.labels, v2.labels)

    def test_different_seed_different_partition_same_counts(self):
        ds = make_dataset(np.arange(50).reshape(-1, 1), [0, 1] * 25)
        t1, v1 = stratified_split(ds, SplitSpec(seed=1))
        t2, v2 = stratified_split(ds, SplitSpec(seed=2))
        assert class_distribution(v1) == class_distribution(v2)
        assert not np.array_equal(v1.features, v2.features)

    def test_partition_property(self, rng):
        for _ in range(20):
            n = int(rng.integers(10, 60))
            y = rng.integers(0, 3, size=n)
            y[:3] = [0, 1, 2]  # each class represented
            x = np.arange(n, dtype=float).reshape(-1, 1)
            ds = make_dataset(x, y, labels={"a": 0, "b": 1, "c": 2})
            train, val = stratified_split(ds, SplitSpec(seed=int(rng.integers(1e6))))
            merged = sorted(
                train.features[:, 0].tolist() + val.features[:, 0].tolist()
            )
            assert merged == x[:, 0].tolist()

    def test_stratification_property(self, rng):
        for _ in range(10):
            n = int(rng.integers(20, 200))
            y = rng.integers(0, 3, size=n)
            y[:3] = [0, 1, 2]
            ds = make_dataset(rng.uniform(size=(n, 1)), y,
                              labels={"a": 0, "b": 1, "c": 2})
            _, val = stratified_split(ds, SplitSpec((0.7, 0.3), seed=9))
            total = class_distribution(ds)
            in_val = class_distribution(val)
            for c, count in total.items():
                assert abs(in_val[c] / count - 0.3) <= 1.0 / count

    def test_tiny_class_warns(self):
        ds = make_dataset(np.arange(11).reshape(-1, 1), [0] * 10 + [1])
        with pytest.warns(UserWarning):
            train, val = stratified_split(ds, SplitSpec((0.9, 0.1), seed=3))
        assert class_distribution(val)[1] == 0

    def test_unstratified_mode(self):
        ds = make_dataset(np.arange(10).reshape(-1, 1), [0] * 5 + [1] * 5)
        train, val = stratified_split(ds, SplitSpec((0.8, 0.2), seed=4,
                                                    stratified=False))
        assert len(train) == 8 and len(val) == 2
