import json
import math

import numpy as np

from ilwsse.output import (canonical_json, config_hash, file_metadata, read_csv, to_jsonable,
                           write_csv, write_json)


def test_canonical_json_is_order_independent():
    assert canonical_json({"b": 1, "a": [1.5, 2]}) == canonical_json({"a": [1.5, 2], "b": 1})
    assert config_hash({"b": 1, "a": 2}) == config_hash({"a": 2, "b": 1})
    assert config_hash({"a": 2}) != config_hash({"a": 3})


def test_jsonable_handles_numpy_complex_and_nonfinite():
    out = to_jsonable({"x": np.float64(0.5), "n": np.int64(3), "z": 1 - 2j,
                       "arr": np.arange(3), "bad": [math.inf, -math.inf, math.nan],
                       "flag": np.bool_(True)})
    assert out == {"x": 0.5, "n": 3, "z": {"re": 1.0, "im": -2.0}, "arr": [0, 1, 2],
                   "bad": ["inf", "-inf", "nan"], "flag": True}
    json.dumps(out)


def test_metadata_has_hash_and_versions_without_time():
    meta = file_metadata("scattering", {"N": 4})
    assert meta["config_hash"] == config_hash({"N": 4})
    assert set(meta["dependencies"]) >= {"numpy", "scipy", "python-flint"}
    text = canonical_json(meta).lower()
    assert "time" not in text and "date" not in text


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(7)
    rows = rng.standard_normal((20, 3))
    meta = file_metadata("ensemble", {"seed": 7})
    path = write_csv(tmp_path / "t.csv", ["a", "b", "c"], rows, meta)
    m, cols, back = read_csv(path)
    assert m == json.loads(canonical_json(meta))
    assert cols == ["a", "b", "c"]
    assert np.array_equal(back, rows)


def test_writes_are_byte_identical(tmp_path):
    meta = file_metadata("verify", {"criteria": [1]})
    a = write_json(tmp_path / "a.json", {"v": [0.1, 1e-300]}, meta).read_bytes()
    b = write_json(tmp_path / "b.json", {"v": [0.1, 1e-300]}, meta).read_bytes()
    assert a == b
