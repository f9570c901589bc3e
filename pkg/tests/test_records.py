import csv
import json

import jsonschema
import numpy as np
import pytest

from ltlab.records import RunManifest, atomic_write_text, code_version, fmt, load_schema, write_csv, write_json


def test_fmt_round_trips_doubles(rng):
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-20, 20, 200):
        assert float(fmt(float(x))) == x
    assert fmt(True) == "true" and fmt(np.float64("nan")) == "nan" and fmt(None) == ""
    assert fmt(np.int64(3)) == "3"


def test_csv_is_rfc4180(tmp_path):
    p = write_csv(tmp_path / "a.csv", ["k", "text"], [(1, 'say "hi", ok'), {"k": 2, "text": "x"}])
    raw = p.read_bytes()
    assert raw.count(b"\r\n") == 3 and raw.startswith(b"k,text\r\n")
    with open(p, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows == [["k", "text"], ["1", 'say "hi", ok'], ["2", "x"]]


def test_atomic_write_leaves_no_temp(tmp_path):
    atomic_write_text(tmp_path / "sub" / "f.txt", "one")
    atomic_write_text(tmp_path / "sub" / "f.txt", "two")
    assert [f.name for f in (tmp_path / "sub").iterdir()] == ["f.txt"]
    assert (tmp_path / "sub" / "f.txt").read_text() == "two"


def test_json_sorted_and_numpy_safe(tmp_path):
    p = write_json(tmp_path / "x.json", {"b": np.float64(1.5), "a": (1, 2), "c": float("inf")})
    assert json.loads(p.read_text()) == {"a": [1, 2], "b": 1.5, "c": "inf"}
    assert p.read_text().index('"a"') < p.read_text().index('"b"')


def test_manifest_round_trip(tmp_path):
    m = RunManifest("verify bounds", {"grid": 64, "r0": 2.0}, 0, ["bounds.csv"])
    m.write(tmp_path / "m.json")
    back = RunManifest.read(tmp_path / "m.json")
    assert back == m
    assert code_version().startswith("0.1.0")


def test_schema_rejects_bad_manifest(tmp_path):
    schema = load_schema()
    good = RunManifest("iterate", {}, 1).to_dict()
    jsonschema.validate(good, schema)
    for bad in ({**good, "extra": 1}, {k: v for k, v in good.items() if k != "seed"}, {**good, "seed": "1"}):
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(bad, schema)
    (tmp_path / "bad.json").write_text(json.dumps({**good, "extra": 1}))
    with pytest.raises(jsonschema.ValidationError):
        RunManifest.read(tmp_path / "bad.json")
