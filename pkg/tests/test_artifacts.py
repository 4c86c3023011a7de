import json

import numpy as np
import pytest

from gpcurve.artifacts import read_csv, read_json, tagged, write_csv, write_json, ensure_dir
from gpcurve.errors import ArtifactIOError


def test_json_is_deterministic_and_clean(tmp_path):
    data = {"b": np.float64(1.0 / 3.0), "a": np.arange(3), "c": np.array(2.5), "flag": np.bool_(True), "bad": float("nan")}
    p1, p2 = tmp_path / "1.json", tmp_path / "2.json"
    write_json(str(p1), data)
    write_json(str(p2), dict(reversed(list(data.items()))))
    assert p1.read_bytes() == p2.read_bytes()
    back = read_json(str(p1))
    assert back["a"] == [0, 1, 2] and back["c"] == 2.5 and back["flag"] is True and back["bad"] == "nan"


def test_csv_round_trip(tmp_path):
    p = tmp_path / "x.csv"
    cols = [np.linspace(0, 1, 5), np.exp(np.linspace(0, 1, 5))]
    write_csv(str(p), cols, ["x", "y"])
    header, data = read_csv(str(p))
    assert header == ["x", "y"]
    assert np.max(np.abs(data - np.column_stack(cols))) < 1e-14


def test_io_errors(tmp_path):
    with pytest.raises(ArtifactIOError):
        read_json(str(tmp_path / "nope.json"))
    with pytest.raises(ArtifactIOError):
        read_csv(str(tmp_path / "nope.csv"))
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ArtifactIOError):
        ensure_dir(str(blocker / "sub"))
    with pytest.raises(ArtifactIOError):
        write_json(str(blocker / "x.json"), {})


def test_tagged_entry():
    assert tagged(1.0, "length", "derived") == {"value": 1.0, "units": "length", "origin": "derived"}
    json.dumps(tagged(1.0))
