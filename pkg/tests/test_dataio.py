"""Artifact I/O: canonical rendering, round-trips, and manifest integrity."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from frida.curvature import CurvatureProfile
from frida.dataio import (
    DATASET_SCHEMA,
    MANIFEST_SCHEMA,
    DataIOError,
    canonical_json,
    dataset_from_json,
    dataset_to_json,
    fmt_float,
    manifold_from_id,
    manifold_to_id,
    read_dataset,
    trace_csv,
    verify_manifest,
    write_dataset,
    write_manifest,
    write_text,
)
from frida.geometry import Circle, Product, Sphere, TorusPatch
from frida.regression import RegressionDataset, auto_safe_set
from frida.solver import IterateRecord

from geomutil import catalog


# ---------------------------------------------------------------------------
# Float rendering
# ---------------------------------------------------------------------------


def test_fmt_float_round_trips_doubles():
    gen = np.random.default_rng(20240817)
    vals = list(gen.standard_normal(200) * np.exp(gen.uniform(-30, 30, size=200)))
    vals += [0.0, -0.0, 1.0, -1.0, math.pi, 2.0 / 3.0, 1e-308, 1.7e308]
    for v in vals:
        assert float(fmt_float(v)) == float(v)


def test_fmt_float_non_finite():
    assert fmt_float(float("nan")) == "nan"
    assert fmt_float(float("inf")) == "inf"
    assert fmt_float(float("-inf")) == "-inf"


# ---------------------------------------------------------------------------
# Canonical JSON
# ---------------------------------------------------------------------------


def test_canonical_json_single_line_and_order():
    text = canonical_json({"b": 1, "a": [2.5, True, None], "c": {"z": "x"}})
    assert text.endswith("\n") and text.count("\n") == 1
    # insertion order, not sorted
    assert text.index('"b"') < text.index('"a"') < text.index('"c"')
    assert json.loads(text) == {"b": 1, "a": [2.5, True, None], "c": {"z": "x"}}


def test_canonical_json_numpy_and_nonfinite():
    doc = {"arr": np.array([1.0, 2.0]), "bad": float("nan"), "inf": float("inf")}
    loaded = json.loads(canonical_json(doc))
    assert loaded == {"arr": [1.0, 2.0], "bad": None, "inf": None}


def test_canonical_json_rejects_bad_inputs():
    with pytest.raises(DataIOError):
        canonical_json({1: "non-string key"})
    with pytest.raises(DataIOError):
        canonical_json({"obj": object()})


def test_canonical_json_deterministic_bytes():
    doc = {"x": [math.pi, 1e-17], "nested": {"k": -0.0}}
    assert canonical_json(doc) == canonical_json(doc)


# ---------------------------------------------------------------------------
# Manifold ids
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name,m", catalog())
def test_manifold_id_round_trip(name, m):
    back = manifold_from_id(manifold_to_id(m))
    assert manifold_to_id(back) == manifold_to_id(m)
    assert type(back) is type(m)
    assert back.point_dim == m.point_dim


def test_manifold_id_rejects_unknown_variant():
    with pytest.raises(DataIOError):
        manifold_from_id({"variant": "hyperboloid"})
    with pytest.raises(DataIOError):
        manifold_from_id({"no_variant": True})


# ---------------------------------------------------------------------------
# Dataset round-trip
# ---------------------------------------------------------------------------


def _sphere_dataset() -> RegressionDataset:
    gen = np.random.default_rng(7)
    m = Sphere(2)
    c = np.array([0.0, 0.0, 1.0])
    resp = np.stack([m.exp(c, 0.2 * np.append(v / np.linalg.norm(v), 0.0)[:3])
                     for v in gen.standard_normal((6, 2))])
    # tangent draws above live in the z=0 plane at the pole
    xs = np.linspace(0.0, 1.0, 6).reshape(-1, 1)
    return RegressionDataset(m, xs, resp, safe_set=auto_safe_set(m, resp), label="round-trip")


def test_dataset_round_trip_preserves_everything():
    ds = _sphere_dataset()
    back = dataset_from_json(dataset_to_json(ds))
    assert back.label == ds.label
    assert manifold_to_id(back.manifold) == manifold_to_id(ds.manifold)
    np.testing.assert_array_equal(back.predictors, ds.predictors)
    np.testing.assert_array_equal(back.responses, ds.responses)
    assert back.safe_set is not None
    for attr in ("center", "r", "rho_ex", "rho", "iota"):
        assert getattr(back.safe_set, attr) == getattr(ds.safe_set, attr)
    assert back.safe_set.profile == ds.safe_set.profile


def test_dataset_round_trip_custom_profile():
    # tightened catalog bounds must survive the file format
    m = TorusPatch(2.0, 0.7, (0.0, math.pi / 2.0), 2.1)
    gen = np.random.default_rng(3)
    base = np.array([0.0, math.pi / 2.0])
    resp = np.stack([m.exp(base, 0.15 * gen.standard_normal(2)) for _ in range(8)])
    profile = CurvatureProfile(lam_minus=1.1, lam_plus=0.53, l_r=2.6, c_n=2.0)
    ds = RegressionDataset(
        m,
        np.linspace(0, 1, 8).reshape(-1, 1),
        resp,
        safe_set=auto_safe_set(m, resp, profile=profile),
        label="patch",
    )
    back = dataset_from_json(dataset_to_json(ds))
    assert back.safe_set.profile == profile


def test_dataset_without_safe_set():
    m = Circle()
    ds = RegressionDataset(
        m, np.array([[0.0], [1.0]]), np.array([[0.1], [0.2]]), safe_set=None, label="bare"
    )
    back = dataset_from_json(dataset_to_json(ds))
    assert back.safe_set is None
    assert back.label == "bare"


def test_dataset_file_round_trip_bytes(tmp_path):
    ds = _sphere_dataset()
    p1 = write_dataset(tmp_path / "a.json", ds)
    p2 = write_dataset(tmp_path / "b.json", read_dataset(p1))
    assert p1.read_bytes() == p2.read_bytes()


def test_read_dataset_errors(tmp_path):
    with pytest.raises(DataIOError):
        read_dataset(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(DataIOError):
        read_dataset(bad)
    wrong = tmp_path / "wrong.json"
    wrong.write_text('{"schema": "other-1"}', encoding="utf-8")
    with pytest.raises(DataIOError):
        read_dataset(wrong)


# ---------------------------------------------------------------------------
# Trace CSV
# ---------------------------------------------------------------------------


def _record(k: int, y, f: float, d_k: float) -> IterateRecord:
    return IterateRecord(
        k=k, y=np.asarray(y, dtype=float), f=f, grad_f_norm=0.1 * f, d_k=d_k,
        tau_k=2.0, r_k=0.5, mu_k=1.5, L_k=3.0, inner_iters=4, inner_residual=1e-9,
    )


def test_trace_csv_layout():
    trace = [
        _record(0, [1.0, 0.0, 0.0], 1.0, 0.25),
        _record(1, [0.0, 1.0, 0.0], 0.5, float("nan")),
    ]
    text = trace_csv(trace, point_dim=3)
    lines = text.split("\r\n")
    assert lines[-1] == ""  # file ends with CRLF
    header = lines[0].split(",")
    assert header == [
        "k", "f", "grad_norm", "step_dist", "tau", "r_k", "mu", "L",
        "inner_iters", "y0", "y1", "y2",
    ]
    rows = [ln.split(",") for ln in lines[1:-1]]
    assert len(rows) == 2 and all(len(r) == len(header) for r in rows)
    assert rows[0][0] == "0" and rows[1][0] == "1"
    assert rows[1][3] == "nan"  # terminal record has no step
    assert float(rows[0][1]) == 1.0


def test_trace_csv_round_trips_coordinates():
    y = np.array([1.0 / 3.0, -2.0 / 7.0, math.sqrt(0.5)])
    text = trace_csv([_record(0, y, 0.3, 0.1)], point_dim=3)
    row = text.split("\r\n")[1].split(",")
    got = np.array([float(v) for v in row[-3:]])
    np.testing.assert_array_equal(got, y)


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


def test_manifest_round_trip(tmp_path):
    write_text(tmp_path / "a.csv", "x\r\n1\r\n")
    write_text(tmp_path / "sub/b.json", '{"k":1}\n')
    write_manifest(tmp_path, ["a.csv", "sub/b.json"])
    chk = verify_manifest(tmp_path)
    assert chk.ok and chk.missing == () and chk.mismatched == ()


def test_manifest_detects_tamper_and_removal(tmp_path):
    write_text(tmp_path / "a.csv", "x\r\n1\r\n")
    write_text(tmp_path / "b.csv", "y\r\n2\r\n")
    write_manifest(tmp_path, ["a.csv", "b.csv"])
    (tmp_path / "a.csv").write_bytes(b"x\r\n9\r\n")
    (tmp_path / "b.csv").unlink()
    chk = verify_manifest(tmp_path)
    assert not chk.ok
    assert chk.mismatched == ("a.csv",)
    assert chk.missing == ("b.csv",)


def test_manifest_requires_inputs_present(tmp_path):
    with pytest.raises(DataIOError):
        write_manifest(tmp_path, ["ghost.csv"])


def test_verify_manifest_errors(tmp_path):
    with pytest.raises(DataIOError):
        verify_manifest(tmp_path)
    write_text(tmp_path / "manifest.json", '{"schema":"other","files":{}}\n')
    with pytest.raises(DataIOError):
        verify_manifest(tmp_path)


def test_manifest_bytes_independent_of_input_order(tmp_path):
    write_text(tmp_path / "a.csv", "1\r\n")
    write_text(tmp_path / "b.csv", "2\r\n")
    p = write_manifest(tmp_path, ["b.csv", "a.csv"])
    first = p.read_bytes()
    p = write_manifest(tmp_path, ["a.csv", "b.csv"])
    assert p.read_bytes() == first


def test_dataset_schema_tags():
    ds = _sphere_dataset()
    doc = json.loads(dataset_to_json(ds))
    assert doc["schema"] == DATASET_SCHEMA
    assert DATASET_SCHEMA == "frida-dataset-1"
    assert MANIFEST_SCHEMA == "frida-manifest-1"
