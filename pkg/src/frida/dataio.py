"""Deterministic artifact I/O: datasets, trace CSVs, summaries, manifests.

Every writer renders floats with '%.17g' (exact double round-trip), keeps a
fixed key order, and never emits timestamps, so re-running a generator with
the same inputs reproduces every file byte for byte. JSON files hold one
object per file with a `schema` tag; traces are RFC 4180 CSV with CRLF line
endings. The manifest (sha256 per file) is always written last so a partial
directory never carries a valid manifest.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .curvature import CurvatureProfile, SafeSetGeometry
from .geometry import Circle, Manifold, Product, Sphere, TorusPatch
from .regression import RegressionDataset
from .solver import IterateRecord, SolveResult

__all__ = [
    "DataIOError",
    "canonical_json",
    "dataset_from_json",
    "dataset_to_json",
    "fmt_float",
    "manifold_from_id",
    "manifold_to_id",
    "read_dataset",
    "trace_csv",
    "verify_manifest",
    "write_dataset",
    "write_manifest",
    "write_text",
]

DATASET_SCHEMA = "frida-dataset-1"
MANIFEST_SCHEMA = "frida-manifest-1"
MANIFEST_NAME = "manifest.json"


class DataIOError(ValueError):
    """Raised on malformed artifact files or unserializable inputs."""


def fmt_float(x: float) -> str:
    """Canonical decimal rendering: shortest '%.17g' text, exact round-trip."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


# ---------------------------------------------------------------------------
# Canonical JSON
# ---------------------------------------------------------------------------


def _render_json(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        # strict JSON has no non-finite literals
        out.append("null" if not math.isfinite(x) else fmt_float(x))
    elif isinstance(obj, np.ndarray):
        _render_json(obj.tolist(), out)
    elif isinstance(obj, Mapping):
        out.append("{")
        for i, (key, val) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise DataIOError(f"JSON keys must be strings, got {type(key).__name__}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _render_json(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, val in enumerate(obj):
            if i:
                out.append(",")
            _render_json(val, out)
        out.append("]")
    else:
        raise DataIOError(f"cannot serialize {type(obj).__name__} to JSON")


def canonical_json(obj) -> str:
    """Single-line JSON with insertion key order and '%.17g' floats."""
    out: list[str] = []
    _render_json(obj, out)
    out.append("\n")
    return "".join(out)


def write_text(path: Path | str, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode("utf-8"))
    return path


# ---------------------------------------------------------------------------
# Manifold ids
# ---------------------------------------------------------------------------


def manifold_to_id(m: Manifold) -> dict:
    if isinstance(m, Sphere):
        return {"variant": "sphere", "dim": m.dim}
    if isinstance(m, Circle):
        return {"variant": "circle"}
    if isinstance(m, TorusPatch):
        return {
            "variant": "torus_patch",
            "major_radius": m.major_radius,
            "minor_radius": m.minor_radius,
            "center": list(m.center),
            "patch_radius": m.patch_radius,
        }
    if isinstance(m, Product):
        return {"variant": "product", "factors": [manifold_to_id(f) for f in m.factors]}
    raise DataIOError(f"no id form for manifold {type(m).__name__}")


def manifold_from_id(d: Mapping) -> Manifold:
    try:
        variant = d["variant"]
    except (KeyError, TypeError):
        raise DataIOError(f"manifold id needs a 'variant' key, got {d!r}") from None
    if variant == "sphere":
        return Sphere(int(d["dim"]))
    if variant == "circle":
        return Circle()
    if variant == "torus_patch":
        return TorusPatch(
            major_radius=float(d["major_radius"]),
            minor_radius=float(d["minor_radius"]),
            center=(float(d["center"][0]), float(d["center"][1])),
            patch_radius=float(d["patch_radius"]),
        )
    if variant == "product":
        return Product(tuple(manifold_from_id(f) for f in d["factors"]))
    raise DataIOError(f"unknown manifold variant {variant!r}")


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------


def _safe_set_to_json(safe: SafeSetGeometry | None) -> dict | None:
    if safe is None:
        return None
    # The profile travels with the safe set: presets may tighten or widen the
    # manifold's catalog bounds, and every solver constant depends on it.
    return {
        "center": list(safe.center),
        "r": safe.r,
        "rho_ex": safe.rho_ex,
        "rho": safe.rho,
        "iota": safe.iota,
        "profile": {
            "lam_minus": safe.profile.lam_minus,
            "lam_plus": safe.profile.lam_plus,
            "l_r": safe.profile.l_r,
            "c_n": safe.profile.c_n,
        },
    }


def dataset_to_json(dataset: RegressionDataset) -> str:
    doc = {
        "schema": DATASET_SCHEMA,
        "label": dataset.label,
        "manifold": manifold_to_id(dataset.manifold),
        "predictors": dataset.predictors,
        "responses": dataset.responses,
        "safe_set": _safe_set_to_json(dataset.safe_set),
    }
    return canonical_json(doc)


def dataset_from_json(text: str) -> RegressionDataset:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise DataIOError(f"dataset file is not valid JSON: {err}") from None
    if not isinstance(doc, dict) or doc.get("schema") != DATASET_SCHEMA:
        raise DataIOError(
            f"expected a {DATASET_SCHEMA!r} document, got schema {doc.get('schema')!r}"
            if isinstance(doc, dict) else "dataset file must hold a JSON object"
        )
    manifold = manifold_from_id(doc["manifold"])
    safe = None
    if doc.get("safe_set") is not None:
        s = doc["safe_set"]
        if "profile" in s:
            p = s["profile"]
            profile = CurvatureProfile(
                lam_minus=float(p["lam_minus"]),
                lam_plus=float(p["lam_plus"]),
                l_r=float(p["l_r"]),
                c_n=float(p["c_n"]),
            )
        else:
            profile = manifold.curvature_profile()
        safe = SafeSetGeometry(
            center=tuple(float(v) for v in s["center"]),
            r=float(s["r"]),
            rho_ex=float(s["rho_ex"]),
            rho=float(s["rho"]),
            iota=float(s["iota"]),
            profile=profile,
        )
    return RegressionDataset(
        manifold,
        np.asarray(doc["predictors"], dtype=float),
        np.asarray(doc["responses"], dtype=float),
        safe_set=safe,
        label=str(doc.get("label", "")),
    )


def write_dataset(path: Path | str, dataset: RegressionDataset) -> Path:
    return write_text(path, dataset_to_json(dataset))


def read_dataset(path: Path | str) -> RegressionDataset:
    path = Path(path)
    if not path.is_file():
        raise DataIOError(f"dataset file {path} does not exist")
    return dataset_from_json(path.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Trace CSV
# ---------------------------------------------------------------------------


def _csv_field(value: str) -> str:
    if any(ch in value for ch in ',"\r\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def _csv_line(fields: Iterable[str]) -> str:
    return ",".join(_csv_field(f) for f in fields) + "\r\n"


def trace_csv(trace: Sequence[IterateRecord], point_dim: int) -> str:
    """One row per outer record, RFC 4180, CRLF line endings.

    Fixed columns first, then the iterate coordinates y0..y{point_dim-1}.
    NaN renders as 'nan' (step-only fields of terminal and GD records).
    """
    header = ["k", "f", "grad_norm", "step_dist", "tau", "r_k", "mu", "L", "inner_iters"]
    header += [f"y{i}" for i in range(point_dim)]
    lines = [_csv_line(header)]
    for rec in trace:
        row = [
            str(rec.k),
            fmt_float(rec.f),
            fmt_float(rec.grad_f_norm),
            fmt_float(rec.d_k),
            fmt_float(rec.tau_k),
            fmt_float(rec.r_k),
            fmt_float(rec.mu_k),
            fmt_float(rec.L_k),
            str(rec.inner_iters),
        ]
        row += [fmt_float(v) for v in np.asarray(rec.y, dtype=float)]
        lines.append(_csv_line(row))
    return "".join(lines)


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: Path | str, files: Sequence[str]) -> Path:
    """Hash the named files (relative to out_dir) and write manifest.json.

    Call this after every other file is on disk; the sorted name list makes
    the manifest independent of write order.
    """
    out_dir = Path(out_dir)
    entries = {}
    for name in sorted(files):
        path = out_dir / name
        if not path.is_file():
            raise DataIOError(f"manifest input {name!r} is missing from {out_dir}")
        entries[name] = _sha256(path)
    doc = {"schema": MANIFEST_SCHEMA, "files": entries}
    return write_text(out_dir / MANIFEST_NAME, canonical_json(doc))


@dataclass(frozen=True)
class ManifestCheck:
    ok: bool
    missing: tuple[str, ...]
    mismatched: tuple[str, ...]


def verify_manifest(out_dir: Path | str) -> ManifestCheck:
    out_dir = Path(out_dir)
    path = out_dir / MANIFEST_NAME
    if not path.is_file():
        raise DataIOError(f"no {MANIFEST_NAME} in {out_dir}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("schema") != MANIFEST_SCHEMA:
        raise DataIOError(f"manifest schema {doc.get('schema')!r} is not {MANIFEST_SCHEMA!r}")
    missing: list[str] = []
    mismatched: list[str] = []
    for name, digest in doc["files"].items():
        target = out_dir / name
        if not target.is_file():
            missing.append(name)
        elif _sha256(target) != digest:
            mismatched.append(name)
    return ManifestCheck(not missing and not mismatched, tuple(missing), tuple(mismatched))
