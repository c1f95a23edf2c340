"""JSON state/scenario files and deterministic CSV/JSON emission.

Matrices are ``{"dim": N, "entries": [[re, im], ...]}`` in row-major order;
vectors are ``{"amplitudes": [[re, im], ...]}``. CSV floats use 17
significant digits so every double round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .povm_design import PovmFamily, ScenarioSpec, theta_grid
from .qmatrix import DensityMatrix, pure_state, validate_density
from .wwd import validate_povm


def _complex_list(raw, what: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: entries must be [re, im] pairs") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ParseError(f"{what}: entries must be [re, im] pairs, got shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def _pairs(z) -> list[list[float]]:
    z = np.asarray(z, dtype=np.complex128).ravel()
    return [[float(x.real), float(x.imag)] for x in z]


def matrix_from_json(obj, what: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict) or "dim" not in obj or "entries" not in obj:
        raise ParseError(f"{what}: expected an object with 'dim' and 'entries'")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ParseError(f"{what}: 'dim' must be a positive integer")
    z = _complex_list(obj["entries"], what)
    if z.size != dim * dim:
        raise ParseError(f"{what}: expected {dim * dim} entries, got {z.size}")
    return z.reshape(dim, dim)


def matrix_to_json(m) -> dict:
    m = np.asarray(m)
    return {"dim": int(m.shape[0]), "entries": _pairs(m)}


def vector_from_json(obj, what: str = "vector") -> np.ndarray:
    if not isinstance(obj, dict) or "amplitudes" not in obj:
        raise ParseError(f"{what}: expected an object with 'amplitudes'")
    return _complex_list(obj["amplitudes"], what)


def vector_to_json(v) -> dict:
    return {"amplitudes": _pairs(v)}


def _read_json(path) -> object:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON ({exc})") from exc


def load_state(path) -> DensityMatrix:
    """A density matrix file, or a pure-state vector file."""
    obj = _read_json(path)
    if isinstance(obj, dict) and "amplitudes" in obj:
        v = vector_from_json(obj, "state")
        return pure_state(v, normalize=bool(obj.get("normalize", False))).density()
    return validate_density(matrix_from_json(obj, "state"))


def scenario_to_json(s: ScenarioSpec) -> dict:
    th = np.asarray(s.thetas)
    return {
        "name": s.name,
        "description": s.description,
        "psi_s": vector_to_json(s.psi_s.amplitudes),
        "detector_states": [vector_to_json(d) for d in s.detector_states],
        "povm_a": [matrix_to_json(e) for e in s.family.endpoint_a.effects],
        "povm_b": [matrix_to_json(e) for e in s.family.endpoint_b.effects],
        "theta": {"start": float(th[0]), "stop": float(th[-1]), "steps": int(th.size)},
    }


def scenario_from_json(obj) -> ScenarioSpec:
    if not isinstance(obj, dict):
        raise ParseError("scenario: expected a JSON object")
    try:
        normalize = bool(obj.get("normalize", False))
        psi = pure_state(vector_from_json(obj["psi_s"], "psi_s"), normalize=normalize)
        ds = np.array([pure_state(vector_from_json(d, "detector state"), normalize=normalize).amplitudes
                       for d in obj["detector_states"]])
        fa = validate_povm([matrix_from_json(e, "povm_a effect") for e in obj["povm_a"]])
        fb = validate_povm([matrix_from_json(e, "povm_b effect") for e in obj["povm_b"]])
        grid = obj.get("theta", {})
        thetas = theta_grid(float(grid.get("start", 0.0)), float(grid.get("stop", np.pi / 2)),
                            int(grid.get("steps", 181)))
    except KeyError as exc:
        raise ParseError(f"scenario: missing field {exc}") from exc
    return ScenarioSpec(str(obj.get("name", "custom")), psi, ds, PovmFamily(fa, fb), thetas,
                        str(obj.get("description", "")))


def load_scenario(path) -> ScenarioSpec:
    return scenario_from_json(_read_json(path))


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def to_plain(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def rows_to_json(rows: list[dict], columns: list[str]) -> str:
    return json.dumps([{c: to_plain(r[c]) for c in columns} for r in rows], indent=1) + "\n"


def render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "csv":
        return rows_to_csv(rows, columns)
    if fmt == "json":
        return rows_to_json(rows, columns)
    raise ValueError(f"unknown format {fmt!r}")
