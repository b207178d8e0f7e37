"""JSON forms of states, density operators, circuits and detector sets."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Mapping, Sequence

import jsonschema
import numpy as np

from .detection import ClickPattern, DetectorModel
from .elements import Circuit, ElementSpec
from .fock import DensityOperator, ModeRegistry, Polarization, PureState


class FormatError(ValueError):
    pass


_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_OCCUPATION = {
    "type": "object",
    "additionalProperties": {
        "type": "object",
        "properties": {"H": {"type": "integer", "minimum": 0}, "V": {"type": "integer", "minimum": 0}},
        "additionalProperties": False,
    },
}

STATE_SCHEMA = {
    "type": "object",
    "required": ["paths", "terms"],
    "properties": {
        "paths": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "n_max": {"type": "integer", "minimum": 0},
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["occupation", "amplitude"],
                "properties": {"occupation": _OCCUPATION, "amplitude": _COMPLEX},
                "additionalProperties": False,
            },
        },
    },
}

DENSITY_SCHEMA = {
    "type": "object",
    "required": ["paths", "modes", "basis", "matrix"],
    "properties": {
        "paths": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "n_max": {"type": "integer", "minimum": 0},
        "modes": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        },
        "basis": {"type": "array", "items": _OCCUPATION},
        "matrix": {"type": "array", "items": {"type": "array", "items": _COMPLEX}},
    },
}

CIRCUIT_SCHEMA = {
    "type": "object",
    "required": ["elements"],
    "properties": {
        "name": {"type": "string"},
        "paths": {"type": "array", "items": {"type": "string"}},
        "elements": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind", "inputs", "outputs"],
                "properties": {
                    "kind": {"enum": ["BS", "PBS", "HWP"]},
                    "name": {"type": "string"},
                    "inputs": {"type": "array", "items": {"type": ["string", "null"]}, "minItems": 1, "maxItems": 2},
                    "outputs": {"type": "array", "items": {"type": "string"}, "minItems": 1, "maxItems": 2},
                },
                "additionalProperties": False,
            },
        },
    },
}

DETECTORS_SCHEMA = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "required": ["id", "path"],
        "properties": {
            "id": {"type": "string"},
            "path": {"type": "string"},
            "eta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        },
        "additionalProperties": False,
    },
}


def validate(data: Any, schema: Mapping, what: str) -> None:
    """Raise :class:`FormatError` naming the offending field."""
    errors = sorted(jsonschema.Draft7Validator(schema).iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise FormatError(f"{what}: field {where}: {err.message}")


def load_json(path: str | Path, schema: Mapping | None = None, what: str = "file") -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"{what}: cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{what}: {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if schema is not None:
        validate(data, schema, f"{what} {path}")
    return data


def _cx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _occ_to_json(registry: ModeRegistry, modes: Sequence[int], occ: Sequence[int]) -> dict:
    out: dict[str, dict[str, int]] = {}
    for m, n in zip(modes, occ):
        if n:
            mode = registry.modes[m]
            out.setdefault(mode.path, {"H": 0, "V": 0})[mode.pol.name] = int(n)
    return out


def _occ_from_json(registry: ModeRegistry, modes: Sequence[int], data: Mapping) -> tuple[int, ...]:
    position = {m: i for i, m in enumerate(modes)}
    occ = [0] * len(modes)
    for path, pols in data.items():
        for pol, n in pols.items():
            m = registry.index(path, pol)
            if m not in position:
                raise FormatError(f"mode {path}:{pol} is outside the declared modes")
            occ[position[m]] += int(n)
    return tuple(occ)


def state_to_json(s: PureState) -> dict:
    reg = s.registry
    modes = range(len(reg))
    terms = sorted(s.terms.items())
    return {
        "paths": list(reg.paths),
        "n_max": reg.n_max,
        "terms": [{"occupation": _occ_to_json(reg, modes, occ), "amplitude": _cx(a)} for occ, a in terms],
    }


def state_from_json(data: Mapping, registry: ModeRegistry | None = None) -> PureState:
    validate(data, STATE_SCHEMA, "state")
    reg = registry or ModeRegistry(data["paths"], n_max=data.get("n_max", 4))
    modes = range(len(reg))
    terms: dict[tuple[int, ...], complex] = {}
    for t in data["terms"]:
        occ = _occ_from_json(reg, modes, t["occupation"])
        terms[occ] = terms.get(occ, 0j) + complex(*t["amplitude"])
    return PureState(reg, terms)


def density_to_json(rho: DensityOperator) -> dict:
    reg = rho.registry
    return {
        "paths": list(reg.paths),
        "n_max": reg.n_max,
        "modes": [[reg.modes[m].path, reg.modes[m].pol.name] for m in rho.modes],
        "basis": [_occ_to_json(reg, rho.modes, b) for b in rho.basis],
        "matrix": [[_cx(z) for z in row] for row in rho.matrix],
    }


def density_from_json(data: Mapping, registry: ModeRegistry | None = None) -> DensityOperator:
    validate(data, DENSITY_SCHEMA, "density operator")
    reg = registry or ModeRegistry(data["paths"], n_max=data.get("n_max", 4))
    modes = tuple(reg.index(p, Polarization.parse(pol)) for p, pol in data["modes"])
    basis = tuple(_occ_from_json(reg, modes, b) for b in data["basis"])
    m = np.array([[complex(*z) for z in row] for row in data["matrix"]], dtype=complex)
    return DensityOperator(reg, modes, basis, m)


def circuit_to_json(circuit: Circuit, paths: Sequence[str] | None = None) -> dict:
    out: dict[str, Any] = {"name": circuit.name}
    if paths is not None:
        out["paths"] = list(paths)
    out["elements"] = [
        {"kind": e.kind.value, "name": e.name, "inputs": list(e.inputs), "outputs": list(e.outputs)}
        for e in circuit
    ]
    return out


def circuit_from_json(data: Any) -> Circuit:
    validate(data, CIRCUIT_SCHEMA, "circuit")
    elements = []
    for i, e in enumerate(data["elements"]):
        try:
            elements.append(ElementSpec(e["kind"], tuple(e["inputs"]), tuple(e["outputs"]), e.get("name", "")))
        except ValueError as exc:
            raise FormatError(f"circuit: field elements/{i}: {exc}") from None
    return Circuit(tuple(elements), name=data.get("name", ""))


def detectors_to_json(detectors: Sequence[DetectorModel]) -> list[dict]:
    return [{"id": d.id, "path": d.path, "eta": d.eta} for d in detectors]


def detectors_from_json(data: Any) -> tuple[DetectorModel, ...]:
    validate(data, DETECTORS_SCHEMA, "detectors")
    return tuple(DetectorModel(d["id"], d["path"], d.get("eta", 1.0)) for d in data)


def pattern_results_to_json(results: Mapping[ClickPattern, float]) -> dict[str, float]:
    return {p.label: float(v) for p, v in results.items()}


def clean(value: Any) -> Any:
    """Make a report tree JSON-safe: NaN -> None, complex -> [re, im], numpy -> Python."""
    if isinstance(value, dict):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return _cx(complex(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return clean(value.tolist())
    return value


def dumps(data: Any) -> str:
    return json.dumps(clean(data), indent=2, sort_keys=False, allow_nan=False) + "\n"
