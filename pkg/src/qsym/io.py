"""JSON formats shared by the CLI: circuits, matrices, states and channels.

Complex numbers are ``[re, im]`` pairs. Circuit documents are validated with
jsonschema first, then semantically (wire ranges, gate arity, expression
syntax); every error carries a JSON-pointer path to the offending value.
"""

from __future__ import annotations

import json
from typing import Any

import jsonschema
import numpy as np

from .backend import NoiseEntry, NoiseSpec
from .channel import NOISE_MODELS, Channel
from .circuit import BUILTIN_GATES, Circuit, GateApp, builtin
from .errors import ExprSyntaxError, IoError, QsymError, SchemaError
from .qstate import QState, RegisterShape
from .symexpr import Expr, parse_expr, to_string
from .symlinalg import SymMatrix

_NUMBER = {"type": "number"}
_COMPLEX = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _COMPLEX}}
_WIRES = {"type": "array", "items": {"type": "integer", "minimum": 0}}

GATE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "targets"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "targets": dict(_WIRES, minItems=1),
        "controls": _WIRES,
        "params": {"type": "array", "items": {"type": ["string", "number"]}},
        "matrix": _MATRIX,
        "cbit": {"type": "string", "minLength": 1},
        "condition": {"type": "string", "minLength": 1},
    },
}

NOISE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["qubit", "kind", "param", "after_gate_index"],
    "properties": {
        "qubit": {"type": "integer", "minimum": 0},
        "kind": {"type": "string", "enum": sorted(NOISE_MODELS)},
        "param": {"type": ["number", "string"]},
        "after_gate_index": {"type": "integer", "minimum": -1},
    },
}

CIRCUIT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["num_qubits", "gates"],
    "properties": {
        "num_qubits": {"type": "integer", "minimum": 1},
        "gates": {"type": "array", "items": GATE_SCHEMA},
        "noise": {"type": "array", "items": NOISE_SCHEMA},
        "bindings": {"type": "object", "additionalProperties": {"type": ["number", "string"]}},
    },
}

CHANNEL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kraus": {"type": "array", "minItems": 1, "items": _MATRIX},
        "superoperator": _MATRIX,
        "choi": _MATRIX,
        "dim_in": {"type": "integer", "minimum": 1},
        "dim_out": {"type": "integer", "minimum": 1},
        "trace_preserving": {"type": "boolean"},
    },
    "oneOf": [{"required": ["kraus"]}, {"required": ["superoperator"]}, {"required": ["choi"]}],
}


def pointer(parts) -> str:
    out = ""
    for p in parts:
        out += "/" + str(p).replace("~", "~0").replace("/", "~1")
    return out or "/"


def validate_schema(doc: Any, schema: dict) -> None:
    """Raise :class:`SchemaError` for the first (deepest, leftmost) violation."""
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if not errors:
        return
    err = jsonschema.exceptions.best_match(errors)
    parts = list(err.absolute_path)
    if err.validator == "additionalProperties" and isinstance(err.instance, dict):
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(k for k in err.instance if k not in allowed)
        if extra:
            raise SchemaError(pointer(parts + [extra[0]]), f"unknown field {extra[0]!r}")
    raise SchemaError(pointer(parts), err.message)


# ---------------------------------------------------------------- numbers / matrices


def complex_to_json(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def matrix_to_json(m) -> list:
    arr = m.to_numpy() if isinstance(m, SymMatrix) else np.asarray(m, dtype=np.complex128)
    return [[complex_to_json(z) for z in row] for row in arr]


def vector_to_json(v) -> list:
    arr = np.asarray(v.to_numpy() if isinstance(v, SymMatrix) else v, dtype=np.complex128).reshape(-1)
    return [complex_to_json(z) for z in arr]


def matrix_from_json(data, path: str = "") -> np.ndarray:
    try:
        arr = np.array([[complex(re, im) for re, im in row] for row in data], dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise SchemaError(path or "/", f"matrix entries must be [re, im] pairs ({exc})") from None
    if arr.ndim != 2:
        raise SchemaError(path or "/", "matrix rows must have equal length")
    return arr


def vector_from_json(data, path: str = "") -> np.ndarray:
    try:
        return np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    except (TypeError, ValueError):
        raise SchemaError(path or "/", "vector entries must be [re, im] pairs") from None


def symbolic_vector_to_json(v: SymMatrix) -> list:
    """Exact entries as expression strings; numeric storage as [re, im] pairs."""
    if not v.is_symbolic:
        return vector_to_json(v)
    return [to_string(e) for e in v.data.reshape(-1)]


def state_to_json(st: QState) -> dict:
    if st.is_pure:
        body = symbolic_vector_to_json(st.body) if st.body.is_symbolic else vector_to_json(st.body)
        return {"dims": list(st.shape.dims), "amplitudes": body}
    return {"dims": list(st.shape.dims), "density": matrix_to_json(st.body)}


def state_from_json(spec, dim: int | None = None, path: str = "") -> QState:
    """State spec: basis index, list of [re, im] amplitudes, list of expression strings,
    or an object with ``amplitudes`` / ``density`` / ``basis``."""
    if isinstance(spec, bool):
        raise SchemaError(path or "/", "state spec cannot be a boolean")
    if isinstance(spec, int):
        if dim is None:
            raise SchemaError(path or "/", "basis index needs a known dimension")
        return QState.basis(spec, RegisterShape.for_dim(dim))
    if isinstance(spec, dict):
        dims = spec.get("dims")
        shape = RegisterShape(tuple(dims)) if dims else None
        if "basis" in spec:
            d = shape.total if shape else dim
            return QState.basis(int(spec["basis"]), shape or RegisterShape.for_dim(d))
        if "amplitudes" in spec:
            return _vector_state(spec["amplitudes"], shape, path + "/amplitudes")
        if "density" in spec:
            return QState(matrix_from_json(spec["density"], path + "/density"), shape, "mixed")
        raise SchemaError(path or "/", "state object needs basis, amplitudes or density")
    if isinstance(spec, list):
        return _vector_state(spec, None, path)
    raise SchemaError(path or "/", f"unsupported state spec {spec!r}")


def _vector_state(items, shape, path) -> QState:
    if items and all(isinstance(x, str) for x in items):
        entries = []
        for k, s in enumerate(items):
            entries.append(_parse_at(s, f"{path}/{k}"))
        body = SymMatrix(np.array(entries, dtype=object).reshape(-1, 1))
        return QState(body, shape, "pure", validate=False)
    return QState(vector_from_json(items, path), shape, "pure")


def _parse_at(text: str, path: str) -> Expr:
    try:
        return parse_expr(text)
    except ExprSyntaxError as exc:
        exc.path = path
        raise


# ---------------------------------------------------------------- circuits


def circuit_from_json(doc: dict) -> tuple[Circuit, NoiseSpec, dict]:
    """Validate and convert a circuit document to (circuit, noise, bindings)."""
    validate_schema(doc, CIRCUIT_SCHEMA)
    n = doc["num_qubits"]
    gates = []
    for i, g in enumerate(doc["gates"]):
        base = f"/gates/{i}"
        for key in ("targets", "controls"):
            for j, w in enumerate(g.get(key, [])):
                if w >= n:
                    raise SchemaError(f"{base}/{key}/{j}", f"wire {w} outside 0..{n - 1}")
        wires = list(g["targets"]) + list(g.get("controls", []))
        if len(set(wires)) != len(wires):
            raise SchemaError(f"{base}/targets", f"repeated wire in {wires}")
        params = [
            _parse_at(p, f"{base}/params/{j}") if isinstance(p, str) else p for j, p in enumerate(g.get("params", []))
        ]
        name = g["name"]
        matrix = None
        is_measure = name.strip().lower() == "measure"
        if "matrix" in g:
            matrix = SymMatrix(matrix_from_json(g["matrix"], f"{base}/matrix"))
            k = len(g["targets"])
            if matrix.shape != (1 << k, 1 << k):
                raise SchemaError(f"{base}/matrix", f"shape {matrix.shape} does not act on {k} targets")
        elif is_measure:
            if "cbit" not in g:
                raise SchemaError(f"{base}/cbit", "measure needs a classical bit name")
            if len(g["targets"]) != 1:
                raise SchemaError(f"{base}/targets", "measure acts on exactly one wire")
        else:
            d = builtin(name)
            if d is None:
                raise SchemaError(f"{base}/name", f"unknown gate {name!r}; builtins are {sorted(BUILTIN_GATES)}")
            if len(g["targets"]) != d.num_targets:
                raise SchemaError(f"{base}/targets", f"gate {d.name} acts on {d.num_targets} wires")
            if len(params) != d.num_params:
                raise SchemaError(f"{base}/params", f"gate {d.name} takes {d.num_params} parameters")
        try:
            gates.append(
                GateApp(name, tuple(g["targets"]), tuple(g.get("controls", ())), tuple(params), matrix,
                        g.get("condition"), g.get("cbit"))
            )
        except QsymError as exc:
            raise SchemaError(base, str(exc)) from None
    measured = set()
    for i, g in enumerate(gates):
        if g.condition is not None and g.condition not in measured:
            raise SchemaError(f"/gates/{i}/condition", f"classical bit {g.condition!r} is not measured earlier")
        if g.is_measure:
            measured.add(g.cbit)
    circuit = Circuit(n, tuple(gates))
    entries = []
    for i, e in enumerate(doc.get("noise", [])):
        if e["qubit"] >= n:
            raise SchemaError(f"/noise/{i}/qubit", f"qubit {e['qubit']} outside 0..{n - 1}")
        if e["after_gate_index"] >= len(gates):
            raise SchemaError(f"/noise/{i}/after_gate_index", f"circuit has {len(gates)} gates")
        p = e["param"]
        if isinstance(p, str):
            _parse_at(p, f"/noise/{i}/param")
        elif not 0.0 <= p <= 1.0:
            raise SchemaError(f"/noise/{i}/param", f"noise parameter {p} outside [0, 1]")
        entries.append(NoiseEntry(e["qubit"], e["kind"], p, e["after_gate_index"]))
    bindings = {}
    for k, v in doc.get("bindings", {}).items():
        bindings[k] = _parse_at(v, f"/bindings/{k}") if isinstance(v, str) else v
    return circuit, NoiseSpec(tuple(entries)), bindings


def _param_to_json(p: Expr):
    return to_string(p)


def circuit_to_json(c: Circuit, noise: NoiseSpec | None = None, bindings: dict | None = None) -> dict:
    gates = []
    for g in c.gates:
        item: dict[str, Any] = {"name": g.name, "targets": list(g.targets)}
        if g.controls:
            item["controls"] = list(g.controls)
        if g.params:
            item["params"] = [_param_to_json(p) for p in g.params]
        if g.matrix is not None:
            item["matrix"] = matrix_to_json(g.matrix)
        if g.cbit:
            item["cbit"] = g.cbit
        if g.condition:
            item["condition"] = g.condition
        gates.append(item)
    doc: dict[str, Any] = {"num_qubits": c.num_qubits, "gates": gates}
    if noise and noise.entries:
        doc["noise"] = [
            {"qubit": e.qubit, "kind": e.kind, "param": e.param if not isinstance(e.param, Expr) else to_string(e.param),
             "after_gate_index": e.after_gate_index}
            for e in noise.entries
        ]
    if bindings:
        doc["bindings"] = {k: (to_string(v) if isinstance(v, Expr) else v) for k, v in bindings.items()}
    return doc


def load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_circuit_file(path: str) -> tuple[Circuit, NoiseSpec, dict]:
    return circuit_from_json(load_json(path))


# ---------------------------------------------------------------- channels


def channel_from_json(doc: dict) -> Channel:
    validate_schema(doc, CHANNEL_SCHEMA)
    tp = doc.get("trace_preserving", True)
    if "kraus" in doc:
        ks = [matrix_from_json(k, f"/kraus/{i}") for i, k in enumerate(doc["kraus"])]
        if any(k.shape != ks[0].shape for k in ks):
            raise SchemaError("/kraus", "Kraus operators have inconsistent shapes")
        return Channel.from_kraus([SymMatrix(k) for k in ks], trace_preserving=tp, validate=False)
    if "superoperator" in doc:
        m = matrix_from_json(doc["superoperator"], "/superoperator")
        return Channel.from_superoperator(SymMatrix(m), doc.get("dim_in"), doc.get("dim_out"), trace_preserving=tp)
    c = matrix_from_json(doc["choi"], "/choi")
    return Channel.from_choi(SymMatrix(c), doc.get("dim_in"), doc.get("dim_out"), trace_preserving=tp, validate=False)


def channel_to_json(ch: Channel, form: str | None = None) -> dict:
    form = form or ch.form
    doc: dict[str, Any] = {"dim_in": ch.dim_in, "dim_out": ch.dim_out, "trace_preserving": ch.trace_preserving}
    if form == "kraus":
        doc["kraus"] = [matrix_to_json(k) for k in ch.kraus]
    elif form == "super":
        doc["superoperator"] = matrix_to_json(ch.superoperator)
    else:
        doc["choi"] = matrix_to_json(ch.choi)
    return doc


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=False, allow_nan=False)


__all__ = [
    "CHANNEL_SCHEMA", "CIRCUIT_SCHEMA", "IoError", "channel_from_json", "channel_to_json", "circuit_from_json",
    "circuit_to_json", "complex_to_json", "dumps", "load_circuit_file", "load_json", "matrix_from_json",
    "matrix_to_json", "pointer", "state_from_json", "state_to_json", "validate_schema", "vector_from_json",
    "vector_to_json",
]
