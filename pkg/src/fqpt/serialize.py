"""Canonical JSON serialization for all wire formats.

Complex numbers are [re, im] pairs, matrices are row-major nested lists, and
dumps are canonical: sorted object keys and floats printed with 17
significant digits, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np

from .channels import FermionPOVM, FermionState, ProcessRep
from .gates import GateSpec
from .tomography import ExperimentRecord, ReconstructionResult

__all__ = [
    "dumps_canonical",
    "complex_matrix_to_json",
    "complex_matrix_from_json",
    "state_to_json",
    "state_from_json",
    "povm_to_json",
    "povm_from_json",
    "process_to_json",
    "process_from_json",
    "record_to_json",
    "record_from_json",
    "reconstruction_to_json",
    "gatesets_to_json",
    "load_object",
]


def _format_number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    value = float(x)
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError("non-finite numbers are not serializable")
    text = format(value, ".17g")
    return text


def dumps_canonical(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, float, np.integer, np.floating)):
        return _format_number(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        inner = ",".join(f"{json.dumps(str(k))}:{dumps_canonical(v)}" for k, v in items)
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps_canonical(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps_canonical(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def complex_matrix_to_json(mat: np.ndarray) -> list:
    arr = np.asarray(mat, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def complex_matrix_from_json(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data])


def real_matrix_to_json(mat: np.ndarray) -> list:
    return [[float(x) for x in row] for row in np.asarray(mat, dtype=float)]


def state_to_json(state: FermionState) -> dict:
    return {"type": "state", "m": state.m, "rho": complex_matrix_to_json(state.rho)}


def state_from_json(data: dict) -> FermionState:
    return FermionState(int(data["m"]), complex_matrix_from_json(data["rho"]))


def povm_to_json(povm: FermionPOVM) -> dict:
    return {
        "type": "povm",
        "m": povm.m,
        "elements": [complex_matrix_to_json(e) for e in povm.elements],
    }


def povm_from_json(data: dict) -> FermionPOVM:
    return FermionPOVM(
        int(data["m"]),
        tuple(complex_matrix_from_json(e) for e in data["elements"]),
    )


def process_to_json(p: ProcessRep) -> dict:
    if p.rep == "kraus":
        payload = [complex_matrix_to_json(f) for f in p.data]
    elif p.rep == "transfer":
        payload = real_matrix_to_json(p.data)
    else:
        payload = complex_matrix_to_json(p.data)
    return {"m": p.m, "representation": p.rep, "data": payload}


def process_from_json(data: dict) -> ProcessRep:
    m = int(data["m"])
    rep = data["representation"]
    if rep == "kraus":
        return ProcessRep.from_kraus(
            m, [complex_matrix_from_json(f) for f in data["data"]]
        )
    if rep == "transfer":
        return ProcessRep.from_transfer(m, np.array(data["data"], dtype=float))
    mat = complex_matrix_from_json(data["data"])
    return ProcessRep(m, rep, mat)


def record_to_json(record: ExperimentRecord) -> dict:
    table = record.table
    if record.shots:
        data = [[int(x) for x in row] for row in table]
    else:
        data = real_matrix_to_json(table)
    return {
        "type": "experiment_record",
        "m": record.m,
        "settings": [[g, u] for g, u in record.settings],
        "shots": record.shots,
        "seed": record.seed,
        "table": data,
    }


def record_from_json(data: dict) -> ExperimentRecord:
    shots = int(data["shots"])
    table = np.array(data["table"], dtype=float if shots == 0 else int)
    return ExperimentRecord(
        int(data["m"]),
        tuple((int(g), int(u)) for g, u in data["settings"]),
        table,
        shots=shots,
        seed=data.get("seed"),
    )


def reconstruction_to_json(result: ReconstructionResult) -> dict:
    return {
        "type": "reconstruction",
        "even_block": real_matrix_to_json(result.even_block),
        "odd_block": real_matrix_to_json(result.odd_block),
        "chi": complex_matrix_to_json(result.chi),
        "transfer": real_matrix_to_json(result.transfer),
        "residual": float(result.residual),
        "design_rank": int(result.design_rank),
        "n_params": int(result.n_params),
    }


def gatesets_to_json(m: int) -> dict:
    from .protocol import generate_G, generate_U

    gset, uset = generate_G(m + 1), generate_U(m + 1)
    return {
        "type": "gatesets",
        "m": m,
        "n_majorana": 2 * (m + 1),
        "G": [[spec.to_json() for spec in circ] for circ in gset.circuits],
        "U": [[spec.to_json() for spec in circ] for circ in uset.circuits],
    }


def load_object(data: dict):
    """Dispatch a parsed JSON document to the matching object type."""
    if "representation" in data:
        return process_from_json(data)
    kind = data.get("type")
    if kind == "state":
        return state_from_json(data)
    if kind == "povm":
        return povm_from_json(data)
    if kind == "experiment_record":
        return record_from_json(data)
    raise ValueError("unrecognised JSON document")
