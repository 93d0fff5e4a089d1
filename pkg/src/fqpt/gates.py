"""The universal Majorana fermion operation set as concrete objects.

Gates act on globally indexed Majorana modes (1-based, 1..2m) so circuit
wiring is explicit.  The closed forms used here follow from
(c_i c_j)^2 = -1 and (c_i c_j c_k c_q)^2 = +1:

* exchange  R_{i,j}^p   = cos(p pi/4) + sin(p pi/4) c_i c_j
* T gate    T_{i,j}^p   = cos(p pi/8) + sin(p pi/8) c_i c_j
* entangler L_{i,j,k,q}^p = cos(p pi/4) + i sin(p pi/4) c_i c_j c_k c_q
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .channels import FermionPOVM, FermionState, ProcessRep
from .labels import majorana_matrices

__all__ = [
    "GateSpec",
    "gate_unitary",
    "circuit_unitary",
    "parity_projector",
    "parity_projection_maps",
    "init_pair_state",
    "pairwise_measurement_povm",
    "outcome_signs",
    "expectation_signs",
    "unitary_channel",
]

_ARITY = {
    "R": 2,
    "T": 2,
    "Lambda": 4,
    "ParityProjection": 4,
    "InitPair": 2,
    "PairMeasure": 2,
}


@dataclass(frozen=True)
class GateSpec:
    """One element of the operation set on named Majorana modes.

    ``power`` covers the inverses and squares of the exchange gate used by
    the tomography circuits (R^2, R^-1, ...).
    """

    kind: str
    modes: tuple[int, ...]
    power: int = 1

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.modes) != _ARITY[self.kind]:
            raise ValueError(
                f"{self.kind} takes {_ARITY[self.kind]} mode indices, "
                f"got {len(self.modes)}"
            )
        if len(set(self.modes)) != len(self.modes):
            raise ValueError("mode indices must be distinct")
        if any(i < 1 for i in self.modes):
            raise ValueError("Majorana mode indices are 1-based")

    def to_json(self) -> dict:
        out = {"kind": self.kind, "modes": list(self.modes)}
        if self.power != 1:
            out["power"] = self.power
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GateSpec":
        return cls(data["kind"], tuple(data["modes"]), int(data.get("power", 1)))


def _mode_product(spec: GateSpec, n_majorana: int) -> np.ndarray:
    if max(spec.modes) > n_majorana:
        raise ValueError(
            f"gate touches Majorana mode {max(spec.modes)} but the system has "
            f"only {n_majorana}"
        )
    cs = majorana_matrices(n_majorana // 2)
    return reduce(np.matmul, (cs[i - 1] for i in spec.modes))


def gate_unitary(spec: GateSpec, n_majorana: int) -> np.ndarray:
    """Dense Fock-space unitary of an R, T or Lambda gate."""
    d = 2 ** (n_majorana // 2)
    eye = np.eye(d, dtype=complex)
    prod = _mode_product(spec, n_majorana)
    if spec.kind == "R":
        theta = spec.power * np.pi / 4
        return np.cos(theta) * eye + np.sin(theta) * prod
    if spec.kind == "T":
        theta = spec.power * np.pi / 8
        return np.cos(theta) * eye + np.sin(theta) * prod
    if spec.kind == "Lambda":
        theta = spec.power * np.pi / 4
        return np.cos(theta) * eye + 1j * np.sin(theta) * prod
    raise ValueError(f"{spec.kind} has no unitary form")


def circuit_unitary(circuit, n_majorana: int) -> np.ndarray:
    """Unitary of a gate list in temporal order (first entry acts first)."""
    d = 2 ** (n_majorana // 2)
    u = np.eye(d, dtype=complex)
    for spec in circuit:
        u = gate_unitary(spec, n_majorana) @ u
    return u


def parity_projector(modes: tuple[int, ...], n_majorana: int, sign: int) -> np.ndarray:
    """(1 + sign * c_i c_j c_k c_q) / 2 for four distinct Majorana modes."""
    spec = GateSpec("ParityProjection", tuple(modes))
    d = 2 ** (n_majorana // 2)
    return (np.eye(d, dtype=complex) + sign * _mode_product(spec, n_majorana)) / 2


def parity_projection_maps(spec: GateSpec, n_majorana: int) -> tuple[ProcessRep, ProcessRep]:
    """The two maps rho -> Pi_eta rho Pi_eta of the nondestructive measurement."""
    if spec.kind != "ParityProjection":
        raise ValueError("expected a ParityProjection spec")
    m = n_majorana // 2
    plus = parity_projector(spec.modes, n_majorana, +1)
    minus = parity_projector(spec.modes, n_majorana, -1)
    return (
        ProcessRep.from_kraus(m, [plus]),
        ProcessRep.from_kraus(m, [minus]),
    )


def init_pair_state(k: int) -> FermionState:
    """rho_k = prod_i (1 + i c_{2i-1} c_{2i}) / 2 on k fermion modes."""
    if k < 1:
        raise ValueError("k must be >= 1")
    cs = majorana_matrices(k)
    d = 2**k
    rho = np.eye(d, dtype=complex)
    for i in range(k):
        rho = rho @ (np.eye(d) + 1j * cs[2 * i] @ cs[2 * i + 1]) / 2
    return FermionState(k, rho)


def outcome_signs(k: int) -> np.ndarray:
    """Sign patterns eta in {+-1}^k; row o has eta_i = +1 where bit i of o is 0.

    Bit 1 is most significant, matching the Fock ordering; row 0 is all +1.
    """
    out = np.empty((2**k, k), dtype=int)
    for o in range(2**k):
        for i in range(k):
            out[o, i] = -1 if (o >> (k - 1 - i)) & 1 else 1
    return out


def pairwise_measurement_povm(k: int) -> FermionPOVM:
    """POVM of the k pairwise measurements of i c_{2i-1} c_{2i}.

    Element o projects onto the joint eigenspace with signs outcome_signs(k)[o].
    """
    cs = majorana_matrices(k)
    d = 2**k
    signs = outcome_signs(k)
    elements = []
    for o in range(2**k):
        e = np.eye(d, dtype=complex)
        for i in range(k):
            e = e @ (np.eye(d) + signs[o, i] * 1j * cs[2 * i] @ cs[2 * i + 1]) / 2
        elements.append(e)
    return FermionPOVM(k, tuple(elements))


def expectation_signs(k: int) -> np.ndarray:
    """Matrix q with q[n, o] = prod_i eta_i(o)**n_i.

    <Q_n> = sum_o q[n, o] p(o) reconstructs the product-operator expectations
    from the pairwise outcome distribution.
    """
    q = np.empty((2**k, 2**k), dtype=int)
    for n in range(2**k):
        for o in range(2**k):
            q[n, o] = -1 if bin(n & o).count("1") % 2 else 1
    return q


def unitary_channel(u: np.ndarray, m: int) -> ProcessRep:
    return ProcessRep.from_kraus(m, [u])
