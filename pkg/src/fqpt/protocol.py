"""State-preparation and measurement protocols for the tomography circuits.

The gate sets are generated inductively from exchange gates only:

* G_1 = {1};  G_{k+1} = {S G} with S in {1, R_{2k,2k+1}, R_{2k,2k+2}, R_{2k,2k+1}^2}
* U_1 = {1};  U_{k+1} = {U S^-1} with S in {1, R_{2k,2k+1}, R_{2k,2k+2}}

Enumeration is S-index major at every level, so the ordering of circuits,
prepared states and measurement operators is deterministic and documented.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import FermionState, transfer_vector
from .gates import (
    GateSpec,
    circuit_unitary,
    gate_unitary,
    init_pair_state,
    parity_projector,
)
from .labels import MajoranaLabel, dense, majorana_matrices, product

__all__ = [
    "GateSet",
    "generate_G",
    "generate_U",
    "prepared_states",
    "prepared_state_transfer_matrix",
    "measurement_operators",
    "measurement_transfer_matrix",
    "matrix_rank",
    "NoAncillaResult",
    "no_ancilla_rank",
    "mu_sign",
    "admissible_labels",
    "cplus_basis_and_alpha",
    "verify_GHIJ",
]

RANK_TOL = 1e-8


@dataclass(frozen=True)
class GateSet:
    """An ordered family of circuits on 2k Majorana modes."""

    k: int
    circuits: tuple[tuple[GateSpec, ...], ...]

    @property
    def n_majorana(self) -> int:
        return 2 * self.k

    def dense_gates(self) -> list[np.ndarray]:
        return [circuit_unitary(c, self.n_majorana) for c in self.circuits]

    def __len__(self) -> int:
        return len(self.circuits)


def generate_G(k_target: int) -> GateSet:
    """The state-preparation gate set G_k with 4^(k-1) circuits."""
    if k_target < 1:
        raise ValueError("k_target must be >= 1")
    circuits: list[tuple[GateSpec, ...]] = [()]
    for k in range(1, k_target):
        a, b, c = 2 * k, 2 * k + 1, 2 * k + 2
        steps = [
            None,
            GateSpec("R", (a, b)),
            GateSpec("R", (a, c)),
            GateSpec("R", (a, b), power=2),
        ]
        circuits = [
            g + ((s,) if s is not None else ()) for s in steps for g in circuits
        ]
    return GateSet(k_target, tuple(circuits))


def generate_U(k_target: int) -> GateSet:
    """The measurement gate set U_k with 3^(k-1) circuits; U^-1 is in G_k."""
    if k_target < 1:
        raise ValueError("k_target must be >= 1")
    circuits: list[tuple[GateSpec, ...]] = [()]
    for k in range(1, k_target):
        a, b, c = 2 * k, 2 * k + 1, 2 * k + 2
        steps = [
            None,
            GateSpec("R", (a, b), power=-1),
            GateSpec("R", (a, c), power=-1),
        ]
        circuits = [
            ((s,) if s is not None else ()) + u for s in steps for u in circuits
        ]
    return GateSet(k_target, tuple(circuits))


def prepared_states(m: int) -> list[FermionState]:
    """The 4^m states G rho G^dag on m+1 modes, ordered as generate_G(m+1)."""
    rho0 = init_pair_state(m + 1).rho
    gset = generate_G(m + 1)
    states = []
    for g in gset.dense_gates():
        states.append(FermionState(m + 1, g @ rho0 @ g.conj().T))
    return states


def prepared_state_transfer_matrix(m: int) -> np.ndarray:
    """Transfer vectors of the prepared states, stacked as rows (4^m x 4^(m+1))."""
    return np.stack([transfer_vector(m + 1, s.rho) for s in prepared_states(m)])


def q_operators(k: int) -> list[np.ndarray]:
    """Q_n = prod_i (i c_{2i-1} c_{2i})^{n_i} for n lexicographic, on k modes."""
    cs = majorana_matrices(k)
    d = 2**k
    pair = [1j * cs[2 * i] @ cs[2 * i + 1] for i in range(k)]
    ops = []
    for n in range(2**k):
        q = np.eye(d, dtype=complex)
        for i in range(k):
            if (n >> (k - 1 - i)) & 1:
                q = q @ pair[i]
        ops.append(q)
    return ops


def measurement_operators(m: int) -> list[np.ndarray]:
    """All U^dag Q_n U for U in U_{m+1}, U-major with n lexicographic inside."""
    uset = generate_U(m + 1)
    qs = q_operators(m + 1)
    ops = []
    for u in uset.dense_gates():
        for q in qs:
            ops.append(u.conj().T @ q @ u)
    return ops


def measurement_transfer_matrix(m: int) -> np.ndarray:
    return np.stack([transfer_vector(m + 1, op) for op in measurement_operators(m)])


def matrix_rank(mat: np.ndarray, tol: float = RANK_TOL) -> int:
    """Rank with a threshold relative to the largest singular value."""
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


# ---------------------------------------------------------------------------
# reachable-span analysis without ancillas


@dataclass(frozen=True)
class NoAncillaResult:
    rank: int
    closed: bool


def no_ancilla_rank(m: int, gate_budget: int = 20000) -> NoAncillaResult:
    """Dimension of the span of states reachable from rho_m without ancillas.

    The operation set {R, T, Lambda, parity projection} acts linearly on
    density matrices, so the reachable span is the smallest subspace that
    contains rho_m and is closed under all the generators; it is computed as
    a fixpoint.  ``gate_budget`` caps generator applications; if it runs out
    before the fixpoint, the rank is a lower bound and ``closed`` is False.
    """
    n_maj = 2 * m
    d = 2**m
    cs = majorana_matrices(m)
    generators = []
    for i in range(n_maj):
        for j in range(i + 1, n_maj):
            cc = cs[i] @ cs[j]
            eye = np.eye(d)
            generators.append((eye + cc) / np.sqrt(2))  # R
            generators.append(np.cos(np.pi / 8) * eye + np.sin(np.pi / 8) * cc)  # T
    for combo in _four_subsets(n_maj):
        generators.append(gate_unitary(GateSpec("Lambda", combo), n_maj))
        # parity projectors are Hermitian, so plain conjugation applies them too
        generators.append(parity_projector(combo, n_maj, +1))
        generators.append(parity_projector(combo, n_maj, -1))

    basis_vecs: list[np.ndarray] = []

    def try_add(op: np.ndarray) -> bool:
        v = op.reshape(-1)
        for b in basis_vecs:
            v = v - (b.conj() @ v) * b
        norm = np.linalg.norm(v)
        if norm > RANK_TOL * max(1.0, np.linalg.norm(op)):
            basis_vecs.append(v / norm)
            return True
        return False

    rho0 = init_pair_state(m).rho
    try_add(rho0)
    basis_mats = [rho0]
    applications = 0
    pos = 0
    while pos < len(basis_mats):
        rho = basis_mats[pos]
        pos += 1
        for g in generators:
            if applications >= gate_budget:
                return NoAncillaResult(rank=len(basis_vecs), closed=False)
            applications += 1
            out = g @ rho @ g.conj().T
            if try_add(out):
                basis_mats.append(out)
    return NoAncillaResult(rank=len(basis_vecs), closed=True)


def _four_subsets(n: int):
    from itertools import combinations

    return [tuple(i + 1 for i in c) for c in combinations(range(n), 4)]


# ---------------------------------------------------------------------------
# the C_+ basis and the G/H/I/J operator identities


def mu_sign(label: MajoranaLabel) -> int:
    """mu with (-1)^m C C_u = mu C_{1bar - u}; exact, from the label product."""
    phased = product(MajoranaLabel.ones(label.m), label)
    if phased.phase not in (1, -1):
        raise AssertionError("mu must be a real sign")
    return 1 if phased.phase == 1 else -1


def admissible_labels(m: int) -> list[MajoranaLabel]:
    """Labels with even weight and u_{2m} = 0, lexicographic; 4^(m-1) of them."""
    return [
        lbl
        for lbl in (MajoranaLabel.from_index(i, m) for i in range(4**m))
        if lbl.parity == 0 and lbl.bits[-1] == 0
    ]


def cplus_basis_and_alpha(m: int, states: list[FermionState] | None = None) -> dict:
    """Expand each C_+ basis operator over the preparable states.

    C_u + mu_u C_{1bar-u} = sum_i alpha_i rho_i, solved by least squares on
    the transfer vectors.  By default the states are the G-protocol states on
    m modes (prepared_states(m-1)), which span exactly span(C_+).
    """
    if states is None:
        if m < 1:
            raise ValueError("m must be >= 1")
        states = prepared_states(m - 1) if m > 1 else [init_pair_state(1)]
    mat_in = np.stack([transfer_vector(m, s.rho) for s in states]).T  # 4^m x n
    labels = admissible_labels(m)
    mus = np.array([mu_sign(lbl) for lbl in labels])
    alphas = np.zeros((len(labels), len(states)))
    residual = 0.0
    scale = np.sqrt(2**m)
    for row, (lbl, mu) in enumerate(zip(labels, mus)):
        b = np.zeros(4**m)
        b[lbl.index] += scale
        b[lbl.complement().index] += mu * scale
        sol, *_ = np.linalg.lstsq(mat_in, b, rcond=None)
        residual = max(residual, float(np.linalg.norm(mat_in @ sol - b)))
        alphas[row] = sol
    if residual > 1e-8:
        raise ValueError(
            f"state set does not span span(C_+): residual {residual:.3e}"
        )
    return {"labels": labels, "mu": mus, "alpha": alphas, "residual": residual}


def verify_GHIJ(m: int) -> dict:
    """Numerically verify the prepared-state decompositions of G, H, I, J.

    Returns the maximum entrywise error per operator family, the span checks
    for the accessible composite basis, and the C_+ / C_- orthogonality error.
    """
    states = prepared_states(m - 1) if m > 1 else [init_pair_state(1)]
    expansion = cplus_basis_and_alpha(m, states)
    labels, mus, alphas = expansion["labels"], expansion["mu"], expansion["alpha"]

    n_maj = 2 * (m + 1)
    cs = majorana_matrices(m + 1)
    c_2m, c_a1, c_a2 = cs[2 * m - 1], cs[2 * m], cs[2 * m + 1]
    anc = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)  # (1 + i c c)/2 on ancilla

    r1 = gate_unitary(GateSpec("R", (2 * m, 2 * m + 1)), n_maj)
    r2 = gate_unitary(GateSpec("R", (2 * m, 2 * m + 2)), n_maj)
    r1sq = gate_unitary(GateSpec("R", (2 * m, 2 * m + 1), power=2), n_maj)

    bars = []
    for s in states:
        base = np.kron(s.rho, anc)
        bars.append(
            (
                base,
                r1 @ base @ r1.conj().T,
                r2 @ base @ r2.conj().T,
                r1sq @ base @ r1sq.conj().T,
            )
        )

    errors = {"G": 0.0, "H": 0.0, "I": 0.0, "J": 0.0}
    ghij_ops = []
    for lbl, mu, alpha in zip(labels, mus, alphas):
        cu = dense(lbl.padded(1))
        cv = dense(lbl.complement().padded(1))
        g_op = cu + mu * cv @ (1j * c_a1 @ c_a2)
        h_op = cv + mu * cu @ (1j * c_a1 @ c_a2)
        i_op = cu @ (1j * c_2m @ c_a1) + mu * cv @ (c_2m @ c_a2)
        j_op = cv @ (c_2m @ c_a1) - mu * cu @ (1j * c_2m @ c_a2)
        ghij_ops.extend([g_op, h_op, i_op, j_op])

        g_sum = sum(a * (b[0] + b[3]) for a, b in zip(alpha, bars))
        h_sum = mu * sum(a * (b[0] - b[3]) for a, b in zip(alpha, bars))
        i_sum = sum(a * (b[0] + b[3] - 2 * b[2]) for a, b in zip(alpha, bars))
        j_sum = mu * sum(a * (b[0] + b[3] - 2 * b[1]) for a, b in zip(alpha, bars))
        errors["G"] = max(errors["G"], float(np.abs(g_op - g_sum).max()))
        errors["H"] = max(errors["H"], float(np.abs(h_op - h_sum).max()))
        errors["I"] = max(errors["I"], float(np.abs(i_op - i_sum).max()))
        errors["J"] = max(errors["J"], float(np.abs(j_op - j_sum).max()))

    # span check: {G, H, I, J} spans the accessible composite basis Cbar_+
    mp1 = m + 1
    cbar_plus = []
    c_big = (-1) ** mp1 * dense(MajoranaLabel.ones(mp1))
    eye = np.eye(2**mp1)
    for lbl in admissible_labels(mp1):
        cbar_plus.append((eye + (-1) ** mp1 * c_big) @ dense(lbl))
    ghij_vecs = np.stack([transfer_vector(mp1, op) for op in ghij_ops])
    cbar_vecs = np.stack([transfer_vector(mp1, op) for op in cbar_plus])
    rank_ghij = matrix_rank(ghij_vecs)
    rank_cbar = matrix_rank(cbar_vecs)
    rank_union = matrix_rank(np.vstack([ghij_vecs, cbar_vecs]))

    # orthogonality of C_+ and C_- on the m-mode system
    c_small = (-1) ** m * dense(MajoranaLabel.ones(m))
    eye_m = np.eye(2**m)
    ortho = 0.0
    for la in admissible_labels(m):
        bp = (eye_m + (-1) ** m * c_small) @ dense(la)
        for lb in admissible_labels(m):
            bm = (eye_m - (-1) ** m * c_small) @ dense(lb)
            ortho = max(ortho, abs(np.trace(bp.conj().T @ bm)))

    return {
        "max_errors": errors,
        "span": {
            "rank_ghij": rank_ghij,
            "rank_cbar_plus": rank_cbar,
            "rank_union": rank_union,
            "expected": 4**m,
        },
        "cplus_cminus_orthogonality": float(ortho),
        "expansion_residual": expansion["residual"],
    }
