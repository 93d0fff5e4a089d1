"""Simulation of the tomography circuits and reconstruction of a process.

A tomography run on a map of 2m Majorana modes uses the m+1 mode composite
system (two ancillary Majorana modes): prepare all pairs in the +1 eigenstate,
apply G from G_{m+1}, the map on the first 2m modes, U from U_{m+1}, then
measure every pair.  Settings are enumerated G-major, U-minor; outcomes are
the 2^(m+1) sign patterns of the pairwise measurements.

Reconstruction parametrises the unknown map by its block-diagonal Hermitian
chi matrix (2 * (4^m/2)^2 real unknowns), computes the predicted probability
column of every elementary chi term by embedding its labels as C_u (x) 1 on
the composite system, and solves the resulting linear least-squares problem.
No physicality projection is applied to noisy estimates.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.random import default_rng

from .channels import (
    ProcessRep,
    composite_label_map,
    extend_to_composite,
    to_transfer,
    transfer_vector,
    _superop_tensor,
)
from .gates import expectation_signs, init_pair_state, pairwise_measurement_povm
from .labels import (
    MajoranaLabel,
    dense,
    even_label_indices,
    odd_label_indices,
)
from .protocol import generate_G, generate_U, matrix_rank

__all__ = [
    "ExperimentRecord",
    "ReconstructionResult",
    "IncompleteDesignError",
    "apparatus",
    "setting_list",
    "simulate_setting",
    "simulate_experiment",
    "sample_record",
    "gram_matrix",
    "frame_transfer_matrices",
    "linear_inversion_even",
    "project_even_block",
    "reconstruct_full",
    "gst_linear_inversion",
    "error_metrics",
    "transfer_blocks",
    "structured_even_block",
]


@dataclass(frozen=True, eq=False)
class ExperimentRecord:
    """Per-setting outcome data of the tomography circuits.

    ``table`` holds probabilities when shots == 0, otherwise integer counts
    with each row summing to ``shots``.
    """

    m: int
    settings: tuple[tuple[int, int], ...]
    table: np.ndarray
    shots: int = 0
    seed: int | None = None

    def __post_init__(self):
        n_settings = 4**self.m * 3**self.m
        if len(self.settings) != n_settings:
            raise ValueError(
                f"expected {n_settings} settings for m={self.m}, got {len(self.settings)}"
            )
        if self.table.shape != (n_settings, 2 ** (self.m + 1)):
            raise ValueError("outcome table has the wrong shape")
        sums = self.table.sum(axis=1)
        target = self.shots if self.shots else 1.0
        if np.abs(sums - target).max() > 1e-6 * max(1.0, target):
            raise ValueError("each setting's outcomes must sum to 1 (or to shots)")

    def frequencies(self) -> np.ndarray:
        if self.shots:
            return self.table / self.shots
        return self.table


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    even_block: np.ndarray
    odd_block: np.ndarray
    chi: np.ndarray
    transfer: np.ndarray
    residual: float
    design_rank: int
    n_params: int


class IncompleteDesignError(RuntimeError):
    def __init__(self, rank: int, needed: int):
        super().__init__(
            f"design matrix rank {rank} < {needed} unknowns: "
            "the experiment record is informationally incomplete"
        )
        self.rank = rank
        self.needed = needed


@dataclass(frozen=True, eq=False)
class _Apparatus:
    m: int
    rho_g: np.ndarray  # (n_G, D, D) prepared states
    effects: np.ndarray  # (n_U, n_out, D, D) effective POVM elements U^dag Pi U
    padded_basis: np.ndarray  # (4^m, D, D) dense C_u (x) 1 on the composite system


@lru_cache(maxsize=None)
def apparatus(m: int) -> _Apparatus:
    rho0 = init_pair_state(m + 1).rho
    gs = generate_G(m + 1).dense_gates()
    us = generate_U(m + 1).dense_gates()
    povm = pairwise_measurement_povm(m + 1).elements
    rho_g = np.stack([g @ rho0 @ g.conj().T for g in gs])
    effects = np.stack(
        [np.stack([u.conj().T @ e @ u for e in povm]) for u in us]
    )
    idx, signs = composite_label_map(m, 1)
    padded = np.stack(
        [s * dense(MajoranaLabel.from_index(int(i), m + 1)) for i, s in zip(idx, signs)]
    )
    return _Apparatus(m, rho_g, effects, padded)


def setting_list(m: int) -> tuple[tuple[int, int], ...]:
    """(G index, U index) pairs, G-major."""
    return tuple(
        (gi, ui) for gi in range(4**m) for ui in range(3**m)
    )


def simulate_setting(p: ProcessRep, m: int, g_index: int, u_index: int) -> np.ndarray:
    """Exact outcome distribution of one (G, U) setting for the map p."""
    app = apparatus(m)
    r_ext = _superop_tensor(extend_to_composite(p, 1))
    return _setting_probs(r_ext, app, g_index, u_index)


def _setting_probs(r_ext: np.ndarray, app: _Apparatus, gi: int, ui: int) -> np.ndarray:
    out = np.einsum("iljk,jk->il", r_ext, app.rho_g[gi])
    probs = np.einsum("oli,il->o", app.effects[ui], out).real
    if probs.min() < -1e-9 or abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("setting simulation produced an invalid distribution")
    return np.clip(probs, 0.0, None)


def simulate_experiment(
    p: ProcessRep, m: int, shots: int = 0, seed: int = 0
) -> ExperimentRecord:
    """Run every (G, U) setting; exact probabilities or multinomial counts."""
    app = apparatus(m)
    r_ext = _superop_tensor(extend_to_composite(p, 1))
    settings = setting_list(m)
    table = np.stack([_setting_probs(r_ext, app, gi, ui) for gi, ui in settings])
    record = ExperimentRecord(m, settings, table, shots=0, seed=None)
    if shots:
        record = sample_record(record, shots, seed)
    return record


def sample_record(record: ExperimentRecord, shots: int, seed: int) -> ExperimentRecord:
    """Multinomial shot sampling of an exact record; deterministic per seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = default_rng(seed)
    probs = record.frequencies()
    counts = np.stack(
        [rng.multinomial(shots, row / row.sum()) for row in probs]
    )
    return ExperimentRecord(record.m, record.settings, counts, shots=shots, seed=seed)


# ---------------------------------------------------------------------------
# frames, Gram matrix, even-block linear inversion


def gram_matrix(m_out: np.ndarray, m_in: np.ndarray) -> np.ndarray:
    """g = M_out M_in; entry (k, i) is Tr(E_k rho_i)."""
    return m_out @ m_in


def frame_transfer_matrices(m: int) -> tuple[np.ndarray, np.ndarray]:
    """(M_in, M_out) on the even subspace of the composite m+1 mode system.

    M_in columns are the prepared-state transfer vectors; M_out rows are the
    transfer vectors of U^dag Q_n U, U-major with n lexicographic inside.
    """
    from .protocol import measurement_operators, prepared_states

    ev = even_label_indices(m + 1)
    m_in = np.stack(
        [transfer_vector(m + 1, s.rho)[list(ev)] for s in prepared_states(m)]
    ).T
    m_out = np.stack(
        [transfer_vector(m + 1, op)[list(ev)] for op in measurement_operators(m)]
    )
    return m_in, m_out


def _tilde_from_record(record: ExperimentRecord) -> np.ndarray:
    """Expectation table tilde[(U, n), G] = <U^dag Q_n U> in the G state."""
    m = record.m
    q = expectation_signs(m + 1)  # (n, o)
    freqs = record.frequencies()
    n_g, n_u = 4**m, 3**m
    n_q = 2 ** (m + 1)
    tilde = np.zeros((n_u * n_q, n_g))
    for s_idx, (gi, ui) in enumerate(record.settings):
        tilde[ui * n_q : (ui + 1) * n_q, gi] = q @ freqs[s_idx]
    return tilde


def linear_inversion_even(
    record: ExperimentRecord,
    m_in: np.ndarray,
    m_out: np.ndarray,
) -> np.ndarray:
    """Least-squares estimate X of the composite even block with known frames.

    Solves M_out X M_in ~= tilde via pseudo-inverses, so X is determined on
    the row space of M_out and the column space of M_in only; compare against
    project_even_block of the truth.
    """
    tilde = _tilde_from_record(record)
    return np.linalg.pinv(m_out) @ tilde @ np.linalg.pinv(m_in)


def project_even_block(x: np.ndarray, m_in: np.ndarray, m_out: np.ndarray) -> np.ndarray:
    """Restriction of a composite even block to the part the frames determine."""
    return np.linalg.pinv(m_out) @ m_out @ x @ m_in @ np.linalg.pinv(m_in)


# ---------------------------------------------------------------------------
# full reconstruction of both blocks


def _chi_parameter_basis(m: int) -> list[tuple[tuple[tuple[int, int], ...], tuple[complex, ...]]]:
    """Hermitian elementary chi matrices of the block-diagonal parametrisation.

    Each entry lists (label index pairs, coefficients); the order is blocks
    (even, odd), diagonals first, then (re, im) per upper off-diagonal pair.
    """
    params = []
    for block in (even_label_indices(m), odd_label_indices(m)):
        for a in block:
            params.append((((a, a),), (1.0 + 0j,)))
        for x in range(len(block)):
            for y in range(x + 1, len(block)):
                a, b = block[x], block[y]
                params.append((((a, b), (b, a)), (1.0 + 0j, 1.0 + 0j)))
                params.append((((a, b), (b, a)), (1j, -1j)))
    return params


def _design_matrix(m: int) -> tuple[np.ndarray, list]:
    app = apparatus(m)
    params = _chi_parameter_basis(m)
    # q[a, b, gi, ui, o] = Tr[E_{ui,o} C_a rho_G C_b] on the composite system
    left = np.einsum("aij,gjk->agik", app.padded_basis, app.rho_g)
    both = np.einsum("agik,bkl->agbil", left, app.padded_basis)
    q = np.einsum("agbil,uoli->abguo", both, app.effects)
    n_rows = 4**m * 3**m * 2 ** (m + 1)
    design = np.zeros((n_rows, len(params)))
    for col, (pairs, coeffs) in enumerate(params):
        acc = np.zeros((4**m, 3**m, 2 ** (m + 1)), dtype=complex)
        for (a, b), c in zip(pairs, coeffs):
            acc += c * q[a, b]
        design[:, col] = acc.real.reshape(-1)
    return design, params


def reconstruct_full(record: ExperimentRecord, rank_tol: float = 1e-8) -> ReconstructionResult:
    """Linear least-squares reconstruction of both blocks of the unknown map."""
    m = record.m
    design, params = _design_matrix(m)
    b = record.frequencies().reshape(-1)
    svals = np.linalg.svd(design, compute_uv=False)
    rank = int(np.sum(svals > rank_tol * svals[0]))
    if rank < len(params):
        raise IncompleteDesignError(rank, len(params))
    theta, *_ = np.linalg.lstsq(design, b, rcond=None)
    residual = float(np.linalg.norm(design @ theta - b))
    chi = np.zeros((4**m, 4**m), dtype=complex)
    for value, (pairs, coeffs) in zip(theta, params):
        for (a, bb), c in zip(pairs, coeffs):
            chi[a, bb] += value * c
    transfer = to_transfer(ProcessRep.from_chi(m, chi)).data
    even, odd = _blocks_of_transfer(transfer, m)
    return ReconstructionResult(
        even_block=even,
        odd_block=odd,
        chi=chi,
        transfer=transfer,
        residual=residual,
        design_rank=rank,
        n_params=len(params),
    )


def _blocks_of_transfer(transfer: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    ev, od = even_label_indices(m), odd_label_indices(m)
    return transfer[np.ix_(ev, ev)], transfer[np.ix_(od, od)]


def transfer_blocks(p: ProcessRep) -> tuple[np.ndarray, np.ndarray]:
    """(even, odd) blocks of the Majorana transfer matrix of a map."""
    return _blocks_of_transfer(to_transfer(p).data, p.m)


# ---------------------------------------------------------------------------
# gate set tomography gauge freedom


def gst_linear_inversion(
    gram: np.ndarray,
    tilde_maps: list[np.ndarray],
    guess_m_out: np.ndarray,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Gauge-equivalent estimates from a guessed measurement frame.

    Mhat_in = Mhat_out^-1 g and Mhat_j = Mhat_out^-1 tilde_j Mhat_in^-1; the
    estimates equal the truth up to T = M_out^-1 Mhat_out.
    """
    inv_guess = np.linalg.inv(guess_m_out)
    m_in_hat = inv_guess @ gram
    inv_in_hat = np.linalg.inv(m_in_hat)
    maps_hat = [inv_guess @ t @ inv_in_hat for t in tilde_maps]
    return m_in_hat, maps_hat


def error_metrics(estimate: np.ndarray, truth: np.ndarray) -> dict:
    if estimate.shape != truth.shape:
        raise ValueError("dimension mismatch")
    diff = estimate - truth
    return {
        "frobenius": float(np.linalg.norm(diff)),
        "max_abs": float(np.abs(diff).max()),
    }


# ---------------------------------------------------------------------------
# block structure of the composite even block


def structured_even_block(p: ProcessRep) -> dict:
    """Composite even block in the four-family basis and its expected blocks.

    Families: C_even, i C_odd c_{2m+1}, i C_odd c_{2m+2},
    i C_even c_{2m+1} c_{2m+2}.  Signs relating each family member to a
    canonical composite C_w are computed exactly from the label algebra.
    """
    from .labels import product

    m = p.m
    mp1 = m + 1
    ev_small = even_label_indices(m)
    od_small = odd_label_indices(m)
    ev_big = list(even_label_indices(mp1))
    t_ab = to_transfer(extend_to_composite(p, 1)).data
    t_even = t_ab[np.ix_(ev_big, ev_big)]

    e1 = MajoranaLabel((0,) * (2 * m) + (1, 0))
    e2 = MajoranaLabel((0,) * (2 * m) + (0, 1))
    e12 = MajoranaLabel((0,) * (2 * m) + (1, 1))

    def entry(v_idx: int, tail: MajoranaLabel | None, extra_i: bool):
        lbl = MajoranaLabel.from_index(v_idx, m).padded(1)
        if tail is None:
            return lbl.index, 1.0
        phased = product(lbl, tail)
        phase = phased.phase * (1j if extra_i else 1.0)
        # i c_{2m+1} c_{2m+2} = C_e12 exactly, so family 4 needs no extra i
        if phase not in (1, -1):
            raise AssertionError("family member is not +-1 times a C label")
        return phased.label.index, float(np.real(phase))

    ordered: list[tuple[int, float]] = []
    for v in ev_small:
        ordered.append(entry(v, None, False))
    for v in od_small:
        ordered.append(entry(v, e1, True))
    for v in od_small:
        ordered.append(entry(v, e2, True))
    for v in ev_small:
        ordered.append(entry(v, e12, False))

    n = len(ev_big)
    pos = {w: i for i, w in enumerate(ev_big)}
    v_mat = np.zeros((n, n))
    for col, (w_idx, sign) in enumerate(ordered):
        v_mat[pos[w_idx], col] = sign
    structured = v_mat.T @ t_even @ v_mat

    even, odd = transfer_blocks(p)
    h = len(ev_small)
    expected = np.zeros((n, n))
    expected[0:h, 0:h] = even
    expected[h : 2 * h, h : 2 * h] = odd
    expected[2 * h : 3 * h, 2 * h : 3 * h] = odd
    expected[3 * h :, 3 * h :] = even
    off = structured.copy()
    for blk in range(4):
        off[blk * h : (blk + 1) * h, blk * h : (blk + 1) * h] = 0.0
    return {
        "structured": structured,
        "expected": expected,
        "off_block_max": float(np.abs(off).max()),
        "block_error": float(np.abs(structured - expected).max()),
    }
