"""States, POVMs and processes of fermion modes under the superselection rule.

A process is held in exactly one of four representations:

* ``kraus``    -- tuple of 2^m x 2^m Kraus operators
* ``chi``      -- 4^m x 4^m Hermitian coefficient matrix over the C_u basis
* ``choi``     -- 4^m x 4^m matrix over the doubled (m+m)-mode Fock space
* ``transfer`` -- 4^m x 4^m real matrix in the orthonormal basis C_u / sqrt(2^m)

Conversions route through an internal superoperator tensor R with
``M(X)[i, l] = sum_jk R[i, l, j, k] X[j, k]``.  The Choi matrix is the
unnormalised convention: |Phi> = sum_n |n>_A |n>_B, map applied to
subsystem A, with the composite Fock states ordered as A-operators before
B-operators.  ``choi_via_doubled_system`` rebuilds the Choi matrix through
that doubled-system machinery explicitly and is used as an independent
cross-check of the fast reshape-based conversion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import default_rng

from .labels import (
    MajoranaLabel,
    dense,
    even_label_indices,
    fock_parities,
    label_basis,
    odd_label_indices,
    parity_operator,
    product,
)

__all__ = [
    "ATOL",
    "FermionState",
    "FermionPOVM",
    "ProcessRep",
    "sr_project_state",
    "validate_state",
    "validate_povm",
    "transfer_vector",
    "to_chi",
    "to_choi",
    "to_transfer",
    "to_kraus",
    "apply_process",
    "is_cp",
    "is_tp",
    "is_unital",
    "sr_report",
    "is_sr_valid_map",
    "validate_process",
    "extend_to_composite",
    "embed_process",
    "composite_label_map",
    "partial_trace_last",
    "choi_via_doubled_system",
    "random_valid_map",
    "random_valid_state",
]

ATOL = 1e-10

REPRESENTATIONS = ("kraus", "chi", "choi", "transfer")


@dataclass(frozen=True, eq=False)
class FermionState:
    """Density matrix of m fermion modes in the Fock basis."""

    m: int
    rho: np.ndarray

    def __post_init__(self):
        d = 2**self.m
        if self.rho.shape != (d, d):
            raise ValueError(f"rho must be {d}x{d} for m={self.m}")


@dataclass(frozen=True, eq=False)
class FermionPOVM:
    """POVM on m fermion modes: a tuple of positive operators summing to 1."""

    m: int
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        d = 2**self.m
        for e in self.elements:
            if e.shape != (d, d):
                raise ValueError(f"POVM elements must be {d}x{d} for m={self.m}")


@dataclass(frozen=True, eq=False)
class ProcessRep:
    """One process of m fermion modes, held in a single representation."""

    m: int
    rep: str
    data: object  # tuple of arrays for "kraus", a single array otherwise

    def __post_init__(self):
        if self.rep not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {self.rep!r}")
        d, n = 2**self.m, 4**self.m
        if self.rep == "kraus":
            for f in self.data:
                if f.shape != (d, d):
                    raise ValueError(f"Kraus operators must be {d}x{d}")
        else:
            if self.data.shape != (n, n):
                raise ValueError(f"{self.rep} matrix must be {n}x{n} for m={self.m}")

    @classmethod
    def from_kraus(cls, m: int, operators) -> "ProcessRep":
        return cls(m, "kraus", tuple(np.asarray(f, dtype=complex) for f in operators))

    @classmethod
    def from_chi(cls, m: int, chi) -> "ProcessRep":
        return cls(m, "chi", np.asarray(chi, dtype=complex))

    @classmethod
    def from_choi(cls, m: int, choi) -> "ProcessRep":
        return cls(m, "choi", np.asarray(choi, dtype=complex))

    @classmethod
    def from_transfer(cls, m: int, transfer) -> "ProcessRep":
        return cls(m, "transfer", np.asarray(transfer, dtype=float))

    @classmethod
    def identity(cls, m: int) -> "ProcessRep":
        return cls.from_kraus(m, [np.eye(2**m)])


def _superop_tensor(p: ProcessRep) -> np.ndarray:
    """R[i, l, j, k] with M(X)[i, l] = sum R[i,l,j,k] X[j, k]."""
    d = 2**p.m
    if p.rep == "kraus":
        stack = np.stack(p.data)
        return np.einsum("qij,qlk->iljk", stack, stack.conj())
    if p.rep == "chi":
        basis = label_basis(p.m)
        return np.einsum("uv,uij,vkl->iljk", p.data, basis, basis)
    if p.rep == "choi":
        c4 = p.data.reshape(d, d, d, d)
        return np.einsum("ijlk->iljk", c4)
    basis = label_basis(p.m)
    return np.einsum("uv,uil,vkj->iljk", p.data.astype(complex), basis, basis) / d


def to_choi(p: ProcessRep) -> ProcessRep:
    if p.rep == "choi":
        return p
    d = 2**p.m
    r = _superop_tensor(p)
    choi = np.einsum("iljk->ijlk", r).reshape(d * d, d * d)
    return ProcessRep.from_choi(p.m, choi)


def to_chi(p: ProcessRep) -> ProcessRep:
    if p.rep == "chi":
        return p
    basis = label_basis(p.m)
    r = _superop_tensor(p)
    chi = np.einsum("uij,iljk,vkl->uv", basis.conj(), r, basis.conj()) / 4**p.m
    return ProcessRep.from_chi(p.m, chi)


def to_transfer(p: ProcessRep, atol: float = ATOL) -> ProcessRep:
    if p.rep == "transfer":
        return p
    basis = label_basis(p.m)
    r = _superop_tensor(p)
    t = np.einsum("uli,iljk,vjk->uv", basis, r, basis) / 2**p.m
    imag = np.abs(t.imag).max()
    if imag > atol:
        raise ValueError(
            f"transfer matrix has imaginary parts up to {imag:.3e}; "
            "the map is not Hermiticity-preserving"
        )
    return ProcessRep.from_transfer(p.m, t.real)


def to_kraus(p: ProcessRep, atol: float = 1e-9) -> ProcessRep:
    """Canonical Kraus set from the Choi eigendecomposition.

    Eigenvalues in descending order; each operator's first nonzero entry
    (row-major) is made real positive, so the output is deterministic.
    """
    if p.rep == "kraus":
        return p
    d = 2**p.m
    choi = to_choi(p).data
    vals, vecs = np.linalg.eigh(choi)
    if vals.min() < -atol:
        raise ValueError(f"map is not CP: Choi min eigenvalue {vals.min():.3e}")
    order = np.argsort(vals)[::-1]
    operators = []
    for idx in order:
        lam = vals[idx]
        if lam <= atol:
            continue
        f = np.sqrt(lam) * vecs[:, idx].reshape(d, d)
        flat = f.ravel()
        nz = np.flatnonzero(np.abs(flat) > 1e-12)
        if nz.size:
            f = f * (np.abs(flat[nz[0]]) / flat[nz[0]])
        operators.append(f)
    if not operators:
        operators.append(np.zeros((d, d), dtype=complex))
    return ProcessRep.from_kraus(p.m, operators)


def apply_process(p: ProcessRep, rho: np.ndarray) -> np.ndarray:
    if p.rep == "kraus":
        return sum(f @ rho @ f.conj().T for f in p.data)
    r = _superop_tensor(p)
    return np.einsum("iljk,jk->il", r, rho)


# ---------------------------------------------------------------------------
# states and POVMs


def sr_project_state(state: FermionState, atol: float = 1e-9) -> FermionState:
    """(rho + C rho C) / 2; idempotent, fixes every SR-valid state."""
    tr = np.trace(state.rho)
    if abs(tr - 1.0) > 1e-6:
        raise ValueError(f"input state is not normalised: trace {tr}")
    c = parity_operator(state.m)
    return FermionState(state.m, (state.rho + c @ state.rho @ c) / 2)


def validate_state(state: FermionState, atol: float = ATOL) -> dict:
    rho = state.rho
    d = rho.shape[0]
    if d & (d - 1) or d != 2**state.m:
        raise ValueError(f"dimension {d} is not 2**m for m={state.m}")
    herm_err = np.abs(rho - rho.conj().T).max()
    hermitised = (rho + rho.conj().T) / 2
    min_eig = float(np.linalg.eigvalsh(hermitised).min())
    trace_err = abs(np.trace(rho) - 1.0)
    c = parity_operator(state.m)
    sr_err = np.abs(c @ rho - rho @ c).max()
    return {
        "psd": bool(min_eig >= -1e-9 and herm_err <= atol),
        "normalized": bool(trace_err <= atol),
        "sr_valid": bool(sr_err <= atol),
        "violations": {
            "hermiticity": float(herm_err),
            "min_eigenvalue": min_eig,
            "trace_error": float(trace_err),
            "sr_commutator": float(sr_err),
        },
    }


def validate_povm(povm: FermionPOVM, atol: float = ATOL) -> dict:
    d = 2**povm.m
    c = parity_operator(povm.m)
    min_eig = min(
        float(np.linalg.eigvalsh((e + e.conj().T) / 2).min()) for e in povm.elements
    )
    total = sum(povm.elements)
    completeness = np.abs(total - np.eye(d)).max()
    sr_err = max(np.abs(c @ e - e @ c).max() for e in povm.elements)
    return {
        "psd": bool(min_eig >= -1e-9),
        "complete": bool(completeness <= atol),
        "sr_valid": bool(sr_err <= atol),
        "violations": {
            "min_eigenvalue": min_eig,
            "completeness": float(completeness),
            "sr_commutator": float(sr_err),
        },
    }


def transfer_vector(m: int, op: np.ndarray, atol: float = 1e-9) -> np.ndarray:
    """Real coefficient vector Tr(C_u op) / sqrt(2^m), lexicographic label order."""
    basis = label_basis(m)
    vec = np.einsum("uij,ji->u", basis, op) / np.sqrt(2**m)
    if np.abs(vec.imag).max() > atol:
        raise ValueError("operator is not Hermitian; transfer vector not real")
    return vec.real


# ---------------------------------------------------------------------------
# validity predicates for processes


def is_cp(p: ProcessRep, atol: float = 1e-9) -> bool:
    return float(np.linalg.eigvalsh(to_choi(p).data).min()) >= -atol


def is_tp(p: ProcessRep, atol: float = 1e-9) -> bool:
    d = 2**p.m
    choi = to_choi(p).data.reshape(d, d, d, d)
    tr_a = np.einsum("ijil->jl", choi)
    return bool(np.abs(tr_a - np.eye(d)).max() <= atol)


def is_unital(p: ProcessRep, atol: float = 1e-9) -> bool:
    d = 2**p.m
    out = apply_process(p, np.eye(d, dtype=complex))
    return bool(np.abs(out - np.eye(d)).max() <= atol)


def sr_report(p: ProcessRep, atol: float = ATOL) -> dict:
    """The three independent SR block tests and whether they agree."""
    m = p.m
    d = 2**m
    ev, od = even_label_indices(m), odd_label_indices(m)

    choi = to_choi(p).data
    cc = np.kron(parity_operator(m), parity_operator(m))
    choi_err = float(np.abs(cc @ choi - choi @ cc).max())

    chi = to_chi(p).data
    chi_err = float(
        max(np.abs(chi[np.ix_(ev, od)]).max(), np.abs(chi[np.ix_(od, ev)]).max())
    )

    basis = label_basis(m)
    r = _superop_tensor(p)
    t = np.einsum("uli,iljk,vjk->uv", basis, r, basis) / d
    t_err = float(
        max(np.abs(t[np.ix_(ev, od)]).max(), np.abs(t[np.ix_(od, ev)]).max())
    )

    booleans = {
        "choi_commutator": choi_err <= atol,
        "chi_blocks": chi_err <= atol,
        "transfer_blocks": t_err <= atol,
    }
    return {
        **booleans,
        "consistent": len(set(booleans.values())) == 1,
        "violations": {
            "choi_commutator": choi_err,
            "chi_blocks": chi_err,
            "transfer_blocks": t_err,
        },
    }


def is_sr_valid_map(p: ProcessRep, atol: float = ATOL) -> bool:
    rep = sr_report(p, atol)
    return rep["choi_commutator"] and rep["chi_blocks"] and rep["transfer_blocks"]


def validate_process(p: ProcessRep, atol: float = ATOL) -> dict:
    sr = sr_report(p, atol)
    chi = to_chi(p).data
    choi = to_choi(p).data
    chi_min = float(np.linalg.eigvalsh((chi + chi.conj().T) / 2).min())
    choi_min = float(np.linalg.eigvalsh((choi + choi.conj().T) / 2).min())
    tp_choi = is_tp(p)
    tr_chi = complex(np.trace(chi))
    row0 = np.zeros(4**p.m)
    row0[0] = 1.0
    try:
        t = to_transfer(p).data
        tp_transfer = bool(np.abs(t[0] - row0).max() <= 1e-9)
    except ValueError:
        tp_transfer = False
    return {
        "cp": bool(choi_min >= -1e-9),
        "cp_chi": bool(chi_min >= -1e-9),
        "tp": tp_choi,
        "tp_chi_trace": bool(abs(tr_chi - 1.0) <= 1e-9),
        "tp_transfer_row": tp_transfer,
        "sr": sr,
        "violations": {
            "choi_min_eigenvalue": choi_min,
            "chi_min_eigenvalue": chi_min,
            "chi_trace": [tr_chi.real, tr_chi.imag],
        },
    }


# ---------------------------------------------------------------------------
# composite systems


class SRInvalidMapError(ValueError):
    """Raised when an SR-invalid map would be extended to a composite system."""


def embed_process(p: ProcessRep, total_modes: int, offset_modes: int = 0) -> ProcessRep:
    """Embed a map on m modes into total_modes modes at the given mode offset.

    Implemented at the chi level: every term C_v . C_v' becomes the term with
    both labels zero-padded into the composite label space.
    """
    m = p.m
    if offset_modes < 0 or offset_modes + m > total_modes:
        raise ValueError("map does not fit in the target system")
    chi = to_chi(p).data
    big = np.zeros((4**total_modes, 4**total_modes), dtype=complex)
    index_map = [
        MajoranaLabel.from_index(i, m).shifted(offset_modes, total_modes).index
        for i in range(4**m)
    ]
    idx = np.array(index_map)
    big[np.ix_(idx, idx)] = chi
    return ProcessRep.from_chi(total_modes, big)


def composite_label_map(m: int, extra: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite labels and signs realising C_u (x) identity on extra modes.

    Even-weight C_u embed as the zero-padded label unchanged.  Odd-weight C_u
    carry a parity string over the ancillary modes in the padded embedding, so
    C_u (x) 1 equals the padded operator times the ancilla parity operator;
    the result is +-1 times a single composite C_w with w = (u, 1...1).
    Returns (index, sign) arrays over all 4^m labels of the first m modes.
    """
    ones_tail = MajoranaLabel((0,) * (2 * m) + (1,) * (2 * extra))
    idx = np.empty(4**m, dtype=int)
    signs = np.empty(4**m)
    for i in range(4**m):
        lbl = MajoranaLabel.from_index(i, m).padded(extra)
        if lbl.weight % 2 == 0:
            idx[i], signs[i] = lbl.index, 1.0
        else:
            phased = product(lbl, ones_tail)
            sign = (-1) ** extra * phased.phase
            if sign not in (1, -1):
                raise AssertionError("composite embedding sign is not real")
            idx[i], signs[i] = phased.label.index, float(np.real(sign))
    return idx, signs


def extend_to_composite(p: ProcessRep, extra_modes: int, atol: float = ATOL) -> ProcessRep:
    """The composite map acting as p on the first m modes, identity elsewhere.

    Every chi term C_u . C_v maps to the composite term with both operators
    replaced by C_u (x) 1 per ``composite_label_map``, so the extension acts
    trivially on any ancilla factor for odd chi terms as well as even ones.
    """
    if not is_sr_valid_map(p, atol):
        raise SRInvalidMapError(
            "refusing to extend an SR-invalid map to a composite system"
        )
    m = p.m
    chi = to_chi(p).data
    idx, signs = composite_label_map(m, extra_modes)
    big = np.zeros((4 ** (m + extra_modes), 4 ** (m + extra_modes)), dtype=complex)
    big[np.ix_(idx, idx)] = signs[:, None] * signs[None, :] * chi
    return ProcessRep.from_chi(m + extra_modes, big)


def partial_trace_last(rho: np.ndarray, m_total: int, m_traced: int) -> np.ndarray:
    """Trace out the last m_traced fermion modes."""
    da = 2 ** (m_total - m_traced)
    db = 2**m_traced
    return np.einsum("ibjb->ij", rho.reshape(da, db, da, db))


def _ordering_sign_matrix(m: int) -> np.ndarray:
    """Diagonal signs relating plain Jordan-Wigner coordinates on m+m modes to
    the composite ordering |n, n'> = A_A^dag A_B^dag |V> of the doubled system."""
    pa = (1 - fock_parities(m)) // 2  # 0 for even parity, 1 for odd
    signs = np.array(
        [(-1) ** (int(pa[na]) * int(pa[nb])) for na in range(2**m) for nb in range(2**m)],
        dtype=float,
    )
    return signs


def choi_via_doubled_system(p: ProcessRep) -> np.ndarray:
    """Choi matrix built explicitly on the doubled 2m-mode Fock space.

    Uses the composite-ordering convention for the doubled system's Fock
    states and the full-system Majorana matrices for the embedded C_u; serves
    as the slow independent route against the reshape-based ``to_choi``.
    """
    m = p.m
    d = 2**m
    signs = _ordering_sign_matrix(m)
    phi = np.zeros(d * d, dtype=complex)
    for n in range(d):
        phi[n * d + n] = 1.0
    if p.rep == "kraus":
        choi = np.zeros((d * d, d * d), dtype=complex)
        eye = np.eye(d)
        for f in p.data:
            v = np.kron(f, eye) @ phi
            choi += np.outer(v, v.conj())
        return choi
    chi = to_chi(p).data
    embedded = []
    for i in range(4**m):
        mat = dense(MajoranaLabel.from_index(i, m).padded(m))
        embedded.append(signs[:, None] * mat * signs[None, :])
    choi = np.zeros((d * d, d * d), dtype=complex)
    for u in range(4**m):
        for v in range(4**m):
            if chi[u, v] == 0:
                continue
            left = embedded[u] @ phi
            right = embedded[v] @ phi
            choi += chi[u, v] * np.outer(left, right.conj())
    return choi


# ---------------------------------------------------------------------------
# random test instances


def random_valid_map(m: int, seed: int, kind: str = "cptp") -> ProcessRep:
    """Deterministic random SR-valid CPTP map (or parity-conserving unitary)."""
    rng = default_rng(seed)
    if kind == "unitary":
        from scipy.linalg import expm

        basis = label_basis(m)
        ev = even_label_indices(m)
        coeffs = rng.normal(size=len(ev) - 1)
        ham = np.zeros((2**m, 2**m), dtype=complex)
        for c, idx in zip(coeffs, ev[1:]):  # skip the identity label
            ham += c * basis[idx]
        u = expm(-1j * ham)
        return ProcessRep.from_kraus(m, [u])
    if kind != "cptp":
        raise ValueError(f"unknown kind {kind!r}")
    n = 4**m
    ev, od = even_label_indices(m), odd_label_indices(m)
    chi = np.zeros((n, n), dtype=complex)
    for block in (ev, od):
        h = len(block)
        a = rng.normal(size=(h, h)) + 1j * rng.normal(size=(h, h))
        chi[np.ix_(block, block)] = a @ a.conj().T
    chi /= np.trace(chi).real
    kraus = to_kraus(ProcessRep.from_chi(m, chi)).data
    s = sum(f.conj().T @ f for f in kraus)
    vals, vecs = np.linalg.eigh(s)
    inv_sqrt = vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.conj().T
    return ProcessRep.from_kraus(m, [f @ inv_sqrt for f in kraus])


def random_valid_state(m: int, seed: int) -> FermionState:
    """Deterministic random SR-valid density matrix (full rank, both sectors)."""
    rng = default_rng(seed)
    d = 2**m
    par = fock_parities(m)
    rho = np.zeros((d, d), dtype=complex)
    for sector in (1, -1):
        idx = np.flatnonzero(par == sector)
        k = idx.size
        a = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
        rho[np.ix_(idx, idx)] = a @ a.conj().T
    rho /= np.trace(rho).real
    return FermionState(m, rho)
