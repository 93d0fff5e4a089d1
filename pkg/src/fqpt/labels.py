"""Exact algebra of Majorana product operators and their Fock-basis matrices.

Conventions fixed here and relied on everywhere else in the package:

* Fock basis: the occupation vector (n_1, ..., n_m) is read as a binary
  integer with n_1 the most significant bit.
* C_u = i**floor(|u|/2) * c_1**u_1 * ... * c_{2m}**u_{2m}, where the dense
  matrices come from the Jordan-Wigner expressions
  c_{2i-1} = X_i Z_{i+1} ... Z_m and c_{2i} = Y_i Z_{i+1} ... Z_m.
* Labels are ordered lexicographically on their bits with u_1 most
  significant, so the position of a label in any matrix emitted by this
  package is simply its bits read as an integer.

All phase bookkeeping is done over the integers; floating point only enters
when a dense matrix is requested.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "MajoranaLabel",
    "PhasedLabel",
    "product",
    "commutation_sign",
    "dense",
    "parity_operator",
    "majorana_matrices",
    "all_labels",
    "even_label_indices",
    "odd_label_indices",
    "label_basis",
    "fock_parities",
]

# i**k for k = 0..3, kept exact.
_I_POWERS = (1, 1j, -1, -1j)

_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_ID2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class MajoranaLabel:
    """Binary vector u of length 2m identifying the product operator C_u."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) == 0 or len(self.bits) % 2 != 0:
            raise ValueError("label length must be a positive even integer (2m)")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("label entries must be 0 or 1")

    @property
    def m(self) -> int:
        return len(self.bits) // 2

    @property
    def weight(self) -> int:
        """Hamming weight |u|."""
        return sum(self.bits)

    @property
    def parity(self) -> int:
        """|u| mod 2; 0 for even-parity operators, 1 for odd."""
        return self.weight % 2

    @property
    def index(self) -> int:
        """Position in the lexicographic label order (u_1 most significant)."""
        idx = 0
        for b in self.bits:
            idx = (idx << 1) | b
        return idx

    @classmethod
    def from_index(cls, index: int, m: int) -> "MajoranaLabel":
        if not 0 <= index < 4**m:
            raise ValueError(f"index {index} out of range for m={m}")
        bits = tuple((index >> (2 * m - 1 - i)) & 1 for i in range(2 * m))
        return cls(bits)

    @classmethod
    def zero(cls, m: int) -> "MajoranaLabel":
        return cls((0,) * (2 * m))

    @classmethod
    def ones(cls, m: int) -> "MajoranaLabel":
        return cls((1,) * (2 * m))

    def padded(self, extra_modes: int) -> "MajoranaLabel":
        """The same operator viewed on m + extra_modes modes (zeros appended)."""
        return MajoranaLabel(self.bits + (0,) * (2 * extra_modes))

    def shifted(self, offset_modes: int, total_modes: int) -> "MajoranaLabel":
        """Embed on total_modes modes with offset_modes empty modes in front."""
        lead = (0,) * (2 * offset_modes)
        tail = (0,) * (2 * (total_modes - offset_modes - self.m))
        if len(tail) < 0:
            raise ValueError("label does not fit in the target system")
        return MajoranaLabel(lead + self.bits + tail)

    def complement(self) -> "MajoranaLabel":
        """The label 1-bar minus u (elementwise)."""
        return MajoranaLabel(tuple(1 - b for b in self.bits))


@dataclass(frozen=True)
class PhasedLabel:
    """A Majorana label together with one of the four group phases."""

    label: MajoranaLabel
    phase: complex

    def __post_init__(self):
        if self.phase not in (1, -1, 1j, -1j):
            raise ValueError(f"phase must be one of +-1, +-i, got {self.phase!r}")


def _check_same_modes(a: MajoranaLabel, b: MajoranaLabel):
    if a.m != b.m:
        raise ValueError(f"mode-count mismatch: {a.m} vs {b.m}")


def product(a: MajoranaLabel, b: MajoranaLabel) -> PhasedLabel:
    """C_a C_b = phase * C_{a XOR b}, with the phase computed exactly.

    The phase combines the (-1) signs from anticommuting the two ordered
    monomials into one and the i-power mismatch of the three C prefactors.
    """
    _check_same_modes(a, b)
    u, v = a.bits, b.bits
    swaps = 0
    tail = 0  # number of u_j = 1 with j > k while scanning k downwards
    for k in range(len(u) - 1, -1, -1):
        if v[k]:
            swaps += tail
        if u[k]:
            tail += 1
    w = tuple(x ^ y for x, y in zip(u, v))
    wa, wb, wc = a.weight, b.weight, sum(w)
    exponent = (wa // 2 + wb // 2 - wc // 2 + 2 * swaps) % 4
    return PhasedLabel(MajoranaLabel(w), _I_POWERS[exponent])


def commutation_sign(a: MajoranaLabel, b: MajoranaLabel) -> int:
    """+1 if C_a and C_b commute, -1 if they anticommute."""
    _check_same_modes(a, b)
    dot = sum(x & y for x, y in zip(a.bits, b.bits))
    return -1 if (a.weight * b.weight + dot) % 2 else 1


@lru_cache(maxsize=None)
def majorana_matrices(m: int) -> tuple[np.ndarray, ...]:
    """The 2m Jordan-Wigner matrices (c_1, ..., c_2m), each 2^m x 2^m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    out = []
    for i in range(1, m + 1):
        factors_x = [_ID2] * m
        factors_y = [_ID2] * m
        factors_x[i - 1] = _X
        factors_y[i - 1] = _Y
        for j in range(i, m):
            factors_x[j] = _Z
            factors_y[j] = _Z
        cx = factors_x[0]
        cy = factors_y[0]
        for fx, fy in zip(factors_x[1:], factors_y[1:]):
            cx = np.kron(cx, fx)
            cy = np.kron(cy, fy)
        out.append(cx)
        out.append(cy)
    for mat in out:
        mat.setflags(write=False)
    return tuple(out)


@lru_cache(maxsize=None)
def _dense_cached(bits: tuple[int, ...]) -> np.ndarray:
    label = MajoranaLabel(bits)
    m = label.m
    cs = majorana_matrices(m)
    mat = np.eye(2**m, dtype=complex)
    for k, b in enumerate(bits):
        if b:
            mat = mat @ cs[k]
    mat = _I_POWERS[(label.weight // 2) % 4] * mat
    mat.setflags(write=False)
    return mat


def dense(label: MajoranaLabel) -> np.ndarray:
    """Fock-basis matrix of C_u (Hermitian and unitary). Read-only array."""
    return _dense_cached(label.bits)


@lru_cache(maxsize=None)
def fock_parities(m: int) -> np.ndarray:
    """(-1)**|n| for each Fock index n, as a read-only integer vector."""
    par = np.array([(-1) ** bin(n).count("1") for n in range(2**m)])
    par.setflags(write=False)
    return par


def parity_operator(m: int) -> np.ndarray:
    """The parity operator prod_i (1 - 2 a_i^dag a_i), diagonal in the Fock basis."""
    return np.diag(fock_parities(m).astype(complex))


def all_labels(m: int) -> list[MajoranaLabel]:
    """All 4^m labels in lexicographic order."""
    return [MajoranaLabel.from_index(i, m) for i in range(4**m)]


@lru_cache(maxsize=None)
def even_label_indices(m: int) -> tuple[int, ...]:
    """Indices of even-|u| labels, lexicographically sorted."""
    return tuple(
        i for i in range(4**m) if MajoranaLabel.from_index(i, m).parity == 0
    )


@lru_cache(maxsize=None)
def odd_label_indices(m: int) -> tuple[int, ...]:
    return tuple(
        i for i in range(4**m) if MajoranaLabel.from_index(i, m).parity == 1
    )


@lru_cache(maxsize=None)
def label_basis(m: int) -> np.ndarray:
    """Stacked dense C_u matrices, shape (4^m, 2^m, 2^m), lexicographic order."""
    stack = np.stack([dense(lbl) for lbl in all_labels(m)])
    stack.setflags(write=False)
    return stack
