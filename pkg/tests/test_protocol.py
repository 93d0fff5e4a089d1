import numpy as np
import pytest

from fqpt.gates import circuit_unitary, init_pair_state
from fqpt.labels import MajoranaLabel, dense, parity_operator, product
from fqpt.protocol import (
    admissible_labels,
    cplus_basis_and_alpha,
    generate_G,
    generate_U,
    matrix_rank,
    measurement_operators,
    measurement_transfer_matrix,
    mu_sign,
    no_ancilla_rank,
    prepared_state_transfer_matrix,
    prepared_states,
    q_operators,
    verify_GHIJ,
)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_gate_set_sizes(k):
    assert len(generate_G(k)) == 4 ** (k - 1)
    assert len(generate_U(k)) == 3 ** (k - 1)


@pytest.mark.parametrize("k", [2, 3])
def test_u_inverses_lie_in_g(k):
    n_maj = 2 * k
    g_dense = generate_G(k).dense_gates()
    for circ in generate_U(k).circuits:
        u = circuit_unitary(circ, n_maj)
        best = min(np.abs(g - u.conj().T).max() for g in g_dense)
        assert best < 1e-12


@pytest.mark.parametrize("k", [2, 3])
def test_gate_sets_preserve_parity(k):
    p = parity_operator(k)
    for gset in (generate_G(k), generate_U(k)):
        for g in gset.dense_gates():
            assert np.abs(p @ g - g @ p).max() < 1e-12


@pytest.mark.parametrize("m", [1, 2])
def test_prepared_state_rank(m):
    states = prepared_states(m)
    assert len(states) == 4**m
    for s in states:
        assert abs(np.trace(s.rho) - 1.0) < 1e-10
    assert matrix_rank(prepared_state_transfer_matrix(m)) == 4**m


@pytest.mark.parametrize("m", [1, 2])
def test_measurement_span_rank(m):
    ops = measurement_operators(m)
    assert len(ops) == 3**m * 2 ** (m + 1)
    assert matrix_rank(measurement_transfer_matrix(m)) == 4 ** (m + 1) // 2


def test_q_operators_are_diagonal_sign_matrices():
    for k in (1, 2):
        for q in q_operators(k):
            assert np.abs(q - np.diag(np.diag(q))).max() < 1e-12
            assert np.abs(np.abs(np.diag(q)) - 1.0).max() < 1e-12
    # Q_0 is the identity
    assert np.abs(q_operators(2)[0] - np.eye(4)).max() == 0


@pytest.mark.parametrize("m", [1, 2])
def test_no_ancilla_rank_saturates_parity_bound(m):
    res = no_ancilla_rank(m)
    assert res.closed
    assert res.rank == 4 ** (m - 1)


def test_no_ancilla_budget_exhaustion():
    res = no_ancilla_rank(2, gate_budget=3)
    assert not res.closed
    assert res.rank >= 1


@pytest.mark.parametrize("m", [1, 2, 3])
def test_mu_sign_definition(m):
    # (-1)^m C C_u = mu C_{1bar - u} with C the parity operator
    c_par = parity_operator(m)
    c_ones = dense(MajoranaLabel.ones(m))
    # parity operator equals (-1)^m C_ones (label-product bookkeeping below
    # only needs C C_u proportional to the complement label)
    for lbl in admissible_labels(m):
        mu = mu_sign(lbl)
        lhs = c_ones @ dense(lbl)
        rhs = mu * dense(lbl.complement())
        assert np.abs(lhs - rhs).max() < 1e-12
    assert np.abs(c_par - (-1) ** m * c_ones).max() < 1e-12


@pytest.mark.parametrize("m", [1, 2, 3])
def test_admissible_labels(m):
    labels = admissible_labels(m)
    assert len(labels) == 4 ** (m - 1)
    for lbl in labels:
        assert lbl.parity == 0
        assert lbl.bits[-1] == 0


@pytest.mark.parametrize("m", [1, 2])
def test_cplus_expansion_over_prepared_states(m):
    out = cplus_basis_and_alpha(m)
    assert out["residual"] < 1e-8
    states = prepared_states(m - 1) if m > 1 else [init_pair_state(1)]
    for lbl, mu, alpha in zip(out["labels"], out["mu"], out["alpha"]):
        target = dense(lbl) + mu * dense(lbl.complement())
        combo = sum(a * s.rho for a, s in zip(alpha, states))
        assert np.abs(target - combo).max() < 1e-8


@pytest.mark.parametrize("m", [1, 2])
def test_ghij_identities(m):
    out = verify_GHIJ(m)
    assert max(out["max_errors"].values()) < 1e-10
    span = out["span"]
    assert span["rank_ghij"] == span["expected"] == 4**m
    assert span["rank_cbar_plus"] == 4**m
    assert span["rank_union"] == 4**m  # same subspace
    assert out["cplus_cminus_orthogonality"] < 1e-10


def test_g_recursion_structure():
    # each G_{k+1} circuit extends a G_k circuit by one of 4 suffix choices
    g2 = generate_G(2)
    suffixes = set()
    for circ in g2.circuits:
        suffixes.add(tuple(circ))
    assert len(suffixes) == 4
