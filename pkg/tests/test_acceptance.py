"""End-to-end acceptance checks, one per criterion, each printing a
[PASS]/[FAIL] line with its measured error and runtime."""

import time

import numpy as np
import pytest

from fqpt.channels import (
    ProcessRep,
    is_cp,
    is_tp,
    random_valid_map,
    sr_report,
    to_chi,
    to_choi,
    to_kraus,
    to_transfer,
)
from fqpt.cli import builtin_map
from fqpt.gates import circuit_unitary
from fqpt.labels import (
    MajoranaLabel,
    all_labels,
    commutation_sign,
    dense,
    even_label_indices,
    label_basis,
    majorana_matrices,
    odd_label_indices,
    product,
)
from fqpt.protocol import (
    generate_G,
    generate_U,
    matrix_rank,
    measurement_transfer_matrix,
    no_ancilla_rank,
    prepared_state_transfer_matrix,
    verify_GHIJ,
)
from fqpt.tomography import (
    error_metrics,
    reconstruct_full,
    sample_record,
    simulate_experiment,
    structured_even_block,
    transfer_blocks,
)


def report(name, ok, detail, started, limit):
    elapsed = time.monotonic() - started
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail} ({elapsed:.1f}s)")
    assert ok, f"{name}: {detail}"
    assert elapsed < limit, f"{name} exceeded {limit}s time budget ({elapsed:.1f}s)"


def corrupt_chi(p, rng, eps=0.1):
    m = p.m
    chi = to_chi(p).data.copy()
    a = rng.choice(even_label_indices(m))
    b = rng.choice(odd_label_indices(m))
    z = eps * (rng.normal() + 1j * rng.normal())
    chi[a, b] += z
    chi[b, a] += np.conj(z)
    return ProcessRep.from_chi(m, chi)


def test_criterion_1_operator_algebra():
    t0 = time.monotonic()
    worst = 0.0
    for m in (1, 2, 3):
        cs = majorana_matrices(m)
        d = 2**m
        for i in range(2 * m):
            for j in range(2 * m):
                target = 2 * np.eye(d) if i == j else 0.0
                worst = max(worst, np.abs(cs[i] @ cs[j] + cs[j] @ cs[i] - target).max())
        basis = label_basis(m)
        gram = np.einsum("aij,bji->ab", basis, basis)
        worst = max(worst, np.abs(gram - d * np.eye(4**m)).max())
        labels = all_labels(m)
        for a in labels:
            for b in labels:
                da, db = dense(a), dense(b)
                worst = max(worst, np.abs(da @ db - commutation_sign(a, b) * db @ da).max())
                phased = product(a, b)
                worst = max(worst, np.abs(da @ db - phased.phase * dense(phased.label)).max())
    report("criterion 1 operator algebra m<=3", worst < 1e-12,
           f"max error {worst:.2e}", t0, 10)


def test_criterion_2_sr_predicate_equivalence():
    t0 = time.monotonic()
    rng = np.random.default_rng(0)
    agree = True
    worst = 0.0
    for m in (1, 2):
        for i in range(50):
            p = random_valid_map(m, i, kind="cptp" if i % 2 else "unitary")
            rep = sr_report(p, atol=1e-10)
            agree &= rep["consistent"] and rep["choi_commutator"]
            agree &= is_cp(p) and is_tp(p)
            # cross-representation round trip
            for route in (to_chi, to_choi, to_kraus, to_transfer):
                worst = max(worst, np.abs(
                    to_transfer(route(p)).data - to_transfer(p).data).max())
            bad = corrupt_chi(p, rng)
            rep = sr_report(bad, atol=1e-10)
            agree &= rep["consistent"] and not rep["choi_commutator"]
    report("criterion 2 SR predicate equivalence (100 valid + 100 corrupted)",
           agree and worst < 1e-10,
           f"booleans agree={agree}, roundtrip error {worst:.2e}", t0, 60)


def test_criterion_3_protocol_counts():
    t0 = time.monotonic()
    ok = True
    details = []
    for m in (1, 2):
        k = m + 1
        gset, uset = generate_G(k), generate_U(k)
        ok &= len(gset) == 4**m and len(uset) == 3**m
        g_dense = gset.dense_gates()
        for circ in uset.circuits:
            u = circuit_unitary(circ, 2 * k)
            ok &= min(np.abs(g - u.conj().T).max() for g in g_dense) < 1e-8
        rank_in = matrix_rank(prepared_state_transfer_matrix(m), tol=1e-8)
        rank_out = matrix_rank(measurement_transfer_matrix(m), tol=1e-8)
        res = no_ancilla_rank(m)
        ok &= rank_in == 4**m and rank_out == 4**k // 2
        ok &= res.closed and res.rank <= 4 ** (m - 1)
        details.append(f"m={m}: |G|={len(gset)} |U|={len(uset)} "
                       f"rank_in={rank_in} rank_out={rank_out} no-anc={res.rank}")
    report("criterion 3 protocol counts m=1,2", ok, "; ".join(details), t0, 120)


def test_criterion_4_composite_block_structure():
    t0 = time.monotonic()
    worst_off = worst_blk = 0.0
    for seed in range(50):
        out = structured_even_block(random_valid_map(1, seed))
        worst_off = max(worst_off, out["off_block_max"])
        worst_blk = max(worst_blk, out["block_error"])
    report("criterion 4 composite even-block structure (50 maps)",
           worst_off < 1e-10 and worst_blk < 1e-10,
           f"off-block {worst_off:.2e}, block error {worst_blk:.2e}", t0, 30)


def test_criterion_5_exact_reconstruction():
    t0 = time.monotonic()
    worst1 = 0.0
    ok = True
    for name in ("identity", "R", "T", f"phase:{np.pi / 3}", "parity-flip"):
        p = builtin_map(name, 1)
        res = reconstruct_full(simulate_experiment(p, 1))
        ev, od = transfer_blocks(p)
        ok &= res.design_rank == 2 * (4**1 // 2) ** 2
        worst1 = max(worst1,
                     error_metrics(res.even_block, ev)["frobenius"],
                     error_metrics(res.odd_block, od)["frobenius"])
    p = builtin_map("Lambda", 2)
    res = reconstruct_full(simulate_experiment(p, 2))
    ev, od = transfer_blocks(p)
    ok &= res.design_rank == 2 * (4**2 // 2) ** 2
    worst2 = max(error_metrics(res.even_block, ev)["frobenius"],
                 error_metrics(res.odd_block, od)["frobenius"])
    report("criterion 5 exact reconstruction m=1,2",
           ok and worst1 < 1e-9 and worst2 < 1e-8,
           f"m=1 error {worst1:.2e}, m=2 error {worst2:.2e}", t0, 65)


def test_criterion_6_gst_gauge_identity():
    t0 = time.monotonic()
    from fqpt.tomography import gram_matrix, gst_linear_inversion

    rng = np.random.default_rng(42)
    worst = 0.0
    for trial in range(10):
        h = 2
        m_in = rng.normal(size=(h, h))
        m_out = rng.normal(size=(h, h))
        maps = [transfer_blocks(random_valid_map(1, 3 * trial + j))[0] for j in range(3)]
        tildes = [m_out @ t @ m_in for t in maps]
        guess = rng.normal(size=(h, h))
        m_in_hat, maps_hat = gst_linear_inversion(gram_matrix(m_out, m_in), tildes, guess)
        prod_hat = guess @ maps_hat[2] @ maps_hat[1] @ maps_hat[0] @ m_in_hat
        prod_true = m_out @ maps[2] @ maps[1] @ maps[0] @ m_in
        worst = max(worst, np.abs(prod_hat - prod_true).max())
    report("criterion 6 GST gauge self-consistency", worst < 1e-8,
           f"max product-identity error {worst:.2e}", t0, 30)


def test_criterion_7_shot_noise_scaling():
    t0 = time.monotonic()
    p = builtin_map("T", 1)
    rec = simulate_experiment(p, 1)
    ev, od = transfer_blocks(p)
    mse = {}
    for shots in (10_000, 40_000):
        errs = []
        for seed in range(20):
            res = reconstruct_full(sample_record(rec, shots, seed))
            errs.append(error_metrics(res.even_block, ev)["frobenius"] ** 2
                        + error_metrics(res.odd_block, od)["frobenius"] ** 2)
        mse[shots] = float(np.mean(errs))
    ratio = mse[40_000] / mse[10_000]
    report("criterion 7 shot-noise scaling", 0.15 <= ratio <= 0.45,
           f"MSE ratio 4N/N = {ratio:.3f}", t0, 120)


@pytest.mark.parametrize("m", [1, 2])
def test_criterion_8_prepared_state_operator_identities(m):
    t0 = time.monotonic()
    out = verify_GHIJ(m)
    worst = max(out["max_errors"].values())
    spans_ok = (out["span"]["rank_ghij"] == out["span"]["rank_union"]
                == out["span"]["expected"])
    report(f"criterion 8 operator-family identities m={m}",
           worst < 1e-10 and spans_ok and out["cplus_cminus_orthogonality"] < 1e-10,
           f"max identity error {worst:.2e}", t0, 60)
