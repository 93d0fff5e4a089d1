import json

import numpy as np
import pytest

from fqpt import cli, serialize
from fqpt.channels import (
    FermionPOVM,
    FermionState,
    ProcessRep,
    random_valid_map,
    random_valid_state,
    to_chi,
    to_transfer,
)
from fqpt.gates import pairwise_measurement_povm
from fqpt.tomography import sample_record, simulate_experiment


def test_dumps_canonical_is_deterministic_and_sorted():
    a = serialize.dumps_canonical({"b": 1, "a": [1.5, True, None]})
    assert a == '{"a":[1.5,true,null],"b":1}'
    assert serialize.dumps_canonical({"x": 0.1}) == serialize.dumps_canonical({"x": 0.1})


def test_dumps_canonical_float_precision():
    out = serialize.dumps_canonical(1 / 3)
    assert float(out) == 1 / 3  # 17 significant digits round-trip exactly


def test_dumps_canonical_rejects_non_finite():
    with pytest.raises(ValueError):
        serialize.dumps_canonical(float("nan"))
    with pytest.raises(ValueError):
        serialize.dumps_canonical({"x": float("inf")})


def test_complex_matrix_roundtrip():
    rng = np.random.default_rng(0)
    mat = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    back = serialize.complex_matrix_from_json(serialize.complex_matrix_to_json(mat))
    assert np.abs(back - mat).max() == 0


def test_state_and_povm_roundtrip():
    s = random_valid_state(2, 1)
    back = serialize.state_from_json(json.loads(serialize.dumps_canonical(serialize.state_to_json(s))))
    assert isinstance(back, FermionState)
    assert np.abs(back.rho - s.rho).max() < 1e-15
    povm = pairwise_measurement_povm(2)
    back = serialize.povm_from_json(serialize.povm_to_json(povm))
    assert isinstance(back, FermionPOVM)
    for a, b in zip(back.elements, povm.elements):
        assert np.abs(a - b).max() < 1e-15


@pytest.mark.parametrize("rep", ["kraus", "chi", "choi", "transfer"])
def test_process_roundtrip_each_representation(rep):
    from fqpt.channels import to_choi, to_kraus

    route = {"kraus": to_kraus, "chi": to_chi, "choi": to_choi, "transfer": to_transfer}
    p = route[rep](random_valid_map(1, 3))
    back = serialize.process_from_json(serialize.process_to_json(p))
    assert back.rep == rep and back.m == 1
    assert np.abs(to_transfer(back).data - to_transfer(p).data).max() < 1e-10


def test_record_roundtrip_probabilities_and_counts():
    rec = simulate_experiment(random_valid_map(1, 0), 1)
    back = serialize.record_from_json(serialize.record_to_json(rec))
    assert back.shots == 0
    assert np.abs(back.table - rec.table).max() < 1e-15
    noisy = sample_record(rec, 200, seed=5)
    back = serialize.record_from_json(
        json.loads(serialize.dumps_canonical(serialize.record_to_json(noisy)))
    )
    assert back.shots == 200 and back.seed == 5
    assert (back.table == noisy.table).all()


def test_gatesets_json():
    payload = serialize.gatesets_to_json(1)
    assert payload["n_majorana"] == 4
    assert len(payload["G"]) == 4 and len(payload["U"]) == 3
    # identity circuit serialises to an empty list
    assert payload["G"][0] == []


def test_load_object_dispatch():
    assert isinstance(serialize.load_object(serialize.state_to_json(random_valid_state(1, 0))), FermionState)
    assert isinstance(serialize.load_object(serialize.process_to_json(ProcessRep.identity(1))), ProcessRep)
    with pytest.raises(ValueError):
        serialize.load_object({"type": "mystery"})


# ---------------------------------------------------------------------------
# command-line interface


def test_cli_usage_errors(capsys):
    assert cli.main([]) == cli.EXIT_USAGE
    assert cli.main(["simulate", "--m", "0", "--map", "identity"]) == cli.EXIT_USAGE
    assert cli.main(["simulate", "--m", "1", "--map", "nonsense"]) == cli.EXIT_USAGE
    capsys.readouterr()


def test_cli_gen_gates(tmp_path, capsys):
    assert cli.main(["gen-gates", "--m", "1", "--out", str(tmp_path)]) == cli.EXIT_OK
    data = json.loads((tmp_path / "gatesets.json").read_text())
    assert data["type"] == "gatesets" and len(data["G"]) == 4
    capsys.readouterr()


def test_cli_simulate_reconstruct_roundtrip(tmp_path, capsys):
    out = str(tmp_path)
    assert cli.main(["simulate", "--m", "1", "--map", "T", "--out", out]) == cli.EXIT_OK
    assert cli.main(
        ["reconstruct", str(tmp_path / "record.json"), "--truth", "T", "--out", out]
    ) == cli.EXIT_OK
    result = json.loads((tmp_path / "reconstruction.json").read_text())
    assert result["design_rank"] == result["n_params"] == 8
    assert result["metrics"]["even"]["frobenius"] < 1e-9
    assert result["metrics"]["odd"]["frobenius"] < 1e-9
    capsys.readouterr()


def test_cli_simulate_with_shots_is_seeded(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(
            ["simulate", "--m", "1", "--map", "random:3", "--shots", "100",
             "--seed", "9", "--out", str(out)]
        ) == cli.EXIT_OK
    assert (a / "record.json").read_text() == (b / "record.json").read_text()
    capsys.readouterr()


def test_cli_validate_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(serialize.dumps_canonical(serialize.process_to_json(random_valid_map(1, 0))))
    assert cli.main(["validate", str(good)]) == cli.EXIT_OK

    chi = to_chi(random_valid_map(1, 0)).data.copy()
    chi[0, 1] += 0.2  # even-odd coherence: SR-invalid
    chi[1, 0] += 0.2
    bad = tmp_path / "bad.json"
    bad.write_text(serialize.dumps_canonical(
        serialize.process_to_json(ProcessRep(1, "chi", chi))))
    assert cli.main(["validate", str(bad)]) == cli.EXIT_INVALID

    assert cli.main(["validate", str(tmp_path / "missing.json")]) == cli.EXIT_USAGE
    capsys.readouterr()


def test_cli_validate_state(tmp_path, capsys):
    path = tmp_path / "state.json"
    path.write_text(serialize.dumps_canonical(serialize.state_to_json(random_valid_state(1, 1))))
    assert cli.main(["validate", str(path)]) == cli.EXIT_OK
    capsys.readouterr()


def test_cli_map_file_input(tmp_path, capsys):
    path = tmp_path / "map.json"
    path.write_text(serialize.dumps_canonical(serialize.process_to_json(random_valid_map(1, 6))))
    out = str(tmp_path)
    assert cli.main(["simulate", "--m", "1", "--map", str(path), "--out", out]) == cli.EXIT_OK
    assert cli.main(
        ["reconstruct", str(tmp_path / "record.json"), "--truth", str(path), "--out", out]
    ) == cli.EXIT_OK
    result = json.loads((tmp_path / "reconstruction.json").read_text())
    assert result["metrics"]["even"]["frobenius"] < 1e-9
    capsys.readouterr()


def test_cli_selftest(capsys):
    assert cli.main(["selftest"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "[FAIL]" not in out
