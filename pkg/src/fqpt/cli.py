"""Command-line entry point.

Subcommands: validate, gen-gates, simulate, reconstruct, selftest.
Exit codes: 0 success, 1 validity or completeness failure, 2 usage or
parse error.  All outputs are deterministic given the configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .channels import (
    FermionPOVM,
    FermionState,
    ProcessRep,
    is_cp,
    is_tp,
    random_valid_map,
    sr_report,
    validate_povm,
    validate_process,
    validate_state,
)
from .gates import GateSpec, gate_unitary, unitary_channel
from .tomography import (
    IncompleteDesignError,
    error_metrics,
    reconstruct_full,
    simulate_experiment,
    transfer_blocks,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2


def builtin_map(name: str, m: int) -> ProcessRep:
    """Resolve a built-in map name to a process on m modes."""
    if name == "identity":
        return ProcessRep.identity(m)
    if name == "R":
        return unitary_channel(gate_unitary(GateSpec("R", (1, 2)), 2 * m), m)
    if name == "T":
        return unitary_channel(gate_unitary(GateSpec("T", (1, 2)), 2 * m), m)
    if name == "Lambda":
        if m < 2:
            raise ValueError("Lambda needs at least 2 fermion modes")
        return unitary_channel(
            gate_unitary(GateSpec("Lambda", (1, 2, 3, 4)), 2 * m), m
        )
    if name == "parity-flip":
        if m != 1:
            raise ValueError("parity-flip is defined for m=1")
        a = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        return ProcessRep.from_kraus(1, [a, a.conj().T])
    if name.startswith("phase:"):
        theta = float(name.split(":", 1)[1])
        if m != 1:
            raise ValueError("phase:<angle> is defined for m=1")
        k = np.diag([1.0, np.exp(-1j * theta)])
        return ProcessRep.from_kraus(1, [k])
    if name.startswith("random:"):
        seed = int(name.split(":", 1)[1])
        return random_valid_map(m, seed, kind="cptp")
    raise ValueError(f"unknown built-in map {name!r}")


def resolve_map(source: str, m: int) -> ProcessRep:
    path = Path(source)
    if path.suffix == ".json" and path.exists():
        p = serialize.process_from_json(json.loads(path.read_text()))
        if p.m != m:
            raise ValueError(f"map file is for m={p.m}, requested m={m}")
        return p
    return builtin_map(source, m)


def _write(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize.dumps_canonical(payload) + "\n")


def cmd_validate(args) -> int:
    try:
        data = json.loads(Path(args.path).read_text())
        obj = serialize.load_object(data)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if isinstance(obj, FermionState):
            report = validate_state(obj, atol=args.tol)
            ok = report["psd"] and report["normalized"] and report["sr_valid"]
        elif isinstance(obj, FermionPOVM):
            report = validate_povm(obj, atol=args.tol)
            ok = report["psd"] and report["complete"] and report["sr_valid"]
        elif isinstance(obj, ProcessRep):
            report = validate_process(obj, atol=args.tol)
            ok = report["cp"] and report["tp"] and all(
                report["sr"][k] for k in ("choi_commutator", "chi_blocks", "transfer_blocks")
            )
        else:
            print("error: experiment records have no validity predicate", file=sys.stderr)
            return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(serialize.dumps_canonical(report))
    return EXIT_OK if ok else EXIT_INVALID


def cmd_gen_gates(args) -> int:
    payload = serialize.gatesets_to_json(args.m)
    out = Path(args.out) / "gatesets.json"
    _write(out, payload)
    print(f"wrote {out} ({len(payload['G'])} G circuits, {len(payload['U'])} U circuits)")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        p = resolve_map(args.map, args.m)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    record = simulate_experiment(p, args.m, shots=args.shots, seed=args.seed)
    out = Path(args.out) / "record.json"
    _write(out, serialize.record_to_json(record))
    kind = f"{args.shots} shots" if args.shots else "exact probabilities"
    print(f"wrote {out} ({len(record.settings)} settings, {kind})")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    try:
        record = serialize.record_from_json(json.loads(Path(args.record).read_text()))
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = reconstruct_full(record)
    except IncompleteDesignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    payload = serialize.reconstruction_to_json(result)
    if args.truth:
        try:
            truth = resolve_map(args.truth, record.m)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        even_t, odd_t = transfer_blocks(truth)
        payload["metrics"] = {
            "even": error_metrics(result.even_block, even_t),
            "odd": error_metrics(result.odd_block, odd_t),
        }
    out = Path(args.out) / "reconstruction.json"
    _write(out, payload)
    print(f"wrote {out} (design rank {result.design_rank}/{result.n_params}, "
          f"residual {result.residual:.3e})")
    if args.truth:
        print(f"even-block Frobenius error {payload['metrics']['even']['frobenius']:.3e}, "
              f"odd-block {payload['metrics']['odd']['frobenius']:.3e}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .protocol import (
        generate_G,
        generate_U,
        matrix_rank,
        measurement_transfer_matrix,
        no_ancilla_rank,
        prepared_state_transfer_matrix,
        verify_GHIJ,
    )

    failures = 0

    def check(name: str, ok: bool, detail: str = ""):
        nonlocal failures
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"[{status}] {name}" + (f" ({detail})" if detail else ""))

    for m in (1, 2):
        g_count, u_count = len(generate_G(m + 1)), len(generate_U(m + 1))
        check(f"gate set sizes m={m}", g_count == 4**m and u_count == 3**m,
              f"|G|={g_count}, |U|={u_count}")
        rank_s = matrix_rank(prepared_state_transfer_matrix(m))
        check(f"prepared-state rank m={m}", rank_s == 4**m, f"rank={rank_s}")
        rank_m = matrix_rank(measurement_transfer_matrix(m))
        check(f"measurement span rank m={m}", rank_m == 4 ** (m + 1) // 2,
              f"rank={rank_m}")
        res = no_ancilla_rank(m)
        check(f"no-ancilla rank bound m={m}",
              res.closed and res.rank <= 4 ** (m - 1), f"rank={res.rank}")
        ghij = verify_GHIJ(m)
        worst = max(ghij["max_errors"].values())
        check(f"prepared-state operator identities m={m}", worst < 1e-10,
              f"max error={worst:.2e}")

    for seed in range(5):
        p = random_valid_map(1, seed)
        rep = sr_report(p)
        check(f"random map validity seed={seed}",
              is_cp(p) and is_tp(p) and rep["consistent"]
              and rep["choi_commutator"])

    p = builtin_map("T", 1)
    record = simulate_experiment(p, 1)
    result = reconstruct_full(record)
    even_t, odd_t = transfer_blocks(p)
    err = max(
        error_metrics(result.even_block, even_t)["frobenius"],
        error_metrics(result.odd_block, odd_t)["frobenius"],
    )
    check("exact T-gate reconstruction m=1", err < 1e-9, f"error={err:.2e}")

    print(f"{'all checks passed' if failures == 0 else f'{failures} checks failed'}")
    return EXIT_OK if failures == 0 else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fqpt",
        description="Fermionic quantum process tomography with Majorana gates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="validate a serialized state/POVM/process")
    v.add_argument("path")
    v.add_argument("--tol", type=float, default=1e-10)
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("gen-gates", help="write the G and U gate sets")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_gen_gates)

    s = sub.add_parser("simulate", help="simulate the tomography experiment")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--map", required=True,
                   help="built-in name (identity, R, T, Lambda, parity-flip, "
                        "phase:<angle>, random:<seed>) or a process JSON path")
    s.add_argument("--shots", type=int, default=0, help="0 = exact probabilities")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("reconstruct", help="reconstruct a map from a record")
    r.add_argument("record")
    r.add_argument("--truth", default=None,
                   help="optional truth map for error metrics")
    r.add_argument("--out", default=".")
    r.set_defaults(func=cmd_reconstruct)

    t = sub.add_parser("selftest", help="run the built-in invariant suite")
    t.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    if getattr(args, "m", 1) < 1 or getattr(args, "shots", 0) < 0:
        print("error: --m must be >= 1 and --shots >= 0", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
