"""Command line entry point: ``clockgap {build,spectrum,verify,demo-revcomp}``.

Exit status: 0 on success, 1 when a spectrum lands strictly between 0 and the
soundness bound (or a demo instance disagrees with its truth table), 2 on
input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import DimensionError, NormError, check_bitstring, check_unit
from .circuit import CircuitError, load_circuit
from .hamiltonian import (
    build_hamiltonian,
    clocked_basis_state,
    energy,
    history_state,
    term_dump,
)
from .revcomp import TruthTableError, compile_truth_table, end_to_end_instance, load_truth_table
from .spectral import (
    COMPLETENESS_LIKE,
    RESIDUAL_TOL,
    VIOLATION,
    ConvergenceError,
    spectral_report,
)
from .verifier import monte_carlo, num_slots

SCHEMA_VERSION = 1

INPUT_ERRORS = (
    CircuitError,
    TruthTableError,
    DimensionError,
    NormError,
    ValueError,
    OSError,
)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    circuit: str | None = None
    input: str | None = None
    proof: str = "history"
    samples: int = 10_000
    seed: int = 0
    ancilla_checks: bool = True
    paper_literal: bool = False
    output_format: str = "human"
    method: str = "auto"
    tol: float = RESIDUAL_TOL
    max_iter: int | None = None
    dense: bool = False
    table: str | None = None
    strategy: str = "pprm"

    @property
    def include_ancilla_checks(self) -> bool:
        return self.ancilla_checks and not self.paper_literal

    def validate(self) -> None:
        if self.command in {"build", "spectrum", "verify"}:
            if not self.circuit or self.input is None:
                raise UsageError(f"{self.command} needs --circuit and --input")
        if self.command == "demo-revcomp" and not self.table:
            raise UsageError("demo-revcomp needs --table")
        if self.samples < 1:
            raise UsageError("--samples must be at least 1")
        if self.seed < 0 or self.seed >= 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if self.tol <= 0:
            raise UsageError("--tol must be positive")


def load_proof(source: str, circuit, x: str) -> np.ndarray:
    """Proof state from ``history``, ``zero`` or a JSON file of ``[re, im]`` pairs."""
    if source == "history":
        return history_state(circuit, x)
    if source == "zero":
        return clocked_basis_state(circuit, "0" * circuit.num_qubits, 0)
    try:
        raw = json.loads(Path(source).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{source}: not valid JSON ({exc})") from None
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{source}: expected an array of [re, im] pairs")
    dim = circuit.dim * (circuit.num_gates + 1)
    return check_unit(arr[:, 0] + 1j * arr[:, 1], dim, name="proof")


def _instance(cfg: RunConfig):
    circuit = load_circuit(cfg.circuit)
    x = check_bitstring(cfg.input, circuit.num_input_bits)
    return circuit, x, build_hamiltonian(circuit, x, cfg.include_ancilla_checks)


def cmd_build(cfg: RunConfig) -> tuple[dict, int]:
    circuit, x, H = _instance(cfg)
    return {
        "input": x,
        "dims": {"S": H.S, "T": H.T, "n": H.n, "K": H.K, "dim": H.dim},
        "include_ancilla_checks": H.include_ancilla_checks,
        "terms": term_dump(H, include_matrices=cfg.dense),
    }, 0


def cmd_spectrum(cfg: RunConfig) -> tuple[dict, int]:
    _, x, H = _instance(cfg)
    report = spectral_report(H, method=cfg.method, tol=cfg.tol, max_iter=cfg.max_iter, seed=cfg.seed)
    doc = {"input": x, **report.to_dict()}
    return doc, 1 if report.verdict == VIOLATION else 0


def cmd_verify(cfg: RunConfig) -> tuple[dict, int]:
    circuit, x, H = _instance(cfg)
    psi = load_proof(cfg.proof, circuit, x)
    M = num_slots(H.T, H.K)
    e = energy(H, psi)
    mc = monte_carlo(circuit, x, psi, cfg.samples, cfg.seed, cfg.include_ancilla_checks)
    return {
        "input": x,
        "proof": cfg.proof,
        "slots": M,
        "energy": e,
        "exact_reject_probability": e / M,
        "slot_sum_reject_probability": mc.exact_probability,
        "empirical_reject_rate": mc.reject_rate,
        "stderr": mc.stderr,
        "samples": mc.samples,
        "rejections": mc.rejections,
        "seed": mc.seed,
        "slot_histogram": mc.slot_histogram,
        "transcript_digest": mc.transcript_digest,
        "include_ancilla_checks": H.include_ancilla_checks,
    }, 0


def cmd_demo_revcomp(cfg: RunConfig) -> tuple[dict, int]:
    table = load_truth_table(cfg.table)
    rc = compile_truth_table(table, cfg.strategy)
    rows = []
    status = 0
    for x in table.inputs():
        _, report = end_to_end_instance(table, x, method=cfg.method, strategy=cfg.strategy, seed=cfg.seed)
        expected = table(x)
        ok = (report.verdict == COMPLETENESS_LIKE) == expected and report.verdict != VIOLATION
        status = status or (0 if ok else 1)
        rows.append({
            "input": x,
            "f": int(expected),
            "lambda_min": report.lambda_min,
            "bound": report.bound,
            "verdict": report.verdict,
            "ok": ok,
        })
    return {
        "arity": table.arity,
        "strategy": cfg.strategy,
        "dims": {"S": rc.circuit.num_qubits, "T": rc.circuit.num_gates},
        "layout": rc.layout,
        "rows": rows,
    }, status


COMMANDS = {
    "build": cmd_build,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "demo-revcomp": cmd_demo_revcomp,
}


def render_human(command: str, doc: dict) -> str:
    lines = [f"[{command}]"]
    if command == "demo-revcomp":
        lines.append(f"arity={doc['arity']} S={doc['dims']['S']} T={doc['dims']['T']} layout={doc['layout']}")
        lines.append(f"{'x':>6} {'f':>2} {'lambda_min':>14} {'bound':>12}  verdict")
        for r in doc["rows"]:
            mark = "" if r["ok"] else "  MISMATCH"
            lines.append(
                f"{r['input']:>6} {r['f']:>2} {r['lambda_min']:>14.6e} {r['bound']:>12.4e}  {r['verdict']}{mark}"
            )
        return "\n".join(lines)
    for key, value in doc.items():
        if key == "terms":
            lines.append(f"terms ({len(value)}):")
            for t in value:
                extra = {k: v for k, v in t.items() if k not in {"tag", "index", "matrix"}}
                label = t["tag"] if t["index"] is None else f"{t['tag']}({t['index']})"
                lines.append(f"  {label} {extra if extra else ''}".rstrip())
                if "matrix" in t:
                    lines.append(f"    matrix: {json.dumps(t['matrix'])}")
        elif isinstance(value, dict):
            inner = ", ".join(f"{k}={v}" for k, v in value.items())
            lines.append(f"{key}: {inner}")
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines)


def render_structured(command: str, doc: dict) -> str:
    return json.dumps({"schema": SCHEMA_VERSION, "command": command, **doc}, sort_keys=True, indent=2)


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg.validate()
        doc, status = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 2
    except ConvergenceError as exc:
        print(f"solver error: {exc}", file=stderr)
        return 2
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    render = render_structured if cfg.output_format == "structured" else render_human
    print(render(cfg.command, doc), file=stdout)
    return status


def _add_common(p: argparse.ArgumentParser, circuit=True) -> None:
    if circuit:
        p.add_argument("-c", "--circuit", required=True, help="circuit file (JSON)")
        p.add_argument("-x", "--input", required=True, help="input bitstring")
    p.add_argument("--no-ancilla-checks", dest="ancilla_checks", action="store_false",
                   help="do not penalise work qubits at clock 0")
    p.add_argument("--paper-literal", action="store_true",
                   help="input checks on the n input qubits only (K = n)")
    p.add_argument("--format", dest="output_format", choices=["human", "structured"], default="human")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=["auto", "dense", "iterative"], default="auto")
    p.add_argument("--tol", type=float, default=RESIDUAL_TOL, help="eigenpair residual tolerance")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clockgap", description="Clock Hamiltonians, gap certificates and verifier simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="list the Hamiltonian terms")
    _add_common(p)
    p.add_argument("--dense", action="store_true", help="include dense term matrices")

    p = sub.add_parser("spectrum", help="ground energy and gap verdict")
    _add_common(p)
    _add_solver(p)

    p = sub.add_parser("verify", help="simulate verifier shots")
    _add_common(p)
    p.add_argument("--proof", default="history", help="history, zero, or a state file")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("demo-revcomp", help="compile a truth table and report gaps on all inputs")
    p.add_argument("-t", "--table", required=True, help="truth-table file (JSON)")
    p.add_argument("--strategy", choices=["pprm", "minterm"], default="pprm")
    p.add_argument("--format", dest="output_format", choices=["human", "structured"], default="human")
    _add_solver(p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    return run(RunConfig(**fields))


if __name__ == "__main__":
    sys.exit(main())
