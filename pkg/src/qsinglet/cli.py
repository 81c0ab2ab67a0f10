"""Command line front end: run a protocol from a JSON config, or mint gates.

``qsinglet run --config experiment.json`` writes one JSON report per run.
Reports are deterministic byte-for-byte for a fixed config, except for the
timestamp under "meta". ``qsinglet gen-gate`` writes a unitary with chosen
eigenphases and a Haar-random eigenbasis to a matrix JSON file; the same
arguments always produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .linalg import (
    EigenSystem,
    haar_random_unitary,
    load_unitary,
    save_unitary,
    unitary_from_eigensystem,
    wrap_phase,
)
from .phase_estimation import MAX_REGISTER_QUBITS, run_double_pe
from .protocols import (
    protocol_known_phases,
    protocol_pm1,
    protocol_quartet,
    protocol_square_trick,
    tomography_baseline,
)
from .qudit import MAX_QUDIT_DIM, run_qudit_minus_one

PROTOCOLS = (
    "tomography",
    "pm1",
    "known-phases",
    "square-trick",
    "quartet",
    "double-pe",
    "qudit-minus-one",
)

# required and optional parameter keys per protocol; anything else is rejected
PROTOCOL_PARAMS = {
    "tomography": (frozenset(), frozenset({"phase_grid_size"})),
    "pm1": (frozenset(), frozenset()),
    "known-phases": (frozenset({"theta1", "theta2"}), frozenset()),
    "square-trick": (frozenset(), frozenset()),
    "quartet": (frozenset(), frozenset()),
    "double-pe": (frozenset({"n"}), frozenset()),
    "qudit-minus-one": (frozenset({"d"}), frozenset()),
}

MAX_SEED = 2 ** 64
DISTRIBUTION_FLOOR = 1e-12
DISTRIBUTION_CAP = 4096


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _require_int(value, what: str, minimum=None, maximum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{what} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ValueError(f"{what} must be at least {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ValueError(f"{what} must be at most {maximum}, got {value}")
    return value


def _require_number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{what} must be a number, got {value!r}")
    if not math.isfinite(float(value)):
        raise ValueError(f"{what} must be finite, got {value!r}")
    return float(value)


def load_config(path: str) -> dict:
    """Read an experiment config, filling defaults for shots, seed and params."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config must be a JSON object")
    unknown = set(raw) - {"protocol", "gate", "shots", "seed", "params"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    config = {
        "protocol": raw.get("protocol"),
        "gate": raw.get("gate"),
        "shots": raw.get("shots", 1),
        "seed": raw.get("seed", 0),
        "params": raw.get("params", {}),
    }
    if not isinstance(config["params"], dict):
        raise ValueError("params must be a JSON object")
    return config


def apply_overrides(config: dict, args: argparse.Namespace) -> dict:
    """Fold command line flags over a loaded config."""
    config = dict(config)
    config["params"] = dict(config["params"])
    if args.protocol is not None:
        config["protocol"] = args.protocol
    if args.shots is not None:
        config["shots"] = args.shots
    if args.seed is not None:
        config["seed"] = args.seed
    if args.gate is not None:
        config["gate"] = {"file": args.gate}
    for key in ("n", "d", "theta1", "theta2"):
        value = getattr(args, key)
        if value is not None:
            config["params"][key] = value
    return config


def validate_config(config: dict) -> dict:
    """Type- and range-check a merged config; returns it unchanged on success."""
    protocol = config["protocol"]
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}; choose from {', '.join(PROTOCOLS)}")
    _require_int(config["shots"], "shots", minimum=0)
    _require_int(config["seed"], "seed", minimum=0, maximum=MAX_SEED - 1)
    params = config["params"]
    required, optional = PROTOCOL_PARAMS[protocol]
    missing = required - set(params)
    if missing:
        raise ValueError(f"protocol {protocol} requires params: {sorted(missing)}")
    extra = set(params) - required - optional
    if extra:
        raise ValueError(f"protocol {protocol} does not accept params: {sorted(extra)}")
    if "theta1" in params:
        _require_number(params["theta1"], "theta1")
        _require_number(params["theta2"], "theta2")
    if "n" in params:
        _require_int(params["n"], "n", minimum=1, maximum=MAX_REGISTER_QUBITS)
    if "d" in params:
        _require_int(params["d"], "d", minimum=2, maximum=MAX_QUDIT_DIM)
    if "phase_grid_size" in params:
        _require_int(params["phase_grid_size"], "phase_grid_size", minimum=3)
    return config


def generate_gate(dim: int, phases, seed: int, out=None) -> np.ndarray:
    """Build a gate with the given eigenphases on a seeded random eigenbasis.

    The same (dim, phases, seed) always produce the same matrix; with out set
    the matrix JSON written there is byte-identical across calls.
    """
    dim = _require_int(dim, "dim", minimum=2)
    seed = _require_int(seed, "seed", minimum=0, maximum=MAX_SEED - 1)
    phases = [_require_number(p, "gate phase") for p in phases]
    if len(phases) != dim:
        raise ValueError(f"need exactly {dim} phases, got {len(phases)}")
    basis = haar_random_unitary(dim, seed)
    gate = unitary_from_eigensystem(EigenSystem(basis, wrap_phase(np.array(phases))))
    if out is not None:
        save_unitary(out, gate)
    return gate


def resolve_gate(source) -> np.ndarray:
    """Load or synthesize the gate named by a config's gate source."""
    if not isinstance(source, dict):
        raise ValueError("gate source must be a JSON object")
    if set(source) == {"file"}:
        return load_unitary(source["file"])
    if set(source) == {"dim", "phases", "seed"}:
        if not isinstance(source["phases"], list):
            raise ValueError("gate phases must be a list")
        return generate_gate(source["dim"], source["phases"], source["seed"])
    raise ValueError(
        "gate source must be {'file': path} or {'dim': ..., 'phases': [...], 'seed': ...}"
    )


def _branch_fidelities(branches) -> dict:
    return {
        label: (list(branch.fidelities) if branch.fidelities is not None else None)
        for label, branch in branches.items()
    }


def _double_pe_body(gate, shots, seed, params) -> dict:
    if gate.shape != (2, 2):
        raise ValueError("double-pe runs on 2x2 gates")
    report = run_double_pe(gate, params["n"], shots=shots, seed=seed)
    flat = report.exact_joint.reshape(-1)
    size = 2 ** report.n
    order = np.argsort(-flat, kind="stable")
    exact = {}
    for index in order[:DISTRIBUTION_CAP]:
        p = float(flat[index])
        if p <= DISTRIBUTION_FLOOR:
            break
        exact[f"{int(index) // size},{int(index) % size}"] = p
    body = {
        "exact_distribution": exact,
        "fidelities": {
            f"{b.z_a},{b.z_b}": [b.fidelity_a, b.fidelity_b] for b in report.branches
        },
        "gate_uses": report.gate_uses,
    }
    if shots > 0:
        body["histogram"] = {
            f"{za},{zb}": count for (za, zb), count in sorted(report.joint_histogram.items())
        }
    return body


def _protocol_body(protocol: str, gate: np.ndarray, shots: int, seed: int, params: dict) -> dict:
    """Run the named protocol and shape its result for the JSON report."""
    if protocol == "tomography":
        if shots < 1:
            raise ValueError("tomography needs shots >= 1 (counts per setting)")
        grid = params.get("phase_grid_size", 16)
        est = tomography_baseline(gate, shots, seed=seed, phase_grid_size=grid)
        return {
            "fidelities": {},
            "gate_uses": est.gate_uses,
            "estimate": {
                "p00": est.p00,
                "p10": est.p10,
                "relative_phase": est.relative_phase,
                "shots_per_setting": est.shots_per_setting,
                "phase_grid_size": est.phase_grid_size,
            },
        }
    if protocol == "double-pe":
        return _double_pe_body(gate, shots, seed, params)
    if protocol == "qudit-minus-one":
        if gate.shape[0] != params["d"]:
            raise ValueError(
                f"gate dimension {gate.shape[0]} does not match requested d={params['d']}"
            )
        report = run_qudit_minus_one(gate, seed=seed, shots=shots)
        body = {
            "exact_distribution": report.exact_distribution,
            "fidelities": {
                label: [branch.fidelity] for label, branch in report.branches.items()
            },
            "gate_uses": report.gate_uses,
        }
        if shots > 0:
            body["histogram"] = report.histogram
        return body

    runners = {
        "pm1": lambda: protocol_pm1(gate, seed=seed, shots=shots),
        "square-trick": lambda: protocol_square_trick(gate, seed=seed, shots=shots),
        "quartet": lambda: protocol_quartet(gate, seed=seed, shots=shots),
        "known-phases": lambda: protocol_known_phases(
            gate, params["theta1"], params["theta2"], seed=seed, shots=shots
        ),
    }
    report = runners[protocol]()
    body = {
        "exact_distribution": report.exact_distribution,
        "fidelities": _branch_fidelities(report.branches),
        "gate_uses": report.gate_uses,
    }
    if shots > 0:
        body["histogram"] = report.histogram
    return body


def _emit(report: dict, out_path) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def run_experiment(config: dict) -> dict:
    """Validate a merged config, run its protocol, and return the report.

    The report carries "meta" and "config" plus the protocol body: the exact
    outcome distribution (when the protocol has one), per-branch fidelities,
    the gate use count, and a histogram when shots > 0.
    """
    config = validate_config(config)
    gate = resolve_gate(config["gate"])
    body = _protocol_body(
        config["protocol"], gate, config["shots"], config["seed"], config["params"]
    )
    report = {
        "meta": {"tool": "qsinglet", "version": __version__, "timestamp": _timestamp()},
        "config": config,
    }
    report.update(body)
    return report


def _cmd_run(args) -> int:
    try:
        report = run_experiment(apply_overrides(load_config(args.config), args))
    except (ValueError, TypeError, KeyError, OSError) as exc:
        failure = {
            "meta": {"tool": "qsinglet", "version": __version__, "timestamp": _timestamp()},
            "errors": [str(exc)],
        }
        _emit(failure, args.out)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(report, args.out)
    return 0


def _cmd_gen_gate(args) -> int:
    try:
        generate_gate(args.dim, args.phases, args.seed, out=args.out)
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.dim}x{args.dim} gate to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsinglet",
        description="Singlet-based eigenstate location protocols for unknown gates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a protocol from a JSON config")
    run.add_argument("--config", required=True, help="path to the experiment config JSON")
    run.add_argument("--protocol", choices=PROTOCOLS, help="override the config's protocol")
    run.add_argument("--shots", type=int, help="override shot count (0 = exact only)")
    run.add_argument("--seed", type=int, help="override the sampling seed")
    run.add_argument("--gate", help="override the gate with a matrix JSON file")
    run.add_argument("--n", type=int, help="override the double-pe register size")
    run.add_argument("--d", type=int, help="override the qudit dimension")
    run.add_argument("--theta1", type=float, help="override the first known phase")
    run.add_argument("--theta2", type=float, help="override the second known phase")
    run.add_argument("--out", help="write the report here instead of stdout")

    gen = sub.add_parser("gen-gate", help="write a gate with chosen eigenphases")
    gen.add_argument("--dim", type=int, required=True, help="gate dimension")
    gen.add_argument(
        "--phases", type=float, nargs="+", required=True, help="one eigenphase per dimension"
    )
    gen.add_argument("--seed", type=int, required=True, help="seed for the random eigenbasis")
    gen.add_argument("--out", required=True, help="matrix JSON output path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_gen_gate(args)


if __name__ == "__main__":
    sys.exit(main())
