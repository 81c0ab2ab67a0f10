"""Tests for the command line runner and its JSON report contract."""

import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from qsinglet.cli import (
    PROTOCOLS,
    apply_overrides,
    build_parser,
    generate_gate,
    load_config,
    main,
    resolve_gate,
    run_experiment,
    validate_config,
)
from qsinglet.linalg import load_unitary, save_unitary

SCHEMA = json.loads(
    resources.files("qsinglet").joinpath("report_schema.json").read_text()
)

PM1_CONFIG = {
    "protocol": "pm1",
    "gate": {"dim": 2, "phases": [0.0, np.pi], "seed": 3},
    "shots": 16,
    "seed": 1,
    "params": {},
}


def write_config(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


def run_cli(args):
    return main([str(a) for a in args])


class TestConfigHandling:
    def test_load_config_defaults(self, tmp_path):
        path = write_config(tmp_path, {"protocol": "pm1", "gate": {"file": "g.json"}})
        config = load_config(path)
        assert config["shots"] == 1
        assert config["seed"] == 0
        assert config["params"] == {}

    def test_load_config_rejects_unknown_keys(self, tmp_path):
        path = write_config(tmp_path, {"protocol": "pm1", "plot": True})
        with pytest.raises(ValueError, match="unknown config keys"):
            load_config(path)
        path = write_config(tmp_path, {"params": [1, 2]}, "bad.json")
        with pytest.raises(ValueError):
            load_config(path)

    def test_validate_config_unknown_protocol(self):
        config = dict(PM1_CONFIG, protocol="bogus")
        with pytest.raises(ValueError, match="unknown protocol 'bogus'"):
            validate_config(config)

    def test_validate_config_param_contracts(self):
        with pytest.raises(ValueError, match="requires params"):
            validate_config(dict(PM1_CONFIG, protocol="double-pe"))
        with pytest.raises(ValueError, match="does not accept"):
            validate_config(dict(PM1_CONFIG, params={"n": 3}))
        with pytest.raises(ValueError, match="shots"):
            validate_config(dict(PM1_CONFIG, shots=-1))
        with pytest.raises(ValueError, match="seed"):
            validate_config(dict(PM1_CONFIG, seed=-1))
        with pytest.raises(ValueError, match="n must be"):
            validate_config(
                dict(PM1_CONFIG, protocol="double-pe", params={"n": 99})
            )

    def test_apply_overrides(self, tmp_path):
        path = write_config(tmp_path, PM1_CONFIG)
        args = build_parser().parse_args(
            ["run", "--config", path, "--protocol", "double-pe", "--shots", "7",
             "--seed", "2", "--n", "4"]
        )
        merged = apply_overrides(load_config(path), args)
        assert merged["protocol"] == "double-pe"
        assert merged["shots"] == 7
        assert merged["seed"] == 2
        assert merged["params"]["n"] == 4


class TestGateSources:
    def test_generate_gate_deterministic_bytes(self, tmp_path):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        generate_gate(2, [0.0, np.pi], 5, out=out1)
        generate_gate(2, [0.0, np.pi], 5, out=out2)
        assert out1.read_bytes() == out2.read_bytes()
        u = load_unitary(out1)
        vals = np.sort_complex(np.linalg.eigvals(u))
        np.testing.assert_allclose(vals, [-1.0, 1.0], atol=1e-10)

    def test_generate_gate_validation(self):
        with pytest.raises(ValueError, match="phases"):
            generate_gate(3, [0.0, np.pi], 0)
        with pytest.raises(ValueError, match="dim"):
            generate_gate(1, [0.0], 0)
        with pytest.raises(ValueError, match="seed"):
            generate_gate(2, [0.0, 1.0], -1)

    def test_resolve_gate_from_file(self, tmp_path):
        path = tmp_path / "gate.json"
        u = generate_gate(2, [0.0, np.pi], 7, out=path)
        np.testing.assert_allclose(resolve_gate({"file": str(path)}), u)

    def test_resolve_gate_from_generator_source(self):
        u = resolve_gate({"dim": 3, "phases": [0.0, 0.0, np.pi], "seed": 2})
        assert u.shape == (3, 3)
        np.testing.assert_allclose(u @ u, np.eye(3), atol=1e-10)

    def test_resolve_gate_rejects_malformed(self):
        with pytest.raises(ValueError):
            resolve_gate({"file": "x", "dim": 2})
        with pytest.raises(ValueError):
            resolve_gate("gate.json")
        with pytest.raises(ValueError):
            resolve_gate({"dim": 2, "phases": 3.0, "seed": 0})


class TestRunExperiment:
    def test_pm1_report_shape(self):
        report = run_experiment(dict(PM1_CONFIG))
        jsonschema.validate(report, SCHEMA)
        assert set(report) == {
            "meta", "config", "exact_distribution", "fidelities", "gate_uses", "histogram",
        }
        assert report["gate_uses"] == 1
        assert abs(report["exact_distribution"]["+x"] - 0.5) <= 1e-12
        assert sum(report["histogram"].values()) == 16

    def test_zero_shots_drops_histogram(self):
        report = run_experiment(dict(PM1_CONFIG, shots=0))
        jsonschema.validate(report, SCHEMA)
        assert "histogram" not in report

    def test_unknown_protocol_raises(self):
        with pytest.raises(ValueError):
            run_experiment(dict(PM1_CONFIG, protocol="nope"))

    def test_tomography_carries_estimate(self):
        config = {
            "protocol": "tomography",
            "gate": {"dim": 2, "phases": [0.0, np.pi], "seed": 1},
            "shots": 500,
            "seed": 0,
            "params": {"phase_grid_size": 8},
        }
        report = run_experiment(config)
        jsonschema.validate(report, SCHEMA)
        estimate = report["estimate"]
        assert estimate["shots_per_setting"] == 500
        assert report["gate_uses"] == 500 * 9
        assert abs(estimate["p00"] + estimate["p10"] - 1.0) < 1e-12

    def test_double_pe_distribution_keys(self):
        config = {
            "protocol": "double-pe",
            "gate": {"dim": 2, "phases": [0.5, 2.5], "seed": 4},
            "shots": 32,
            "seed": 0,
            "params": {"n": 3},
        }
        report = run_experiment(config)
        jsonschema.validate(report, SCHEMA)
        for key, p in report["exact_distribution"].items():
            za, zb = key.split(",")
            assert 0 <= int(za) < 8 and 0 <= int(zb) < 8
            assert p > 1e-12
        assert len(report["exact_distribution"]) <= 4096
        assert report["gate_uses"] == 2 * 7

    def test_qudit_gate_dimension_mismatch(self):
        config = {
            "protocol": "qudit-minus-one",
            "gate": {"dim": 2, "phases": [0.0, np.pi], "seed": 0},
            "shots": 0,
            "seed": 0,
            "params": {"d": 3},
        }
        with pytest.raises(ValueError, match="does not match"):
            run_experiment(config)


PROTOCOL_CONFIGS = {
    "pm1": PM1_CONFIG,
    "square-trick": {
        "protocol": "square-trick",
        "gate": {"dim": 2, "phases": [0.0, np.pi / 2], "seed": 2},
        "shots": 8, "seed": 0, "params": {},
    },
    "known-phases": {
        "protocol": "known-phases",
        "gate": {"dim": 2, "phases": [0.2, 1.7], "seed": 2},
        "shots": 8, "seed": 0, "params": {"theta1": 0.2, "theta2": 1.7},
    },
    "quartet": {
        "protocol": "quartet",
        "gate": {"dim": 2, "phases": [0.0, np.pi / 2], "seed": 2},
        "shots": 8, "seed": 0, "params": {},
    },
    "double-pe": {
        "protocol": "double-pe",
        "gate": {"dim": 2, "phases": [0.3, 2.0], "seed": 2},
        "shots": 8, "seed": 0, "params": {"n": 2},
    },
    "qudit-minus-one": {
        "protocol": "qudit-minus-one",
        "gate": {"dim": 3, "phases": [0.0, 0.0, np.pi], "seed": 2},
        "shots": 8, "seed": 0, "params": {"d": 3},
    },
    "tomography": {
        "protocol": "tomography",
        "gate": {"dim": 2, "phases": [0.0, np.pi], "seed": 2},
        "shots": 64, "seed": 0, "params": {},
    },
}


@pytest.mark.parametrize("protocol", sorted(PROTOCOL_CONFIGS))
def test_every_protocol_report_validates(protocol):
    assert protocol in PROTOCOLS
    report = run_experiment(dict(PROTOCOL_CONFIGS[protocol]))
    jsonschema.validate(report, SCHEMA)
    assert report["config"]["protocol"] == protocol
    assert report["gate_uses"] >= 1


class TestMain:
    def test_run_writes_valid_report(self, tmp_path, capsys):
        path = write_config(tmp_path, PM1_CONFIG)
        assert run_cli(["run", "--config", path]) == 0
        report = json.loads(capsys.readouterr().out)
        jsonschema.validate(report, SCHEMA)
        assert report["config"]["shots"] == 16

    def test_run_out_file_and_determinism(self, tmp_path, capsys):
        path = write_config(tmp_path, PM1_CONFIG)
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        assert run_cli(["run", "--config", path, "--out", out1]) == 0
        assert run_cli(["run", "--config", path, "--out", out2]) == 0
        assert capsys.readouterr().out == ""
        a, b = json.loads(out1.read_text()), json.loads(out2.read_text())
        a.pop("meta")
        b.pop("meta")
        assert a == b

    def test_run_overrides_shots(self, tmp_path, capsys):
        path = write_config(tmp_path, PM1_CONFIG)
        assert run_cli(["run", "--config", path, "--shots", 0]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["config"]["shots"] == 0
        assert "histogram" not in report

    def test_run_error_report(self, tmp_path, capsys):
        path = write_config(tmp_path, dict(PM1_CONFIG, protocol="bogus"))
        assert run_cli(["run", "--config", path]) == 1
        captured = capsys.readouterr()
        report = json.loads(captured.out)
        jsonschema.validate(report, SCHEMA)
        assert any("unknown protocol" in e for e in report["errors"])
        assert "unknown protocol" in captured.err

    def test_run_missing_config_file(self, tmp_path, capsys):
        assert run_cli(["run", "--config", tmp_path / "absent.json"]) == 1
        report = json.loads(capsys.readouterr().out)
        assert "errors" in report

    def test_run_spectrum_error_is_reported(self, tmp_path, capsys):
        config = dict(PM1_CONFIG, gate={"dim": 2, "phases": [0.0, 1.0], "seed": 0})
        path = write_config(tmp_path, config)
        assert run_cli(["run", "--config", path]) == 1
        report = json.loads(capsys.readouterr().out)
        assert any("eigenphase" in e for e in report["errors"])

    def test_gen_gate_roundtrip(self, tmp_path, capsys):
        out = tmp_path / "gate.json"
        args = ["gen-gate", "--dim", 2, "--phases", 0.0, 3.141592653589793,
                "--seed", 9, "--out", out]
        assert run_cli(args) == 0
        first = out.read_bytes()
        assert run_cli(args) == 0
        assert out.read_bytes() == first
        capsys.readouterr()
        u = load_unitary(out)
        config = dict(PM1_CONFIG, gate={"file": str(out)})
        report = run_experiment(config)
        assert abs(report["exact_distribution"]["+x"] - 0.5) <= 1e-12
        assert u.shape == (2, 2)

    def test_gen_gate_errors(self, tmp_path, capsys):
        out = tmp_path / "gate.json"
        assert run_cli(["gen-gate", "--dim", 1, "--phases", 0.0, "--seed", 0,
                        "--out", out]) == 1
        assert run_cli(["gen-gate", "--dim", 2, "--phases", 0.0, "--seed", 0,
                        "--out", out]) == 1
        assert "error" in capsys.readouterr().err

    def test_bad_flag_exits_with_usage(self, tmp_path):
        with pytest.raises(SystemExit):
            run_cli(["run", "--config", "c.json", "--protocol", "bogus"])
        with pytest.raises(SystemExit):
            run_cli([])
