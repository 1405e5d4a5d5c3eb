"""Config resolution, validation messages, and the CLI contract."""

import numpy as np
import pytest

from counterphase.cli import entry
from counterphase.errors import ConfigError
from counterphase.phases import InterferometerGeometry
from counterphase.runner import run_mc_validate
from counterphase.scenario import (
    apply_overrides,
    build_scenario,
    read_config,
    save_scenario,
)
from counterphase.waveforms import IdealSawtooth, RcRamp


def test_defaults_build():
    sc = build_scenario({})
    assert sc.beam.v0 == 1722.6
    assert sc.detection.flux_hz == 212.4
    assert sc.geometry.l_shifters == 1.0
    assert sc.phi_int_v0() == pytest.approx(24.97352463072705, rel=1e-12)
    assert sc.shifter_frequency() == 17000.0


def test_validation_messages_name_the_key():
    cases = {
        "beam.v0_m_s": {"beam": {"v0_m_s": -1}},
        "interaction.d_m": {"interaction": {"d_m": 0}},
        "detection.n_z": {"detection": {"n_z": 4}},
        "detection.noise": {"detection": {"noise": "yes"}},
        "detection.seed": {"detection": {"seed": 1.5}},
        "shifters.kind": {"shifters": {"kind": "triangle"}},
        "gyro.profile": {"gyro": {"profile": "step"}},
        "polarizability.window": {"polarizability": {"window": 2}},
    }
    for path, raw in cases.items():
        with pytest.raises(ConfigError, match=path.replace(".", r"\.")):
            build_scenario(raw)
    with pytest.raises(ConfigError, match="unknown key: nosuch"):
        build_scenario({"nosuch": 1})
    with pytest.raises(ConfigError, match="unknown key: beam.nope"):
        build_scenario({"beam": {"nope": 1}})
    with pytest.raises(ConfigError, match="unknown experiment"):
        build_scenario({"experiment": "spin-echo"})


def test_minimal_config_is_enough():
    sc = build_scenario({"experiment": "gyro"})
    assert sc.resolved["experiment"] == "gyro"
    assert sc.experiment_block("contrast-sweep")["phi_step_rad"] == 0.25


def test_apply_overrides_parses_yaml_values():
    raw = {}
    apply_overrides(
        raw,
        [
            "detection.noise=false",
            "shifters.scale=1.25",
            "contrast_sweep.f_hz_list=[0, 100]",
        ],
    )
    assert raw["detection"]["noise"] is False
    assert raw["shifters"]["scale"] == 1.25
    assert raw["contrast_sweep"]["f_hz_list"] == [0, 100]
    with pytest.raises(ConfigError, match="key=value"):
        apply_overrides({}, ["badpair"])


def test_config_round_trip(tmp_path):
    sc = build_scenario({"experiment": "gyro", "shifters": {"kind": "rc"}})
    # rc corner defaults to 1/(2.4 f) when left null
    assert sc.resolved["shifters"]["rc_s"] == pytest.approx(1 / (2.4 * 17000.0))
    path = tmp_path / "cfg.yaml"
    save_scenario(sc, path)
    again = build_scenario(read_config(path))
    assert again.resolved == sc.resolved


def test_read_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        read_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("][")
    with pytest.raises(ConfigError):
        read_config(bad)
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text("42\n")
    with pytest.raises(ConfigError, match="mapping"):
        read_config(scalar)


def test_shifter_pair_kinds():
    assert build_scenario({"shifters": {"kind": "none"}}).shifter_pair() is None
    assert build_scenario({"shifters": {"f_hz": 0.0}}).shifter_pair() is None
    w1, w2 = build_scenario(
        {"shifters": {"scale_2": 1.01, "offset_s": 2e-6}}
    ).shifter_pair()
    assert isinstance(w1, IdealSawtooth) and isinstance(w2, IdealSawtooth)
    assert (w1.sign, w2.sign) == (1, -1)
    assert w1.scale == 1.0 and w2.scale == 1.01
    # timing skew is relative, so it lands on the second drive only
    assert w1.t0 == 0.0 and w2.t0 == 2e-6
    r1, r2 = build_scenario({"shifters": {"kind": "rc"}}).shifter_pair()
    assert isinstance(r1, RcRamp) and r2.sign == -1
    # per-call frequency override for sweep drivers
    o1, _ = build_scenario({}).shifter_pair(f_hz=40000.0)
    assert o1.f == 40000.0


def test_detection_z_grid():
    sc = build_scenario({})
    z = sc.detection.z_grid(sc.geometry.k_g)
    assert len(z) == 32
    assert z[0] == 0.0
    # two fringe periods, endpoint excluded to keep points independent
    period = 2 * np.pi / sc.geometry.k_g
    assert z[-1] == pytest.approx(2 * period * 31 / 32, rel=1e-12)


def test_cli_fringe_scan_runs(tmp_path, capsys):
    rc = entry(["fringe-scan", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "fringe_scan.csv").exists()
    out = capsys.readouterr().out
    assert "experiment=fringe-scan" in out


def test_cli_config_errors(tmp_path, capsys):
    assert entry(["gyro", "--out", str(tmp_path), "--set", "nosuch.key=1"]) == 2
    assert "unknown key: nosuch" in capsys.readouterr().err
    assert entry(["fringe-scan", "--out", str(tmp_path), "--set", "interaction.d_m=0"]) == 2
    assert "interaction.d_m" in capsys.readouterr().err


def test_cli_experiment_mismatch(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("experiment: gyro\n")
    rc = entry(["fringe-scan", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 2
    assert "experiment" in capsys.readouterr().err


def test_cli_numerics_exit(tmp_path, capsys):
    # noiseless sweep window placed entirely below the zero crossing
    rc = entry(
        [
            "polarizability",
            "--out",
            str(tmp_path),
            "--set", "detection.noise=false",
            "--set", "polarizability.n_points=5",
            "--set", "polarizability.v2_min_volt2=200000",
            "--set", "polarizability.v2_max_volt2=240000",
        ]
    )
    assert rc == 3
    assert "no phase sign change" in capsys.readouterr().err


def test_cli_validation_exit(tmp_path, capsys, monkeypatch):
    import counterphase.cli as cli

    class Stub:
        passed = False
        summary_path = tmp_path / "s.txt"

    (tmp_path / "s.txt").write_text("result=FAIL\n")
    monkeypatch.setitem(cli._RUNNERS, "mc-validate", lambda sc, out: Stub())
    rc = entry(["mc-validate", "--out", str(tmp_path)])
    assert rc == 4
    assert "validation failed" in capsys.readouterr().err


def test_mc_validate_fault_injection(tmp_path):
    # deliberately mismatched shifter separation between the two engines
    sc = build_scenario({"mc_validate": {"n_atoms": 200000}})
    res = run_mc_validate(
        sc, tmp_path, mc_geometry=InterferometerGeometry(l_shifters=1.05, l_g=0.66)
    )
    assert not res.passed
    assert max(abs(r.z) for r in res.rows) > 10
    assert "result=FAIL" in (tmp_path / "mc_validate_summary.txt").read_text()


def test_cli_version(capsys):
    with pytest.raises(SystemExit) as exc:
        entry(["--version"])
    assert exc.value.code == 0
    assert "counterphase" in capsys.readouterr().out
