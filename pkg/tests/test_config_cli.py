import json

import pytest

from tbteleport.cli import main
from tbteleport.protocol import NodeConfig, from_dict, load_scenario, to_dict
from tbteleport.protocol.config import PRESETS, apply_override, diagnose, preset_text
from tbteleport.validation import ConfigError


class TestConfig:
    @pytest.mark.parametrize("name", PRESETS)
    def test_presets_clean(self, name):
        assert diagnose(name) == []
        assert load_scenario(name).name == name

    def test_fitted_knobs_documented(self):
        text = preset_text("paper_12p3km")
        for key in ("mu:", "idler_transmittance:", "bsm_output_transmittance:"):
            line = next(ln for ln in text.splitlines() if ln.strip().startswith(key))
            assert "FITTED" in line or key == "idler_transmittance:"

    def test_round_trip(self):
        cfg = load_scenario("paper_12p3km")
        assert from_dict(to_dict(cfg)) == cfg

    def test_override(self):
        cfg = load_scenario("back_to_back", ["user.mu=0.1", "fibers.user_relay.length_km=2"])
        assert cfg.user.mu == 0.1 and cfg.fibers.user_relay.length_km == 2.0

    def test_unknown_override(self):
        with pytest.raises(ConfigError) as exc:
            apply_override({}, "user.muu=1")
        assert exc.value.path == "user.muu"

    def test_range_violation_path(self):
        with pytest.raises(ConfigError) as exc:
            load_scenario("paper_12p3km", ["user.mu=0.9"])
        assert exc.value.path == "user.mu"

    def test_negative_length(self):
        problems = diagnose("paper_12p3km", ["fibers.relay_central.length_km=-3"])
        assert problems and problems[0].startswith("fibers.relay_central.length_km")

    def test_all_sections_reported(self):
        problems = diagnose("paper_12p3km", ["user.mu=0.9", "relay.mu=-1"])
        assert len(problems) == 2

    def test_type_error(self, tmp_path):
        p = tmp_path / "s.yaml"
        p.write_text("user:\n  mu: high\n")
        with pytest.raises(ConfigError, match="user.mu"):
            load_scenario(p)

    def test_malformed_yaml_line(self, tmp_path):
        p = tmp_path / "s.yaml"
        p.write_text("user:\n  mu: 0.1\n  max_pairs: [2\nrelay: {}\n")
        with pytest.raises(ConfigError) as exc:
            load_scenario(p)
        assert exc.value.path.startswith(f"{p}:")
        assert exc.value.path.split(":")[-2].isdigit()

    def test_unknown_section(self):
        with pytest.raises(ConfigError):
            from_dict({"users": {}})

    def test_defaults_validate(self):
        NodeConfig().validate()


class TestCli:
    def test_validate_clean(self, capsys):
        assert main(["validate", "paper_12p3km"]) == 0
        assert "ok" in capsys.readouterr().out

    def test_validate_problem(self, capsys):
        assert main(["validate", "paper_12p3km", "--set", "user.mu=0.9"]) != 0
        assert "user.mu" in capsys.readouterr().out

    def test_run_bad_config(self, tmp_path, capsys):
        p = tmp_path / "bad.yaml"
        p.write_text("user: [1,\n")
        assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 2
        assert f"{p}:" in capsys.readouterr().err

    def test_run_unknown_key(self, tmp_path, capsys):
        assert main(["run", "paper_12p3km", "--set", "relay.nope=1",
                     "--out", str(tmp_path)]) == 2
        assert "relay.nope" in capsys.readouterr().err

    def test_unwritable_out(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert main(["run", "paper_12p3km", "--out", str(blocker / "sub")]) == 2

    def test_tomography_run(self, tmp_path, capsys):
        out = tmp_path / "o"
        rc = main(["run", "back_to_back", "--experiment", "tomography_suite",
                   "--duration-h", "0.5", "--seed", "3", "--out", str(out)])
        assert rc == 0
        rep = json.loads((out / "report.json").read_text())
        assert set(rep["results"]["states"]) == {"0", "1", "+", "-", "+i", "-i"}
        assert rep["config"]["name"] == "back_to_back" and rep["seed"] == 3
        for f in ("summary.csv", "tags.bin", "feedback.csv"):
            assert (out / f).exists()
        assert "average" in capsys.readouterr().out

    def test_drift_run_open_loop(self, tmp_path, capsys):
        out = tmp_path / "d"
        rc = main(["run", "paper_12p3km", "--experiment", "drift_study", "--feedback", "off",
                   "--duration-h", "24", "--seed", "4", "--out", str(out)])
        assert rc == 0
        res = json.loads((out / "report.json").read_text())["results"]
        assert res["feedback"] is False
        assert res["delay_per_2c_ps"] == pytest.approx(400, rel=0.05)

    def test_seed_logged_when_missing(self, tmp_path, caplog):
        out = tmp_path / "h"
        with caplog.at_level("INFO", logger="tbteleport"):
            assert main(["run", "paper_12p3km", "--experiment", "hom_scan",
                         "--duration-h", "1", "--out", str(out)]) == 0
        seed = json.loads((out / "report.json").read_text())["seed"]
        assert str(seed) in caplog.text

    def test_overrides_in_report(self, tmp_path):
        out = tmp_path / "r"
        main(["run", "paper_12p3km", "--experiment", "hom_scan", "--seed", "1",
              "--set", "user.vbs_ratio=0.3", "--out", str(out)])
        rep = json.loads((out / "report.json").read_text())
        assert rep["config"]["user"]["vbs_ratio"] == 0.3
