import numpy as np
import pytest

import ksplit
from ksplit import baselines, cli, verify


def run_main(args):
    return cli.main(args)


class TestRunCommand:
    def test_zero_horizon_single_row(self, tmp_path):
        out = tmp_path / "still.csv"
        code = run_main(["run", "--model", "model1", "--method", "ksym2",
                        "--tau", "0.01", "--t-final", "0", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 2
        assert lines[0] == "t,energy_rel_aug,energy_rel_orig,copy_div_max,c1,c2,c3,c4"
        row = lines[1].split(",")
        assert row[0] == "0.0"
        assert row[1] == "0.0" and row[2] == "0.0" and row[3] == "0.0"
        assert [float(x) for x in row[4:]] == [0.2, 0.4, 0.3, 0.5]

    def test_row_count_matches_contract(self, tmp_path):
        out = tmp_path / "run.csv"
        code = run_main(["run", "--model", "model1", "--method", "ksym2",
                        "--tau", "0.01", "--t-final", "2", "--record-every", "10",
                        "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 1 + int(2 / (0.01 * 10))  # header + initial + records

    def test_byte_identical_reruns(self, tmp_path):
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            code = run_main(["run", "--model", "gyrocenter", "--method", "ksym4",
                            "--tau", "0.01", "--t-final", "1", "--out", str(out)])
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_lf_line_endings_and_roundtrip_floats(self, tmp_path):
        out = tmp_path / "fmt.csv"
        run_main(["run", "--model", "model1", "--method", "ksym2", "--tau", "0.01",
                  "--t-final", "0.1", "--out", str(out)])
        blob = out.read_bytes()
        assert b"\r" not in blob
        value = out.read_text().splitlines()[5].split(",")[4]
        assert repr(float(value)) == value

    def test_initial_override(self, tmp_path):
        out = tmp_path / "init.csv"
        code = run_main(["run", "--model", "model1", "--method", "ksym2",
                        "--tau", "0.01", "--t-final", "0",
                        "--initial", "0.1,0.9,0.2,0.3", "--out", str(out)])
        assert code == 0
        row = out.read_text().splitlines()[1].split(",")
        assert [float(x) for x in row[4:]] == [0.1, 0.9, 0.2, 0.3]


class TestExitCodes:
    def test_bad_tau_is_config_error(self, tmp_path):
        code = run_main(["run", "--model", "model1", "--tau", "-0.01",
                        "--t-final", "1", "--out", str(tmp_path / "x.csv")])
        assert code == cli.EXIT_CONFIG

    def test_wrong_initial_length_is_config_error(self, tmp_path):
        code = run_main(["run", "--model", "model1", "--initial", "0.1,0.2",
                        "--tau", "0.01", "--t-final", "1",
                        "--out", str(tmp_path / "x.csv")])
        assert code == cli.EXIT_CONFIG

    def test_domain_violation_is_integration_error(self, tmp_path):
        # sin(y) = 0 at the initial point makes a subsystem flow singular
        code = run_main(["run", "--model", "model1", "--method", "ksym2",
                        "--tau", "0.01", "--t-final", "1",
                        "--initial", "0.2,0.0,0.3,0.5",
                        "--out", str(tmp_path / "x.csv")])
        assert code == cli.EXIT_INTEGRATION

    def test_single_tau_order_study_is_config_error(self):
        code = run_main(["order", "--model", "model1", "--method", "ksym2",
                        "--taus", "0.01", "--t-final", "1"])
        assert code == cli.EXIT_CONFIG

    def test_missing_config_file(self, tmp_path):
        code = run_main(["run", "--config", str(tmp_path / "absent.cfg")])
        assert code == cli.EXIT_CONFIG


class TestConfigFile:
    def test_precedence_flags_over_file_over_defaults(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# sweep base\ntau = 0.05\nmethod = ksym4\nomega = 30\n")
        parser = cli.build_parser()
        args = parser.parse_args(["run", "--config", str(cfg), "--tau", "0.02"])
        config = cli.build_run_config(args)
        assert config.tau == 0.02          # flag wins
        assert config.method == "ksym4"    # file beats default
        assert config.omega == 30.0
        assert config.model == "model1"    # untouched default

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("gamma = 3\n")
        with pytest.raises(ksplit.ConfigurationError):
            cli.load_config_file(str(cfg))

    def test_initial_parsed_from_file(self, tmp_path):
        cfg = tmp_path / "init.cfg"
        cfg.write_text("initial = 0.1, 0.9, 0.2, 0.3\n")
        values = cli.load_config_file(str(cfg))
        assert values["initial"] == (0.1, 0.9, 0.2, 0.3)


class TestVerifyCommand:
    def test_invariants_suite_passes(self, capsys):
        code = run_main(["verify", "invariants"])
        out = capsys.readouterr().out
        assert code == 0
        assert "PASS" in out and "FAIL" not in out

    def test_corrupted_tableau_fails_verification(self, capsys, monkeypatch):
        # negative control: replace the third-order weights with first-order ones
        def crooked():
            good = baselines.make_rk3_heun()
            return ksplit.ButcherTableau("rk3", good.a,
                                         np.array([0.5, 0.0, 0.5]), good.c)

        monkeypatch.setitem(baselines.TABLEAUS, "rk3", crooked)
        monkeypatch.setattr(verify, "ORDER_BANDS", {"rk3": (3.0, 0.3)})
        code = cli.cmd_verify("orders")
        out = capsys.readouterr().out
        assert code == cli.EXIT_VERIFY_FAILED
        assert "FAIL" in out


class TestOrderCommand:
    def test_prints_slope(self, capsys):
        code = run_main(["order", "--model", "model1", "--method", "rk3",
                        "--omega", "5", "--taus", "0.02,0.01,0.005", "--t-final", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert "fitted slope" in out
        slope = float(out.strip().splitlines()[-1].split(":")[1])
        assert slope == pytest.approx(3.0, abs=0.3)


class TestBenchCommand:
    def test_table_shape(self, capsys):
        code = run_main(["bench", "--model", "model1", "--tau", "0.01",
                        "--t-final", "2"])
        out = capsys.readouterr().out
        assert code == 0
        lines = [ln for ln in out.splitlines() if ln.strip()]
        header = lines[-2].split("|")
        timings = lines[-1].split("|")
        assert [h.strip() for h in header] == ["2ndKsym", "3rdRK", "4thKsym", "5thRK"]
        assert len(timings) == 4
        assert all(float(t) >= 0.0 for t in timings)
