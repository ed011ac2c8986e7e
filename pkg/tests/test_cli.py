import json
import math

import pytest

import inar1 as m
from inar1.cli import main

GEO = m.InnovationSpec.geometric(0.5)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSimulate:
    def test_deterministic_files(self, tmp_path, capsys):
        f1, f2 = tmp_path / "a.txt", tmp_path / "b.txt"
        args = ["simulate", "--dist", "geometric:0.5", "--theta", "1", "--n", "10",
                "--seed", "7"]
        assert main(args + ["--out", str(f1)]) == 0
        assert main(args + ["--out", str(f2)]) == 0
        assert f1.read_bytes() == f2.read_bytes()
        lines = f1.read_text().strip().splitlines()
        assert len(lines) == 11 and lines[0] == "0"

    def test_stdout_and_csv(self, capsys):
        code, out, _ = run_cli(capsys, "simulate", "--dist", "poisson:1", "--theta",
                               "0.9", "--n", "5", "--seed", "3", "--format", "csv")
        assert code == 0
        assert out.splitlines()[0] == "t,x"
        assert out.splitlines()[1] == "0,0"

    def test_local_parametrization(self, tmp_path, capsys):
        f1, f2 = tmp_path / "a.txt", tmp_path / "b.txt"
        assert main(["simulate", "--dist", "geometric:0.5", "--local", "2,50",
                     "--seed", "5", "--out", str(f1)]) == 0
        theta = 1.0 - 2.0 / 50**2
        assert main(["simulate", "--dist", "geometric:0.5", "--theta", repr(theta),
                     "--n", "50", "--seed", "5", "--out", str(f2)]) == 0
        assert f1.read_bytes() == f2.read_bytes()

    def test_local_conflicting_n(self, capsys):
        code, _, err = run_cli(capsys, "simulate", "--dist", "geometric:0.5",
                               "--local", "2,50", "--n", "49", "--seed", "1")
        assert code == 2
        assert "conflicts" in err

    def test_bad_dist(self, capsys):
        code, _, err = run_cli(capsys, "simulate", "--dist", "normal:0,1", "--theta",
                               "1", "--n", "5", "--seed", "1")
        assert code == 2
        assert "error" in err


class TestTransition:
    def test_plain_probability(self, capsys):
        code, out, _ = run_cli(capsys, "transition", "--dist", "poisson:1",
                               "--theta", "0.9", "--from", "2", "--to", "1")
        assert code == 0
        assert float(out) == pytest.approx(0.19 * math.exp(-1.0), rel=1e-10)
        assert out.strip().startswith("0.069897")

    def test_split_json(self, capsys):
        code, out, _ = run_cli(capsys, "transition", "--dist", "poisson:1",
                               "--split", "2,10", "--from", "3", "--to", "5")
        assert code == 0
        data = json.loads(out)
        assert data["leading"] == pytest.approx(0.17665570765052663, rel=1e-9)
        assert data["remainder"] == pytest.approx(1.8050617913478775e-05, rel=1e-9)
        assert data["probability"] == pytest.approx(data["leading"] + data["remainder"], rel=1e-9)

    def test_needs_theta_or_split(self, capsys):
        code, _, err = run_cli(capsys, "transition", "--dist", "poisson:1",
                               "--from", "2", "--to", "1")
        assert code == 2


def write_path(tmp_path, values):
    f = tmp_path / "path.txt"
    f.write_text("\n".join(str(v) for v in values) + "\n")
    return str(f)


class TestEstimate:
    def test_efficient(self, tmp_path, capsys):
        pf = write_path(tmp_path, [0, 3, 2, 1, 0])  # three down moves
        code, out, _ = run_cli(capsys, "estimate", "--path", pf, "--mode", "efficient",
                               "--g0", "0.5", "--mu", "1")
        assert code == 0
        data = json.loads(out)
        assert data["estimate"] == pytest.approx(12.0)
        assert data["n"] == 4

    def test_semiparam(self, tmp_path, capsys):
        pf = write_path(tmp_path, [0, 1, 1, 2, 1])
        code, out, _ = run_cli(capsys, "estimate", "--path", pf, "--mode", "semiparam")
        assert code == 0
        data = json.loads(out)
        assert data["g0_hat"] == pytest.approx(0.25)
        assert data["mu_hat"] == pytest.approx(0.25)
        assert data["estimate"] == pytest.approx(2 * 1 / (0.25 * 0.25))

    def test_ols(self, tmp_path, capsys):
        pf = write_path(tmp_path, [0, 1, 2, 2])
        code, out, _ = run_cli(capsys, "estimate", "--path", pf, "--mode", "ols",
                               "--mu", "1")
        assert code == 0
        data = json.loads(out)
        assert data["theta_hat"] == pytest.approx(0.6)
        assert data["estimate"] == pytest.approx(3.6)

    def test_missing_flags(self, tmp_path, capsys):
        pf = write_path(tmp_path, [0, 1])
        code, _, err = run_cli(capsys, "estimate", "--path", pf, "--mode", "efficient")
        assert code == 2

    def test_degenerate_semiparam(self, tmp_path, capsys):
        pf = write_path(tmp_path, [0, 1, 1, 0])
        code, _, err = run_cli(capsys, "estimate", "--path", pf, "--mode", "semiparam")
        assert code == 2
        assert "undefined" in err


class TestUtest:
    def test_efficient_flat_path(self, tmp_path, capsys):
        pf = write_path(tmp_path, [0, 1, 2, 3])
        code, out, _ = run_cli(capsys, "utest", "--path", pf, "--test", "efficient",
                               "--alpha", "0.05")
        assert code == 0
        data = json.loads(out)
        assert data["rejection_probability"] == 0.05

    def test_efficient_down_move(self, tmp_path, capsys):
        pf = write_path(tmp_path, [0, 2, 1])
        code, out, _ = run_cli(capsys, "utest", "--path", pf, "--test", "efficient",
                               "--alpha", "0.05")
        data = json.loads(out)
        assert data["rejection_probability"] == 1.0

    def test_df(self, tmp_path, capsys):
        pf = write_path(tmp_path, [0, 1, 2, 2])
        code, out, _ = run_cli(capsys, "utest", "--path", pf, "--test", "df",
                               "--alpha", "0.05", "--mu", "1", "--sigma2", "1")
        data = json.loads(out)
        assert data["statistic"] == pytest.approx((0.6 - 1.0) * math.sqrt(5.0), rel=1e-9)
        assert data["rejection_probability"] == 0.0

    def test_df_needs_moments(self, tmp_path, capsys):
        pf = write_path(tmp_path, [0, 1, 2])
        code, _, _ = run_cli(capsys, "utest", "--path", pf, "--test", "df",
                             "--alpha", "0.05")
        assert code == 2


class TestLimit:
    def test_lr_value(self, capsys):
        code, out, _ = run_cli(capsys, "limit", "--dist", "geometric:0.5", "--h", "2",
                               "--h0", "0", "--z", "0")
        assert code == 0
        assert float(out) == pytest.approx(math.exp(-0.5), rel=1e-10)

    def test_power(self, capsys):
        code, out, _ = run_cli(capsys, "limit", "--dist", "geometric:0.5",
                               "--power", "4,0.05")
        assert float(out) == pytest.approx(1 - 0.95 * math.exp(-1.0), rel=1e-10)

    def test_tv_needs_table(self, capsys):
        code, _, err = run_cli(capsys, "limit", "--dist", "geometric:0.5", "--tv", "1.0")
        assert code == 2

    def test_tv_value(self, capsys):
        code, out, _ = run_cli(capsys, "limit", "--dist", "table:9,1", "--tv", "0.1")
        assert code == 0
        assert float(out) == pytest.approx(0.009516258196404048, rel=1e-9)


class TestExperiment:
    def config_payload(self, max_tv):
        return {
            "dist": {"kind": "geometric", "p": 0.5},
            "h_grid": [2.0],
            "h0": 0.0,
            "n_grid": [60],
            "replications": 200,
            "alpha": 0.05,
            "master_seed": 99,
            "targets": ["down_move_law"],
            "thresholds": [
                {"experiment": "down_move_law", "metric": "estimate", "max": max_tv}
            ],
        }

    def test_run_and_outputs(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(self.config_payload(max_tv=0.9)))
        out_dir = tmp_path / "results"
        code, out, err = run_cli(capsys, "experiment", "--config", str(cfg),
                                 "--out", str(out_dir))
        assert code == 0
        assert (out_dir / "summary.csv").exists()
        assert (out_dir / "summary.json").exists()
        rows = json.loads((out_dir / "summary.json").read_text())
        assert rows[0]["experiment"] == "down_move_law"

    def test_threshold_breach_sets_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(self.config_payload(max_tv=1e-12)))
        code, _, err = run_cli(capsys, "experiment", "--config", str(cfg),
                               "--out", str(tmp_path / "results"))
        assert code == 1
        assert "THRESHOLD BREACH" in err

    def test_missing_config(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "experiment", "--config",
                               str(tmp_path / "nope.json"), "--out", str(tmp_path))
        assert code == 2


class TestRoundTrip:
    def test_simulate_estimate_utest_pipeline(self, tmp_path, capsys):
        pf = tmp_path / "p.txt"
        assert main(["simulate", "--dist", "geometric:0.5", "--local", "4,200",
                     "--seed", "17", "--out", str(pf)]) == 0
        code, out, _ = run_cli(capsys, "estimate", "--path", str(pf), "--mode",
                               "efficient", "--g0", "0.5", "--mu", "1")
        assert code == 0
        est = json.loads(out)["estimate"]
        code, out, _ = run_cli(capsys, "utest", "--path", str(pf), "--test",
                               "efficient", "--alpha", "0.05")
        assert code == 0
        rp = json.loads(out)["rejection_probability"]
        assert (rp == 1.0) == (est > 0)
