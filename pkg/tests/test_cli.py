import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ancred.cli import EXIT_DOMAIN, EXIT_NOT_SIGNIFICANT, EXIT_USAGE, main
from ancred.credibility import intrinsic_p

HAYWARD = ["--events", "102", "--n1", "288", "--events0", "75", "--n2", "277"]


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv, "--json")
    assert code == 0, err
    env = json.loads(out)
    assert env["schema_version"] == "1"
    return env


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


class TestAnalyse:
    def test_running_example(self):
        env = run_json("analyse", *HAYWARD, "--exp")
        res = env["results"]
        assert env["command"] == "analyse"
        assert env["inputs"]["study"]["form"] == "table"
        assert res["p"] == pytest.approx(0.034, abs=0.001)
        assert res["p_intrinsic"] == pytest.approx(0.13, abs=0.005)
        assert res["sceptical_limit"] == pytest.approx(0.605, abs=0.005)
        assert res["exp"]["sceptical_limit"] == pytest.approx(1.83, abs=0.01)
        assert res["tau"] == pytest.approx(0.31, abs=0.005)
        assert res["credibility_ratio"] == pytest.approx(25.59, abs=0.01)
        assert res["ratio_credible"] is False
        assert res["intrinsically_credible"] is False
        assert res["tau2_le_sigma2"] is False

    def test_human_output(self):
        code, out, _ = run("analyse", *HAYWARD)
        assert code == 0
        assert "0.134" in out and "25.59" in out

    def test_p_one(self):
        res = run_json("analyse", "--p", "1.0")["results"]
        assert res["p_intrinsic"] == 1.0
        assert res["sceptical_limit"] is None
        assert "sceptical_prior" in res["reasons"]

    def test_p_only_significant(self):
        res = run_json("analyse", "--p", "0.001")["results"]
        assert res["p_intrinsic"] == pytest.approx(intrinsic_p(0.001))
        assert res["intrinsically_credible"] is True
        assert res["ratio_credible"] is True
        assert res["tau"] is None

    def test_boundary_interval(self):
        res = run_json("analyse", "--ci", "1.0,5.828427", "--level", "0.95", "--scale", "additive")["results"]
        assert res["credibility_ratio"] == pytest.approx(5.828427, abs=1e-9)
        assert res["ratio_credible"] is True

    def test_ratio_scale_matches_prelogged(self):
        a = run_json("analyse", "--ci", "1.02,1.68")["results"]
        b = run_json("analyse", "--ci", f"{math.log(1.02)!r},{math.log(1.68)!r}", "--scale", "additive")["results"]
        assert a == b

    def test_negative_ci(self):
        res = run_json("analyse", "--ci=-0.51678,-0.02009", "--scale", "additive")["results"]
        assert res["sceptical_limit"] == pytest.approx(0.605296306847026, abs=1e-9)

    def test_conflicting_inputs(self):
        code, _, err = run("analyse", "--p", "0.03", *HAYWARD)
        assert code == EXIT_USAGE
        assert "exactly one" in err

    def test_missing_input(self):
        assert run("analyse")[0] == EXIT_USAGE

    def test_incomplete_table(self):
        assert run("analyse", "--events", "3", "--n1", "10")[0] == EXIT_USAGE

    def test_degenerate_table_names_cell(self):
        code, _, err = run("analyse", "--events", "0", "--n1", "10", "--events0", "3", "--n2", "10")
        assert code == EXIT_DOMAIN
        assert "events in treatment group" in err

    def test_bad_level(self):
        assert run("analyse", "--p", "0.01", "--level", "1.5")[0] == EXIT_DOMAIN

    def test_ratio_scale_rejects_nonpositive(self):
        assert run("analyse", "--ci=-1,2")[0] == EXIT_DOMAIN


class TestExtrinsic:
    def test_running_example(self):
        res = run_json("extrinsic", *HAYWARD, "--ext-ci", "1.31,2.02")["results"]
        assert res["p_extrinsic"] == pytest.approx(0.062, abs=0.002)
        assert res["t_box"] == pytest.approx(1.49, abs=0.01)
        assert res["p_box"] == pytest.approx(0.14, abs=0.005)
        assert res["matthews_credible"] is False
        assert res["c"] == pytest.approx(1.3154, abs=1e-4)
        assert res["compatibility"]["statistic"] == pytest.approx(1.2969, abs=1e-4)

    def test_identical_studies(self):
        args = ["--estimate", "0.8", "--se", "0.3", "--ext-estimate", "0.8", "--ext-se", "0.3"]
        res = run_json("extrinsic", *args)["results"]
        assert res["c"] == 1.0
        assert res["p_extrinsic"] == pytest.approx(res["p_intrinsic"], abs=1e-9)

    def test_null_external(self):
        args = ["--estimate", "0.8", "--se", "0.3", "--ext-estimate", "0", "--ext-se", "0.3"]
        res = run_json("extrinsic", *args)["results"]
        assert res["p_box"] == 1.0
        assert res["p_extrinsic"] is None
        assert res["reasons"]["p_extrinsic"] == "no solution below 1"

    def test_not_significant_internal(self):
        args = ["--estimate", "0.3", "--se", "0.3", "--ext-estimate", "1.0", "--ext-se", "0.2"]
        res = run_json("extrinsic", *args)["results"]
        assert res["p_box"] is None and res["matthews_credible"] is None
        assert res["p_extrinsic"] > res["p"]

    def test_needs_external(self):
        assert run("extrinsic", *HAYWARD)[0] == EXIT_USAGE

    def test_rejects_p_only(self):
        assert run("extrinsic", "--p", "0.01", "--ext-ci", "1.3,2.0")[0] == EXIT_USAGE


class TestPrior:
    def test_running_example(self):
        res = run_json("prior", *HAYWARD, "--exp")["results"]
        assert res["sceptical_limit"] == pytest.approx(0.6036, abs=1e-4)
        assert res["sceptical_limit"] == pytest.approx(res["sceptical_limit_from_ci"], abs=1e-10)
        lo, hi = res["exp"]["critical_prior_interval"]
        assert lo == pytest.approx(0.55, abs=0.005)
        assert hi == pytest.approx(1.83, abs=0.005)

    def test_not_significant(self):
        code, _, err = run("prior", "--ci", "0.9,1.2")
        assert code == EXIT_NOT_SIGNIFICANT
        assert "not significant" in err


class TestSimulate:
    def test_deterministic(self, tmp_path):
        outs = []
        for name in ("a.csv", "b.csv"):
            path = tmp_path / name
            code, out, _ = run("simulate", "--c", "1", "--n", "20000", "--seed", "42", "--csv", str(path), "--json")
            assert code == 0
            outs.append((out, path.read_bytes()))
        assert outs[0] == outs[1]

    def test_csv_stdout_deterministic(self):
        a = run("simulate", "--n", "5000", "--seed", "3")[1]
        b = run("simulate", "--n", "5000", "--seed", "3")[1]
        assert a == b
        header, rows = read_csv(a)
        assert header == ["bin_lower", "bin_upper", "count", "density"]
        assert sum(r[2] for r in rows) == 5000

    def test_seed_env_override(self, monkeypatch):
        monkeypatch.setenv("ANCRED_SEED", "99")
        a = run_json("simulate", "--n", "1000")
        b = run_json("simulate", "--n", "1000", "--seed", "99")
        assert a["results"] == b["results"]
        assert a["inputs"]["seed"] == 99

    def test_small_c_beta21(self):
        res = run_json("simulate", "--c", "0.000001", "--n", "50000", "--seed", "8")["results"]
        counts = np.array(res["histogram"]["counts"])
        assert counts[:20].sum() / 50000 == pytest.approx(0.25, abs=0.01)

    def test_tail_bound(self):
        res = run_json("simulate", "--c", "1", "--n", "50000", "--seed", "42")["results"]
        assert res["tail_probabilities"]["0.05"] <= 0.0025 + 3 * math.sqrt(0.0025 / 50000)

    def test_negative_c(self):
        assert run("simulate", "--c", "-1")[0] == EXIT_DOMAIN

    def test_json_round_trip(self):
        env = run_json("simulate", "--n", "2000", "--seed", "1")
        assert json.loads(json.dumps(env)) == env


class TestFigureData:
    def test_thresholds(self):
        header, rows = read_csv(run("figure-data", "thresholds")[1])
        assert header == ["alpha", "alpha_i", "matthews_alpha_i"]
        row = next(r for r in rows if r[0] == 0.05)
        assert row[1] == pytest.approx(0.0056, abs=0.0001)
        assert row[2] == pytest.approx(0.0127, abs=0.0002)
        assert max(r[0] for r in rows) == pytest.approx(0.1)

    def test_calibration(self):
        _, rows = read_csv(run("figure-data", "calibration")[1])
        row = next(r for r in rows if r[0] == 0.034)
        assert row[1] == pytest.approx(0.134, abs=0.001)

    def test_null_density_integrates(self):
        _, rows = read_csv(run("figure-data", "null-density")[1])
        x, f_p, f_pi = np.array(rows).T
        assert np.trapezoid(f_pi, x) == pytest.approx(1.0, abs=0.01)
        assert np.trapezoid(f_p, x) == pytest.approx(1.0, abs=0.01)

    def test_null_histograms(self):
        header, rows = read_csv(run("figure-data", "null-histograms", "--n", "5000", "--c", "0.5,2")[1])
        assert header[:5] == ["c", "bin_lower", "bin_upper", "count", "density"]
        rows = np.array(rows)
        assert set(rows[:, 0]) == {0.5, 2.0}
        for c in (0.5, 2.0):
            assert rows[rows[:, 0] == c, 3].sum() == 5000
        np.testing.assert_allclose(rows[:, 6], 2 * rows[:, 5])

    def test_pe_contours(self, tmp_path):
        path = tmp_path / "pe.csv"
        code, out, _ = run("figure-data", "pe-contours", "--c", "1", "--points", "5", "--output", str(path))
        assert code == 0 and out == ""
        header, rows = read_csv(path.read_text())
        assert header == ["c", "p", "p0", "p_e"]
        assert len(rows) == 25
        assert all(r[3] > max(r[1], r[2]) for r in rows)

    def test_json(self):
        env = run_json("figure-data", "thresholds", "--points", "10")
        assert env["results"]["columns"] == ["alpha", "alpha_i", "matthews_alpha_i"]
        assert len(env["results"]["rows"]) == 10

    def test_unknown_figure(self):
        assert run("figure-data", "scatter")[0] == EXIT_USAGE


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ancred", "analyse", "--p", "0.034", "--json"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["results"]["p_intrinsic"] == pytest.approx(0.1338, abs=1e-4)
