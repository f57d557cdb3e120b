import json
import math
import subprocess
import sys

import pytest

LOG2 = math.log(2.0)


def rmp(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "rmp", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


@pytest.fixture
def dists(tmp_path):
    files = {
        "cauchy": {"family": "CauchyRankOne"},
        "const111": {"family": "ConstantTriple", "value": [1, 1, 1]},
        "binary": {"family": "BinaryHill", "alpha": 2, "beta": 3, "p": 0.5},
        "uniform11": {"family": "UniformRankOne", "a": 1, "b": 1},
        "atoms": {
            "family": "DiscreteAtoms",
            "atoms": [[[1, 0.5, 1], 0.5], [[2, 1, -1], 0.5]],
        },
        "cancelling": {
            "family": "DiscreteAtoms",
            "atoms": [[[2, 5, 1], 0.5], [[1, -2, 3], 0.5]],
        },
        "bad": None,  # malformed on purpose
    }
    paths = {}
    for name, doc in files.items():
        p = tmp_path / f"{name}.json"
        p.write_text('{"family": ' if doc is None else json.dumps(doc))
        paths[name] = str(p)
    return paths


class TestEstimate:
    def test_constant_exact_values(self, dists):
        out = rmp("estimate", "--dist", dists["const111"], "--samples", "1024")
        assert out.returncode == 0
        doc = json.loads(out.stdout)
        assert doc["lambda"]["value"] == LOG2
        assert doc["sigma2"]["value"] == 0.0
        assert doc["lambda"]["seed"] == 0
        assert doc["lambda"]["n_samples"] == 1024

    def test_cauchy_mc(self, dists):
        out = rmp(
            "estimate", "--dist", dists["cauchy"], "--samples", "100000", "--seed", "7"
        )
        assert out.returncode == 0
        doc = json.loads(out.stdout)
        err = abs(doc["lambda"]["value"] - LOG2)
        assert err <= 4.0 * doc["lambda"]["std_error"]
        assert doc["lambda"]["seed"] == 7

    def test_exact_binary(self, dists):
        out = rmp("estimate", "--dist", dists["binary"], "--exact")
        assert out.returncode == 0
        doc = json.loads(out.stdout)
        assert doc["lambda"]["value"] == pytest.approx(0.9679448868067951, abs=1e-12)
        assert doc["sigma2"]["value"] == pytest.approx(0.02627715669180386, abs=1e-12)
        assert "std_error" not in doc["lambda"]

    def test_minus_inf_serialized_as_string(self, dists):
        out = rmp("estimate", "--dist", dists["cancelling"], "--exact")
        assert out.returncode == 0
        doc = json.loads(out.stdout)
        assert doc["lambda"]["value"] == "-inf"
        assert doc["sigma2"]["value"] == "nan"

    def test_exact_on_continuous_fails(self, dists):
        out = rmp("estimate", "--dist", dists["cauchy"], "--exact")
        assert out.returncode == 1
        assert "not discrete" in out.stderr

    def test_missing_file(self, tmp_path):
        out = rmp("estimate", "--dist", str(tmp_path / "nope.json"))
        assert out.returncode == 1
        assert out.stderr.startswith("error:")

    def test_malformed_config(self, dists):
        out = rmp("estimate", "--dist", dists["bad"])
        assert out.returncode == 1
        assert "malformed JSON" in out.stderr

    def test_out_file_and_clean_stdout(self, dists, tmp_path):
        path = tmp_path / "result.json"
        out = rmp(
            "estimate", "--dist", dists["const111"], "--samples", "64",
            "--out", str(path),
        )
        assert out.returncode == 0
        assert out.stdout == ""
        doc = json.loads(path.read_text())
        assert doc["lambda"]["value"] == LOG2


class TestClt:
    def test_constant_exact_source(self, dists):
        out = rmp(
            "clt", "--dist", dists["const111"], "--n", "100", "--chains", "50",
            "--source", "exact",
        )
        assert out.returncode == 0
        doc = json.loads(out.stdout)
        assert doc["sigma2_used"] == 0.0
        assert doc["empirical_var"] <= 1e-24
        assert doc["ks_distance"] is None
        assert sum(c for _, _, c in doc["histogram"]) == 50

    def test_uniform_closed_form(self, dists, tmp_path):
        hist = tmp_path / "hist.csv"
        out = rmp(
            "clt", "--dist", dists["uniform11"], "--n", "2000", "--chains", "400",
            "--source", "closed-form", "--seed", "3", "--hist-out", str(hist),
        )
        assert out.returncode == 0
        doc = json.loads(out.stdout)
        assert doc["sigma2_used"] == 1.25
        assert abs(doc["empirical_var"] - 1.25) <= 0.125
        assert doc["ks_distance"] <= 1.9495 / math.sqrt(400)
        text = hist.read_bytes().decode()
        lines = text.split("\n")
        assert lines[0] == "bin_left,bin_right,count"
        assert len(lines) == 42  # header + 40 bins + trailing newline
        assert "\r" not in text
        left = lines[1].split(",")[0]
        assert float(left) == doc["histogram"][0][0]
        assert len(left.replace("-", "").replace(".", "").lstrip("0")) >= 16

    def test_closed_form_unavailable_exit_2(self, dists):
        out = rmp(
            "clt", "--dist", dists["atoms"], "--n", "100", "--chains", "50",
            "--source", "closed-form",
        )
        assert out.returncode == 2
        assert "no closed form" in out.stderr

    def test_exact_source_on_continuous_exit_1(self, dists):
        out = rmp(
            "clt", "--dist", dists["cauchy"], "--n", "100", "--chains", "50",
            "--source", "exact",
        )
        assert out.returncode == 1

    def test_mc_source(self, dists):
        out = rmp(
            "clt", "--dist", dists["cauchy"], "--n", "500", "--chains", "100",
            "--source", "mc", "--samples", "50000", "--seed", "11",
        )
        assert out.returncode == 0
        doc = json.loads(out.stdout)
        assert "source_estimates" in doc
        assert doc["source_estimates"]["lambda"]["seed"] == 12  # decoupled stream
        assert abs(doc["lambda_used"] - LOG2) < 0.05

    def test_degenerate_lambda_exit_1(self, dists):
        out = rmp(
            "clt", "--dist", dists["cancelling"], "--n", "100", "--chains", "50",
            "--source", "exact",
        )
        assert out.returncode == 1
        assert "-inf" in out.stderr


class TestDegeneracy:
    def test_constant_true(self, dists):
        out = rmp("degeneracy", "--dist", dists["const111"])
        assert out.returncode == 0
        doc = json.loads(out.stdout)
        assert doc["is_degenerate_candidate"] is True
        assert doc["sigma2"] == 0.0

    def test_binary_false(self, dists):
        out = rmp("degeneracy", "--dist", dists["binary"])
        assert out.returncode == 0
        doc = json.loads(out.stdout)
        assert doc["is_degenerate_candidate"] is False
        assert doc["sigma2"] > 0.0

    def test_continuous_exit_1(self, dists):
        out = rmp("degeneracy", "--dist", dists["cauchy"])
        assert out.returncode == 1
        assert "requires finite support" in out.stderr


class TestDeterminism:
    def test_estimate_byte_identical_across_threads(self, dists):
        cmd = ["estimate", "--dist", dists["cauchy"], "--samples", "20000", "--seed", "9"]
        a = rmp(*cmd, "--threads", "1")
        b = rmp(*cmd, "--threads", "8")
        c = rmp(*cmd, "--threads", "1")
        assert a.stdout == b.stdout == c.stdout
        assert a.returncode == 0

    def test_clt_byte_identical_across_threads(self, dists):
        cmd = [
            "clt", "--dist", dists["uniform11"], "--n", "300", "--chains", "150",
            "--source", "closed-form", "--seed", "4",
        ]
        a = rmp(*cmd, "--threads", "1")
        b = rmp(*cmd, "--threads", "6")
        assert a.stdout == b.stdout
        assert a.returncode == 0
