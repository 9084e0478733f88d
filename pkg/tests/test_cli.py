import json
import os

import pytest

from kurihara.cli import main

CURVES = os.path.join(os.path.dirname(__file__), "..", "curves")


def curve_path(name):
    return os.path.join(CURVES, f"{name}.json")


class TestExitCodes:
    def test_search_11a1_ok(self, capsys):
        code = main(
            ["search", "--curve", curve_path("11a1"), "--p", "7",
             "--prime-bound", "300", "--nu-max", "2", "--format", "json"]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["selmer_dim"] == 0
        assert out["parity"] == "pass"

    def test_check_tamagawa_failure_exits_65(self, capsys):
        code = main(["check", "--curve", curve_path("11a1"), "--p", "5"])
        assert code == 65

    def test_search_hypothesis_failure_exits_65(self):
        code = main(
            ["search", "--curve", curve_path("11a1"), "--p", "5"]
        )
        assert code == 65

    def test_search_exhausted_exits_2(self, capsys):
        code = main(
            ["search", "--curve", curve_path("37a1"), "--p", "5",
             "--prime-bound", "300", "--nu-max", "0"]
        )
        assert code == 2

    def test_selftest_exits_0(self, capsys):
        code = main(["selftest", "--coset-dim", "3"])
        assert code == 0

    def test_usage_error_exits_64(self, capsys):
        code = main(["check", "--curve", "/does/not/exist.json", "--p", "7"])
        assert code == 64


class TestSubcommands:
    def test_sieve_output(self, capsys):
        code = main(
            ["sieve", "--curve", curve_path("37a1"), "--p", "5",
             "--bound", "300", "--format", "json"]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert [row["ell"] for row in out] == [61, 211, 281]

    def test_delta_route_agreement(self, capsys):
        code = main(
            ["delta", "--curve", curve_path("37a1"), "--p", "5",
             "--d", "61", "--bound", "300", "--format", "json"]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["delta"] == 4
        assert out["routes_agree"]

    def test_theta_dump(self, capsys):
        code = main(
            ["theta", "--curve", curve_path("11a1"), "--p", "7",
             "--d", "3", "--kind", "theta", "--format", "json"]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["group"] == [2]

    def test_report_round_trip(self, tmp_path, capsys):
        code = main(
            ["search", "--curve", curve_path("37a1"), "--p", "5",
             "--prime-bound", "300", "--nu-max", "2", "--format", "json"]
        )
        assert code == 0
        report = capsys.readouterr().out
        path = tmp_path / "rep.json"
        path.write_text(report)
        assert main(["report", str(path)]) == 0


class TestCaching:
    def test_eigensymbol_cache_round_trip(self, tmp_path, capsys):
        cache_dir = str(tmp_path / "cache")
        args = ["delta", "--curve", curve_path("11a1"), "--p", "7",
                "--d", "1", "--bound", "300", "--cache-dir", cache_dir,
                "--format", "json"]
        assert main(args) == 0
        first = capsys.readouterr().out
        files = os.listdir(cache_dir)
        assert len(files) == 1
        before = open(os.path.join(cache_dir, files[0])).read()
        # second run consumes the cache and reproduces the output exactly
        assert main(args) == 0
        second = capsys.readouterr().out
        assert first == second
        after = open(os.path.join(cache_dir, files[0])).read()
        assert before == after

    def test_same_seed_byte_identical(self, capsys):
        args = ["search", "--curve", curve_path("37a1"), "--p", "5",
                "--prime-bound", "300", "--nu-max", "2", "--seed", "11",
                "--format", "json"]
        assert main(args) == 0
        a = capsys.readouterr().out
        assert main(args) == 0
        b = capsys.readouterr().out
        assert a == b


class TestFlags:
    def test_workers_same_result(self, capsys):
        base = ["search", "--curve", curve_path("37a1"), "--p", "5",
                "--prime-bound", "300", "--nu-max", "2", "--format", "json"]
        assert main(base) == 0
        seq = capsys.readouterr().out
        assert main(base + ["--workers", "2"]) == 0
        par = capsys.readouterr().out
        assert seq == par

    def test_assert_surjective_flag(self, capsys):
        args = ["check", "--curve", curve_path("37a1"), "--p", "13",
                "--format", "json"]
        assert main(args) == 0
        base = json.loads(capsys.readouterr().out)
        assert main(args + ["--assert-surjective"]) == 0
        asserted = json.loads(capsys.readouterr().out)
        assert base["surjectivity"] == "heuristically-confirmed"
        assert asserted["surjectivity"] == "asserted"

    def test_no_assume_optimal_skips_calibration(self, capsys):
        args = ["theta", "--curve", curve_path("11a1"), "--p", "7", "--d", "1",
                "--kind", "theta", "--no-assume-optimal", "--format", "json"]
        assert main(args) == 0
        out = json.loads(capsys.readouterr().out)
        # uncalibrated: the raw integral functional value, not 1/5
        assert out["coeffs"][0][1] != "1/5"

    def test_search_result_cached(self, tmp_path, capsys):
        cache_dir = str(tmp_path / "c")
        args = ["search", "--curve", curve_path("11a1"), "--p", "7",
                "--prime-bound", "200", "--nu-max", "1",
                "--cache-dir", cache_dir, "--format", "json"]
        assert main(args) == 0
        first = capsys.readouterr().out
        kinds = len(os.listdir(cache_dir))
        assert kinds == 2  # eigensymbol + search report
        assert main(args) == 0
        assert capsys.readouterr().out == first

    def test_selftest_with_identity_suite(self, capsys):
        code = main(["selftest", "--coset-dim", "3", "--curve",
                     curve_path("11a1"), "--p", "7", "--grid", "20",
                     "--format", "json"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        names = [s["name"] for s in out["suites"]]
        assert names == ["coset_verifier", "identity_suite"]
        assert all(s["failures"] == 0 for s in out["suites"])
