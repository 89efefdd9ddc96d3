import csv
import io
import json
import subprocess
import sys

import pytest

from quantdea.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestScore:
    def test_fdh_column(self, capsys):
        code, out, _ = run(capsys, "score", "--data", "paper-example", "--tech", "fdh", "--orientation", "out")
        assert code == 0
        assert [s["delta"] for s in json.loads(out)["scores"]] == [1, 0, 0, 0, 1, 0, 0]

    def test_tropical_efficient_firms(self, capsys):
        code, out, _ = run(capsys, "score", "--tech", "quant-crs:+inf", "--orientation", "out", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert rows[3]["delta"] == "0" and rows[6]["delta"] == "0"

    def test_missing_tech(self, capsys):
        code, _, err = run(capsys, "score", "--orientation", "out")
        assert code == 1
        assert "usage:" in err and "--tech" in err

    def test_bad_tech(self, capsys):
        assert run(capsys, "score", "--tech", "dea")[0] == 1

    def test_bad_orientation(self, capsys):
        assert run(capsys, "score", "--tech", "fdh", "--orientation", "sideways")[0] == 1

    def test_data_error(self, capsys, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("id,x,y\na,-1,2\n")
        code, _, err = run(capsys, "score", "--data", str(p), "--inputs", "1", "--outputs", "1", "--tech", "fdh")
        assert code == 2 and "negative" in err

    def test_missing_dims(self, capsys, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("id,x,y\na,1,2\n")
        assert run(capsys, "score", "--data", str(p), "--tech", "fdh")[0] == 2

    def test_numerical_failure(self, capsys):
        assert run(capsys, "score", "--tech", "quant-vrs:1000")[0] == 3

    def test_file_and_out(self, capsys, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("id,x1,y1\na,1,1\nb,2,3\n")
        dest = tmp_path / "r.csv"
        code, out, _ = run(capsys, "score", "--data", str(p), "--inputs", "1", "--outputs", "1", "--tech", "convex-vrs", "--format", "csv", "--out", str(dest))
        assert code == 0 and out == ""
        assert dest.read_text().startswith("firm,technology")

    def test_byte_identical(self, capsys):
        argv = ("score", "--tech", "quant-vrs:0.5", "--orientation", "in", "--format", "csv")
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]

    def test_round(self, capsys):
        _, out, _ = run(capsys, "score", "--tech", "convex-vrs", "--format", "csv", "--round", "4")
        assert ",0.7143," in out

    def test_discrete(self, capsys):
        code, out, _ = run(capsys, "score", "--tech", "convex-vrs:discrete", "--format", "csv")
        assert code == 0 and "lattice-projected" in out


class TestSweep:
    def test_convergence(self, capsys):
        code, out, _ = run(capsys, "sweep", "--alphas", "2,10,50", "--target", "+inf", "--returns", "crs")
        assert code == 0
        rows = json.loads(out)["rows"]
        by_firm = {}
        for r in rows:
            by_firm.setdefault(r["firm"], []).append(r["gap"])
        for gaps in by_firm.values():
            assert all(a >= b for a, b in zip(gaps, gaps[1:]))
            assert gaps[-1] <= 1e-3

    def test_negative_target_csv(self, capsys):
        code, out, _ = run(capsys, "sweep", "--alphas", "-2,-50", "--target", "-inf", "--format", "csv")
        assert code == 0
        assert out.splitlines()[0] == "firm,alpha,delta,limit,gap"

    def test_single_firm(self, capsys, tmp_path):
        p = tmp_path / "one.csv"
        p.write_text("id,x1,x2,y1\nonly,2,3,4\n")
        code, out, _ = run(capsys, "sweep", "--data", str(p), "--inputs", "2", "--outputs", "1", "--alphas", "1,5")
        assert code == 0
        assert all(r["delta"] == 0 for r in json.loads(out)["rows"])

    @pytest.mark.parametrize("alphas,target", [("2,-10", "+inf"), ("2", "+inf"), ("-1,-2", "+inf"), ("1,+inf", "+inf"), ("1,2", "zero")])
    def test_validation(self, capsys, alphas, target):
        assert run(capsys, "sweep", "--alphas", alphas, "--target", target)[0] == 1

    def test_alphas_required(self, capsys):
        assert run(capsys, "sweep")[0] == 1


class TestOtherCommands:
    def test_hulls(self, capsys):
        code, out, _ = run(capsys, "hulls", "--alphas", "1,10,50", "--samples", "200")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        gaps = [float(r["gap"]) for r in rows]
        assert [r["alpha"] for r in rows] == ["1", "10", "50"]
        assert gaps == sorted(gaps, reverse=True)

    def test_hulls_points_file(self, capsys, tmp_path):
        p = tmp_path / "pts.csv"
        p.write_text("u,v\n0,1\n1,0\n2,2\n")
        code, out, _ = run(capsys, "hulls", "--points", str(p), "--alphas", "-1,-5", "--target", "-inf", "--format", "json")
        assert code == 0 and len(json.loads(out)["gaps"]) == 2

    def test_hulls_bad_points(self, capsys, tmp_path):
        p = tmp_path / "pts.csv"
        p.write_text("0,1\n1\n")
        assert run(capsys, "hulls", "--points", str(p))[0] == 2

    def test_duality(self, capsys):
        code, out, _ = run(capsys, "duality", "--tech", "quant-vrs:1", "--orientation", "in", "--firm", "2", "--trials", "30")
        assert code == 0
        (rep,) = json.loads(out)
        assert rep["firm"] == "2" and rep["weak_violations"] == 0
        assert rep["strong_gap"] <= 1e-6
        assert len(rep["witness_prices"]) == 2

    def test_duality_needs_finite_alpha(self, capsys):
        assert run(capsys, "duality", "--tech", "quant-vrs:+inf")[0] == 1

    def test_duality_unknown_firm(self, capsys):
        assert run(capsys, "duality", "--tech", "quant-vrs:1", "--firm", "zz", "--trials", "2")[0] == 1

    def test_reproduce(self, capsys):
        code, out, _ = run(capsys, "reproduce", "--format", "csv")
        assert code == 0
        bad = [(r["column"], r["firm"]) for r in csv.DictReader(io.StringIO(out)) if r["status"] == "MISMATCH"]
        assert ("maxplus-crs-out", "3") in bad and ("maxplus-crs-out", "6") in bad
        assert ("minplus-crs-out", "2") in bad

    def test_reproduce_text(self, capsys):
        code, out, _ = run(capsys, "reproduce", "--text")
        assert code == 0 and "MISMATCH" in out and "UNMAPPED" in out

    def test_oracle_verify(self, capsys, tmp_path):
        dest = tmp_path / "o.json"
        code, _, err = run(capsys, "oracle-verify", "--seed", "1", "--out", str(dest))
        assert code == 0
        assert json.loads(dest.read_text())["passed"] is True
        assert "checks passed" in err

    def test_oracle_verify_failure_code(self, capsys, monkeypatch):
        from quantdea import distance

        real = distance.distance_fdh

        def broken(ds, k, o):
            rec = real(ds, k, o)
            rec.delta += 1.0
            return rec

        monkeypatch.setattr(distance, "distance_fdh", broken)
        assert run(capsys, "oracle-verify")[0] == 4

    def test_no_command(self, capsys):
        assert run(capsys)[0] == 1

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "quantdea", "score", "--tech", "fdh", "--format", "csv"], capture_output=True, text=True)
        assert res.returncode == 0
        assert res.stdout.splitlines()[1].startswith("1,fdh,out,1,")
