import json
import subprocess
import sys
from pathlib import Path

import pytest

from boxcrit.cli import main
from boxcrit.dataio import load_detections, read_curves

FIXTURES = Path(__file__).parent / "fixtures"
GT = str(FIXTURES / "gt.json")
METHOD = str(FIXTURES / "dets_method.json")
BASELINE = str(FIXTURES / "dets_baseline.json")


def run(*argv):
    return main([str(a) for a in argv])


def evaluate_to(tmp_path, name, *extra, dets=METHOD):
    out = tmp_path / name
    assert run("evaluate", "--gt", GT, "--dets", dets, "--out", out, *extra) == 0
    return out


def write_report_json(path, map_value, class_ap):
    data = {
        "criterion": {"kind": "iou"}, "ap_style": "auc", "thresholds": [0.5], "map": map_value,
        "map_per_threshold": [map_value], "ar": 0.0, "size_map": {},
        "classes": [{"class_id": 1, "n_gt": 1, "n_det": 1, "ap": [class_ap], "tp": [1], "fp": [0], "fn": [0]}],
    }
    path.write_text(json.dumps(data))
    return path


class TestUsage:
    @pytest.mark.parametrize("command", ["evaluate", "analyze", "nms", "compare"])
    def test_help(self, command, capsys):
        assert run(command, "--help") == 0
        assert "usage: boxcrit " + command in capsys.readouterr().out

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "boxcrit", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0 and "evaluate" in proc.stdout

    def test_unknown_flag(self):
        assert run("evaluate", "--gt", GT, "--dets", METHOD, "--bogus") == 2

    def test_no_command(self):
        assert run() == 2

    def test_bad_criterion_parameter(self):
        assert run("evaluate", "--gt", GT, "--dets", METHOD, "--criterion", "siou", "--gamma", "2") == 2

    def test_zero_samples(self, tmp_path):
        assert run("analyze", "--samples", "0", "--out", tmp_path / "c.csv") == 2

    def test_theory_needs_supported_setup(self, tmp_path):
        assert run("analyze", "--criterion", "nwd", "--theory", "--out", tmp_path / "c.csv") == 2

    def test_nms_threshold_range(self, tmp_path):
        assert run("nms", "--dets", METHOD, "--threshold", "1.2", "--out", tmp_path / "o.json") == 2


class TestParseErrors:
    def test_missing_file(self, tmp_path):
        assert run("evaluate", "--gt", tmp_path / "nope.json", "--dets", METHOD) == 3

    def test_malformed(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("[1, 2")
        assert run("evaluate", "--gt", GT, "--dets", bad) == 3

    def test_bad_report(self, tmp_path):
        bad = tmp_path / "r.json"
        bad.write_text("{}")
        assert run("compare", "--method", bad, "--baseline", bad) == 3


class TestEvaluate:
    def test_stdout_and_report(self, tmp_path, capsys):
        out = evaluate_to(tmp_path, "r.json", "--thresholds", "0.5:0.95", "--size-breakdown")
        text = capsys.readouterr().out
        assert "mAP@0.50:0.95" in text and "mAP[small]" in text
        data = json.loads(out.read_text())
        assert len(data["thresholds"]) == 10
        assert set(data["size_map"]) == {"all", "small", "medium", "large"}

    def test_siou_gamma_zero_matches_iou(self, tmp_path):
        a = json.loads(evaluate_to(tmp_path, "a.json", "--thresholds", "0.5:0.95").read_text())
        b = json.loads(evaluate_to(tmp_path, "b.json", "--thresholds", "0.5:0.95",
                                   "--criterion", "siou", "--gamma", "0").read_text())
        for key in ("map", "map_per_threshold", "ar", "classes"):
            assert a[key] == b[key]

    def test_csv(self, tmp_path):
        out = evaluate_to(tmp_path, "r.csv", "--format", "csv")
        assert out.read_text().splitlines()[0] == "class_id,bucket,threshold,ap,tp,fp,fn"

    def test_threads_byte_identical(self, tmp_path):
        a = evaluate_to(tmp_path, "a.json", "--thresholds", "0.5:0.95", "--threads", "1")
        b = evaluate_to(tmp_path, "b.json", "--thresholds", "0.5:0.95", "--threads", "4")
        assert a.read_bytes() == b.read_bytes()

    def test_eleven_point(self, tmp_path):
        data = json.loads(evaluate_to(tmp_path, "r.json", "--ap-style", "11pt").read_text())
        assert data["ap_style"] == "11pt"


class TestAnalyze:
    def test_theory_columns(self, tmp_path, capsys):
        out = tmp_path / "c.csv"
        assert run("analyze", "--criterion", "giou", "--omegas", "16,64", "--samples", "20000",
                   "--theory", "--out", out, "--threads", "2") == 0
        rows = read_curves(out)
        assert len(rows) == 2
        for r in rows:
            assert abs(float(r["z_score"])) < 4
        assert "2 worker(s)" in capsys.readouterr().out

    def test_affine_inaccuracy(self, tmp_path):
        out = tmp_path / "c.csv"
        assert run("analyze", "--lambda", "0.25", "--omegas", "256,1024,4096", "--samples", "20000",
                   "--theory", "--out", out) == 0
        means = [float(r["mean"]) for r in read_curves(out)]
        assert max(means) < 0.85

    def test_pdf_grid(self, tmp_path):
        out, pdf = tmp_path / "c.csv", tmp_path / "p.csv"
        assert run("analyze", "--omegas", "32", "--samples", "5000", "--out", out, "--pdf-out", pdf) == 0
        assert pdf.read_text().splitlines()[0] == "criterion,omega,z,density"

    def test_seeded_reproducible(self, tmp_path):
        args = ("analyze", "--criterion", "siou", "--omegas", "8,32", "--samples", "5000", "--seed", "9", "--threads", "3")
        run(*args, "--out", tmp_path / "a.csv")
        run(*args, "--out", tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestNMS:
    def test_disjoint_unchanged(self, tmp_path):
        dets = [{"image_id": 0, "category_id": 1, "bbox": [100 * i, 0, 10, 10], "score": 0.9 - 0.1 * i} for i in range(4)]
        src = tmp_path / "d.json"
        src.write_text(json.dumps(dets))
        out = tmp_path / "o.json"
        assert run("nms", "--dets", src, "--threshold", "0.99", "--out", out) == 0
        assert load_detections(out) == load_detections(src)

    def test_fixture_shrinks(self, tmp_path, capsys):
        out = tmp_path / "o.json"
        assert run("nms", "--dets", METHOD, "--threshold", "0.5", "--criterion", "gsiou", "--out", out) == 0
        assert len(load_detections(out)) <= len(load_detections(METHOD))
        assert capsys.readouterr().out.startswith("kept ")


class TestCompare:
    def test_equal_reports(self, tmp_path, capsys):
        r = evaluate_to(tmp_path, "r.json")
        assert run("compare", "--method", r, "--baseline", r) == 0
        assert "overall" in capsys.readouterr().out.splitlines()[-1]

    def test_rmap_value(self, tmp_path, capsys):
        m = write_report_json(tmp_path / "m.json", 0.3529, 0.3529)
        b = write_report_json(tmp_path / "b.json", 0.6969, 0.6969)
        assert run("compare", "--method", m, "--baseline", b) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[-1].split()[-1] == "-49.36%"

    def test_zero_baseline(self, tmp_path, capsys):
        m = write_report_json(tmp_path / "m.json", 0.3, 0.3)
        b = write_report_json(tmp_path / "b.json", 0.0, 0.0)
        assert run("compare", "--method", m, "--baseline", b) == 0
        assert capsys.readouterr().out.splitlines()[-1].endswith("n/a")

    def test_fixture_pipeline(self, tmp_path, capsys):
        m = evaluate_to(tmp_path, "m.json")
        b = evaluate_to(tmp_path, "b.json", dets=BASELINE)
        capsys.readouterr()
        assert run("compare", "--method", m, "--baseline", b) == 0
        assert "%" in capsys.readouterr().out
