"""Command-line driver tests: artifacts, determinism, exit codes."""

import json
import math
import re

import jsonschema
import numpy as np
import pytest

from shaperec.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_OK,
    EXIT_UNSTABLE,
    RECONSTRUCT_SCHEMA,
    STABILITY_SCHEMA,
    RunConfig,
    cmd_reconstruct,
    main,
)
from shaperec.geometry import HalfPlane, Point, line_segment_in_box

SEG_RE = re.compile(r'<line x1="([^"]+)" y1="([^"]+)" x2="([^"]+)" y2="([^"]+)"/>')


def run_ok(args):
    assert main(args) == EXIT_OK


def data_rows(text):
    """Non-comment CSV lines after the header row, split into fields."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return [ln.split(",") for ln in lines[1:]]


class TestConfigValidation:
    def test_non_dyadic_grid_rejected(self, tmp_path, capsys):
        rc = main(["convergence", "--L", "12", "--out", str(tmp_path / "x.csv")])
        assert rc == EXIT_CONFIG
        assert "powers of two" in capsys.readouterr().err

    def test_unknown_method_rejected(self, tmp_path):
        args = ["convergence", "--L", "8", "--methods", "pc,bogus"]
        assert main(args + ["--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG

    def test_q_below_one_rejected(self, tmp_path):
        args = ["convergence", "--L", "8", "--q", "0.5", "--out", str(tmp_path / "x.csv")]
        assert main(args) == EXIT_CONFIG

    def test_pbdw_shape_constraints(self, tmp_path):
        args = ["pbdw", "--D", "5", "--m", "10", "--out", str(tmp_path / "x.csv")]
        assert main(args) == EXIT_CONFIG

    def test_unknown_subcommand_exits_via_argparse(self):
        with pytest.raises(SystemExit) as exc:
            main(["bogus"])
        assert exc.value.code == 2

    def test_io_error_exit_code(self):
        args = ["stability", "--samples", "0", "--out", "/nonexistent-dir/x.json"]
        assert main(args) == EXIT_IO


class TestConvergence:
    def run_small(self, path, seed=0, eps=0.0):
        run_ok(
            [
                "convergence",
                "--L",
                "8,16",
                "--methods",
                "pc,licc",
                "--noise-eps",
                str(eps),
                "--seed",
                str(seed),
                "--out",
                str(path),
            ]
        )
        return path.read_text()

    def test_table_layout(self, tmp_path):
        text = self.run_small(tmp_path / "cv.csv")
        lines = text.splitlines()
        assert lines[0] == "# shaperec convergence"
        assert lines[1].startswith("# config: {")
        header = "method,L,h,q,noise_p,noise_eps,seed,lq_error,fit_seconds"
        assert header in lines
        rows = data_rows(text)
        assert [(r[0], r[1]) for r in rows] == [
            ("pc", "8"),
            ("licc", "8"),
            ("pc", "16"),
            ("licc", "16"),
        ]
        for r in rows:
            assert float(r[2]) == 1.0 / int(r[1])
            assert float(r[7]) > 0.0
            assert float(r[8]) >= 0.0

    def test_slope_rows_match_recount(self, tmp_path):
        text = self.run_small(tmp_path / "cv.csv")
        rows = data_rows(text)
        slopes = dict(
            (m.group(1), float(m.group(2)))
            for m in re.finditer(r"# slope,(\w+),([^\s]+)", text)
        )
        assert set(slopes) == {"pc", "licc"}
        for mth in slopes:
            pts = [(float(r[2]), float(r[7])) for r in rows if r[0] == mth]
            fit = np.polyfit(np.log([h for h, _ in pts]), np.log([e for _, e in pts]), 1)
            assert slopes[mth] == pytest.approx(float(fit[0]), abs=1e-12)

    def test_noiseless_runs_byte_identical_up_to_timings(self, tmp_path):
        def strip_timings(text):
            out = []
            for ln in text.splitlines():
                if ln.startswith("#") or ln.startswith("method,"):
                    out.append(ln)
                else:
                    out.append(",".join(ln.split(",")[:-1]))
            return "\n".join(out)

        a = self.run_small(tmp_path / "cv.csv")
        b = self.run_small(tmp_path / "cv.csv")
        assert strip_timings(a) == strip_timings(b)

    def test_noise_changes_errors_per_seed(self, tmp_path):
        a = self.run_small(tmp_path / "a.csv", seed=1, eps=1.0 / 9.0)
        b = self.run_small(tmp_path / "b.csv", seed=2, eps=1.0 / 9.0)
        ea = [float(r[7]) for r in data_rows(a) if r[0] == "pc"]
        eb = [float(r[7]) for r in data_rows(b) if r[0] == "pc"]
        assert ea != eb


class TestReconstruct:
    def reconstruct(self, tmp_path, method, L=16, shape_args=(), svg=False):
        out = tmp_path / f"{method}{L}.json"
        args = ["reconstruct", "--L", str(L), "--method", method, "--out", str(out)]
        args += list(shape_args)
        svg_path = tmp_path / f"{method}{L}.svg"
        if svg:
            args += ["--svg", str(svg_path)]
        run_ok(args)
        doc = json.loads(out.read_text())
        return (doc, svg_path.read_text()) if svg else doc

    def test_schema_and_cell_listing(self, tmp_path):
        doc = self.reconstruct(tmp_path, "licc")
        jsonschema.validate(doc, RECONSTRUCT_SCHEMA)
        assert doc["grid"] == {"L": 16, "h": 0.0625}
        assert len(doc["cells"]) == 256
        seen = set()
        for cell in doc["cells"]:
            seen.add((cell["i"], cell["j"]))
            if cell["kind"] == "constant":
                assert 0.0 <= cell["value"] <= 1.0
            else:
                center = Point((cell["i"] - 0.5) / 16, (cell["j"] - 0.5) / 16)
                hp = HalfPlane(cell["theta"], cell["c"], center)
                assert line_segment_in_box(hp, center, 0.0625) is not None
        assert len(seen) == 256

    def test_rerun_from_echoed_config_reproduces_json(self, tmp_path):
        doc = self.reconstruct(tmp_path, "licc")
        echo = doc["config"]
        text, svg = cmd_reconstruct(RunConfig(echo["command"], echo["params"]))
        assert svg is None
        assert json.loads(text) == doc

    def test_halfplane_interior_exact_and_segments_collinear(self, tmp_path):
        shape_args = ["--shape", "halfplane", "--theta", "0.6", "--c", "0.07"]
        doc, svg = self.reconstruct(tmp_path, "licc", shape_args=shape_args, svg=True)
        assert doc["error"]["l1_inner"] <= 1e-12
        hp = HalfPlane(0.6, 0.07, Point(0.5, 0.5))
        red = svg.split('stroke="#c53030"')[1]
        segs = SEG_RE.findall(red)
        assert doc["interface_stats"]["count"] == len(segs) > 0
        for x1, y1, x2, y2 in segs:
            for x, ysvg in ((x1, y1), (x2, y2)):
                p = (float(x), 1.0 - float(ysvg))
                assert abs(hp.side(p)) <= 1e-6
                assert -1e-9 <= p[0] <= 1.0 + 1e-9
                assert -1e-9 <= p[1] <= 1.0 + 1e-9

    def test_disk_segments_sit_inside_the_circle(self, tmp_path):
        li = self.reconstruct(tmp_path, "li")
        licc = self.reconstruct(tmp_path, "licc")
        for doc in (li, licc):
            stats = doc["interface_stats"]
            assert stats["midpoint_inside"] == stats["count"] > 0
            assert stats["mean_signed_distance"] < 0.0
        # The center-weighted fit hugs the boundary more closely.
        assert li["interface_stats"]["mean_signed_distance"] < licc[
            "interface_stats"
        ]["mean_signed_distance"]
        assert licc["error"]["l1"] < li["error"]["l1"]

    def test_svg_document_structure(self, tmp_path):
        _, svg = self.reconstruct(tmp_path, "licc", svg=True)
        assert svg.startswith('<svg xmlns="http://www.w3.org/2000/svg" version="1.1"')
        assert 'viewBox="0 0 1 1"' in svg
        assert svg.rstrip().endswith("</svg>")
        grid_group = svg.split('<g stroke="#dddddd"')[1].split("</g>")[0]
        assert len(SEG_RE.findall(grid_group)) == 2 * 17
        assert "<polyline points=" in svg


class TestStability:
    def test_zero_samples_give_the_extremal_pair(self, tmp_path):
        out = tmp_path / "s.json"
        run_ok(["stability", "--samples", "0", "--out", str(out)])
        doc = json.loads(out.read_text())
        jsonschema.validate(doc, STABILITY_SCHEMA)
        assert doc["C0_hat"] == 1.5
        assert doc["alpha_check"] == 2.0 / 3.0
        pair = doc["argmax_pair"]
        assert pair["theta1"] == pytest.approx(math.pi / 2.0)
        assert pair["theta2"] == pytest.approx(3.0 * math.pi / 2.0)
        assert pair["c1"] == pair["c2"] == 0.0

    def test_sampled_run_bounds_and_determinism(self, tmp_path):
        out = tmp_path / "s.json"
        run_ok(["stability", "--samples", "300", "--seed", "5", "--out", str(out)])
        first = out.read_text()
        doc = json.loads(first)
        assert doc["C0_hat"] >= 1.5
        assert doc["alpha_check"] <= 1.0 + 1e-12
        assert doc["samples"] == 300 and doc["seed"] == 5
        run_ok(["stability", "--samples", "300", "--seed", "5", "--out", str(out)])
        assert out.read_text() == first


class TestPbdw:
    def split_sections(self, text):
        head, tail = text.split("# norm-comparison\n")
        return data_rows(head), data_rows(tail)

    def test_stable_trials_pass_bounds(self, tmp_path):
        out = tmp_path / "p.csv"
        run_ok(["pbdw", "--trials", "6", "--out", str(out)])
        rows, normrows = self.split_sections(out.read_text())
        assert len(rows) == len(normrows) == 6
        for r in rows:
            assert r[8] == "ok"
            assert float(r[1]) >= 1.0
            assert 0.0 < float(r[3]) < 1.0
            assert r[6] == r[7] == "true"
        for r in normrows:
            assert float(r[1]) <= float(r[2])
            assert r[3] == "true"

    def test_mu_column_matches_norm_section(self, tmp_path):
        out = tmp_path / "p.csv"
        run_ok(["pbdw", "--trials", "4", "--out", str(out)])
        rows, normrows = self.split_sections(out.read_text())
        for r, nr in zip(rows, normrows):
            assert r[0] == nr[0]
            assert float(r[1]) == float(nr[1])

    def test_unobservable_reduced_space_reported_per_trial(self, tmp_path):
        out = tmp_path / "p.csv"
        run_ok(["pbdw", "--n", "12", "--m", "10", "--trials", "3", "--out", str(out)])
        rows, normrows = self.split_sections(out.read_text())
        assert len(rows) == 3 and normrows == []
        for r in rows:
            assert r[8] == "unstable-configuration"
            assert all(field == "" for field in r[1:8])


class TestCs:
    def test_certified_header_trials_and_summary(self, tmp_path):
        out = tmp_path / "c.csv"
        run_ok(["cs", "--trials", "15", "--out", str(out)])
        text = out.read_text()
        assert "# certified-seed,24" in text
        assert "# eps-hat,0.5" in text
        rip = float(re.search(r"# rip1-lower,([^\s]+)", text).group(1))
        assert 0.0 < rip <= 3.0
        rows = data_rows(text)
        assert len(rows) == 15
        ratios = [float(r[3]) for r in rows]
        for r in rows:
            assert float(r[3]) == pytest.approx(float(r[2]) / float(r[1]), rel=1e-15)
        summary = re.search(r"# summary,max_iop_ratio,([^\s]+)", text).group(1)
        assert float(summary) == max(ratios)
        assert re.search(r"# summary,exact_sparse_recoveries,15,15", text)

    def test_fixed_seed_reproducibility(self, tmp_path):
        out = tmp_path / "c.csv"
        run_ok(["cs", "--trials", "8", "--seed", "3", "--out", str(out)])
        first = out.read_text()
        run_ok(["cs", "--trials", "8", "--seed", "3", "--out", str(out)])
        assert out.read_text() == first

    def test_certification_failure_is_numerical_instability(self, tmp_path, capsys):
        args = ["cs", "--max-tries", "2", "--out", str(tmp_path / "c.csv")]
        assert main(args) == EXIT_UNSTABLE
        assert "no certified seed" in capsys.readouterr().err
