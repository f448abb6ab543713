import filecmp
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from framecurve import cli
from framecurve.curvecore import normalize_length
from framecurve.errors import OrthogonalInputs
from framecurve.formats import CurveFile, matrix_from_text

GRID = ["--grid", "64"]


def run(*argv) -> int:
    return cli.main([str(a) for a in argv])


@pytest.fixture
def curves(tmp_path):
    """A few generated curve files at a small grid size."""
    out = {}
    for name, extra in [
        ("trefoil", []),
        ("trefoil_rot", ["--rotate", "--seed", "7"]),
        ("trefoil_twist", ["--twist", "1"]),
        ("torus", []),
        ("helix", []),
        ("ellipse", []),
        ("circle", []),
    ]:
        shape = {"torus": "torus-spiral"}.get(name, name.split("_")[0])
        p = tmp_path / f"{name}.curve"
        assert run("generate", shape, "--id", name, "--out", p, *GRID, *extra) == 0
        out[name] = p
    return out


def test_generate_writes_a_framed_curve(curves):
    cf = CurveFile.read(str(curves["trefoil"]))
    assert cf.closed and cf.n_samples == 64 and cf.frame is not None
    assert cf.metadata["source"] == "generator:trefoil"


def test_geodesic_writes_steps_and_summary(tmp_path, curves):
    out = tmp_path / "geo"
    assert run("geodesic", curves["torus"], curves["ellipse"], "--out", out, "--steps", 10, *GRID) == 0
    steps = sorted(p for p in os.listdir(out) if p.startswith("step_"))
    assert len(steps) == 11
    summary = json.loads((out / "summary.json").read_text())
    assert summary["mode"] == "closed-framed" and summary["steps"] == steps
    assert 0 < summary["normalized_distance"] <= 1 and len(summary["jordan_angles"]) == 2


def test_first_step_is_the_normalized_input(tmp_path):
    a, b, out = tmp_path / "a.curve", tmp_path / "b.curve", tmp_path / "geo"
    assert run("generate", "torus-spiral", "--out", a, "--grid", 256) == 0
    assert run("generate", "ellipse", "--out", b, "--grid", 256) == 0
    assert run("geodesic", a, b, "--out", out, "--steps", 1, "--grid", 256) == 0
    first = CurveFile.read(str(out / "step_000.curve")).to_framed()
    ref = normalize_length(CurveFile.read(str(a)).to_framed())
    np.testing.assert_allclose(first.V, ref.V, atol=1e-6)
    np.testing.assert_allclose(first.gamma - first.gamma[0], ref.gamma - ref.gamma[0], atol=1e-6)


def test_geodesic_and_distmat_are_deterministic(tmp_path, curves):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run("geodesic", curves["torus"], curves["ellipse"], "--out", d, "--steps", 3, *GRID) == 0
    cmp = filecmp.dircmp(a, b)
    assert not cmp.diff_files and not cmp.left_only and not cmp.right_only
    inputs = [curves[k] for k in ("torus", "ellipse", "circle")]
    m1, m2 = tmp_path / "m1.txt", tmp_path / "m2.txt"
    assert run("distmat", *inputs, "--out", m1, *GRID) == 0
    assert run("distmat", *inputs, "--out", m2, "--jobs", 2, *GRID) == 0
    assert m1.read_bytes() == m2.read_bytes()


def test_dist_of_rotated_copy(curves, capsys):
    assert run("dist", curves["trefoil"], curves["trefoil_rot"], "--mode", "closed-framed", *GRID) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["normalized_distance"] < 1e-3


def test_distmat_and_cluster(tmp_path, curves, capsys):
    inputs = [curves[k] for k in ("torus", "ellipse", "circle", "trefoil_twist")]
    m = tmp_path / "m.txt"
    assert run("distmat", *inputs, "--out", m, *GRID) == 0
    labels, d, mode, failures = matrix_from_text(m.read_text())
    assert d.shape == (4, 4) and np.array_equal(d, d.T) and np.all(np.diag(d) == 0)
    assert not failures and mode == "closed-framed"
    assert run("cluster", m, "--k", 2) == 0
    res = json.loads(capsys.readouterr().out)
    assert len(res["medoids"]) == 2 and set(res["assignment"]) == set(labels)
    assert all(b <= a for a, b in zip(res["cost_history"], res["cost_history"][1:]))


def test_distmat_labels_are_unique(tmp_path, curves):
    m = tmp_path / "m.txt"
    assert run("distmat", curves["circle"], curves["circle"], "--out", m, *GRID) == 0
    labels, d, _, _ = matrix_from_text(m.read_text())
    assert labels == ["circle_0", "circle_1"] and d[0, 1] < 1e-12


def test_distmat_records_failed_pairs(tmp_path, curves, capsys):
    m = tmp_path / "m.txt"
    assert run("distmat", curves["trefoil"], curves["trefoil_twist"], curves["torus"], "--out", m, *GRID) == 0
    assert "ParityMismatch" in capsys.readouterr().err
    _, d, _, failures = matrix_from_text(m.read_text())
    assert np.isnan(d[0, 1]) and (0, 1) in failures
    assert run("cluster", m, "--k", 2) == 3


def test_lift_unlift_roundtrip(tmp_path, capsys):
    src, q, back = tmp_path / "t.curve", tmp_path / "t.quat", tmp_path / "t2.curve"
    assert run("generate", "trefoil", "--out", src, "--grid", 256) == 0
    assert run("lift", src, "--out", q) == 0
    assert "closure_class:" in capsys.readouterr().out
    assert run("unlift", q, "--out", back) == 0
    a, b = CurveFile.read(str(src)), CurveFile.read(str(back))
    assert np.abs(a.points - b.points).max() < 1e-6
    assert np.abs(a.frame - b.frame).max() < 1e-6


def test_frames_mean_and_export(tmp_path, curves):
    bare = tmp_path / "bare.curve"
    assert run("generate", "trefoil", "--frame", "none", "--out", bare, *GRID) == 0
    fr = tmp_path / "fr.curve"
    assert run("frames", bare, "--kind", "frenet", "--out", fr) == 0
    assert CurveFile.read(str(fr)).frame is not None
    mean = tmp_path / "mean.curve"
    assert run("mean", curves["trefoil"], curves["trefoil_rot"], "--out", mean, "--max-iters", 2, *GRID) == 0
    assert CurveFile.read(str(mean)).closed
    geo, obj = tmp_path / "geo", tmp_path / "obj"
    assert run("geodesic", curves["torus"], curves["ellipse"], "--out", geo, "--steps", 2, *GRID) == 0
    assert run("export", geo, "--out", obj, "--segments", 6) == 0
    assert sorted(os.listdir(obj)) == ["step_000.obj", "step_001.obj", "step_002.obj"]


def test_open_and_planar_modes(tmp_path, curves, capsys):
    h2 = tmp_path / "h2.curve"
    assert run("generate", "helix", "--param", "pitch=0.2", "--out", h2, *GRID) == 0
    assert run("dist", curves["helix"], h2, *GRID) == 0
    assert json.loads(capsys.readouterr().out)["mode"] == "open-framed"
    assert run("dist", curves["helix"], h2, "--mode", "open-unframed", *GRID) == 0
    blob1, blob2 = tmp_path / "b1.curve", tmp_path / "b2.curve"
    assert run("generate", "planar-blob", "--out", blob1, *GRID) == 0
    assert run("generate", "planar-blob", "--param", "c1=0.3", "--out", blob2, *GRID) == 0
    assert run("dist", blob1, blob2, "--mode", "planar", *GRID) == 0


# exit codes -------------------------------------------------------------------------


def test_parity_mismatch_exits_3(tmp_path, curves, capsys):
    assert run("geodesic", curves["trefoil"], curves["trefoil_twist"], "--out", tmp_path / "g", *GRID) == 3
    err = capsys.readouterr().err
    assert err.startswith("framecurve: ParityMismatch:") and "trefoil.curve" in err


def test_mode_mismatch_exits_3(curves, capsys):
    assert run("dist", curves["helix"], curves["helix"], "--mode", "closed-framed", *GRID) == 3


def test_malformed_input_exits_2_with_location(tmp_path, curves, capsys):
    bad = tmp_path / "bad.curve"
    text = curves["trefoil"].read_text().splitlines()
    k = text.index("data:") + 2
    text[k] = "0.03125 not-a-number 0 0 0 0 1"
    bad.write_text("\n".join(text) + "\n")
    assert run("dist", bad, curves["trefoil"], *GRID) == 2
    err = capsys.readouterr().err
    assert f"bad.curve:{k + 1}:" in err and err.startswith("framecurve: ParseError:")


def test_missing_file_and_bad_flags_exit_2(tmp_path, curves, capsys):
    assert run("dist", tmp_path / "nope.curve", curves["trefoil"]) == 2
    assert run("dist", curves["trefoil"]) == 2
    assert run("geodesic", curves["torus"], curves["ellipse"], "--out", tmp_path / "g", "--steps", "0") == 2
    assert run("generate", "trefoil", "--param", "scale", "--out", tmp_path / "x.curve") == 2


def test_bad_environment_exits_2(curves, monkeypatch):
    monkeypatch.setenv("FRAMECURVE_GRID", "lots")
    assert run("dist", curves["trefoil"], curves["torus"]) == 2


def test_numerical_failure_exits_4(curves, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise OrthogonalInputs("inputs are orthogonal")

    monkeypatch.setattr(cli, "shape_distance", boom)
    assert run("dist", curves["trefoil"], curves["torus"], *GRID) == 4
    assert "OrthogonalInputs" in capsys.readouterr().err


def test_config_file_steps(tmp_path, curves):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"steps": 2, "grid": 64}))
    out = tmp_path / "g"
    assert run("geodesic", curves["torus"], curves["ellipse"], "--out", out, "--config", cfg) == 0
    assert len([p for p in os.listdir(out) if p.startswith("step_")]) == 3


def test_console_entry_point(tmp_path):
    out = tmp_path / "c.curve"
    res = subprocess.run([sys.executable, "-m", "framecurve.cli", "generate", "circle", "--out", str(out), "--grid", "32"], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert CurveFile.read(str(out)).n_samples == 32
