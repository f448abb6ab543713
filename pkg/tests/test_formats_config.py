import json
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from framecurve.config import RunConfig, load_config
from framecurve.curvecore import ClosureClass, GridSpec, lift
from framecurve.errors import ParseError, PreconditionError
from framecurve.formats import (
    CurveFile,
    atomic_write,
    fmt,
    matrix_from_text,
    matrix_to_text,
    quaternion_from_text,
    quaternion_to_text,
)
from framecurve.geodesic import Mode
from framecurve.mesh import SEAM_OFFSET, tube_obj
from helpers import framed, random_stiefel

# curve files -----------------------------------------------------------------------


@pytest.mark.parametrize("name", ["trefoil", "helix"])
def test_curve_file_roundtrip_is_exact(name):
    c = framed(name, GridSpec(64))
    cf = CurveFile.from_framed(c, name, {"source": "test"})
    back = CurveFile.from_text(cf.to_text())
    assert np.array_equal(back.points, cf.points) and np.array_equal(back.frame, cf.frame)
    assert back.metadata == {"source": "test"} and back.id == name and back.closed == c.closed
    assert back.points.shape[0] == (64 if c.closed else 65)
    assert back.to_text() == cf.to_text()


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_seventeen_digits_are_lossless(x):
    assert float(fmt(x)) == x


def test_unframed_file_has_four_columns(tmp_path):
    c = framed("trefoil", GridSpec(16))
    cf = CurveFile.from_framed(c, "k", frame=False)
    assert "columns: t x y z\n" in cf.to_text()
    path = tmp_path / "k.curve"
    cf.write(str(path))
    back = CurveFile.read(str(path))
    assert back.frame is None
    with pytest.raises(PreconditionError):
        back.to_framed()


def test_frame_columns_all_or_none():
    text = CurveFile.from_framed(framed("trefoil", GridSpec(8)), "k").to_text()
    lines = text.splitlines()
    bad_line = lines.index("data:") + 3
    toks = lines[bad_line - 1].split()
    lines[bad_line - 1] = " ".join(toks[:4])
    with pytest.raises(ParseError) as exc:
        CurveFile.from_text("\n".join(lines), "k.curve")
    assert exc.value.line == bad_line and exc.value.path == "k.curve"


@pytest.mark.parametrize(
    "edit, needle",
    [
        (lambda s: s.replace("format: 1", "format: 9"), "version"),
        (lambda s: s.replace("data:\n", ""), "key: value"),
        (lambda s: s.replace("n_samples: 8", "n_samples: 9"), "rows"),
        (lambda s: s.replace("closed: true", "closed: maybe"), "boolean"),
        (lambda s: s.replace("\n0.25 ", "\n0.3 "), "grid"),
        (lambda s: s.replace("\n0.25 ", "\nnan "), "non-finite"),
    ],
)
def test_malformed_curve_files(edit, needle):
    text = CurveFile.from_framed(framed("trefoil", GridSpec(8)), "k").to_text()
    with pytest.raises(ParseError, match=needle):
        CurveFile.from_text(edit(text))


def test_missing_file_is_a_parse_error(tmp_path):
    with pytest.raises(ParseError):
        CurveFile.read(str(tmp_path / "absent.curve"))


def test_quaternion_file_roundtrip(rng):
    S = random_stiefel(rng, GridSpec(32), ClosureClass.ANTILOOP)
    q = S.to_quaternion_path()
    text = quaternion_to_text(q, "p", basepoint=[1.0, -2.0, 0.5])
    pid, back, base = quaternion_from_text(text)
    assert pid == "p" and back.closure_class is ClosureClass.ANTILOOP
    assert np.array_equal(back.q, q.q)
    np.testing.assert_array_equal(base, [1.0, -2.0, 0.5])
    open_q = lift(framed("helix", GridSpec(16)))
    _, back, base = quaternion_from_text(quaternion_to_text(open_q, "h"))
    assert np.array_equal(back.q, open_q.q) and np.array_equal(base, np.zeros(3))


def test_matrix_file_roundtrip_with_failures():
    d = np.array([[0.0, 0.1, np.nan], [0.1, 0.0, 0.2], [np.nan, 0.2, 0.0]])
    text = matrix_to_text(["a", "b", "c"], d, "closed-framed", {(0, 2): "ParityMismatch: differ"})
    labels, back, mode, failures = matrix_from_text(text)
    assert labels == ["a", "b", "c"] and mode == "closed-framed"
    assert np.array_equal(back, d, equal_nan=True)
    assert failures == {(0, 2): "ParityMismatch: differ"}
    with pytest.raises(ValueError):
        matrix_to_text(["a b", "c"], np.zeros((2, 2)), "planar")


def test_atomic_write_leaves_no_temporaries(tmp_path):
    p = tmp_path / "sub" / "out.txt"
    atomic_write(str(p), "one\n")
    atomic_write(str(p), "two\n")
    assert p.read_text() == "two\n"
    assert os.listdir(p.parent) == ["out.txt"]


# configuration ------------------------------------------------------------------------


def test_defaults():
    cfg = load_config({}, None, env={})
    assert cfg == RunConfig()
    assert cfg.grid == 256 and cfg.steps == 10 and cfg.dp.window == 6 and cfg.dp.tol == 1e-4


def test_precedence_flags_env_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"steps": 3, "grid": 64, "tol": 1e-3}))
    env = {"FRAMECURVE_STEPS": "5", "FRAMECURVE_GRID": "96"}
    cfg = load_config({"steps": 2, "grid": None}, str(path), env=env)
    assert cfg.steps == 2  # flag beats env and file
    assert cfg.grid == 96  # env beats file
    assert cfg.tol == 1e-3  # file beats default
    env["FRAMECURVE_CONFIG"] = str(path)
    assert load_config({}, None, env=env).tol == 1e-3


@pytest.mark.parametrize(
    "data, env",
    [
        ({"stepz": 3}, {}),
        ({"steps": "many"}, {}),
        ({"grid": 0}, {}),
        ({}, {"FRAMECURVE_DP_WINDOW": "x"}),
        ({"mode": "sideways"}, {}),
    ],
)
def test_bad_configuration(tmp_path, data, env):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ParseError):
        load_config({}, str(path), env=env)


def test_mode_values_are_accepted():
    for m in Mode:
        assert load_config({"mode": m.value}, None, env={}).mode == m.value


# tube meshes -------------------------------------------------------------------------


def _obj_records(text, kind):
    return [line.split()[1:] for line in text.splitlines() if line.startswith(kind + " ")]


@pytest.mark.parametrize("name", ["trefoil", "helix"])
def test_tube_mesh_counts_and_seam(name):
    c = framed(name, GridSpec(32))
    seg, r = 8, 0.05
    text = tube_obj(c, r, seg, name)
    m = c.gamma.shape[0]
    verts = np.array(_obj_records(text, "v"), dtype=float)
    faces = np.array(_obj_records(text, "f"), dtype=int)
    assert verts.shape == (m * seg + m, 3)
    assert faces.shape == ((m if c.closed else m - 1) * seg, 4)
    assert faces.min() == 1 and faces.max() == m * seg
    # ring vertex 0 lies along V at the tube radius; the seam sits just outside
    np.testing.assert_allclose(verts[: m * seg : seg], c.gamma + r * c.V, atol=1e-9)
    np.testing.assert_allclose(verts[m * seg :], c.gamma + SEAM_OFFSET * r * c.V, atol=1e-9)
    line = _obj_records(text, "l")[0]
    assert len(line) == m + (1 if c.closed else 0)


def test_tube_mesh_rings_are_circles():
    c = framed("trefoil", GridSpec(16))
    verts = np.array(_obj_records(tube_obj(c, 0.1, 6), "v"), dtype=float)[: 16 * 6].reshape(16, 6, 3)
    dist = np.linalg.norm(verts - c.gamma[:, None, :], axis=-1)
    np.testing.assert_allclose(dist, 0.1, atol=1e-9)
    # cross-sections are normal to the tangent
    assert np.abs(np.einsum("ijk,ik->ij", verts - c.gamma[:, None, :], c.tangent)).max() < 1e-9

