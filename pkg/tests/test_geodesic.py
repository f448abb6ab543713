import warnings

import numpy as np
import pytest

from framecurve import frames, generators
from framecurve.curvecore import ClosureClass, GridSpec, QuaternionPath, hopf_map, lift, normalize_length, stiefel_residual, to_stiefel
from framecurve.errors import AntipodalOrCoincident, JordanAngleAtPi2, ParityMismatch, SingularSample
from framecurve.geodesic import (
    Mode,
    geodesic,
    geodesic_closed_framed,
    geodesic_closed_unframed,
    geodesic_open_framed,
    geodesic_open_unframed,
    geodesic_planar,
    grassmann_geodesic,
    shape_distance,
    sphere_geodesic,
)
from framecurve.metric import grassmann_distance, sphere_distance
from framecurve.quaternion import hopf_matrix, random_unit
from framecurve.registration import Warp, apply_rotation, apply_warp, svd_align
from helpers import fourier_plane, framed, planar_families, random_stiefel, random_unitary, smooth_open_path


def constant(g: GridSpec, v) -> QuaternionPath:
    return QuaternionPath(g, np.tile(np.asarray(v, dtype=float), (g.n_samples + 1, 1)))


def rigid_copy(c, rng):
    R = hopf_matrix(random_unit(rng))
    return type(c)(c.grid, c.gamma @ R.T + 1.0, c.V @ R.T, c.closure, velocity=c.velocity @ R.T)


def constant_speed_error(steps, dist_fn, total: float) -> float:
    m = len(steps) - 1
    gaps = np.array([dist_fn(a, b) for a, b in zip(steps, steps[1:])])
    return float(np.abs(gaps - total / m).max() / max(total, 1e-300))


def twist_residual(q, dq) -> float:
    """Largest pointwise ``|Im <dq, q>_C2|`` relative to the L2 norm of ``dq``."""
    pair = dq.z * np.conj(q.z) + dq.w * np.conj(q.w)
    nrm = np.sqrt(dq.weights @ (np.abs(dq.z) ** 2 + np.abs(dq.w) ** 2))
    return float(np.abs(pair.imag).max() / nrm)


# sphere geodesic ------------------------------------------------------------------


def test_sphere_geodesic_endpoints_and_midpoint():
    g = GridSpec(32)
    one, i = constant(g, [1, 0, 0, 0]), constant(g, [0, 1, 0, 0])
    assert sphere_geodesic(one, i, 0.0) is one and sphere_geodesic(one, i, 1.0) is i
    mid = sphere_geodesic(one, i, 0.5)
    np.testing.assert_allclose(mid.q, np.tile([1, 1, 0, 0], (33, 1)) / np.sqrt(2), atol=1e-15)


def test_sphere_geodesic_stays_on_sphere(rng):
    g = GridSpec(64)
    q0, q1 = smooth_open_path(rng, g), smooth_open_path(rng, g)
    for u in np.linspace(0, 1, 7):
        assert sphere_geodesic(q0, q1, u).norm2 == pytest.approx(2.0, abs=1e-8)
    assert constant_speed_error([sphere_geodesic(q0, q1, u) for u in np.linspace(0, 1, 11)], sphere_distance, sphere_distance(q0, q1)) < 1e-6


def test_sphere_geodesic_coincident_points(rng):
    q = smooth_open_path(rng, GridSpec(16))
    with pytest.raises(AntipodalOrCoincident):
        sphere_geodesic(q, q, 0.5)


def test_singular_intermediate_curve_is_flagged():
    g = GridSpec(16)
    t = g.times()
    one = constant(g, [1, 0, 0, 0])
    # pointwise antipodal to one at t = 1, so the midpoint vanishes there
    q1 = QuaternionPath(g, np.stack([np.cos(np.pi * t), np.sin(np.pi * t), 0 * t, 0 * t], 1))
    with pytest.warns(SingularSample):
        mid = sphere_geodesic(one, q1, 0.5)
    assert np.abs(mid.q[8]).max() < 1e-15


# Grassmann geodesic ---------------------------------------------------------------


def test_fourier_plane_midpoint():
    g = GridSpec(64)
    e = lambda k: np.exp(1j * np.pi * k * g.times(True)) / np.sqrt(2)  # noqa: E731
    S0, S1 = fourier_plane(g, 0, 1), fourier_plane(g, 2, 3)
    _, _, tz, tw = svd_align(S0, S1)
    assert tz == pytest.approx(np.pi / 2, abs=1e-12) and tw == pytest.approx(np.pi / 2, abs=1e-12)
    # both singular values vanish, so any basis is principal; use the Fourier one
    with pytest.warns(JordanAngleAtPi2):
        mid = grassmann_geodesic((S0, S1, np.pi / 2, np.pi / 2), 0.5)
    np.testing.assert_allclose(mid.z, (e(0) + e(2)) / np.sqrt(2), atol=1e-12)
    np.testing.assert_allclose(mid.w, (e(1) + e(3)) / np.sqrt(2), atol=1e-12)
    assert stiefel_residual(mid.basis, g) < 1e-12


def test_grassmann_geodesic_properties(rng):
    g = GridSpec(128)
    for cls in (ClosureClass.LOOP, ClosureClass.ANTILOOP):
        S0, S1 = random_stiefel(rng, g, cls), random_stiefel(rng, g, cls)
        al = svd_align(S0, S1)
        steps = [grassmann_geodesic(al, u) for u in np.linspace(0, 1, 11)]
        np.testing.assert_allclose(steps[0].basis, al[0].basis, atol=1e-15)
        np.testing.assert_allclose(steps[-1].basis, al[1].basis, atol=1e-15)
        for s in steps:
            assert stiefel_residual(s.basis, g) < 1e-8
            assert s.closure_class is cls
        d = grassmann_distance(S0, S1)[0]
        assert constant_speed_error(steps, lambda a, b: grassmann_distance(a, b)[0], d) < 1e-6


def test_grassmann_geodesic_same_plane_is_constant(rng):
    S = random_stiefel(rng, GridSpec(64))
    al = svd_align(S, S.rebase(random_unitary(rng)))
    a, b = grassmann_geodesic(al, 0.0), grassmann_geodesic(al, 0.4)
    assert grassmann_distance(a, b)[0] < 1e-7


# open pipelines ------------------------------------------------------------------


def test_open_rigid_copy_has_small_distance(rng):
    c = framed("helix", GridSpec(128), "frenet")
    path = geodesic_open_framed(c, rigid_copy(c, rng), m=4)
    assert path.distance < 1e-3


def test_open_identical_curves_give_constant_path():
    c = framed("helix", GridSpec(64), "frenet")
    path = geodesic_open_framed(c, c, m=4)
    assert path.distance == 0.0
    for s in path.steps:
        np.testing.assert_array_equal(s.q, path.steps[0].q)


def test_segment_to_half_helix_keeps_length_two():
    g = GridSpec(256)
    seg = frames.rmf_frame(*generators.segment(g)[:1], g, velocity=generators.segment(g)[1])
    hel = framed("helix", g, "frenet", turns=0.5)
    path = geodesic_open_framed(seg, hel, m=10)
    assert len(path.curves) == 11
    for c in path.curves:
        assert c.length == pytest.approx(2.0, abs=1e-6)
    # endpoint fidelity: step 0 is the normalised first input
    ref = normalize_length(seg)
    np.testing.assert_allclose(path.curves[0].gamma, ref.gamma - ref.gamma[0], atol=1e-8)
    np.testing.assert_allclose(path.curves[0].V, ref.V, atol=1e-8)


def test_open_unframed_geodesic_is_horizontal(rng):
    g = GridSpec(128)
    c0 = framed("helix", g, "frenet")
    c1 = framed("helix", g, "rmf", pitch=0.2)
    un = geodesic_open_unframed(c0, c1, m=4)
    fr = geodesic_open_framed(c0, c1, m=4)
    assert un.distance <= fr.distance
    q0, q1 = un.steps[0], un.registration.aligned
    h = 1e-5
    for u in (0.25, 0.5, 0.75):
        dq = q0.replace((sphere_geodesic(q0, q1, u + h).q - sphere_geodesic(q0, q1, u - h).q) / (2 * h))
        assert twist_residual(sphere_geodesic(q0, q1, u), dq) < 1e-6


def test_open_distance_is_nearly_symmetric(rng):
    g = GridSpec(128)
    c0, c1 = framed("helix", g, "frenet"), framed("helix", g, "frenet", radius=0.6, pitch=0.8)
    d01 = shape_distance(c0, c1, Mode.OPEN_FRAMED)[0]
    d10 = shape_distance(c1, c0, Mode.OPEN_FRAMED)[0]
    assert abs(d01 - d10) <= 0.02 * max(d01, d10)


def test_closed_distance_is_nearly_symmetric(rng):
    g = GridSpec(256)
    a, b = planar_families(rng, g, per=1)[0]
    d01 = shape_distance(a, b, Mode.PLANAR, grid=g)[0]
    d10 = shape_distance(b, a, Mode.PLANAR, grid=g)[0]
    assert abs(d01 - d10) <= 0.02 * max(d01, d10)


# closed pipelines ----------------------------------------------------------------


def test_closed_reparameterized_rigid_motion(rng):
    g = GridSpec(128)
    c0 = normalize_length(framed("trefoil", g))
    S = to_stiefel(lift(c0))
    t = g.times()
    rho = Warp(g, t + 0.1 * np.sin(np.pi * t) / np.pi + 17 * g.dt, closed=True)
    c1 = hopf_map(apply_warp(apply_rotation(S, random_unit(rng)), rho).to_quaternion_path())
    path = geodesic_closed_framed(c0, c1, m=4)
    assert path.distance < 5 * g.dt


def test_closed_steps_stay_closed_with_constant_speed():
    g = GridSpec(128)
    c0 = framed("trefoil", g)
    c1 = framed("torus-spiral", g)
    if lift(c0).closure_class is not lift(c1).closure_class:
        c1 = frames.add_full_twist(c1)
    path = geodesic_closed_framed(c0, c1, m=10)
    for s, c in zip(path.steps, path.curves):
        assert stiefel_residual(s.basis, g) < 1e-8
        assert c.closure_gap() < 1e-6
    assert constant_speed_error(path.steps, lambda a, b: grassmann_distance(a, b)[0], path.distance) < 1e-6
    # step 0 reproduces the first input
    ref = normalize_length(c0)
    np.testing.assert_allclose(path.curves[0].V, ref.V, atol=1e-8)
    assert 0.0 <= path.normalized_distance <= 1.0


def test_circle_to_double_circle():
    g = GridSpec(128)
    c0 = framed("circle", g, "frenet")
    c1 = framed("circle", g, "frenet", turns=2)
    if lift(c0).closure_class is not lift(c1).closure_class:
        c1 = frames.add_full_twist(c1)
    path = geodesic_closed_framed(c0, c1, m=6)
    assert max(c.closure_gap() for c in path.curves) < 1e-6


def test_closed_unframed_below_framed_and_horizontal():
    g = GridSpec(96)
    c0 = framed("trefoil", g, "frenet")
    c1 = framed("ellipse", g, "frenet")
    if lift(c0).closure_class is not lift(c1).closure_class:
        c1 = frames.add_full_twist(c1)
    fr = geodesic_closed_framed(c0, c1, m=4)
    un = geodesic_closed_unframed(c0, c1, m=4)
    assert un.distance <= fr.distance
    al = svd_align(un.steps[0], un.registration.aligned)
    h = 1e-5
    for u in (0.25, 0.5, 0.75):
        qa = grassmann_geodesic(al, u + h).to_quaternion_path()
        qb = grassmann_geodesic(al, u - h).to_quaternion_path()
        dq = qa.replace((qa.q - qb.q) / (2 * h))
        assert twist_residual(grassmann_geodesic(al, u).to_quaternion_path(), dq) < 1e-6


def test_unframed_accepts_raw_points():
    g = GridSpec(64)
    a, _ = generators.trefoil(g)
    b, _ = generators.ellipse(g, tilt=0.4)
    path = geodesic(a, b, Mode.CLOSED_UNFRAMED, m=2, grid=g)
    assert len(path.curves) == 3 and path.distance > 0


def test_parity_mismatch_is_rejected():
    g = GridSpec(64)
    c = framed("trefoil", g)
    with pytest.raises(ParityMismatch):
        geodesic_closed_framed(c, frames.add_full_twist(c))


def test_planar_geodesic_closes():
    g = GridSpec(128)
    t = g.times(True)
    a = np.exp(1j * np.pi * t)
    b = 1.4 * np.cos(np.pi * t) + 0.6j * np.sin(np.pi * t)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        path = geodesic_planar(a, b, g, m=4)
    for c in path.curves:
        assert c.shape == (g.n_samples,)
    assert path.distance > 0
