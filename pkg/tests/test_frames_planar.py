import numpy as np
import pytest

from framecurve import frames, generators
from framecurve.curvecore import ClosureClass, Field, GridSpec
from framecurve.errors import ClosureViolation, VanishingCurvature, ZeroDerivativeSample
from framecurve.planar import planar_srt, planar_srt_inverse, sqrt_velocity
from helpers import framed

# frames ----------------------------------------------------------------------------


def test_planar_rmf_has_no_twist():
    g = GridSpec(256)
    c = framed("ellipse", g, "rmf")
    assert np.abs(frames.twist_rate(c)).max() < 1e-8
    # V keeps a constant angle with the plane normal
    assert np.ptp(c.V[:, 2]) < 1e-12


def test_frenet_circle_points_to_center():
    g = GridSpec(128)
    c = framed("circle", g, "frenet")
    np.testing.assert_allclose(c.V, -c.gamma, atol=1e-12)


def _helix_rmf_error(n: int) -> float:
    """Deviation of the RMF from the analytic one, which turns against the Frenet frame at the torsion rate."""
    g = GridSpec(n)
    r, p = 1.0, 0.5
    gamma, vel = generators.helix(g, radius=r, pitch=p)
    rmf = frames.rmf_frame(gamma, g, velocity=vel)
    fr = frames.frenet_frame(gamma, g, velocity=vel)
    phi = np.unwrap(np.arctan2(np.sum(rmf.V * fr.binormal, 1), np.sum(rmf.V * fr.V, 1)))
    s = np.concatenate([[0.0], np.cumsum(np.diff(g.times()) * np.linalg.norm(vel[1:], axis=1))])
    tau = p / (r * r + p * p)
    return min(np.abs(phi - phi[0] - sgn * tau * s).max() for sgn in (-1.0, 1.0))


def test_helix_rmf_converges_to_analytic_frame():
    e1, e2 = _helix_rmf_error(128), _helix_rmf_error(256)
    assert e1 < 1e-3
    assert e1 / e2 > 3.5


def test_rmf_twist_rate_decays_on_helix():
    rates = []
    for n in (128, 256):
        g = GridSpec(n)
        gamma, vel = generators.helix(g)
        rates.append(np.abs(frames.twist_rate(frames.rmf_frame(gamma, g, velocity=vel))).max())
    assert rates[1] < rates[0] / 3.5


def test_frenet_rejects_straight_segment():
    g = GridSpec(32)
    gamma, vel = generators.segment(g)
    with pytest.raises(VanishingCurvature):
        frames.frenet_frame(gamma, g, velocity=vel)


def test_full_twist_integrates_to_two_pi():
    g = GridSpec(256)
    c = framed("trefoil", g)
    extra = frames.twist_rate(frames.add_full_twist(c)) - frames.twist_rate(c)
    total = g.weights(True) @ (extra * c.speed)
    assert abs(abs(total) - 2 * np.pi) < 1e-6


def test_closed_rmf_frame_is_periodic():
    c = framed("torus-spiral", GridSpec(256))
    assert c.closure_gap() < 1e-6


# planar square-root transform -----------------------------------------------------


def test_segment_has_unit_transform():
    g = GridSpec(32)
    t = g.times()
    ab = planar_srt(t + 0j, g, closed=False)
    np.testing.assert_allclose(ab, np.tile([1.0, 0.0], (33, 1)), atol=1e-12)


def test_open_roundtrip_up_to_translation():
    g = GridSpec(256)
    t = g.times()
    c = np.exp(1j * t) * (1 + 0.3 * t) + 2.0
    dc = np.exp(1j * t) * (1j * (1 + 0.3 * t) + 0.3)
    back = planar_srt_inverse(planar_srt(c, g, closed=False, velocity=dc), g)
    assert np.abs(back - (c - c[0])).max() < 1e-8


def test_closed_roundtrip_up_to_translation():
    g = GridSpec(512)
    c, dc = generators.planar_blob(g)
    L = g.weights(True) @ np.abs(dc)
    c, dc = 2 * c / L, 2 * dc / L
    S = planar_srt(c, g, velocity=dc)
    assert S.field is Field.REAL
    back = planar_srt_inverse(S)
    assert np.abs(back - (c - c[0])).max() < 1e-8


def test_closed_length_two_pair_is_orthonormal():
    g = GridSpec(256)
    t = g.times(True)
    c = 1.3 * np.cos(np.pi * t) + 0.5j * np.sin(np.pi * t)
    dc = np.pi * (-1.3 * np.sin(np.pi * t) + 0.5j * np.cos(np.pi * t))
    s, cls = sqrt_velocity(c, g, closed=True, velocity=dc)
    s = s * np.sqrt(2.0 / (g.weights(True) @ np.abs(s) ** 2))
    w = g.weights(True)
    a, b = s.real, s.imag
    assert w @ (a * a) == pytest.approx(1.0, abs=1e-12)
    assert w @ (b * b) == pytest.approx(1.0, abs=1e-12)
    assert abs(w @ (a * b)) < 1e-12
    assert cls is ClosureClass.ANTILOOP  # turning number one


def test_open_curve_rejected_in_closed_mode():
    g = GridSpec(64)
    t = g.times(True)
    c = t + 0.1j * t**2
    with pytest.raises(ClosureViolation):
        planar_srt(c, g, velocity=1 + 0.2j * t)


def test_vanishing_derivative_is_reported():
    g = GridSpec(16)
    dc = np.ones(17, dtype=complex)
    dc[3] = 0
    with pytest.raises(ZeroDerivativeSample) as exc:
        sqrt_velocity(np.zeros(17, dtype=complex), g, velocity=dc)
    assert exc.value.indices == [3]
