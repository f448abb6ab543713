"""Explicit geodesics and end-to-end geodesic pipelines.

Open curves follow great circles of the preshape sphere; closed curves follow
Grassmannian geodesics built from principal bases, which keep every
intermediate curve closed without any projection step.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import frames
from .curvecore import (
    FramedCurve,
    GridSpec,
    QuaternionPath,
    StiefelPoint,
    hopf_map,
    lift,
    normalize_length,
    to_stiefel,
)
from .errors import AntipodalOrCoincident, JordanAngleAtPi2, NotClosed, ParityMismatch, SingularSample
from .metric import GRASSMANN_DIAMETER, SPHERE_DIAMETER, grassmann_distance, sphere_angle
from .planar import planar_srt, planar_srt_inverse
from .registration import (
    DPConfig,
    RegistrationResult,
    register_closed_framed,
    register_closed_unframed,
    register_open,
    svd_align,
)

DEFAULT_STEPS = 10


class Mode(enum.Enum):
    OPEN_FRAMED = "open-framed"
    OPEN_UNFRAMED = "open-unframed"
    CLOSED_FRAMED = "closed-framed"
    CLOSED_UNFRAMED = "closed-unframed"
    PLANAR = "planar"


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    """Samples of a geodesic at parameters ``u`` together with its curves.

    ``steps`` hold the shape-space points (quaternionic paths or Stiefel
    points) and ``curves`` their images as framed curves (complex arrays in
    planar mode).
    """

    steps: list
    u: np.ndarray
    distance: float
    normalized_distance: float
    registration: RegistrationResult | None
    curves: list = field(default_factory=list)
    jordan_angles: tuple | None = None
    singular: bool = False


def _coeffs(theta: float, u: float) -> tuple[float, float]:
    if theta < 1e-10:
        return 1.0 - u, u
    s = np.sin(theta)
    return np.sin((1.0 - u) * theta) / s, np.sin(u * theta) / s


def sphere_geodesic(q0: QuaternionPath, q1: QuaternionPath, u: float) -> QuaternionPath:
    """Point at fraction ``u`` of the great circle from ``q0`` to ``q1``.

    Samples where the interpolated path vanishes are reported with a
    :class:`SingularSample` warning; the path is still returned.
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    theta = sphere_angle(q0, q1)
    if np.sin(theta) < 1e-10:
        raise AntipodalOrCoincident("great circle undefined for coincident or antipodal points")
    if u == 0.0:
        return q0
    if u == 1.0:
        return q1
    a, b = _coeffs(theta, u)
    q = a * np.asarray(q0.q) + b * np.asarray(q1.q)
    nrm = np.sqrt(np.sum(q * q, axis=1))
    bad = np.flatnonzero(nrm <= 1e-8 * np.sqrt(2.0))
    if bad.size:
        warnings.warn(SingularSample(f"geodesic passes through a singular curve at samples {bad[:10].tolist()}"), stacklevel=2)
    return q0.replace(q)


def grassmann_geodesic(aligned, u: float) -> StiefelPoint:
    """Point at fraction ``u`` along the geodesic between aligned principal bases.

    ``aligned`` is the tuple ``(S0t, S1t, theta_z, theta_w)`` returned by
    :func:`svd_align`.
    """
    S0, S1, tz, tw = aligned
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    for th in (tz, tw):
        if abs(th - np.pi / 2) < 1e-12:
            warnings.warn(JordanAngleAtPi2("Jordan angle of pi/2: endpoint planes share no direction"), stacklevel=2)
            break
    az, bz = _coeffs(tz, u)
    aw, bw = _coeffs(tw, u)
    z = az * S0.z + bz * S1.z
    w = aw * S0.w + bw * S1.w
    return StiefelPoint(S0.grid, z, w, S0.field, S0.closure_class)


# pipelines -------------------------------------------------------------------


def _u_values(m: int) -> np.ndarray:
    if m < 1:
        raise ValueError("need at least one geodesic step")
    return np.linspace(0.0, 1.0, m + 1)


def _base(x, grid: GridSpec | None, closed: bool):
    """``(grid, gamma, velocity)`` for a framed curve or a raw point array."""
    if isinstance(x, FramedCurve):
        return x.grid, np.asarray(x.gamma), x.velocity
    gamma = np.asarray(x, dtype=float)
    if grid is None:
        grid = GridSpec(gamma.shape[0] if closed else gamma.shape[0] - 1)
    return grid, gamma, None


def open_sphere_points(c0: FramedCurve, c1: FramedCurve) -> tuple[QuaternionPath, QuaternionPath]:
    """Length-normalised lifts of two open framed curves."""
    return lift(normalize_length(c0)), lift(normalize_length(c1))


def _sphere_path(q0, reg: RegistrationResult, m: int) -> GeodesicPath:
    q1 = reg.aligned
    u = _u_values(m)
    theta = sphere_angle(q0, q1)
    singular = False
    if theta < 1e-10:
        steps = [q0] * m + [q1]
    else:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            steps = [sphere_geodesic(q0, q1, float(x)) for x in u]
        for w in caught:
            singular = singular or issubclass(w.category, SingularSample)
            warnings.warn(w.message, w.category, stacklevel=3)
    dist = float(np.sqrt(2.0) * theta)
    return GeodesicPath(steps, u, dist, dist / SPHERE_DIAMETER, reg, [hopf_map(s) for s in steps], singular=singular)


def geodesic_open_framed(c0: FramedCurve, c1: FramedCurve, m: int = DEFAULT_STEPS, cfg: DPConfig = DPConfig()) -> GeodesicPath:
    """Geodesic between open framed curves modulo translation, scale, rotation and warping.

    The sign of a lift is absorbed by the rotation group (``-1`` is a unit
    quaternion), so registering one lift of each curve covers all four lift
    combinations.
    """
    q0, q1 = open_sphere_points(c0, c1)
    reg = register_open(q0, q1, cfg)
    return _sphere_path(q0, reg, m)


def _open_framings(g0, g1, grid: GridSpec | None) -> tuple[FramedCurve, FramedCurve]:
    cs = []
    for g in (g0, g1):
        if isinstance(g, FramedCurve):
            cs.append(g)
        else:
            gr, gamma, vel = _base(g, grid, False)
            cs.append(frames.rmf_frame(gamma, gr, closed=False, velocity=vel))
    return cs[0], cs[1]


def geodesic_open_unframed(g0, g1, m: int = DEFAULT_STEPS, cfg: DPConfig = DPConfig(), grid: GridSpec | None = None) -> GeodesicPath:
    """Geodesic between open base curves; framings are quotiented out by twisting.

    Framed inputs keep their framing as the starting point; raw point arrays
    get rotation-minimising framings.
    """
    cs = _open_framings(g0, g1, grid)
    q0, q1 = open_sphere_points(*cs)
    reg = register_open(q0, q1, cfg, twist=True)
    return _sphere_path(q0, reg, m)


def closed_stiefel_point(c: FramedCurve) -> StiefelPoint:
    """Length-normalised Stiefel coordinates of a closed framed curve."""
    if not c.closed:
        raise NotClosed("closed pipeline needs closed framed curves")
    return to_stiefel(lift(normalize_length(c)))


def _grassmann_path(S0: StiefelPoint, reg: RegistrationResult, m: int, planar: bool = False) -> GeodesicPath:
    aligned = svd_align(S0, reg.aligned)
    # undo the principal rotation of S0 so step 0 reproduces S0 itself
    w = S0.grid.weights(True)
    U0h = (S0.basis * w[:, None]).T.conj() @ aligned[0].basis
    U0h = np.conj(U0h).T
    u = _u_values(m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", JordanAngleAtPi2)
        steps = [grassmann_geodesic(aligned, float(x)) for x in u]
    steps = [s.with_basis(s.basis @ U0h) for s in steps]
    dist, angles = grassmann_distance(S0, reg.aligned)
    if planar:
        curves = [planar_srt_inverse(s) for s in steps]
    else:
        curves = [hopf_map(s.to_quaternion_path()) for s in steps]
    return GeodesicPath(steps, u, dist, dist / GRASSMANN_DIAMETER, reg, curves, angles)


def geodesic_closed_framed(c0: FramedCurve, c1: FramedCurve, m: int = DEFAULT_STEPS, cfg: DPConfig = DPConfig()) -> GeodesicPath:
    """Geodesic between closed framed curves of equal linking parity."""
    S0, S1 = closed_stiefel_point(c0), closed_stiefel_point(c1)
    reg = register_closed_framed(S0, S1, cfg)
    return _grassmann_path(S0, reg, m)


def initial_framings(g0, g1, grid: GridSpec | None = None) -> tuple[FramedCurve, FramedCurve]:
    """Closed framings of two base curves with matching linking parity.

    Framed inputs keep their framing; raw point arrays get rotation-minimising
    framings closed by linear holonomy. If the parities differ the second
    framing receives one extra full turn.
    """
    cs = []
    for g in (g0, g1):
        if isinstance(g, FramedCurve):
            cs.append(g)
        else:
            gr, gamma, vel = _base(g, grid, True)
            cs.append(frames.rmf_frame(gamma, gr, closed=True, velocity=vel))
    if lift(cs[0]).closure_class is not lift(cs[1]).closure_class:
        cs[1] = frames.add_full_twist(cs[1])
    return cs[0], cs[1]


def geodesic_closed_unframed(g0, g1, m: int = DEFAULT_STEPS, cfg: DPConfig = DPConfig(), grid: GridSpec | None = None) -> GeodesicPath:
    """Geodesic between closed base curves; frames are quotiented out by twisting.

    ``curves`` still carry the intermediate framings; their base curves form
    the unframed homotopy.
    """
    c0, c1 = initial_framings(g0, g1, grid)
    S0, S1 = closed_stiefel_point(c0), closed_stiefel_point(c1)
    reg = register_closed_unframed(S0, S1, cfg)
    return _grassmann_path(S0, reg, m)


def geodesic_planar(c0, c1, grid: GridSpec, m: int = DEFAULT_STEPS, cfg: DPConfig = DPConfig(), velocities=(None, None)) -> GeodesicPath:
    """Geodesic between closed plane curves given as complex samples."""
    S0 = planar_srt(c0, grid, True, velocities[0])
    S1 = planar_srt(c1, grid, True, velocities[1])
    if S0.closure_class is not S1.closure_class:
        raise ParityMismatch("plane curves have turning numbers of different parity")
    reg = register_closed_framed(S0, S1, cfg)
    return _grassmann_path(S0, reg, m, planar=True)


def geodesic(x0, x1, mode: Mode | str, m: int = DEFAULT_STEPS, cfg: DPConfig = DPConfig(), grid: GridSpec | None = None) -> GeodesicPath:
    """Dispatch to the pipeline for ``mode``."""
    mode = Mode(mode)
    if mode is Mode.OPEN_FRAMED:
        return geodesic_open_framed(x0, x1, m, cfg)
    if mode is Mode.OPEN_UNFRAMED:
        return geodesic_open_unframed(x0, x1, m, cfg, grid)
    if mode is Mode.CLOSED_FRAMED:
        return geodesic_closed_framed(x0, x1, m, cfg)
    if mode is Mode.CLOSED_UNFRAMED:
        return geodesic_closed_unframed(x0, x1, m, cfg, grid)
    return geodesic_planar(x0, x1, grid, m, cfg)


def is_closed_mode(mode: Mode | str) -> bool:
    return Mode(mode) in (Mode.CLOSED_FRAMED, Mode.CLOSED_UNFRAMED, Mode.PLANAR)


def shape_distance(x0, x1, mode: Mode | str, cfg: DPConfig = DPConfig(), grid: GridSpec | None = None) -> tuple[float, float, RegistrationResult]:
    """Registered distance ``(raw, normalised, registration)`` without sampling the geodesic."""
    mode = Mode(mode)
    if mode in (Mode.OPEN_FRAMED, Mode.OPEN_UNFRAMED):
        if mode is Mode.OPEN_UNFRAMED:
            x0, x1 = _open_framings(x0, x1, grid)
        q0, q1 = open_sphere_points(x0, x1)
        reg = register_open(q0, q1, cfg, twist=mode is Mode.OPEN_UNFRAMED)
        return reg.distance, reg.distance / SPHERE_DIAMETER, reg
    if mode is Mode.PLANAR:
        S0, S1 = planar_srt(x0, grid, True), planar_srt(x1, grid, True)
        if S0.closure_class is not S1.closure_class:
            raise ParityMismatch("plane curves have turning numbers of different parity")
        reg = register_closed_framed(S0, S1, cfg)
    elif mode is Mode.CLOSED_FRAMED:
        reg = register_closed_framed(closed_stiefel_point(x0), closed_stiefel_point(x1), cfg)
    else:
        c0, c1 = initial_framings(x0, x1, grid)
        reg = register_closed_unframed(closed_stiefel_point(c0), closed_stiefel_point(c1), cfg)
    return reg.distance, reg.distance / GRASSMANN_DIAMETER, reg
