"""Rotation-minimising and Frenet framings of base curves."""

from __future__ import annotations

import numpy as np

from . import numerics
from .curvecore import Closure, FramedCurve, GridSpec
from .errors import DegenerateSpeed, VanishingCurvature


def _velocity(gamma, grid: GridSpec, closed: bool, velocity=None) -> np.ndarray:
    if velocity is not None:
        return np.asarray(velocity, dtype=float)
    return numerics.derivative(np.asarray(gamma, dtype=float), grid.dt, periodic=closed)


def _check_speed(d: np.ndarray) -> np.ndarray:
    speed = np.linalg.norm(d, axis=1)
    bad = np.flatnonzero(speed <= 1e-12)
    if bad.size:
        raise DegenerateSpeed("base curve has vanishing speed", bad)
    return speed


def initial_normal(T0: np.ndarray) -> np.ndarray:
    """Normalised projection of ``(1, 0, 0)`` onto the plane normal to ``T0``.

    Falls back to ``(0, 1, 0)`` when ``T0`` is (anti)parallel to the x-axis.
    """
    for e in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
        v = e - np.dot(e, T0) * T0
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            return v / nv
    raise AssertionError("unreachable")


def _rotate_about(v: np.ndarray, axis: np.ndarray, angle: np.ndarray) -> np.ndarray:
    """Rotate vectors ``v`` (normal to unit ``axis``) by ``angle``, right-hand rule."""
    angle = np.asarray(angle)[..., None]
    return np.cos(angle) * v + np.sin(angle) * np.cross(axis, v)


def _double_reflection(points: np.ndarray, T: np.ndarray, r0: np.ndarray) -> np.ndarray:
    m = points.shape[0]
    r = np.empty((m, 3))
    r[0] = r0
    for i in range(m - 1):
        v1 = points[i + 1] - points[i]
        c1 = v1 @ v1
        rL = r[i] - (2.0 / c1) * (v1 @ r[i]) * v1
        tL = T[i] - (2.0 / c1) * (v1 @ T[i]) * v1
        v2 = T[i + 1] - tL
        c2 = v2 @ v2
        r[i + 1] = rL if c2 < 1e-300 else rL - (2.0 / c2) * (v2 @ rL) * v2
    return r


def rmf_frame(gamma, grid: GridSpec, closed: bool = False, close_frame: bool = True, velocity=None) -> FramedCurve:
    """Rotation-minimising (Bishop) framing via the double-reflection method.

    For closed curves the transported frame generally fails to close by a
    holonomy angle; with ``close_frame`` that angle is spread linearly along the
    curve, the standard minimal-twist closure. Without it the result is an
    open framed curve with the endpoint appended.
    """
    gamma = np.asarray(gamma, dtype=float)
    d = _velocity(gamma, grid, closed, velocity)
    _check_speed(d)
    T = d / np.linalg.norm(d, axis=1)[:, None]
    r0 = initial_normal(T[0])
    if not closed:
        r = _double_reflection(gamma, T, r0)
        return FramedCurve.adapted(grid, gamma, r, Closure.OPEN, velocity=velocity)
    pts = np.concatenate([gamma, gamma[:1]], axis=0)
    TT = np.concatenate([T, T[:1]], axis=0)
    r = _double_reflection(pts, TT, r0)
    if not close_frame:
        vel = None if velocity is None else np.concatenate([d, d[:1]], axis=0)
        return FramedCurve.adapted(grid, pts, r, Closure.OPEN, velocity=vel)
    hol = np.arctan2(np.dot(np.cross(r[-1], r[0]), T[0]), np.dot(r[-1], r[0]))
    n = grid.n_samples
    V = _rotate_about(r[:-1], T, hol * np.arange(n) / n)
    return FramedCurve.adapted(grid, gamma, V, Closure.CLOSED, velocity=velocity)


def frenet_frame(gamma, grid: GridSpec, closed: bool = False, velocity=None, acceleration=None) -> FramedCurve:
    """Framing by the principal normal."""
    gamma = np.asarray(gamma, dtype=float)
    d = _velocity(gamma, grid, closed, velocity)
    speed = _check_speed(d)
    dd = np.asarray(acceleration, dtype=float) if acceleration is not None else numerics.derivative(d, grid.dt, periodic=closed)
    kappa = np.linalg.norm(np.cross(d, dd), axis=1) / speed**3
    bad = np.flatnonzero(kappa <= 1e-8)
    if bad.size:
        raise VanishingCurvature("Frenet frame undefined where curvature vanishes", bad)
    T = d / speed[:, None]
    N = dd - np.sum(dd * T, axis=1)[:, None] * T
    N /= np.linalg.norm(N, axis=1)[:, None]
    return FramedCurve.adapted(grid, gamma, N, Closure.CLOSED if closed else Closure.OPEN, velocity=velocity)


def twist_rate(c: FramedCurve) -> np.ndarray:
    """Rate of rotation of ``V`` about ``T`` per unit arclength."""
    dV = numerics.derivative(c.V, c.grid.dt, periodic=c.closed)
    return np.sum(dV * c.binormal, axis=1) / c.speed


def rotate_frame(c: FramedCurve, angle) -> FramedCurve:
    """Rotate ``V`` about ``T`` by ``angle`` (scalar or per sample)."""
    angle = np.broadcast_to(np.asarray(angle, dtype=float), (c.gamma.shape[0],))
    V = _rotate_about(c.V, c.tangent, angle)
    return FramedCurve.adapted(c.grid, c.gamma, V, c.closure, velocity=c.velocity)


def add_full_twist(c: FramedCurve, turns: int = 1) -> FramedCurve:
    """Insert ``turns`` full turns of ``V`` about ``T``, spread linearly.

    Changes the linking number of a closed framing by ``turns`` and therefore
    flips its parity when ``turns`` is odd.
    """
    t = c.times
    return rotate_frame(c, 2 * np.pi * turns * t / 2.0)
