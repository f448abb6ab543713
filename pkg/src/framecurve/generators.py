"""Synthetic test curves on the parameter interval ``[0, 2]``.

Each generator returns ``(gamma, velocity)`` sampled on the grid with the
velocity evaluated analytically. Closed generators return ``n`` samples, open
ones ``n + 1``.
"""

from __future__ import annotations

import numpy as np

from .curvecore import GridSpec


def _t(grid: GridSpec, closed: bool) -> np.ndarray:
    return grid.times(closed)


def segment(grid: GridSpec, length: float = 2.0):
    t = _t(grid, False)
    s = length / 2.0
    gamma = np.stack([s * t, 0 * t, 0 * t], axis=1)
    vel = np.tile([s, 0.0, 0.0], (t.size, 1))
    return gamma, vel


def helix(grid: GridSpec, radius: float = 1.0, pitch: float = 0.5, turns: float = 2.0):
    """Open circular helix with ``turns`` turns; ``pitch`` is the rise per radian."""
    t = _t(grid, False)
    om = np.pi * turns
    a = om * t
    gamma = np.stack([radius * np.cos(a), radius * np.sin(a), pitch * a], axis=1)
    vel = om * np.stack([-radius * np.sin(a), radius * np.cos(a), np.full_like(a, pitch)], axis=1)
    return gamma, vel


def circle(grid: GridSpec, radius: float = 1.0, turns: int = 1):
    t = _t(grid, True)
    a = np.pi * turns * t
    gamma = radius * np.stack([np.cos(a), np.sin(a), 0 * a], axis=1)
    vel = np.pi * turns * radius * np.stack([-np.sin(a), np.cos(a), 0 * a], axis=1)
    return gamma, vel


def ellipse(grid: GridSpec, a: float = 1.0, b: float = 0.6, tilt: float = 0.0):
    t = _t(grid, True)
    p = np.pi * t
    x, y = a * np.cos(p), b * np.sin(p)
    dx, dy = -np.pi * a * np.sin(p), np.pi * b * np.cos(p)
    z, dz = tilt * np.sin(2 * p), 2 * np.pi * tilt * np.cos(2 * p)
    return np.stack([x, y, z], axis=1), np.stack([dx, dy, dz], axis=1)


def trefoil(grid: GridSpec, scale: float = 1.0):
    t = _t(grid, True)
    p = np.pi * t
    gamma = scale * np.stack([np.sin(p) + 2 * np.sin(2 * p), np.cos(p) - 2 * np.cos(2 * p), -np.sin(3 * p)], axis=1)
    vel = scale * np.pi * np.stack([np.cos(p) + 4 * np.cos(2 * p), -np.sin(p) + 4 * np.sin(2 * p), -3 * np.cos(3 * p)], axis=1)
    return gamma, vel


def torus_spiral(grid: GridSpec, R: float = 2.0, r: float = 0.6, windings: int = 5, loops: int = 1):
    """Closed spiral winding ``windings`` times around the tube of a torus."""
    t = _t(grid, True)
    p = np.pi * t
    a, b = loops * p, windings * p
    rad = R + r * np.cos(b)
    drad = -r * windings * np.pi * np.sin(b)
    gamma = np.stack([rad * np.cos(a), rad * np.sin(a), r * np.sin(b)], axis=1)
    vel = np.stack(
        [
            drad * np.cos(a) - rad * loops * np.pi * np.sin(a),
            drad * np.sin(a) + rad * loops * np.pi * np.cos(a),
            r * windings * np.pi * np.cos(b),
        ],
        axis=1,
    )
    return gamma, vel


def fourier_loop(grid: GridSpec, rng: np.random.Generator, modes: int = 3, decay: float = 1.5):
    """Random smooth closed curve: a circle plus decaying Fourier perturbations."""
    t = _t(grid, True)
    p = np.pi * t
    gamma = np.stack([np.cos(p), np.sin(p), 0 * p], axis=1)
    vel = np.pi * np.stack([-np.sin(p), np.cos(p), 0 * p], axis=1)
    for k in range(1, modes + 1):
        amp = 0.35 / k**decay
        c = rng.normal(size=(2, 3)) * amp
        gamma = gamma + np.cos(k * p)[:, None] * c[0] + np.sin(k * p)[:, None] * c[1]
        vel = vel + k * np.pi * (-np.sin(k * p)[:, None] * c[0] + np.cos(k * p)[:, None] * c[1])
    return gamma, vel


def planar_blob(grid: GridSpec, coeffs=(0.0, 0.2, 0.1)):
    """Closed star-shaped plane curve ``r(p) = 1 + sum c_k cos((k+1) p)`` as complex samples."""
    t = _t(grid, True)
    p = np.pi * t
    r = np.ones_like(p)
    dr = np.zeros_like(p)
    for k, c in enumerate(coeffs, start=1):
        r = r + c * np.cos((k + 1) * p)
        dr = dr - c * (k + 1) * np.sin((k + 1) * p)
    c_ = r * np.exp(1j * p)
    dc = np.pi * (dr + 1j * r) * np.exp(1j * p)
    return c_, dc


GENERATORS = {
    "segment": segment,
    "helix": helix,
    "circle": circle,
    "ellipse": ellipse,
    "trefoil": trefoil,
    "torus-spiral": torus_spiral,
}

CLOSED_GENERATORS = {"circle", "ellipse", "trefoil", "torus-spiral"}
