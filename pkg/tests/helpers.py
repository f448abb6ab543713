"""Shared builders for synthetic curves and quaternionic paths."""

from __future__ import annotations

import numpy as np

from framecurve import frames, generators
from framecurve.curvecore import (
    ClosureClass,
    Field,
    GridSpec,
    QuaternionPath,
    StiefelPoint,
    lift,
    normalize_length,
    orthonormalize,
    to_stiefel,
)


def smooth_open_path(rng: np.random.Generator, grid: GridSpec, modes: int = 3, offset=(1.5, 0.0, 0.0, 0.0), scale: float = 0.5, unit: bool = True) -> QuaternionPath:
    """Random smooth open quaternionic path bounded away from zero."""
    t = grid.times(False)
    c = rng.normal(size=(modes, 2, 4))
    q = np.tile(np.asarray(offset, dtype=float), (t.size, 1))
    for k in range(modes):
        q = q + scale * (np.outer(np.cos(k * np.pi * t / 2), c[k, 0]) + np.outer(np.sin(k * np.pi * t / 2), c[k, 1]))
    path = QuaternionPath(grid, q)
    if unit:
        path = path.replace(q * np.sqrt(2.0 / path.norm2))
    return path


def fourier_pair(rng: np.random.Generator, grid: GridSpec, cls: ClosureClass, modes: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Random complex ``(z, w)`` with integer (loop) or half-integer (anti-loop) frequencies."""
    t = grid.times(True)
    shift = 0.5 if cls is ClosureClass.ANTILOOP else 0.0
    freqs = np.arange(-modes, modes + 1) + shift
    out = []
    for _ in range(2):
        c = (rng.normal(size=freqs.size) + 1j * rng.normal(size=freqs.size)) / (1 + np.abs(freqs))
        out.append(np.exp(1j * np.pi * np.outer(t, freqs)) @ c)
    return out[0], out[1]


def random_stiefel(rng: np.random.Generator, grid: GridSpec, cls: ClosureClass = ClosureClass.LOOP, modes: int = 3) -> StiefelPoint:
    z, w = fourier_pair(rng, grid, cls, modes)
    B = orthonormalize(np.stack([z, w], axis=1), grid)
    return StiefelPoint(grid, B[:, 0], B[:, 1], Field.COMPLEX, cls)


def fourier_plane(grid: GridSpec, m: int, n: int) -> StiefelPoint:
    """The plane spanned by the orthonormal modes ``e^{i pi k t} / sqrt(2)``, ``k = m, n``."""
    t = grid.times(True)
    e = lambda k: np.exp(1j * np.pi * k * t) / np.sqrt(2.0)  # noqa: E731
    return StiefelPoint(grid, e(m), e(n))


def framed(name: str, grid: GridSpec, frame: str = "rmf", twist: int = 0, **kw):
    """Framed generator curve with analytic velocity."""
    gamma, vel = generators.GENERATORS[name](grid, **kw)
    closed = name in generators.CLOSED_GENERATORS
    make = frames.rmf_frame if frame == "rmf" else frames.frenet_frame
    c = make(gamma, grid, closed=closed, velocity=vel)
    return frames.add_full_twist(c, twist) if twist else c


def stiefel_of(c) -> StiefelPoint:
    return to_stiefel(lift(normalize_length(c)))


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def planar_families(rng: np.random.Generator, grid: GridSpec, per: int = 4) -> tuple[list, np.ndarray]:
    """Two separated families of plane curves (oval and three-lobed), randomly rotated and re-seeded."""
    curves, labels = [], []
    for label, base in enumerate([(0.25, 0.0, 0.0), (0.0, 0.3, 0.0)]):
        for _ in range(per):
            coeffs = np.asarray(base) * (1 + 0.15 * rng.uniform(-1, 1)) + 0.02 * rng.normal(size=3) * (np.asarray(base) == 0)
            c, _ = generators.planar_blob(grid, tuple(coeffs))
            c = np.roll(c * np.exp(2j * np.pi * rng.uniform()), int(rng.integers(grid.n_samples)))
            curves.append(c)
            labels.append(label)
    return curves, np.array(labels)
