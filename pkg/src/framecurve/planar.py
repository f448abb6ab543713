"""Square-root transform of plane curves.

A plane curve ``c`` is a complex-valued path and ``s = sqrt(c')`` its
square-root velocity. Writing ``s = a + i b`` gives the real pair ``(a, b)``.
For a closed curve of length 2 this pair is L2 orthonormal, so closed plane
curves modulo translation, scale and rotation are points of a real
Grassmannian of 2-planes.
"""

from __future__ import annotations

import numpy as np

from . import numerics
from .curvecore import ClosureClass, Field, GridSpec, StiefelPoint, orthonormalize, stiefel_residual
from .errors import ClosureViolation, ZeroDerivativeSample


def sqrt_velocity(c, grid: GridSpec, closed: bool = False, velocity=None):
    """Continuous square root of ``c'``.

    Returns ``(s, closure_class)``. For closed curves ``s`` is a loop when the
    tangent winding number is even and an anti-loop when it is odd.
    """
    c = np.asarray(c, dtype=complex)
    dc = np.asarray(velocity, dtype=complex) if velocity is not None else numerics.derivative(c, grid.dt, periodic=closed)
    bad = np.flatnonzero(np.abs(dc) <= 1e-12)
    if bad.size:
        raise ZeroDerivativeSample("plane curve has vanishing derivative", bad)
    s = np.sqrt(dc)
    dots = np.real(s[1:] * np.conj(s[:-1]))
    flips = np.concatenate([[1.0], np.cumprod(np.where(dots < 0, -1.0, 1.0))])
    s = s * flips
    if not closed:
        return s, ClosureClass.OPEN
    cls = ClosureClass.LOOP if np.real(s[-1] * np.conj(s[0])) >= 0 else ClosureClass.ANTILOOP
    return s, cls


def planar_srt(c, grid: GridSpec, closed: bool = True, velocity=None):
    """Square-root transform as a real pair ``(a, b)``.

    Closed curves are rescaled to length 2 and returned as a real
    :class:`StiefelPoint` after polar orthonormalisation. Open curves are
    returned unscaled as an array of shape ``(n + 1, 2)``.
    """
    s, cls = sqrt_velocity(c, grid, closed, velocity)
    if not closed:
        return np.stack([s.real, s.imag], axis=1)
    L = float(grid.weights(True) @ np.abs(s) ** 2)
    s = s * np.sqrt(2.0 / L)
    B = np.stack([s.real, s.imag], axis=1)
    res = stiefel_residual(B, grid)
    if res > 1e-3:
        raise ClosureViolation(f"plane curve does not close (residual {res:.3e})")
    B = orthonormalize(B, grid)
    return StiefelPoint(grid, B[:, 0], B[:, 1], Field.REAL, cls)


def planar_srt_inverse(s, grid: GridSpec | None = None) -> np.ndarray:
    """Integrate ``(a + i b)^2`` back to a plane curve starting at the origin.

    Accepts a real :class:`StiefelPoint` (closed, ``n`` samples returned) or an
    ``(n + 1, 2)`` array for open curves.
    """
    if isinstance(s, StiefelPoint):
        v = (s.z + 1j * s.w) ** 2
        return numerics.cumulative_integral(v, s.grid.dt, periodic=True)[:-1]
    B = np.asarray(s, dtype=float)
    v = (B[:, 0] + 1j * B[:, 1]) ** 2
    return numerics.cumulative_integral(v, grid.dt)
