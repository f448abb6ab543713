"""Finite differences and quadrature on the uniform parameter grid.

Two sample layouts are used throughout the package:

* open: ``n + 1`` samples at ``t_i = i * dt`` for ``i = 0..n`` (both ends kept);
* periodic: ``n`` samples on ``[0, 2)``; index ``n`` aliases index ``0``.

Anti-periodic data (``f(2) = -f(0)``) is handled by passing ``period_sign=-1``.
"""

from __future__ import annotations

import numpy as np

# sixth-order central stencil for periodic data, fourth-order stencils for open data
_CENTRAL6 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def _periodic_ext(f: np.ndarray, pad: int, period_sign: float) -> np.ndarray:
    head = period_sign * f[:pad]
    tail = period_sign * f[-pad:]
    return np.concatenate([tail, f, head], axis=0)


def derivative(f: np.ndarray, dt: float, periodic: bool = False, period_sign: float = 1.0) -> np.ndarray:
    """Differentiate samples along axis 0 with finite differences.

    Periodic data uses the sixth-order 7-point central stencil and wraps
    around, flipping sign across the seam when ``period_sign == -1``. Open data
    uses the fourth-order 5-point central stencil with one-sided fourth-order
    stencils at the two samples nearest each end.
    """
    f = np.asarray(f)
    if periodic:
        g = _periodic_ext(f, 3, period_sign)
        m = f.shape[0]
        return sum(c * g[k : k + m] for k, c in enumerate(_CENTRAL6) if c != 0.0) / dt
    m = f.shape[0]
    if m < 5:
        raise ValueError("need at least 5 samples to differentiate")
    out = np.empty_like(f, dtype=np.result_type(f, float))
    out[2:-2] = (f[:-4] * _CENTRAL[0] + f[1:-3] * _CENTRAL[1] + f[3:-1] * _CENTRAL[3] + f[4:] * _CENTRAL[4])
    head = f[:5]
    tail = f[-5:][::-1]
    out[0] = np.tensordot(_EDGE0, head, axes=(0, 0))
    out[1] = np.tensordot(_EDGE1, head, axes=(0, 0))
    out[-1] = -np.tensordot(_EDGE0, tail, axes=(0, 0))
    out[-2] = -np.tensordot(_EDGE1, tail, axes=(0, 0))
    return out / dt


def trapezoid_weights(m: int, dt: float, periodic: bool = False) -> np.ndarray:
    """Quadrature weights of the composite trapezoid rule."""
    w = np.full(m, dt)
    if not periodic:
        w[0] = w[-1] = 0.5 * dt
    return w


def integrate(f: np.ndarray, dt: float, periodic: bool = False) -> np.ndarray:
    """Composite trapezoid integral of samples along axis 0."""
    f = np.asarray(f)
    w = trapezoid_weights(f.shape[0], dt, periodic)
    return np.tensordot(w, f, axes=(0, 0))


def cumulative_integral(f: np.ndarray, dt: float, periodic: bool = False, period_sign: float = 1.0) -> np.ndarray:
    """Antiderivative based at zero, evaluated at every sample.

    Composite trapezoid with the Euler-Maclaurin end correction
    ``-dt**2 / 12 * (f'(t) - f'(0))``, which lifts the rule to fourth order for
    partial integrals. Over a full period the correction cancels, so the closing
    value equals the plain periodic trapezoid sum.

    For periodic input the result has ``n + 1`` rows: the value at ``t = 2`` is
    appended so callers can read the closure gap.
    """
    f = np.asarray(f)
    if periodic:
        ext = np.concatenate([f, period_sign * f[:1]], axis=0)
        df = derivative(f, dt, periodic=True, period_sign=period_sign)
        df = np.concatenate([df, period_sign * df[:1]], axis=0)
    else:
        ext = f
        df = derivative(f, dt)
    steps = 0.5 * dt * (ext[1:] + ext[:-1])
    out = np.zeros_like(ext, dtype=np.result_type(ext, float))
    out[1:] = np.cumsum(steps, axis=0)
    out -= (dt * dt / 12.0) * (df - df[:1])
    if periodic and period_sign == 1.0:
        # exact cancellation at the seam
        out[-1] = np.sum(f, axis=0) * dt
    return out
