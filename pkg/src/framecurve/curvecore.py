"""Discretised framed curves, quaternionic paths and the frame-Hopf map.

All curves live on the parameter interval ``[0, 2]`` sampled uniformly.
Open data keeps both endpoints (``n + 1`` rows); closed data keeps ``n`` rows
on ``[0, 2)`` and treats index ``n`` as an alias of index ``0``. Anti-loops
(quaternionic paths with ``q(2) = -q(0)``) use the same storage and flip sign
on wrap-around.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np

from . import numerics
from .errors import (
    ClosureViolation,
    DegenerateCurve,
    DegenerateFrame,
    FieldMismatch,
    GridMismatch,
    NotClosed,
    ZeroQuaternionSample,
)
from .quaternion import I, J, conj_action, from_complex, matrix_to_quaternion, qnorm2

CLOSURE_TOL = 1e-6
UNIT_TOL = 1e-10
ORTHO_TOL = 1e-8
STIEFEL_TOL = 1e-8


class Closure(enum.Enum):
    OPEN = "open"
    CLOSED = "closed"


class ClosureClass(enum.Enum):
    OPEN = "open"
    LOOP = "loop"
    ANTILOOP = "antiloop"

    @property
    def closed(self) -> bool:
        return self is not ClosureClass.OPEN

    @property
    def sign(self) -> float:
        return -1.0 if self is ClosureClass.ANTILOOP else 1.0


class Field(enum.Enum):
    REAL = "real"
    COMPLEX = "complex"


class Sign(enum.Enum):
    PLUS = 1
    MINUS = -1


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[0, 2]`` with ``n_samples`` steps."""

    n_samples: int

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 8:
            raise ValueError(f"n_samples must be an integer >= 8, got {self.n_samples}")

    @property
    def dt(self) -> float:
        return 2.0 / self.n_samples

    def n_points(self, closed: bool) -> int:
        return self.n_samples if closed else self.n_samples + 1

    def times(self, closed: bool = False) -> np.ndarray:
        return np.arange(self.n_points(closed)) * self.dt

    def weights(self, closed: bool = False) -> np.ndarray:
        return numerics.trapezoid_weights(self.n_points(closed), self.dt, periodic=closed)


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def check_same_grid(*grids: GridSpec) -> None:
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatch(f"grid mismatch: {first.n_samples} vs {g.n_samples} samples; resample first")


def sample_periodic(values: np.ndarray, grid: GridSpec, t: np.ndarray, sign: float = 1.0) -> np.ndarray:
    """Linear interpolation of (anti-)periodic samples at arbitrary parameters."""
    values = np.asarray(values)
    t = np.asarray(t, dtype=float)
    n = grid.n_samples
    x = t / grid.dt
    k = np.floor(x).astype(int)
    frac = x - k
    laps0, i0 = np.divmod(k, n)
    laps1, i1 = np.divmod(k + 1, n)
    s0 = np.where(laps0 % 2 == 0, 1.0, sign)
    s1 = np.where(laps1 % 2 == 0, 1.0, sign)
    extra = (slice(None),) + (None,) * (values.ndim - 1)
    return (s0 * (1 - frac))[extra] * values[i0] + (s1 * frac)[extra] * values[i1]


def sample_open(values: np.ndarray, grid: GridSpec, t: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    t = np.clip(np.asarray(t, dtype=float), 0.0, 2.0)
    x = t / grid.dt
    k = np.minimum(np.floor(x).astype(int), grid.n_samples - 1)
    frac = x - k
    extra = (slice(None),) + (None,) * (values.ndim - 1)
    return (1 - frac)[extra] * values[k] + frac[extra] * values[k + 1]


@dataclass(frozen=True, eq=False)
class FramedCurve:
    """A discretised framed curve ``(gamma, V)``.

    Attributes:
        grid: parameter grid.
        gamma: base points, shape ``(m, 3)``.
        V: unit normal field, shape ``(m, 3)``.
        closure: ``Closure.CLOSED`` for loops (``m == n``) else open (``m == n + 1``).
        velocity: optional exact samples of ``gamma'``; when absent the velocity is
            obtained by finite differences.
    """

    grid: GridSpec
    gamma: np.ndarray
    V: np.ndarray
    closure: Closure = Closure.OPEN
    velocity: np.ndarray | None = None
    check: bool = dc_field(default=True, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "gamma", _frozen(self.gamma))
        object.__setattr__(self, "V", _frozen(self.V))
        if self.velocity is not None:
            object.__setattr__(self, "velocity", _frozen(self.velocity))
        m = self.grid.n_points(self.closed)
        for name in ("gamma", "V"):
            arr = getattr(self, name)
            if arr.shape != (m, 3):
                raise ValueError(f"{name} must have shape {(m, 3)}, got {arr.shape}")
        if self.velocity is not None and self.velocity.shape != (m, 3):
            raise ValueError("velocity shape does not match gamma")
        if self.check:
            self.validate()

    @property
    def closed(self) -> bool:
        return self.closure is Closure.CLOSED

    def validate(self) -> None:
        norms = np.linalg.norm(self.V, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_TOL)
        if bad.size:
            raise DegenerateFrame(f"V is not unit length at samples {bad[:10].tolist()}")
        speed = self.speed
        bad = np.flatnonzero(~(speed > 0))
        if bad.size:
            from .errors import DegenerateSpeed

            raise DegenerateSpeed("curve has vanishing speed", bad)
        dots = np.abs(np.sum(self.tangent * self.V, axis=1))
        bad = np.flatnonzero(dots > ORTHO_TOL)
        if bad.size:
            raise DegenerateFrame(f"V is not normal to the tangent at samples {bad[:10].tolist()}")

    @property
    def d_gamma(self) -> np.ndarray:
        if self.velocity is not None:
            return self.velocity
        return numerics.derivative(self.gamma, self.grid.dt, periodic=self.closed)

    @property
    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.d_gamma, axis=1)

    @property
    def tangent(self) -> np.ndarray:
        d = self.d_gamma
        return d / np.linalg.norm(d, axis=1)[:, None]

    @property
    def binormal(self) -> np.ndarray:
        """``T x V``."""
        return np.cross(self.tangent, self.V)

    @property
    def length(self) -> float:
        return float(self.grid.weights(self.closed) @ self.speed)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times(self.closed)

    @classmethod
    def adapted(cls, grid: GridSpec, gamma, V, closure: Closure = Closure.OPEN, velocity=None) -> "FramedCurve":
        """Build a framed curve after projecting ``V`` onto the discrete normal planes."""
        gamma = np.asarray(gamma, dtype=float)
        closed = closure is Closure.CLOSED
        d = np.asarray(velocity, dtype=float) if velocity is not None else numerics.derivative(gamma, grid.dt, periodic=closed)
        T = d / np.linalg.norm(d, axis=1)[:, None]
        V = np.asarray(V, dtype=float)
        V = V - np.sum(V * T, axis=1)[:, None] * T
        V = V / np.linalg.norm(V, axis=1)[:, None]
        return cls(grid, gamma, V, closure, velocity=velocity)

    def with_gamma(self, gamma: np.ndarray, velocity=None) -> "FramedCurve":
        return FramedCurve(self.grid, gamma, self.V, self.closure, velocity=velocity)

    def closure_gap(self) -> float:
        """Largest mismatch of position, frame and tangent across ``t = 2``.

        For open curves compares the last sample with the first; closed curves
        close by construction only when their velocity integrates to zero, so the
        gap reported there is ``|integral of gamma'|``.
        """
        if self.closed:
            return float(np.linalg.norm(numerics.integrate(self.d_gamma, self.grid.dt, periodic=True)))
        T = self.tangent
        return float(
            max(
                np.linalg.norm(self.gamma[-1] - self.gamma[0]),
                np.linalg.norm(self.V[-1] - self.V[0]),
                np.linalg.norm(T[-1] - T[0]),
                abs(self.speed[-1] - self.speed[0]),
            )
        )


@dataclass(frozen=True, eq=False)
class QuaternionPath:
    """Quaternion-valued path ``q = z + w j`` sampled on a grid.

    ``q`` has shape ``(n + 1, 4)`` for open paths and ``(n, 4)`` for loops and
    anti-loops.
    """

    grid: GridSpec
    q: np.ndarray
    closure_class: ClosureClass = ClosureClass.OPEN

    def __post_init__(self):
        object.__setattr__(self, "q", _frozen(self.q))
        m = self.grid.n_points(self.closure_class.closed)
        if self.q.shape != (m, 4):
            raise ValueError(f"q must have shape {(m, 4)}, got {self.q.shape}")

    @property
    def closed(self) -> bool:
        return self.closure_class.closed

    @property
    def z(self) -> np.ndarray:
        return self.q[:, 0] + 1j * self.q[:, 1]

    @property
    def w(self) -> np.ndarray:
        return self.q[:, 2] + 1j * self.q[:, 3]

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights(self.closed)

    @property
    def norm2(self) -> float:
        return float(self.weights @ qnorm2(self.q))

    def open_samples(self) -> np.ndarray:
        """Samples including ``t = 2`` (wrap-around sign applied for anti-loops)."""
        if not self.closed:
            return np.asarray(self.q)
        return np.concatenate([self.q, self.closure_class.sign * self.q[:1]], axis=0)

    def as_open(self) -> "QuaternionPath":
        return QuaternionPath(self.grid, self.open_samples(), ClosureClass.OPEN)

    def replace(self, q: np.ndarray) -> "QuaternionPath":
        return QuaternionPath(self.grid, q, self.closure_class)

    def stiefel_residual(self) -> float:
        """Relative violation of L2 equinorm/orthogonality of ``(z, w)``."""
        wts = self.weights
        z, w = self.z, self.w
        nz = wts @ np.abs(z) ** 2
        nw = wts @ np.abs(w) ** 2
        zw = wts @ (z * np.conj(w))
        total = nz + nw
        return float(max(abs(nz - nw), 2 * abs(zw)) / total)

    def sample(self, t: np.ndarray) -> np.ndarray:
        if self.closed:
            return sample_periodic(self.q, self.grid, t, self.closure_class.sign)
        return sample_open(self.q, self.grid, t)


@dataclass(frozen=True, eq=False)
class StiefelPoint:
    """Orthonormal pair ``(z, w)`` of scalar loops or anti-loops."""

    grid: GridSpec
    z: np.ndarray
    w: np.ndarray
    field: Field = Field.COMPLEX
    closure_class: ClosureClass = ClosureClass.LOOP
    check: bool = dc_field(default=True, repr=False)

    def __post_init__(self):
        dtype = complex if self.field is Field.COMPLEX else float
        z = np.asarray(self.z)
        w = np.asarray(self.w)
        if self.field is Field.REAL and (np.iscomplexobj(z) or np.iscomplexobj(w)):
            if np.abs(np.imag(z)).max() > 0 or np.abs(np.imag(w)).max() > 0:
                raise ValueError("real Stiefel point with complex entries")
            z, w = z.real, w.real
        object.__setattr__(self, "z", _frozen(z, dtype))
        object.__setattr__(self, "w", _frozen(w, dtype))
        if not self.closure_class.closed:
            raise NotClosed("Stiefel points represent closed curves")
        n = self.grid.n_samples
        if self.z.shape != (n,) or self.w.shape != (n,):
            raise ValueError(f"z and w must have shape {(n,)}")
        if self.check:
            res = stiefel_residual(self.basis, self.grid)
            if res > STIEFEL_TOL:
                raise ClosureViolation(f"not an orthonormal pair (residual {res:.3e})")

    @property
    def basis(self) -> np.ndarray:
        return np.stack([self.z, self.w], axis=1)

    @property
    def closed(self) -> bool:
        return True

    def rebase(self, U: np.ndarray) -> "StiefelPoint":
        """Right-multiply the basis by a 2x2 unitary (or orthogonal) matrix."""
        B = self.basis @ np.asarray(U)
        return StiefelPoint(self.grid, B[:, 0], B[:, 1], self.field, self.closure_class)

    def with_basis(self, B: np.ndarray, check: bool = True) -> "StiefelPoint":
        return StiefelPoint(self.grid, B[:, 0], B[:, 1], self.field, self.closure_class, check)

    def to_quaternion_path(self) -> QuaternionPath:
        if self.field is not Field.COMPLEX:
            raise FieldMismatch("only complex Stiefel points have a quaternionic form")
        return QuaternionPath(self.grid, from_complex(self.z, self.w), self.closure_class)

    @classmethod
    def from_quaternion_path(cls, q: QuaternionPath, check: bool = True) -> "StiefelPoint":
        if not q.closed:
            raise NotClosed("open quaternionic path has no Stiefel representation")
        return cls(q.grid, q.z, q.w, Field.COMPLEX, q.closure_class, check)


@dataclass(frozen=True, eq=False)
class GrassmannPoint:
    """The 2-plane spanned by a Stiefel representative."""

    representative: StiefelPoint

    @property
    def grid(self) -> GridSpec:
        return self.representative.grid

    @property
    def field(self) -> Field:
        return self.representative.field


def gram(A: np.ndarray, B: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """L2 cross-Gram ``G[j, k] = <A_j, B_k>`` (linear in the first slot)."""
    return (A * weights[:, None]).T @ np.conj(B)


def stiefel_residual(B: np.ndarray, grid: GridSpec) -> float:
    G = gram(B, B, grid.weights(True))
    return float(np.abs(G - np.eye(B.shape[1])).max())


def _inv_sqrt_hermitian(G: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(G)
    return (vecs / np.sqrt(vals)) @ np.conj(vecs).T


def orthonormalize(B: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Polar orthonormalisation ``B G^{-1/2}``; keeps the spanned plane."""
    M = np.conj(gram(B, B, grid.weights(True)))  # M[j, k] = <b_k, b_j>
    return B @ _inv_sqrt_hermitian(M)


# frame-Hopf map ------------------------------------------------------------


def _check_nonzero(q: np.ndarray) -> None:
    bad = np.flatnonzero(np.sqrt(qnorm2(q)) <= 1e-12)
    if bad.size:
        raise ZeroQuaternionSample("quaternionic path vanishes", bad)


def hopf_map(q: QuaternionPath) -> FramedCurve:
    """Frame-Hopf map ``q -> (integral of conj(q) i q, conj(q) j q / |q|^2)``.

    The base curve starts at the origin. A loop or anti-loop whose ``(z, w)``
    are L2 equinorm and orthogonal (relative tolerance ``CLOSURE_TOL``) maps to
    a closed framed curve; any other input maps to an open curve, wrapping
    closed inputs out to ``t = 2``.
    """
    _check_nonzero(q.q)
    dt = q.grid.dt
    if q.closed and q.stiefel_residual() < CLOSURE_TOL:
        vel = conj_action(q.q, np.broadcast_to(I[1:], (q.q.shape[0], 3)))
        V = conj_action(q.q, np.broadcast_to(J[1:], (q.q.shape[0], 3))) / qnorm2(q.q)[:, None]
        gamma = numerics.cumulative_integral(vel, dt, periodic=True)[:-1]
        return FramedCurve(q.grid, gamma, V, Closure.CLOSED, velocity=vel)
    qq = q.open_samples()
    vel = conj_action(qq, np.broadcast_to(I[1:], (qq.shape[0], 3)))
    V = conj_action(qq, np.broadcast_to(J[1:], (qq.shape[0], 3))) / qnorm2(qq)[:, None]
    if q.closed:
        # velocity is periodic even for anti-loops; use periodic end corrections
        gamma = numerics.cumulative_integral(vel[:-1], dt, periodic=True)
    else:
        gamma = numerics.cumulative_integral(vel, dt)
    return FramedCurve(q.grid, gamma, V, Closure.OPEN, velocity=vel)


def _unit_lift(R: np.ndarray) -> np.ndarray:
    u = matrix_to_quaternion(R)
    dots = np.sum(u[1:] * u[:-1], axis=1)
    flips = np.concatenate([[1.0], np.cumprod(np.where(dots < 0, -1.0, 1.0))])
    return u * flips[:, None]


def frame_matrices(c: FramedCurve) -> np.ndarray:
    T = c.tangent
    return np.stack([T, c.V, np.cross(T, c.V)], axis=-1)


def lift(c: FramedCurve, sign: Sign = Sign.PLUS) -> QuaternionPath:
    """Quaternionic lift ``q`` with ``hopf_map(q) ~= c``.

    At every sample the frame ``(T, V, T x V)`` is converted to a unit
    quaternion ``u`` with ``conj(u) i u = T`` and ``conj(u) j u = V``; signs are
    propagated greedily for continuity and ``q = sqrt(|gamma'|) u``. For closed
    curves the closure class is read off the sign needed to continue from the
    last sample back onto the first. ``Sign.PLUS`` makes the real part of
    ``q(0)`` non-negative.

    Continuity fails if the frame turns by more than 90 degrees between samples;
    that is a grid-resolution problem and must be fixed by resampling.
    """
    R = frame_matrices(c)
    err = np.abs(np.swapaxes(R, 1, 2) @ R - np.eye(3)).max(axis=(1, 2))
    if err.max() > 1e-6:
        raise DegenerateFrame(f"frame is not orthonormal (error {err.max():.2e})")
    u = _unit_lift(R)
    first = u[0]
    lead = first[np.flatnonzero(np.abs(first) > 1e-12)[0]] if first[0] == 0 else first[0]
    s = (1.0 if lead >= 0 else -1.0) * sign.value
    q = s * np.sqrt(c.speed)[:, None] * u
    if c.closed:
        cls = ClosureClass.LOOP if np.dot(u[-1], u[0]) >= 0 else ClosureClass.ANTILOOP
    else:
        cls = ClosureClass.OPEN
    return QuaternionPath(c.grid, q, cls)


def linking_parity(c: FramedCurve) -> Parity:
    """Parity of the linking number of ``gamma`` with its push-off along ``V``.

    The framing loop of a framed knot is null-homotopic in SO(3) exactly when
    the linking number is odd, so anti-loop lifts have even parity and loop
    lifts odd parity (a planar circle with its in-plane normal is unlinked from
    its push-off and lifts to an anti-loop).
    """
    if not c.closed:
        raise NotClosed("linking parity is only defined for closed framed curves")
    cls = lift(c).closure_class
    return Parity.EVEN if cls is ClosureClass.ANTILOOP else Parity.ODD


def normalize_length(c: FramedCurve) -> FramedCurve:
    """Scale the base curve uniformly to length 2."""
    L = c.length
    if not L > 1e-12:
        raise DegenerateCurve(f"curve length {L:.3e} is too small to normalise")
    s = 2.0 / L
    vel = None if c.velocity is None else c.velocity * s
    return FramedCurve(c.grid, c.gamma * s, c.V, c.closure, velocity=vel)


def to_stiefel(q: QuaternionPath) -> StiefelPoint:
    """Project a closed lift onto the Stiefel manifold by polar orthonormalisation."""
    if not q.closed:
        raise NotClosed("to_stiefel needs a loop or anti-loop")
    B = np.stack([q.z, q.w], axis=1)
    res = stiefel_residual(B, q.grid)
    if res > 1e-3:
        raise ClosureViolation(f"input does not represent a closed length-2 framed curve (residual {res:.3e})")
    P = orthonormalize(B, q.grid)
    disp = np.sqrt(q.grid.dt * np.sum(np.abs(P - B) ** 2))
    if disp > 1e-4:
        raise ClosureViolation(f"Stiefel projection moved the input by {disp:.3e}")
    return StiefelPoint(q.grid, P[:, 0], P[:, 1], Field.COMPLEX, q.closure_class)


def closure_class_of(values: np.ndarray, tol: float = CLOSURE_TOL) -> ClosureClass:
    """Classify open samples ``(n + 1, d)`` by comparing the last row with +-first."""
    values = np.asarray(values)
    scale = max(np.abs(values).max(), 1e-300)
    if np.abs(values[-1] - values[0]).max() <= tol * scale:
        return ClosureClass.LOOP
    if np.abs(values[-1] + values[0]).max() <= tol * scale:
        return ClosureClass.ANTILOOP
    return ClosureClass.OPEN


def resample(obj, new_grid: GridSpec):
    """Linear resampling of a :class:`FramedCurve` or :class:`QuaternionPath`."""
    if isinstance(obj, QuaternionPath):
        t = new_grid.times(obj.closed)
        return QuaternionPath(new_grid, obj.sample(t), obj.closure_class)
    if isinstance(obj, FramedCurve):
        if obj.grid == new_grid:
            return obj
        closed = obj.closed
        t = new_grid.times(closed)
        if closed:
            gamma = sample_periodic(obj.gamma, obj.grid, t)
            V = sample_periodic(obj.V, obj.grid, t)
        else:
            gamma = sample_open(obj.gamma, obj.grid, t)
            V = sample_open(obj.V, obj.grid, t)
        return FramedCurve.adapted(new_grid, gamma, V, obj.closure)
    raise TypeError(f"cannot resample {type(obj).__name__}")
