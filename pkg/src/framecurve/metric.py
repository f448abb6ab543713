"""Inner products, the elastic metric family and shape-space distances."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import numerics
from .curvecore import (
    FramedCurve,
    GrassmannPoint,
    QuaternionPath,
    StiefelPoint,
    check_same_grid,
    gram,
    hopf_map,
)
from .errors import ConstraintViolation, FieldMismatch, NotOnSphere

SPHERE_DIAMETER = np.sqrt(2.0) * np.pi
GRASSMANN_DIAMETER = np.pi / np.sqrt(2.0)


class Space(enum.Enum):
    SPHERE = "sphere"
    GRASSMANN = "grassmann"


# inner products --------------------------------------------------------------


def _c2(x) -> tuple[np.ndarray, np.ndarray, object, bool]:
    """Complex pair samples of a quaternionic path or Stiefel point."""
    if isinstance(x, QuaternionPath):
        return x.z, x.w, x.grid, x.closed
    if isinstance(x, StiefelPoint):
        return x.z, x.w, x.grid, True
    raise TypeError(f"expected QuaternionPath or StiefelPoint, got {type(x).__name__}")


def l2_inner(p: QuaternionPath, q: QuaternionPath) -> float:
    """Real L2 inner product ``integral of Re(p conj(q))``."""
    check_same_grid(p.grid, q.grid)
    if p.closed != q.closed:
        raise ValueError("cannot pair open and closed paths")
    return float(p.weights @ np.sum(p.q * q.q, axis=1))


def hermitian_inner(s0, s1) -> complex:
    """``integral of z0 conj(z1) + w0 conj(w1)``."""
    z0, w0, g0, c0 = _c2(s0)
    z1, w1, g1, c1 = _c2(s1)
    check_same_grid(g0, g1)
    if c0 != c1:
        raise ValueError("cannot pair open and closed paths")
    return complex(g0.weights(c0) @ (z0 * np.conj(z1) + w0 * np.conj(w1)))


def pointwise_c2_inner(s0, s1, i=None):
    """Pointwise ``z0 conj(z1) + w0 conj(w1)`` at sample ``i`` (all samples if ``None``)."""
    z0, w0, g0, _ = _c2(s0)
    z1, w1, g1, _ = _c2(s1)
    check_same_grid(g0, g1)
    val = z0 * np.conj(z1) + w0 * np.conj(w1)
    return val if i is None else complex(val[i])


# elastic metric --------------------------------------------------------------


@dataclass(frozen=True)
class ElasticParams:
    """Weights of the bending (two normal directions), stretching and twisting terms."""

    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    d: float = 1.0

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError("elastic weights must be nonnegative")


@dataclass(frozen=True, eq=False)
class TangentField:
    """Variation ``(nu, W)`` of a framed curve.

    ``nu_prime`` optionally supplies the exact parameter derivative of ``nu``;
    otherwise it is computed by finite differences.
    """

    nu: np.ndarray
    W: np.ndarray
    nu_prime: np.ndarray | None = None

    def d_nu(self, c: FramedCurve) -> np.ndarray:
        if self.nu_prime is not None:
            return np.asarray(self.nu_prime, dtype=float)
        return numerics.derivative(np.asarray(self.nu, dtype=float), c.grid.dt, periodic=c.closed)

    def scaled(self, s: float) -> "TangentField":
        dn = None if self.nu_prime is None else s * np.asarray(self.nu_prime)
        return TangentField(s * np.asarray(self.nu), s * np.asarray(self.W), dn)


def tangency_residual(c: FramedCurve, u: TangentField) -> float:
    """Scale-free violation of the linearised framing constraints."""
    dn = u.d_nu(c)
    W = np.asarray(u.W, dtype=float)
    d = c.d_gamma
    r1 = np.sum(dn * c.V, axis=1) + np.sum(d * W, axis=1)
    r2 = np.sum(W * c.V, axis=1)
    scale = max(np.abs(dn).max(), np.abs(W).max() * np.abs(d).max(), 1e-300)
    return float(max(np.abs(r1).max() / scale, np.abs(r2).max() / max(np.abs(W).max(), 1e-300)))


def _components(c: FramedCurve, u: TangentField):
    dn = u.d_nu(c)
    speed = c.speed
    Ds = dn / speed[:, None]
    T, V, B = c.tangent, c.V, c.binormal
    W = np.asarray(u.W, dtype=float)
    return (
        np.sum(Ds * V, axis=1),
        np.sum(Ds * B, axis=1),
        np.sum(Ds * T, axis=1),
        np.sum(W * B, axis=1),
    )


def elastic_metric(c: FramedCurve, u: TangentField, v: TangentField, p: ElasticParams = ElasticParams(), check: bool = True) -> float:
    """Elastic inner product of two variations of ``c``.

    ``integral of a<D_s nu, V>^2 + b<D_s nu, TxV>^2 + c<D_s nu, T>^2 + d<W, TxV>^2 ds``
    in polarised form, with ``D_s = |gamma'|^-1 d/dt``.
    """
    if check:
        for f in (u, v):
            res = tangency_residual(c, f)
            if res > 1e-4:
                raise ConstraintViolation(f"tangent field violates the framing constraints (residual {res:.2e})")
    cu = _components(c, u)
    cv = _components(c, v)
    wts = np.array([p.a, p.b, p.c, p.d])
    dens = sum(w * x * y for w, x, y in zip(wts, cu, cv))
    return float(c.grid.weights(c.closed) @ (dens * c.speed))


def gS(c: FramedCurve, u: TangentField, v: TangentField, check: bool = True) -> float:
    """The flat member of the family: a quarter of the all-ones elastic metric."""
    return 0.25 * elastic_metric(c, u, v, ElasticParams(1.0, 1.0, 1.0, 1.0), check)


def hopf_pushforward(q: QuaternionPath, p: np.ndarray, eps: float = 1e-5) -> tuple[FramedCurve, TangentField]:
    """Differential of the frame-Hopf map by central finite differences.

    Returns the base framed curve and the variation ``(nu, W)`` (with exact
    ``nu'``) induced by the quaternionic tangent ``p``. The input is treated as
    an open path so the variation is defined for any ``p``.
    """
    qo = q.as_open()
    p = np.asarray(p, dtype=float)
    if p.shape[0] != qo.q.shape[0]:
        p = np.concatenate([p, q.closure_class.sign * p[:1]], axis=0)
    cp = hopf_map(qo.replace(qo.q + eps * p))
    cm = hopf_map(qo.replace(qo.q - eps * p))
    c = hopf_map(qo)
    inv = 0.5 / eps
    nu = (cp.gamma - cm.gamma) * inv
    W = (cp.V - cm.V) * inv
    dn = (cp.velocity - cm.velocity) * inv
    return c, TangentField(nu, W, dn)


# distances --------------------------------------------------------------------


def _angle_between(x: np.ndarray, y: np.ndarray, weights: np.ndarray) -> float:
    """Angle between two nonzero vectors of an L2 space, accurate near 0 and pi."""
    nx = np.sqrt(weights @ np.sum(x * x, axis=1))
    ny = np.sqrt(weights @ np.sum(y * y, axis=1))
    xh, yh = x / nx, y / ny
    d = np.sqrt(weights @ np.sum((xh - yh) ** 2, axis=1))
    s = np.sqrt(weights @ np.sum((xh + yh) ** 2, axis=1))
    return float(2.0 * np.arctan2(d, s))


def sphere_angle(q0: QuaternionPath, q1: QuaternionPath) -> float:
    """Great-circle angle between two points of the radius-sqrt(2) sphere."""
    check_same_grid(q0.grid, q1.grid)
    return _angle_between(q0.q, q1.q, q0.weights)


def check_on_sphere(*qs: QuaternionPath, tol: float = 1e-6) -> None:
    for q in qs:
        r = np.sqrt(q.norm2)
        if abs(r - np.sqrt(2.0)) > tol:
            raise NotOnSphere(f"path has L2 norm {r:.9f}, expected sqrt(2)")


def sphere_distance(q0: QuaternionPath, q1: QuaternionPath, minimize_over_sign: bool = False) -> float:
    """Geodesic distance ``sqrt(2) * arccos(<q0, q1> / 2)`` on the preshape sphere."""
    check_on_sphere(q0, q1)
    check_same_grid(q0.grid, q1.grid)
    theta = sphere_angle(q0, q1)
    if minimize_over_sign:
        theta = min(theta, np.pi - theta)
    return float(np.sqrt(2.0) * theta)


def svd2(G: np.ndarray):
    """Closed-form SVD ``G = X diag(s) Y^H`` of (stacks of) 2x2 matrices.

    Works for real or complex input. Singular values come out descending.
    ``Y`` diagonalises the Hermitian ``G^H G``; the second column of ``X`` is
    the exact orthogonal complement of the first, so ``X`` and ``Y`` are
    unitary to rounding even when ``G`` is singular. Equal singular values keep
    the input basis order.
    """
    G = np.asarray(G)
    cplx = np.iscomplexobj(G)
    H = np.conj(np.swapaxes(G, -1, -2)) @ G
    p = H[..., 0, 0].real
    r = H[..., 1, 1].real
    c = H[..., 0, 1]
    half = 0.5 * (p - r)
    d = np.hypot(half, np.abs(c))
    # leading eigenvector, built from the better-conditioned row
    use_first = half >= 0
    y1a = np.where(use_first, half + d, c)
    y1b = np.where(use_first, np.conj(c), -half + d)
    ny = np.sqrt(np.abs(y1a) ** 2 + np.abs(y1b) ** 2)
    tie = ny <= 1e-300
    y1a = np.where(tie, 1.0, y1a / np.where(tie, 1.0, ny))
    y1b = np.where(tie, 0.0, y1b / np.where(tie, 1.0, ny))
    y2a, y2b = -np.conj(y1b), np.conj(y1a)
    Y = np.stack([np.stack([y1a, y2a], -1), np.stack([y1b, y2b], -1)], -2)
    if not cplx:
        Y = Y.real
    g1 = G @ Y[..., :, :1]
    s1 = np.linalg.norm(g1[..., 0], axis=-1)
    small = s1 <= 1e-300
    x1 = np.where(small[..., None], np.array([1.0, 0.0]), g1[..., 0] / np.where(small, 1.0, s1)[..., None])
    x2 = np.stack([-np.conj(x1[..., 1]), np.conj(x1[..., 0])], -1)
    if not cplx:
        x1, x2 = x1.real, x2.real
    s2c = np.sum(np.conj(x2) * (G @ Y[..., :, 1:])[..., 0], axis=-1)
    s2 = np.abs(s2c)
    # rotate the second right vector so the second singular value is real
    ph = np.where(s2 > 1e-300, s2c / np.where(s2 > 1e-300, s2, 1.0), 1.0)
    Y = Y.astype(np.result_type(Y, ph), copy=True)
    Y[..., :, 1] = Y[..., :, 1] * np.conj(ph)[..., None]
    X = np.stack([x1, x2], -1)
    return X, np.stack([s1, s2], -1), Y


def _stiefel_args(P0, P1) -> tuple[StiefelPoint, StiefelPoint]:
    S0 = P0.representative if isinstance(P0, GrassmannPoint) else P0
    S1 = P1.representative if isinstance(P1, GrassmannPoint) else P1
    check_same_grid(S0.grid, S1.grid)
    if S0.field is not S1.field:
        raise FieldMismatch("cannot compare real and complex planes")
    return S0, S1


def principal_bases(S0: StiefelPoint, S1: StiefelPoint):
    """Principal vectors of two planes.

    Returns ``(B0, B1, sigma, theta)`` where the columns of ``B0 = S0.basis U0``
    and ``B1 = S1.basis U1`` pair up with cross inner products
    ``diag(sigma)`` and Jordan angles ``theta`` (ascending).
    """
    wts = S0.grid.weights(True)
    A0, A1 = S0.basis, S1.basis
    G = gram(A0, A1, wts)
    X, s, Y = svd2(G)
    B0 = A0 @ np.conj(X)
    B1 = A1 @ np.conj(Y)
    R = B0 - B1 * s[None, :]
    rn = np.sqrt(np.maximum(wts @ np.abs(R) ** 2, 0.0))
    theta = np.arctan2(rn, np.clip(s, 0.0, 1.0))
    return B0, B1, s, theta


def grassmann_distance(P0, P1) -> tuple[float, tuple[float, float]]:
    """Geodesic distance between 2-planes and their Jordan angles ``(theta_z, theta_w)``."""
    S0, S1 = _stiefel_args(P0, P1)
    _, _, _, theta = principal_bases(S0, S1)
    return float(np.hypot(theta[0], theta[1])), (float(theta[0]), float(theta[1]))


def normalized_distance(raw: float, space: Space) -> float:
    """Divide by the diameter of the sphere or the Grassmannian."""
    if raw < 0:
        raise ValueError("distance must be nonnegative")
    diam = SPHERE_DIAMETER if Space(space) is Space.SPHERE else GRASSMANN_DIAMETER
    return float(raw / diam)
