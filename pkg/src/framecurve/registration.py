"""Registration over rotations, reparameterisations, seed shifts and frame twists.

Paths are either :class:`QuaternionPath` (open or closed) or
:class:`StiefelPoint`. Internally both are flattened to real sample arrays so
that the dynamic-programming matcher and the warp action share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curvecore import (
    Field,
    GridSpec,
    QuaternionPath,
    StiefelPoint,
    check_same_grid,
    orthonormalize,
    sample_open,
    sample_periodic,
)
from .errors import (
    NonMonotoneWarp,
    NotClosed,
    OrthogonalInputs,
    ParityMismatch,
    PointwiseOrthogonal,
    SameOrbit,
)
from .metric import grassmann_distance, principal_bases, sphere_distance, svd2
from .numerics import cumulative_integral, derivative
from .quaternion import ONE, qconj, qmul, qnormalize

EPS_TWIST = 1e-8


# warps -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Warp:
    """Piecewise-linear reparameterisation sampled at ``t_0..t_n``.

    Open warps fix both ends of ``[0, 2]``. Closed warps are lifts of circle
    diffeomorphisms and satisfy ``rho(t + 2) = rho(t) + 2``.
    """

    grid: GridSpec
    values: np.ndarray
    closed: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.n_samples + 1,):
            raise ValueError("warp needs n + 1 samples")
        if not np.all(np.diff(v) > 0):
            raise NonMonotoneWarp("warp is not strictly increasing")
        if self.closed:
            if abs(v[-1] - v[0] - 2.0) > 1e-9:
                raise NonMonotoneWarp("closed warp must advance by one period")
        elif abs(v[0]) > 1e-9 or abs(v[-1] - 2.0) > 1e-9:
            raise NonMonotoneWarp("open warp must fix the endpoints")

    @classmethod
    def identity(cls, grid: GridSpec, closed: bool = False) -> "Warp":
        return cls(grid, grid.times(False), closed)

    @classmethod
    def shift(cls, grid: GridSpec, s: int) -> "Warp":
        return cls(grid, grid.times(False) + s * grid.dt, True)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        knots = self.grid.times(False)
        if not self.closed:
            return np.interp(t, knots, self.values)
        laps = np.floor(t / 2.0)
        return np.interp(t - 2.0 * laps, knots, self.values) + 2.0 * laps

    def derivative(self) -> np.ndarray:
        """Slope at the knots by central differences (one-sided at open ends)."""
        v, dt = self.values, self.grid.dt
        if self.closed:
            ext = np.concatenate([[v[-2] - 2.0], v, [v[1] + 2.0]])
            return (ext[2:] - ext[:-2]) / (2 * dt)
        return np.gradient(v, dt, edge_order=1)

    def compose(self, other: "Warp") -> "Warp":
        """``self o other``."""
        check_same_grid(self.grid, other.grid)
        return Warp(self.grid, self(other.values), self.closed or other.closed)

    def inverse(self) -> "Warp":
        knots = self.grid.times(False)
        if not self.closed:
            return Warp(self.grid, np.interp(knots, self.values, knots))
        ext_v = np.concatenate([self.values[:-1] - 2.0, self.values, self.values[1:] + 2.0])
        ext_t = np.concatenate([knots[:-1] - 2.0, knots, knots[1:] + 2.0])
        return Warp(self.grid, np.interp(knots, ext_v, ext_t), True)

    def deviation(self) -> float:
        """Largest distance from the identity (up to a constant shift for closed warps)."""
        d = self.values - self.grid.times(False)
        if self.closed:
            d = d - np.round(d[0] / 2.0) * 2.0
        return float(np.abs(d).max())


# flattened samples -------------------------------------------------------------


def _basis_real(B: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(B):
        return np.concatenate([B.real, B.imag], axis=1)
    return np.asarray(B, dtype=float)


def _values(x) -> np.ndarray:
    """Stored samples as a 2-d array (quaternion components or complex basis)."""
    if isinstance(x, QuaternionPath):
        return np.asarray(x.q)
    if isinstance(x, StiefelPoint):
        return x.basis
    raise TypeError(f"expected QuaternionPath or StiefelPoint, got {type(x).__name__}")


def _open_real(x) -> np.ndarray:
    """Real samples including ``t = 2`` (sign-flipped for anti-loops)."""
    if isinstance(x, QuaternionPath):
        return x.open_samples()
    B = _basis_real(x.basis)
    return np.concatenate([B, x.closure_class.sign * B[:1]], axis=0)


def _rebuild(x, vals: np.ndarray, orthonormal: bool = True):
    if isinstance(x, QuaternionPath):
        return x.replace(vals)
    if orthonormal:
        vals = orthonormalize(vals, x.grid)
    return x.with_basis(vals)


def _l2_gap(x0, x1) -> float:
    r0, r1 = _open_real(x0), _open_real(x1)
    w = x0.grid.weights(False)
    return float(w @ np.sum((r0 - r1) ** 2, axis=1))


def _twist_gap(x0, x1) -> float:
    """Squared L2 gap after the pointwise optimal twist of ``x1``."""
    r0, r1, r1i = _open_real(x0), _open_real(x1), _open_real(apply_twist(x1, 1j))
    w = x0.grid.weights(False)
    pair = np.hypot(np.sum(r0 * r1, axis=1), np.sum(r0 * r1i, axis=1))
    return float(w @ (np.sum(r0 * r0, axis=1) + np.sum(r1 * r1, axis=1) - 2 * pair))


# group actions ---------------------------------------------------------------


def apply_warp(x, rho: Warp):
    """Reparameterise ``x -> sqrt(rho') (x o rho)``.

    ``rho'`` comes from central differences of the warp and ``x o rho`` from
    linear interpolation. The discrete result is rescaled to the input's L2
    norm (Stiefel points are re-orthonormalised) so the action is an exact
    isometry on the grid.
    """
    check_same_grid(x.grid, rho.grid)
    d = rho.derivative()
    if not np.all(d > 0):
        raise NonMonotoneWarp("warp derivative is not positive")
    grid = x.grid
    vals = _values(x)
    if x.closed:
        out = sample_periodic(vals, grid, rho.values[:-1], x.closure_class.sign) * np.sqrt(d[:-1])[:, None]
    else:
        out = sample_open(vals, grid, rho.values) * np.sqrt(d)[:, None]
    if isinstance(x, QuaternionPath):
        w = grid.weights(x.closed)
        n_in = w @ np.sum(vals * vals, axis=1)
        n_out = w @ np.sum(out * out, axis=1)
        out = out * np.sqrt(n_in / n_out)
    return _rebuild(x, out)


def su2_matrix(A: np.ndarray) -> np.ndarray:
    """2x2 special unitary acting on ``(z, w)`` rows like right multiplication by ``A``."""
    a = A[0] + 1j * A[1]
    b = A[2] + 1j * A[3]
    return np.array([[a, b], [-np.conj(b), np.conj(a)]])


def apply_rotation(x, A: np.ndarray):
    """Right multiplication by a unit quaternion, rotating the framed curve by ``h(A)``."""
    A = np.asarray(A, dtype=float)
    if isinstance(x, QuaternionPath):
        return x.replace(qmul(x.q, np.broadcast_to(A, x.q.shape)))
    return x.with_basis(x.basis @ su2_matrix(A), check=False)


def apply_twist(x, u):
    """Pointwise multiplication of ``(z, w)`` by unit complex scalars ``u``."""
    u = np.asarray(u, dtype=complex)
    if isinstance(x, QuaternionPath):
        u = np.broadcast_to(u, x.z.shape)
        z, w = u * x.z, u * x.w
        return x.replace(np.stack([z.real, z.imag, w.real, w.imag], axis=1))
    if x.field is Field.REAL:
        raise ValueError("twisting needs complex coordinates")
    u = np.broadcast_to(u, x.z.shape)
    return x.with_basis(u[:, None] * x.basis, check=False)


def cyclic_shift(x, s: int):
    """Rotate the starting point of a closed path forward by ``s`` samples."""
    if not x.closed:
        raise NotClosed("seed shifts need a closed path")
    vals = _values(x)
    n = x.grid.n_samples
    laps, idx = np.divmod(np.arange(n) + s, n)
    sgn = np.where(laps % 2 == 0, 1.0, x.closure_class.sign)
    out = vals[idx] * sgn[:, None]
    if isinstance(x, QuaternionPath):
        return x.replace(out)
    return x.with_basis(out, check=False)


# configuration and results -------------------------------------------------------


@dataclass(frozen=True)
class DPConfig:
    """Dynamic-programming and pipeline settings."""

    window: int = 6
    seed_stride: int = 1
    max_iters: int = 10
    tol: float = 1e-4

    def __post_init__(self):
        if self.window < 1 or self.seed_stride < 1 or self.max_iters < 0:
            raise ValueError("window and seed_stride must be >= 1, max_iters >= 0")


@dataclass(frozen=True, eq=False)
class RegistrationResult:
    """Outcome of an alignment pipeline.

    ``aligned`` is the registered copy of the moving input and ``distance`` is
    measured between the fixed input and ``aligned``. For closed inputs the
    rotation and ``global_twist`` angle come from the aligning unitary.
    """

    rotation: np.ndarray
    warp: Warp
    seed: int
    twist: np.ndarray | None
    aligned: object
    distance: float
    iterations: int
    history: list = field(default_factory=list)
    global_twist: float = 0.0
    basis_change: np.ndarray | None = None


# rotation ------------------------------------------------------------------


def optimal_rotation(q0: QuaternionPath, q1: QuaternionPath) -> np.ndarray:
    """Unit quaternion ``A`` minimising the sphere distance from ``q0`` to ``q1 A``.

    ``A`` is the normalised integral of ``conj(q1) q0``.
    """
    check_same_grid(q0.grid, q1.grid)
    M = q0.weights @ qmul(qconj(q1.q), q0.q)
    nm = np.linalg.norm(M)
    if nm <= 1e-10:
        raise OrthogonalInputs("paths are L2 orthogonal to the whole rotation orbit")
    return M / nm


def unitary_to_rotation(U: np.ndarray) -> tuple[np.ndarray, float]:
    """Split ``U = e^{i phi} U_SU`` and return the SU(2) part as a quaternion and ``2 phi``."""
    det = np.linalg.det(U)
    phi = 0.5 * np.angle(det)
    V = U * np.exp(-1j * phi)
    A = qnormalize(np.array([V[0, 0].real, V[0, 0].imag, V[0, 1].real, V[0, 1].imag]))
    return A, float(2 * phi)


def svd_align(S0: StiefelPoint, S1: StiefelPoint):
    """Principal-vector bases of two planes.

    Returns ``(S0t, S1t, theta_z, theta_w)`` with ``<z0t, z1t> = cos theta_z``,
    ``<w0t, w1t> = cos theta_w`` and vanishing cross terms.
    """
    check_same_grid(S0.grid, S1.grid)
    B0, B1, _, theta = principal_bases(S0, S1)
    return S0.with_basis(B0), S1.with_basis(B1), float(theta[0]), float(theta[1])


def procrustes(S0: StiefelPoint, S1: StiefelPoint) -> tuple[StiefelPoint, np.ndarray]:
    """Basis of ``span(S1)`` closest in L2 to the basis of ``S0``, and the unitary used."""
    B0, B1 = S0.basis, S1.basis
    w = S0.grid.weights(True)
    M = (B1 * w[:, None]).T.conj() @ B0
    X, _, Y = svd2(M)
    U = X @ np.conj(Y).T
    return S1.with_basis(B1 @ U), U


# dynamic programming -------------------------------------------------------------


def _edge_costs(f0: np.ndarray, f1: np.ndarray, a: int, b: int, dt: float, g1: np.ndarray | None = None) -> np.ndarray:
    """Costs of all lattice edges ``(k, l) -> (k + a, l + b)``; shape ``(m - a, m - b)``.

    With ``g1`` (the samples of ``i f1``) the cross term is the modulus of the
    complex pairing, i.e. the cost after the pointwise optimal twist.
    """
    m = f0.shape[0]
    K, L = m - a, m - b
    s = np.sqrt(b / a)
    acc = np.zeros((K, L))
    for r in range(a + 1):
        wt = dt * (0.5 if r in (0, a) else 1.0)
        x0 = f0[r : r + K]
        off = r * b / a
        i = int(np.floor(off + 1e-12))
        frac = off - i
        x1 = f1[i : i + L]
        if frac > 1e-12:
            x1 = (1 - frac) * x1 + frac * f1[i + 1 : i + 1 + L]
        cross = x0 @ x1.T
        if g1 is not None:
            y1 = g1[i : i + L]
            if frac > 1e-12:
                y1 = (1 - frac) * y1 + frac * g1[i + 1 : i + 1 + L]
            cross = np.hypot(cross, x0 @ y1.T)
        acc += wt * (np.sum(x0 * x0, axis=1)[:, None] + (s * s) * np.sum(x1 * x1, axis=1)[None, :] - 2 * s * cross)
    return acc


def _dp_path(f0: np.ndarray, f1: np.ndarray, dt: float, window: int, g1: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    m = f0.shape[0]
    n = m - 1
    moves = [(a, b) for a in range(1, window + 1) for b in range(1, window + 1)]
    costs = {mv: _edge_costs(f0, f1, mv[0], mv[1], dt, g1) for mv in moves}
    E = np.full((m, m), np.inf)
    E[0, 0] = 0.0
    move_of = np.full((m, m), -1, dtype=int)
    for i in range(1, m):
        row = E[i]
        mrow = move_of[i]
        for idx, (a, b) in enumerate(moves):
            if a > i:
                continue
            k = i - a
            cand = E[k, : m - b] + costs[(a, b)][k]
            seg = row[b:]
            better = cand < seg
            if better.any():
                seg[better] = cand[better]
                mrow[b:][better] = idx
    ks, ls = [n], [n]
    i, j = n, n
    while i > 0 or j > 0:
        a, b = moves[move_of[i, j]]
        i, j = i - a, j - b
        ks.append(i)
        ls.append(j)
    return np.array(ks[::-1], dtype=float), np.array(ls[::-1], dtype=float)


def _refine_path(f0: np.ndarray, f1: np.ndarray, dt: float, window: int, center: np.ndarray, sub: int, band: int, g1: np.ndarray | None = None):
    """Re-solve the matching on a lattice whose columns are ``sub`` times finer.

    Only a band of ``band`` fine columns either side of ``center`` (a warp in
    grid units) is searched. Edge slopes stay within ``[1/window, window]``.
    All moves are relaxed together for each row, with costs assembled from the
    cross-Gram ``f0 f1^T`` so fractional columns cost no extra interpolation.
    """
    m = f0.shape[0]
    n = m - 1
    D = f0 @ f1.T
    DI = None if g1 is None else f0 @ g1.T
    N0 = np.sum(f0 * f0, axis=1)
    N1 = np.sum(f1 * f1, axis=1)
    C1 = np.sum(f1[:-1] * f1[1:], axis=1)
    moves = np.array([(a, b) for a in range(1, window + 1) for b in range(1, sub * window + 1) if b * window >= sub * a])
    A, Bm = moves[:, 0], moves[:, 1]
    rr = np.arange(window + 1)
    wt = np.where(rr[None, :] <= A[:, None], dt, 0.0)
    wt[np.arange(len(moves)), A] = 0.5 * dt
    wt[:, 0] = 0.5 * dt
    step = Bm[:, None] / (A[:, None] * sub) * rr[None, :]  # column advance, coarse units
    scale = np.sqrt(Bm / (sub * A))
    width = 2 * band + 1
    c = np.clip(np.round(center * sub).astype(int), band, sub * n - band)
    c[0], c[-1] = band, sub * n - band
    E = np.full((m, width), np.inf)
    E[0, 0] = 0.0  # fine column 0 sits at offset 0 because c[0] = band
    move_of = np.full((m, width), -1, dtype=int)
    o = np.arange(width)
    for i in range(1, m):
        k = i - A  # (M,)
        ok_rows = k >= 0
        kk = np.maximum(k, 0)
        ji = c[i] - band + o  # (W,)
        jk = ji[None, :] - Bm[:, None]  # (M, W)
        src = jk - (c[kk] - band)[:, None]
        valid = ok_rows[:, None] & (jk >= 0) & (src >= 0) & (src < width)
        prev = np.where(valid, E[kk[:, None], np.clip(src, 0, width - 1)], np.inf)
        # positions along each edge: rows k + r, fine start column jk
        p = jk[:, :, None] / sub + step[:, None, :]  # (M, W, R)
        p = np.clip(p, 0.0, float(n))
        j0 = np.minimum(np.floor(p).astype(int), n - 1)
        f = p - j0
        rows = np.clip(kk[:, None] + rr[None, :], 0, n)[:, None, :]
        nx1 = (1 - f) ** 2 * N1[j0] + 2 * f * (1 - f) * C1[j0] + f * f * N1[j0 + 1]
        dx = (1 - f) * D[rows, j0] + f * D[rows, j0 + 1]
        if DI is not None:
            dx = np.hypot(dx, (1 - f) * DI[rows, j0] + f * DI[rows, j0 + 1])
        s_ = scale[:, None, None]
        term = N0[rows] + s_ * s_ * nx1 - 2 * s_ * dx
        cost = np.sum(wt[:, None, :] * term, axis=2)
        tot = prev + cost
        best = np.argmin(tot, axis=0)
        E[i] = tot[best, o]
        move_of[i] = np.where(np.isfinite(E[i]), best, -1)
    ks, js = [n], [sub * n]
    i, j = n, sub * n
    while i > 0:
        mv = move_of[i, j - (c[i] - band)]
        if mv < 0:
            return None
        i, j = i - A[mv], j - Bm[mv]
        ks.append(i)
        js.append(j)
    if j != 0:
        return None
    return np.array(ks[::-1], dtype=float), np.array(js[::-1], dtype=float) / sub


def dp_reparam(q0, q1, cfg: DPConfig = DPConfig(), refine: int = 4, twist: bool = False):
    """Warp ``rho`` minimising the discretised ``integral |q0 - sqrt(rho') q1 o rho|^2``.

    A lattice path over the ``(n + 1)^2`` grid is found first; with
    ``refine > 1`` it is then re-solved on a band of a lattice whose columns
    are ``refine`` times finer, which removes most of the quantisation error of
    the coarse path. Returns ``(rho, q1_hat)``. Closed inputs are matched with
    their seeds fixed; the resulting warp is a closed warp with ``rho(0) = 0``.
    The candidate closest to ``q0`` among the refined, coarse and identity
    warps is returned. With ``twist`` every comparison is made after the
    pointwise optimal twist, so the warp ignores frame twisting; ``q1_hat`` is
    then the warped but untwisted input.
    """
    check_same_grid(q0.grid, q1.grid)
    grid = q0.grid
    f0, f1 = _open_real(q0), _open_real(q1)
    g1 = _open_real(apply_twist(q1, 1j)) if twist else None
    gap = _twist_gap if twist else _l2_gap
    ks, ls = _dp_path(f0, f1, grid.dt, cfg.window, g1)
    knots = np.arange(grid.n_samples + 1, dtype=float)
    coarse = np.interp(knots, ks, ls)
    options = [Warp.identity(grid, q1.closed), Warp(grid, coarse * grid.dt, q1.closed)]
    if refine > 1:
        path = _refine_path(f0, f1, grid.dt, cfg.window, coarse, refine, band=2 * refine, g1=g1)
        if path is not None:
            options.append(Warp(grid, np.interp(knots, *path) * grid.dt, q1.closed))
    best, best_gap = options[0], gap(q0, q1)
    out = q1
    for rho in options[1:]:
        cand = apply_warp(q1, rho)
        g = gap(q0, cand)
        if g <= best_gap:
            best, best_gap, out = rho, g, cand
    return best, out


# seed search -----------------------------------------------------------------


def _shift_stack(vals: np.ndarray, shifts: np.ndarray, sign: float) -> np.ndarray:
    n = vals.shape[0]
    laps, idx = np.divmod(shifts[:, None] + np.arange(n)[None, :], n)
    sgn = np.where(laps % 2 == 0, 1.0, sign)
    return vals[idx] * sgn[..., None]


def _jordan_cost(B0: np.ndarray, stack: np.ndarray, w: np.ndarray) -> np.ndarray:
    G = np.einsum("ij,sik->sjk", B0 * w[:, None], np.conj(stack))
    _, s, _ = svd2(G)
    th = np.arccos(np.clip(s, -1.0, 1.0))
    return np.sum(th * th, axis=-1)


def _twist_aligned_stack(B0: np.ndarray, stack: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Procrustes-align each shifted basis to ``B0`` and apply the pointwise optimal twist."""
    M = np.einsum("sij,ik->sjk", np.conj(stack) * w[None, :, None], B0)
    X, _, Y = svd2(M)
    U = X @ np.conj(np.swapaxes(Y, -1, -2))
    A = stack @ U
    a = np.sum(B0[None] * np.conj(A), axis=-1)
    mag = np.abs(a)
    u = np.where(mag > 1e-300, a / np.where(mag > 1e-300, mag, 1.0), 1.0)
    return u[..., None] * A


def _seed_costs(q0, q1, cfg: DPConfig, twist_aware: bool) -> tuple[np.ndarray, np.ndarray]:
    if not (q0.closed and q1.closed):
        raise NotClosed("seed search needs closed inputs")
    check_same_grid(q0.grid, q1.grid)
    grid = q0.grid
    shifts = np.arange(0, grid.n_samples, cfg.seed_stride)
    w = grid.weights(True)
    sign = q1.closure_class.sign
    if isinstance(q1, StiefelPoint):
        stack = _shift_stack(q1.basis, shifts, sign)
        if twist_aware and q1.field is Field.COMPLEX:
            stack = _twist_aligned_stack(q0.basis, stack, w)
        cost = _jordan_cost(q0.basis, stack, w)
    else:
        stack = _shift_stack(np.asarray(q1.q), shifts, sign)
        M = np.einsum("i,sij->sj", w, qmul(qconj(stack), np.broadcast_to(q0.q, stack.shape)))
        cost = -np.linalg.norm(M, axis=1)
    return shifts, cost


def seed_search(q0, q1, cfg: DPConfig = DPConfig(), twist_aware: bool = False):
    """Best cyclic shift of the starting point of ``q1``.

    Stiefel inputs are compared by Grassmann distance (optionally after the
    optimal pointwise twist); closed quaternionic paths by sphere distance after
    the optimal rotation. Returns ``(seed, shifted q1)``.
    """
    shifts, cost = _seed_costs(q0, q1, cfg, twist_aware)
    best = int(shifts[int(np.argmin(cost))])
    return best, cyclic_shift(q1, best)


# twisting ----------------------------------------------------------------------


def optimal_twist(q0, q1, eps: float = EPS_TWIST, strict: bool = False):
    """Pointwise twist of ``q1`` towards ``q0``.

    ``q1 -> u q1`` with ``u = <q0, q1>_C2 / |<q0, q1>_C2|`` pointwise. After this
    the sphere geodesic from ``q0`` is horizontal for the twisting action.
    With ``strict`` a twist-orbit coincidence (zero geodesic velocity) raises
    :class:`SameOrbit`.
    """
    check_same_grid(q0.grid, q1.grid)
    if isinstance(q0, StiefelPoint) and q0.field is Field.REAL:
        raise ValueError("twisting needs complex coordinates")
    z0, w0 = q0.z, q0.w
    z1, w1 = q1.z, q1.w
    a = z0 * np.conj(z1) + w0 * np.conj(w1)
    scale = np.sqrt(np.abs(z0) ** 2 + np.abs(w0) ** 2) * np.sqrt(np.abs(z1) ** 2 + np.abs(w1) ** 2)
    bad = np.flatnonzero(np.abs(a) <= eps * scale)
    if bad.size:
        raise PointwiseOrthogonal("twist undefined where the paths are pointwise orthogonal", bad)
    u = a / np.abs(a)
    out = apply_twist(q1, u)
    if strict and _l2_gap(q0, out) <= 1e-20:
        raise SameOrbit("inputs lie in the same twist orbit")
    return out


def _twist_of(q0, q1) -> np.ndarray:
    a = q0.z * np.conj(q1.z) + q0.w * np.conj(q1.w)
    mag = np.abs(a)
    return np.where(mag > 1e-300, a / np.where(mag > 1e-300, mag, 1.0), 1.0)


def grassmann_horizontal_twist(S0: StiefelPoint, S1: StiefelPoint, iters: int = 50, tol: float = 1e-12) -> tuple[StiefelPoint, np.ndarray]:
    """Twist ``S1`` until the Grassmann geodesic from ``S0`` is horizontal.

    The first variation of the Grassmann distance under a twist of ``S1`` is
    proportional to
    ``Im[(theta_z / sin theta_z) z0 conj(z1) + (theta_w / sin theta_w) w0 conj(w1)]``
    in principal bases, which is also the twist component of the geodesic
    velocity. The fixed-point iteration rotates ``S1`` by the phase of that
    weighted pairing until it is real; steps that increase the distance are
    rejected. Returns the twisted point and the accumulated twist.
    """
    cur = S1
    total = np.ones(S1.grid.n_samples, dtype=complex)
    best = grassmann_distance(S0, cur)[0]
    for _ in range(iters):
        B0, B1, _, th = principal_bases(S0, cur)
        wgt = np.where(th > 1e-12, th / np.sin(np.maximum(th, 1e-300)), 1.0)
        a = wgt[0] * B0[:, 0] * np.conj(B1[:, 0]) + wgt[1] * B0[:, 1] * np.conj(B1[:, 1])
        mag = np.abs(a)
        if mag.min() <= 1e-300:
            break
        u = a / mag
        if np.abs(np.angle(u)).max() < tol:
            break
        cand = apply_twist(cur, u)
        cand = cand.with_basis(orthonormalize(cand.basis, cand.grid))
        d = grassmann_distance(S0, cand)[0]
        if d > best + 1e-14:
            break
        cur, best, total = cand, d, u * total
    return cur, total


def canonical_twist(S: StiefelPoint) -> tuple[StiefelPoint, np.ndarray]:
    """Twist a closed point into its rotation-minimising representative.

    The twist ``u = exp(-i phi)`` with ``phi' = Im<q', q>_C2 / |q|^2`` makes
    the framing parallel; the holonomy left over after one period (minus the
    nearest whole turn, so ``u`` stays periodic and the parity is kept) is
    spread out in proportion to arclength. The result depends on the input
    only through its curve, up to a constant phase, so it is invariant under
    twisting, rotation, warping and seed shifts. Returns ``(u S, u)``.
    """
    if S.field is not Field.COMPLEX:
        raise ValueError("twisting needs complex coordinates")
    grid = S.grid
    sign = S.closure_class.sign
    B = S.basis
    dB = derivative(B, grid.dt, periodic=True, period_sign=sign)
    speed = np.sum(np.abs(B) ** 2, axis=1)
    rate = np.sum(dB * np.conj(B), axis=1).imag / np.maximum(speed, 1e-300)
    phi = cumulative_integral(rate, grid.dt, periodic=True)
    s = cumulative_integral(speed, grid.dt, periodic=True)
    hol = phi[-1] - 2 * np.pi * np.round(phi[-1] / (2 * np.pi))
    u = np.exp(-1j * (phi[:-1] - hol * s[:-1] / s[-1]))
    return apply_twist(S, u), u


# pipelines ---------------------------------------------------------------------


def _rel_decrease(prev: float, new: float) -> float:
    return (prev - new) / max(prev, 1e-300)


def register_open(q0: QuaternionPath, q1: QuaternionPath, cfg: DPConfig = DPConfig(), twist: bool = False) -> RegistrationResult:
    """Alternate optimal rotation, dynamic-programming warp (and optimal twist).

    Every step is accepted only if it does not increase the sphere distance.
    """
    check_same_grid(q0.grid, q1.grid)
    grid = q0.grid
    cur = q1
    dist = sphere_distance(q0, cur)
    rot = ONE.copy()
    warp = Warp.identity(grid)
    u_total = np.ones(grid.n_samples + 1, dtype=complex) if twist else None
    history = [dist]
    it = 0
    while it < cfg.max_iters and dist > 1e-12:
        it += 1
        prev = dist
        try:
            A = optimal_rotation(q0, cur)
        except OrthogonalInputs:
            A = ONE
        cand = apply_rotation(cur, A)
        d = sphere_distance(q0, cand)
        if d <= dist:
            cur, dist, rot = cand, d, qmul(rot, A)
        rho, cand = dp_reparam(q0, cur, cfg)
        d = sphere_distance(q0, cand)
        if d <= dist:
            cur, dist, warp = cand, d, warp.compose(rho)
            if twist:
                u_total = sample_open(u_total, grid, rho.values)
                u_total = u_total / np.abs(u_total)
        if twist:
            try:
                cand = optimal_twist(q0, cur)
            except PointwiseOrthogonal:
                cand = cur
            d = sphere_distance(q0, cand)
            if d <= dist:
                u_total = _twist_of(cand, cur) * u_total
                cur, dist = cand, d
        history.append(dist)
        if _rel_decrease(prev, dist) < cfg.tol:
            break
    return RegistrationResult(rot, warp, 0, u_total, cur, dist, it, history)


def _check_parity(S0: StiefelPoint, S1: StiefelPoint) -> None:
    check_same_grid(S0.grid, S1.grid)
    if S0.closure_class is not S1.closure_class:
        raise ParityMismatch(
            "closed curves have different mod-2 linking parity; they lie in different "
            "components and joining them is not supported"
        )


def _closed_result(S0, S1, cur, dist, it, history, warp, seed, u_total) -> RegistrationResult:
    """Recover the aligning unitary by Procrustes from the reparameterised input."""
    moved = apply_warp(S1, warp)
    if u_total is not None:
        moved = apply_twist(moved, u_total)
        moved = moved.with_basis(orthonormalize(moved.basis, moved.grid))
    w = S0.grid.weights(True)
    M = (moved.basis * w[:, None]).T.conj() @ cur.basis
    X, _, Y = svd2(M)
    U = X @ np.conj(Y).T
    if S1.field is Field.COMPLEX:
        rot, phi = unitary_to_rotation(U)
    else:
        rot, phi = ONE.copy(), 0.0
    return RegistrationResult(rot, warp, seed, u_total, cur, dist, it, history, phi, U)


def _safe_twist(S0: StiefelPoint, S1: StiefelPoint) -> StiefelPoint:
    """Optimal pointwise twist, re-orthonormalised; unchanged where it is undefined."""
    try:
        out = optimal_twist(S0, S1)
    except PointwiseOrthogonal:
        return S1
    return out.with_basis(orthonormalize(out.basis, S1.grid))


def _closed_loop(S0, start, warp, seed, u_total, cfg, twist: bool, dist0=None, it0=0, history=None):
    grid = S0.grid
    n = grid.n_samples
    cur = start
    dist = grassmann_distance(S0, cur)[0] if dist0 is None else dist0
    history = [dist] if history is None else history
    it = 0
    while it < cfg.max_iters and dist > 1e-12:
        it += 1
        prev = dist
        s, cand = seed_search(S0, cur, cfg, twist_aware=twist)
        if s:
            cand = cand.with_basis(orthonormalize(cand.basis, grid))
            v = None
            if twist:
                shifted = procrustes(S0, cand)[0]
                cand = _safe_twist(S0, shifted)
                v = _twist_of(cand, shifted)
            d = grassmann_distance(S0, cand)[0]
            if d <= dist:
                rho = Warp.shift(grid, s)
                cur, dist, warp, seed = cand, d, warp.compose(rho), (seed + s) % n
                if u_total is not None:
                    u_total = np.roll(u_total, -s)
                    if v is not None:
                        u_total = v * u_total
        aligned, _ = procrustes(S0, cur)
        rho, cand = dp_reparam(S0, aligned, cfg, twist=twist)
        v = None
        if twist:
            warped = cand
            cand = _safe_twist(S0, warped)
            v = _twist_of(cand, warped)
        d = grassmann_distance(S0, cand)[0]
        if d <= dist:
            cur, dist, warp = cand, d, warp.compose(rho)
            if u_total is not None:
                u_total = sample_periodic(u_total, grid, rho.values[:-1])
                u_total = u_total / np.abs(u_total)
                if v is not None:
                    u_total = v * u_total
        else:
            cur = aligned
        if twist:
            aligned, _ = procrustes(S0, cur)
            cand = _safe_twist(S0, aligned)
            d = grassmann_distance(S0, cand)[0]
            if d <= dist:
                u_total = _twist_of(cand, aligned) * u_total
                cur, dist = cand, d
            cand, v = grassmann_horizontal_twist(S0, cur)
            d = grassmann_distance(S0, cand)[0]
            if d <= dist:
                u_total = v * u_total
                cur, dist = cand, d
        history.append(dist)
        if _rel_decrease(prev, dist) < cfg.tol:
            break
    cur, _ = procrustes(S0, cur)
    return cur, dist, it0 + it, history, warp, seed, u_total


def register_closed_framed(S0: StiefelPoint, S1: StiefelPoint, cfg: DPConfig = DPConfig()) -> RegistrationResult:
    """Closed framed pipeline: seed search, SVD alignment and DP warping over the Grassmannian."""
    _check_parity(S0, S1)
    warp = Warp.identity(S0.grid, closed=True)
    cur, dist, it, hist, warp, seed, _ = _closed_loop(S0, S1, warp, 0, None, cfg, twist=False)
    return _closed_result(S0, S1, cur, dist, it, hist, warp, seed, None)


def register_closed_unframed(S0: StiefelPoint, S1: StiefelPoint, cfg: DPConfig = DPConfig()) -> RegistrationResult:
    """Closed pipeline that also quotients by frame twisting.

    Warm-started from the better of the framed registration and the framed
    registration of the rotation-minimising representatives (see
    :func:`canonical_twist`), so the final distance never exceeds the framed
    one. The second start finds seed and warp without being misled by the
    input framings.
    """
    _check_parity(S0, S1)
    if S0.field is not Field.COMPLEX:
        raise ValueError("unframed registration needs complex coordinates")
    grid = S0.grid
    framed = register_closed_framed(S0, S1, cfg)
    start, dist0, warp, seed = framed.aligned, framed.distance, framed.warp, framed.seed
    u_start = np.ones(grid.n_samples, dtype=complex)
    history = list(framed.history)
    it0 = framed.iterations
    C0, u0 = canonical_twist(S0)
    C1, u1 = canonical_twist(S1)
    canon = register_closed_framed(C0, C1, cfg)
    it0 += canon.iterations
    # the twist by conj(u0) is an isometry taking C0 back to S0
    cand = apply_twist(canon.aligned, np.conj(u0))
    d = grassmann_distance(S0, cand)[0]
    if d < dist0:
        start, dist0, warp, seed = cand, d, canon.warp, canon.seed
        u_start = np.conj(u0) * sample_periodic(u1, grid, canon.warp.values[:-1])
        history.append(d)
    cur, dist, it, hist, warp, seed, u_total = _closed_loop(
        S0, start, warp, seed, u_start, cfg, twist=True, dist0=dist0, it0=it0, history=history,
    )
    return _closed_result(S0, S1, cur, dist, it, hist, warp, seed, u_total)
