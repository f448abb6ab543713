"""Flag means, curve averaging, distance matrices and k-medoid clustering."""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .curvecore import GrassmannPoint, GridSpec, StiefelPoint, check_same_grid, gram, hopf_map
from .errors import (
    DegenerateSpectrum,
    EmptyInput,
    FieldMismatch,
    FrameCurveError,
    IncompleteMatrix,
    InvalidK,
    NonConvergence,
    ParityMismatch,
)
from .geodesic import Mode, closed_stiefel_point, initial_framings, shape_distance
from .metric import grassmann_distance
from .planar import planar_srt, planar_srt_inverse
from .registration import DPConfig, register_closed_framed, register_closed_unframed

POWER_TOL = 1e-10
POWER_MAX_ITERS = 1000
SPECTRUM_TOL = 1e-8


# flag mean ---------------------------------------------------------------------


def _stiefel(x) -> StiefelPoint:
    return x.representative if isinstance(x, GrassmannPoint) else x


def _stack(samples) -> tuple[np.ndarray, GridSpec, StiefelPoint]:
    if len(samples) == 0:
        raise EmptyInput("flag mean of an empty sample")
    pts = [_stiefel(s) for s in samples]
    first = pts[0]
    for p in pts[1:]:
        check_same_grid(first.grid, p.grid)
        if p.field is not first.field:
            raise FieldMismatch("samples mix real and complex planes")
        if p.closure_class is not first.closure_class:
            raise ParityMismatch("samples come from different components")
    return np.concatenate([p.basis for p in pts], axis=1), first.grid, first


def _top_eigs(K: np.ndarray, tol: float, max_iters: int, p: int = 3) -> tuple[np.ndarray, np.ndarray, bool]:
    """Leading eigenpairs of a Hermitian PSD matrix by subspace iteration.

    Iterates ``p`` vectors (one more than needed, which speeds up convergence
    and exposes the next eigenvalue) with a Rayleigh-Ritz step per sweep. The
    start block is the leading coordinate vectors plus a fixed small
    perturbation, so the iteration cannot stall in an invariant subspace that
    misses the dominant directions. Convergence is judged on the first two
    vectors. Returns ``(values, vectors, converged)``.
    """
    m = K.shape[0]
    p = min(p, m)
    Q = np.eye(m, p, dtype=K.dtype) + 1e-2 * np.random.default_rng(0).standard_normal((m, p))
    Q, _ = np.linalg.qr(Q)
    scale = max(np.abs(K).max(), 1e-300)
    vals = np.zeros(p)
    for _ in range(max_iters):
        Q, _ = np.linalg.qr(K @ Q)
        H = np.conj(Q).T @ K @ Q
        vals, vecs = np.linalg.eigh(0.5 * (H + np.conj(H).T))
        order = np.argsort(vals)[::-1]
        vals, Q = vals[order], Q @ vecs[:, order]
        res = np.abs(K @ Q[:, :2] - Q[:, :2] * vals[None, :2]).max()
        if res <= tol * scale:
            return vals, Q, True
    return vals, Q, False


def flag_mean(samples, tol: float = POWER_TOL, max_iters: int = POWER_MAX_ITERS) -> StiefelPoint:
    """Flag mean of a set of 2-planes.

    Stacks every basis vector as a column of ``A``; ``z`` is the dominant left
    singular vector of ``A`` (the line minimising the summed squared sines of
    its angles to the planes) and ``w`` the next one. Each output vector is
    phased so its first non-negligible coefficient against the stacked columns
    is real and positive.
    """
    A, grid, first = _stack(samples)
    K = np.conj(gram(A, A, grid.weights(True)))  # K[k, l] = <a_l, a_k>
    vals, C, ok = _top_eigs(K, tol, max_iters)
    if not ok:
        warnings.warn(NonConvergence("subspace iteration for the flag mean did not converge"), stacklevel=2)
    if abs(vals[0] - vals[1]) <= SPECTRUM_TOL * vals[0]:
        warnings.warn(DegenerateSpectrum("leading singular values coincide; the first flag direction is not unique"), stacklevel=2)
    if len(vals) > 2 and abs(vals[1] - vals[2]) <= SPECTRUM_TOL * vals[0]:
        warnings.warn(DegenerateSpectrum("second and third singular values coincide; the mean plane is not unique"), stacklevel=2)
    cols = []
    for k in range(2):
        c = C[:, k]
        lead = np.flatnonzero(np.abs(c) > 1e-8 * np.abs(c).max())[0]
        c = c * (np.conj(c[lead]) / abs(c[lead]))
        v = A @ c
        cols.append(v / np.sqrt(max(vals[k], 1e-300)))
    B = np.stack(cols, axis=1)
    if first.field.value == "real":
        B = B.real
    return first.with_basis(B)


def flag_objective(z: np.ndarray, samples) -> float:
    """``sum_j (1 - |P_j z|^2)`` for a unit vector ``z``: summed squared line-plane sines."""
    A, grid, _ = _stack(samples)
    wts = grid.weights(True)
    coef = (np.conj(A) * wts[:, None]).T @ z  # <z, a_k>
    return float(len(samples) - np.sum(np.abs(coef) ** 2))


# averaging ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MeanResult:
    """Average shape and its convergence record.

    ``curve`` is a framed curve (framed mode), the base points of a framed
    curve (unframed mode) or complex plane-curve samples (planar mode).
    """

    point: StiefelPoint
    curve: object
    history: list
    iterations: int
    aligned: list = field(default_factory=list)


def _points(curves, mode: Mode, grid: GridSpec | None) -> list[StiefelPoint]:
    if mode is Mode.PLANAR:
        return [planar_srt(c, grid, True) for c in curves]
    if mode is Mode.CLOSED_FRAMED:
        return [closed_stiefel_point(c) for c in curves]
    if mode is Mode.CLOSED_UNFRAMED:
        c0 = initial_framings(curves[0], curves[0], grid)[0]
        framed = [c0] + [initial_framings(c0, c, grid)[1] for c in curves[1:]]
        return [closed_stiefel_point(c) for c in framed]
    raise ValueError("mean_closed_curves needs a closed mode")


def _align_all(star: StiefelPoint, pts, mode: Mode, cfg: DPConfig):
    reg = register_closed_unframed if mode is Mode.CLOSED_UNFRAMED else register_closed_framed
    res = [reg(star, p, cfg) for p in pts]
    aligned = [r.aligned for r in res]
    obj = float(sum(r.distance**2 for r in res))
    return aligned, obj


def mean_closed_curves(curves, mode: Mode | str = Mode.CLOSED_FRAMED, cfg: DPConfig = DPConfig(), grid: GridSpec | None = None) -> MeanResult:
    """Average closed curves by alternating registration and flag means.

    Starts from the first curve. Each outer sweep registers every sample to the
    current estimate and replaces the estimate by the flag mean of the
    registered samples. A new estimate is kept only if the summed squared
    Grassmann distance to the re-registered samples does not increase, so the
    recorded objective is monotone.
    """
    mode = Mode(mode)
    if len(curves) < 2:
        raise EmptyInput("need at least two curves to average")
    pts = _points(curves, mode, grid)
    for p in pts[1:]:
        if p.closure_class is not pts[0].closure_class:
            raise ParityMismatch("curves have different linking parity")
    star = pts[0]
    aligned, obj = _align_all(star, pts, mode, cfg)
    history = [obj]
    it = 0
    converged = False
    while it < max(cfg.max_iters, 1):
        it += 1
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateSpectrum)
            cand = flag_mean(aligned)
        step = grassmann_distance(star, cand)[0]
        cand_aligned, cand_obj = _align_all(cand, pts, mode, cfg)
        if cand_obj > obj:
            converged = True
            break
        star, aligned, obj = cand, cand_aligned, cand_obj
        history.append(obj)
        if step < cfg.tol:
            converged = True
            break
    if not converged:
        warnings.warn(NonConvergence("curve averaging hit the iteration cap"), stacklevel=2)
    if mode is Mode.PLANAR:
        curve = planar_srt_inverse(star)
    else:
        fc = hopf_map(star.to_quaternion_path())
        curve = fc if mode is Mode.CLOSED_FRAMED else np.asarray(fc.gamma)
    return MeanResult(star, curve, history, it, aligned)


# distance matrices ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric matrix of normalised shape distances."""

    labels: list
    d: np.ndarray
    mode: Mode
    failures: dict = field(default_factory=dict)


def _pair_task(args):
    i, j, x0, x1, mode, cfg, grid = args
    try:
        return i, j, shape_distance(x0, x1, mode, cfg, grid)[1], None
    except FrameCurveError as exc:
        return i, j, float("nan"), f"{type(exc).__name__}: {exc}"


def distance_matrix(curves, mode: Mode | str, cfg: DPConfig = DPConfig(), labels=None, grid: GridSpec | None = None, jobs: int = 1) -> DistanceMatrix:
    """Normalised distances for every pair ``i < j`` (``j`` registered onto ``i``).

    Pairs are independent; with ``jobs > 1`` they run in worker processes and
    each result is written into its own cell, so the matrix does not depend on
    completion order. Failed pairs become NaN and are listed in ``failures``.
    """
    mode = Mode(mode)
    n = len(curves)
    if n < 2:
        raise EmptyInput("need at least two curves")
    labels = list(labels) if labels is not None else [str(i) for i in range(n)]
    tasks = [(i, j, curves[i], curves[j], mode, cfg, grid) for i in range(n) for j in range(i + 1, n)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_pair_task, tasks))
    else:
        results = [_pair_task(t) for t in tasks]
    d = np.zeros((n, n))
    failures = {}
    for i, j, val, err in results:
        d[i, j] = d[j, i] = val
        if err is not None:
            failures[(i, j)] = err
    return DistanceMatrix(labels, d, mode, failures)


# k-medoids ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClusterResult:
    medoid_indices: np.ndarray
    assignment: np.ndarray
    total_cost: float
    seed: int
    history: list = field(default_factory=list)

    @property
    def largest_cluster_fraction(self) -> float:
        counts = np.bincount(self.assignment, minlength=len(self.medoid_indices))
        return float(counts.max() / self.assignment.size)


def _cost(D: np.ndarray, medoids) -> float:
    return float(D[:, medoids].min(axis=1).sum())


def k_medoids(d, k: int, seed: int = 0) -> ClusterResult:
    """Partitioning around medoids on a precomputed distance matrix.

    A greedy build adds, one at a time, the medoid that most reduces the total
    cost (ties broken by a seeded random order); the swap phase then applies
    the best improving medoid/non-medoid exchange until none remains.
    ``assignment[i]`` is the position in ``medoid_indices`` of the nearest
    medoid.
    """
    D = np.asarray(d.d if isinstance(d, DistanceMatrix) else d, dtype=float)
    n = D.shape[0]
    if not (1 <= k <= n):
        raise InvalidK(f"k must be between 1 and {n}, got {k}")
    if np.isnan(D).any():
        raise IncompleteMatrix("distance matrix has missing entries")
    order = np.random.default_rng(seed).permutation(n)
    medoids: list[int] = []
    for _ in range(k):
        best, best_cost = None, np.inf
        for h in order:
            if h in medoids:
                continue
            c = _cost(D, medoids + [int(h)])
            if c < best_cost - 1e-15:
                best, best_cost = int(h), c
        medoids.append(best)
    cost = _cost(D, medoids)
    history = [cost]
    while True:
        best_swap, best_cost = None, cost
        for mi in range(k):
            for h in order:
                if h in medoids:
                    continue
                trial = medoids.copy()
                trial[mi] = int(h)
                c = _cost(D, trial)
                if c < best_cost - 1e-12:
                    best_swap, best_cost = (mi, int(h)), c
        if best_swap is None:
            break
        medoids[best_swap[0]] = best_swap[1]
        cost = best_cost
        history.append(cost)
    med = np.array(medoids, dtype=int)
    assign = np.argmin(D[:, med], axis=1)
    return ClusterResult(med, assign, cost, seed, history)
