"""Vectorised quaternion arithmetic on arrays of shape ``(..., 4)``.

Components are ordered ``(q0, q1, q2, q3)`` for ``q0 + q1 i + q2 j + q3 k``.
The complex pair of a quaternion is ``(z, w) = (q0 + q1 i, q2 + q3 i)`` so that
``q = z + w j``.
"""

from __future__ import annotations

import numpy as np

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a0, a1, a2, a3 = np.moveaxis(np.asarray(a, dtype=float), -1, 0)
    b0, b1, b2, b3 = np.moveaxis(np.asarray(b, dtype=float), -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=float) * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm2(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.sum(a * a, axis=-1)


def qnormalize(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a / np.sqrt(qnorm2(a))[..., None]


def conj_action(q: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``conj(q) * x * q`` for pure-imaginary ``x`` given as 3-vectors."""
    x4 = np.concatenate([np.zeros(np.shape(x)[:-1] + (1,)), x], axis=-1)
    return qmul(qmul(qconj(q), x4), q)[..., 1:]


def to_complex(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q = np.asarray(q, dtype=float)
    return q[..., 0] + 1j * q[..., 1], q[..., 2] + 1j * q[..., 3]


def from_complex(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    z = np.asarray(z)
    w = np.asarray(w)
    return np.stack([z.real, z.imag, w.real, w.imag], axis=-1).astype(float)


def hopf_matrix(q: np.ndarray) -> np.ndarray:
    """Classical Hopf map ``h``: unit quaternion to rotation matrix.

    Columns are ``conj(q) i q``, ``conj(q) j q`` and ``conj(q) k q``. The map is
    anti-homomorphic: ``h(a b) = h(b) h(a)``.
    """
    q = qnormalize(q)
    cols = [conj_action(q, np.broadcast_to(e[1:], q.shape[:-1] + (3,))) for e in (I, J, K)]
    return np.stack(cols, axis=-1)


def matrix_to_quaternion(R: np.ndarray) -> np.ndarray:
    """Inverse of :func:`hopf_matrix` up to sign.

    Returns unit ``u`` with ``hopf_matrix(u) == R``. ``h(u)`` is the active
    rotation ``x -> p x conj(p)`` with ``p = conj(u)``, so Shepperd's method
    recovers ``p`` and the result is its conjugate.
    """
    M = np.asarray(R, dtype=float)
    m00, m11, m22 = M[..., 0, 0], M[..., 1, 1], M[..., 2, 2]
    tr = m00 + m11 + m22
    cands = np.stack(
        [
            np.stack([1 + tr, M[..., 2, 1] - M[..., 1, 2], M[..., 0, 2] - M[..., 2, 0], M[..., 1, 0] - M[..., 0, 1]], -1),
            np.stack([M[..., 2, 1] - M[..., 1, 2], 1 + m00 - m11 - m22, M[..., 0, 1] + M[..., 1, 0], M[..., 0, 2] + M[..., 2, 0]], -1),
            np.stack([M[..., 0, 2] - M[..., 2, 0], M[..., 0, 1] + M[..., 1, 0], 1 - m00 + m11 - m22, M[..., 1, 2] + M[..., 2, 1]], -1),
            np.stack([M[..., 1, 0] - M[..., 0, 1], M[..., 0, 2] + M[..., 2, 0], M[..., 1, 2] + M[..., 2, 1], 1 - m00 - m11 + m22], -1),
        ],
        axis=-2,
    )
    diag = np.stack([tr, m00, m11, m22], axis=-1)
    pick = np.argmax(diag, axis=-1)
    p = np.take_along_axis(cands, pick[..., None, None], axis=-2)[..., 0, :]
    return qconj(qnormalize(p))


def random_unit(rng: np.random.Generator, size=None) -> np.ndarray:
    shape = (4,) if size is None else tuple(np.atleast_1d(size)) + (4,)
    return qnormalize(rng.normal(size=shape))
