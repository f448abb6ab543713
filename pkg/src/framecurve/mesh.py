"""Tube meshes around framed curves in Wavefront OBJ format.

The tube has a circular cross-section in the normal plane. Ring vertex 0 of
every cross-section lies in the direction of ``V``, and a seam polyline runs
just outside the surface along ``V`` so the twisting of the framing is
visible.
"""

from __future__ import annotations

import numpy as np

from .curvecore import FramedCurve

SEAM_OFFSET = 1.05


def tube_vertices(c: FramedCurve, radius: float, segments: int) -> np.ndarray:
    """``(m, segments, 3)`` ring vertices; ``m`` samples, closed curves without the duplicate."""
    phi = 2 * np.pi * np.arange(segments) / segments
    V, B = np.asarray(c.V), np.asarray(c.binormal)
    ring = np.cos(phi)[None, :, None] * V[:, None, :] + np.sin(phi)[None, :, None] * B[:, None, :]
    return np.asarray(c.gamma)[:, None, :] + radius * ring


def tube_faces(m: int, segments: int, closed: bool) -> np.ndarray:
    """Quad faces as 0-based vertex indices."""
    rows = m if closed else m - 1
    i = np.arange(rows)[:, None]
    j = np.arange(segments)[None, :]
    a = i * segments + j
    b = i * segments + (j + 1) % segments
    c = ((i + 1) % m) * segments + (j + 1) % segments
    d = ((i + 1) % m) * segments + j
    return np.stack([a, b, c, d], axis=-1).reshape(-1, 4)


def tube_obj(c: FramedCurve, radius: float = 0.05, segments: int = 12, name: str = "tube") -> str:
    """OBJ text with a quad tube object and a seam line object."""
    if segments < 3:
        raise ValueError("need at least three segments")
    verts = tube_vertices(c, radius, segments).reshape(-1, 3)
    m = c.gamma.shape[0]
    faces = tube_faces(m, segments, c.closed)
    seam = np.asarray(c.gamma) + SEAM_OFFSET * radius * np.asarray(c.V)
    lines = [f"# framecurve tube mesh: {m} rings x {segments} segments", f"o {name}"]
    lines += ["v {:.10g} {:.10g} {:.10g}".format(*v) for v in verts]
    lines += ["f {} {} {} {}".format(*(f + 1)) for f in faces]
    lines.append(f"o {name}_seam")
    lines += ["v {:.10g} {:.10g} {:.10g}".format(*v) for v in seam]
    base = verts.shape[0] + 1
    idx = list(range(base, base + m)) + ([base] if c.closed else [])
    lines.append("l " + " ".join(str(k) for k in idx))
    return "\n".join(lines) + "\n"
