"""Text file formats for curves, quaternionic paths and distance matrices.

Every file is a block of ``key: value`` header lines, a ``data:`` marker and
whitespace-separated numeric rows. Floats are written with 17 significant
digits so a read after a write reproduces every value exactly. Lines starting
with ``#`` are comments.

Curve file::

    # framecurve curve
    format: 1
    kind: curve
    id: helix
    closed: false
    n_samples: 256
    frame: true
    meta.source: generator:helix
    columns: t x y z vx vy vz
    data:
    0 1 0 0 0 0.7071 0.7071
    ...

Open curves carry ``n_samples + 1`` rows, closed curves ``n_samples`` rows
(the sample at ``t = 2`` is implied). Quaternion files use ``kind:
quaternion``, the columns ``t q0 q1 q2 q3`` and a ``closure_class`` of
``open``, ``loop`` or ``antiloop``. Distance-matrix files use ``kind:
distance-matrix``; each data row is a label followed by that row of the
matrix, and ``failure: i j message`` header lines record pairs that could not
be registered; their entries are ``nan``.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .curvecore import Closure, ClosureClass, FramedCurve, GridSpec, QuaternionPath
from .errors import ParseError, PreconditionError

FORMAT_VERSION = 1


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_bool(v: str, path, line) -> bool:
    if v.lower() in ("true", "yes", "1"):
        return True
    if v.lower() in ("false", "no", "0"):
        return False
    raise ParseError(f"expected a boolean, got {v!r}", path, line)


def _split(text: str, path=None):
    """Header dict (key -> (value, line)), repeated failure lines and numeric rows."""
    header: dict[str, tuple[str, int]] = {}
    failures: list[tuple[str, int]] = []
    rows: list[tuple[list[str], int]] = []
    in_data = False
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if in_data:
            rows.append((line.split(), ln))
            continue
        if line == "data:":
            in_data = True
            continue
        if ":" not in line:
            raise ParseError(f"expected 'key: value', got {line!r}", path, ln)
        key, val = line.split(":", 1)
        key, val = key.strip(), val.strip()
        if key == "failure":
            failures.append((val, ln))
        elif key in header:
            raise ParseError(f"duplicate key {key!r}", path, ln)
        else:
            header[key] = (val, ln)
    if not in_data:
        raise ParseError("missing 'data:' section", path, None)
    return header, failures, rows


def _get(header, key, path, default=None):
    if key in header:
        return header[key]
    if default is not None:
        return default, None
    raise ParseError(f"missing header key {key!r}", path, None)


def _numeric(rows, ncols: int, path, allow_nan: bool = False) -> np.ndarray:
    out = np.empty((len(rows), ncols))
    for i, (toks, ln) in enumerate(rows):
        if len(toks) != ncols:
            raise ParseError(f"expected {ncols} columns, got {len(toks)}", path, ln)
        try:
            out[i] = [float(t) for t in toks]
        except ValueError as exc:
            raise ParseError(f"bad number in row: {exc}", path, ln) from None
    ok = np.isfinite(out) | (allow_nan & np.isnan(out))
    if not np.all(ok):
        bad = int(np.flatnonzero(~np.all(ok, axis=1))[0])
        raise ParseError("non-finite value", path, rows[bad][1])
    return out


def _check_version(header, path):
    v, ln = _get(header, "format", path)
    if v != str(FORMAT_VERSION):
        raise ParseError(f"unsupported format version {v!r}", path, ln)


def _check_times(t: np.ndarray, grid: GridSpec, closed: bool, rows, path) -> None:
    expect = grid.times(closed)
    bad = np.flatnonzero(np.abs(t - expect) > 1e-9)
    if bad.size:
        raise ParseError(f"parameter column does not match the grid at sample {int(bad[0])}", path, rows[int(bad[0])][1])


@dataclass
class CurveFile:
    """A base curve with an optional framing, as stored on disk."""

    id: str
    closed: bool
    n_samples: int
    points: np.ndarray
    frame: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_framed(cls, c: FramedCurve, id: str, metadata=None, frame: bool = True) -> "CurveFile":
        return cls(id, c.closed, c.grid.n_samples, np.asarray(c.gamma), np.asarray(c.V) if frame else None, dict(metadata or {}))

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n_samples)

    def to_framed(self) -> FramedCurve:
        if self.frame is None:
            raise PreconditionError(f"curve {self.id!r} has no frame columns")
        return FramedCurve.adapted(self.grid, self.points, self.frame, Closure.CLOSED if self.closed else Closure.OPEN)

    def to_text(self) -> str:
        cols = "t x y z" + (" vx vy vz" if self.frame is not None else "")
        lines = [
            "# framecurve curve",
            f"format: {FORMAT_VERSION}",
            "kind: curve",
            f"id: {self.id}",
            f"closed: {'true' if self.closed else 'false'}",
            f"n_samples: {self.n_samples}",
            f"frame: {'true' if self.frame is not None else 'false'}",
        ]
        lines += [f"meta.{k}: {v}" for k, v in sorted(self.metadata.items())]
        lines += [f"columns: {cols}", "data:"]
        t = self.grid.times(self.closed)
        data = np.column_stack([t, self.points] + ([self.frame] if self.frame is not None else []))
        lines += [" ".join(fmt(x) for x in row) for row in data]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, path=None) -> "CurveFile":
        header, _, rows = _split(text, path)
        _check_version(header, path)
        kind, ln = _get(header, "kind", path, "curve")
        if kind != "curve":
            raise ParseError(f"expected a curve file, got kind {kind!r}", path, ln)
        cid = _get(header, "id", path, "curve")[0]
        closed = _parse_bool(*_get(header, "closed", path), path)
        n_raw, ln = _get(header, "n_samples", path)
        try:
            n = int(n_raw)
            grid = GridSpec(n)
        except ValueError:
            raise ParseError(f"invalid n_samples {n_raw!r}", path, ln) from None
        has_frame = _parse_bool(*_get(header, "frame", path), path)
        ncols = 7 if has_frame else 4
        data = _numeric(rows, ncols, path)
        m = grid.n_points(closed)
        if data.shape[0] != m:
            raise ParseError(f"expected {m} data rows, got {data.shape[0]}", path, None)
        _check_times(data[:, 0], grid, closed, rows, path)
        meta = {k[5:]: v for k, (v, _) in header.items() if k.startswith("meta.")}
        return cls(cid, closed, n, data[:, 1:4], data[:, 4:7] if has_frame else None, meta)

    @classmethod
    def read(cls, path: str) -> "CurveFile":
        try:
            with open(path, encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            raise ParseError(f"cannot read file: {exc.strerror}", path, None) from None
        return cls.from_text(text, path)

    def write(self, path: str) -> None:
        atomic_write(path, self.to_text())


def quaternion_to_text(q: QuaternionPath, id: str, basepoint=None) -> str:
    """Quaternion file text; ``basepoint`` is the base curve's starting point, if known."""
    lines = [
        "# framecurve quaternionic path",
        f"format: {FORMAT_VERSION}",
        "kind: quaternion",
        f"id: {id}",
        f"closure_class: {q.closure_class.value}",
        f"n_samples: {q.grid.n_samples}",
    ]
    if basepoint is not None:
        lines.append("basepoint: " + " ".join(fmt(x) for x in basepoint))
    lines += ["columns: t q0 q1 q2 q3", "data:"]
    t = q.grid.times(q.closed)
    lines += [" ".join(fmt(x) for x in row) for row in np.column_stack([t, q.q])]
    return "\n".join(lines) + "\n"


def quaternion_from_text(text: str, path=None) -> tuple[str, QuaternionPath, np.ndarray]:
    """Returns ``(id, path, basepoint)``; the basepoint defaults to the origin."""
    header, _, rows = _split(text, path)
    _check_version(header, path)
    kind, ln = _get(header, "kind", path)
    if kind != "quaternion":
        raise ParseError(f"expected a quaternion file, got kind {kind!r}", path, ln)
    cls_raw, ln = _get(header, "closure_class", path)
    try:
        cls = ClosureClass(cls_raw)
    except ValueError:
        raise ParseError(f"unknown closure class {cls_raw!r}", path, ln) from None
    n_raw, ln = _get(header, "n_samples", path)
    try:
        grid = GridSpec(int(n_raw))
    except ValueError:
        raise ParseError(f"invalid n_samples {n_raw!r}", path, ln) from None
    data = _numeric(rows, 5, path)
    m = grid.n_points(cls.closed)
    if data.shape[0] != m:
        raise ParseError(f"expected {m} data rows, got {data.shape[0]}", path, None)
    _check_times(data[:, 0], grid, cls.closed, rows, path)
    base = np.zeros(3)
    if "basepoint" in header:
        val, ln = header["basepoint"]
        try:
            base = np.array([float(x) for x in val.split()])
        except ValueError:
            raise ParseError("bad basepoint", path, ln) from None
        if base.shape != (3,) or not np.all(np.isfinite(base)):
            raise ParseError("basepoint needs three finite coordinates", path, ln)
    return _get(header, "id", path, "path")[0], QuaternionPath(grid, data[:, 1:], cls), base


def matrix_to_text(labels, d: np.ndarray, mode: str, failures=None) -> str:
    lines = [
        "# framecurve distance matrix",
        f"format: {FORMAT_VERSION}",
        "kind: distance-matrix",
        f"mode: {mode}",
        f"size: {len(labels)}",
    ]
    for (i, j), msg in sorted((failures or {}).items()):
        lines.append(f"failure: {i} {j} {' '.join(str(msg).split())}")
    lines.append("data:")
    for lab, row in zip(labels, np.asarray(d)):
        if any(ch.isspace() for ch in lab) or not lab:
            raise ValueError(f"label {lab!r} must be non-empty without whitespace")
        lines.append(lab + " " + " ".join(fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str, path=None):
    """Returns ``(labels, d, mode, failures)``."""
    header, fails, rows = _split(text, path)
    _check_version(header, path)
    kind, ln = _get(header, "kind", path)
    if kind != "distance-matrix":
        raise ParseError(f"expected a distance-matrix file, got kind {kind!r}", path, ln)
    mode = _get(header, "mode", path)[0]
    n_raw, ln = _get(header, "size", path)
    try:
        n = int(n_raw)
    except ValueError:
        raise ParseError(f"invalid size {n_raw!r}", path, ln) from None
    if len(rows) != n:
        raise ParseError(f"expected {n} rows, got {len(rows)}", path, None)
    labels = [toks[0] for toks, _ in rows]
    d = _numeric([(toks[1:], ln) for toks, ln in rows], n, path, allow_nan=True)
    failures = {}
    for val, ln in fails:
        parts = val.split(None, 2)
        try:
            failures[(int(parts[0]), int(parts[1]))] = parts[2] if len(parts) > 2 else ""
        except (ValueError, IndexError):
            raise ParseError("malformed failure line", path, ln) from None
    return labels, d, mode, failures
