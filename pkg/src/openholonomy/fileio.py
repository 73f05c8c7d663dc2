"""
Plain-text file formats.

Frame and projector files
    First line ``N K n_samples``. Then one line per sample: the parameter s
    followed by the matrix entries as ``re im`` pairs, row-major (basis index
    outer, column index inner). Frame files carry N*K entries per sample,
    projector files N*N. Blank lines and lines starting with ``#`` are
    ignored. Floats are written with ``repr`` so files round-trip exactly.

Result documents
    JSON with sorted keys and two-space indentation; complex numbers are
    ``[re, im]`` pairs and matrices are nested row lists of such pairs.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import FileFormatError


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_matrices(path, s_values, mats, n, k):
    lines = [f"{n} {k} {len(mats)}"]
    for s, m in zip(s_values, mats):
        flat = np.asarray(m, dtype=complex).reshape(-1)
        parts = [_fmt(s)]
        for z in flat:
            parts.append(_fmt(z.real))
            parts.append(_fmt(z.imag))
        lines.append(" ".join(parts))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_matrices(path, projector: bool):
    with open(path) as fh:
        raw = fh.readlines()
    rows = [(i + 1, ln.split()) for i, ln in enumerate(raw) if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise FileFormatError("empty file", line=1)
    lineno, head = rows[0]
    try:
        n, k, count = (int(x) for x in head)
    except ValueError:
        raise FileFormatError(f"header must be 'N K n_samples', got {' '.join(head)!r}", line=lineno)
    if n < 1 or k < 1 or k > n or count < 2:
        raise FileFormatError(f"invalid header values N={n} K={k} n_samples={count}", line=lineno)
    cols = n if projector else k
    expected = 1 + 2 * n * cols
    body = rows[1:]
    if len(body) != count:
        raise FileFormatError(f"header announces {count} samples, found {len(body)}", line=lineno)
    s_values, mats = [], []
    for lineno, toks in body:
        if len(toks) != expected:
            raise FileFormatError(f"expected {expected} numbers, found {len(toks)}", line=lineno)
        try:
            vals = np.array([float(t) for t in toks])
        except ValueError as exc:
            raise FileFormatError(str(exc), line=lineno)
        if not np.all(np.isfinite(vals)):
            raise FileFormatError("non-finite value", line=lineno)
        s_values.append(vals[0])
        z = vals[1::2] + 1j * vals[2::2]
        mats.append(z.reshape(n, cols))
    return n, k, np.array(s_values), mats, [ln for ln, _ in body]


def write_frame_file(path, frames, s_values=None) -> None:
    mats = [getattr(f, "columns", f) for f in frames]
    n, k = np.shape(mats[0])
    if s_values is None:
        s_values = np.linspace(0.0, 1.0, len(mats))
    _write_matrices(path, s_values, mats, n, k)


def read_frame_file(path):
    """Return ``(s_values, [N x K arrays], line_numbers)``."""
    _, _, s, mats, lines = _read_matrices(path, projector=False)
    return s, mats, lines


def write_projector_file(path, projectors, rank: int, s_values=None) -> None:
    n = np.shape(projectors[0])[0]
    if s_values is None:
        s_values = np.linspace(0.0, 1.0, len(projectors))
    _write_matrices(path, s_values, projectors, n, rank)


def read_projector_file(path):
    """Return ``(rank, s_values, [N x N arrays], line_numbers)``."""
    _, k, s, mats, lines = _read_matrices(path, projector=True)
    return k, s, mats, lines


def encode(value):
    """Make numpy scalars/arrays JSON-ready; complex values become [re, im]."""
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, np.ndarray):
        return encode(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def decode_matrix(rows) -> np.ndarray:
    """Inverse of ``encode`` for a matrix or vector of [re, im] pairs."""
    arr = np.asarray(rows, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def dumps_result(doc: dict) -> str:
    return json.dumps(encode(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def loads_result(text: str) -> dict:
    return json.loads(text)
