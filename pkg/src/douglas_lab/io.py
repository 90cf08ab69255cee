"""Matrix files and map descriptors.

Matrix file (JSON)::

    {"rows": 2, "cols": 2, "data": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]}

``data`` lists the entries row-major as ``[re, im]`` pairs.

Map descriptor (JSON)::

    {"kind": "unitary", "matrix": "U.json"}
    {"kind": "composite", "maps": [{"kind": "anti-unitary", "matrix": "U.json"},
                                   {"kind": "similarity", "matrix": {...inline...}}]}

``kind`` is one of ``unitary``, ``anti-unitary``, ``similarity``,
``inverse-adjoint`` or ``composite``. ``matrix`` is a path (relative to
the descriptor file) or an inline matrix object. Composites list their
factors outermost first. Any descriptor may carry ``"swap": [u, v]``
(vectors as ``[re, im]`` pair lists); this exchanges the lines of ``u``
and ``v`` in the induced line map and is used to build adversarial
inputs for recovery.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .linalg import DEFAULT_TOL, Tolerances
from .preservers import AntiUnitary, Composite, InverseAdjoint, PreserverMap, Similarity, Unitary

__all__ = [
    "MatrixFormatError",
    "DescriptorError",
    "matrix_to_dict",
    "matrix_from_dict",
    "vector_to_list",
    "vector_from_list",
    "read_matrix",
    "write_matrix",
    "load_descriptor",
    "parse_descriptor",
]

MAP_KINDS = {
    "unitary": Unitary,
    "anti-unitary": AntiUnitary,
    "similarity": Similarity,
    "inverse-adjoint": InverseAdjoint,
}


class MatrixFormatError(ValueError):
    pass


class DescriptorError(ValueError):
    pass


def matrix_to_dict(M) -> dict:
    M = np.asarray(M, dtype=np.complex128)
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in M.ravel()],
    }


def _pair(item, where: str) -> complex:
    if not isinstance(item, (list, tuple)) or len(item) != 2:
        raise MatrixFormatError(f"{where}: expected an [re, im] pair, got {item!r}")
    re, im = item
    for part in (re, im):
        if isinstance(part, bool) or not isinstance(part, (int, float)):
            raise MatrixFormatError(f"{where}: non-numeric component {part!r}")
        if not math.isfinite(part):
            raise MatrixFormatError(f"{where}: non-finite component {part!r}")
    return complex(re, im)


def matrix_from_dict(obj) -> np.ndarray:
    if not isinstance(obj, dict):
        raise MatrixFormatError("matrix document must be an object with rows, cols, data")
    for key in ("rows", "cols", "data"):
        if key not in obj:
            raise MatrixFormatError(f"missing field {key!r}")
    rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    for key, value in (("rows", rows), ("cols", cols)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise MatrixFormatError(f"field {key!r} must be a positive integer, got {value!r}")
    if not isinstance(data, list):
        raise MatrixFormatError("field 'data' must be a list")
    if len(data) != rows * cols:
        raise MatrixFormatError(
            f"data has {len(data)} entries, expected rows*cols = {rows * cols}"
        )
    values = [_pair(item, f"data[{i}] (row {i // cols}, col {i % cols})") for i, item in enumerate(data)]
    return np.array(values, dtype=np.complex128).reshape(rows, cols)


def vector_to_list(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=np.complex128)]


def vector_from_list(items, where: str = "vector") -> np.ndarray:
    if not isinstance(items, list) or not items:
        raise MatrixFormatError(f"{where}: expected a non-empty list of [re, im] pairs")
    return np.array([_pair(x, f"{where}[{i}]") for i, x in enumerate(items)], dtype=np.complex128)


def _load_json(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise MatrixFormatError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    try:
        return matrix_from_dict(_load_json(path))
    except MatrixFormatError as exc:
        msg = str(exc)
        raise MatrixFormatError(msg if msg.startswith(str(path)) else f"{path}: {msg}") from None


def write_matrix(path, M) -> None:
    Path(path).write_text(json.dumps(matrix_to_dict(M)) + "\n")


def _matrix_ref(ref, base: Path) -> np.ndarray:
    if isinstance(ref, str):
        return read_matrix(base / ref)
    if isinstance(ref, dict):
        return matrix_from_dict(ref)
    raise DescriptorError(f"'matrix' must be a path or an inline matrix, got {ref!r}")


def parse_descriptor(obj, base: Path = Path("."), tol: Tolerances = DEFAULT_TOL) -> tuple[PreserverMap, tuple | None]:
    """Build a map from a descriptor object.

    Returns ``(map, swap)`` where ``swap`` is ``None`` or a pair of vectors.
    """
    if not isinstance(obj, dict) or "kind" not in obj:
        raise DescriptorError("descriptor must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "composite":
        parts = obj.get("maps")
        if not isinstance(parts, list) or not parts:
            raise DescriptorError("composite descriptor needs a non-empty 'maps' list")
        maps = tuple(parse_descriptor(p, base, tol)[0] for p in parts)
        phi = Composite(maps)
    elif kind in MAP_KINDS:
        if "matrix" not in obj:
            raise DescriptorError(f"{kind} descriptor needs a 'matrix' field")
        M = _matrix_ref(obj["matrix"], base)
        try:
            phi = MAP_KINDS[kind](M, tol)
        except ValueError as exc:
            raise DescriptorError(f"{kind}: {exc}") from exc
    else:
        raise DescriptorError(f"unknown map kind {kind!r}")

    swap = None
    if "swap" in obj:
        pair = obj["swap"]
        if not isinstance(pair, list) or len(pair) != 2:
            raise DescriptorError("'swap' must list exactly two vectors")
        swap = (vector_from_list(pair[0], "swap[0]"), vector_from_list(pair[1], "swap[1]"))
        if any(v.size != phi.dim for v in swap):
            raise DescriptorError(f"swap vectors must have dimension {phi.dim}")
    return phi, swap


def load_descriptor(path, tol: Tolerances = DEFAULT_TOL) -> tuple[PreserverMap, tuple | None]:
    path = Path(path)
    try:
        obj = _load_json(path)
    except MatrixFormatError as exc:
        raise DescriptorError(str(exc)) from None
    return parse_descriptor(obj, path.parent, tol)
