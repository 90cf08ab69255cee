"""Maps on one-dimensional subspaces and recovery of their semilinear generator.

A map ``phi`` of matrices that sends rank-one projections to rank-one
matrices induces a map on lines, ``C e -> ran phi(P_e)``. If that line map
preserves the relation "``C g`` lies in ``C e + C f``" it is a
projectivity, and (over the complex field, for continuous maps) it comes
from an invertible ``T`` that is either linear or conjugate-linear,
unique up to a scalar. :func:`recover_semilinear` rebuilds ``T`` from
line data alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import DEFAULT_TOL, Tolerances, as_vector, line_projector, numerical_rank, svd
from .preservers import PreserverMap
from .sampling import random_vector, trial_rng

__all__ = [
    "ImageNotRankOne",
    "NotInduced",
    "DegenerateScale",
    "LineMap",
    "SemilinearResult",
    "lines_equal",
    "line_residual",
    "induced_line_map",
    "check_projectivity",
    "recover_semilinear",
    "scalar_fit",
    "swap_lines",
]

LINEAR = "linear"
CONJUGATE = "conjugate-linear"


class ImageNotRankOne(ValueError):
    """The image of a rank-one projection is not of rank one."""


class NotInduced(ValueError):
    """The line map is not induced by any invertible semilinear map."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class DegenerateScale(NotInduced):
    """A scale-fixing coefficient vanished during recovery."""


@dataclass(frozen=True)
class LineMap:
    """Black-box map on lines of ``C^dimension``.

    ``action`` takes a non-zero vector and returns a non-zero vector whose
    span is the image line. It must be a pure function.
    """

    dimension: int
    action: Callable[[np.ndarray], np.ndarray]

    def __call__(self, v) -> np.ndarray:
        return np.asarray(self.action(as_vector(v)), dtype=np.complex128)


@dataclass(frozen=True)
class SemilinearResult:
    T: np.ndarray
    flavor: str
    residual: float

    @property
    def conjugate_linear(self) -> bool:
        return self.flavor == CONJUGATE

    def __call__(self, v) -> np.ndarray:
        v = as_vector(v)
        return self.T @ (v.conj() if self.conjugate_linear else v)

    def normalized(self) -> np.ndarray:
        """``T`` rescaled by a unit phase so its largest-magnitude entry is real positive."""
        flat = self.T.ravel()
        k = int(np.argmax(np.abs(flat)))
        z = flat[k]
        out = self.T * (abs(z) / z)
        out.flat[k] = abs(z)  # exactly real, not real up to rounding
        return out


def line_residual(u, v) -> float:
    """``||u - <u, v̂> v̂|| / ||u||``: relative distance of ``u`` from the line of ``v``."""
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("lines_equal needs non-zero vectors")
    vh = v / nv
    return float(np.linalg.norm(u - np.vdot(vh, u) * vh) / nu)


def lines_equal(u, v, tol: Tolerances = DEFAULT_TOL) -> bool:
    return line_residual(u, v) <= tol.line_tol


def induced_line_map(phi: PreserverMap, dim: int | None = None, tol: Tolerances = DEFAULT_TOL) -> LineMap:
    """Line map ``e -> ran phi(P_e)``.

    The returned action raises :class:`ImageNotRankOne` on any line whose
    image is not one-dimensional.
    """
    dim = phi.dim if dim is None else dim
    if dim != phi.dim:
        raise ValueError(f"map acts on dimension {phi.dim}, not {dim}")
    if not phi.acts_on_vectors:
        raise ValueError(f"{type(phi).__name__} is not defined on rank-one matrices")

    def action(e: np.ndarray) -> np.ndarray:
        image = phi.apply(line_projector(e))
        f = svd(image)
        r = numerical_rank(image, tol)
        if r != 1:
            raise ImageNotRankOne(f"image of a rank-one projection has rank {r}")
        return f.left[:, 0]

    return LineMap(dim, action)


def _orth(*vectors: np.ndarray, tol: Tolerances) -> np.ndarray:
    M = np.column_stack(vectors)
    f = svd(M)
    r = numerical_rank(M, tol)
    return f.left[:, :r]


def _span_distance(g: np.ndarray, Q: np.ndarray) -> float:
    return float(np.linalg.norm(g - Q @ (Q.conj().T @ g)) / np.linalg.norm(g))


def _probe_vectors(n: int) -> list[np.ndarray]:
    eye = np.eye(n, dtype=np.complex128)
    probes = [eye[i] for i in range(n)]
    probes += [eye[0] + eye[j] for j in range(1, n)]
    if n >= 2:
        probes.append(eye[0] + 1j * eye[1])
    return probes


def check_projectivity(lm: LineMap, samples: int, seed: int, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Test that ``lm`` preserves "lies in the span of two lines" both ways.

    Runs over every triple from a fixed probe set (the coordinate lines,
    ``e_1 + e_j`` and ``e_1 + i e_2``, which are the lines recovery relies
    on) and then over ``samples`` seeded random triples: a point in the
    span of two random lines, and, for ``dimension >= 3``, a point off it.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n = lm.dimension
    probes = _probe_vectors(n)
    images = [lm(p) for p in probes]

    for a in range(len(probes)):
        for b in range(a + 1, len(probes)):
            Qs = _orth(probes[a], probes[b], tol=tol)
            Qt = _orth(images[a], images[b], tol=tol)
            if Qs.shape[1] != Qt.shape[1]:
                return False
            for c in range(len(probes)):
                inside = _span_distance(probes[c], Qs) <= tol.line_tol
                inside_img = _span_distance(images[c], Qt) <= tol.line_tol
                if inside != inside_img:
                    return False

    for k in range(samples):
        rng = trial_rng(seed, k)
        e = random_vector(rng, n)
        f = random_vector(rng, n)
        alpha, beta = random_vector(rng, 2)
        Qt = _orth(lm(e), lm(f), tol=tol)
        if Qt.shape[1] != min(2, n):
            return False
        if _span_distance(lm(alpha * e + beta * f), Qt) > tol.line_tol:
            return False
        if n >= 3:
            g = random_vector(rng, n)
            if _span_distance(g, _orth(e, f, tol=tol)) > tol.line_tol:
                if _span_distance(lm(g), Qt) <= tol.line_tol:
                    return False
    return True


def _coefficients(w: np.ndarray, f1: np.ndarray, f2: np.ndarray) -> tuple[complex, complex, float]:
    M = np.column_stack([f1, f2])
    c, *_ = np.linalg.lstsq(M, w, rcond=None)
    resid = float(np.linalg.norm(M @ c - w) / np.linalg.norm(w))
    return complex(c[0]), complex(c[1]), resid


def recover_semilinear(
    lm: LineMap,
    dim: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
    validation: int = 100,
    seed: int = 0,
) -> SemilinearResult:
    """Rebuild the semilinear generator of a projectivity from line data.

    1. ``f_i`` spans the image of the coordinate line ``e_i``.
    2. The image of ``e_1 + e_i`` fixes the scale of ``f_i`` against ``f_1``.
    3. The image of ``e_1 + i e_2`` has coefficient ratio ``+i`` for a
       linear generator and ``-i`` for a conjugate-linear one.
    4. ``T = [f_1 ... f_n]`` is validated on ``validation`` seeded vectors.

    Raises
    ------
    DegenerateScale
        If a scale-fixing coefficient is numerically zero.
    NotInduced
        If any probe leaves the expected plane or validation fails.
    """
    n = lm.dimension if dim is None else dim
    if n != lm.dimension:
        raise ValueError(f"line map acts on dimension {lm.dimension}, not {n}")
    eye = np.eye(n, dtype=np.complex128)
    cols = []
    for i in range(n):
        f = lm(eye[i])
        cols.append(f / np.linalg.norm(f))

    for i in range(1, n):
        a, b, resid = _coefficients(lm(eye[0] + eye[i]), cols[0], cols[i])
        if resid > tol.line_tol:
            raise NotInduced(f"image of e_1 + e_{i + 1} leaves the expected plane", resid)
        if min(abs(a), abs(b)) <= tol.line_tol * max(abs(a), abs(b), 1e-300):
            raise DegenerateScale(f"scale coefficient for e_{i + 1} vanished")
        cols[i] = cols[i] * (b / a)

    flavor = LINEAR
    if n >= 2:
        a, b, resid = _coefficients(lm(eye[0] + 1j * eye[1]), cols[0], cols[1])
        if resid > tol.line_tol or abs(a) == 0.0:
            raise NotInduced("image of e_1 + i e_2 leaves the expected plane", resid)
        ratio = b / a
        flavor = LINEAR if abs(ratio - 1j) <= abs(ratio + 1j) else CONJUGATE

    T = np.column_stack(cols)
    if numerical_rank(T, tol) != n:
        raise NotInduced("recovered generator is singular")
    result = SemilinearResult(T, flavor, 0.0)

    worst = 0.0
    for k in range(validation):
        v = random_vector(trial_rng(seed, k), n)
        worst = max(worst, line_residual(result(v), lm(v)))
    if worst > tol.line_tol:
        raise NotInduced(f"validation failed: line residual {worst:.3e}", worst)
    return SemilinearResult(T, flavor, worst)


def scalar_fit(T, G) -> tuple[complex, float]:
    """Best ``c`` with ``T ≈ c G`` and the relative residual ``||T - cG|| / ||T||``."""
    T = np.asarray(T, dtype=np.complex128)
    G = np.asarray(G, dtype=np.complex128)
    c = np.vdot(G, T) / np.vdot(G, G)
    return complex(c), float(np.linalg.norm(T - c * G) / np.linalg.norm(T))


def swap_lines(lm: LineMap, u, v, tol: Tolerances = DEFAULT_TOL) -> LineMap:
    """``lm`` with the images of the lines of ``u`` and ``v`` exchanged.

    Used to build line maps that are bijective but not projectivities.
    """
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    img_u, img_v = lm(u), lm(v)

    def action(e):
        if lines_equal(e, u, tol):
            return img_v
        if lines_equal(e, v, tol):
            return img_u
        return lm(e)

    return LineMap(lm.dimension, action)
