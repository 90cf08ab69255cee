"""Candidate transformations of square matrices and the preservation tests.

A map ``phi`` preserves reduced solutions in both directions when, for
all ``B, X`` with ``A = B X``,

    ``A = B X`` and ``ran X ⊆ [ker B]^perp``
    iff ``phi(A) = phi(B) phi(X)`` and ``ran phi(X) ⊆ [ker phi(B)]^perp``.

Unitary and anti-unitary conjugations have this property. The other
kinds modelled here (similarities and the inverse-adjoint form) are the
candidates that must be ruled out, and the checks in this module are
built to expose them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .douglas import _douglas_residuals
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    adjoint,
    as_matrix,
    as_vector,
    kernel_basis,
    kernel_projector,
    numerical_rank,
    op_norm,
    rank_one,
)
from .sampling import random_douglas_triple, trial_rng

__all__ = [
    "SingularInput",
    "SkippedInapplicable",
    "PreconditionViolation",
    "WrongMapKind",
    "PreserverMap",
    "Unitary",
    "AntiUnitary",
    "Similarity",
    "InverseAdjoint",
    "Composite",
    "Witness",
    "BlowupReport",
    "apply",
    "preserves_triple",
    "check_multiplicativity",
    "check_projection_preservation",
    "check_rank_one_covariance",
    "kernel_image_check",
    "claim12_check",
    "classify_scalar_unitary",
    "falsify",
    "eigen_blowup_demo",
]


class SingularInput(ValueError):
    """A map defined only on invertible matrices received a singular one."""


class SkippedInapplicable(Exception):
    """A triple could not be evaluated because the map is undefined on it."""


class PreconditionViolation(ValueError):
    pass


class WrongMapKind(TypeError):
    pass


def _require_unitary(U: np.ndarray, tol: Tolerances) -> None:
    n = U.shape[0]
    if U.shape != (n, n) or op_norm(adjoint(U) @ U - np.eye(n)) > tol.residual_abs:
        raise ValueError("matrix is not unitary within tolerance")


def _require_invertible(S: np.ndarray, tol: Tolerances) -> None:
    n = S.shape[0]
    if S.shape != (n, n) or numerical_rank(S, tol) != n:
        raise ValueError("matrix is not invertible within tolerance")


class PreserverMap:
    """Base class. Subclasses implement :meth:`apply` and, where defined,
    :meth:`vector` (the induced action on vectors)."""

    dim: int
    conjugate_linear: bool = False

    def apply(self, A: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def vector(self, x: np.ndarray) -> np.ndarray:
        raise WrongMapKind(f"{type(self).__name__} has no induced vector action")

    @property
    def acts_on_vectors(self) -> bool:
        return True

    def __call__(self, A) -> np.ndarray:
        return self.apply(A)

    def _check(self, A) -> np.ndarray:
        A = as_matrix(A)
        if A.shape != (self.dim, self.dim):
            raise ValueError(f"expected a {self.dim}x{self.dim} matrix, got {A.shape}")
        return A


@dataclass(frozen=True, eq=False)
class Unitary(PreserverMap):
    """``A -> U A U^*``."""

    U: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "U", as_matrix(self.U, "U"))
        _require_unitary(self.U, self.tol)

    @property
    def dim(self) -> int:
        return self.U.shape[0]

    def apply(self, A):
        return self.U @ self._check(A) @ adjoint(self.U)

    def vector(self, x):
        return self.U @ as_vector(x)


@dataclass(frozen=True, eq=False)
class AntiUnitary(PreserverMap):
    """``A -> U conj(A) U^*``: conjugation by the anti-unitary ``x -> U conj(x)``."""

    U: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)
    conjugate_linear = True

    def __post_init__(self):
        object.__setattr__(self, "U", as_matrix(self.U, "U"))
        _require_unitary(self.U, self.tol)

    @property
    def dim(self) -> int:
        return self.U.shape[0]

    def apply(self, A):
        return self.U @ self._check(A).conj() @ adjoint(self.U)

    def vector(self, x):
        return self.U @ as_vector(x).conj()


@dataclass(frozen=True, eq=False)
class Similarity(PreserverMap):
    """``A -> S A S^-1``."""

    S: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "S", as_matrix(self.S, "S"))
        _require_invertible(self.S, self.tol)
        object.__setattr__(self, "_S_inv", np.linalg.inv(self.S))

    @property
    def dim(self) -> int:
        return self.S.shape[0]

    def apply(self, A):
        return self.S @ self._check(A) @ self._S_inv

    def vector(self, x):
        return self.S @ as_vector(x)


@dataclass(frozen=True, eq=False)
class InverseAdjoint(PreserverMap):
    """``A -> (S A^-1 S^-1)^*``, defined on invertible ``A`` only."""

    S: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "S", as_matrix(self.S, "S"))
        _require_invertible(self.S, self.tol)
        object.__setattr__(self, "_S_inv", np.linalg.inv(self.S))

    @property
    def dim(self) -> int:
        return self.S.shape[0]

    @property
    def acts_on_vectors(self) -> bool:
        return False

    def apply(self, A):
        A = self._check(A)
        if numerical_rank(A, self.tol) != self.dim:
            raise SingularInput("inverse-adjoint map is defined on invertible matrices only")
        return adjoint(self.S @ np.linalg.inv(A) @ self._S_inv)


@dataclass(frozen=True, eq=False)
class Composite(PreserverMap):
    """Composition ``maps[0] ∘ maps[1] ∘ ...``; the last map is applied first.

    With this order ``Composite([Unitary(U), Unitary(V)])`` equals
    ``Unitary(U @ V)``.
    """

    maps: tuple

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("Composite needs at least one map")
        dims = {m.dim for m in maps}
        if len(dims) != 1:
            raise ValueError(f"component maps disagree on dimension: {sorted(dims)}")
        object.__setattr__(self, "maps", maps)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def conjugate_linear(self) -> bool:
        return sum(m.conjugate_linear for m in self.maps) % 2 == 1

    @property
    def acts_on_vectors(self) -> bool:
        return all(m.acts_on_vectors for m in self.maps)

    def apply(self, A):
        for m in reversed(self.maps):
            A = m.apply(A)
        return A

    def vector(self, x):
        for m in reversed(self.maps):
            x = m.vector(x)
        return x


def apply(phi: PreserverMap, A) -> np.ndarray:
    return phi.apply(A)


@dataclass(frozen=True)
class Witness:
    """A triple on which ``phi`` breaks the biconditional.

    ``direction`` is ``"forward"`` when the source triple is a reduced
    solution but its image is not, ``"backward"`` for the converse.
    ``violated`` names the failing clause(s) on the failing side:
    ``"factorization"``, ``"range"`` or ``"factorization+range"``.
    """

    B: np.ndarray
    X: np.ndarray
    A: np.ndarray
    direction: str
    violated: str
    residual: float
    trial: Optional[int] = None

    def as_dict(self) -> dict:
        return {
            "direction": self.direction,
            "violated": self.violated,
            "residual": self.residual,
            "trial": self.trial,
        }


def _clauses(factor: float, leak: float, a_norm: float, tol: Tolerances) -> tuple[str, float]:
    bad = []
    worst = 0.0
    if factor > tol.residual_abs * (1.0 + a_norm):
        bad.append("factorization")
        worst = max(worst, factor)
    if leak > tol.residual_abs:
        bad.append("range")
        worst = max(worst, leak)
    return "+".join(bad), worst


def preserves_triple(
    phi: PreserverMap, B, X, tol: Tolerances = DEFAULT_TOL
) -> tuple[bool, Optional[Witness]]:
    """Evaluate both sides of the biconditional on ``(B, X, A = B X)``.

    Returns ``(True, None)`` when both sides agree, else ``(False, witness)``.

    Raises
    ------
    SkippedInapplicable
        If ``phi`` is undefined on ``B``, ``X`` or ``A``.
    """
    B = as_matrix(B, "B")
    X = as_matrix(X, "X")
    A = B @ X
    try:
        pB, pX, pA = phi.apply(B), phi.apply(X), phi.apply(A)
    except SingularInput as exc:
        raise SkippedInapplicable(str(exc)) from exc

    f_src, l_src, ok_src = _douglas_residuals(B, A, X, tol)
    f_tgt, l_tgt, ok_tgt = _douglas_residuals(pB, pA, pX, tol)
    if ok_src == ok_tgt:
        return True, None
    if ok_src:
        violated, residual = _clauses(f_tgt, l_tgt, op_norm(pA), tol)
        direction = "forward"
    else:
        violated, residual = _clauses(f_src, l_src, op_norm(A), tol)
        direction = "backward"
    return False, Witness(B=B, X=X, A=A, direction=direction, violated=violated, residual=residual)


def check_multiplicativity(phi: PreserverMap, B, D, tol: Tolerances = DEFAULT_TOL) -> bool:
    """``phi(B D) == phi(B) phi(D)`` for ``ran D ⊆ [ker B]^perp``.

    Raises
    ------
    PreconditionViolation
        If ``ran D`` is not contained in ``[ker B]^perp``.
    """
    B = as_matrix(B, "B")
    D = as_matrix(D, "D")
    if op_norm(kernel_projector(B, tol) @ D) > tol.residual_abs:
        raise PreconditionViolation("ran D is not contained in [ker B]^perp")
    BD = B @ D
    gap = op_norm(phi.apply(BD) - phi.apply(B) @ phi.apply(D))
    return gap <= tol.residual_abs * (1.0 + op_norm(BD))


def check_projection_preservation(phi: PreserverMap, P, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether ``phi(P)`` is again an orthogonal projection."""
    P = as_matrix(P, "P")
    if op_norm(P @ P - P) > tol.residual_abs or op_norm(adjoint(P) - P) > tol.residual_abs:
        raise PreconditionViolation("P is not an orthogonal projection")
    Q = phi.apply(P)
    return op_norm(Q @ Q - Q) <= tol.residual_abs and op_norm(adjoint(Q) - Q) <= tol.residual_abs


def _require_isometric(phi: PreserverMap) -> None:
    if not isinstance(phi, (Unitary, AntiUnitary)):
        raise WrongMapKind(f"expected Unitary or AntiUnitary, got {type(phi).__name__}")


def check_rank_one_covariance(phi: PreserverMap, x, y, tol: Tolerances = DEFAULT_TOL) -> bool:
    """``phi(x ⊗ y) == (image of x) ⊗ (image of y)``."""
    _require_isometric(phi)
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    gap = op_norm(phi.apply(rank_one(x, y)) - rank_one(phi.vector(x), phi.vector(y)))
    return gap <= tol.residual_abs * (1.0 + np.linalg.norm(x) * np.linalg.norm(y))


def kernel_image_check(phi: PreserverMap, A, tol: Tolerances = DEFAULT_TOL) -> bool:
    """``ker phi(A)`` equals the image of ``ker A`` under the vector action."""
    _require_isometric(phi)
    A = as_matrix(A, "A")
    K = kernel_basis(A, tol).basis
    mapped = np.column_stack([phi.vector(K[:, j]) for j in range(K.shape[1])]) if K.shape[1] else K
    # Images of an orthonormal basis under an (anti-)unitary stay orthonormal.
    P_image = mapped @ adjoint(mapped)
    return op_norm(kernel_projector(phi.apply(A), tol) - P_image) <= tol.residual_abs


def claim12_check(phi: PreserverMap, B, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Surjectivity and injectivity of ``B`` are both mirrored by ``phi(B)``.

    Raises
    ------
    SkippedInapplicable
        If ``phi`` is undefined on ``B``.
    """
    B = as_matrix(B, "B")
    try:
        pB = phi.apply(B)
    except SingularInput as exc:
        raise SkippedInapplicable(str(exc)) from exc
    n = B.shape[0]
    onto = numerical_rank(B, tol) == n
    onto_img = numerical_rank(pB, tol) == n
    injective = kernel_basis(B, tol).dim == 0
    injective_img = kernel_basis(pB, tol).dim == 0
    return onto == onto_img and injective == injective_img


def classify_scalar_unitary(T, tol: Tolerances = DEFAULT_TOL) -> Optional[float]:
    """Return ``alpha`` if ``T = alpha * (unitary)``, else ``None``.

    ``alpha`` is ``||T e_1||``. Anti-unitary multiples are handled by
    classifying ``T`` as the matrix of ``x -> T conj(x)``.

    Raises
    ------
    SingularInput
        If ``T`` is not invertible.
    """
    T = as_matrix(T, "T")
    n = T.shape[0]
    if T.shape[1] != n or numerical_rank(T, tol) != n:
        raise SingularInput("classify_scalar_unitary needs an invertible matrix")
    alpha = float(np.linalg.norm(T[:, 0]))
    if op_norm(adjoint(T) @ T - alpha**2 * np.eye(n)) <= tol.residual_abs * alpha**2:
        return alpha
    return None


def falsify(
    phi: PreserverMap,
    dim: int,
    trials: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOL,
    triple: Callable[[np.random.Generator, int, Tolerances], tuple] = random_douglas_triple,
) -> Optional[Witness]:
    """Search seeded random reduced-solution triples for a counterexample.

    Returns the first :class:`Witness` found, or ``None``. ``None`` is an
    inconclusive outcome, not evidence that ``phi`` preserves reduced
    solutions. Trial ``k`` draws from :func:`trial_rng(seed, k)`.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if phi.dim != dim:
        raise ValueError(f"map acts on dimension {phi.dim}, not {dim}")
    for k in range(trials):
        B, X, _ = triple(trial_rng(seed, k), dim, tol)
        try:
            ok, witness = preserves_triple(phi, B, X, tol)
        except SkippedInapplicable:
            continue
        if not ok:
            return Witness(
                B=witness.B, X=witness.X, A=witness.A, direction=witness.direction,
                violated=witness.violated, residual=witness.residual, trial=k,
            )
    return None


@dataclass(frozen=True)
class BlowupReport:
    n: int
    eigenvalues: list
    max_imag: float
    eigen_residuals: list
    scalar_residuals: list
    norm: float
    identity_residual: float
    growth: list

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "eigenvalues": self.eigenvalues,
            "max_imag": self.max_imag,
            "eigen_residuals": self.eigen_residuals,
            "scalar_residuals": self.scalar_residuals,
            "norm": self.norm,
            "identity_residual": self.identity_residual,
            "growth": self.growth,
        }


def eigen_blowup_demo(n: int, S=None) -> BlowupReport:
    """Finite-dimensional picture of why the inverse-adjoint form is impossible.

    Take ``A = diag(1, 1/2, ..., 1/n)`` and ``P_k = e_k ⊗ e_k``. Since
    ``A P_k = (1/k) P_k`` and the inverse-adjoint form sends ``(1/k) I`` to
    ``k I``, multiplicativity would force ``phi(A) phi(P_k) = k phi(P_k)``:
    every ``k`` would be an eigenvalue of ``phi(A)``. Here ``phi(A)`` is
    computed directly and shown to carry eigenvalue ``k`` on the vector
    ``S^{-*} e_k`` for each ``k``, so ``||phi(A)|| >= n`` grows without bound.

    ``growth`` lists ``[m, ||phi(A_m)||]`` for ``m = 2..n`` with ``S = I``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    S = np.eye(n, dtype=np.complex128) if S is None else as_matrix(S, "S")
    phi = InverseAdjoint(S)
    S_inv_adj = adjoint(np.linalg.inv(S))

    A = np.diag(1.0 / np.arange(1, n + 1)).astype(np.complex128)
    pA = phi.apply(A)
    eig = np.linalg.eigvals(pA)
    eig = eig[np.lexsort((eig.imag, eig.real))]

    eigen_res = []
    scalar_res = []
    for k in range(1, n + 1):
        v = S_inv_adj[:, k - 1]
        eigen_res.append(float(np.linalg.norm(pA @ v - k * v) / np.linalg.norm(v)))
        scalar_res.append(op_norm(phi.apply(np.eye(n) / k) - k * np.eye(n)))

    growth = []
    for m in range(2, n + 1):
        Am = np.diag(1.0 / np.arange(1, m + 1)).astype(np.complex128)
        growth.append([m, op_norm(adjoint(np.linalg.inv(Am)))])

    return BlowupReport(
        n=n,
        eigenvalues=[float(x) for x in eig.real],
        max_imag=float(np.abs(eig.imag).max()),
        eigen_residuals=eigen_res,
        scalar_residuals=scalar_res,
        norm=op_norm(pA),
        identity_residual=op_norm(phi.apply(np.eye(n)) - np.eye(n)),
        growth=growth,
    )
