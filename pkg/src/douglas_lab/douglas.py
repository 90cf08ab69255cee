"""Solvability of ``B X = A`` and the reduced (Douglas) solution.

For ``B`` and ``A`` with the same number of rows the following are
equivalent in exact arithmetic:

* the equation ``B X = A`` has a solution,
* ``||A^* x|| <= lam ||B^* x||`` for some finite ``lam`` and every ``x``,
* ``ran A`` is contained in ``ran B``.

:func:`range_included` evaluates all three through separate numerical
routes and refuses to silently pick one when they disagree.
:func:`douglas_solve` returns the unique solution whose range lies in
``[ker B]^perp``, together with a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    _rank_from_singulars,
    adjoint,
    as_matrix,
    kernel_basis,
    kernel_projector,
    numerical_rank,
    op_norm,
    pinv,
    svd,
)

__all__ = [
    "DimensionMismatch",
    "NotSolvable",
    "InconsistentSolvability",
    "SolvabilityReport",
    "DouglasCertificate",
    "CertificateReport",
    "range_included",
    "majorization_constant",
    "douglas_solve",
    "is_douglas_solution",
    "verify_certificate",
    "maximizing_vector",
    "sampled_ratio",
]

# Margins within this factor of the threshold (either side) are "marginal".
MARGINAL_FACTOR = 10.0


class DimensionMismatch(ValueError):
    pass


class NotSolvable(ArithmeticError):
    """``ran A`` is not contained in ``ran B``."""

    def __init__(self, inclusion_margin: float, report: "SolvabilityReport | None" = None):
        super().__init__(f"range inclusion fails: margin {inclusion_margin:.3e}")
        self.inclusion_margin = inclusion_margin
        self.report = report


class InconsistentSolvability(ArithmeticError):
    """The three solvability indicators disagree away from the threshold."""


@dataclass(frozen=True)
class SolvabilityReport:
    """Outcome of the three equivalent solvability tests.

    ``inclusion_margin`` is ``||(I - P_ran B) A||``. ``solve_residual`` is
    ``||B B^+ A - A||`` and ``kernel_leak`` is ``||A^* restricted to ker B^*||``,
    the quantities behind the "has a solution" and "finite majorization
    constant" indicators.
    """

    solvable: bool
    inclusion_margin: float
    lambda_min: float
    threshold: float
    solve_residual: float
    kernel_leak: float
    marginal: bool

    @property
    def indicators(self) -> tuple[bool, bool, bool]:
        """(has solution, finite constant, range inclusion)."""
        return (
            self.solve_residual <= self.threshold,
            self.kernel_leak <= self.threshold,
            self.inclusion_margin <= self.threshold,
        )

    def as_dict(self) -> dict:
        return {
            "solvable": self.solvable,
            "inclusion_margin": self.inclusion_margin,
            "lambda_min": None if math.isinf(self.lambda_min) else self.lambda_min,
            "threshold": self.threshold,
            "solve_residual": self.solve_residual,
            "kernel_leak": self.kernel_leak,
            "marginal": self.marginal,
        }


@dataclass(frozen=True)
class DouglasCertificate:
    solution: np.ndarray
    factor_residual: float
    d1_residual: float
    d2_ok: bool
    d3_gap: float
    lambda_min: float
    tol: Tolerances = DEFAULT_TOL
    a_norm: float = 0.0

    @property
    def valid(self) -> bool:
        t = self.tol
        return (
            self.factor_residual <= t.residual_abs * (1.0 + self.a_norm)
            and self.d1_residual <= t.residual_abs
            and self.d2_ok
            and self.d3_gap <= t.residual_abs
        )


@dataclass(frozen=True)
class CertificateReport:
    """Independent re-check of a :class:`DouglasCertificate`."""

    factor_residual: float
    factor_ok: bool
    d1_residual: float
    d1_ok: bool
    rank_a: int
    rank_d: int
    rank_stacked: int
    d2_ok: bool
    lambda_min: float
    d3_gap: float
    d3_ok: bool
    sampled_ratio: float
    sampled_ok: bool
    attained_ratio: float

    @property
    def ok(self) -> bool:
        return self.factor_ok and self.d1_ok and self.d2_ok and self.d3_ok and self.sampled_ok

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["ok"] = self.ok
        return out


def _check_rows(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape[0] != B.shape[0]:
        raise DimensionMismatch(
            f"A and B need the same number of rows, got {A.shape} and {B.shape}"
        )


def _is_marginal(value: float, threshold: float) -> bool:
    return threshold / MARGINAL_FACTOR <= value <= threshold * MARGINAL_FACTOR


def range_included(A, B, tol: Tolerances = DEFAULT_TOL) -> SolvabilityReport:
    """Decide ``ran A ⊆ ran B`` and cross-check it against the other two tests.

    Raises
    ------
    DimensionMismatch
        If ``A`` and ``B`` have different row counts.
    InconsistentSolvability
        If the indicators disagree on an instance not flagged marginal.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    _check_rows(A, B)
    threshold = tol.residual_abs * (1.0 + op_norm(A))

    f = svd(B)
    r = _rank_from_singulars(f.singulars, tol)
    Ur = f.left[:, :r]
    margin = op_norm(A - Ur @ (adjoint(Ur) @ A))
    solve_residual = op_norm(B @ (pinv(B, tol) @ A) - A)
    kernel_leak = _kernel_leak(A, B, tol)

    marginal = any(_is_marginal(v, threshold) for v in (margin, solve_residual, kernel_leak))
    flags = (solve_residual <= threshold, kernel_leak <= threshold, margin <= threshold)
    if len(set(flags)) != 1 and not marginal:
        raise InconsistentSolvability(
            f"indicators disagree: solve={solve_residual:.3e} leak={kernel_leak:.3e} "
            f"margin={margin:.3e} threshold={threshold:.3e}"
        )
    solvable = margin <= threshold
    lam = _whitened_norm(A, f.left[:, :r], f.singulars[:r]) if solvable else math.inf
    return SolvabilityReport(
        solvable=solvable,
        inclusion_margin=margin,
        lambda_min=lam,
        threshold=threshold,
        solve_residual=solve_residual,
        kernel_leak=kernel_leak,
        marginal=marginal,
    )


def _kernel_leak(A: np.ndarray, B: np.ndarray, tol: Tolerances) -> float:
    # Any x in ker B^* with A^* x != 0 makes ||A^*x|| / ||B^*x|| unbounded.
    K = kernel_basis(adjoint(B), tol).basis
    if K.shape[1] == 0:
        return 0.0
    return op_norm(adjoint(A) @ K)


def _whitened_norm(A: np.ndarray, Ur: np.ndarray, sr: np.ndarray) -> float:
    # sup ||A^*x|| / ||B^*x|| over ran B equals ||Sigma^-1 U^* A||.
    if sr.size == 0:
        return 0.0
    return op_norm((adjoint(Ur) @ A) / sr[:, None])


def majorization_constant(A, B, tol: Tolerances = DEFAULT_TOL) -> float:
    """Least ``lam`` with ``||A^* x|| <= lam ||B^* x||`` for all ``x``.

    Returns ``math.inf`` when ``A^*`` does not vanish on ``ker B^*``
    (equivalently, when the range inclusion fails).
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    _check_rows(A, B)
    threshold = tol.residual_abs * (1.0 + op_norm(A))
    if _kernel_leak(A, B, tol) > threshold:
        return math.inf
    f = svd(B)
    r = _rank_from_singulars(f.singulars, tol)
    return _whitened_norm(A, f.left[:, :r], f.singulars[:r])


def douglas_solve(B, A, tol: Tolerances = DEFAULT_TOL) -> DouglasCertificate:
    """Reduced solution ``D = B^+ A`` of ``B X = A`` with its certificate.

    Raises
    ------
    NotSolvable
        If ``ran A`` is not contained in ``ran B``.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    report = range_included(A, B, tol)
    if not report.solvable:
        raise NotSolvable(report.inclusion_margin, report)
    D = pinv(B, tol) @ A
    return DouglasCertificate(
        solution=D,
        factor_residual=op_norm(B @ D - A),
        d1_residual=op_norm(kernel_projector(B, tol) @ D),
        d2_ok=_same_kernel(A, D, tol)[3],
        d3_gap=abs(op_norm(D) - report.lambda_min),
        lambda_min=report.lambda_min,
        tol=tol,
        a_norm=op_norm(A),
    )


def is_douglas_solution(B, A, X, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff ``B X = A`` and ``ran X ⊆ [ker B]^perp`` within tolerance."""
    return _douglas_residuals(B, A, X, tol)[2]


def _douglas_residuals(B, A, X, tol: Tolerances) -> tuple[float, float, bool]:
    B = as_matrix(B, "B")
    A = as_matrix(A, "A")
    X = as_matrix(X, "X")
    if B.shape[1] != X.shape[0] or B.shape[0] != A.shape[0] or X.shape[1] != A.shape[1]:
        raise DimensionMismatch(
            f"incompatible shapes B{B.shape} X{X.shape} A{A.shape}"
        )
    factor = op_norm(B @ X - A)
    leak = op_norm(kernel_projector(B, tol) @ X)
    ok = factor <= tol.residual_abs * (1.0 + op_norm(A)) and leak <= tol.residual_abs
    return factor, leak, ok


def _same_kernel(A: np.ndarray, D: np.ndarray, tol: Tolerances) -> tuple[int, int, int, bool]:
    # ker A ∩ ker D = ker [A; D]; each inclusion is one rank equality.
    # Both blocks are normalized so the relative cutoff treats them alike.
    def unit(M):
        n = op_norm(M)
        return M / n if n > 0 else M

    An, Dn = unit(A), unit(D)
    ra = numerical_rank(An, tol)
    rd = numerical_rank(Dn, tol)
    rs = numerical_rank(np.vstack([An, Dn]), tol)
    return ra, rd, rs, ra == rs == rd


def maximizing_vector(B, D, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """A vector ``x`` attaining ``||A^* x|| / ||B^* x|| = ||D||`` for ``A = B D``.

    The top left singular vector ``u`` of ``D`` lies in ``ran B^*``;
    ``x = (B^*)^+ u`` satisfies ``B^* x = u``.
    """
    B = as_matrix(B, "B")
    D = as_matrix(D, "D")
    u = svd(D).left[:, 0]
    return pinv(adjoint(B), tol) @ u


def sampled_ratio(A, B, x: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Ratios ``||A^* x|| / ||B^* x||`` for the columns of ``x``.

    Columns with ``B^* x`` numerically zero are dropped.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    num = np.linalg.norm(adjoint(A) @ x, axis=0)
    den = np.linalg.norm(adjoint(B) @ x, axis=0)
    floor = tol.rank_rel * op_norm(B) * np.linalg.norm(x, axis=0)
    keep = den > floor
    return num[keep] / den[keep]


def verify_certificate(
    B,
    A,
    cert: DouglasCertificate,
    tol: Tolerances = DEFAULT_TOL,
    samples: int = 10_000,
    seed: int = 0,
) -> CertificateReport:
    """Re-check the three defining conditions of a reduced solution.

    Nothing stored in ``cert`` except the solution itself is trusted:
    residuals, kernel ranks and the majorization constant are recomputed.
    The sampled ratio over ``samples`` seeded Gaussian vectors must not
    exceed ``lambda_min`` beyond tolerance.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    D = as_matrix(cert.solution, "solution")
    factor, leak, _ = _douglas_residuals(B, A, D, tol)
    factor_ok = factor <= tol.residual_abs * (1.0 + op_norm(A))
    ra, rd, rs, d2_ok = _same_kernel(A, D, tol)

    lam = majorization_constant(A, B, tol)
    d_norm = op_norm(D)
    gap = abs(d_norm - lam) if math.isfinite(lam) else math.inf
    d3_ok = gap <= tol.residual_abs and abs(cert.lambda_min - lam) <= tol.residual_abs

    rng = np.random.default_rng(seed)
    m = B.shape[0]
    x = rng.standard_normal((m, samples)) + 1j * rng.standard_normal((m, samples))
    ratios = sampled_ratio(A, B, x, tol)
    worst = float(ratios.max()) if ratios.size else 0.0
    bound = lam + tol.residual_abs * (1.0 + lam)
    sampled_ok = worst <= bound and worst <= d_norm + tol.residual_abs * (1.0 + d_norm)

    attained = 0.0
    if d_norm > 0:
        xs = maximizing_vector(B, D, tol)[:, None]
        r = sampled_ratio(A, B, xs, tol)
        attained = float(r[0]) if r.size else 0.0

    return CertificateReport(
        factor_residual=factor,
        factor_ok=factor_ok,
        d1_residual=leak,
        d1_ok=leak <= tol.residual_abs,
        rank_a=ra,
        rank_d=rd,
        rank_stacked=rs,
        d2_ok=d2_ok,
        lambda_min=lam,
        d3_gap=gap,
        d3_ok=d3_ok,
        sampled_ratio=worst,
        sampled_ok=sampled_ok,
        attained_ratio=attained,
    )
