"""Desk-scale acceptance experiments.

Each ``criterion_*`` function runs one seeded experiment and returns a
JSON-serializable report with a ``passed`` flag. Reports contain no
timings, so equal seeds give byte-identical output.

Run ``python -m douglas_lab.acceptance`` for a one-line-per-criterion summary.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from .derived import moore_penrose, parallel_sum, penrose_residuals, schur_complement
from .douglas import (
    InconsistentSolvability,
    douglas_solve,
    is_douglas_solution,
    range_included,
    verify_certificate,
)
from .linalg import DEFAULT_TOL, adjoint, op_norm
from .preservers import (
    AntiUnitary,
    Similarity,
    Unitary,
    check_projection_preservation,
    eigen_blowup_demo,
    falsify,
    preserves_triple,
)
from .projective import induced_line_map, line_residual, recover_semilinear, scalar_fit
from .sampling import (
    gaussian,
    random_douglas_triple,
    random_projection,
    random_psd,
    random_rank,
    random_unitary,
    trial_rng,
)

DEFAULT_SEED = 20211014


def _fro(M) -> float:
    return float(np.linalg.norm(M))


def _roundtrip_triples(seed: int):
    for dim in range(2, 9):
        for t in range(200):
            rng = trial_rng(seed, dim * 1000 + t)
            yield dim, t, random_douglas_triple(rng, dim)


def criterion_1(seed: int = DEFAULT_SEED) -> dict:
    """Reduced solution recovers the constructed ``X0``."""
    worst = 0.0
    failures = 0
    count = 0
    for _, _, (B, X0, A) in _roundtrip_triples(seed):
        D = douglas_solve(B, A).solution
        err = _fro(D - X0) / (1.0 + _fro(X0))
        worst = max(worst, err)
        failures += err > 1e-8
        count += 1
    return {"criterion": 1, "name": "douglas roundtrip", "cases": count,
            "max_rel_error": worst, "failures": failures, "passed": failures == 0}


def criterion_2(seed: int = DEFAULT_SEED) -> dict:
    """Every certificate from criterion 1 survives independent re-checking."""
    worst = {"d1": 0.0, "d3_gap": 0.0, "ratio_excess": -math.inf}
    failures = 0
    count = 0
    for dim, t, (B, X0, A) in _roundtrip_triples(seed):
        cert = douglas_solve(B, A)
        rep = verify_certificate(B, A, cert, samples=10_000, seed=seed * 10_000 + dim * 1000 + t)
        lam = rep.lambda_min
        excess = rep.sampled_ratio - (lam + 1e-8 * (1.0 + lam))
        ok = rep.d1_residual <= 1e-9 and rep.d2_ok and rep.d3_gap <= 1e-8 and excess <= 0.0 and rep.ok
        worst["d1"] = max(worst["d1"], rep.d1_residual)
        worst["d3_gap"] = max(worst["d3_gap"], rep.d3_gap)
        worst["ratio_excess"] = max(worst["ratio_excess"], excess)
        failures += not ok
        count += 1
    return {"criterion": 2, "name": "certificate soundness", "cases": count,
            "max_d1_residual": worst["d1"], "max_d3_gap": worst["d3_gap"],
            "max_ratio_excess": worst["ratio_excess"], "failures": failures,
            "passed": failures == 0}


def criterion_3(seed: int = DEFAULT_SEED) -> dict:
    """The three solvability indicators agree."""
    disagreements = 0
    marginal = 0
    wrong = 0
    clean = 0
    for k in range(500):
        rng = trial_rng(seed, 50_000 + k)
        n = int(rng.integers(2, 9))
        solvable = k % 2 == 0
        if solvable:
            B = random_rank(rng, n, n, int(rng.integers(1, n + 1)))
            A = B @ gaussian(rng, n, n)
        else:
            B = random_rank(rng, n, n, int(rng.integers(1, n)))
            A = random_rank(rng, n, n, int(rng.integers(1, n + 1)))
        try:
            rep = range_included(A, B)
        except InconsistentSolvability:
            disagreements += 1
            continue
        if rep.marginal:
            marginal += 1
            continue
        clean += 1
        if len(set(rep.indicators)) != 1 or math.isfinite(rep.lambda_min) != rep.solvable:
            disagreements += 1
        wrong += rep.solvable != solvable
    ratio = marginal / max(clean, 1)
    return {"criterion": 3, "name": "solvability equivalence", "cases": 500,
            "disagreements": disagreements, "marginal": marginal, "clean": clean,
            "marginal_ratio": ratio, "misclassified": wrong,
            "passed": disagreements == 0 and ratio < 0.02 and wrong == 0}


def _isometric_maps(seed: int):
    for i in range(200):
        rng = trial_rng(seed, 60_000 + i)
        dim = 3 + i % 4
        U = random_unitary(rng, dim)
        yield (Unitary(U) if i < 100 else AntiUnitary(U)), dim


def criterion_4(seed: int = DEFAULT_SEED) -> dict:
    """Unitary and anti-unitary conjugations preserve every reduced-solution triple."""
    cases = 0
    failures = 0
    for i, (phi, dim) in enumerate(_isometric_maps(seed)):
        for t in range(100):
            B, X, _ = random_douglas_triple(trial_rng(seed, 70_000 + 100 * i + t), dim)
            ok, _ = preserves_triple(phi, B, X)
            cases += 1
            failures += not ok
    return {"criterion": 4, "name": "forward preservation", "cases": cases,
            "failures": failures, "passed": failures == 0 and cases == 20_000}


def nonunitarity(S) -> float:
    """``min_a ||S^*S - a I|| / ||S^*S||`` in the spectral norm."""
    w = np.linalg.eigvalsh(adjoint(S) @ S)
    return float((w[-1] - w[0]) / (2.0 * w[-1]))


def similarity_maps(seed: int, count: int = 20, dim: int = 4) -> list[Similarity]:
    maps = []
    k = 0
    while len(maps) < count:
        S = gaussian(trial_rng(seed, 80_000 + k), dim, dim)
        k += 1
        if nonunitarity(S) >= 0.1 and np.linalg.cond(S) < 1e4:
            maps.append(Similarity(S))
    return maps


def criterion_5(seed: int = DEFAULT_SEED) -> dict:
    """Falsification finds a witness against each non-unitary similarity."""
    found = []
    revalidated = 0
    for i, phi in enumerate(similarity_maps(seed)):
        w = falsify(phi, 4, 500, seed + i)
        if w is None:
            found.append(None)
            continue
        found.append(w.trial)
        src = is_douglas_solution(w.B, w.A, w.X)
        tgt = is_douglas_solution(phi(w.B), phi(w.A), phi(w.X))
        revalidated += (src and not tgt) if w.direction == "forward" else (tgt and not src)
    return {"criterion": 5, "name": "rigidity falsification", "maps": len(found),
            "witness_trials": found, "revalidated": revalidated,
            "passed": None not in found and revalidated == len(found)}


def criterion_6(seed: int = DEFAULT_SEED) -> dict:
    """Projection images separate similarities from (anti-)unitary maps."""
    first_failure = []
    for i, phi in enumerate(similarity_maps(seed)):
        hit = None
        for j in range(200):
            P = random_projection(trial_rng(seed + i, 90_000 + j), 4)
            if not check_projection_preservation(phi, P):
                Q = phi(P)
                if op_norm(adjoint(Q) - Q) > DEFAULT_TOL.residual_abs:
                    hit = j
                    break
        first_failure.append(hit)
    isometric_failures = 0
    checks = 0
    for i, (phi, dim) in enumerate(_isometric_maps(seed)):
        for j in range(20):
            P = random_projection(trial_rng(seed, 100_000 + 20 * i + j), dim)
            checks += 1
            isometric_failures += not check_projection_preservation(phi, P)
    return {"criterion": 6, "name": "projection separation",
            "similarity_first_failure": first_failure, "isometric_checks": checks,
            "isometric_failures": isometric_failures,
            "passed": None not in first_failure and isometric_failures == 0}


def criterion_7(seed: int = DEFAULT_SEED) -> dict:
    """Derived objects against independent oracles."""
    pinv_err = 0.0
    penrose = 0.0
    for k in range(500):
        rng = trial_rng(seed, 110_000 + k)
        m, n = (int(x) for x in rng.integers(1, 9, size=2))
        A = random_rank(rng, m, n, int(rng.integers(1, min(m, n) + 1)))
        X = moore_penrose(A)
        oracle = np.linalg.pinv(A, rcond=DEFAULT_TOL.rank_rel)
        pinv_err = max(pinv_err, op_norm(X - oracle) / (1.0 + op_norm(oracle)))
        res = penrose_residuals(A, X)
        penrose = max(penrose, max(res.values()) / (1.0 + op_norm(A)))

    ps_err = 0.0
    ps_sym = 0.0
    for k in range(100):
        rng = trial_rng(seed, 120_000 + k)
        n = int(rng.integers(2, 9))
        A = random_psd(rng, n, shift=0.5) / n
        B = random_psd(rng, n, shift=0.5) / n
        P = parallel_sum(A, B)
        oracle = np.linalg.inv(np.linalg.inv(A) + np.linalg.inv(B))
        ps_err = max(ps_err, op_norm(P - oracle) / (1.0 + op_norm(oracle)))
        ps_sym = max(ps_sym, op_norm(P - parallel_sum(B, A)))

    schur_err = 0.0
    schur_margin = math.inf
    for k in range(100):
        rng = trial_rng(seed, 130_000 + k)
        n = int(rng.integers(2, 9))
        split = int(rng.integers(1, n))
        invertible = k % 2 == 0
        M = random_psd(rng, n, shift=0.5) / n if invertible else random_psd(rng, n, r=int(rng.integers(1, n + 1)))
        S = schur_complement(M, split)
        if invertible:
            A, Bb, C = M[:split, :split], M[:split, split:], M[split:, split:]
            oracle = A - Bb @ np.linalg.inv(C) @ adjoint(Bb)
            schur_err = max(schur_err, op_norm(S - oracle) / (1.0 + op_norm(oracle)))
        w = np.linalg.eigvalsh(0.5 * (S + adjoint(S)))
        schur_margin = min(schur_margin, float(w[0]) / max(1.0, op_norm(M)))

    return {"criterion": 7, "name": "derived-object oracles",
            "pinv_rel_error": pinv_err, "penrose_residual": penrose,
            "parallel_sum_error": ps_err, "parallel_sum_symmetry": ps_sym,
            "schur_error": schur_err, "schur_psd_margin": schur_margin,
            "passed": pinv_err <= 1e-10 and penrose <= 1e-9 and ps_err <= 1e-8
            and ps_sym <= 1e-9 and schur_err <= 1e-8 and schur_margin >= -1e-9}


def criterion_8(seed: int = DEFAULT_SEED) -> dict:
    """Semilinear recovery from induced line maps."""
    flavor_errors = 0
    worst_scalar = 0.0
    worst_line = 0.0
    for k in range(200):
        rng = trial_rng(seed, 140_000 + k)
        dim = 2 + k % 5
        U = random_unitary(rng, dim)
        phi = Unitary(U) if k % 2 == 0 else AntiUnitary(U)
        res = recover_semilinear(induced_line_map(phi), seed=seed + k)
        flavor_errors += res.conjugate_linear != phi.conjugate_linear
        _, rel = scalar_fit(res.T, U)
        worst_scalar = max(worst_scalar, rel)
        for j in range(100):
            v = gaussian(trial_rng(seed, 150_000 + 100 * k + j), dim)
            worst_line = max(worst_line, line_residual(res(v), phi.vector(v)))
    return {"criterion": 8, "name": "semilinear recovery", "cases": 200,
            "flavor_errors": flavor_errors, "max_scalar_residual": worst_scalar,
            "max_line_residual": worst_line,
            "passed": flavor_errors == 0 and worst_scalar <= 1e-8 and worst_line <= 1e-8}


def criterion_9(seed: int = DEFAULT_SEED) -> dict:
    """Eigenvalue ``k`` at index ``k`` for the inverse-adjoint form, n = 10."""
    rng = trial_rng(seed, 160_000)
    S_random = random_unitary(rng, 10) @ np.diag(rng.uniform(0.5, 2.0, 10))
    errors = []
    for S in (None, S_random):
        rep = eigen_blowup_demo(10, S)
        errors.append(max(abs(rep.eigenvalues[k - 1] - k) for k in range(1, 11)))
        errors.append(rep.max_imag)
        errors.append(max(rep.eigen_residuals))
        norm_ok = rep.norm >= 10 - 1e-8
    return {"criterion": 9, "name": "inverse-adjoint eigenvalue blowup", "n": 10,
            "max_error": max(errors), "norm_at_least_n": bool(norm_ok),
            "passed": max(errors) <= 1e-8 and norm_ok}


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9,
}


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m douglas_lab.acceptance")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    parser.add_argument("--json", action="store_true", help="emit the structured reports")
    args = parser.parse_args(argv)

    chosen = args.only or sorted(CRITERIA)
    reports = []
    all_ok = True
    for k in chosen:
        t0 = time.perf_counter()
        rep = CRITERIA[k](args.seed)
        elapsed = time.perf_counter() - t0
        reports.append(rep)
        all_ok &= rep["passed"]
        if not args.json:
            status = "PASS" if rep["passed"] else "FAIL"
            print(f"[{status}] criterion {k}: {rep['name']} ({elapsed:.2f}s)")
    if args.json:
        print(json.dumps(reports, sort_keys=True, indent=2))
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
