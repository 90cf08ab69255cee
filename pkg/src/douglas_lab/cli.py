"""Command-line front end.

Exit codes: 0 success (or no witness found), 1 usage or input error,
2 mathematically infeasible input (not solvable, not PSD), 3 a witness or
a non-induced line map was found.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .derived import NotPSD, moore_penrose, parallel_sum, penrose_residuals, schur_complement
from .douglas import DimensionMismatch, InconsistentSolvability, NotSolvable, douglas_solve, verify_certificate
from .io import DescriptorError, MatrixFormatError, load_descriptor, matrix_to_dict, read_matrix, write_matrix
from .linalg import Tolerances, adjoint, op_norm
from .preservers import SingularInput, eigen_blowup_demo, falsify
from .projective import ImageNotRankOne, NotInduced, induced_line_map, recover_semilinear, swap_lines

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_FINDING = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    tol: Tolerances
    seed: int
    dim: int | None
    trials: int
    output_format: str

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        try:
            tol = Tolerances(args.tol_rank, args.tol_residual, args.tol_line)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
        return cls(tol, args.seed, args.dim, args.trials, args.format)


def _emit(config: RunConfig, report: dict, text_lines: list[str]) -> None:
    if config.output_format == "structured":
        report = dict(report, tolerances=config.tol.as_dict(), seed=config.seed)
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        print("\n".join(text_lines))


def _fmt_matrix(M) -> str:
    with np.printoptions(precision=6, suppress=True, linewidth=120):
        return str(np.asarray(M))


def cmd_solve(args, config: RunConfig) -> int:
    B = read_matrix(args.B)
    A = read_matrix(args.A)
    try:
        cert = douglas_solve(B, A, config.tol)
    except NotSolvable as exc:
        rep = exc.report
        report = {"command": "solve", "solvable": False, "inclusion_margin": exc.inclusion_margin,
                  "marginal": bool(rep.marginal) if rep else False}
        _emit(config, report, [f"not solvable: ran A is not contained in ran B "
                               f"(inclusion margin {exc.inclusion_margin:.6e})"])
        return EXIT_INFEASIBLE
    check = verify_certificate(B, A, cert, config.tol, seed=config.seed)
    report = {
        "command": "solve",
        "solvable": True,
        "solution": matrix_to_dict(cert.solution),
        "factor_residual": cert.factor_residual,
        "d1_residual": cert.d1_residual,
        "d2_ok": cert.d2_ok,
        "d3_gap": cert.d3_gap,
        "lambda_min": cert.lambda_min,
        "valid": cert.valid,
        "verification": check.as_dict(),
    }
    _emit(config, report, [
        "reduced solution D:",
        _fmt_matrix(cert.solution),
        f"||BD - A|| = {cert.factor_residual:.3e}",
        f"||P_ker(B) D|| = {cert.d1_residual:.3e}",
        f"ker D = ker A: {cert.d2_ok}",
        f"lambda_min = {cert.lambda_min:.12g}  (| ||D|| - lambda_min | = {cert.d3_gap:.3e})",
        f"independent verification: {'pass' if check.ok else 'FAIL'}",
    ])
    return EXIT_OK


def cmd_derived(args, config: RunConfig) -> int:
    tol = config.tol
    kind = args.kind
    if kind == "pinv":
        if len(args.inputs) != 1:
            raise UsageError("pinv takes exactly one matrix file")
        A = read_matrix(args.inputs[0])
        X = moore_penrose(A, tol)
        diag = penrose_residuals(A, X)
    elif kind == "parallel-sum":
        if len(args.inputs) != 2:
            raise UsageError("parallel-sum takes exactly two matrix files")
        A, B = (read_matrix(p) for p in args.inputs)
        X = parallel_sum(A, B, tol)
        diag = {
            "symmetry_gap": op_norm(X - parallel_sum(B, A, tol)),
            "hermitian_gap": op_norm(X - adjoint(X)),
            "min_eigenvalue": float(np.linalg.eigvalsh(0.5 * (X + adjoint(X)))[0]),
        }
    else:
        if len(args.inputs) != 1 or args.split is None:
            raise UsageError("schur takes one matrix file and --split")
        M = read_matrix(args.inputs[0])
        X = schur_complement(M, args.split, tol)
        diag = {"psd_margin": float(np.linalg.eigvalsh(0.5 * (X + adjoint(X)))[0])}
    report = {"command": "derived", "kind": kind, "result": matrix_to_dict(X), "diagnostics": diag}
    _emit(config, report, [f"{kind}:", _fmt_matrix(X)]
          + [f"{k} = {v:.3e}" for k, v in sorted(diag.items())])
    return EXIT_OK


def _descriptor(path, config: RunConfig):
    phi, swap = load_descriptor(path, config.tol)
    if config.dim is not None and config.dim != phi.dim:
        raise UsageError(f"--dim {config.dim} does not match the map dimension {phi.dim}")
    return phi, swap


def cmd_preserve(args, config: RunConfig) -> int:
    phi, _ = _descriptor(args.descriptor, config)
    w = falsify(phi, phi.dim, config.trials, config.seed, config.tol)
    if w is None:
        report = {"command": "preserve", "witness": None, "trials": config.trials,
                  "conclusion": "inconclusive"}
        _emit(config, report, [f"no witness in {config.trials} trials (inconclusive)"])
        return EXIT_OK
    out = Path(args.witness_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for name, M in (("B", w.B), ("X", w.X), ("A", w.A)):
        path = out / f"{name}.json"
        write_matrix(path, M)
        files[name] = str(path)
    report = {"command": "preserve", "witness": dict(w.as_dict(), files=files,
              B=matrix_to_dict(w.B), X=matrix_to_dict(w.X), A=matrix_to_dict(w.A)),
              "trials": config.trials}
    _emit(config, report, [
        f"witness found at trial {w.trial}: {w.direction} implication fails "
        f"({w.violated}, residual {w.residual:.3e})",
        f"triple written to {out}/B.json, X.json, A.json",
    ])
    return EXIT_FINDING


def cmd_recover(args, config: RunConfig) -> int:
    phi, swap = _descriptor(args.descriptor, config)
    try:
        lm = induced_line_map(phi, tol=config.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if swap is not None:
        lm = swap_lines(lm, *swap, tol=config.tol)
    try:
        res = recover_semilinear(lm, tol=config.tol, seed=config.seed)
    except (NotInduced, ImageNotRankOne) as exc:
        report = {"command": "recover", "induced": False, "reason": str(exc)}
        _emit(config, report, [f"not induced by a semilinear map: {exc}"])
        return EXIT_FINDING
    T = res.normalized()
    report = {"command": "recover", "induced": True, "T": matrix_to_dict(T),
              "flavor": res.flavor, "validation_residual": res.residual}
    _emit(config, report, ["T (normalized, unique up to a scalar):", _fmt_matrix(T),
                           f"flavor: {res.flavor}",
                           f"validation line residual: {res.residual:.3e}"])
    return EXIT_OK


def cmd_demo_claim4(args, config: RunConfig) -> int:
    if args.n < 2:
        raise UsageError("n must be >= 2")
    S = read_matrix(args.matrix) if args.matrix else None
    try:
        rep = eigen_blowup_demo(args.n, S)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    lines = ["k  eigenvalue  ||phi(A)v_k - k v_k||"]
    lines += [f"{k:<2} {ev:<11.8g} {r:.2e}"
              for k, ev, r in zip(range(1, args.n + 1), rep.eigenvalues, rep.eigen_residuals)]
    lines.append(f"||phi(A)|| = {rep.norm:.8g} >= n = {args.n}")
    _emit(config, dict(rep.as_dict(), command="demo-claim4"), lines)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-rank", type=float, default=1e-10)
    common.add_argument("--tol-residual", type=float, default=1e-8)
    common.add_argument("--tol-line", type=float, default=1e-8)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--dim", type=int, default=None)
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--format", choices=("text", "structured"), default="text")

    parser = _Parser(prog="douglas-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common], help="reduced solution of B X = A")
    p.add_argument("B")
    p.add_argument("A")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("derived", parents=[common], help="pseudoinverse, parallel sum, shorted operator")
    p.add_argument("kind", choices=("pinv", "parallel-sum", "schur"))
    p.add_argument("inputs", nargs="+")
    p.add_argument("--split", type=int)
    p.set_defaults(func=cmd_derived)

    p = sub.add_parser("preserve", parents=[common], help="search for a preservation witness")
    p.add_argument("descriptor")
    p.add_argument("--witness-dir", default="witness")
    p.set_defaults(func=cmd_preserve)

    p = sub.add_parser("recover", parents=[common], help="recover the semilinear generator")
    p.add_argument("descriptor")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("demo-claim4", parents=[common], help="eigenvalue blowup of the inverse-adjoint form")
    p.add_argument("n", type=int)
    p.add_argument("--matrix", help="matrix file for S (default identity)")
    p.set_defaults(func=cmd_demo_claim4)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig.from_args(args)
        return args.func(args, config)
    except (NotPSD, NotSolvable, InconsistentSolvability) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, MatrixFormatError, DescriptorError, DimensionMismatch, SingularInput, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
