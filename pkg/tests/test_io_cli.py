import json

import numpy as np
import pytest

from douglas_lab.cli import main
from douglas_lab.io import (
    DescriptorError,
    MatrixFormatError,
    load_descriptor,
    matrix_from_dict,
    matrix_to_dict,
    parse_descriptor,
    read_matrix,
    vector_to_list,
    write_matrix,
)
from douglas_lab.linalg import rank_one
from douglas_lab.preservers import AntiUnitary, Composite, Similarity, Unitary
from douglas_lab.sampling import random_douglas_triple, random_psd, random_unitary

from conftest import assert_close, cgauss


class TestMatrixFormat:
    def test_round_trip(self, rng, tmp_path):
        M = cgauss(rng, 3, 2)
        assert np.array_equal(matrix_from_dict(matrix_to_dict(M)), M)
        write_matrix(tmp_path / "m.json", M)
        assert np.array_equal(read_matrix(tmp_path / "m.json"), M)

    def test_row_major(self):
        M = matrix_from_dict({"rows": 1, "cols": 2, "data": [[1, 0], [0, 2]]})
        assert M[0, 1] == 2j

    def test_length_mismatch(self):
        with pytest.raises(MatrixFormatError, match="expected rows\\*cols = 4"):
            matrix_from_dict({"rows": 2, "cols": 2, "data": [[1, 0]] * 3})

    @pytest.mark.parametrize("bad", [
        {"rows": 0, "cols": 1, "data": []},
        {"rows": 1, "cols": 1},
        {"rows": 1, "cols": 1, "data": [[1, 2, 3]]},
        {"rows": 1, "cols": 1, "data": [["1", 0]]},
        {"rows": 1, "cols": 1, "data": [[float("nan"), 0]]},
        {"rows": True, "cols": 1, "data": [[1, 0]]},
        [1, 2],
    ])
    def test_rejects(self, bad):
        with pytest.raises(MatrixFormatError):
            matrix_from_dict(bad)

    def test_position_diagnostic(self):
        with pytest.raises(MatrixFormatError, match=r"data\[3\] \(row 1, col 1\)"):
            matrix_from_dict({"rows": 2, "cols": 2, "data": [[1, 0]] * 3 + [[1]]})

    def test_json_position(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"rows": 1,\n "cols": 1 "data": []}')
        with pytest.raises(MatrixFormatError, match="line 2 column"):
            read_matrix(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MatrixFormatError):
            read_matrix(tmp_path / "nope.json")


class TestDescriptor:
    def test_inline_unitary(self):
        phi, swap = parse_descriptor({"kind": "unitary", "matrix": matrix_to_dict(np.eye(2))})
        assert isinstance(phi, Unitary) and swap is None

    def test_file_reference(self, tmp_path):
        write_matrix(tmp_path / "S.json", np.diag([2.0, 1.0]))
        (tmp_path / "d.json").write_text(json.dumps({"kind": "similarity", "matrix": "S.json"}))
        phi, _ = load_descriptor(tmp_path / "d.json")
        assert isinstance(phi, Similarity)

    def test_composite(self, rng):
        U = random_unitary(rng, 3)
        obj = {"kind": "composite", "maps": [
            {"kind": "anti-unitary", "matrix": matrix_to_dict(U)},
            {"kind": "unitary", "matrix": matrix_to_dict(np.eye(3))},
        ]}
        phi, _ = parse_descriptor(obj)
        assert isinstance(phi, Composite) and isinstance(phi.maps[0], AntiUnitary)

    def test_swap(self):
        obj = {"kind": "unitary", "matrix": matrix_to_dict(np.eye(2)),
               "swap": [vector_to_list([1, 0]), vector_to_list([0, 1])]}
        _, swap = parse_descriptor(obj)
        assert_close(swap[1], [0, 1], 0)

    @pytest.mark.parametrize("bad", [
        {},
        {"kind": "rotation", "matrix": {}},
        {"kind": "unitary"},
        {"kind": "unitary", "matrix": 3},
        {"kind": "composite", "maps": []},
        {"kind": "unitary", "matrix": matrix_to_dict(np.diag([2.0, 1.0]))},
        {"kind": "unitary", "matrix": matrix_to_dict(np.eye(2)), "swap": [[[1, 0]]]},
    ])
    def test_rejects(self, bad):
        with pytest.raises(DescriptorError):
            parse_descriptor(bad)


@pytest.fixture
def files(tmp_path):
    def put(name, obj):
        path = tmp_path / name
        if isinstance(obj, np.ndarray):
            write_matrix(path, obj)
        else:
            path.write_text(json.dumps(obj))
        return str(path)
    return put


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def structured(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "structured")
    return code, json.loads(out)


class TestSolve:
    def test_identity(self, files, capsys, rng):
        A = cgauss(rng, 3, 3)
        code, rep = structured(capsys, "solve", files("B.json", np.eye(3)), files("A.json", A))
        assert code == 0 and rep["valid"] and rep["verification"]["ok"]
        assert_close(matrix_from_dict(rep["solution"]), A, 1e-12)
        assert rep["tolerances"] == {"rank_rel": 1e-10, "residual_abs": 1e-8, "line_tol": 1e-8}

    def test_constructed(self, files, capsys, rng):
        B, X0, A = random_douglas_triple(rng, 5, rank=3)
        code, rep = structured(capsys, "solve", files("B.json", B), files("A.json", A))
        assert code == 0 and rep["verification"]["ok"]
        assert_close(matrix_from_dict(rep["solution"]), X0, 1e-8 * (1 + np.linalg.norm(X0)))

    def test_not_solvable(self, files, capsys):
        code, rep = structured(capsys, "solve", files("B.json", np.diag([1.0, 0.0])),
                               files("A.json", np.diag([0.0, 1.0])))
        assert code == 2 and rep["solvable"] is False and rep["inclusion_margin"] == pytest.approx(1.0)

    def test_incompatible(self, files, capsys):
        code, _, err = run(capsys, "solve", files("B.json", np.eye(2)), files("A.json", np.eye(3)))
        assert code == 1 and err

    def test_malformed(self, files, capsys):
        bad = files("bad.json", {"rows": 2, "cols": 2, "data": [[1, 0]]})
        code, _, err = run(capsys, "solve", bad, bad)
        assert code == 1 and "expected rows*cols" in err

    def test_text(self, files, capsys):
        code, out, _ = run(capsys, "solve", files("B.json", np.eye(2)), files("A.json", np.eye(2)))
        assert code == 0 and "independent verification: pass" in out


class TestDerived:
    def test_pinv(self, files, capsys):
        code, rep = structured(capsys, "derived", "pinv", files("A.json", np.diag([2.0, 0.0])))
        assert code == 0
        assert_close(matrix_from_dict(rep["result"]), np.diag([0.5, 0.0]), 1e-15)
        assert set(rep["diagnostics"]) == {"axa", "xax", "ax_hermitian", "xa_hermitian"}

    def test_parallel_sum(self, files, capsys, rng):
        A = random_psd(rng, 3)
        p = files("A.json", A)
        code, rep = structured(capsys, "derived", "parallel-sum", p, p)
        assert code == 0
        assert_close(matrix_from_dict(rep["result"]), A / 2, 1e-10 * (1 + np.linalg.norm(A)))

    def test_schur_block_diagonal(self, files, capsys):
        M = np.diag([3.0, 1.0, 2.0])
        code, rep = structured(capsys, "derived", "schur", files("M.json", M), "--split", "1")
        assert code == 0
        assert_close(matrix_from_dict(rep["result"]), [[3.0]], 1e-15)

    def test_not_psd(self, files, capsys):
        code, _, err = run(capsys, "derived", "parallel-sum", files("A.json", np.diag([1.0, -1.0])),
                           files("B.json", np.eye(2)))
        assert code == 2 and "-1" in err

    def test_schur_needs_split(self, files, capsys):
        code, _, _ = run(capsys, "derived", "schur", files("M.json", np.eye(2)))
        assert code == 1

    def test_arity(self, files, capsys):
        code, _, _ = run(capsys, "derived", "pinv", files("A.json", np.eye(2)), files("B.json", np.eye(2)))
        assert code == 1


class TestPreserve:
    def test_unitary_no_witness(self, files, capsys, rng, tmp_path):
        d = files("d.json", {"kind": "unitary", "matrix": matrix_to_dict(random_unitary(rng, 3))})
        code, rep = structured(capsys, "preserve", d, "--trials", "1000",
                               "--witness-dir", str(tmp_path / "w"))
        assert code == 0 and rep["witness"] is None and rep["conclusion"] == "inconclusive"
        assert not (tmp_path / "w").exists()

    def test_similarity_witness(self, files, capsys, tmp_path):
        d = files("d.json", {"kind": "similarity", "matrix": matrix_to_dict(np.diag([2.0, 1.0, 1.0]))})
        code, rep = structured(capsys, "preserve", d, "--witness-dir", str(tmp_path / "w"))
        assert code == 3
        B, X, A = (read_matrix(tmp_path / "w" / f"{k}.json") for k in "BXA")
        assert_close(B @ X, A, 1e-10 * (1 + np.linalg.norm(A)))
        assert np.array_equal(matrix_from_dict(rep["witness"]["B"]), B)

    def test_text_inconclusive(self, files, capsys):
        d = files("d.json", {"kind": "unitary", "matrix": matrix_to_dict(np.eye(2))})
        code, out, _ = run(capsys, "preserve", d, "--trials", "50")
        assert code == 0 and "no witness in 50 trials (inconclusive)" in out

    def test_non_unitary(self, files, capsys):
        d = files("d.json", {"kind": "unitary", "matrix": matrix_to_dict(np.diag([2.0, 1.0]))})
        assert run(capsys, "preserve", d)[0] == 1

    def test_malformed_descriptor(self, files, capsys, tmp_path):
        p = tmp_path / "d.json"
        p.write_text("{kind: unitary")
        assert run(capsys, "preserve", str(p))[0] == 1

    def test_dim_mismatch(self, files, capsys):
        d = files("d.json", {"kind": "unitary", "matrix": matrix_to_dict(np.eye(2))})
        assert run(capsys, "preserve", d, "--dim", "3")[0] == 1


class TestRecover:
    def test_unitary(self, files, capsys, rng):
        U = random_unitary(rng, 3)
        code, rep = structured(capsys, "recover", files("d.json", {"kind": "unitary", "matrix": matrix_to_dict(U)}))
        assert code == 0 and rep["flavor"] == "linear"
        T = matrix_from_dict(rep["T"])
        c = np.vdot(U, T) / np.vdot(U, U)
        assert np.linalg.norm(T - c * U) <= 1e-8 * np.linalg.norm(T)
        flat = T.ravel()
        z = flat[np.argmax(np.abs(flat))]
        assert z.real > 0 and z.imag == 0

    def test_anti_unitary(self, files, capsys, rng):
        d = files("d.json", {"kind": "anti-unitary", "matrix": matrix_to_dict(random_unitary(rng, 3))})
        code, rep = structured(capsys, "recover", d)
        assert code == 0 and rep["flavor"] == "conjugate-linear"

    def test_patched(self, files, capsys):
        d = files("d.json", {"kind": "unitary", "matrix": matrix_to_dict(np.eye(3)),
                             "swap": [vector_to_list([1, 0, 0]), vector_to_list([0, 1, 0])]})
        code, rep = structured(capsys, "recover", d)
        assert code == 3 and rep["induced"] is False

    def test_inverse_adjoint(self, files, capsys):
        d = files("d.json", {"kind": "inverse-adjoint", "matrix": matrix_to_dict(np.eye(2))})
        assert run(capsys, "recover", d)[0] == 1


class TestDemo:
    @pytest.mark.parametrize("n", [2, 3])
    def test_table(self, n, capsys):
        code, rep = structured(capsys, "demo-claim4", str(n))
        assert code == 0
        assert_close(rep["eigenvalues"], list(range(1, n + 1)), 1e-12)

    def test_text(self, capsys):
        code, out, _ = run(capsys, "demo-claim4", "3")
        assert code == 0 and "||phi(A)|| = 3" in out

    def test_with_matrix(self, files, capsys, rng):
        code, rep = structured(capsys, "demo-claim4", "4", "--matrix", files("S.json", cgauss(rng, 4, 4)))
        assert code == 0 and max(rep["eigen_residuals"]) <= 1e-8

    def test_n1(self, capsys):
        assert run(capsys, "demo-claim4", "1")[0] == 1


class TestGeneral:
    def test_usage_error_exit_1(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1

    def test_bad_tolerance(self, files, capsys):
        p = files("A.json", np.eye(2))
        assert run(capsys, "solve", p, p, "--tol-rank", "2")[0] == 1

    def test_bad_trials(self, files, capsys):
        d = files("d.json", {"kind": "unitary", "matrix": matrix_to_dict(np.eye(2))})
        assert run(capsys, "preserve", d, "--trials", "0")[0] == 1

    def test_byte_identical(self, files, capsys, tmp_path):
        d = files("d.json", {"kind": "similarity", "matrix": matrix_to_dict(np.diag([2.0, 1.0, 1.0]))})
        B, _, A = random_douglas_triple(np.random.default_rng(1), 4, rank=2)
        pb, pa = files("B.json", B), files("A.json", A)
        for argv in (["preserve", d, "--seed", "7", "--witness-dir", str(tmp_path / "w")],
                     ["solve", pb, pa, "--seed", "3"],
                     ["recover", d],
                     ["demo-claim4", "5"]):
            outs = {run(capsys, *argv, "--format", "structured")[1] for _ in range(3)}
            assert len(outs) == 1

    def test_structured_matrices_round_trip(self, files, capsys, rng):
        # Every matrix object in structured output parses as a matrix file.
        A = rank_one(cgauss(rng, 3), cgauss(rng, 3))
        _, rep = structured(capsys, "derived", "pinv", files("A.json", A))
        doc = json.dumps(rep["result"])
        assert np.array_equal(matrix_from_dict(json.loads(doc)), matrix_from_dict(rep["result"]))
