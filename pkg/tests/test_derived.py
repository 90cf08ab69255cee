import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from douglas_lab.derived import (
    NotPSD,
    moore_penrose,
    parallel_sum,
    penrose_residuals,
    psd_part,
    schur_complement,
)
from douglas_lab.linalg import adjoint, op_norm
from douglas_lab.sampling import random_psd, random_rank, random_unitary

from conftest import assert_close, cgauss


def pinv_svd(A, rcond=1e-10):
    """Oracle: explicit SVD pseudoinverse, written independently of the package."""
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    keep = s > rcond * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    return (Vh[keep].conj().T / s[keep]) @ U[:, keep].conj().T


def min_eig(M):
    return np.linalg.eigvalsh(0.5 * (M + adjoint(M)))[0]


class TestMoorePenrose:
    def test_diagonal(self):
        assert_close(moore_penrose(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]), 1e-15)

    def test_unitary(self, rng):
        U = random_unitary(rng, 4)
        assert_close(moore_penrose(U), adjoint(U), 1e-12)

    def test_rank_three(self, rng):
        A = random_rank(rng, 5, 5, 3)
        X = moore_penrose(A)
        oracle = pinv_svd(A)
        assert op_norm(X - oracle) <= 1e-10 * (1 + op_norm(oracle))

    def test_penrose_identities(self, rng):
        for _ in range(500):
            m, n = (int(v) for v in rng.integers(1, 9, size=2))
            A = random_rank(rng, m, n, int(rng.integers(0, min(m, n) + 1)))
            X = moore_penrose(A)
            assert max(penrose_residuals(A, X).values()) <= 1e-9 * (1 + op_norm(A))
            oracle = pinv_svd(A)
            assert op_norm(X - oracle) <= 1e-10 * (1 + op_norm(oracle))


class TestPsdCheck:
    def test_rejects_indefinite(self):
        with pytest.raises(NotPSD) as info:
            psd_part(np.diag([1.0, -0.5]))
        assert info.value.min_eigenvalue == pytest.approx(-0.5)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotPSD):
            psd_part(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_clips_roundoff(self):
        M = np.diag([1.0, -1e-12])
        assert min_eig(psd_part(M)) == 0.0

    def test_unchanged_when_clean(self, rng):
        M = random_psd(rng, 4, shift=1.0)
        assert np.array_equal(psd_part(M), M)


class TestParallelSum:
    def test_self(self, rng):
        A = random_psd(rng, 4, r=2)
        assert_close(parallel_sum(A, A), A / 2, 1e-10 * op_norm(A))

    def test_zero(self, rng):
        B = random_psd(rng, 3)
        assert_close(parallel_sum(np.zeros((3, 3)), B), np.zeros((3, 3)), 1e-14)

    def test_invertible_oracle(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 9))
            A = random_psd(rng, n, shift=0.5) / n
            B = random_psd(rng, n, shift=0.5) / n
            oracle = np.linalg.inv(np.linalg.inv(A) + np.linalg.inv(B))
            P = parallel_sum(A, B)
            assert op_norm(P - oracle) <= 1e-8 * (1 + op_norm(oracle))

    def test_not_psd(self):
        with pytest.raises(NotPSD):
            parallel_sum(np.diag([1.0, -1.0]), np.eye(2))

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6))
    def test_symmetric_and_dominated(self, seed, n):
        rng = np.random.default_rng(seed)
        A = random_psd(rng, n, r=int(rng.integers(0, n + 1)))
        B = random_psd(rng, n, r=int(rng.integers(0, n + 1)))
        P = parallel_sum(A, B)
        scale = 1 + op_norm(A) + op_norm(B)
        assert op_norm(P - parallel_sum(B, A)) <= 1e-9 * scale
        assert min_eig(P) >= -1e-9 * scale
        assert min_eig(A - P) >= -1e-9 * scale
        assert min_eig(B - P) >= -1e-9 * scale


class TestSchur:
    def test_block_diagonal(self, rng):
        A = random_psd(rng, 2)
        C = random_psd(rng, 3, r=1)
        M = np.zeros((5, 5), dtype=complex)
        M[:2, :2] = A
        M[2:, 2:] = C
        assert np.array_equal(schur_complement(M, 2), A)

    def test_invertible_C(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 9))
            k = int(rng.integers(1, n))
            M = random_psd(rng, n, shift=0.5) / n
            A, B, C = M[:k, :k], M[:k, k:], M[k:, k:]
            oracle = A - B @ np.linalg.inv(C) @ adjoint(B)
            S = schur_complement(M, k)
            assert op_norm(S - oracle) <= 1e-8 * (1 + op_norm(oracle))
            assert min_eig(S) >= -1e-9

    def test_rank_one(self, rng):
        # M = v v^*: the shorted operator of a rank-one PSD matrix onto
        # one coordinate is zero whenever v_2.. != 0 (brute force in 3x3).
        v = cgauss(rng, 3)
        M = np.outer(v, v.conj())
        S = schur_complement(M, 1)
        assert min_eig(S) >= -1e-12 and abs(S[0, 0]) <= 1e-12 * op_norm(M)

    def test_rank_one_with_zero_tail(self):
        v = np.array([2.0, 0.0, 0.0])
        S = schur_complement(np.outer(v, v), 1)
        assert_close(S, [[4.0]], 1e-15)

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 7))
    def test_psd_and_dominated(self, seed, n):
        rng = np.random.default_rng(seed)
        M = random_psd(rng, n, r=int(rng.integers(1, n + 1)))
        k = int(rng.integers(1, n))
        S = schur_complement(M, k)
        scale = 1 + op_norm(M)
        assert min_eig(S) >= -1e-9 * scale
        assert min_eig(M[:k, :k] - S) >= -1e-9 * scale

    def test_bad_split(self, rng):
        with pytest.raises(ValueError):
            schur_complement(random_psd(rng, 3), 3)

    def test_not_psd(self):
        with pytest.raises(NotPSD):
            schur_complement(np.diag([1.0, -1.0, 1.0]), 1)
