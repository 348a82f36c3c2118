import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpstest.schur_weyl import (
    CopyOperator,
    CutSpec,
    check_commutation,
    gram_matrix,
    haar_twirl,
    local_unitary_power,
    mps_projector,
    perm_average_two_sided,
    perm_matrix,
    perm_operator,
    rank_projector,
    symmetric_average,
    wss_projector,
)
from mpstest.states import DimensionGuardError, haar_unitaries, haar_unitary, random_mixed
from mpstest.symfunc import all_permutations, compose, inverse, irrep_dimension, partitions_of, schur_polynomial

ATOL = 1e-10


def swap_matrix(d):
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1
    return s


def kron_power(x, m):
    out = x
    for _ in range(m - 1):
        out = np.kron(out, x)
    return out


class TestPermutations:
    def test_identity(self):
        np.testing.assert_array_equal(perm_matrix((0, 1, 2), (2,)), np.eye(8))

    @pytest.mark.parametrize("d", [2, 3])
    def test_swap(self, d):
        np.testing.assert_array_equal(perm_matrix((1, 0), (d,)), swap_matrix(d))

    def test_action_on_product_vectors(self):
        # P(pi) |a_1 a_2 a_3> = |a_{pi^-1(1)} a_{pi^-1(2)} a_{pi^-1(3)}>
        rng = np.random.default_rng(0)
        vecs = [rng.standard_normal(2) for _ in range(3)]
        for pi in all_permutations(3):
            pinv = inverse(pi)
            expect = kron_power(np.ones(1), 1)
            for j in range(3):
                expect = np.kron(expect, vecs[pinv[j]])
            got = perm_matrix(pi, (2,)) @ np.kron(np.kron(vecs[0], vecs[1]), vecs[2])
            np.testing.assert_allclose(got, expect, atol=1e-12)

    def test_composition_law(self):
        for p in all_permutations(3):
            for q in all_permutations(3):
                lhs = perm_matrix(p, (2,)) @ perm_matrix(q, (2,))
                np.testing.assert_array_equal(lhs, perm_matrix(compose(p, q), (2,)))

    def test_matrix_free_matches_dense(self):
        rng = np.random.default_rng(1)
        dims = (2, 3)
        for pi in all_permutations(3):
            for cut in (None, 1, CutSpec(1)):
                op = perm_operator(pi, dims, cut)
                v = rng.standard_normal(216) + 1j * rng.standard_normal(216)
                np.testing.assert_allclose(op.apply(v), perm_matrix(pi, dims, cut) @ v, atol=1e-12)
                np.testing.assert_allclose(op.dense(), perm_matrix(pi, dims, cut), atol=1e-12)

    def test_unitary(self):
        p = perm_matrix((2, 0, 1), (2, 2), cut=1)
        np.testing.assert_array_equal(p.T @ p, np.eye(64))

    def test_cut_conjugation_relation(self):
        # P_L(pi) P_LR(sigma) = P_LR(sigma) P_L(sigma^-1 pi sigma)
        dims = (2, 2)
        for pi in all_permutations(3):
            for sigma in all_permutations(3):
                lhs = perm_matrix(pi, dims, 1) @ perm_matrix(sigma, dims)
                conj = compose(inverse(sigma), compose(pi, sigma))
                rhs = perm_matrix(sigma, dims) @ perm_matrix(conj, dims, 1)
                np.testing.assert_array_equal(lhs, rhs)

    def test_cut_range(self):
        with pytest.raises(ValueError):
            perm_operator((1, 0), (2, 2), cut=3)
        with pytest.raises(ValueError):
            CutSpec(0).registers(2)

    def test_guard(self):
        with pytest.raises(DimensionGuardError):
            perm_matrix((1, 0, 2, 3), (4, 4))
        with pytest.raises(DimensionGuardError):
            perm_operator((1, 0, 2, 3), (2,) * 6)


class TestProjectors:
    @pytest.mark.parametrize("d", [2, 3])
    def test_symmetric_is_swap_projector(self, d):
        p = wss_projector((2,), (d,), 2).matrix
        np.testing.assert_allclose(p, (np.eye(d * d) + swap_matrix(d)) / 2, atol=ATOL)

    def test_singlet(self):
        p = wss_projector((1, 1), (2,), 2).matrix
        singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
        np.testing.assert_allclose(p, np.outer(singlet, singlet), atol=ATOL)
        assert abs(np.trace(p) - 1) < ATOL

    @pytest.mark.parametrize("mu,trace", [((3,), 4), ((2, 1), 4), ((1, 1, 1), 0)])
    def test_traces_d2_m3(self, mu, trace):
        p = wss_projector(mu, (2,), 3).matrix
        oracle = irrep_dimension(mu) * schur_polynomial(mu, [1.0, 1.0])
        assert abs(np.trace(p).real - trace) < ATOL
        assert abs(oracle - trace) < ATOL

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            wss_projector((2, 1), (2,), 2)

    @pytest.mark.parametrize("dims,m", [((2,), 2), ((2,), 3), ((3,), 3), ((2,), 4), ((4,), 3), ((2, 2), 2), ((3,), 4)])
    def test_resolution_and_orthogonality(self, dims, m):
        total = int(np.prod(dims))
        projs = {mu: wss_projector(mu, dims, m).matrix for mu in partitions_of(m)}
        acc = sum(p for mu, p in projs.items() if mu.length <= total)
        np.testing.assert_allclose(acc, np.eye(total**m), atol=ATOL)
        for mu, p in projs.items():
            if mu.length > total:
                assert np.max(np.abs(p)) < ATOL
            np.testing.assert_allclose(p, p.conj().T, atol=ATOL)
            for nu, q in projs.items():
                expect = p if mu == nu else 0 * p
                np.testing.assert_allclose(p @ q, expect, atol=ATOL)

    def test_rank_projector_r1_is_swap(self):
        np.testing.assert_allclose(
            rank_projector(1, (3,), 2).matrix, (np.eye(9) + swap_matrix(3)) / 2, atol=ATOL
        )

    @pytest.mark.parametrize("r,dims,m", [(3, (2,), 3), (4, (3,), 3), (2, (2,), 4), (2, (2, 2), 2)])
    def test_rank_projector_identity(self, r, dims, m):
        np.testing.assert_allclose(rank_projector(r, dims, m).matrix, np.eye(int(np.prod(dims)) ** m), atol=ATOL)

    @pytest.mark.parametrize("d", [2, 3])
    def test_rank_two_complement(self, d):
        expect = np.eye(d**3) - wss_projector((1, 1, 1), (d,), 3).matrix
        np.testing.assert_allclose(rank_projector(2, (d,), 3).matrix, expect, atol=ATOL)

    def test_rank_projector_on_cut(self):
        # registers beyond the cut are untouched
        p = rank_projector(1, (2, 3), 2, cut=1).matrix
        assert CopyOperator((2, 3), 2, p).is_projector()
        assert abs(np.trace(p).real - 3 * 9) < 1e-9

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 4), m=st.integers(2, 4))
    def test_schur_weyl_measure(self, seed, d, m):
        rho = random_mixed((d,), np.random.default_rng(seed))
        rho_m = kron_power(rho.matrix, m)
        lam = rho.spectrum()
        for mu in partitions_of(m, d):
            p = wss_projector(mu, (d,), m).matrix
            value = np.sum(p * rho_m.T).real
            assert abs(value - irrep_dimension(mu) * schur_polynomial(mu, lam)) < 1e-8


class TestMpsProjector:
    def test_two_sites_single_cut(self):
        np.testing.assert_allclose(
            mps_projector(2, (2, 3), 2).matrix, rank_projector(2, (2, 3), 2, cut=1).matrix, atol=ATOL
        )

    @pytest.mark.parametrize("n", [2, 3])
    def test_r1_m2_matches_swap_tensor_power(self, n):
        dims = (2,) * n
        # (I + SWAP)/2 per qudit in qudit-major order, then reorder registers to copy-major
        pair = (np.eye(4) + swap_matrix(2)) / 2
        qmajor = kron_power(pair, n).reshape((2,) * (4 * n))
        order = [2 * q + c for c in range(2) for q in range(n)]
        swap_all = qmajor.transpose(order + [2 * n + o for o in order]).reshape(4**n, 4**n)
        full = mps_projector(1, dims, 2, include_full_cut=True).matrix
        np.testing.assert_allclose(full, swap_all, atol=ATOL)
        # without the whole-copy cut the two agree on the symmetric subspace
        sym = wss_projector((2,), dims, 2).matrix
        np.testing.assert_allclose(mps_projector(1, dims, 2).matrix @ sym, swap_all, atol=ATOL)

    @pytest.mark.parametrize("r,dims,m", [(1, (2, 2, 2), 2), (2, (2, 2, 2), 3), (1, (2, 3), 3)])
    def test_projector_and_order_independent(self, r, dims, m):
        p = mps_projector(r, dims, m)
        assert p.is_projector()
        rev = np.eye(p.dim)
        for i in reversed(range(1, len(dims))):
            rev = rev @ rank_projector(r, dims, m, cut=i).matrix
        np.testing.assert_allclose(rev, p.matrix, atol=ATOL)


class TestCommutation:
    @pytest.mark.parametrize("dims,m", [((2, 2), 2), ((2, 2), 3), ((2, 2, 2), 2), ((2, 2, 2), 3)])
    def test_nested_cuts_commute(self, dims, m):
        assert check_commutation(dims, m, r=min(2, m - 1)) < 1e-10

    def test_same_cut_orthogonal(self):
        a = wss_projector((2, 1), (2, 2), 3, cut=1).matrix
        b = wss_projector((3,), (2, 2), 3, cut=1).matrix
        assert np.linalg.norm(a @ b) < 1e-10


def monte_carlo_twirl(x, dims, m, side, count, rng):
    acc = np.zeros_like(x)
    for u in haar_unitaries(int(np.prod([dims[q] for q in side])), rng, count):
        w = local_unitary_power(u, dims, m, side)
        acc += w @ x @ w.conj().T
    return acc / count


class TestTwirl:
    def test_identity_fixed(self):
        np.testing.assert_allclose(haar_twirl(np.eye(9), [0], (3,), 2).matrix, np.eye(9), atol=ATOL)

    def test_single_copy_depolarizes(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        np.testing.assert_allclose(haar_twirl(x, [0], (3,), 1).matrix, np.trace(x) / 3 * np.eye(3), atol=ATOL)

    def test_matches_monte_carlo(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        x /= np.linalg.norm(x, 2)
        exact = haar_twirl(x, [0], (2,), 2).matrix
        us = haar_unitaries(2, rng, 100_000)
        w = np.einsum("kab,kcd->kacbd", us, us).reshape(-1, 4, 4)
        mc = np.einsum("kij,jl,kml->im", w, x, w.conj()) / len(us)
        assert np.max(np.abs(mc - exact)) < 0.01

    def test_partial_side_matches_monte_carlo(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        x /= np.linalg.norm(x, 2)
        exact = haar_twirl(x, [1], (2, 2), 2).matrix
        assert np.max(np.abs(monte_carlo_twirl(x, (2, 2), 2, [1], 20_000, rng) - exact)) < 0.02

    @pytest.mark.parametrize("dims,m,side", [((2,), 2, [0]), ((3,), 3, [0]), ((2, 2), 2, [0]), ((2, 3), 2, [1]),
                                             ((2,), 3, [0]), ((2,), 4, [0])])
    def test_channel_properties(self, dims, m, side):
        rng = np.random.default_rng(6)
        size = int(np.prod(dims)) ** m
        x = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        once = haar_twirl(x, side, dims, m)
        twice = haar_twirl(once, side)
        np.testing.assert_allclose(twice.matrix, once.matrix, atol=ATOL)
        assert abs(np.trace(once.matrix) - np.trace(x)) < ATOL
        for _ in range(3):
            w = local_unitary_power(haar_unitary(int(np.prod([dims[q] for q in side])), rng), dims, m, side)
            assert np.linalg.norm(w @ once.matrix - once.matrix @ w) < 1e-8

    def test_gram_matrix(self):
        g = gram_matrix(2, 2)
        np.testing.assert_array_equal(g, [[4, 2], [2, 4]])


class TestTwoSidedAverage:
    def test_trace_formula(self):
        for da, db in ((2, 2), (2, 3)):
            z = perm_average_two_sided(np.eye((da * db) ** 2), [0], [1], "left", (da, db), 2).matrix
            d = da * db
            assert abs(np.trace(z).real - (d * d + d) / 2) < ATOL

    def test_invariant_unchanged(self):
        z = symmetric_average((2, 2), 2, [0, 1])
        for mode in ("conjugate", "left", "right"):
            out = perm_average_two_sided(z, [0], [1], mode, (2, 2), 2).matrix
            np.testing.assert_allclose(out, z, atol=ATOL)

    def test_disjoint_sides(self):
        with pytest.raises(ValueError):
            perm_average_two_sided(np.eye(16), [0], [0, 1], "left", (2, 2), 2)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            perm_average_two_sided(np.eye(16), [0], [1], "sideways", (2, 2), 2)
