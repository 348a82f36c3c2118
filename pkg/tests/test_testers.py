import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpstest.geometry import MpsState, bunny_state, ghz_state, max_entangled, product_state, schmidt_pair
from mpstest.schur_weyl import copy_vector, mps_projector, rank_projector
from mpstest.states import PureState, random_mixed, random_state, state_from_spectrum, tensor_product
from mpstest.symfunc import Partition
from mpstest.testers import (
    EPS0,
    CopyConstants,
    TestReport,
    copies_needed,
    hm_bound,
    mps_test_accept_prob,
    product_test_bound,
    product_test_prob,
    rank_test_accept_prob,
    rank_test_sample,
    sample_wss,
    swap_cut_accept_prob,
    swap_test_prob,
    wss_distribution,
)


def pair_with_overlap(omega, d=3):
    a = np.zeros(d)
    a[0] = 1
    b = np.zeros(d)
    b[0], b[1] = np.sqrt(omega), np.sqrt(1 - omega)
    return PureState((d,), a), PureState((d,), b)


def random_mps_state(dims, r, rng):
    caps = [1] + [min(r, int(np.prod(dims[:k])), int(np.prod(dims[k:]))) for k in range(1, len(dims))] + [1]
    ts = [rng.standard_normal((caps[k], d, caps[k + 1])) + 1j * rng.standard_normal((caps[k], d, caps[k + 1]))
          for k, d in enumerate(dims)]
    return MpsState(tuple(ts)).to_state()


class TestSwap:
    @pytest.mark.parametrize("omega,expected", [(1.0, 1.0), (0.0, 0.5), (0.3, 0.65)])
    def test_values(self, omega, expected):
        a, b = pair_with_overlap(omega)
        assert abs(swap_test_prob(a, b) - expected) < 1e-12
        assert abs(swap_test_prob(a, b, method="projector") - expected) < 1e-10

    def test_mismatch(self):
        with pytest.raises(ValueError):
            swap_test_prob(PureState((2,), [1, 0]), PureState((3,), [1, 0, 0]))

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_paths_agree(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_state((2, 3), rng), random_state((2, 3), rng)
        assert abs(swap_test_prob(a, b) - swap_test_prob(a, b, "projector")) < 1e-10


class TestProductTest:
    def test_product_states_pass(self):
        rng = np.random.default_rng(0)
        for dims in ((2,), (2, 3), (3, 2, 2), (2, 2, 2, 2)):
            assert abs(product_test_prob(product_state(dims, rng)) - 1) < 1e-12

    def test_schmidt_pair(self):
        assert abs(product_test_prob(schmidt_pair(0.7)) - 0.79) < 1e-12

    def test_max_entangled(self):
        assert abs(product_test_prob(max_entangled(3)) - 2 / 3) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), dims=st.lists(st.integers(2, 3), min_size=1, max_size=4))
    def test_paths_agree_and_factorization(self, seed, dims):
        psi = random_state(dims, np.random.default_rng(seed))
        a, b = product_test_prob(psi, "swap"), product_test_prob(psi, "purity")
        assert abs(a - b) < 1e-10
        if len(dims) > 1:
            assert a <= swap_cut_accept_prob(psi, 1) + 1e-10

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            product_test_prob(schmidt_pair(0.5), "magic")


class TestBounds:
    def test_endpoints(self):
        assert product_test_bound(1.0, "simple") == 1.0
        assert product_test_bound(1.0, "sharp") == 1.0
        assert abs(product_test_bound(0.5, "sharp") - 0.75) < 1e-15
        assert abs(product_test_bound(0.5 - 1e-13, "sharp") - 0.75) < 1e-12
        assert abs(product_test_bound(0.7, "sharp") - 0.79) < 1e-15

    def test_order_and_monotone(self):
        grid = np.linspace(0, 1, 201)
        sharp = np.array([product_test_bound(w, "sharp") for w in grid])
        simple = np.array([product_test_bound(w, "simple") for w in grid])
        assert np.all(sharp <= simple + 1e-15)
        assert np.all(np.diff(sharp) >= -1e-15)
        assert np.all(np.diff(simple) >= -1e-15)

    def test_invalid(self):
        with pytest.raises(ValueError):
            product_test_bound(1.5)
        with pytest.raises(ValueError):
            product_test_bound(0.5, "fuzzy")

    def test_hm_values(self):
        assert hm_bound(1.0) == 1.0
        assert abs(hm_bound(0.5) - (1 - 11 / 1024)) < 1e-15
        assert abs(EPS0 - 0.37) < 0.005

    def test_hm_crossover_continuous(self):
        e = EPS0
        assert abs((1 - e + e**2 + e**1.5) - (1 - 11 * e / 512)) < 1e-12

    def test_hm_is_min_of_branches(self):
        for w in np.linspace(0, 1, 101):
            e = 1 - w
            assert abs(hm_bound(w) - min(1 - e + e**2 + e**1.5, 1 - 11 * e / 512)) < 1e-12

    def test_hm_dominates_sharp(self):
        for w in np.linspace(0, 1, 101)[:-1]:
            assert hm_bound(w) >= product_test_bound(w, "sharp")


class TestSwapCut:
    def test_product(self):
        psi = product_state((2, 3), np.random.default_rng(1))
        assert abs(swap_cut_accept_prob(psi, 1) - 1) < 1e-12

    def test_bell(self):
        assert abs(swap_cut_accept_prob(max_entangled(2), 1) - 0.75) < 1e-12

    def test_spectrum_formula(self):
        assert abs(swap_cut_accept_prob(schmidt_pair(0.7), 1) - 0.79) < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_pairwise_form(self, seed):
        psi = random_state((3, 2, 2), np.random.default_rng(seed))
        for cut in (1, 2):
            lam = np.linalg.svd(psi.amplitudes.reshape(int(np.prod(psi.dims[:cut])), -1), compute_uv=False) ** 2
            pairwise = np.sum(lam**2) + sum(lam[i] * lam[j] for i in range(len(lam)) for j in range(i + 1, len(lam)))
            assert abs(swap_cut_accept_prob(psi, cut) - pairwise) < 1e-10

    def test_bad_cut(self):
        with pytest.raises(ValueError):
            swap_cut_accept_prob(schmidt_pair(0.5), 2)


class TestRankTester:
    @pytest.mark.parametrize("r,m", [(1, 2), (1, 4), (2, 3), (3, 4)])
    def test_rank_one_accepts(self, r, m):
        rho = random_mixed((3,), np.random.default_rng(r * 10 + m), rank=1)
        assert abs(rank_test_accept_prob(rho, r, m, method="projector") - 1) < 1e-10

    @pytest.mark.parametrize("m,expected", [(2, 0.75), (3, 0.5)])
    def test_maximally_mixed_qubit(self, m, expected):
        rho = state_from_spectrum([0.5, 0.5])
        for method in ("projector", "oracle", "class"):
            assert abs(rank_test_accept_prob(rho, 1, m, method=method) - expected) < 1e-10

    @pytest.mark.parametrize("d,m", [(2, 2), (2, 4), (3, 3), (4, 3), (4, 4)])
    def test_three_paths_and_dense(self, d, m):
        rho = random_mixed((d,), np.random.default_rng(d + 7 * m))
        rho_m = rho.matrix
        for _ in range(m - 1):
            rho_m = np.kron(rho_m, rho.matrix)
        for r in range(1, min(d, m) + 1):
            values = [rank_test_accept_prob(rho, r, m, method=k) for k in ("projector", "oracle", "class")]
            dense = np.sum(rank_projector(r, (d,), m).matrix * rho_m.T).real
            assert max(values) - min(values) < 1e-8
            assert abs(values[0] - dense) < 1e-8
            rank_test_accept_prob(rho, r, m, crosscheck=True)

    def test_monotone(self):
        rho = random_mixed((3,), np.random.default_rng(2))
        table = np.array([[rank_test_accept_prob(rho, r, m) for m in range(1, 6)] for r in range(1, 4)])
        assert np.all(np.diff(table, axis=1) <= 1e-12)
        assert np.all(np.diff(table, axis=0) >= -1e-12)

    def test_distribution_sums_to_one(self):
        rho = random_mixed((3,), np.random.default_rng(3))
        assert abs(sum(wss_distribution(rho, 4).values()) - 1) < 1e-10


class TestSampling:
    def test_rank_one_always_trivial(self):
        rng = np.random.default_rng(0)
        rho = random_mixed((2,), rng, rank=1)
        for _ in range(50):
            accept, mu = rank_test_sample(rho, 1, 3, rng)
            assert accept and mu == Partition((3,))

    def test_maximally_mixed_frequencies(self):
        rng = np.random.default_rng(1)
        draws = sample_wss(state_from_spectrum([0.5, 0.5]), 2, rng, size=10_000)
        freq = sum(mu == Partition((2,)) for mu in draws) / len(draws)
        assert abs(freq - 0.75) < 3 * np.sqrt(0.75 * 0.25 / 10_000)

    def test_reproducible(self):
        rho = random_mixed((3,), np.random.default_rng(2))
        a = sample_wss(rho, 3, np.random.default_rng(5), size=100)
        b = sample_wss(rho, 3, np.random.default_rng(5), size=100)
        assert a == b


class TestMpsTester:
    def test_ghz(self):
        for n in (3, 4, 5):
            assert abs(mps_test_accept_prob(ghz_state(n), 2, 3).accept_probability - 1) < 1e-9

    @pytest.mark.parametrize("n,expected", [(4, 26 / 27), (5, 15 / 16), (6, 0.92)])
    def test_bunny(self, n, expected):
        # rank-3 cuts have spectrum {(i-1), 1, (n-i-1)}/(n-1); a 3-copy rank-2 test
        # rejects with probability e_3 of that spectrum, and the cut projectors commute
        rep = mps_test_accept_prob(bunny_state(n), 2, 3)
        e3 = [(i - 1) * (n - i - 1) / (n - 1) ** 3 for i in range(2, n - 1)]
        np.testing.assert_allclose(1 - np.array(rep.per_cut_probabilities[1:-1]), e3, atol=1e-12)
        assert rep.accept_probability >= 1 - sum(e3) - 1e-12
        assert abs(rep.accept_probability - expected) < 1e-10
        assert abs(mps_test_accept_prob(bunny_state(n), 3, 3).accept_probability - 1) < 1e-9

    def test_product(self):
        psi = product_state((2, 3, 2), np.random.default_rng(3))
        assert abs(mps_test_accept_prob(psi, 1, 2).accept_probability - 1) < 1e-10

    @pytest.mark.parametrize("dims,r,m", [((2, 2, 2), 2, 3), ((2, 3, 2), 2, 2), ((2, 2, 2, 2), 1, 3)])
    def test_mps_states_accepted(self, dims, r, m):
        psi = random_mps_state(dims, r, np.random.default_rng(4))
        assert abs(mps_test_accept_prob(psi, r, m).accept_probability - 1) < 1e-9

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), r=st.integers(1, 2), m=st.integers(2, 3))
    def test_bounded_by_each_cut(self, seed, r, m):
        psi = random_state((2, 2, 2), np.random.default_rng(seed))
        rep = mps_test_accept_prob(psi, r, m)
        assert all(rep.accept_probability <= p + 1e-10 for p in rep.per_cut_probabilities)

    def test_dense_route_agrees(self):
        psi = random_state((2, 2, 2), np.random.default_rng(6))
        v = copy_vector(psi, 2)
        dense = np.vdot(v, mps_projector(1, psi.dims, 2).matrix @ v).real
        assert abs(dense - mps_test_accept_prob(psi, 1, 2).accept_probability) < 1e-10

    def test_product_test_equals_mps_tester_r1_m2(self):
        psi = random_state((2, 3, 2), np.random.default_rng(7))
        assert abs(product_test_prob(psi) - mps_test_accept_prob(psi, 1, 2).accept_probability) < 1e-10

    def test_report_validation(self):
        with pytest.raises(ValueError):
            TestReport(1.5, m=2)


class TestCopies:
    def test_examples(self):
        assert copies_needed("lower", 0.5, n=100) == 2
        assert copies_needed("lower", 0.5, n=64) == 2
        assert copies_needed("product", 1.0) == 12
        assert copies_needed("mps", 1.0, n=4, r=2) == 16
        assert copies_needed("mps", 1.0, n=4, r=2, constants=CopyConstants(c2=3)) == 48

    def test_invalid(self):
        with pytest.raises(ValueError):
            copies_needed("product", 0.0)
        with pytest.raises(ValueError):
            copies_needed("nope", 0.5)
