"""Acceptance probabilities for the SWAP, product, rank and MPS testers."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, factorial, prod, sqrt

import numpy as np

from .schur_weyl import VECTOR_GUARD, apply_rank_projector, apply_mps_projector, copy_vector
from .states import MixedState, PureState, guard, partial_trace, reduced_spectrum
from .symfunc import (
    Partition,
    cycle_types,
    irrep_dimension,
    character,
    partitions_of,
    power_sum,
    schur_polynomial,
)

PROB_ATOL = 1e-10
CROSSCHECK_ATOL = 1e-8


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # not a pytest class

    accept_probability: float
    m: int
    r: int | None = None
    delta: float | None = None
    per_cut_probabilities: tuple[float, ...] | None = None
    method: str = ""

    def __post_init__(self):
        probs = [self.accept_probability] + list(self.per_cut_probabilities or ())
        for p in probs:
            if not -PROB_ATOL <= p <= 1 + PROB_ATOL:
                raise ValueError(f"probability {p} outside [0, 1]")

    @property
    def reject_probability(self) -> float:
        return 1.0 - self.accept_probability


def _clip(p: float) -> float:
    return float(min(1.0, max(0.0, p)))


# -- SWAP and product tests --------------------------------------------------


def swap_test_prob(a: PureState, b: PureState, method: str = "formula") -> float:
    """Acceptance probability 1/2 + 1/2 |<a|b>|^2 of the SWAP test on a x b."""
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch {a.dims} vs {b.dims}")
    if method == "formula":
        return 0.5 + 0.5 * a.overlap(b)
    if method == "projector":
        t = np.kron(a.amplitudes, b.amplitudes).reshape(a.dim, a.dim)
        sym = (t + t.T) / 2
        return float(np.vdot(sym, sym).real)
    raise ValueError(f"unknown method {method!r}")


def _product_test_swap(psi: PureState) -> float:
    n = psi.n
    guard(psi.dim**2, VECTOR_GUARD, "two-copy vector")
    v = np.multiply.outer(psi.tensor, psi.tensor)
    for q in range(n):
        v = (v + np.swapaxes(v, q, n + q)) / 2
    return float(np.vdot(v, v).real)


def _product_test_purity(psi: PureState) -> float:
    # PT = 2^-n sum over subsets S of Tr[psi_S^2].
    n = psi.n
    total = 0.0
    for mask in range(1 << n):
        keep = [q for q in range(n) if mask >> q & 1]
        if not keep or len(keep) == n:
            total += 1.0
            continue
        red = partial_trace(psi, keep).matrix
        total += float(np.vdot(red, red).real)
    return total / 2**n


def product_test_prob(psi: PureState, method: str = "auto") -> float:
    """PT(psi) = || Pi_SWAP^{x n} psi^{x 2} ||^2.

    ``swap`` symmetrizes each qudit pair in place; ``purity`` sums subsystem
    purities, which needs no two-copy vector.
    """
    if method == "auto":
        method = "swap" if psi.dim**2 <= VECTOR_GUARD else "purity"
    if method == "swap":
        return _clip(_product_test_swap(psi))
    if method == "purity":
        return _clip(_product_test_purity(psi))
    raise ValueError(f"unknown method {method!r}")


def swap_cut_accept_prob(psi: PureState, cut: int) -> float:
    """SWAP test on the registers 0..cut-1 of two copies: 1/2 (1 + Tr[psi_A^2])."""
    lam = reduced_spectrum(psi, cut)
    return _clip(0.5 * (1.0 + float(np.sum(lam**2))))


def product_test_bound(omega: float, variant: str = "sharp") -> float:
    """Upper bound on the product-test acceptance for a state with Overlap_1 = omega."""
    if not -1e-12 <= omega <= 1 + 1e-12:
        raise ValueError(f"omega must lie in [0, 1], got {omega}")
    simple = omega**2 / 3 + 2 / 3
    if variant == "simple":
        return simple
    if variant == "sharp":
        return omega**2 - omega + 1 if omega >= 0.5 else simple
    raise ValueError(f"unknown variant {variant!r}")


# Crossover of the two branches of hm_bound, as a function of eps = 1 - omega.
EPS0 = (757 - 16 * sqrt(1258)) / 512


def hm_bound(omega: float) -> float:
    """Earlier product-test bound min{1 - e + e^2 + e^{3/2}, 1 - 11e/512}, e = 1 - omega."""
    if not -1e-12 <= omega <= 1 + 1e-12:
        raise ValueError(f"omega must lie in [0, 1], got {omega}")
    eps = max(0.0, 1.0 - omega)
    if eps <= EPS0:
        return 1 - eps + eps**2 + eps**1.5
    return 1 - 11 * eps / 512


# -- weak Schur sampling and the rank tester ---------------------------------


def _spectrum(rho) -> np.ndarray:
    if isinstance(rho, MixedState):
        return rho.spectrum()
    if isinstance(rho, PureState):
        return np.array([1.0])
    return np.clip(np.sort(np.asarray(rho, dtype=float))[::-1], 0.0, None)


def wss_distribution(rho, m: int) -> dict[Partition, float]:
    """Pr[mu] = dim(mu) s_mu(spectrum) over all partitions of m."""
    lam = _spectrum(rho)
    return {mu: irrep_dimension(mu) * schur_polynomial(mu, lam) for mu in partitions_of(m)}


def _rank_prob_oracle(lam: np.ndarray, r: int, m: int) -> float:
    return sum(irrep_dimension(mu) * schur_polynomial(mu, lam) for mu in partitions_of(m, r))


def _rank_prob_class(lam: np.ndarray, r: int, m: int) -> float:
    # Tr[P(pi) rho^{x m}] = p_{cycle type}(lam); average the rank-projector class function.
    mus = partitions_of(m, r)
    total = 0.0
    for ct in cycle_types(m):
        coeff = sum(irrep_dimension(mu) * character(mu, ct) for mu in mus)
        total += ct.class_size * coeff * power_sum(lam, ct.partition)
    return total / factorial(m)


def _purification(rho: MixedState) -> tuple[np.ndarray, tuple[int, int]]:
    w, v = np.linalg.eigh(rho.matrix)
    w = np.clip(w, 0.0, None)
    keep = w > 1e-15
    w, v = w[keep], v[:, keep]
    anc = max(2, w.size)
    amps = np.zeros((rho.dim, anc), dtype=complex)
    amps[:, : w.size] = v * np.sqrt(w)
    return amps.ravel(), (rho.dim, anc)


def _rank_prob_projector(rho: MixedState, r: int, m: int) -> float:
    # Purify, then apply Pi_{<=r} to the system register of each copy.
    vec, dims = _purification(rho)
    guard(prod(dims) ** m, VECTOR_GUARD, "purified copy vector")
    out = vec
    for _ in range(m - 1):
        out = np.kron(out, vec)
    proj = apply_rank_projector(out, r, dims, m, cut=[0])
    return float(np.vdot(out, proj).real)


def rank_test_accept_prob(rho, r: int, m: int, method: str = "auto", crosscheck: bool = False) -> float:
    """Tr[Pi_{<=r} rho^{x m}].

    ``projector`` contracts the projector with a purification, ``oracle`` sums
    dim(mu) s_mu(lam), ``class`` averages characters against power sums.
    With ``crosscheck`` the projector and oracle values must agree to 1e-8.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if isinstance(rho, PureState):
        rho = rho.density()
    lam = _spectrum(rho)
    if method == "auto":
        method = "oracle"
    if method == "oracle":
        p = _rank_prob_oracle(lam, r, m)
    elif method == "class":
        p = _rank_prob_class(lam, r, m)
    elif method == "projector":
        if not isinstance(rho, MixedState):
            raise TypeError("projector method needs a MixedState")
        p = _rank_prob_projector(rho, r, m)
    else:
        raise ValueError(f"unknown method {method!r}")
    if crosscheck:
        alt = _rank_prob_projector(rho, r, m) if method != "projector" else _rank_prob_oracle(lam, r, m)
        if abs(alt - p) > CROSSCHECK_ATOL:
            raise ArithmeticError(f"rank tester paths disagree: {p} vs {alt}")
    return _clip(p)


def sample_wss(rho, m: int, rng: np.random.Generator, size: int | None = None):
    """Draw weak-Schur-sampling outcomes; one Partition, or a list when ``size`` is given."""
    dist = wss_distribution(rho, m)
    labels = list(dist)
    p = np.clip(np.array([dist[mu] for mu in labels]), 0.0, None)
    p /= p.sum()
    idx = rng.choice(len(labels), size=size, p=p)
    if size is None:
        return labels[int(idx)]
    return [labels[int(i)] for i in idx]


def rank_test_sample(rho, r: int, m: int, rng: np.random.Generator) -> tuple[bool, Partition]:
    mu = sample_wss(rho, m, rng)
    return mu.length <= r, mu


# -- the MPS tester ----------------------------------------------------------


def mps_test_accept_prob(psi: PureState, r: int, m: int, with_cuts: bool = True) -> TestReport:
    """|| Pi_MPS psi^{x m} ||^2 with the rank tester run on every prefix cut.

    ``per_cut_probabilities`` holds the single-cut rank tester values, each an
    upper bound on the joint acceptance.
    """
    if psi.n < 2:
        raise ValueError("the MPS tester needs at least two qudits")
    vec = copy_vector(psi, m)
    out = apply_mps_projector(vec, r, psi.dims, m)
    p = _clip(float(np.vdot(vec, out).real))
    cuts = None
    if with_cuts:
        cuts = tuple(
            rank_test_accept_prob(reduced_spectrum(psi, i), r, m) for i in range(1, psi.n)
        )
    return TestReport(p, m=m, r=r, per_cut_probabilities=cuts, method="projector")


# -- copy complexity ---------------------------------------------------------


@dataclass(frozen=True)
class CopyConstants:
    """Constants hidden by the O(.) statements; tunable, not derived."""

    c1: float = 12.0
    c2: float = 1.0
    lower: float = 1 / 24


def _ceil(x: float) -> int:
    return int(ceil(x - 1e-9))


def copies_needed(kind: str, delta: float, n: int | None = None, r: int | None = None,
                  constants: CopyConstants = CopyConstants()) -> int:
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if kind == "product":
        return _ceil(constants.c1 / delta**2)
    if kind == "mps":
        if n is None or r is None:
            raise ValueError("mps copy count needs n and r")
        return _ceil(constants.c2 * n * r**2 / delta**2)
    if kind == "lower":
        if n is None:
            raise ValueError("lower bound needs n")
        return _ceil(constants.lower * sqrt(n) / delta**2)
    raise ValueError(f"unknown kind {kind!r}")
