"""Overlap and distance to MPS(r), plus the named states used throughout.

Overlap_r(psi) is the largest |<phi|psi>|^2 over phi in MPS(r).  Lower bounds
here always come with an explicit MPS witness.  Upper bounds come from
Young-Eckart at each cut (certified) or from the variational value itself
(heuristic).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod, sqrt

import numpy as np

from .states import (
    PureState,
    _check_cut,
    bipartite_matrix,
    check_dims,
    reduced_spectrum,
    schmidt,
    tensor_power,
)

BRACKET_ATOL = 1e-8
GAIN_TOL = 1e-12
MAX_SWEEPS = 200
DEFAULT_RESTARTS = 8


# -- types -------------------------------------------------------------------


@dataclass(frozen=True)
class MpsState:
    """Open-boundary MPS; site tensor k has shape (bond_in, d_k, bond_out)."""

    tensors: tuple[np.ndarray, ...]

    def __post_init__(self):
        ts = tuple(np.asarray(t, dtype=complex) for t in self.tensors)
        if not ts:
            raise ValueError("empty MPS")
        if ts[0].shape[0] != 1 or ts[-1].shape[2] != 1:
            raise ValueError("boundary bonds must be 1")
        for a, b in zip(ts, ts[1:]):
            if a.shape[2] != b.shape[0]:
                raise ValueError("bond dimensions do not match")
        object.__setattr__(self, "tensors", ts)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(t.shape[1] for t in self.tensors)

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return tuple(t.shape[2] for t in self.tensors[:-1])

    def vector(self) -> np.ndarray:
        v = self.tensors[0].reshape(-1, self.tensors[0].shape[2])
        for t in self.tensors[1:]:
            v = (v @ t.reshape(t.shape[0], -1)).reshape(-1, t.shape[2])
        return v.ravel()

    def to_state(self) -> PureState:
        return PureState.from_vector(self.dims, self.vector())


@dataclass(frozen=True)
class OverlapBracket:
    """Bracket on Overlap_r(psi).

    ``lower`` is certified by ``witness``.  ``upper`` is the analytic value when
    one is known and otherwise the best variational value (heuristic).
    ``certified_upper`` is the smallest top-r Schmidt mass over all cuts.
    """

    lower: float
    upper: float
    methods: tuple[str, ...] = ()
    witness: MpsState | None = None
    certified_upper: float = 1.0
    truncation_bound: float | None = None

    def __post_init__(self):
        if not (-BRACKET_ATOL <= self.lower <= self.upper + BRACKET_ATOL <= 1 + 2 * BRACKET_ATOL):
            raise ValueError(f"invalid bracket [{self.lower}, {self.upper}]")

    def contains(self, value: float, atol: float = BRACKET_ATOL) -> bool:
        return self.lower - atol <= value <= self.upper + atol


@dataclass(frozen=True)
class DistanceBracket:
    lower: float
    upper: float
    certified_lower: float


@dataclass(frozen=True)
class Truncation:
    mps: MpsState
    bound: float
    overlap: float
    tails: tuple[float, ...]


# -- exact and certified pieces ----------------------------------------------


def overlap_bipartite(psi: PureState, cut: int, r: int) -> tuple[float, PureState]:
    """Young-Eckart: best rank-r overlap across one cut and its truncated witness."""
    if r < 1:
        raise ValueError("r must be >= 1")
    dec = schmidt(psi, cut)
    k = min(r, dec.rank)
    lam = dec.coefficients[:k]
    vec = (dec.left_basis[:, :k] * np.sqrt(lam)) @ dec.right_basis[:, :k].T
    value = float(lam.sum())
    return min(1.0, value), PureState.from_vector(psi.dims, vec.ravel())


def cut_tails(psi: PureState, r: int) -> np.ndarray:
    """Squared Schmidt mass beyond the top r at each cut 1..n-1."""
    return np.array([float(reduced_spectrum(psi, i)[r:].sum()) for i in range(1, psi.n)])


def certified_upper(psi: PureState, r: int) -> float:
    """min over cuts of the top-r Schmidt mass; MPS(r) has rank <= r at every cut."""
    if psi.n < 2:
        return 1.0
    return float(min(1.0, min(reduced_spectrum(psi, i)[:r].sum() for i in range(1, psi.n))))


def witness_overlap(mps: MpsState, psi: PureState) -> float:
    v = mps.vector()
    return float(abs(np.vdot(v, psi.amplitudes)) ** 2 / np.vdot(v, v).real)


def truncate_to_mps(psi: PureState, r: int) -> Truncation:
    """Left-to-right sequential SVD truncation to bond dimension r.

    ``bound`` is (1 - sum of cut tails)^2 clipped at 0, a certified lower bound
    on the witness overlap.
    """
    if psi.n < 2:
        raise ValueError("need at least two qudits")
    if r < 1:
        raise ValueError("r must be >= 1")
    tails = cut_tails(psi, r)
    rest = psi.amplitudes.reshape(1, -1)
    bond = 1
    tensors = []
    for d in psi.dims[:-1]:
        u, s, vh = np.linalg.svd(rest.reshape(bond * d, -1), full_matrices=False)
        k = max(1, min(r, int(np.sum(s > 1e-14))))
        tensors.append(u[:, :k].reshape(bond, d, k))
        rest = s[:k, None] * vh[:k]
        bond = k
    norm = np.linalg.norm(rest)
    tensors.append((rest / norm).reshape(bond, psi.dims[-1], 1))
    mps = MpsState(tuple(tensors))
    bound = max(0.0, 1.0 - float(tails.sum())) ** 2
    return Truncation(mps, bound, witness_overlap(mps, psi), tuple(tails))


# -- variational optimizers --------------------------------------------------


def _bond_caps(dims: tuple[int, ...], r: int) -> list[int]:
    """Bond dimension after each site: min(r, left dim, right dim); padded with 1 at both ends."""
    n = len(dims)
    return [1] + [min(r, prod(dims[:k]), prod(dims[k:])) for k in range(1, n)] + [1]


def _right_canonical(tensors: list[np.ndarray]) -> list[np.ndarray]:
    ts = list(tensors)
    for k in range(len(ts) - 1, 0, -1):
        a, d, b = ts[k].shape
        q, rr = np.linalg.qr(ts[k].reshape(a, d * b).T)
        ts[k] = q.T.reshape(q.shape[1], d, b)
        ts[k - 1] = np.tensordot(ts[k - 1], rr.T, axes=(2, 0))
    ts[0] = ts[0] / np.linalg.norm(ts[0])
    return ts


def _pad(tensors, caps) -> list[np.ndarray]:
    out = []
    for k, t in enumerate(tensors):
        padded = np.zeros((caps[k], t.shape[1], caps[k + 1]), dtype=complex)
        padded[: t.shape[0], :, : t.shape[2]] = t
        out.append(padded)
    return out


def _random_mps(dims, caps, rng) -> list[np.ndarray]:
    return [
        rng.standard_normal((caps[k], d, caps[k + 1])) + 1j * rng.standard_normal((caps[k], d, caps[k + 1]))
        for k, d in enumerate(dims)
    ]


def _left_env(psi_t: np.ndarray, tensors, k: int) -> np.ndarray:
    """Contract conj of left-canonical sites 0..k-1 into psi: shape (bond_k, rest)."""
    env = psi_t.reshape(1, -1)
    for t in tensors[:k]:
        a, d, b = t.shape
        env = t.reshape(a * d, b).conj().T @ env.reshape(a * d, -1)
    return env


def _right_block(tensors, k: int) -> np.ndarray:
    """Sites k..n-1 (right-canonical) as a matrix (bond_k, prod dims[k:])."""
    block = np.ones((1, 1), dtype=complex)
    for t in reversed(tensors[k:]):
        a, d, b = t.shape
        block = (t.reshape(a * d, b) @ block).reshape(a, -1)
    return block


def _two_site_sweep(psi: PureState, ts: list[np.ndarray], caps) -> tuple[list[np.ndarray], float]:
    n = psi.n
    dims = psi.dims
    value = 0.0

    def update(k: int, move_right: bool):
        nonlocal value
        left = _left_env(psi.amplitudes, ts, k)
        right = _right_block(ts, k + 2)
        chi_l, chi_r = caps[k], caps[k + 2]
        env = left.reshape(chi_l * dims[k] * dims[k + 1], -1) @ right.conj().T
        env = env.reshape(chi_l * dims[k], dims[k + 1] * chi_r)
        u, s, vh = np.linalg.svd(env, full_matrices=False)
        chi = caps[k + 1]
        u, s, vh = u[:, :chi], s[:chi], vh[:chi]
        if s.size < chi:
            raise ArithmeticError("environment rank below bond cap")
        norm = np.linalg.norm(s)
        value = float(norm**2)
        if norm == 0:
            return
        if move_right:
            ts[k] = u.reshape(chi_l, dims[k], chi)
            ts[k + 1] = ((s / norm)[:, None] * vh).reshape(chi, dims[k + 1], chi_r)
        else:
            ts[k] = (u * (s / norm)).reshape(chi_l, dims[k], chi)
            ts[k + 1] = vh.reshape(chi, dims[k + 1], chi_r)

    # forward: sites left of k are left-canonical; backward: right of k+1 right-canonical
    for k in range(n - 1):
        update(k, True)
    for k in range(n - 2, -1, -1):
        update(k, False)
    return ts, value


def _dmrg_run(psi: PureState, ts: list[np.ndarray], caps, sweeps: int) -> tuple[MpsState, float, list[float]]:
    ts = _right_canonical(_pad(ts, caps))
    history: list[float] = []
    prev = -1.0
    for _ in range(sweeps):
        ts, value = _two_site_sweep(psi, ts, caps)
        history.append(value)
        if value - prev < GAIN_TOL:
            break
        prev = value
    return MpsState(tuple(ts)), value, history


def _child_rngs(rng, count: int) -> list[np.random.Generator]:
    if isinstance(rng, np.random.Generator):
        seeds = rng.integers(0, 2**63 - 1, size=count)
        return [np.random.default_rng([int(s), i]) for i, s in enumerate(seeds)]
    return [np.random.default_rng([int(rng), i]) for i in range(count)]


def overlap_mps_dmrg(
    psi: PureState,
    r: int,
    sweeps: int = MAX_SWEEPS,
    restarts: int = DEFAULT_RESTARTS,
    rng: np.random.Generator | int = 0,
    analytic: float | None = None,
) -> OverlapBracket:
    """Two-site variational maximization of |<phi|psi>|^2 over MPS(r).

    Each update replaces a pair of sites by the best rank-capped approximation
    of the local environment, so the overlap never decreases.  Runs from the
    truncation witness and from ``restarts`` random starts.
    """
    if psi.n < 2:
        raise ValueError("need at least two qudits")
    caps = _bond_caps(psi.dims, r)
    trunc = truncate_to_mps(psi, r)
    best_mps, best = trunc.mps, trunc.overlap
    methods = ["truncation"]
    starts = [list(trunc.mps.tensors)] + [
        _random_mps(psi.dims, caps, g) for g in _child_rngs(rng, restarts)
    ]
    for start in starts:
        mps, _, _ = _dmrg_run(psi, start, caps, sweeps)
        val = witness_overlap(mps, psi)
        if val > best:
            best, best_mps = val, mps
            if "dmrg" not in methods:
                methods.append("dmrg")
    cu = certified_upper(psi, r)
    upper = best if analytic is None else analytic
    if analytic is not None:
        methods.append("analytic")
    return OverlapBracket(
        lower=min(best, 1.0),
        upper=min(max(upper, 0.0), 1.0),
        methods=tuple(methods),
        witness=best_mps,
        certified_upper=cu,
        truncation_bound=trunc.bound,
    )


def _product_mps(factors: list[np.ndarray]) -> MpsState:
    return MpsState(tuple(f.reshape(1, -1, 1) for f in factors))


def _als_run(psi_t: np.ndarray, factors: list[np.ndarray], sweeps: int) -> tuple[list[np.ndarray], list[float]]:
    n = psi_t.ndim
    history: list[float] = []
    prev = -1.0
    for _ in range(sweeps):
        value = 0.0
        for k in range(n):
            env = psi_t
            # contract every other factor (conjugated) into psi, highest axis first
            for j in range(n - 1, -1, -1):
                if j != k:
                    env = np.tensordot(env, factors[j].conj(), axes=([j], [0]))
            norm = np.linalg.norm(env)
            if norm == 0:
                continue
            factors[k] = env / norm
            value = float(norm**2)
        history.append(value)
        if value - prev < GAIN_TOL:
            break
        prev = value
    return factors, history


def _hosvd_start(psi_t: np.ndarray) -> list[np.ndarray]:
    out = []
    for k in range(psi_t.ndim):
        unfold = np.moveaxis(psi_t, k, 0).reshape(psi_t.shape[k], -1)
        u, _, _ = np.linalg.svd(unfold, full_matrices=False)
        out.append(u[:, 0])
    return out


def overlap_product_als(
    psi: PureState,
    restarts: int = DEFAULT_RESTARTS,
    rng: np.random.Generator | int = 0,
    sweeps: int = MAX_SWEEPS,
    analytic: float | None = None,
) -> OverlapBracket:
    """Alternating maximization of |<a_1...a_n|psi>|^2 over product states (r = 1)."""
    psi_t = psi.tensor
    starts = [_hosvd_start(psi_t)]
    for g in _child_rngs(rng, restarts):
        starts.append([
            (lambda z: z / np.linalg.norm(z))(g.standard_normal(d) + 1j * g.standard_normal(d))
            for d in psi.dims
        ])
    best, best_mps = -1.0, None
    for start in starts:
        factors, _ = _als_run(psi_t, [f.astype(complex) for f in start], sweeps)
        mps = _product_mps(factors)
        val = witness_overlap(mps, psi)
        if val > best:
            best, best_mps = val, mps
    methods = ["als"]
    upper = best
    if analytic is not None:
        upper = analytic
        methods.append("analytic")
    return OverlapBracket(
        lower=min(best, 1.0),
        upper=min(max(upper, 0.0), 1.0),
        methods=tuple(methods),
        witness=best_mps,
        certified_upper=certified_upper(psi, 1),
    )


def overlap_r(psi: PureState, r: int, rng: np.random.Generator | int = 0, **kwargs) -> OverlapBracket:
    """Overlap bracket via the exact formula (n = 2), ALS (r = 1) or DMRG."""
    if psi.n == 1:
        return OverlapBracket(1.0, 1.0, ("trivial",), MpsState((psi.amplitudes.reshape(1, -1, 1),)))
    if psi.n == 2:
        value, _ = overlap_bipartite(psi, 1, r)
        trunc = truncate_to_mps(psi, r)
        return OverlapBracket(trunc.overlap, value, ("young-eckart",), trunc.mps, value, trunc.bound)
    if r == 1:
        return overlap_product_als(psi, rng=rng, **kwargs)
    return overlap_mps_dmrg(psi, r, rng=rng, **kwargs)


def dist_r(psi: PureState, r: int, bracket: OverlapBracket | None = None, **kwargs) -> DistanceBracket:
    """Dist_r bracket [sqrt(1 - upper), sqrt(1 - lower)] from an overlap bracket."""
    b = overlap_r(psi, r, **kwargs) if bracket is None else bracket
    lo = sqrt(max(0.0, 1.0 - b.upper))
    hi = sqrt(max(0.0, 1.0 - b.lower))
    return DistanceBracket(lo, min(1.0, hi), sqrt(max(0.0, 1.0 - b.certified_upper)))


# -- lower-bound parameters --------------------------------------------------


def theta_for(n: int, delta: float) -> float:
    theta = 8 * delta**2 / n
    if not 0 <= theta <= 1:
        raise ValueError(f"theta = 8 delta^2 / n = {theta} is outside [0, 1]")
    return theta


def mixture_distance_bound(m: int, theta: float) -> float:
    """Probability that at least two of m draws come from the theta branch."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    return max(0.0, 1 - (1 - theta) ** m - m * theta * (1 - theta) ** (m - 1))


def lifted_distance_bound(n: int, m: int, theta: float) -> float:
    return sqrt(n) * m * theta


def hard_pair_overlap(theta: float, d: int, r: int) -> float:
    """Overlap_r of phi(theta, d): (1 - theta) + (r - 1) theta / (d - 1), capped at 1."""
    return min(1.0, (1 - theta) + (r - 1) * theta / (d - 1))


# -- named states ------------------------------------------------------------


def _diag_pair(coeffs: np.ndarray, d: int) -> PureState:
    amps = np.zeros((d, d), dtype=complex)
    amps[np.arange(coeffs.size), np.arange(coeffs.size)] = np.sqrt(coeffs)
    return PureState((d, d), amps.ravel())


def _check_theta(theta: float) -> None:
    if not 0 <= theta <= 1:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")


def phi_state(theta: float, d: int) -> PureState:
    _check_theta(theta)
    if d < 2:
        raise ValueError("d must be >= 2")
    return _diag_pair(np.array([1 - theta] + [theta / (d - 1)] * (d - 1)), d)


def gamma_state(theta: float, r: int, d: int) -> PureState:
    _check_theta(theta)
    if not 2 <= r <= d:
        raise ValueError(f"need 2 <= r <= d, got r={r}, d={d}")
    return _diag_pair(np.array([1 - theta] + [theta / (r - 1)] * (r - 1)), d)


def _check_hard_pair(d: int, r: int) -> None:
    if d - 1 < 2 * (r - 1):
        raise ValueError(f"hard pair needs d - 1 >= 2 (r - 1), got d={d}, r={r}")


def bunny_state(n: int) -> PureState:
    if n < 3:
        raise ValueError("bunny state needs n >= 3")
    amps = np.zeros((2,) * n, dtype=complex)
    for i in range(n - 1):
        idx = [0] * n
        idx[i] = idx[i + 1] = 1
        amps[tuple(idx)] = 1.0
    return PureState.from_vector((2,) * n, amps.ravel())


def ghz_state(n: int, d: int = 2) -> PureState:
    amps = np.zeros((d,) * n, dtype=complex)
    amps[(0,) * n] = amps[(1,) * n] = 1.0
    return PureState.from_vector((d,) * n, amps.ravel())


def max_entangled(d: int) -> PureState:
    return _diag_pair(np.full(d, 1.0 / d), d)


def schmidt_pair(omega: float, d: int = 2) -> PureState:
    """sqrt(omega)|00> + sqrt(1 - omega)|11>."""
    if not 0 <= omega <= 1:
        raise ValueError("omega must lie in [0, 1]")
    return _diag_pair(np.array([omega, 1 - omega]), d)


def product_state(dims, rng: np.random.Generator | None = None) -> PureState:
    dims = check_dims(dims)
    vec = np.ones(1, dtype=complex)
    for d in dims:
        if rng is None:
            f = np.zeros(d, dtype=complex)
            f[0] = 1.0
        else:
            f = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            f /= np.linalg.norm(f)
        vec = np.kron(vec, f)
    return PureState(dims, vec)


def _pairs(n: int) -> int:
    if n < 2 or n % 2:
        raise ValueError(f"n must be even and >= 2, got {n}")
    return n // 2


def state_zoo(name: str, **params) -> PureState:
    """Named states: bunny, phi, gamma, Phi_n, Gamma_n, ghz, max_entangled, schmidt_pair, product.

    Phi_n and Gamma_n accept either ``theta`` or ``delta`` (theta = 8 delta^2 / n)
    and enforce d - 1 >= 2 (r - 1).
    """
    if name == "bunny":
        return bunny_state(params["n"])
    if name == "phi":
        return phi_state(params["theta"], params["d"])
    if name == "gamma":
        return gamma_state(params["theta"], params["r"], params["d"])
    if name in ("Phi_n", "Gamma_n"):
        n, d, r = params["n"], params["d"], params["r"]
        pairs = _pairs(n)
        _check_hard_pair(d, r)
        theta = params["theta"] if "theta" in params else theta_for(n, params["delta"])
        base = phi_state(theta, d) if name == "Phi_n" else gamma_state(theta, r, d)
        return tensor_power(base, pairs)
    if name == "ghz":
        return ghz_state(params["n"], params.get("d", 2))
    if name == "max_entangled":
        return max_entangled(params["d"])
    if name == "schmidt_pair":
        return schmidt_pair(params["omega"], params.get("d", 2))
    if name == "product":
        return product_state(params["dims"], params.get("rng"))
    raise ValueError(f"unknown state {name!r}")
