"""Named reproduction experiments.

Each experiment takes an ``ExperimentConfig`` and returns an ``ExperimentResult``
whose verdicts can be recomputed from the stored numbers alone.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from math import sqrt
from typing import Any, Callable

import numpy as np

from .geometry import (
    hard_pair_overlap,
    lifted_distance_bound,
    mixture_distance_bound,
    overlap_mps_dmrg,
    overlap_product_als,
    state_zoo,
    theta_for,
)
from .schur_weyl import haar_twirl, perm_average_two_sided
from .states import (
    MixedState,
    PureState,
    basis_state,
    partial_trace,
    random_state,
    reduced_spectrum,
    state_from_spectrum,
    tensor_product,
    trace_distance,
)
from .symfunc import partitions_of
from .testers import (
    copies_needed,
    hm_bound,
    mps_test_accept_prob,
    product_test_bound,
    product_test_prob,
    rank_test_accept_prob,
    sample_wss,
    wss_distribution,
)

RELATIONS = ("le", "ge", "eq")


@dataclass(frozen=True)
class Verdict:
    check: str
    value: float
    bound: float
    relation: str
    tol: float
    record: int | None = None

    @property
    def margin(self) -> float:
        if self.relation == "le":
            return self.bound - self.value
        if self.relation == "ge":
            return self.value - self.bound
        return -abs(self.value - self.bound)

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d["margin"] = self.margin
        d["passed"] = self.passed
        return d


def recheck(verdict: dict) -> bool:
    """Recompute a serialized verdict from its stored numbers."""
    v = Verdict(verdict["check"], verdict["value"], verdict["bound"], verdict["relation"],
                verdict["tol"], verdict.get("record"))
    return v.passed


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    format: str = "json"
    workers: int = 1

    def get(self, key: str, default=None):
        value = self.params.get(key)
        return default if value is None else value


@dataclass
class ExperimentResult:
    config: dict
    records: list[dict]
    verdicts: list[Verdict]
    runtime_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def failures(self) -> list[Verdict]:
        return [v for v in self.verdicts if not v.passed]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "records": self.records,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "runtime_ms": self.runtime_ms,
        }


def child_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def _map(fn: Callable, items: list, workers: int) -> list:
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _as_list(value, cast=float) -> list:
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return [cast(v) for v in value]
    return [cast(value)]


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


# -- bounds curve ------------------------------------------------------------


def run_bounds_curve(cfg: ExperimentConfig) -> tuple[list, list]:
    grid = _as_list(cfg.get("grid")) or list(np.linspace(0.0, 1.0, 101))
    _require(all(0.0 <= w <= 1.0 for w in grid), "omega grid must lie in [0, 1]")
    records, verdicts = [], []
    for i, w in enumerate(grid):
        rec = {
            "omega": float(w),
            "simple": product_test_bound(w, "simple"),
            "sharp": product_test_bound(w, "sharp"),
            "hm": hm_bound(w),
            "tight": w * w - w + 1,
        }
        records.append(rec)
        verdicts.append(Verdict("sharp<=simple", rec["sharp"], rec["simple"], "le", 1e-12, i))
        if w < 1:
            verdicts.append(Verdict("sharp<=hm", rec["sharp"], rec["hm"], "le", 1e-12, i))
    return records, verdicts


# -- product demo ------------------------------------------------------------


def run_product_demo(cfg: ExperimentConfig) -> tuple[list, list]:
    grid = _as_list(cfg.get("grid")) or [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    pad = int(cfg.get("pad", 0))
    _require(all(0.0 <= w <= 1.0 for w in grid), "omega grid must lie in [0, 1]")
    _require(pad >= 0, "pad must be nonnegative")
    records, verdicts = [], []
    for i, w in enumerate(grid):
        psi = state_zoo("schmidt_pair", omega=w)
        for _ in range(pad):
            psi = tensor_product(psi, basis_state((2,), (0,)))
        pt = product_test_prob(psi)
        formula = w * w - w + 1
        records.append({"omega": float(w), "n": psi.n, "pt": pt, "formula": formula,
                        "sharp": product_test_bound(max(w, 1 - w), "sharp")})
        verdicts.append(Verdict("pt==omega^2-omega+1", pt, formula, "eq", 1e-10, i))
    return records, verdicts


# -- bunny -------------------------------------------------------------------


def bunny_cut_formula(n: int, i: int) -> np.ndarray:
    return np.sort(np.array([i - 1, 1, n - i - 1], dtype=float) / (n - 1))[::-1]


def _bunny_point(args) -> tuple[dict, list]:
    n, r, m, seed = args
    psi = state_zoo("bunny", n=n)
    err = 0.0
    spectra = {}
    for i in range(1, n):
        lam = reduced_spectrum(psi, i)
        spectra[str(i)] = [float(x) for x in lam[lam > 1e-12]]
        if 2 <= i <= n - 2:
            expect = bunny_cut_formula(n, i)
            err = max(err, float(np.max(np.abs(lam[:3] - expect))), float(np.sum(lam[3:])))
    rep = mps_test_accept_prob(psi, r, m)
    full = mps_test_accept_prob(psi, r + 1, m, with_cuts=False).accept_probability
    # cut projectors commute, so rejections obey a union bound
    floor = 1.0 - sum(1.0 - p for p in rep.per_cut_probabilities)
    br = overlap_mps_dmrg(psi, r, rng=seed)
    rec = {
        "n": n, "r": r, "m": m,
        "cut_spectra": spectra,
        "spectrum_error": err,
        "accept": rep.accept_probability,
        "per_cut": list(rep.per_cut_probabilities),
        "accept_union_floor": floor,
        "accept_r_plus_1": full,
        "overlap_lower": br.lower,
        "overlap_upper": br.upper,
        "overlap_certified_upper": br.certified_upper,
    }
    checks = [
        ("cut spectra formula", err, 0.0, "eq", 1e-10),
        ("accept<=5/6", rep.accept_probability, 5 / 6, "le", 1e-9),
        ("accept>=union floor", rep.accept_probability, floor, "ge", 1e-12),
        ("accept(r+1)==1", full, 1.0, "eq", 1e-9),
        ("overlap_upper<=2/3", br.upper, 2 / 3, "le", 1e-6),
    ]
    return rec, checks


def run_bunny(cfg: ExperimentConfig) -> tuple[list, list]:
    ns = _as_list(cfg.get("n"), int) or [4, 5, 6]
    r = int(cfg.get("r", 2))
    m = int(cfg.get("m", 3))
    _require(all(4 <= n <= 6 for n in ns), "bunny n must lie in 4..6")
    _require(1 <= m <= 4 and r >= 1, "need r >= 1 and m in 1..4")
    items = [(n, r, m, int(child_rng(cfg.seed, i).integers(2**31))) for i, n in enumerate(ns)]
    return _collect(_map(_bunny_point, items, cfg.workers))


def _collect(points) -> tuple[list, list]:
    records, verdicts = [], []
    for i, (rec, checks) in enumerate(points):
        records.append(rec)
        verdicts.extend(Verdict(c, float(v), float(b), rel, tol, i) for c, v, b, rel, tol in checks)
    return records, verdicts


# -- rank demo ---------------------------------------------------------------

DEFAULT_RANK_CONFIGS = [
    ((1.0,), 1, 2),
    ((0.5, 0.5), 1, 2),
    ((0.5, 0.5), 1, 3),
    ((0.7, 0.3), 1, 3),
    ((0.6, 0.3, 0.1), 2, 3),
    ((0.4, 0.3, 0.2, 0.1), 2, 4),
]


def _rank_point(args) -> tuple[dict, list]:
    spectrum, r, m, samples, seed = args
    rng = np.random.default_rng(seed)
    rho = state_from_spectrum(spectrum, rng)
    exact = rank_test_accept_prob(rho, r, m, method="projector")
    oracle = rank_test_accept_prob(rho, r, m, method="oracle")
    dist = wss_distribution(rho, m)
    draws = sample_wss(rho, m, rng, size=samples)
    counts = {str(mu): 0 for mu in dist}
    for mu in draws:
        counts[str(mu)] += 1
    empirical = sum(c for mu, c in zip(dist, counts.values()) if mu.length <= r) / samples
    sigma = sqrt(max(exact * (1 - exact), 0.0) / samples)
    rec = {
        "spectrum": list(spectrum), "r": r, "m": m, "samples": samples,
        "exact": exact, "oracle": oracle, "empirical": empirical, "sigma": sigma,
        "distribution": {str(mu): p for mu, p in dist.items()},
        "counts": counts,
    }
    checks = [
        ("exact==oracle", exact, oracle, "eq", 1e-8),
        ("|empirical-exact|<=3sigma", abs(empirical - exact), 3 * sigma, "le", 1e-12),
    ]
    for mu, p in dist.items():
        s = sqrt(max(p * (1 - p), 0.0) / samples)
        f = counts[str(mu)] / samples
        checks.append((f"|freq-p| {mu}<=3sigma", abs(f - p), 3 * s, "le", 1e-12))
    return rec, checks


def _parse_spectrum(value) -> tuple[float, ...]:
    if isinstance(value, str):
        value = [float(x) for x in value.split(",") if x.strip()]
    lam = tuple(float(x) for x in value)
    _require(lam and all(x >= 0 for x in lam) and abs(sum(lam) - 1) < 1e-9,
             "spectrum must be nonnegative and sum to 1")
    return lam


def run_rank_demo(cfg: ExperimentConfig) -> tuple[list, list]:
    samples = int(cfg.get("samples", 10_000))
    if cfg.get("spectrum") is not None:
        configs = [(_parse_spectrum(cfg.get("spectrum")), int(cfg.get("r", 1)), int(cfg.get("m", 2)))]
    else:
        configs = DEFAULT_RANK_CONFIGS
    for lam, r, m in configs:
        _require(1 <= m <= 4 and r >= 1, "rank demo needs r >= 1 and m in 1..4")
        _require(len(lam) <= 4, "rank demo supports at most 4 eigenvalues")
    items = [(lam, r, m, samples, int(child_rng(cfg.seed, i).integers(2**63 - 1)))
             for i, (lam, r, m) in enumerate(configs)]
    return _collect(_map(_rank_point, items, cfg.workers))


# -- lower bound -------------------------------------------------------------


def twirled_power(tau: np.ndarray, m: int) -> np.ndarray:
    """E_U[(U tau U^dag)^{x m}] computed exactly."""
    d = tau.shape[0]
    x = tau
    for _ in range(m - 1):
        x = np.kron(x, tau)
    return haar_twirl(x, [0], base_dims=(d,), m=m).dense()


def _lower_point(args) -> tuple[dict, list]:
    n, d, r, m, theta = args
    tau_far = partial_trace(state_zoo("phi", theta=theta, d=d), [0]).matrix
    tau_mps = partial_trace(state_zoo("gamma", theta=theta, r=r, d=d), [0]).matrix
    dist = trace_distance(twirled_power(tau_far, m), twirled_power(tau_mps, m))
    mix = mixture_distance_bound(m, theta)
    relax = m * (m - 1) * theta**2
    # fidelity multiplicativity and Fuchs-van de Graaf lift the pair distance to n sites
    chain = sqrt(max(0.0, 1 - (1 - dist) ** n))
    lifted = lifted_distance_bound(n, m, theta)
    rec = {"n": n, "d": d, "r": r, "m": m, "theta": theta, "distance": dist,
           "mixture_bound": mix, "relaxed_bound": relax, "lifted_chain": chain, "lifted_bound": lifted}
    checks = [
        ("distance<=mixture", dist, mix, "le", 1e-10),
        ("mixture<=m(m-1)theta^2", mix, relax, "le", 1e-10),
        ("chain<=sqrt(n)m theta", chain, lifted, "le", 1e-10),
    ]
    return rec, checks


def _phi_distance_point(args) -> tuple[dict, list]:
    n, d, r, theta, seed = args
    delta = sqrt(theta * n / 8)
    psi = state_zoo("Phi_n", n=n, d=d, r=r, theta=theta)
    analytic = hard_pair_overlap(theta, d, r) ** (n // 2)
    br = overlap_mps_dmrg(psi, r, rng=seed, analytic=analytic)
    rec = {"n": n, "d": d, "r": r, "theta": theta, "delta": delta, "overlap_analytic": analytic,
           "overlap_variational": br.lower, "dist_analytic": sqrt(1 - analytic)}
    checks = [
        ("variational==analytic overlap", br.lower, analytic, "eq", 1e-6),
        ("Dist_r(Phi_n)>=delta", sqrt(1 - analytic), delta, "ge", 1e-12),
        ("overlap<=1-delta^2", analytic, 1 - delta**2, "le", 1e-12),
    ]
    return rec, checks


def run_lower_bound(cfg: ExperimentConfig) -> tuple[list, list]:
    n = int(cfg.get("n", 4))
    d = int(cfg.get("d", 3))
    r = int(cfg.get("r", 2))
    ms = _as_list(cfg.get("m"), int) or [1, 2, 3]
    deltas = _as_list(cfg.get("delta"))
    thetas = [theta_for(n, dl) for dl in deltas] if deltas else (_as_list(cfg.get("theta")) or [0.05, 0.1, 0.2])
    _require(n >= 4 and n % 2 == 0, "n must be even and >= 4")
    _require(d - 1 >= 2 * (r - 1) and r >= 2, "need r >= 2 and d - 1 >= 2 (r - 1)")
    _require(all(1 <= m <= 3 for m in ms), "m must lie in 1..3")
    _require(all(0 <= t <= 1 for t in thetas), "theta must lie in [0, 1]")
    _require(all(t * n / 8 <= 0.5 + 1e-12 for t in thetas), "delta must be at most 1/sqrt(2)")
    items = [(n, d, r, m, t) for m in ms for t in thetas]
    records, verdicts = _collect(_map(_lower_point, items, cfg.workers))
    dist_items = [(n, d, r, t, int(child_rng(cfg.seed, i).integers(2**31))) for i, t in enumerate(thetas)]
    r2, v2 = _collect(_map(_phi_distance_point, dist_items, cfg.workers))
    offset = len(records)
    records += r2
    verdicts += [Verdict(v.check, v.value, v.bound, v.relation, v.tol, v.record + offset) for v in v2]
    lower = copies_needed("lower", sqrt(thetas[0] * n / 8), n=n) if thetas[0] > 0 else None
    records.append({"copies_needed_lower": lower, "n": n, "delta": sqrt(thetas[0] * n / 8)})
    return records, verdicts


# -- reduction to one subsystem ----------------------------------------------


def double_twirl(psi: PureState, m: int) -> np.ndarray:
    """M_psi = E_{U,V}[((U x V) psi psi^dag (U x V)^dag)^{x m}] for a bipartite psi."""
    rho = psi.density().matrix
    x = rho
    for _ in range(m - 1):
        x = np.kron(x, rho)
    x = haar_twirl(x, [1], base_dims=psi.dims, m=m)
    return haar_twirl(x, [0]).dense()


def invariance_residuals(mat: np.ndarray, dims: tuple[int, int], m: int) -> dict[str, float]:
    def res(y):
        return float(np.max(np.abs(y - mat)))

    return {
        "twirl_A": res(haar_twirl(mat, [0], base_dims=dims, m=m).dense()),
        "twirl_B": res(haar_twirl(mat, [1], base_dims=dims, m=m).dense()),
        "perm_left": res(perm_average_two_sided(mat, [0], [1], "left", base_dims=dims, m=m).dense()),
        "perm_right": res(perm_average_two_sided(mat, [0], [1], "right", base_dims=dims, m=m).dense()),
        "perm_conjugate": res(perm_average_two_sided(mat, [0], [1], "conjugate", base_dims=dims, m=m).dense()),
    }


def a_registers(mat: np.ndarray, dims: tuple[int, int], m: int) -> np.ndarray:
    full = MixedState(tuple(dims) * m, (mat + mat.conj().T) / 2)
    return partial_trace(full, [2 * c for c in range(m)]).matrix


def _reduction_point(args) -> tuple[dict, list]:
    d, m, theta, r, kind, seed = args
    if kind == "hard_pair":
        phi = state_zoo("phi", theta=theta, d=d)
        gam = state_zoo("gamma", theta=theta, r=min(r, d), d=d)
    else:
        rng = np.random.default_rng(seed)
        phi, gam = random_state((d, d), rng), random_state((d, d), rng)
    dims = (d, d)
    m_phi, m_gam = double_twirl(phi, m), double_twirl(gam, m)
    full = trace_distance(m_phi, m_gam)
    restricted = trace_distance(a_registers(m_phi, dims, m), a_registers(m_gam, dims, m))
    res_phi = invariance_residuals(m_phi, dims, m)
    res_gam = invariance_residuals(m_gam, dims, m)
    rec = {"d": d, "m": m, "pair": kind, "theta": theta, "distance_full": full,
           "distance_A": restricted, "residuals_phi": res_phi, "residuals_gamma": res_gam}
    checks = [("D_full==D_A", full, restricted, "eq", 1e-8)]
    for label, res in (("phi", res_phi), ("gamma", res_gam)):
        for key, value in res.items():
            checks.append((f"invariance {key} ({label})", value, 0.0, "le", 1e-8))
    return rec, checks


def run_reduction_check(cfg: ExperimentConfig) -> tuple[list, list]:
    ds = _as_list(cfg.get("d"), int) or [2, 3]
    m = int(cfg.get("m", 2))
    theta = float(_as_list(cfg.get("theta"))[0]) if cfg.get("theta") is not None else 0.3
    r = int(cfg.get("r", 2))
    _require(all(2 <= d <= 3 for d in ds), "d must lie in 2..3")
    _require(m == 2, "reduction check runs at m = 2")
    items = []
    for i, d in enumerate(ds):
        seed = int(child_rng(cfg.seed, i).integers(2**31))
        items.append((d, m, theta, r, "hard_pair", seed))
        items.append((d, m, theta, r, "random", seed))
    return _collect(_map(_reduction_point, items, cfg.workers))


# -- omega exploration -------------------------------------------------------


def run_omega_exploration(cfg: ExperimentConfig) -> tuple[list, list]:
    ds = _as_list(cfg.get("d"), int) or list(range(2, 11))
    samples = int(cfg.get("samples", 5))
    _require(all(d >= 2 for d in ds), "d must be >= 2")
    records, verdicts = [], []
    for d in ds:
        psi = state_zoo("max_entangled", d=d)
        pt = product_test_prob(psi)
        formula = 0.5 * (1 + 1 / d)
        records.append({"family": "max_entangled", "d": d, "omega": 1 / d, "pt": pt, "formula": formula})
        idx = len(records) - 1
        verdicts.append(Verdict("pt==(1+1/d)/2", pt, formula, "eq", 1e-10, idx))
        verdicts.append(Verdict("pt>=1/2", pt, 0.5, "ge", 1e-12, idx))
    for i in range(samples):
        rng = child_rng(cfg.seed, i)
        dims = (2, 2, 2) if i % 2 == 0 else (3, 3)
        psi = random_state(dims, rng)
        br = overlap_product_als(psi, rng=rng)
        records.append({"family": "random", "dims": list(dims), "omega_estimate": br.lower,
                        "pt": product_test_prob(psi)})
    return records, verdicts


EXPERIMENTS: dict[str, Callable[[ExperimentConfig], tuple[list, list]]] = {
    "bounds_curve": run_bounds_curve,
    "product_demo": run_product_demo,
    "bunny": run_bunny,
    "rank_demo": run_rank_demo,
    "lower_bound": run_lower_bound,
    "reduction_check": run_reduction_check,
    "omega_exploration": run_omega_exploration,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    if cfg.experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {cfg.experiment!r}; choose from {sorted(EXPERIMENTS)}")
    start = time.perf_counter()
    records, verdicts = EXPERIMENTS[cfg.experiment](cfg)
    runtime = (time.perf_counter() - start) * 1000
    echo = {"experiment": cfg.experiment, "seed": cfg.seed, "format": cfg.format,
            "params": {k: v for k, v in cfg.params.items() if v is not None}}
    return ExperimentResult(echo, records, verdicts, runtime)
