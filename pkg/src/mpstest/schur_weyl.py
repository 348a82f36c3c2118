"""Operators on the m-copy space (C^{d_1} x ... x C^{d_n})^{x m}.

Layout is copy-major, qudit-minor: tensor axis ``c * n + q`` is qudit ``q`` of
copy ``c``.  A permutation acting on a subset of registers (for instance the
prefix ``0..i-1`` of every copy) is then an axis transpose.

Projectors are assembled from integer character sums and scaled once at the end.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial, prod
from typing import Callable, Iterable, Sequence

import numpy as np

from .states import DimensionGuardError, PureState, check_dims, guard
from .symfunc import (
    all_permutations,
    as_partition,
    character,
    compose,
    count_cycles,
    cycle_lengths,
    inverse,
    irrep_dimension,
    partitions_of,
)

# Largest side of a materialized copy-space operator.
DENSE_GUARD = 2**12
# Largest copy-space vector handled matrix-free.
VECTOR_GUARD = 2**22


@dataclass(frozen=True)
class CutSpec:
    """Registers 0..cut_index-1 of each copy participate."""

    cut_index: int

    def registers(self, n: int) -> tuple[int, ...]:
        if not 1 <= self.cut_index <= n:
            raise ValueError(f"cut index must lie in 1..{n}, got {self.cut_index}")
        return tuple(range(self.cut_index))


def _registers(cut, n: int) -> tuple[int, ...]:
    """Normalize ``cut`` (None, int, CutSpec or explicit register list) to a register tuple."""
    if cut is None:
        return tuple(range(n))
    if isinstance(cut, CutSpec):
        return cut.registers(n)
    if isinstance(cut, (int, np.integer)):
        return CutSpec(int(cut)).registers(n)
    regs = tuple(sorted(set(int(q) for q in cut)))
    if not regs or regs[0] < 0 or regs[-1] >= n:
        raise ValueError(f"invalid register set {cut} for {n} qudits")
    return regs


@dataclass(frozen=True)
class CopyOperator:
    """Linear operator on m copies of a base space, dense or matrix-free."""

    base_dims: tuple[int, ...]
    m: int
    matrix: np.ndarray | None = None
    applicator: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        object.__setattr__(self, "base_dims", check_dims(self.base_dims))
        if self.matrix is None and self.applicator is None:
            raise ValueError("need a matrix or an applicator")
        if self.matrix is not None:
            mat = np.asarray(self.matrix, dtype=complex)
            if mat.shape != (self.dim, self.dim):
                raise ValueError(f"matrix shape {mat.shape}, expected side {self.dim}")
            mat.setflags(write=False)
            object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return prod(self.base_dims) ** self.m

    def apply(self, vec: np.ndarray) -> np.ndarray:
        if self.applicator is not None:
            return self.applicator(np.asarray(vec, dtype=complex))
        return self.matrix @ vec

    def dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        guard(self.dim, DENSE_GUARD, "copy operator")
        return self.applicator(np.eye(self.dim, dtype=complex))

    def __matmul__(self, other: "CopyOperator") -> "CopyOperator":
        _same_space(self, other)
        return CopyOperator(self.base_dims, self.m, self.dense() @ other.dense())

    def is_projector(self, atol: float = 1e-10) -> bool:
        p = self.dense()
        return bool(np.allclose(p, p.conj().T, atol=atol) and np.allclose(p @ p, p, atol=atol))


def _same_space(a: CopyOperator, b: CopyOperator) -> None:
    if a.base_dims != b.base_dims or a.m != b.m:
        raise ValueError("operators act on different copy spaces")


def _perm_axes(pi: Sequence[int], n: int, registers: Sequence[int]) -> list[int]:
    pinv = inverse(pi)
    regs = set(registers)
    return [(pinv[c] if q in regs else c) * n + q for c in range(len(pi)) for q in range(n)]


def permute_vector(
    vec: np.ndarray, pi: Sequence[int], dims: Sequence[int], registers: Sequence[int] | None = None
) -> np.ndarray:
    """P(pi) vec: output copy slot j receives input copy pi^{-1}(j) on the given registers.

    ``vec`` may carry trailing batch axes (columns of a matrix).
    """
    dims = tuple(dims)
    n, m = len(dims), len(pi)
    registers = tuple(range(n)) if registers is None else registers
    batch = vec.shape[1:]
    t = vec.reshape(dims * m + batch)
    axes = _perm_axes(pi, n, registers) + list(range(n * m, n * m + len(batch)))
    return np.transpose(t, axes).reshape(vec.shape)


@lru_cache(maxsize=256)
def perm_index(pi: tuple[int, ...], dims: tuple[int, ...], registers: tuple[int, ...]) -> np.ndarray:
    """Gather table ``idx`` with (P(pi) x)[b] = x[idx[b]]."""
    total = prod(dims) ** len(pi)
    idx = permute_vector(np.arange(total), pi, dims, registers)
    idx.setflags(write=False)
    return idx


def copy_vector(psi: PureState, m: int) -> np.ndarray:
    """Amplitudes of psi^{x m} in copy-major layout."""
    guard(psi.dim**m, VECTOR_GUARD, "copy vector")
    out = psi.amplitudes
    for _ in range(m - 1):
        out = np.kron(out, psi.amplitudes)
    return out


def perm_operator(pi: Sequence[int], dims: Sequence[int], cut=None) -> CopyOperator:
    """P(pi) on whole copies, or only on the registers selected by ``cut``."""
    dims = check_dims(dims)
    pi = tuple(int(k) for k in pi)
    if sorted(pi) != list(range(len(pi))):
        raise ValueError(f"{pi} is not a permutation")
    m = len(pi)
    regs = _registers(cut, len(dims))
    guard(prod(dims) ** m, VECTOR_GUARD, "copy space")
    return CopyOperator(dims, m, applicator=lambda v: permute_vector(v, pi, dims, regs))


def perm_matrix(pi: Sequence[int], dims: Sequence[int], cut=None) -> np.ndarray:
    dims = check_dims(dims)
    pi = tuple(pi)
    regs = _registers(cut, len(dims))
    total = prod(dims) ** len(pi)
    guard(total, DENSE_GUARD, "copy operator")
    mat = np.zeros((total, total))
    mat[np.arange(total), perm_index(pi, dims, regs)] = 1.0
    return mat


def _class_sum(coeff: Callable[[tuple[int, ...]], int], dims, m: int, regs) -> np.ndarray:
    """Dense sum_pi coeff(pi) P(pi), accumulated in integers."""
    total = prod(dims) ** m
    guard(total, DENSE_GUARD, "copy operator")
    acc = np.zeros((total, total), dtype=np.int64)
    rows = np.arange(total)
    for pi in all_permutations(m):
        c = coeff(pi)
        if c:
            acc[rows, perm_index(pi, dims, regs)] += c
    return acc


def _class_sum_apply(coeff, dims, m: int, regs, vec: np.ndarray, scale: float) -> np.ndarray:
    out = np.zeros_like(vec, dtype=complex)
    for pi in all_permutations(m):
        c = coeff(pi)
        if c:
            out += c * permute_vector(vec, pi, dims, regs)
    return out * scale


def _wss_coeff(mu):
    mu = as_partition(mu)
    return lambda pi: character(mu, cycle_lengths(pi))


def _rank_coeff(r: int, m: int):
    mus = [mu for mu in partitions_of(m) if mu.length <= r]
    return lambda pi: sum(irrep_dimension(mu) * character(mu, cycle_lengths(pi)) for mu in mus)


def wss_projector(mu, dims: Sequence[int], m: int, cut=None) -> CopyOperator:
    """Pi_mu = dim(mu) E_pi[chi_mu(pi) P(pi)] on the registers selected by ``cut``."""
    mu = as_partition(mu)
    if mu.m != m:
        raise ValueError(f"partition {mu} is not a partition of m={m}")
    dims = check_dims(dims)
    regs = _registers(cut, len(dims))
    acc = _class_sum(_wss_coeff(mu), dims, m, regs)
    return CopyOperator(dims, m, acc * (irrep_dimension(mu) / factorial(m)))


def rank_projector(r: int, dims: Sequence[int], m: int, cut=None) -> CopyOperator:
    """Pi_{<=r}: sum of Pi_mu over partitions of length at most r."""
    if r < 1:
        raise ValueError("r must be >= 1")
    dims = check_dims(dims)
    regs = _registers(cut, len(dims))
    acc = _class_sum(_rank_coeff(r, m), dims, m, regs)
    return CopyOperator(dims, m, acc / factorial(m))


def apply_rank_projector(vec: np.ndarray, r: int, dims: Sequence[int], m: int, cut=None) -> np.ndarray:
    """Matrix-free Pi_{<=r} vec."""
    dims = check_dims(dims)
    regs = _registers(cut, len(dims))
    return _class_sum_apply(_rank_coeff(r, m), dims, m, regs, vec, 1.0 / factorial(m))


def apply_wss_projector(vec: np.ndarray, mu, dims: Sequence[int], m: int, cut=None) -> np.ndarray:
    mu = as_partition(mu)
    dims = check_dims(dims)
    regs = _registers(cut, len(dims))
    return _class_sum_apply(_wss_coeff(mu), dims, m, regs, vec, irrep_dimension(mu) / factorial(m))


def _mps_cuts(n: int, include_full_cut: bool) -> list[int]:
    return list(range(1, n + 1 if include_full_cut else n))


def mps_projector(r: int, dims: Sequence[int], m: int, include_full_cut: bool = False) -> CopyOperator:
    """Product of cut-restricted rank projectors over the prefix cuts 1..n-1.

    With ``include_full_cut`` the rank projector on whole copies is included as
    well; on symmetric inputs such as psi^{x m} it acts trivially.
    """
    dims = check_dims(dims)
    total = prod(dims) ** m
    guard(total, DENSE_GUARD, "copy operator")
    out = np.eye(total, dtype=complex)
    for i in _mps_cuts(len(dims), include_full_cut):
        out = out @ rank_projector(r, dims, m, cut=i).matrix
    return CopyOperator(dims, m, out)


def apply_mps_projector(
    vec: np.ndarray, r: int, dims: Sequence[int], m: int, cuts: Iterable[int] | None = None
) -> np.ndarray:
    dims = check_dims(dims)
    cuts = _mps_cuts(len(dims), False) if cuts is None else cuts
    for i in cuts:
        vec = apply_rank_projector(vec, r, dims, m, cut=i)
    return vec


def _commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a @ b - b @ a))


def check_commutation(dims: Sequence[int], m: int, r: int | None = None) -> float:
    """Largest Frobenius norm of [Pi_{lam, 1..i}, Pi_{mu, 1..j}] over nested prefix cuts.

    Cuts run over 1..n (n is the whole copy).  When ``r`` is given the
    rank projectors Pi_{<=r} of every cut are included in the family.
    Frobenius norm bounds the operator norm from above.
    """
    dims = check_dims(dims)
    n = len(dims)
    family: dict[int, list[np.ndarray]] = {}
    for i in range(1, n + 1):
        local = prod(dims[:i])
        ops = [wss_projector(mu, dims, m, cut=i).matrix for mu in partitions_of(m, local)]
        if r is not None:
            ops.append(rank_projector(r, dims, m, cut=i).matrix)
        family[i] = ops
    worst = 0.0
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            for a in family[i]:
                for b in family[j]:
                    worst = max(worst, _commutator_norm(a, b))
    return worst


# -- twirls ------------------------------------------------------------------


def _side_layout(dims: tuple[int, ...], m: int, side: Sequence[int]):
    n = len(dims)
    side = sorted(set(int(q) for q in side))
    if not side or side[0] < 0 or side[-1] >= n:
        raise ValueError(f"invalid side {side} for {n} registers")
    rest = [q for q in range(n) if q not in side]
    order = [c * n + q for c in range(m) for q in side] + [c * n + q for c in range(m) for q in rest]
    ds = prod(dims[q] for q in side)
    dr = prod(dims[q] for q in rest)
    return order, ds, dr


def _to_side_major(x: np.ndarray, dims, m, order, ds, dr) -> np.ndarray:
    k = len(order)
    t = x.reshape(tuple(dims) * m * 2)
    t = np.transpose(t, order + [k + o for o in order])
    return t.reshape(ds**m, dr**m, ds**m, dr**m)


def _from_side_major(t: np.ndarray, dims, m, order) -> np.ndarray:
    k = len(order)
    shape = [dims[o % len(dims)] for o in order]
    t = t.reshape(shape * 2)
    back = list(np.argsort(order))
    t = np.transpose(t, back + [k + b for b in back])
    total = prod(dims) ** m
    return t.reshape(total, total)


def _as_copy_operator(x, base_dims=None, m=None) -> CopyOperator:
    if isinstance(x, CopyOperator):
        return x
    return CopyOperator(tuple(base_dims), int(m), np.asarray(x, dtype=complex))


def gram_matrix(d: int, m: int) -> np.ndarray:
    """G[pi, sigma] = Tr[P(pi)^dag P(sigma)] = d^{#cycles(pi^-1 sigma)}."""
    perms = all_permutations(m)
    return np.array(
        [[float(d) ** count_cycles(compose(inverse(p), s)) for s in perms] for p in perms]
    )


def haar_twirl(x, side: Sequence[int], base_dims=None, m=None) -> CopyOperator:
    """E_U[U_side^{x m} X U_side^{dag x m}] computed exactly.

    The twirl is the Hilbert-Schmidt projection onto the commutant
    span{P_side(pi)} x (anything on the other registers).  Writing the result as
    sum_sigma P(sigma) x Y_sigma, the blocks solve G Y = T with
    T_pi = Tr_side[P(pi)^dag X].
    """
    x = _as_copy_operator(x, base_dims, m)
    dims, m = x.base_dims, x.m
    guard(x.dim, DENSE_GUARD, "copy operator")
    order, ds, dr = _side_layout(dims, m, side)
    xs = _to_side_major(x.dense(), dims, m, order, ds, dr)
    perms = all_permutations(m)
    t = np.stack(
        [np.einsum("arab->rb", xs[:, :, perm_index(pi, (ds,), (0,)), :]) for pi in perms]
    )
    g = gram_matrix(ds, m)
    rhs = t.reshape(len(perms), -1)
    if ds >= m:
        coeffs = np.linalg.solve(g, rhs)
    else:
        coeffs = np.linalg.lstsq(g, rhs, rcond=None)[0]
        resid = np.max(np.abs(g @ coeffs - rhs), initial=0.0)
        if resid > 1e-8:
            raise ArithmeticError(f"twirl Gram system inconsistent (residual {resid:.2e})")
    coeffs = coeffs.reshape(len(perms), dr**m, dr**m)
    out = np.zeros((ds**m, dr**m, ds**m, dr**m), dtype=complex)
    for pi, y in zip(perms, coeffs):
        p = perm_matrix(pi, (ds,))
        out += np.einsum("ac,rb->arcb", p, y)
    return CopyOperator(dims, m, _from_side_major(out, dims, m, order))


def local_unitary_power(u: np.ndarray, base_dims: Sequence[int], m: int, side: Sequence[int]) -> np.ndarray:
    """Dense (U on the side registers of every copy) x identity elsewhere."""
    dims = check_dims(base_dims)
    order, ds, dr = _side_layout(dims, 1, side)
    one = np.kron(u, np.eye(dr))
    shape = [dims[o] for o in order]
    t = one.reshape(shape * 2)
    back = list(np.argsort(order))
    k = len(order)
    one = np.transpose(t, back + [k + b for b in back]).reshape(prod(dims), prod(dims))
    out = one
    for _ in range(m - 1):
        out = np.kron(out, one)
    return out


def symmetric_average(base_dims: Sequence[int], m: int, registers: Sequence[int]) -> np.ndarray:
    """Z = E_pi[P_regs(pi)], the average of simultaneous copy permutations on ``registers``."""
    dims = check_dims(base_dims)
    regs = _registers(registers, len(dims))
    acc = _class_sum(lambda pi: 1, dims, m, regs)
    return acc / factorial(m)


def perm_average_two_sided(x, side_a: Sequence[int], side_b: Sequence[int], mode: str = "conjugate",
                           base_dims=None, m=None) -> CopyOperator:
    """Average over pi of simultaneous permutations P_A(pi) x P_B(pi) applied to X.

    ``mode`` selects E[P X P^dag] ("conjugate"), E[P] X ("left") or X E[P] ("right").
    """
    x = _as_copy_operator(x, base_dims, m)
    dims, m = x.base_dims, x.m
    regs = sorted(set(side_a) | set(side_b))
    if set(side_a) & set(side_b):
        raise ValueError("side_a and side_b must be disjoint")
    mat = x.dense()
    if mode == "left":
        return CopyOperator(dims, m, symmetric_average(dims, m, regs) @ mat)
    if mode == "right":
        return CopyOperator(dims, m, mat @ symmetric_average(dims, m, regs))
    if mode != "conjugate":
        raise ValueError(f"unknown mode {mode!r}")
    out = np.zeros_like(mat)
    for pi in all_permutations(m):
        idx = perm_index(pi, dims, tuple(regs))
        out += mat[np.ix_(idx, idx)]
    return CopyOperator(dims, m, out / factorial(m))
