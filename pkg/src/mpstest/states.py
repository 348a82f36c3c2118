"""Dense multi-qudit states and the linear algebra shared by every other module.

Subsystems are indexed from 0.  A cut ``k`` separates qudits ``0..k-1`` from
``k..n-1``, so valid cuts run from 1 to n-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence, Union

import numpy as np

# Largest Hilbert-space dimension we are willing to hold densely.
MAX_DIM = 2**14

ATOL = 1e-10
DECOMP_ATOL = 1e-8
SCHMIDT_CUTOFF = 1e-12


class DimensionGuardError(ValueError):
    """Raised when a dense object would exceed the configured size guard."""


def check_dims(dims: Iterable[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ValueError("dims must be nonempty")
    if any(d < 2 for d in dims):
        raise ValueError(f"every local dimension must be >= 2, got {dims}")
    return dims


def guard(total: int, limit: int = MAX_DIM, what: str = "state") -> None:
    if total > limit:
        raise DimensionGuardError(f"{what} dimension {total} exceeds guard {limit}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    """Unit vector in C^{d_1} x ... x C^{d_n}, stored as a flat amplitude array."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = check_dims(self.dims)
        amps = _frozen(np.ravel(self.amplitudes))
        guard(prod(dims))
        if amps.size != prod(dims):
            raise ValueError(f"{amps.size} amplitudes for dims {dims}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, dims: Sequence[int], vec, normalize: bool = True) -> "PureState":
        vec = np.asarray(vec, dtype=complex).ravel()
        if normalize:
            norm = np.linalg.norm(vec)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            vec = vec / norm
        return cls(tuple(dims), vec)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def density(self) -> "MixedState":
        v = self.amplitudes
        return MixedState(self.dims, np.outer(v, v.conj()))

    def overlap(self, other: "PureState") -> float:
        """Squared inner product |<self|other>|^2."""
        if self.dims != other.dims:
            raise ValueError(f"dimension mismatch {self.dims} vs {other.dims}")
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


@dataclass(frozen=True)
class MixedState:
    """Density matrix with attached subsystem dimensions."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        dims = check_dims(self.dims)
        mat = _frozen(self.matrix)
        total = prod(dims)
        guard(total)
        if mat.shape != (total, total):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {dims}")
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > ATOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > ATOL:
            raise ValueError(f"trace is {np.trace(mat).real!r}, expected 1")
        if np.linalg.eigvalsh(mat)[0] < -ATOL:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> np.ndarray:
        """Eigenvalues in nonincreasing order, negatives from roundoff clipped to 0."""
        w = np.linalg.eigvalsh(self.matrix)[::-1]
        return np.clip(w, 0.0, None)


State = Union[PureState, MixedState]


@dataclass(frozen=True)
class SchmidtDecomposition:
    """psi = sum_i sqrt(coefficients[i]) |left_i>|right_i>.

    ``coefficients`` are the squared Schmidt coefficients, nonincreasing.
    ``left_basis`` and ``right_basis`` hold the vectors as columns.
    """

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def reconstruct(self) -> np.ndarray:
        return (self.left_basis * np.sqrt(self.coefficients)) @ self.right_basis.T


def as_density(x: State | np.ndarray) -> np.ndarray:
    if isinstance(x, PureState):
        v = x.amplitudes
        return np.outer(v, v.conj())
    if isinstance(x, MixedState):
        return x.matrix
    return np.asarray(x, dtype=complex)


def basis_state(dims: Sequence[int], index: Sequence[int]) -> PureState:
    dims = check_dims(dims)
    vec = np.zeros(dims, dtype=complex)
    vec[tuple(index)] = 1.0
    return PureState(dims, vec.ravel())


def tensor_product(a: PureState, b: PureState) -> PureState:
    return PureState(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes))


def tensor_power(psi: PureState, k: int) -> PureState:
    out = psi
    for _ in range(k - 1):
        out = tensor_product(out, psi)
    return out


def mixed_tensor_product(a: MixedState, b: MixedState) -> MixedState:
    return MixedState(a.dims + b.dims, np.kron(a.matrix, b.matrix))


def _check_cut(n: int, cut: int) -> None:
    if not 1 <= cut <= n - 1:
        raise ValueError(f"cut must lie in 1..{n - 1}, got {cut}")


def bipartite_matrix(psi: PureState, cut: int) -> np.ndarray:
    """Amplitudes reshaped to (dim of qudits < cut) x (dim of the rest)."""
    _check_cut(psi.n, cut)
    left = prod(psi.dims[:cut])
    return psi.amplitudes.reshape(left, -1)


def schmidt(psi: PureState, cut: int) -> SchmidtDecomposition:
    """Schmidt decomposition of ``psi`` across ``cut``.

    Squared coefficients below ``SCHMIDT_CUTOFF`` are dropped with their vectors.
    """
    mat = bipartite_matrix(psi, cut)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    lam = s**2
    order = np.argsort(-lam, kind="stable")
    lam, u, v = lam[order], u[:, order], vh.T[:, order]
    keep = lam >= SCHMIDT_CUTOFF
    return SchmidtDecomposition(lam[keep], u[:, keep], v[:, keep])


def schmidt_spectrum(psi: PureState, cut: int) -> np.ndarray:
    """All squared Schmidt coefficients (no cutoff), nonincreasing."""
    s = np.linalg.svd(bipartite_matrix(psi, cut), compute_uv=False)
    return s**2


def partial_trace(rho: State, keep: Iterable[int]) -> MixedState:
    """Reduced state on the subsystems listed in ``keep`` (kept in ascending order)."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    dims = rho.dims
    n = len(dims)
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep {keep} out of range for {n} subsystems")
    traced = [i for i in range(n) if i not in keep]
    kd = prod(dims[i] for i in keep)
    if isinstance(rho, PureState):
        t = np.transpose(rho.tensor, keep + traced).reshape(kd, -1)
        red = t @ t.conj().T
    else:
        t = rho.matrix.reshape(dims + dims)
        t = np.transpose(t, keep + traced + [n + i for i in keep] + [n + i for i in traced])
        rest = prod(dims[i] for i in traced)
        t = t.reshape(kd, rest, kd, rest)
        red = np.einsum("ajbj->ab", t)
    red = (red + red.conj().T) / 2
    return MixedState(tuple(dims[i] for i in keep), red)


def reduced_spectrum(psi: PureState, cut: int) -> np.ndarray:
    """Eigenvalues of the reduced state on qudits 0..cut-1, nonincreasing, zero padded."""
    lam = schmidt_spectrum(psi, cut)
    left = prod(psi.dims[:cut])
    return np.concatenate([lam, np.zeros(left - lam.size)])


def _matching(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")


def trace_distance(a: State | np.ndarray, b: State | np.ndarray) -> float:
    ma, mb = as_density(a), as_density(b)
    _matching(ma, mb)
    diff = ma - mb
    w = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return float(min(1.0, 0.5 * np.abs(w).sum()))


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(a: State | np.ndarray, b: State | np.ndarray) -> float:
    """F(a, b) = || sqrt(a) sqrt(b) ||_1 (unsquared convention)."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        if a.dims != b.dims:
            raise ValueError(f"dimension mismatch {a.dims} vs {b.dims}")
        return float(abs(np.vdot(a.amplitudes, b.amplitudes)))
    ma, mb = as_density(a), as_density(b)
    _matching(ma, mb)
    s = np.linalg.svd(psd_sqrt(ma) @ psd_sqrt(mb), compute_uv=False)
    return float(min(1.0, s.sum()))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random d x d unitary: QR of a complex Ginibre matrix, R-diagonal phases fixed."""
    return haar_unitaries(d, rng, 1)[0]


def haar_unitaries(d: int, rng: np.random.Generator, count: int) -> np.ndarray:
    """Stack of ``count`` independent Haar unitaries, shape (count, d, d)."""
    if d < 1:
        raise ValueError("d must be positive")
    z = rng.standard_normal((count, d, d)) + 1j * rng.standard_normal((count, d, d))
    q, r = np.linalg.qr(z / np.sqrt(2))
    diag = np.diagonal(r, axis1=1, axis2=2)
    return q * (diag / np.abs(diag))[:, None, :]


def random_state(dims: Sequence[int], rng: np.random.Generator) -> PureState:
    dims = check_dims(dims)
    total = prod(dims)
    guard(total)
    z = rng.standard_normal(total) + 1j * rng.standard_normal(total)
    return PureState.from_vector(dims, z)


def random_mixed(
    dims: Sequence[int], rng: np.random.Generator, rank: int | None = None
) -> MixedState:
    """Random density matrix of the given rank (full rank by default), induced measure."""
    dims = check_dims(dims)
    total = prod(dims)
    guard(total)
    rank = total if rank is None else rank
    g = rng.standard_normal((total, rank)) + 1j * rng.standard_normal((total, rank))
    m = g @ g.conj().T
    return MixedState(dims, m / np.trace(m).real)


def state_from_spectrum(
    spectrum: Sequence[float], rng: np.random.Generator | None = None
) -> MixedState:
    """Single-qudit state with the given eigenvalues, randomly rotated when ``rng`` is given."""
    lam = np.asarray(spectrum, dtype=float)
    d = max(2, lam.size)
    lam = np.concatenate([lam, np.zeros(d - lam.size)])
    m = np.diag(lam).astype(complex)
    if rng is not None:
        u = haar_unitary(d, rng)
        m = u @ m @ u.conj().T
    return MixedState((d,), m)
