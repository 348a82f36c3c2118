"""Partitions, S_m characters and Schur polynomials.

Characters come from the Murnaghan-Nakayama rule on beta-sets, so they are
exact integers.  Schur polynomials are evaluated by enumerating semistandard
tableaux, which stays well defined at repeated eigenvalues.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from math import factorial, prod
from typing import Iterator, Sequence

import numpy as np

MAX_M = 8


@dataclass(frozen=True, order=True)
class Partition:
    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts if p != 0)
        if any(p < 0 for p in parts):
            raise ValueError(f"negative part in {self.parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts must be weakly decreasing: {self.parts}")
        if not parts:
            raise ValueError("empty partition")
        object.__setattr__(self, "parts", parts)

    @property
    def m(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"


def as_partition(mu) -> Partition:
    return mu if isinstance(mu, Partition) else Partition(tuple(mu))


@dataclass(frozen=True)
class CycleType:
    """Conjugacy class of S_m, labelled by its cycle lengths."""

    partition: Partition

    @property
    def m(self) -> int:
        return self.partition.m

    @property
    def class_size(self) -> int:
        return class_size(self.partition)

    @property
    def cycles(self) -> tuple[int, ...]:
        return self.partition.parts


def class_size(cycles) -> int:
    """m! / prod_k (k^{m_k} m_k!) for the class with the given cycle lengths."""
    cycles = as_partition(cycles)
    denom = 1
    for k, mult in Counter(cycles.parts).items():
        denom *= k**mult * factorial(mult)
    return factorial(cycles.m) // denom


def _check_m(m: int) -> None:
    if not 1 <= m <= MAX_M:
        raise ValueError(f"m must lie in 1..{MAX_M}, got {m}")


def _partitions(m: int, largest: int) -> Iterator[tuple[int, ...]]:
    if m == 0:
        yield ()
        return
    for first in range(min(m, largest), 0, -1):
        for rest in _partitions(m - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _partitions_cached(m: int) -> tuple[Partition, ...]:
    return tuple(Partition(p) for p in _partitions(m, m))


def partitions_of(m: int, max_length: int | None = None) -> list[Partition]:
    """All partitions of m in reverse-lexicographic order, optionally length-capped."""
    _check_m(m)
    out = list(_partitions_cached(m))
    if max_length is not None:
        out = [p for p in out if p.length <= max_length]
    return out


def cycle_types(m: int) -> list[CycleType]:
    return [CycleType(p) for p in partitions_of(m)]


def conjugate(mu) -> Partition:
    mu = as_partition(mu)
    return Partition(tuple(sum(1 for p in mu.parts if p > j) for j in range(mu.parts[0])))


@lru_cache(maxsize=None)
def _dim(parts: tuple[int, ...]) -> int:
    conj = conjugate(parts).parts
    hooks = 1
    for i, row in enumerate(parts):
        for j in range(row):
            hooks *= (row - j - 1) + (conj[j] - i - 1) + 1
    return factorial(sum(parts)) // hooks


def irrep_dimension(mu) -> int:
    """Dimension of the S_m irrep labelled by mu (hook-length formula)."""
    return _dim(as_partition(mu).parts)


@lru_cache(maxsize=None)
def _mn(beta: frozenset, cycles: tuple[int, ...]) -> int:
    # beta-set form of Murnaghan-Nakayama: removing a k-rim hook is moving a bead from b to b-k.
    if not cycles:
        return 1
    k, rest = cycles[0], cycles[1:]
    total = 0
    for b in beta:
        target = b - k
        if target < 0 or target in beta:
            continue
        height = sum(1 for c in beta if target < c < b)
        total += (-1) ** height * _mn((beta - {b}) | {target}, rest)
    return total


def character(mu, cycle_type) -> int:
    """chi_mu evaluated on the class with the given cycle type."""
    mu = as_partition(mu)
    cyc = cycle_type.partition if isinstance(cycle_type, CycleType) else as_partition(cycle_type)
    if mu.m != cyc.m:
        raise ValueError(f"|mu|={mu.m} but cycle type has size {cyc.m}")
    ell = mu.length
    beta = frozenset(p + ell - 1 - i for i, p in enumerate(mu.parts))
    return _mn(beta, cyc.parts)


def character_table(m: int) -> tuple[list[Partition], list[CycleType], np.ndarray]:
    """Rows indexed by irreps, columns by classes, both in reverse-lex order."""
    irreps = partitions_of(m)
    classes = cycle_types(m)
    table = np.array([[character(mu, c) for c in classes] for mu in irreps], dtype=np.int64)
    return irreps, classes, table


# -- permutations ------------------------------------------------------------
# A permutation of m is a tuple p with p[k] = pi(k), 0-indexed.


def all_permutations(m: int) -> list[tuple[int, ...]]:
    _check_m(m)
    return list(permutations(range(m)))


def compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """(p q)(k) = p(q(k))."""
    return tuple(p[q[k]] for k in range(len(q)))


def inverse(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for k, pk in enumerate(p):
        inv[pk] = k
    return tuple(inv)


def cycle_lengths(p: Sequence[int]) -> Partition:
    seen = [False] * len(p)
    lengths = []
    for start in range(len(p)):
        if seen[start]:
            continue
        k, length = start, 0
        while not seen[k]:
            seen[k] = True
            k = p[k]
            length += 1
        lengths.append(length)
    return Partition(tuple(sorted(lengths, reverse=True)))


def count_cycles(p: Sequence[int]) -> int:
    return cycle_lengths(p).length


# -- Schur polynomials -------------------------------------------------------


def _ssyt_contents(shape: tuple[int, ...], k: int) -> Counter:
    """Multiset of weight vectors of semistandard tableaux of ``shape`` with entries < k.

    Filled row by row; each row is weakly increasing and each entry is strictly
    greater than the one above it.
    """
    contents: Counter = Counter()
    weight = [0] * k

    def fill_row(i: int, above: tuple[int, ...]):
        if i == len(shape):
            contents[tuple(weight)] += 1
            return
        row: list[int] = []

        def place(j: int, lo: int):
            if j == shape[i]:
                fill_row(i + 1, tuple(row))
                return
            floor = max(lo, above[j] + 1) if i > 0 else lo
            for v in range(floor, k):
                row.append(v)
                weight[v] += 1
                place(j + 1, v)
                weight[v] -= 1
                row.pop()

        place(0, 0)

    fill_row(0, ())
    return contents


@lru_cache(maxsize=None)
def kostka_contents(parts: tuple[int, ...], k: int) -> tuple[np.ndarray, np.ndarray]:
    """(weights, multiplicities) with s_mu(x) = sum_w mult_w * prod_i x_i^{w_i}."""
    if len(parts) > k:
        return np.zeros((0, k), dtype=int), np.zeros(0, dtype=np.int64)
    c = _ssyt_contents(parts, k)
    weights = np.array(sorted(c), dtype=int).reshape(-1, k)
    mult = np.array([c[tuple(w)] for w in weights], dtype=np.int64)
    return weights, mult


def schur_polynomial(mu, spectrum: Sequence[float]) -> float:
    """s_mu evaluated at the given nonnegative variables.

    Zero variables are discarded first (s_mu restricted to fewer variables), which
    keeps the tableau enumeration small for low-rank spectra.
    """
    mu = as_partition(mu)
    x = np.asarray(spectrum, dtype=float)
    if np.any(x < 0):
        raise ValueError("spectrum entries must be nonnegative")
    x = x[x > 0]
    if mu.length > x.size:
        return 0.0
    weights, mult = kostka_contents(mu.parts, x.size)
    monomials = np.prod(x[None, :] ** weights, axis=1)
    return float(mult @ monomials)


def power_sum(spectrum: Sequence[float], cycles) -> float:
    """p_cycles(x) = prod over cycles of sum_i x_i^len."""
    x = np.asarray(spectrum, dtype=float)
    return float(prod(np.sum(x**c) for c in as_partition(cycles).parts))
