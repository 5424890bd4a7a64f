"""Counting ordered tuples of distinct indices, and set partitions.

Sums over tuples of *distinct* indices are recovered from unconstrained sums
by Moebius inversion on the partition lattice::

    sum_{i distinct} prod_s v_s(i_s)
        = sum_P mu(P) prod_{B in P} sum_i prod_{s in B} v_s(i)

with ``mu(P) = prod_B (-1)**(|B|-1) (|B|-1)!``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial, prod

INT64_MAX = 2**63 - 1
MAX_SLOTS = 8


def _check_int64(value):
    if value > INT64_MAX:
        raise OverflowError(f"count {value} does not fit in a signed 64-bit integer")
    return value


def falling_factorial(n: int, p: int) -> int:
    """``A_n^p = n! / (n - p)!``, the number of ordered p-tuples of distinct indices.

    Returns 0 when ``p > n`` (no such tuple). Raises ``OverflowError`` rather
    than returning a count above the signed 64-bit range.
    """
    if n < 0 or p < 0:
        raise ValueError(f"falling_factorial needs non-negative arguments, got ({n}, {p})")
    if p > n:
        return 0
    return _check_int64(prod(range(n - p + 1, n + 1)))


def count_matching(n: int, m: int, b: int) -> int:
    """Pairs ``(i1, i2)`` of ordered distinct m-tuples from ``1..n`` sharing exactly b indices.

    Closed form ``A_n^m A_m^b A_{n-m}^{m-b} C_m^b``.
    """
    if not 0 <= b <= m <= n:
        raise ValueError(f"need 0 <= b <= m <= n, got n={n}, m={m}, b={b}")
    return _check_int64(
        falling_factorial(n, m)
        * falling_factorial(m, b)
        * falling_factorial(n - m, m - b)
        * comb(m, b)
    )


@dataclass(frozen=True)
class SetPartition:
    blocks: tuple  # tuple of tuples of 0-based slot indices

    @property
    def mobius_weight(self) -> int:
        return prod((-1) ** (len(B) - 1) * factorial(len(B) - 1) for B in self.blocks)

    def __len__(self):
        return len(self.blocks)


def _restricted_growth(m):
    # a[0] = 0 and a[i] <= 1 + max(a[:i]), in lexicographic order
    a = [0] * m
    yield tuple(a)
    while True:
        i = m - 1
        while i > 0 and a[i] > max(a[:i]):
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for t in range(i + 1, m):
            a[t] = 0
        yield tuple(a)


def set_partitions(m: int) -> list:
    """All Bell(m) partitions of the slots ``0..m-1``, with Moebius weights."""
    if not 1 <= m <= MAX_SLOTS:
        raise ValueError(f"set_partitions supports 1 <= m <= {MAX_SLOTS}, got {m}")
    out = []
    for rgs in _restricted_growth(m):
        blocks = [[] for _ in range(max(rgs) + 1)]
        for slot, b in enumerate(rgs):
            blocks[b].append(slot)
        out.append(SetPartition(tuple(tuple(B) for B in blocks)))
    return out


def bell_number(m: int) -> int:
    # Bell triangle
    row = [1]
    for _ in range(m - 1):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[-1]
