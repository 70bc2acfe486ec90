"""Subshifts of finite type over a finite alphabet.

An :class:`Sft` is a 0/1 adjacency matrix ``A``; a word ``w`` is admissible
when ``A[w[i], w[i+1]] == 1`` for every consecutive pair.  This module also
provides the cyclic structure of a transitive SFT, the higher-block recoding
on one cyclic class, transition lengths for mixing SFTs, and safe symbols.

Alphabets are small, so transitivity and mixing are decided by brute-force
reachability and boolean matrix powers.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "SftError",
    "StructureError",
    "Sft",
    "CyclicDecomposition",
    "HigherBlockSft",
    "is_admissible",
    "cyclic_decomposition",
    "higher_block",
    "transition_length",
    "connector",
    "is_safe",
    "parse_sft",
    "format_sft",
]


class SftError(ValueError):
    """Bad input to an SFT operation (symbol out of range, malformed matrix)."""


class StructureError(SftError):
    """The SFT lacks the structure an operation needs (transitivity, mixing)."""


@dataclass(frozen=True)
class Sft:
    """Subshift of finite type given by a 0/1 adjacency matrix.

    Parameters
    ----------
    adjacency : sequence of sequences of {0, 1}
        Square matrix; ``adjacency[i][j] == 1`` iff ``j`` may follow ``i``.
    """

    adjacency: tuple[tuple[int, ...], ...]

    def __init__(self, adjacency: Iterable[Iterable[int]]):
        rows = tuple(tuple(int(a) for a in row) for row in adjacency)
        J = len(rows)
        if J == 0:
            raise SftError("empty alphabet")
        if any(len(row) != J for row in rows):
            raise SftError("adjacency matrix must be square")
        if any(a not in (0, 1) for row in rows for a in row):
            raise SftError("adjacency entries must be 0 or 1")
        for i in range(J):
            if not any(rows[i]):
                raise SftError(f"symbol {i} has no successor")
            if not any(rows[j][i] for j in range(J)):
                raise SftError(f"symbol {i} has no predecessor")
        object.__setattr__(self, "adjacency", rows)

    @classmethod
    def full_shift(cls, J: int) -> "Sft":
        return cls([[1] * J for _ in range(J)])

    @property
    def J(self) -> int:
        return len(self.adjacency)

    @cached_property
    def matrix(self) -> np.ndarray:
        A = np.array(self.adjacency, dtype=np.int64)
        A.setflags(write=False)
        return A

    def edge(self, a: int, b: int) -> bool:
        return self.adjacency[a][b] == 1

    def successors(self, a: int) -> list[int]:
        return [b for b in range(self.J) if self.adjacency[a][b]]

    def reachable_from(self, a: int) -> set[int]:
        """Symbols reachable from ``a`` by a path of positive length."""
        seen: set[int] = set()
        queue = deque(self.successors(a))
        while queue:
            s = queue.popleft()
            if s in seen:
                continue
            seen.add(s)
            queue.extend(self.successors(s))
        return seen

    @cached_property
    def is_transitive(self) -> bool:
        everything = set(range(self.J))
        return all(self.reachable_from(a) == everything for a in range(self.J))

    @cached_property
    def is_mixing(self) -> bool:
        if not self.is_transitive:
            return False
        return _first_positive_power(self.matrix) is not None

    def check_word(self, word: Sequence[int]) -> None:
        for s in word:
            if not 0 <= int(s) < self.J:
                raise SftError(f"symbol {s} outside alphabet 0..{self.J - 1}")


def _bool_matmul(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return (X @ Y > 0).astype(np.int64)


def _first_positive_power(A: np.ndarray) -> int | None:
    """Least ``e <= J**2`` with ``A**e`` entrywise positive, or None."""
    J = A.shape[0]
    B = (A > 0).astype(np.int64)
    P = B.copy()
    for e in range(1, J * J + 1):
        if P.all():
            return e
        P = _bool_matmul(P, B)
    return None


def is_admissible(word: Sequence[int], sft: Sft) -> bool:
    """True iff every consecutive pair of ``word`` is an edge of ``sft``.

    Empty and single-symbol words are admissible.  Raises :class:`SftError`
    when a symbol is outside the alphabet.
    """
    sft.check_word(word)
    if len(word) < 2:
        return True
    w = np.asarray(word, dtype=np.int64)
    return bool(sft.matrix[w[:-1], w[1:]].all())


@dataclass(frozen=True)
class CyclicDecomposition:
    """Cyclic classes of a transitive SFT.

    ``classes[0]`` holds the designated base symbol (the first symbol of the
    periodic word); every edge goes from ``classes[i]`` into
    ``classes[(i + 1) % period]``.
    """

    period: int
    classes: tuple[frozenset[int], ...]
    base_symbol: int = 0

    def class_of(self, symbol: int) -> int:
        for i, cls in enumerate(self.classes):
            if symbol in cls:
                return i
        raise SftError(f"symbol {symbol} not in any class")


def cyclic_decomposition(sft: Sft, base_symbol: int = 0) -> CyclicDecomposition:
    """Period and cyclic classes of a transitive SFT.

    The period is the gcd of all cycle lengths, computed from BFS levels:
    ``gcd(level[i] + 1 - level[j])`` over every edge ``i -> j``.
    """
    if not sft.is_transitive:
        raise StructureError("cyclic decomposition needs a transitive SFT")
    sft.check_word([base_symbol])
    level = {base_symbol: 0}
    queue = deque([base_symbol])
    while queue:
        a = queue.popleft()
        for b in sft.successors(a):
            if b not in level:
                level[b] = level[a] + 1
                queue.append(b)
    n = 0
    for a in range(sft.J):
        for b in sft.successors(a):
            n = math.gcd(n, level[a] + 1 - level[b])
    n = abs(n)
    classes = tuple(
        frozenset(s for s in range(sft.J) if level[s] % n == i) for i in range(n)
    )
    return CyclicDecomposition(period=n, classes=classes, base_symbol=base_symbol)


@dataclass(frozen=True)
class HigherBlockSft:
    """Recoding of one cyclic class of ``base`` by words of length ``n``.

    ``symbols[k]`` is the base word represented by block symbol ``k``; the
    words are the admissible ``n``-words starting in class 0, in
    lexicographic order.
    """

    base: Sft
    n: int
    symbols: tuple[tuple[int, ...], ...]
    sft: Sft
    index: dict = field(compare=False, repr=False, default_factory=dict)

    def encode(self, word: Sequence[int]) -> list[int]:
        """Block symbols for a base word of length divisible by ``n``."""
        if len(word) % self.n:
            raise SftError("word length is not a multiple of the block length")
        out = []
        for i in range(0, len(word), self.n):
            key = tuple(int(s) for s in word[i : i + self.n])
            if key not in self.index:
                raise SftError(f"{key} is not a block symbol")
            out.append(self.index[key])
        return out

    def expand(self, blocks: Sequence[int]) -> np.ndarray:
        """The projection: concatenate the base words of ``blocks``."""
        table = np.array(self.symbols, dtype=np.int64).reshape(len(self.symbols), self.n)
        return table[np.asarray(blocks, dtype=np.int64)].reshape(-1)


def higher_block(sft: Sft, decomp: CyclicDecomposition) -> HigherBlockSft:
    n = decomp.period
    start = decomp.classes[0]
    words: list[tuple[int, ...]] = [(s,) for s in sorted(start)]
    for _ in range(n - 1):
        words = [w + (b,) for w in words for b in sft.successors(w[-1])]
    words.sort()
    A1 = [[1 if sft.edge(u[-1], v[0]) else 0 for v in words] for u in words]
    block = Sft(A1)
    if sft.is_transitive and not block.is_mixing:
        raise StructureError("higher-block recoding is not mixing")
    index = {w: k for k, w in enumerate(words)}
    return HigherBlockSft(base=sft, n=n, symbols=tuple(words), sft=block, index=index)


def transition_length(sft: Sft) -> int:
    """Least ``t >= 1`` such that every pair ``a, b`` is joined by some
    admissible ``a v b`` with ``len(v) == t`` (``A**(t+1) > 0``)."""
    e = _first_positive_power(sft.matrix)
    if e is None:
        raise StructureError("SFT is not mixing: no power of A is positive")
    return max(e - 1, 1)


def _paths_to(sft: Sft, b: int, t: int) -> list[np.ndarray]:
    """``reach[k][s]`` is true iff a path of length ``k`` leads from ``s`` to ``b``."""
    reach = [np.zeros(sft.J, dtype=bool)]
    reach[0][b] = True
    A = sft.matrix > 0
    for _ in range(t + 1):
        reach.append((A & reach[-1][None, :]).any(axis=1))
    return reach


def connector(sft: Sft, a: int, b: int, t: int) -> tuple[int, ...]:
    """Lexicographically least ``v`` of length ``t`` with ``a v b`` admissible."""
    sft.check_word([a, b])
    reach = _paths_to(sft, b, t)
    if not reach[t + 1][a]:
        raise StructureError(f"no connector of length {t} from {a} to {b}")
    v = []
    cur = a
    for remaining in range(t, 0, -1):
        # next symbol must still reach b in exactly `remaining` steps
        nxt = next(s for s in sft.successors(cur) if reach[remaining][s])
        v.append(nxt)
        cur = nxt
    return tuple(v)


def is_safe(sft: Sft, i: int) -> bool:
    """Symbol ``i`` is safe when it may precede and follow every symbol."""
    sft.check_word([i])
    return all(sft.adjacency[i]) and all(row[i] for row in sft.adjacency)


def parse_sft(text: str) -> Sft:
    """Read ``J`` on the first line, then ``J`` rows of ``J`` entries."""
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise SftError("empty SFT description")
    J = int(lines[0][0])
    rows = lines[1:]
    if len(rows) != J:
        raise SftError(f"expected {J} rows, found {len(rows)}")
    return Sft([[int(a) for a in row] for row in rows])


def format_sft(sft: Sft) -> str:
    body = "\n".join(" ".join(str(a) for a in row) for row in sft.adjacency)
    return f"{sft.J}\n{body}\n"
