"""Estimates of the d-bar distance between shift-invariant measures.

Upper bounds always come from an explicit joining: the mean disagreement
frequency of paired windows.  Lower bounds come from the one-block optimal
coupling (total variation of the 1-block marginals).  For i.i.d. measures
the two pinch and the value is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np

from .measures import as_rng, as_seed_sequence, child_seeds

__all__ = [
    "DbarError",
    "InvalidJoiningError",
    "JoiningSampler",
    "DbarEstimate",
    "dbar_upper",
    "dbar_lower_1block",
    "dbar_exact_bernoulli",
    "maximal_coupling",
    "sample_maximal_coupling",
    "binary_entropy",
    "entropy_continuity_bound",
    "cylinder_table",
    "weak_star_cylinder_metric",
    "exact_cylinder_table",
]


class DbarError(ValueError):
    pass


class InvalidJoiningError(DbarError):
    """A joining's coordinates do not follow their declared marginals."""


@dataclass
class JoiningSampler:
    """Generator of paired windows together with their declared 1-block laws.

    Parameters
    ----------
    draw : callable
        ``draw(length, seed) -> (x, y)`` returning two equal-length windows.
    marginals : pair of arrays or None
        Declared 1-block laws of ``x`` and ``y``.  ``None`` skips the check
        for that coordinate.
    alphabet_size : int
    trim : int
        Coordinates discarded at each end before counting disagreements.
    """

    draw: Callable[[int, object], tuple[np.ndarray, np.ndarray]]
    marginals: tuple[np.ndarray | None, np.ndarray | None] = (None, None)
    alphabet_size: int = 2
    trim: int = 0

    @classmethod
    def diagonal(cls, sampler) -> "JoiningSampler":
        def draw(length, seed):
            x = sampler.sample(length, seed)
            return x, x.copy()

        m = sampler.marginal()
        return cls(draw, (m, m), sampler.alphabet_size)


@dataclass(frozen=True)
class DbarEstimate:
    """A one-sided (or exact) estimate of d-bar.

    ``side`` is ``"upper"``, ``"lower"`` or ``"exact"``.  ``radius`` is a
    three-sigma confidence radius for Monte Carlo estimates and zero for
    exact computations.
    """

    value: float
    side: str
    radius: float = 0.0
    n: int = 0
    seeds: tuple = ()
    exact_value: Fraction | None = field(default=None, compare=False)

    def consistent_with(self, other: "DbarEstimate") -> bool:
        """Sandwich check: a lower bound may not exceed an upper bound."""
        lo, hi = (self, other) if self.side == "lower" else (other, self)
        return lo.value - lo.radius <= hi.value + hi.radius

    def as_dict(self) -> dict:
        return {
            "side": self.side,
            "value": self.value,
            "radius": self.radius,
            "n": self.n,
            "seeds": list(self.seeds),
        }


def _check_marginal(x: np.ndarray, declared: np.ndarray, J: int, which: str) -> None:
    n = len(x)
    freq = np.bincount(x, minlength=J)[:J] / n
    declared = np.asarray(declared, dtype=float)
    sigma = np.sqrt(np.maximum(declared * (1 - declared), 1.0 / n) / n)
    # five sigma per symbol keeps the family-wise false alarm rate tiny
    bad = np.abs(freq - declared) > 5 * sigma
    if bad.any():
        raise InvalidJoiningError(
            f"{which} coordinate: empirical {freq.round(4)} vs declared {declared.round(4)}"
        )


def dbar_upper(j: JoiningSampler, W: int, replicas: int = 20, seed=0) -> DbarEstimate:
    """Mean disagreement frequency of ``replicas`` independent windows.

    The radius is three standard errors of the replica means (falls back to
    a binomial radius when every replica agrees).  Each replica also checks
    the declared marginals.
    """
    root = as_seed_sequence(seed)
    children = child_seeds(root, replicas)
    freqs = []
    count = 0
    for child in children:
        x, y = j.draw(W, child)
        if len(x) != len(y):
            raise DbarError("joining produced windows of different lengths")
        if j.trim:
            x, y = x[j.trim : len(x) - j.trim], y[j.trim : len(y) - j.trim]
        for which, w, m in (("first", x, j.marginals[0]), ("second", y, j.marginals[1])):
            if m is not None:
                _check_marginal(np.asarray(w, dtype=np.int64), m, j.alphabet_size, which)
        freqs.append(float(np.mean(x != y)))
        count += len(x)
    freqs = np.array(freqs)
    mean = float(freqs.mean())
    if replicas > 1:
        se = float(freqs.std(ddof=1) / math.sqrt(replicas))
    else:
        se = 0.0
    binom = math.sqrt(max(mean * (1 - mean), 1.0 / count) / count)
    radius = 3 * max(se, binom)
    seeds = tuple(f"{root.entropy}/{'/'.join(map(str, c.spawn_key))}" for c in children)
    return DbarEstimate(mean, "upper", radius, count, seeds)


def _as_vector(m) -> list:
    if all(isinstance(v, (Fraction, int)) for v in m):
        return [Fraction(v) for v in m]
    return [float(v) for v in m]


def dbar_lower_1block(m1: Sequence, m2: Sequence) -> DbarEstimate:
    """Total variation of the 1-block marginals, a lower bound for d-bar."""
    if len(m1) != len(m2):
        raise DbarError(f"alphabet sizes differ: {len(m1)} vs {len(m2)}")
    a, b = _as_vector(m1), _as_vector(m2)
    tv = sum(abs(u - v) for u, v in zip(a, b)) / 2
    exact = tv if isinstance(tv, Fraction) else None
    return DbarEstimate(float(tv), "lower", 0.0, 0, (), exact)


def maximal_coupling(m1: Sequence, m2: Sequence) -> np.ndarray:
    """Joint law on pairs with ``P(X != Y) = TV(m1, m2)``.

    Puts ``min(m1, m2)`` on the diagonal and couples the residuals
    independently.
    """
    a = np.asarray(m1, dtype=float)
    b = np.asarray(m2, dtype=float)
    common = np.minimum(a, b)
    tv = 1.0 - common.sum()
    C = np.diag(common)
    if tv > 1e-15:
        C += np.outer(a - common, b - common) / tv
    return C


def sample_maximal_coupling(m1: Sequence, m2: Sequence, length: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """I.i.d. pairs from :func:`maximal_coupling`: a joining of the two Bernoulli measures."""
    C = maximal_coupling(m1, m2)
    J = C.shape[0]
    flat = C.reshape(-1)
    cells = as_rng(seed).choice(J * J, size=length, p=flat / flat.sum())
    return cells // J, cells % J


def dbar_exact_bernoulli(
    m1: Sequence, m2: Sequence, verify_length: int = 0, replicas: int = 20, seed=0
) -> DbarEstimate:
    """Exact d-bar between two i.i.d. measures.

    The product of maximal couplings is a joining whose disagreement
    frequency equals the one-block lower bound, so the two pinch.  With
    ``verify_length > 0`` the joining is sampled and its disagreement is
    checked against the value at three sigma.
    """
    lower = dbar_lower_1block(m1, m2)
    if verify_length:
        j = JoiningSampler(
            lambda n, s: sample_maximal_coupling(m1, m2, n, s),
            (np.asarray(m1, dtype=float), np.asarray(m2, dtype=float)),
            len(m1),
        )
        upper = dbar_upper(j, verify_length, replicas, seed)
        if abs(upper.value - lower.value) > upper.radius + 1e-12:
            raise DbarError(
                f"pinch failed: joining gives {upper.value} +- {upper.radius}, lower bound {lower.value}"
            )
        return DbarEstimate(lower.value, "exact", 0.0, upper.n, upper.seeds, lower.exact_value)
    return DbarEstimate(lower.value, "exact", 0.0, 0, (), lower.exact_value)


def binary_entropy(d: float) -> float:
    if d <= 0 or d >= 1:
        return 0.0
    return -d * math.log(d) - (1 - d) * math.log(1 - d)


def entropy_continuity_bound(d: DbarEstimate | float, J: int) -> float:
    """Fano-type modulus ``d log(J-1) + H(d)`` bounding ``|h1 - h2|``.

    For an upper estimate the radius is added before evaluating, and the
    argument is capped at ``1 - 1/J`` where the modulus peaks at ``log J``.
    """
    if isinstance(d, DbarEstimate):
        v = d.value + (d.radius if d.side == "upper" else 0.0)
    else:
        v = float(d)
    if not -1e-12 <= v <= 1 + 1e-12 and not isinstance(d, DbarEstimate):
        raise DbarError(f"d-bar value {v} outside [0, 1]")
    v = min(max(v, 0.0), 1.0 - 1.0 / J)
    return v * math.log(J - 1) + binary_entropy(v) if J > 1 else 0.0


def cylinder_table(x: np.ndarray, depth: int, J: int) -> dict[int, np.ndarray]:
    """Empirical cylinder frequencies of every word of length ``1..depth``.

    ``table[k][code]`` is the frequency of the word with base-``J`` code
    ``code``.
    """
    x = np.asarray(x, dtype=np.int64)
    out = {}
    for k in range(1, depth + 1):
        n = len(x) - k + 1
        codes = np.zeros(n, dtype=np.int64)
        for i in range(k):
            codes = codes * J + x[i : i + n]
        out[k] = np.bincount(codes, minlength=J**k) / n
    return out


def weak_star_cylinder_metric(
    t1: Mapping[int, np.ndarray], t2: Mapping[int, np.ndarray], depth: int
) -> float:
    """``sum_{k <= depth} 2^-k k^-1 max_u |mu1[u] - mu2[u]|`` over words ``u`` of length ``k``.

    Any joining with disagreement rate ``d`` changes a length-``k`` cylinder
    by at most ``k d``, so the ``1/k`` factor keeps the metric below d-bar.
    It still metrizes the weak* topology.
    """
    total = 0.0
    for k in range(1, depth + 1):
        if k not in t1 or k not in t2:
            raise DbarError(f"cylinder table incomplete at depth {k}")
        a, b = np.asarray(t1[k], dtype=float), np.asarray(t2[k], dtype=float)
        if a.shape != b.shape:
            raise DbarError(f"tables disagree on the number of words of length {k}")
        total += 2.0**-k / k * float(np.max(np.abs(a - b)))
    return total


def exact_cylinder_table(cylinder: Callable[[tuple], float], J: int, depth: int) -> dict[int, np.ndarray]:
    """Cylinder table from an exact oracle ``cylinder(word)``."""
    return {
        k: np.array([float(cylinder(w)) for w in product(range(J), repeat=k)])
        for k in range(1, depth + 1)
    }
