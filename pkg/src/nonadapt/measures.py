"""Invariant measures on shift spaces.

Closed-form Markov measures (Bernoulli, Parry), their entropy and cylinder
probabilities; seeded window samplers; plug-in entropy-rate estimation;
and the stationary renewal measure ``mu_p`` on 0/1 sequences whose gaps
between successive 1s are i.i.d. with law ``p``.

Entropy is in nats throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import mpmath
import numpy as np

from .sft import HigherBlockSft, Sft, SftError

__all__ = [
    "MeasureError",
    "MarkovMeasure",
    "parry_measure",
    "entropy_exact",
    "block_measure",
    "MeasureSampler",
    "MarkovSampler",
    "ConstantSampler",
    "PeriodicSampler",
    "RenewalSampler",
    "EntropyEstimate",
    "entropy_empirical",
    "block_frequencies",
    "PowerTail",
    "GeometricTail",
    "GapDistribution",
    "eta",
    "renewal_normalizer",
    "mu_p_cylinder",
    "sample_mu_p",
    "sample_renewal_flanked",
    "as_rng",
    "as_seed_sequence",
    "child_seeds",
]

DPS = 50


class MeasureError(ValueError):
    pass


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """A SeedSequence for ``seed``; a Generator contributes one draw of entropy."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        return np.random.SeedSequence(int(seed.integers(2**63)))
    return np.random.SeedSequence(seed)


def child_seeds(seed, k: int) -> list[np.random.SeedSequence]:
    """The first ``k`` children of ``seed``.

    Unlike ``SeedSequence.spawn`` this does not advance the parent, so the
    same parent always yields the same children.
    """
    ss = as_seed_sequence(seed)
    return [
        np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + (i,), pool_size=ss.pool_size)
        for i in range(k)
    ]


# ---------------------------------------------------------------------------
# Markov measures


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """Stationary Markov measure on ``sft`` with transition matrix ``P``."""

    sft: Sft
    P: np.ndarray
    stationary: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        pi = np.asarray(self.stationary, dtype=float)
        if P.shape != (self.sft.J, self.sft.J):
            raise MeasureError("transition matrix has the wrong shape")
        if (P < 0).any() or not np.allclose(P.sum(axis=1), 1.0, atol=1e-12):
            raise MeasureError("transition matrix must be row stochastic")
        if ((P > 0) & (self.sft.matrix == 0)).any():
            raise MeasureError("transition matrix charges a forbidden edge")
        if (pi < -1e-15).any() or abs(pi.sum() - 1) > 1e-12:
            raise MeasureError("stationary vector is not a probability vector")
        if not np.allclose(pi @ P, pi, atol=1e-12):
            raise MeasureError("stationary vector is not invariant")
        P.setflags(write=False)
        pi = np.clip(pi, 0, None)
        pi.setflags(write=False)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "stationary", pi)

    @classmethod
    def bernoulli(cls, weights: Sequence[float], sft: Sft | None = None) -> "MarkovMeasure":
        w = np.asarray([float(x) for x in weights])
        sft = sft or Sft.full_shift(len(w))
        return cls(sft, np.tile(w, (len(w), 1)), w)

    @classmethod
    def from_matrix(cls, sft: Sft, P) -> "MarkovMeasure":
        P = np.asarray(P, dtype=float)
        J = P.shape[0]
        # stationary vector: solve pi (P - I) = 0 with sum(pi) = 1
        M = np.vstack([(P - np.eye(J)).T, np.ones(J)])
        rhs = np.zeros(J + 1)
        rhs[-1] = 1.0
        pi, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        return cls(sft, P, pi)

    @property
    def J(self) -> int:
        return self.sft.J

    @property
    def is_bernoulli(self) -> bool:
        return bool(np.allclose(self.P, self.stationary[None, :], atol=1e-14))

    def cylinder(self, word: Sequence[int]) -> float:
        if len(word) == 0:
            return 1.0
        prob = self.stationary[word[0]]
        for a, b in zip(word, word[1:]):
            prob *= self.P[a, b]
        return float(prob)

    def entropy(self) -> float:
        return entropy_exact(self)


def parry_measure(sft: Sft) -> MarkovMeasure:
    """Measure of maximal entropy of a transitive SFT.

    With Perron eigenvalue ``lam`` and right/left eigenvectors ``v``/``u``:
    ``P_ij = A_ij v_j / (lam v_i)`` and ``pi_i ∝ u_i v_i``.
    """
    if not sft.is_transitive:
        raise SftError("Parry measure needs a transitive SFT")
    A = sft.matrix.astype(float)
    vals, right = np.linalg.eig(A)
    k = int(np.argmax(vals.real))
    lam = vals[k].real
    v = np.abs(right[:, k].real)
    vals_l, left = np.linalg.eig(A.T)
    u = np.abs(left[:, int(np.argmax(vals_l.real))].real)
    P = A * v[None, :] / (lam * v[:, None])
    P = P / P.sum(axis=1, keepdims=True)
    pi = u * v / (u @ v)
    return MarkovMeasure(sft, P, pi)


def entropy_exact(m: MarkovMeasure) -> float:
    """``-sum_i pi_i sum_j P_ij log P_ij`` in nats."""
    P = m.P
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(P), 0.0)
    return float(-(m.stationary @ terms.sum(axis=1)))


def block_measure(m: MarkovMeasure, hb: HigherBlockSft) -> MarkovMeasure:
    """The measure ``n * m`` restricted to the first cyclic class, on block symbols.

    For a Markov ``m`` this is again Markov on the higher-block SFT; it is the
    inverse of averaging the expanded measure over the ``n`` phases.
    """
    if hb.base != m.sft:
        raise MeasureError("measure and higher-block SFT have different bases")
    n = hb.n
    words = hb.symbols

    def inner(word):
        prob = 1.0
        for a, b in zip(word, word[1:]):
            prob *= m.P[a, b]
        return prob

    inside = np.array([inner(w) for w in words])
    start = np.array([m.stationary[w[0]] for w in words]) * inside * n
    P1 = np.array([[m.P[u[-1], v[0]] * inside[j] for j, v in enumerate(words)] for u in words])
    return MarkovMeasure(hb.sft, P1, start / start.sum())


# ---------------------------------------------------------------------------
# Samplers


class MeasureSampler:
    """Seeded generator of finite windows of a shift-invariant measure.

    Subclasses implement :meth:`sample`.  ``stationarity`` is ``"stationary"``
    when each window is an exact draw from the invariant measure and
    ``"burn-in approximate"`` otherwise.
    """

    alphabet_size: int
    stationarity: str = "stationary"

    def sample(self, length: int, seed) -> np.ndarray:
        raise NotImplementedError

    def marginal(self) -> np.ndarray | None:
        """Declared 1-block law, when known in closed form."""
        return None


def _compose_prefix(F: np.ndarray) -> np.ndarray:
    """Prefix compositions ``G[i] = F[i] o ... o F[0]`` of maps on ``range(J)``."""
    G = F.copy()
    d = 1
    while d < len(G):
        G[d:] = np.take_along_axis(G[d:], G[:-d], axis=1)
        d *= 2
    return G


@dataclass
class MarkovSampler(MeasureSampler):
    measure: MarkovMeasure

    def __post_init__(self):
        self.alphabet_size = self.measure.J
        P = self.measure.P
        cum = np.cumsum(P, axis=1)
        cum = cum / cum[:, -1:]
        for s in range(P.shape[0]):
            last = np.flatnonzero(P[s] > 0)[-1]
            cum[s, last:] = 2.0
        self._cum = cum
        pcum = np.cumsum(self.measure.stationary)
        pcum[np.flatnonzero(self.measure.stationary > 0)[-1]:] = 2.0
        self._pcum = pcum

    def sample(self, length: int, seed) -> np.ndarray:
        rng = as_rng(seed)
        if length <= 0:
            return np.zeros(0, dtype=np.int64)
        x0 = int(np.searchsorted(self._pcum, rng.random(), side="right"))
        if length == 1:
            return np.array([x0], dtype=np.int64)
        u = rng.random(length - 1)
        if self.measure.is_bernoulli:
            rest = np.searchsorted(self._cum[0], u, side="right")
            return np.concatenate([[x0], rest]).astype(np.int64)
        # next-state table for every current state, then compose along the window
        F = np.stack([np.searchsorted(row, u, side="right") for row in self._cum], axis=1)
        G = _compose_prefix(F.astype(np.int16 if self.alphabet_size < 2**15 else np.int64))
        return np.concatenate([[x0], G[:, x0]]).astype(np.int64)

    def marginal(self) -> np.ndarray:
        return np.array(self.measure.stationary)


@dataclass
class ConstantSampler(MeasureSampler):
    """The point mass on a constant sequence."""

    symbol: int
    alphabet_size: int = 2

    def sample(self, length: int, seed) -> np.ndarray:
        return np.full(length, self.symbol, dtype=np.int64)

    def marginal(self) -> np.ndarray:
        m = np.zeros(self.alphabet_size)
        m[self.symbol] = 1.0
        return m


@dataclass
class PeriodicSampler(MeasureSampler):
    """The invariant measure on the orbit of the periodic sequence ``word^inf``."""

    word: tuple[int, ...]
    alphabet_size: int = 2

    def sample(self, length: int, seed) -> np.ndarray:
        w = np.asarray(self.word, dtype=np.int64)
        phase = int(as_rng(seed).integers(len(w)))
        reps = -(-(length + phase) // len(w))
        return np.tile(w, reps)[phase : phase + length]

    def marginal(self) -> np.ndarray:
        return np.bincount(np.asarray(self.word), minlength=self.alphabet_size) / len(self.word)


# ---------------------------------------------------------------------------
# Entropy estimation


def block_frequencies(x: np.ndarray, k: int, J: int) -> np.ndarray:
    """Counts of each length-``k`` block, indexed by its base-``J`` code."""
    x = np.asarray(x, dtype=np.int64)
    n = len(x) - k + 1
    if n <= 0:
        return np.zeros(J**k, dtype=np.int64)
    codes = np.zeros(n, dtype=np.int64)
    for j in range(k):
        codes = codes * J + x[j : j + n]
    return np.bincount(codes, minlength=J**k)


def _block_entropy(counts: np.ndarray) -> tuple[float, float]:
    """Plug-in entropy and its Miller-Madow correction term."""
    total = counts.sum()
    c = counts[counts > 0]
    p = c / total
    return float(-(p * np.log(p)).sum()), (len(c) - 1) / (2 * total)


def _ladder(x: np.ndarray, J: int, ks: Sequence[int]) -> dict[int, tuple[float, float]]:
    H = {}
    for k in sorted(set(ks) | {k - 1 for k in ks}):
        if k == 0:
            H[0] = (0.0, 0.0)
            continue
        H[k] = _block_entropy(block_frequencies(x, k, J))
    return H


@dataclass(frozen=True)
class EntropyEstimate:
    """Entropy-rate estimate with a confidence band.

    ``ladder`` maps each block length ``k`` to ``(H_k / k, H_k - H_{k-1})``
    using Miller-Madow corrected block entropies.  ``value`` is the least
    conditional increment on the ladder: both ladders decrease to the
    entropy rate, and the increments converge faster.
    """

    value: float
    band: float
    ladder: dict[int, tuple[float, float]]
    k_best: int
    n: int
    widened: bool = False

    def contains(self, h: float) -> bool:
        return abs(self.value - h) <= self.band


def entropy_empirical(
    sampler: MeasureSampler | np.ndarray,
    n: int = 1_000_000,
    ks: Sequence[int] = (4, 5, 6, 7, 8),
    seed=0,
    batches: int = 10,
    alphabet_size: int | None = None,
) -> EntropyEstimate:
    """Plug-in entropy rate from block frequencies of one long window.

    The band is three standard errors over ``batches`` disjoint sub-windows
    plus the Miller-Madow correction at the chosen ``k`` (a bias scale).
    ``widened`` is set when ``J**k`` is not small against the sample size;
    the band is then doubled.
    """
    if isinstance(sampler, np.ndarray):
        x = sampler
        J = alphabet_size or int(x.max()) + 1
    else:
        x = sampler.sample(n, seed)
        J = sampler.alphabet_size
    n = len(x)
    ks = sorted(ks)

    def estimate(window):
        H = _ladder(window, J, ks)
        corr = {k: H[k][0] + H[k][1] for k in H}
        cond = {k: corr[k] - corr[k - 1] for k in ks}
        return cond, {k: corr[k] / k for k in ks}, H

    cond, rate, H = estimate(x)
    k_best = min(ks, key=lambda k: cond[k])
    value = max(cond[k_best], 0.0)
    size = len(x) // batches
    per_batch = [estimate(x[i * size : (i + 1) * size])[0][k_best] for i in range(batches)]
    se = float(np.std(per_batch, ddof=1) / math.sqrt(batches)) * math.sqrt(size * batches / n)
    band = 3 * se + H[k_best][1] + H[k_best - 1][1]
    widened = any(J**k * k * 20 > n for k in ks)
    if widened:
        band *= 2
    ladder = {k: (rate[k], cond[k]) for k in ks}
    return EntropyEstimate(value, band, ladder, k_best, n, widened)


# ---------------------------------------------------------------------------
# Gap distributions and the renewal measure


def _mpf(x) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


@dataclass(frozen=True)
class PowerTail:
    """Weights ``scale * (k + offset) ** -exponent`` at indices ``base + k * step``, ``k >= start``."""

    scale: mpmath.mpf
    exponent: int
    offset: int
    start: int
    base: int
    step: int

    def k_of(self, i: int) -> int | None:
        k, rem = divmod(i - self.base, self.step)
        return k if rem == 0 and k >= self.start else None

    def weight_k(self, k: int):
        return self.scale * mpmath.mpf(k + self.offset) ** (-self.exponent)

    def mass(self):
        return self.scale * mpmath.zeta(self.exponent, self.start + self.offset)

    def first_moment(self):
        if self.exponent <= 2:
            return mpmath.inf
        a = self.start + self.offset
        z1 = mpmath.zeta(self.exponent - 1, a)
        z0 = mpmath.zeta(self.exponent, a)
        return self.scale * ((self.base - self.step * self.offset) * z0 + self.step * z1)

    def mass_beyond(self, k: int):
        """Tail mass at ``k' >= k``."""
        return self.scale * mpmath.zeta(self.exponent, max(k, self.start) + self.offset)


@dataclass(frozen=True)
class GeometricTail:
    """Weights ``scale * ratio ** k`` at indices ``base + k * step``, ``k >= start``."""

    scale: mpmath.mpf
    ratio: mpmath.mpf
    start: int
    base: int
    step: int

    def k_of(self, i: int) -> int | None:
        k, rem = divmod(i - self.base, self.step)
        return k if rem == 0 and k >= self.start else None

    def weight_k(self, k: int):
        return self.scale * self.ratio**k

    def mass(self):
        return self.mass_beyond(self.start)

    def mass_beyond(self, k: int):
        k = max(k, self.start)
        return self.scale * self.ratio**k / (1 - self.ratio)

    def first_moment(self):
        q, s = self.ratio, self.start
        sum_k = q**s * (s * (1 - q) + q) / (1 - q) ** 2
        return self.scale * (self.base * q**s / (1 - q) + self.step * sum_k)


@dataclass(frozen=True, eq=False)
class GapDistribution:
    """Probability law ``p`` on the positive integers with finite mean.

    ``head`` holds explicitly listed weights.  An optional ``tail`` adds an
    infinite family of weights with closed-form mass and mean.  Without a
    tail all arithmetic is exact over the rationals; with one it runs in
    mpmath at 50 significant digits.
    """

    head: Mapping[int, object]
    tail: PowerTail | GeometricTail | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        head = {int(i): (w if self.tail is not None else Fraction(w)) for i, w in self.head.items() if w != 0}
        if any(i < 1 for i in head):
            raise MeasureError("gaps must be positive integers")
        if any(w < 0 for w in head.values()):
            raise MeasureError("negative weight")
        if self.tail is not None and any(self.tail.k_of(i) is not None for i in head):
            raise MeasureError("head and tail overlap")
        object.__setattr__(self, "head", dict(sorted(head.items())))
        total = self.total()
        if self.exact:
            if total != 1:
                raise MeasureError(f"weights sum to {total}, not 1")
        else:
            with mpmath.workdps(DPS):
                if abs(total - 1) > mpmath.mpf(10) ** (-(DPS - 10)):
                    raise MeasureError(f"weights sum to {total}, not 1")

    @classmethod
    def from_weights(cls, weights: Mapping[int, object]) -> "GapDistribution":
        return cls({i: Fraction(w) for i, w in weights.items()})

    @classmethod
    def parse(cls, text: str) -> "GapDistribution":
        """Parse sparse ``index:weight`` pairs, e.g. ``"1:1/2 3:1/2"``."""
        weights = {}
        for item in text.replace(",", " ").split():
            i, w = item.split(":")
            weights[int(i)] = Fraction(w)
        return cls.from_weights(weights)

    def format(self) -> str:
        if not self.exact:
            raise MeasureError("only finitely supported rational laws serialize")
        return " ".join(f"{i}:{w}" for i, w in self.head.items())

    @property
    def exact(self) -> bool:
        return self.tail is None

    def _num(self, x):
        return x if self.exact else _mpf(x)

    def total(self):
        if self.exact:
            return sum(self.head.values(), Fraction(0))
        with mpmath.workdps(DPS):
            return mpmath.fsum([_mpf(w) for w in self.head.values()]) + self.tail.mass()

    def weight(self, i: int):
        if i in self.head:
            return self._num(self.head[i])
        if self.tail is not None:
            k = self.tail.k_of(i)
            if k is not None:
                with mpmath.workdps(DPS):
                    return self.tail.weight_k(k)
        return self._num(Fraction(0))

    def mean(self):
        """``E(p) = sum_k k p_k``."""
        if "mean" not in self._cache:
            if self.exact:
                m = sum((i * w for i, w in self.head.items()), Fraction(0))
            else:
                with mpmath.workdps(DPS):
                    m = mpmath.fsum([i * _mpf(w) for i, w in self.head.items()]) + self.tail.first_moment()
                    if not mpmath.isfinite(m):
                        raise MeasureError("gap distribution has infinite mean")
            self._cache["mean"] = m
        return self._cache["mean"]

    def max_index(self) -> int | None:
        return None if self.tail is not None else max(self.head)

    def support_form(self, t: int, L: int) -> bool:
        """Nonzero weights only at 1 and ``2t + kL + 1`` for ``k >= 1``."""
        ok = lambda i: i == 1 or (i > 2 * t + 1 and (i - 2 * t - 1) % L == 0)
        if not all(ok(i) for i in self.head):
            return False
        if self.tail is None:
            return True
        tl = self.tail
        return tl.base == 2 * t + 1 and tl.step == L and tl.start >= 1

    def tail_mass(self, m: int):
        """``P(gap > m)``."""
        with mpmath.workdps(DPS):
            return self._num(Fraction(1)) - sum((self.weight(i) for i in range(1, m + 1)), self._num(Fraction(0)))

    def excess_table(self, m_max: int) -> tuple[list, list]:
        """``T0[m] = P(gap > m)`` and ``F[m] = sum_{i>m} (i - m) p_i`` for ``m <= m_max``.

        Uses ``F[m+1] = F[m] - T0[m]`` and ``T0[m+1] = T0[m] - p_{m+1}``
        from ``F[0] = E(p)``, ``T0[0] = 1``.
        """
        with mpmath.workdps(DPS):
            T0 = [self._num(Fraction(1))]
            F = [self.mean()]
            for m in range(m_max):
                F.append(F[-1] - T0[-1])
                T0.append(T0[-1] - self.weight(m + 1))
            return T0, F

    def excess(self, m: int):
        return self.excess_table(m)[1][m]

    # sampling -----------------------------------------------------------

    def sampling_table(self, tol: float = 1e-12, cap: int = 2_000_000) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Float support, weights and size-biased weights for sampling.

        A tail is truncated once its remaining mass is below ``tol`` or
        after ``cap`` terms, whichever comes first.
        """
        if "table" in self._cache:
            return self._cache["table"]
        idx = list(self.head)
        w = [float(x) for x in self.head.values()]
        if self.tail is not None:
            tl = self.tail
            with mpmath.workdps(20):
                k_end = tl.start + 1
                while k_end - tl.start < cap and tl.mass_beyond(k_end) > tol:
                    k_end = tl.start + 2 * (k_end - tl.start)
                k_end = min(k_end, tl.start + cap)
            ks = np.arange(tl.start, k_end, dtype=np.int64)
            sc = float(tl.scale)
            if isinstance(tl, PowerTail):
                tw = sc * (ks + tl.offset).astype(float) ** (-tl.exponent)
            else:
                tw = sc * float(tl.ratio) ** ks.astype(float)
            idx = np.concatenate([np.array(idx, dtype=np.int64), tl.base + ks * tl.step])
            w = np.concatenate([np.array(w), tw])
        idx = np.asarray(idx, dtype=np.int64)
        w = np.asarray(w, dtype=float)
        order = np.argsort(idx)
        idx, w = idx[order], w[order]
        w = w / w.sum()
        sb = idx * w
        sb = sb / sb.sum()
        self._cache["table"] = (idx, np.cumsum(w), np.cumsum(sb))
        return self._cache["table"]

    def draw(self, rng: np.random.Generator, size: int, size_biased: bool = False) -> np.ndarray:
        idx, cw, csb = self.sampling_table()
        c = csb if size_biased else cw
        pos = np.searchsorted(c, rng.random(size) * c[-1], side="right")
        return idx[np.minimum(pos, len(idx) - 1)]


def eta(gaps: Iterable[int]) -> np.ndarray:
    """Concatenate the blocks ``1 0^(g-1)`` for each gap ``g``."""
    gaps = [int(g) for g in gaps]
    if not gaps:
        raise MeasureError("need at least one gap")
    if min(gaps) < 1:
        raise MeasureError("gaps must be positive")
    out = np.zeros(sum(gaps), dtype=np.int64)
    out[np.cumsum([0] + gaps[:-1])] = 1
    return out


def renewal_normalizer(p: GapDistribution):
    """``r = 1 / E(p)``; exact for rational ``p``."""
    m = p.mean()
    if p.exact:
        return 1 / m
    with mpmath.workdps(DPS):
        return 1 / m


def mu_p_cylinder(p: GapDistribution, u: Sequence[int]):
    """Exact ``mu_p``-probability of the cylinder ``[u]`` at the origin.

    With ``a`` leading zeros, inner gaps ``g_1..g_s`` between successive 1s
    and ``b`` trailing zeros::

        mu_p[u] = r * P(gap > a) * prod p_{g_i} * P(gap > b)

    and ``mu_p[0^k] = r * sum_{s>=1} s p_{k+s}`` when ``u`` has no 1.
    """
    u = [int(s) for s in u]
    if any(s not in (0, 1) for s in u):
        raise MeasureError("renewal cylinders are 0/1 words")
    r = renewal_normalizer(p)
    if not u:
        return p._num(Fraction(1))
    ones = [i for i, s in enumerate(u) if s == 1]
    with mpmath.workdps(DPS):
        if not ones:
            return r * p.excess(len(u))
        a, b = ones[0], len(u) - 1 - ones[-1]
        prob = r * p.tail_mass(a) * p.tail_mass(b)
        for i, j in zip(ones, ones[1:]):
            prob *= p.weight(j - i)
        return prob


def sample_renewal_flanked(p: GapDistribution, length: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Stationary renewal window extended to the flanking 1s.

    Returns ``(y, offset)`` where ``y[0] == y[-1] == 1`` and the stationary
    window of ``length`` symbols is ``y[offset:offset + length]``.  The block
    covering the origin is drawn size-biased with a uniform phase.
    """
    g0 = int(p.draw(rng, 1, size_biased=True)[0])
    phase = int(rng.integers(g0))
    starts = [np.array([0, g0], dtype=np.int64)]
    end = g0
    need = length - 1 + phase
    mean = float(p.mean())
    while end < need:
        batch = max(16, int(1.2 * (need - end) / mean) + 16)
        gaps = p.draw(rng, batch)
        pos = end + np.cumsum(gaps)
        starts.append(pos)
        end = int(pos[-1])
    ones = np.concatenate(starts)
    cut = np.searchsorted(ones, need, side="left")
    ones = ones[: cut + 1]
    y = np.zeros(int(ones[-1]) + 1, dtype=np.int64)
    y[ones] = 1
    return y, phase


def sample_mu_p(p: GapDistribution, length: int, seed) -> np.ndarray:
    """Stationary ``mu_p`` window of ``length`` symbols."""
    y, off = sample_renewal_flanked(p, length, as_rng(seed))
    return y[off : off + length]


@dataclass
class RenewalSampler(MeasureSampler):
    gaps: GapDistribution
    alphabet_size: int = 2

    def sample(self, length: int, seed) -> np.ndarray:
        return sample_mu_p(self.gaps, length, seed)

    def marginal(self) -> np.ndarray:
        r = float(renewal_normalizer(self.gaps))
        return np.array([1 - r, r])
