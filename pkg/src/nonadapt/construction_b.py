"""Safe-symbol overwriting by i.i.d. multipliers and the path of measures.

A sequence ``x`` is multiplied coordinatewise by a Bernoulli 0/1 sequence
``y``: ``(x*y)_i = x_i`` when ``y_i = 1`` and the safe symbol otherwise.
Two multiplier laws ``p`` and ``q`` are coupled by pushing the
off-diagonal mass of the product coupling onto the diagonal, which gives a
joining with disagreement at most ``|p0 - q0|``.

Convention: ``p0`` is the probability of overwriting, ``p1`` of keeping.
The path ``r -> mu_r`` uses ``p0 = r`` so that ``mu_0`` is the base measure
and ``mu_1`` the point mass on the safe symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .measures import (
    EntropyEstimate,
    MarkovMeasure,
    MarkovSampler,
    MeasureSampler,
    as_rng,
    child_seeds,
    entropy_empirical,
)
from .sft import Sft, is_safe

__all__ = [
    "ConstructionError",
    "SearchError",
    "BinaryPV",
    "CouplingMatrix",
    "psi_apply",
    "coupling_matrix",
    "sample_coupled_multipliers",
    "sample_mu_prime",
    "MuPrimeSampler",
    "sample_coupled_path",
    "dbar_bound_B",
    "DominationReport",
    "domination_check",
    "mu_prime_marginal",
    "iid_entropy",
    "TargetResult",
    "entropy_target",
]


class ConstructionError(ValueError):
    pass


class SearchError(RuntimeError):
    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class BinaryPV:
    """Probability vector ``(p0, p1)``; ``p0`` overwrites, ``p1`` keeps."""

    p0: Fraction
    p1: Fraction

    def __init__(self, p0, p1=None):
        p0 = Fraction(p0) if not isinstance(p0, float) else Fraction(p0).limit_denominator(10**15)
        p1 = 1 - p0 if p1 is None else Fraction(p1)
        if p0 < 0 or p1 < 0 or p0 + p1 != 1:
            raise ValueError(f"({p0}, {p1}) is not a probability vector")
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "p1", p1)

    def __getitem__(self, i: int) -> Fraction:
        return (self.p0, self.p1)[i]


@dataclass(frozen=True)
class CouplingMatrix:
    """Coupling ``M[i][j]`` of multipliers with row law ``p`` and column law ``q``."""

    M: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]
    p: BinaryPV
    q: BinaryPV
    e: Fraction

    @property
    def off_diagonal(self) -> Fraction:
        return self.M[0][1] + self.M[1][0]

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.M])


def coupling_matrix(p: BinaryPV, q: BinaryPV) -> CouplingMatrix:
    """Product coupling with ``e = min(p0 q1, p1 q0)`` moved onto the diagonal."""
    M = [[p[i] * q[j] for j in (0, 1)] for i in (0, 1)]
    e = min(p.p0 * q.p1, p.p1 * q.p0)
    Mt = ((M[0][0] + e, M[0][1] - e), (M[1][0] - e, M[1][1] + e))
    for i in (0, 1):
        assert sum(Mt[i]) == p[i] and Mt[0][i] + Mt[1][i] == q[i]
    return CouplingMatrix(Mt, p, q, e)


def psi_apply(x: np.ndarray, y: np.ndarray, sft: Sft | None = None, safe: int = 0) -> np.ndarray:
    """Coordinatewise product: keep ``x_i`` where ``y_i = 1``, else write ``safe``."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y)
    if len(x) != len(y):
        raise ValueError("x and y must have equal length")
    if sft is not None and not is_safe(sft, safe):
        raise ConstructionError(f"symbol {safe} is not safe; products may be inadmissible")
    return np.where(y == 1, x, safe)


def sample_coupled_multipliers(M: CouplingMatrix, length: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """I.i.d. pairs ``(y_i, z_i)`` with law ``M``."""
    rng = as_rng(seed)
    probs = M.as_array().reshape(-1)
    cells = rng.choice(4, size=length, p=probs / probs.sum())
    return (cells // 2).astype(np.int64), (cells % 2).astype(np.int64)


def _split(seed):
    return child_seeds(seed, 2)


def sample_mu_prime(nu: MeasureSampler, p: BinaryPV, length: int, seed, safe: int = 0) -> np.ndarray:
    """``x * y`` with ``x ~ nu`` and ``y`` i.i.d. Bernoulli(p), independently."""
    x_seed, y_seed = _split(seed)
    x = nu.sample(length, x_seed)
    y = (as_rng(y_seed).random(length) >= float(p.p0)).astype(np.int64)
    return psi_apply(x, y, safe=safe)


@dataclass
class MuPrimeSampler(MeasureSampler):
    nu: MeasureSampler
    p: BinaryPV
    safe: int = 0

    def __post_init__(self):
        self.alphabet_size = self.nu.alphabet_size

    def sample(self, length: int, seed) -> np.ndarray:
        return sample_mu_prime(self.nu, self.p, length, seed, self.safe)

    def marginal(self) -> np.ndarray | None:
        base = self.nu.marginal()
        return None if base is None else mu_prime_marginal(base, self.p, self.safe)


def sample_coupled_path(
    nu: MeasureSampler, p: BinaryPV, q: BinaryPV, length: int, seed, safe: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Paired windows ``(x*y, x*z)`` of the joining of the two overwritten measures."""
    x_seed, y_seed = _split(seed)
    x = nu.sample(length, x_seed)
    y, z = sample_coupled_multipliers(coupling_matrix(p, q), length, y_seed)
    return psi_apply(x, y, safe=safe), psi_apply(x, z, safe=safe)


def dbar_bound_B(p: BinaryPV, q: BinaryPV) -> Fraction:
    return abs(p.p0 - q.p0)


def mu_prime_marginal(base: np.ndarray, p: BinaryPV, safe: int = 0) -> np.ndarray:
    """1-block law after overwriting: ``P(a) = pi_a p1`` plus ``p0`` on the safe symbol."""
    out = np.asarray(base, dtype=float) * float(p.p1)
    out[safe] += float(p.p0)
    return out


def _zero_run_prob(m: MarkovMeasure, weights: np.ndarray, k: int) -> float:
    """``sum_x m(x) prod_i weights[x_i]`` over words of length ``k`` (transfer matrix)."""
    v = m.stationary * weights
    for _ in range(k - 1):
        v = (v @ m.P) * weights
    return float(v.sum())


@dataclass(frozen=True)
class DominationReport:
    """``mu'[s^k] >= nu[s^k]`` for the safe symbol ``s`` and ``k <= k_max``."""

    k_max: int
    base: tuple[float, ...]
    overwritten: tuple[float, ...]
    exact: bool
    holds: bool
    nonadapted: bool | None


def domination_check(
    nu: MarkovMeasure | MeasureSampler,
    p: BinaryPV,
    k_max: int,
    safe: int = 0,
    base_nonadapted: bool | None = None,
    n: int = 200_000,
    seed=0,
) -> DominationReport:
    """Compare cylinder probabilities of runs of the safe symbol.

    Exact for Markov ``nu`` (transfer matrices); otherwise empirical with a
    three-sigma allowance.  When ``base_nonadapted`` is known, the report
    propagates it: domination of every run cylinder carries nonadaptedness
    over to the overwritten measure.
    """
    if isinstance(nu, MarkovMeasure):
        ind = np.zeros(nu.J)
        ind[safe] = 1.0
        wts = float(p.p0) + float(p.p1) * ind
        base = [_zero_run_prob(nu, ind, k) for k in range(1, k_max + 1)]
        over = [_zero_run_prob(nu, wts, k) for k in range(1, k_max + 1)]
        holds = all(o >= b - 1e-15 for o, b in zip(over, base))
        exact = True
    else:
        x = nu.sample(n, seed)
        xp = sample_mu_prime(nu, p, n, seed, safe)

        def freqs(w):
            out = []
            run = (w == safe).astype(np.int64)
            for k in range(1, k_max + 1):
                hits = np.convolve(run, np.ones(k, dtype=np.int64), "valid") == k
                out.append(float(hits.mean()))
            return out

        base, over = freqs(x), freqs(xp)
        holds = all(o >= b - 3 * math.sqrt(max(b, 1 / n) / n) for o, b in zip(over, base))
        exact = False
    nonadapted = None if base_nonadapted is None else bool(base_nonadapted and holds)
    return DominationReport(k_max, tuple(base), tuple(over), exact, holds, nonadapted)


def iid_entropy(marginal) -> float:
    m = np.asarray(marginal, dtype=float)
    m = m[m > 0]
    return float(-(m * np.log(m)).sum())


@dataclass(frozen=True)
class TargetResult:
    r: float
    entropy: float
    band: float
    trace: tuple[tuple[float, float], ...]
    sampler: MeasureSampler


def entropy_target(
    nu: MeasureSampler,
    h_target: float,
    tol: float = 0.01,
    entropy_of: Callable[[float], float | EntropyEstimate] | None = None,
    n: int = 1_000_000,
    seed=0,
    max_iter: int = 60,
    safe: int = 0,
) -> TargetResult:
    """Find ``r`` with the entropy of ``mu_r`` within ``tol`` of ``h_target``.

    ``entropy_of(r)`` defaults to the closed-form i.i.d. entropy when ``nu``
    is Bernoulli (overwriting keeps the coordinates independent), and to the
    plug-in estimator run with a fixed seed otherwise, so the search always
    sees a deterministic function of ``r``.  Bisection
    keeps a bracket ``h(lo) >= h_target >= h(hi)`` and needs no
    monotonicity: the intermediate value theorem supplies a root in any
    bracket.
    """
    bernoulli = isinstance(nu, MarkovSampler) and nu.measure.is_bernoulli
    if entropy_of is None and bernoulli:

        def entropy_of(r):
            return iid_entropy(mu_prime_marginal(nu.marginal(), BinaryPV(r), safe))

    elif entropy_of is None:

        def entropy_of(r):
            return entropy_empirical(MuPrimeSampler(nu, BinaryPV(r), safe), n=n, seed=seed)

    cache: dict[float, tuple[float, float]] = {}

    def h(r):
        if r not in cache:
            v = entropy_of(r)
            cache[r] = (v.value, v.band) if isinstance(v, EntropyEstimate) else (float(v), 0.0)
        return cache[r]

    trace = []

    def done(r):
        val, band = h(r)
        return TargetResult(r, val, band, tuple(trace), MuPrimeSampler(nu, BinaryPV(r), safe))

    lo, hi = 0.0, 1.0
    h_lo, h_hi = h(lo)[0], h(hi)[0]
    trace += [(lo, h_lo), (hi, h_hi)]
    if abs(h_lo - h_target) <= tol:
        return done(lo)
    if abs(h_hi - h_target) <= tol:
        return done(hi)
    if not h_hi <= h_target <= h_lo:
        raise SearchError(f"target {h_target} not bracketed by [{h_hi}, {h_lo}]", trace)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        hm = h(mid)[0]
        trace.append((mid, hm))
        if abs(hm - h_target) <= tol / 2:
            return done(mid)
        if hm > h_target:
            lo = mid
        else:
            hi = mid
    raise SearchError(f"no r found within {max_iter} bisection steps", trace)
