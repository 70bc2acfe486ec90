"""Overwriting construction driven by a renewal process.

Given a measure on the mixing higher-block SFT and a gap law ``p`` whose
nonzero weights sit at ``1`` and ``2t + kL + 1``, every maximal zero run of
a renewal sequence ``y`` flanked by 1s at ``a`` and ``b`` (``b - a = 2t +
kL + 1``) is replaced in ``x`` by ``v w^k v'``, where ``v``, ``v'`` are
length-``t`` connectors and ``w`` is the periodic word in block symbols.
Positions with ``y_i = 1`` keep ``x_i``.

The pair ``(x, T_y(x))`` is an explicit joining, so the disagreement
frequency bounds the d-bar distance by ``mu_p[0] = (E(p) - 1) / E(p)``.
Heavy (cubic) tails of ``p`` make the result nonadapted; this is certified
by exact lower bounds on the partial sums ``sum_k delta_k mu[w^k]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np

from .interval_maps import PeriodicPointSpec, PiecewiseMarkovMap, b_k_sequence
from .measures import (
    DPS,
    _mpf as _as_mpf,
    GapDistribution,
    MeasureSampler,
    PowerTail,
    as_rng,
    child_seeds,
    renewal_normalizer,
    sample_renewal_flanked,
)
from .sft import HigherBlockSft, Sft, StructureError, connector, is_admissible
from .tables import csv_text

__all__ = [
    "PlanError",
    "CertificateFailed",
    "OverwritePlan",
    "ConstructionAParams",
    "plan_overwrite",
    "overwrite_T_y",
    "split_seed",
    "sample_joining_A",
    "sample_nu_p",
    "NuPSampler",
    "GammaSampler",
    "gamma_push",
    "dbar_bound_A",
    "make_pK",
    "DivergenceCertificate",
    "divergence_certificate",
]


class PlanError(ValueError):
    """A zero run of ``y`` has a length outside ``{2t + kL + 1 : k >= 1}``."""


class CertificateFailed(RuntimeError):
    """The partial sums do not show logarithmic growth."""

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


@dataclass(frozen=True)
class OverwritePlan:
    """Zero runs of a finite 0/1 window.

    ``runs`` lists ``(a, b, k)``: ``a`` and ``b`` are the positions of the
    flanking 1s.  ``margin_left``/``margin_right`` count the symbols before
    the first 1 and after the last 1; those runs are cut by the window edge
    and left untouched.
    """

    length: int
    runs: tuple[tuple[int, int, int], ...]
    margin_left: int
    margin_right: int


def plan_overwrite(y: np.ndarray, t: int, L: int) -> OverwritePlan:
    y = np.asarray(y)
    ones = np.flatnonzero(y == 1)
    W = len(y)
    if len(ones) == 0:
        return OverwritePlan(W, (), W, 0)
    gaps = np.diff(ones)
    sel = gaps > 1
    a, b = ones[:-1][sel], ones[1:][sel]
    k, rem = np.divmod(b - a - 2 * t - 1, L)
    bad = (rem != 0) | (k < 1)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise PlanError(f"gap {b[i] - a[i]} at position {a[i]} is not 2t + kL + 1 with k >= 1 (t={t}, L={L})")
    runs = tuple(zip(a.tolist(), b.tolist(), k.tolist()))
    return OverwritePlan(W, runs, int(ones[0]), int(W - 1 - ones[-1]))


@dataclass
class ConstructionAParams:
    """Data of the construction on the mixing block SFT.

    ``base`` samples the measure on ``block_sft``; it may be None when only
    exact quantities (bounds, certificates) are needed.
    """

    block_sft: Sft
    gaps: GapDistribution
    w_tilde: tuple[int, ...]
    t: int
    n: int = 1
    base: MeasureSampler | None = None
    _tables: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.w_tilde = tuple(int(s) for s in self.w_tilde)
        if not self.w_tilde:
            raise ValueError("empty periodic word")
        if not is_admissible(self.w_tilde + self.w_tilde, self.block_sft):
            raise ValueError("periodic word is not admissible in the block SFT")
        if self.t < 0:
            raise ValueError("transition length must be nonnegative")
        A = self.block_sft.matrix
        power = np.linalg.matrix_power((A > 0).astype(np.int64), self.t + 1)
        if not (power > 0).all():
            raise StructureError(f"no connectors of length {self.t} in the block SFT")
        if not self.gaps.support_form(self.t, self.L):
            raise ValueError(f"gap law is not supported on 1 and 2t + kL + 1 (t={self.t}, L={self.L})")

    @property
    def L(self) -> int:
        return len(self.w_tilde)

    def connector_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """``left[s]`` joins ``s`` to ``w[0]``; ``right[s]`` joins ``w[-1]`` to ``s``."""
        if "conn" not in self._tables:
            J = self.block_sft.J
            w0, w1 = self.w_tilde[0], self.w_tilde[-1]
            left = np.array([connector(self.block_sft, s, w0, self.t) for s in range(J)], dtype=np.int64)
            right = np.array([connector(self.block_sft, w1, s, self.t) for s in range(J)], dtype=np.int64)
            self._tables["conn"] = (left.reshape(J, self.t), right.reshape(J, self.t))
        return self._tables["conn"]


def overwrite_T_y(x: np.ndarray, y: np.ndarray, params: ConstructionAParams) -> np.ndarray:
    """Apply ``T_y`` to a finite window.

    Interior runs are overwritten by ``v w^k v'``; symbols before the first
    and after the last 1 of ``y`` (the margins) are copied from ``x``.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y)
    if len(x) != len(y):
        raise ValueError("x and y must have equal length")
    t, L = params.t, params.L
    plan = plan_overwrite(y, t, L)
    z = x.copy()
    if not plan.runs:
        return z
    left, right = params.connector_tables()
    w = np.array(params.w_tilde, dtype=np.int64)
    runs = np.array(plan.runs, dtype=np.int64)
    a, b, k = runs[:, 0], runs[:, 1], runs[:, 2]
    lengths = b - a - 1
    rid = np.repeat(np.arange(len(runs)), lengths)
    starts = np.repeat(a + 1, lengths)
    pos = starts + (np.arange(lengths.sum()) - np.repeat(np.cumsum(lengths) - lengths, lengths))
    off = pos - starts
    ka = k[rid] * L
    vals = np.empty(len(pos), dtype=np.int64)
    in_left = off < t
    in_word = (off >= t) & (off < t + ka)
    in_right = ~(in_left | in_word)
    if t:
        vals[in_left] = left[x[a[rid[in_left]]], off[in_left]]
        vals[in_right] = right[x[b[rid[in_right]]], off[in_right] - t - ka[in_right]]
    vals[in_word] = w[(off[in_word] - t) % L]
    z[pos] = vals
    return z


def split_seed(seed) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """Independent child seeds for the base measure and the renewal process."""
    x_seed, y_seed = child_seeds(seed, 2)
    return x_seed, y_seed


def sample_joining_A(params: ConstructionAParams, W: int, seed) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Paired windows ``(x, T_y(x), y)`` of the joining, each of length ``W``.

    The renewal sequence is drawn out to its flanking 1s on both sides, so
    every run meeting the window is complete and no margin is lost; the
    windows are exact stationary draws.
    """
    if params.base is None:
        raise ValueError("sampling needs a base measure sampler")
    x_seed, y_seed = split_seed(seed)
    y_ext, off = sample_renewal_flanked(params.gaps, W, as_rng(y_seed))
    x_ext = params.base.sample(len(y_ext), x_seed)
    z_ext = overwrite_T_y(x_ext, y_ext, params)
    sl = slice(off, off + W)
    return x_ext[sl], z_ext[sl], y_ext[sl]


def sample_nu_p(params: ConstructionAParams, W: int, seed) -> np.ndarray:
    return sample_joining_A(params, W, seed)[1]


@dataclass
class NuPSampler(MeasureSampler):
    """Windows of the overwritten measure on block symbols."""

    params: ConstructionAParams

    def __post_init__(self):
        self.alphabet_size = self.params.block_sft.J

    def sample(self, length: int, seed) -> np.ndarray:
        return sample_nu_p(self.params, length, seed)


@dataclass
class GammaSampler(MeasureSampler):
    """Base-alphabet windows of the phase-averaged expansion of a block measure."""

    block: MeasureSampler
    hb: HigherBlockSft

    def __post_init__(self):
        self.alphabet_size = self.hb.base.J

    def sample(self, length: int, seed) -> np.ndarray:
        rng = as_rng(seed)
        n = self.hb.n
        phase = int(rng.integers(n))
        blocks = self.block.sample(-(-(length + phase) // n), rng)
        return self.hb.expand(blocks)[phase : phase + length]


def expand_pair(x: np.ndarray, z: np.ndarray, hb: HigherBlockSft, phase: int) -> tuple[np.ndarray, np.ndarray]:
    """Expand a paired block window to the base alphabet with a common phase."""
    ex, ez = hb.expand(x), hb.expand(z)
    m = len(ex) - hb.n + 1
    return ex[phase : phase + m], ez[phase : phase + m]


def gamma_push(block_estimates: dict, hb: HigherBlockSft, m: int) -> dict:
    """Base-word probabilities of length ``m`` from block-word probabilities.

    Averages the expansion of each block word over the ``n`` phases.  All
    block words in ``block_estimates`` must have the same length ``q`` with
    ``m <= q * n - n + 1``.
    """
    n = hb.n
    lengths = {len(u) for u in block_estimates}
    if len(lengths) != 1:
        raise ValueError("block words must share one length")
    q = lengths.pop()
    if m > q * n - n + 1:
        raise ValueError(f"block words of length {q} cannot cover base words of length {m}")
    out: dict = {}
    for u, prob in block_estimates.items():
        s = tuple(hb.expand(u).tolist())
        for i in range(n):
            key = s[i : i + m]
            out[key] = out.get(key, 0) + prob / n
    return out


def dbar_bound_A(p: GapDistribution):
    """``(E(p) - 1) / E(p)``, exact for rational ``p``."""
    E = p.mean()
    if p.exact:
        return (E - 1) / E
    with mpmath.workdps(DPS):
        return (E - 1) / E


def make_pK(K: int, t: int, L: int) -> GapDistribution:
    """Gap law with weight ``r`` at 1 and ``r (k+1)^-3`` at ``2t + kL + 1`` for ``k >= K``.

    ``r = (1 + sum_{i > K} i^-3)^-1`` normalizes it.  The cubic tail is kept
    exactly through Hurwitz zeta values rather than truncated.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    with mpmath.workdps(DPS):
        r = 1 / (1 + mpmath.zeta(3, K + 1))
        tail = PowerTail(scale=r, exponent=3, offset=1, start=K, base=2 * t + 1, step=L)
        return GapDistribution({1: r}, tail)


@dataclass(frozen=True)
class DivergenceCertificate:
    """Exact partial sums ``S_i = sum_{k<=i} delta_k l_k``.

    ``lower_bounds[k]`` is a lower bound for the measure of ``[w^k]``;
    ``growth`` is the least secant slope of ``S`` against ``log i`` on a
    logarithmic grid of the top decade, so ``S_hi - S_lo >= growth *
    log(hi / lo)`` holds there by construction of the grid.
    """

    k_max: int
    deltas: tuple
    lower_bounds: tuple
    partial_sums: tuple
    growth: float
    fitted: float
    grid: tuple[int, ...]

    def S(self, i: int):
        return self.partial_sums[i]

    def rows(self):
        for k in range(1, self.k_max + 1):
            yield k, self.deltas[k], self.lower_bounds[k], self.partial_sums[k]

    def to_csv(self) -> str:
        return csv_text(["k", "delta_k", "ell_k", "S_k"], self.rows())


def run_lower_bounds(p: GapDistribution, t: int, L: int, n: int, k_max: int) -> list:
    """``l_k = (r / n) sum_{j >= k} (j - k + 1) p_{2t + jL + 1}``, ``k = 0..k_max``.

    Each run carrying ``w^j`` contains ``j - k + 1`` aligned occurrences of
    ``w^k``; averaging over the ``n`` phases divides by ``n``.  For
    ``L = 1`` this is ``mu_p[0^(k+2t)] / n``.
    """
    with mpmath.workdps(DPS):
        r = mpmath.mpf(1) / _as_mpf(p.mean())
        p1 = _as_mpf(p.weight(1))
        Q0 = 1 - p1
        Q1 = (_as_mpf(p.mean()) - p1 - (2 * t + 1) * Q0) / L
        out = [mpmath.mpf(0)]
        for k in range(1, k_max + 1):
            out.append(r * Q1 / n)
            Q1 -= Q0
            Q0 -= _as_mpf(p.weight(2 * t + k * L + 1))
        return out


def divergence_certificate(
    params: ConstructionAParams,
    fmap: PiecewiseMarkovMap,
    spec: PeriodicPointSpec,
    k_max: int,
    min_growth: float = 1e-6,
    segments: int = 10,
) -> DivergenceCertificate:
    """Certify that ``sum_k delta_k mu[w^k]`` diverges logarithmically.

    Raises :class:`CertificateFailed` when ``S`` grows by no more than
    ``min_growth`` across the top decade ``[k_max / 10, k_max]``.
    """
    if spec.N != params.L * params.n:
        raise ValueError(f"period {spec.N} != L * n = {params.L} * {params.n}")
    if k_max < 10:
        raise ValueError("k_max must be at least 10")
    bks = b_k_sequence(fmap, spec, k_max)
    ell = run_lower_bounds(params.gaps, params.t, params.L, params.n, k_max)
    with mpmath.workdps(DPS):
        b = [mpmath.mpf(0)] + [-mpmath.log(mpmath.mpf(v.gap.numerator) / v.gap.denominator) for v in bks[1:]]
        deltas = [mpmath.mpf(0)] + [b[k] - b[k - 1] for k in range(1, k_max + 1)]
        S = [mpmath.mpf(0)]
        for k in range(1, k_max + 1):
            S.append(S[-1] + deltas[k] * ell[k])
        lo = k_max // 10
        grid = sorted({int(round(lo * 10 ** (j / segments))) for j in range(segments + 1)})
        slopes = [
            (S[j] - S[i]) / mpmath.log(mpmath.mpf(j) / i) for i, j in zip(grid, grid[1:])
        ]
        growth = float(min(slopes))
        ks = np.arange(lo, k_max + 1)
        fitted = float(np.polyfit(np.log(ks), np.array([float(S[k]) for k in ks]), 1)[0])
    cert = DivergenceCertificate(k_max, tuple(deltas), tuple(ell), tuple(S), growth, fitted, tuple(grid))
    if growth * math.log(10) <= min_growth:
        raise CertificateFailed(
            f"partial sums grow by {growth * math.log(10):.3g} over the top decade; "
            "the gap law's tail is too thin",
            cert,
        )
    return cert
