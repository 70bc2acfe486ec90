"""Piecewise-affine expanding Markov interval maps and their symbolic coding.

Branch ``i`` is the affine map ``x -> slope[i] * x + intercept[i]`` on
``[x_i, x_{i+1})``.  All data are exact rationals, so the Markov property,
right-periodicity and cylinder projections are decided exactly.

The point ``c`` is tracked through one-sided limits: a state ``(y, +1)``
stands for points just to the right of ``y``, ``(y, -1)`` for points just
to the left.  A decreasing branch flips the side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

import mpmath
import numpy as np
import yaml

from .sft import Sft, SftError, is_admissible

__all__ = [
    "MapError",
    "NotPeriodicError",
    "PiecewiseMarkovMap",
    "PeriodicPointSpec",
    "IntervalEnclosure",
    "derive_sft",
    "verify_right_periodic",
    "project_cylinder",
    "b_value",
    "b_m_value",
    "b_k_value",
    "b_k_sequence",
    "load_map",
    "parse_map",
]


class MapError(ValueError):
    """Malformed interval map, or a non-Markov branch image."""


class NotPeriodicError(MapError):
    """``c`` fails the right-periodicity conditions; ``condition`` says which (1-3)."""

    def __init__(self, condition: int, message: str):
        super().__init__(f"condition ({condition}) fails: {message}")
        self.condition = condition


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x)) if isinstance(x, str) else Fraction(x)


@dataclass(frozen=True)
class IntervalEnclosure:
    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("empty enclosure")

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def __contains__(self, x) -> bool:
        return self.lower <= x <= self.upper


@dataclass(frozen=True)
class PiecewiseMarkovMap:
    """Expanding piecewise-affine Markov map of ``[0, 1]``.

    ``breakpoints`` are ``0 = x_0 < ... < x_J = 1``; ``slopes`` and
    ``intercepts`` have one entry per branch.  Construction checks
    expansion and the Markov property; the derived SFT must be transitive.
    """

    breakpoints: tuple[Fraction, ...]
    slopes: tuple[Fraction, ...]
    intercepts: tuple[Fraction, ...]

    def __init__(self, breakpoints, slopes, intercepts):
        bp = tuple(_q(x) for x in breakpoints)
        s = tuple(_q(x) for x in slopes)
        c = tuple(_q(x) for x in intercepts)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "slopes", s)
        object.__setattr__(self, "intercepts", c)
        if len(bp) < 2 or bp[0] != 0 or bp[-1] != 1:
            raise MapError("breakpoints must run from 0 to 1")
        if any(a >= b for a, b in zip(bp, bp[1:])):
            raise MapError("breakpoints must be strictly increasing")
        if len(s) != self.J or len(c) != self.J:
            raise MapError("need one slope and one intercept per branch")
        if any(abs(si) <= 1 for si in s):
            raise MapError("every branch must be expanding (|slope| > 1)")
        for i in range(self.J):
            lo, hi = self.image(i)
            if lo not in bp or hi not in bp:
                raise MapError(f"branch {i} image [{lo}, {hi}] is not a union of partition intervals")
        if not derive_sft(self).is_transitive:
            raise MapError("coded SFT is not transitive")

    @property
    def J(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def expansion(self) -> Fraction:
        """The expansion constant: least absolute slope."""
        return min(abs(s) for s in self.slopes)

    def interval(self, i: int) -> IntervalEnclosure:
        return IntervalEnclosure(self.breakpoints[i], self.breakpoints[i + 1])

    def branch(self, i: int, x) -> Fraction:
        return self.slopes[i] * x + self.intercepts[i]

    def inverse_branch(self, i: int, y) -> Fraction:
        return (y - self.intercepts[i]) / self.slopes[i]

    def image(self, i: int) -> tuple[Fraction, Fraction]:
        a = self.branch(i, self.breakpoints[i])
        b = self.branch(i, self.breakpoints[i + 1])
        return (a, b) if a <= b else (b, a)

    def branch_index(self, x, side: int = 1) -> int:
        """Branch containing points just right (side=+1) or left (-1) of ``x``."""
        x = _q(x)
        bp = self.breakpoints
        if side > 0:
            if not 0 <= x < 1:
                raise MapError(f"no branch to the right of {x}")
            return max(i for i in range(self.J) if bp[i] <= x)
        if not 0 < x <= 1:
            raise MapError(f"no branch to the left of {x}")
        return min(i for i in range(self.J) if bp[i + 1] >= x)

    def __call__(self, x) -> Fraction:
        x = _q(x)
        return self.branch(self.branch_index(x, 1 if x < 1 else -1), x)

    def one_sided_step(self, y: Fraction, side: int) -> tuple[int, Fraction, int]:
        """Image of the one-sided limit state ``(y, side)``: (branch, y', side')."""
        i = self.branch_index(y, side)
        return i, self.branch(i, y), side if self.slopes[i] > 0 else -side

    def itinerary(self, x, length: int) -> list[int]:
        """Branch indices visited by the exact forward orbit of ``x``."""
        x = _q(x)
        out = []
        for _ in range(length):
            i = self.branch_index(x, 1 if x < 1 else -1)
            out.append(i)
            x = self.branch(i, x)
        return out


def derive_sft(fmap: PiecewiseMarkovMap) -> Sft:
    """Markov adjacency: ``a_ij = 1`` iff branch ``i`` covers interval ``j``."""
    A = []
    bp = fmap.breakpoints
    for i in range(fmap.J):
        lo, hi = fmap.image(i)
        if lo not in bp or hi not in bp:
            raise MapError(f"branch {i} image is not a union of partition intervals")
        A.append([1 if lo <= bp[j] and bp[j + 1] <= hi else 0 for j in range(fmap.J)])
    return Sft(A)


@dataclass(frozen=True)
class PeriodicPointSpec:
    """A right-periodic point ``c`` with coding word ``w`` of minimal period ``N``."""

    c: Fraction
    N: int
    w: tuple[int, ...]
    ell: Fraction

    @property
    def first_symbol(self) -> int:
        return self.w[0]


def verify_right_periodic(fmap: PiecewiseMarkovMap, c, N: int | None = None) -> PeriodicPointSpec:
    """Check that ``c`` is right periodic and return its minimal period and word.

    With ``N`` given, also require the minimal period to equal ``N``.
    The right orbit of ``c`` lives in the finite set of (breakpoint, side)
    states, so the search terminates after at most ``2 * (J + 1)`` steps.
    """
    c = _q(c)
    bp = fmap.breakpoints
    if c not in bp or c == 1:
        raise MapError(f"{c} is not the left endpoint of a partition interval")
    i0 = bp.index(c)
    ell = bp[i0 + 1] - c
    y, side = c, 1
    word = []
    failure = None
    for step in range(1, 2 * (fmap.J + 1) + 1):
        i, y, side = fmap.one_sided_step(y, side)
        word.append(i)
        if y == c:
            if side > 0:
                # f^step maps (c, c+delta) into (c, c+ell) for small delta
                spec = PeriodicPointSpec(c=c, N=step, w=tuple(word), ell=ell)
                if N is not None and N != step:
                    raise NotPeriodicError(3, f"least period is {step}, not {N}")
                return spec
            failure = failure or NotPeriodicError(2, f"f^{step} returns to {c} from the left")
        if y not in bp:
            break
    if failure is not None:
        raise failure
    raise NotPeriodicError(1, f"the right orbit of {c} never returns to {c}")


def project_cylinder(fmap: PiecewiseMarkovMap, u: Sequence[int], sft: Sft | None = None) -> IntervalEnclosure:
    """Closure of the set of points whose itinerary begins with ``u``.

    Computed by pulling the last symbol's interval back through the
    inverse branches; the result has width at most ``expansion ** -len(u)``.
    """
    sft = sft or derive_sft(fmap)
    if not is_admissible(u, sft):
        raise SftError(f"word {tuple(u)} is not admissible")
    if len(u) == 0:
        return IntervalEnclosure(Fraction(0), Fraction(1))
    lo, hi = fmap.breakpoints[u[-1]], fmap.breakpoints[u[-1] + 1]
    for s in reversed(u[:-1]):
        a, b = fmap.inverse_branch(s, lo), fmap.inverse_branch(s, hi)
        lo, hi = (a, b) if a <= b else (b, a)
    return IntervalEnclosure(lo, hi)


def b_value(spec: PeriodicPointSpec, x) -> float:
    """``|log(x - c)|`` on ``(c, c + ell)``, 0 elsewhere, ``+inf`` at ``c``."""
    x = _q(x)
    if x == spec.c:
        return math.inf
    if spec.c < x < spec.c + spec.ell:
        return abs(_log_rational(x - spec.c))
    return 0.0


def b_m_value(spec: PeriodicPointSpec, m, x) -> float:
    """Truncation of ``b`` at height ``log m``.

    ``log m`` on ``[c, c + 1/m]``, ``-log(x - c)`` on ``[c + 1/m, c + ell)``,
    0 elsewhere.  Requires ``1/m <= ell``.
    """
    m = _q(m)
    if m <= 0 or 1 / m > spec.ell:
        raise MapError(f"m = {m} too small: need 1/m <= ell = {spec.ell}")
    x = _q(x)
    if spec.c <= x <= spec.c + 1 / m and x < spec.c + spec.ell:
        return _log_rational(m)
    if spec.c + 1 / m < x < spec.c + spec.ell:
        return -_log_rational(x - spec.c)
    return 0.0


def _log_rational(q: Fraction) -> float:
    # math.log accepts arbitrarily large ints, so no overflow for huge denominators
    return math.log(q.numerator) - math.log(q.denominator)


def _log_enclosure(q: Fraction) -> tuple[float, float]:
    """Outward-rounded bounds on ``log q`` via mpmath interval arithmetic."""
    iv = mpmath.iv
    saved, iv.prec = iv.prec, 80
    try:
        val = iv.log(iv.mpf(q.numerator) / iv.mpf(q.denominator))
        # float() rounds to nearest; step outward by one ulp to stay rigorous
        return (
            math.nextafter(float(val.a), -math.inf),
            math.nextafter(float(val.b), math.inf),
        )
    finally:
        iv.prec = saved


def _power_cylinders(fmap: PiecewiseMarkovMap, spec: PeriodicPointSpec) -> Iterator[IntervalEnclosure]:
    """``D_k`` for ``k = 1, 2, ...``, computed incrementally.

    ``D_{k+1}`` is the pull-back of ``D_k`` along the inverse branches
    of ``w``, which keeps exact arithmetic linear in ``k``.
    """
    D = project_cylinder(fmap, spec.w)
    while True:
        yield D
        lo, hi = D.lower, D.upper
        for s in reversed(spec.w):
            a, b = fmap.inverse_branch(s, lo), fmap.inverse_branch(s, hi)
            lo, hi = (a, b) if a <= b else (b, a)
        D = IntervalEnclosure(lo, hi)


@dataclass(frozen=True)
class BkValue:
    k: int
    b_k: float
    delta_k: float
    lower: float
    upper: float
    gap: Fraction | None = None  # R_k - c, exact


def b_k_sequence(fmap: PiecewiseMarkovMap, spec: PeriodicPointSpec, k_max: int) -> list[BkValue]:
    """``b_k`` and increments ``delta_k = b_k - b_{k-1}`` for ``k = 0..k_max``.

    ``D_k`` is ``[c, R_k]`` exactly; ``b`` decreases in ``x - c``, so the
    minimum over ``D_k`` (taken on the open interval ``(c, c + ell)``) is
    ``|log(R_k - c)|``.  ``lower``/``upper`` are a rigorous enclosure.
    """
    out = [BkValue(0, 0.0, 0.0, 0.0, 0.0)]
    if k_max < 1:
        return out
    prev = 0.0
    for k, D in enumerate(_power_cylinders(fmap, spec), start=1):
        if D.lower != spec.c:
            raise MapError("D_k does not have c as its left endpoint")
        gap = D.upper - spec.c
        lo, hi = _log_enclosure(gap)
        bk = -_log_rational(gap)
        out.append(BkValue(k, bk, bk - prev, -hi, -lo, gap))
        prev = bk
        if k == k_max:
            break
    return out


def b_k_value(fmap: PiecewiseMarkovMap, spec: PeriodicPointSpec, k: int) -> tuple[float, float]:
    """``(b_k, delta_k)`` with ``b_0 = 0``."""
    if k < 0:
        raise MapError("k must be nonnegative")
    v = b_k_sequence(fmap, spec, k)[k]
    return v.b_k, v.delta_k


def float_branches(fmap: PiecewiseMarkovMap) -> tuple[np.ndarray, np.ndarray]:
    """Inverse-branch coefficients ``x = A[s] * y + B[s]`` in floating point."""
    A = np.array([float(1 / s) for s in fmap.slopes])
    B = np.array([float(-b / s) for s, b in zip(fmap.slopes, fmap.intercepts)])
    return A, B


def project_window(fmap: PiecewiseMarkovMap, window: np.ndarray, depth: int = 40) -> np.ndarray:
    """Floating-point points coded by each position of ``window``.

    Position ``i`` is mapped to the midpoint of the depth-``depth`` cylinder
    ``window[i:i+depth]``; the last ``depth - 1`` positions are dropped.
    """
    window = np.asarray(window, dtype=np.int64)
    n = len(window) - depth + 1
    if n <= 0:
        raise ValueError("window shorter than projection depth")
    A, B = float_branches(fmap)
    bp = np.array([float(b) for b in fmap.breakpoints])
    last = window[depth - 1 : depth - 1 + n]
    x = 0.5 * (bp[last] + bp[last + 1])
    for j in range(depth - 2, -1, -1):
        s = window[j : j + n]
        x = A[s] * x + B[s]
    return x


def parse_map(data: dict) -> tuple[PiecewiseMarkovMap, Fraction | None]:
    """Build a map from a parsed description; returns (map, declared c or None)."""
    try:
        fmap = PiecewiseMarkovMap(
            [Fraction(str(x)) for x in data["breakpoints"]],
            [Fraction(str(x)) for x in data["slopes"]],
            [Fraction(str(x)) for x in data["intercepts"]],
        )
    except KeyError as exc:
        raise MapError(f"map description lacks {exc}") from None
    c = data.get("periodic_point")
    return fmap, (None if c is None else Fraction(str(c)))


def load_map(path: str | Path) -> tuple[PiecewiseMarkovMap, Fraction | None]:
    """Read a YAML map file with rational strings such as ``"1/3"``."""
    with open(path) as fh:
        return parse_map(yaml.safe_load(fh))
