"""Metric Diophantine approximation experiments on missing-digit measures.

Approximation sets are unions of rectangles around the points ``(a + y)/n``.
Their measures are computed exactly with the box measures of
:mod:`digitfrac.systems`; Monte Carlo probes use sampled points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from ._parallel import ordered_map
from .errors import BadFamilyParams, PsiTooLarge
from .systems import (
    Box,
    DigitSystem,
    KernelAutomaton,
    box_measure,
    interval_measure_1d,
    marginals,
    sample_numerators,
)

N1_CLIP = 1e-9
HALF_CLIP = Fraction(1, 2) - Fraction(1, 10**9)
FAMILIES = ("power_t", "power_log_sim", "power_log_mult", "constant")


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    return Fraction(repr(float(v)))


@dataclass(frozen=True)
class ApproxFunction:
    """A named non-increasing approximation function ``psi``.

    power_t: ``n^-t``; power_log_sim: ``(n log^2 n)^(-1/k)``;
    power_log_mult: ``(n log^(k+1) n)^-1``; constant: ``c``.
    """

    family: str
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if self.family not in FAMILIES:
            raise BadFamilyParams(f"unknown family {self.family!r}")
        if len(self.params) != 1:
            raise BadFamilyParams(f"{self.family} takes exactly one parameter")
        p = self.params[0]
        if self.family == "power_t" and p < 0:
            raise BadFamilyParams("t must be >= 0")
        if self.family in ("power_log_sim", "power_log_mult") and (int(p) != p or p < 1):
            raise BadFamilyParams("k must be a positive integer")
        if self.family == "constant" and not (0 <= p < 1):
            raise BadFamilyParams("constant must lie in [0, 1)")

    @classmethod
    def parse(cls, text: str) -> "ApproxFunction":
        """``family:param``, e.g. ``power_t:2`` or ``constant:0.3``."""
        try:
            name, raw = text.split(":", 1)
            return cls(name.strip(), (float(raw),))
        except ValueError as exc:
            raise BadFamilyParams(f"bad psi spec {text!r}") from exc

    def describe(self) -> str:
        return f"{self.family}:{self.params[0]:g}"


def psi_eval(f: ApproxFunction, n: int) -> float:
    """``psi(n)``; at ``n = 1`` the value is clipped to ``1 - 1e-9``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = float(f.params[0])
    if f.family == "constant":
        v = p
    elif f.family == "power_t":
        v = float(n) ** -p
    elif n == 1:
        v = math.inf
    elif f.family == "power_log_sim":
        v = (n * math.log(n) ** 2) ** (-1.0 / p)
    else:
        v = 1.0 / (n * math.log(n) ** (p + 1))
    if n == 1:
        v = min(v, 1.0 - N1_CLIP)
    return v


def psi_exact(f: ApproxFunction, n: int) -> Fraction:
    """Rational value of ``psi(n)``: exact for integer powers and constants."""
    p = f.params[0]
    if f.family == "power_t" and float(p).is_integer():
        v = Fraction(1, n ** int(p))
        return min(v, Fraction(1) - _frac(N1_CLIP)) if n == 1 else v
    if f.family == "constant":
        return _frac(p)
    return _frac(psi_eval(f, n))


def _clipped(f: ApproxFunction, n: int, clip: bool) -> Fraction:
    v = psi_exact(f, n)
    if v >= Fraction(1, 2):
        if not clip:
            raise PsiTooLarge(f"psi({n}) = {float(v)} >= 1/2")
        v = HALF_CLIP
    return v


def _dist_int(v: Fraction) -> Fraction:
    return abs(v - math.floor(v + Fraction(1, 2)))


# ----------------------------------------------------------------------- hit detection


@dataclass(frozen=True)
class HitRecord:
    n: int
    witnesses: tuple
    value: float


def hits(x, y, f: ApproxFunction, N0: int, N1: int, mode: str = "sim") -> list:
    """All ``n`` in ``[N0, N1]`` with ``max_j`` (sim) or ``prod_j`` (mult) of
    ``||n x_j - y_j||`` strictly below ``psi(n)``."""
    if N0 > N1:
        raise ValueError("need N0 <= N1")
    if mode not in ("sim", "mult"):
        raise ValueError(f"mode must be 'sim' or 'mult', not {mode!r}")
    x = [_frac(v) for v in np.atleast_1d(np.asarray(x, dtype=object))]
    y = [_frac(v) for v in np.atleast_1d(np.asarray(y, dtype=object))]
    if len(y) == 1 and len(x) > 1:
        y = y * len(x)
    out = []
    for n in range(max(1, N0), N1 + 1):
        psi = psi_exact(f, n)
        t = [n * xj - yj for xj, yj in zip(x, y)]
        d = [_dist_int(v) for v in t]
        value = max(d) if mode == "sim" else math.prod(d, start=Fraction(1))
        if value < psi:
            wit = tuple(int(math.floor(v + Fraction(1, 2))) for v in t)
            out.append(HitRecord(n, wit, float(value)))
    return out


# ----------------------------------------------------------- bands on the unit interval


def band(n: int, y: Fraction, hi: Fraction, lo: Fraction = None, lo_closed: bool = False) -> list:
    """Intervals of ``{x in [0,1]: lo <(=) ||n x - y|| < hi}`` as ``(lo, hi, cl, ch)`` tuples.

    ``lo=None`` drops the lower condition.
    """
    half = Fraction(1, 2)
    if hi <= 0 or (lo is not None and (lo > half or (lo == half and not lo_closed))):
        return []
    if lo is not None and lo >= hi:
        return []
    y = _frac(y)
    # pieces of u = t - a in [-1/2, 1/2)
    wide = hi > half
    if lo is None or lo == 0 and lo_closed:
        pieces = [(-half if wide else -hi, half if wide else hi, wide, False)]
    else:
        top = half if wide else hi
        pieces = [
            (-top, -lo, wide, lo_closed),
            (lo, top, lo_closed, False),
        ]
    out = []
    a_lo = math.floor(-1 - y) - 1
    a_hi = math.ceil(n + 1 - y) + 1
    for a in range(a_lo, a_hi + 1):
        for u0, u1, c0, c1 in pieces:
            x0, x1 = (a + y + u0) / n, (a + y + u1) / n
            if x1 < 0 or x0 > 1:
                continue
            if x0 < 0:
                x0, c0 = Fraction(0), True
            if x1 > 1:
                x1, c1 = Fraction(1), True
            if x0 > x1 or (x0 == x1 and not (c0 and c1)):
                continue
            out.append((x0, x1, c0, c1))
    return out


def _set_measure(sys: DigitSystem, coord_sets: Sequence[list]) -> Fraction:
    """``mu`` of a product over coordinates of disjoint interval unions."""
    if any(not s for s in coord_sets):
        return Fraction(0)
    margs = marginals(sys)
    if margs is not None:
        out = Fraction(1)
        for m, ivs in zip(margs, coord_sets):
            out *= sum((interval_measure_1d(m, *iv) for iv in ivs), Fraction(0))
            if out == 0:
                break
        return out
    total = Fraction(0)
    for combo in itertools.product(*coord_sets):
        total += box_measure(sys, Box(tuple(c[0] for c in combo), tuple(c[1] for c in combo),
                                      tuple(c[2] for c in combo), tuple(c[3] for c in combo)))
    return total


def _reduce_y(y, k: int) -> list:
    ys = [_frac(v) for v in np.atleast_1d(np.asarray(y if y is not None else 0, dtype=object))]
    if len(ys) == 1 and k > 1:
        ys = ys * k
    if len(ys) != k:
        raise ValueError(f"shift y must have {k} coordinates")
    return [v - math.floor(v) for v in ys]


@dataclass
class SumSeries:
    """Per-``n`` exact terms and running sums, starting at ``n_start``."""

    ns: list
    terms: list
    partial: list
    meta: dict = field(default_factory=dict)

    def rows(self):
        for n, t, s in zip(self.ns, self.terms, self.partial):
            yield n, t, s


def _series(ns, terms, meta) -> SumSeries:
    return SumSeries(list(ns), list(terms), list(itertools.accumulate(terms)), meta)


def measure_A_n(sys: DigitSystem, f: ApproxFunction, y, n: int, clip: bool = True) -> Fraction:
    """``mu{x : max_j ||n x_j - y_j|| < psi(n)}``."""
    ys = _reduce_y(y, sys.dim)
    psi = _clipped(f, n, clip)
    return _set_measure(sys, [band(n, yj, psi) for yj in ys])


def khinchin_sum_mu(sys: DigitSystem, f: ApproxFunction, y, N: int, clip: bool = True,
                    threads=None) -> SumSeries:
    """Exact ``mu(A_n)`` for ``2 <= n <= N`` and their running sums."""
    ns = range(2, N + 1)
    terms = ordered_map(lambda n: measure_A_n(sys, f, y, n, clip), ns, threads)
    return _series(ns, terms, {"n_start": 2, "psi_clip": str(HALF_CLIP) if clip else "none"})


def khinchin_sum_lebesgue(f: ApproxFunction, k: int, N: int) -> SumSeries:
    """Running sums of ``(2 psi(n))^k``; ``n = 1`` uses the clipped value."""
    ns = range(1, N + 1)
    terms = [(2 * psi_eval(f, n)) ** k for n in ns]
    return SumSeries(list(ns), terms, list(itertools.accumulate(terms)),
                     {"n_start": 1, "n1_clip": N1_CLIP})


# ------------------------------------------------------------------ dyadic sandwich


@dataclass(frozen=True)
class RectFamily:
    """Rectangles ``A_n(d)`` (kind 'box') or shells ``A_n^o(d)`` (kind 'shell')."""

    m: int
    kind: str
    shapes: tuple
    dyadic_sides: tuple = ()

    def side_products(self) -> list:
        return [math.prod(s, start=Fraction(1)) for s in self.shapes]


def dyadic_range(psi_prev: Fraction, m: int) -> list:
    """Sides ``2^-i`` with ``psi(2^(m-1))/2^(m-1) <= 2^-i <= 2^-(m-1)``."""
    if psi_prev <= 0:
        return []
    floor_side = psi_prev / 2 ** (m - 1)
    out = []
    i = m - 1
    while Fraction(1, 2**i) >= floor_side:
        out.append(Fraction(1, 2**i))
        i += 1
    return out


def dyadic_sandwich(f: ApproxFunction, m: int, k: int, y=None, clip: bool = True):
    """Shell family (lower) and box family (upper) around ``A_n^x`` for ``n`` in
    ``[2^(m-1), 2^m)``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    psi_m = _clipped(f, 2**m, clip)
    psi_prev = _clipped(f, 2 ** (m - 1), clip)
    if k == 1:
        lower = ((psi_m / 2**m,),) if psi_m > 0 else ()
        upper = ((psi_prev / 2 ** (m - 1),),) if psi_prev > 0 else ()
        return RectFamily(m, "shell", lower), RectFamily(m, "box", upper)
    sides = dyadic_range(psi_prev, m)
    lower, upper = [], []
    for combo in itertools.product(sides, repeat=k - 1):
        prod = math.prod(combo, start=Fraction(1))
        if psi_m > 0:
            lower.append(combo + (psi_m / (2 ** (k * m) * prod),))
        upper.append(combo + (2 ** (k - 1) * psi_prev / (2 ** (k * (m - 1)) * prod),))
    return (RectFamily(m, "shell", tuple(lower), tuple(sides)),
            RectFamily(m, "box", tuple(upper), tuple(sides)))


def _lower_measure(sys, fam: RectFamily, n: int, ys) -> Fraction:
    total = Fraction(0)
    for shape in fam.shapes:
        sets = [band(n, yj, n * d, n * d / 2, False) for d, yj in zip(shape, ys)]
        total += _set_measure(sys, sets)
    return total


def _upper_measure(sys, fam: RectFamily, n: int, ys) -> Fraction:
    """``mu`` of the union of upper boxes via a disjoint split on the first k-1 coordinates.

    For ``j < k`` the coordinate falls in exactly one dyadic shell
    ``[n h/2, n h)`` (or ``[0, n h_min)``); within it the union's last side is the
    one attached to the smallest admissible ``h``.
    """
    k = sys.dim
    if k == 1:
        return sum((_set_measure(sys, [band(n, ys[0], n * s[0])]) for s in fam.shapes),
                   Fraction(0))
    sides = fam.dyadic_sides
    if not sides:
        return Fraction(0)
    h_min = sides[-1]
    shells = {}
    for h in sides:
        shells[h] = {}
        for j in range(k - 1):
            if h == h_min:
                shells[h][j] = band(n, ys[j], n * h)
            else:
                shells[h][j] = band(n, ys[j], n * h, n * h / 2, True)
    total = Fraction(0)
    for shape in fam.shapes:
        combo, last = shape[:-1], shape[-1]
        sets = [shells[h][j] for j, h in enumerate(combo)]
        sets.append(band(n, ys[-1], n * last))
        total += _set_measure(sys, sets)
    return total


@dataclass
class GallagherSeries:
    ns: list
    lower_terms: list
    upper_terms: list
    lower: list
    upper: list
    meta: dict = field(default_factory=dict)


def gallagher_terms(sys: DigitSystem, f: ApproxFunction, y, n: int, clip: bool = True):
    """``(mu(B_n), mu(C_n))`` for one ``n``; in dimension one both equal ``mu(A_n)``."""
    ys = _reduce_y(y, sys.dim)
    if sys.dim == 1:
        v = measure_A_n(sys, f, ys, n, clip)
        return v, v
    m = n.bit_length()
    low, up = dyadic_sandwich(f, m, sys.dim, ys, clip)
    return _lower_measure(sys, low, n, ys), _upper_measure(sys, up, n, ys)


def gallagher_sum_mu(sys: DigitSystem, f: ApproxFunction, y, N: int, clip: bool = True,
                     threads=None) -> GallagherSeries:
    ns = list(range(2, N + 1))
    pairs = ordered_map(lambda n: gallagher_terms(sys, f, y, n, clip), ns, threads)
    lo = [p[0] for p in pairs]
    hi = [p[1] for p in pairs]
    return GallagherSeries(ns, lo, hi, list(itertools.accumulate(lo)),
                           list(itertools.accumulate(hi)),
                           {"n_start": 2, "psi_clip": str(HALF_CLIP) if clip else "none"})


def sandwich_indicators(points: np.ndarray, n: int, f: ApproxFunction, y=None, clip: bool = True):
    """Pointwise membership in ``B_n``, ``A_n^x`` and ``C_n`` for rows of ``points``."""
    points = np.asarray(points, dtype=float)
    k = points.shape[1]
    ys = np.array([float(v) for v in _reduce_y(y, k)])
    t = n * points - ys
    v = np.abs(t - np.round(t))
    psi = float(_clipped(f, n, clip))
    in_a = np.prod(v, axis=1) < psi
    low, up = dyadic_sandwich(f, n.bit_length(), k, ys, clip)
    in_b = np.zeros(len(points), dtype=bool)
    in_c = np.zeros(len(points), dtype=bool)
    for shape in low.shapes:
        d = n * np.array([float(s) for s in shape])
        in_b |= np.all((v > d / 2) & (v < d), axis=1)
    for shape in up.shapes:
        d = n * np.array([float(s) for s in shape])
        in_c |= np.all(v < d, axis=1)
    return in_b, in_a, in_c


# ------------------------------------------------------------------- Monte Carlo probes


@dataclass(frozen=True)
class LimsupResult:
    N0: int
    N1: int
    fraction: float
    ci_lo: float
    ci_hi: float
    hits: int
    samples: int
    depth: int

    @property
    def sigma(self) -> float:
        p = self.fraction
        return math.sqrt(max(p * (1 - p), 0.0) / self.samples)


def default_depth(sys: DigitSystem, N1: int) -> int:
    """Deepest truncation whose products ``n * numerator`` still fit in 64 bits."""
    need = math.ceil(2 * math.log(max(N1, 2)) / math.log(sys.base))
    room = int((61 - math.log2(max(N1, 1))) / math.log2(sys.base))
    return max(need, room, 1)


def hit_mask(nums: np.ndarray, den: int, f: ApproxFunction, ys, N0: int, N1: int,
             mode: str) -> np.ndarray:
    """Which sampled points (integer numerators over ``den``) have a hit in ``[N0, N1]``."""
    if N1 * den >= 2**62 or nums.dtype == object:
        raise ValueError("sample depth too large for 64-bit hit detection")
    ys = np.asarray(ys, dtype=float)
    found = np.zeros(len(nums), dtype=bool)
    for n in range(max(1, N0), N1 + 1):
        r = (nums * n) % den
        t = r / den - ys
        v = np.abs(t - np.round(t))
        psi = psi_eval(f, n)
        val = v.max(axis=1) if mode == "sim" else v.prod(axis=1)
        found |= val < psi
    return found


def limsup_fraction(sys: DigitSystem, f: ApproxFunction, y, N0: int, N1: int, samples: int,
                    seed: int, mode: str = "sim", depth: int = None,
                    confidence: float = 0.95) -> LimsupResult:
    """Fraction of ``mu``-random points with at least one hit in ``[N0, N1]``, with a
    Wilson interval."""
    if mode not in ("sim", "mult"):
        raise ValueError(f"mode must be 'sim' or 'mult', not {mode!r}")
    depth = depth or default_depth(sys, N1)
    if sys.base**depth < N1**2:
        raise ValueError("sample depth must satisfy base**depth >= N1**2")
    nums = sample_numerators(sys, depth, samples, seed)
    ys = [float(v) for v in _reduce_y(y, sys.dim)]
    found = hit_mask(nums, sys.base**depth, f, ys, N0, N1, mode)
    k = int(found.sum())
    ci = binomtest(k, samples).proportion_ci(confidence_level=confidence, method="wilson")
    return LimsupResult(N0, N1, k / samples, float(ci.low), float(ci.high), k, samples, depth)


def window_fractions(sys: DigitSystem, f: ApproxFunction, y, js: Sequence[int], samples: int,
                     seed: int, mode: str = "sim", threads=None) -> list:
    """``limsup_fraction`` over the dyadic windows ``[2^j, 2^(j+1)]``; one seed per window."""
    return ordered_map(
        lambda j: limsup_fraction(sys, f, y, 2**j, 2 ** (j + 1), samples, seed + j, mode),
        js, threads)


# ------------------------------------------------------------- intrinsic approximation


def intrinsic_hits(sys: DigitSystem, x, tau: float, Q: int) -> list:
    """Pairs ``(a, n)``, ``n <= Q``, with ``a/n`` in the fractal and
    ``max_j |x_j - a_j/n| < n^(-tau)/n``."""
    x = [_frac(v) for v in np.atleast_1d(np.asarray(x, dtype=object))]
    if len(x) != sys.dim or any(v < 0 or v > 1 for v in x):
        raise ValueError("x must be a point of the unit cube of the system's dimension")
    auto = KernelAutomaton(sys)
    tau_exact = float(tau).is_integer() and tau >= 0
    out = []
    for n in range(1, Q + 1):
        per = []
        for xj in x:
            t = n * xj
            cands = {math.floor(t), math.ceil(t)}
            ok = []
            for a in sorted(cands):
                if a < 0 or a > n:
                    continue
                d = abs(t - a)
                if d == 0:
                    ok.append(a)
                elif tau_exact:
                    if d * n ** int(tau) < 1:
                        ok.append(a)
                elif float(d) < n ** (-float(tau)):
                    ok.append(a)
            per.append(ok)
        for a in itertools.product(*per):
            if auto.meets(list(a), list(a), n):
                out.append((a, n))
    return out
