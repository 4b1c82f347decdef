"""Exact counts of rational points on and near missing-digit fractals.

``N_K(Q, delta)`` is the set of pairs ``(a, q)`` with ``1 <= q <= Q`` and
``dist_inf(a/q, K) <= delta/Q``.  For each denominator a branch-and-bound
descent over the digit tree collects candidate numerators, and each candidate is
decided exactly by the membership automaton on the closed ball around ``a/q``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction

from ._parallel import ordered_map
from .errors import BadSlabParams, DepthCapHit, ParseError, ValidationError
from .systems import DEFAULT_MAX_STATES, DigitSystem, KernelAutomaton, hausdorff_dimension

DELTA_DENOMINATOR_CAP = 10**9


@dataclass(frozen=True)
class CountQuery:
    Q: int
    delta: Fraction = Fraction(0)

    def __post_init__(self):
        if int(self.Q) != self.Q or self.Q < 1:
            raise ValidationError(f"Q must be a positive integer, got {self.Q}")
        d = Fraction(self.delta)
        if d < 0:
            raise ValidationError("delta must be non-negative")
        object.__setattr__(self, "Q", int(self.Q))
        object.__setattr__(self, "delta", d)

    @property
    def radius(self) -> Fraction:
        return self.delta / self.Q


@dataclass(frozen=True)
class CountResult:
    Q: int
    delta: Fraction
    count: int
    heuristic: float
    ratio: float
    exact: bool = True
    count_lo: int = None
    count_hi: int = None

    def row(self) -> dict:
        return {
            "Q": self.Q,
            "delta": str(self.delta),
            "count": self.count,
            "heuristic": f"{self.heuristic:.10g}",
            "ratio": f"{self.ratio:.10g}",
            "exact": str(self.exact).lower(),
        }


def heuristic_count(sys: DigitSystem, Q: int, delta) -> float:
    """``delta^(k - dim) * Q^(dim + 1)`` with ``dim`` the Hausdorff dimension."""
    kappa = hausdorff_dimension(sys)
    delta = float(delta)
    if delta == 0:
        return 0.0 if sys.dim > kappa else float(Q) ** (kappa + 1)
    return delta ** (sys.dim - kappa) * float(Q) ** (kappa + 1)


def depth_cap(sys: DigitSystem, Q: int, delta) -> int:
    scale = max(float(delta), float(Q) ** -2)
    return math.ceil(math.log(4 * Q / scale, sys.base)) + 4


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _candidates(sys: DigitSystem, q: int, rn: int, rd: int, cap: int):
    """Candidate numerators near the depth-m cylinder cover of the fractal.

    Returns ``(accepted, pending)``: ``accepted`` vectors are certified by a
    point of the fractal (a digit fixed point mapped into the leaf cylinder)
    within the radius; ``pending`` still need an exact decision.
    """
    b, k = sys.base, sys.dim
    fixed = [tuple(dj for dj in d) for d in sys.digits]
    accepted: set = set()
    pending: set = set()
    stack = [((0,) * k, 0)]
    while stack:
        corner, m = stack.pop()
        bm = b**m
        den = bm * rd
        ranges = []
        for c in corner:
            lo = _ceil_div(q * (c * rd - rn * bm), den)
            hi = (q * ((c + 1) * rd + rn * bm)) // den
            if lo > hi:
                ranges = None
                break
            ranges.append(range(lo, hi + 1))
        if ranges is None:
            continue
        if bm > q or m >= cap:
            scale = bm * (b - 1) * rd
            slack = rn * q * bm * (b - 1)
            for a in itertools.product(*ranges):
                if a in accepted:
                    continue
                hit = any(
                    all(abs(aj * scale - q * (cj * (b - 1) + fj) * rd) <= slack
                        for aj, cj, fj in zip(a, corner, f))
                    for f in fixed
                )
                if hit:
                    accepted.add(a)
                    pending.discard(a)
                else:
                    pending.add(a)
            continue
        for d in sys.digits:
            stack.append((tuple(c * b + dj for c, dj in zip(corner, d)), m + 1))
    return accepted, pending


def support_factors(sys: DigitSystem):
    """1-D uniform systems whose product has the same support, or None.

    Counting only sees ``K``, so a digit set that is a Cartesian product
    factorizes the sup-norm neighbourhood count coordinate by coordinate.
    """
    if sys.dim == 1:
        return None
    proj = [sorted({d[j] for d in sys.digits}) for j in range(sys.dim)]
    if math.prod(len(p) for p in proj) != len(sys.digits):
        return None
    return tuple(DigitSystem.uniform(sys.base, [(e,) for e in p], dim=1) for p in proj)


def _count_for_q(sys: DigitSystem, q: int, radius: Fraction, cap: int, max_states: int):
    """``(decided_count, undecided_count)`` for one denominator."""
    factors = support_factors(sys)
    if factors is not None:
        lo = hi = 1
        for f in factors:
            y, u = _count_for_q(f, q, radius, cap, max_states)
            lo, hi = lo * y, hi * (y + u)
        return lo, hi - lo
    if sys.dim == 1 and len(sys.digits) == sys.base:
        # K = [0, 1]: a/q qualifies iff -r <= a/q <= 1 + r
        rn, rd = radius.numerator, radius.denominator
        return (q * (rd + rn)) // rd - _ceil_div(-q * rn, rd) + 1, 0
    rn, rd = radius.numerator, radius.denominator
    L = q * rd
    auto = KernelAutomaton(sys, max_states)
    accepted, pending = _candidates(sys, q, rn, rd, cap)
    yes, unknown = len(accepted), 0
    for a in sorted(pending):
        lo = [aj * rd - q * rn for aj in a]
        hi = [aj * rd + q * rn for aj in a]
        try:
            if auto.meets(lo, hi, L):
                yes += 1
        except DepthCapHit:
            unknown += 1
            auto = KernelAutomaton(sys, max_states)
    return yes, unknown


def count_near(sys: DigitSystem, query: CountQuery, threads=None,
               max_states: int = DEFAULT_MAX_STATES) -> CountResult:
    """Exact ``#N_K(Q, delta)`` in the sup-norm with a non-strict boundary."""
    Q, radius = query.Q, query.radius
    cap = depth_cap(sys, Q, query.delta)
    parts = ordered_map(lambda q: _count_for_q(sys, q, radius, cap, max_states),
                        range(1, Q + 1), threads)
    lo = sum(p[0] for p in parts)
    unknown = sum(p[1] for p in parts)
    heur = heuristic_count(sys, Q, query.delta)
    ratio = lo / heur if heur > 0 else float("nan")
    if unknown:
        return CountResult(Q, query.delta, lo, heur, ratio, False, lo, lo + unknown)
    return CountResult(Q, query.delta, lo, heur, ratio, True, lo, lo)


def count_on(sys: DigitSystem, Q: int, threads=None) -> int:
    """Rational points of height at most ``Q`` lying on the fractal."""
    res = count_near(sys, CountQuery(Q, 0), threads)
    if not res.exact:
        raise DepthCapHit(f"count bracketed in [{res.count_lo}, {res.count_hi}]")
    return res.count


def count_on_series(sys: DigitSystem, Q: int, threads=None) -> list:
    """``[count_on(sys, 1), ..., count_on(sys, Q)]`` from one pass over denominators."""
    cap = depth_cap(sys, Q, 0)
    parts = ordered_map(lambda q: _count_for_q(sys, q, Fraction(0), cap, DEFAULT_MAX_STATES),
                        range(1, Q + 1), threads)
    if any(p[1] for p in parts):
        raise DepthCapHit("membership undecided for some rational")
    return list(itertools.accumulate(p[0] for p in parts))


def slab_system(b: int, a: int, k: int) -> DigitSystem:
    """Uniform system on ``{0..b-1}^(k-1) x {0..a-1}``; contains the face x_k = 0 when a = 1."""
    if not (1 <= a < b) or k < 1:
        raise BadSlabParams(f"need 1 <= a < b and k >= 1, got b={b}, a={a}, k={k}")
    digits = [tuple(head) + (last,)
              for head in itertools.product(range(b), repeat=k - 1) for last in range(a)]
    return DigitSystem.uniform(b, digits, dim=k)


_DELTA_FORM = re.compile(
    r"^\s*(?:(?P<c>[0-9.eE+\-/]+)\s*[*·]?\s*)?Q\s*\^\s*\{?\s*(?P<e>[-−]?\s*[0-9./]+)\s*\}?\s*$"
)


def _exact_power(Q: int, e: Fraction):
    """``Q**e`` as a Fraction when it is rational, else None."""
    p, s = e.numerator, e.denominator
    root = round(Q ** (1 / s))
    for cand in (root - 1, root, root + 1):
        if cand > 0 and cand**s == Q:
            return Fraction(cand) ** p
    return None


def parse_delta(text: str, Q: int) -> Fraction:
    """Literal rational (``0``, ``1/3``, ``0.25``) or ``c*Q^{-e}``.

    Irrational powers are rounded to the nearest rational with denominator at
    most 10**9 so that all later comparisons stay exact.
    """
    text = str(text).strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    m = _DELTA_FORM.match(text)
    if not m:
        raise ParseError(f"cannot parse delta {text!r}")
    try:
        c = Fraction(m.group("c")) if m.group("c") else Fraction(1)
        e = Fraction(m.group("e").replace("−", "-").replace(" ", ""))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"cannot parse delta {text!r}") from exc
    exact = _exact_power(Q, e)
    if exact is not None:
        return c * exact
    return Fraction(float(c) * Q ** float(e)).limit_denominator(DELTA_DENOMINATOR_CAP)
