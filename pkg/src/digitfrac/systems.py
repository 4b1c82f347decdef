"""Missing-digit systems: construction, exact measures of boxes, sampling, membership.

Everything here is exact rational arithmetic.  A system is the triple
(base, digit set, digit probabilities); its measure is the law of
``sum_j d_j / base**j`` with i.i.d. digits, and its fractal is the support.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    BoxOutOfRange,
    DepthCapHit,
    DigitOutOfRange,
    EmptyDigits,
    MemoCapExceeded,
    MixedBases,
    OutOfUnitCube,
    ParseError,
    WeightsNotNormalized,
)

DEFAULT_MAX_STATES = 200_000


def _as_vec(d) -> tuple:
    if isinstance(d, (int, np.integer)):
        return (int(d),)
    return tuple(int(c) for c in d)


@dataclass(frozen=True)
class DigitSystem:
    """Base ``base`` digit system in dimension ``dim``.

    ``digits`` is a sorted tuple of integer vectors and ``weights`` the matching
    tuple of Fractions.  ``factors`` holds the one-dimensional systems when the
    system was built with :func:`product_system`.
    """

    base: int
    dim: int
    digits: tuple
    weights: tuple
    factors: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        digits = tuple(_as_vec(d) for d in self.digits)
        weights = tuple(Fraction(w) for w in self.weights)
        if len(weights) != len(digits):
            raise WeightsNotNormalized("one weight per digit is required")
        if digits:
            order = sorted(range(len(digits)), key=lambda i: digits[i])
            digits = tuple(digits[i] for i in order)
            weights = tuple(weights[i] for i in order)
        object.__setattr__(self, "digits", digits)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, base: int, digits: Iterable, dim: Optional[int] = None) -> "DigitSystem":
        ds = sorted({_as_vec(d) for d in digits})
        if dim is None:
            dim = len(ds[0]) if ds else 1
        w = Fraction(1, len(ds)) if ds else Fraction(0)
        sys = cls(base, dim, tuple(ds), tuple(w for _ in ds))
        validate(sys)
        return sys

    @property
    def is_uniform(self) -> bool:
        return len(set(self.weights)) <= 1

    @property
    def split(self) -> bool:
        return marginals(self) is not None

    def weight_of(self, digit) -> Fraction:
        return dict(zip(self.digits, self.weights)).get(_as_vec(digit), Fraction(0))

    def to_dict(self) -> dict:
        out = {
            "base": self.base,
            "dim": self.dim,
            "digits": [list(d) for d in self.digits],
        }
        if not self.is_uniform:
            out["weights"] = [[w.numerator, w.denominator] for w in self.weights]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "DigitSystem":
        allowed = {"base", "dim", "digits", "weights"}
        if not isinstance(data, dict):
            raise ParseError("system JSON must be an object")
        extra = set(data) - allowed
        if extra:
            raise ParseError(f"unknown system fields: {sorted(extra)}")
        try:
            base = int(data["base"])
            dim = int(data.get("dim", 1))
            digits = [_as_vec(d) for d in data["digits"]]
            raw = data.get("weights")
            if raw is None:
                n = len(digits)
                weights = [Fraction(1, n)] * n if n else []
            else:
                weights = [Fraction(*w) if isinstance(w, (list, tuple)) else Fraction(w) for w in raw]
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"malformed system: {exc}") from exc
        sys = cls(base, dim, tuple(digits), tuple(weights))
        validate(sys)
        return sys

    @classmethod
    def from_json(cls, text: str) -> "DigitSystem":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)


@dataclass(frozen=True)
class Validation:
    ok: bool
    proper: bool


def validate(sys: DigitSystem) -> Validation:
    """Check the invariants of ``sys``; raise on the first violation."""
    if not sys.digits:
        raise EmptyDigits("digit set is empty")
    if sys.base < 2 or sys.dim < 1:
        raise DigitOutOfRange(f"need base >= 2 and dim >= 1, got {sys.base}, {sys.dim}")
    for d in sys.digits:
        if len(d) != sys.dim:
            raise DigitOutOfRange(f"digit {d} does not have dimension {sys.dim}")
        if any(c < 0 or c >= sys.base for c in d):
            raise DigitOutOfRange(f"digit {d} outside [0, {sys.base - 1}]")
    if len(set(sys.digits)) != len(sys.digits):
        raise DigitOutOfRange("repeated digit")
    if any(w <= 0 for w in sys.weights) or sum(sys.weights) != 1:
        raise WeightsNotNormalized("weights must be positive and sum to 1")
    n = len(sys.digits)
    return Validation(ok=True, proper=2 <= n < sys.base**sys.dim)


def hausdorff_dimension(sys: DigitSystem) -> float:
    return math.log(len(sys.digits)) / math.log(sys.base)


def product_system(factors: Sequence[DigitSystem]) -> DigitSystem:
    """Cartesian product of one-dimensional systems sharing a base."""
    factors = tuple(factors)
    if not factors:
        raise EmptyDigits("no factors")
    bases = {f.base for f in factors}
    if len(bases) != 1:
        raise MixedBases(f"factors use bases {sorted(bases)}")
    if any(f.dim != 1 for f in factors):
        raise DigitOutOfRange("product_system takes one-dimensional factors")
    if len(factors) == 1:
        return factors[0]
    digits, weights = [], []
    for combo in itertools.product(*(zip(f.digits, f.weights) for f in factors)):
        digits.append(tuple(d[0] for d, _ in combo))
        weights.append(math.prod((w for _, w in combo), start=Fraction(1)))
    sys = DigitSystem(factors[0].base, len(factors), tuple(digits), tuple(weights), factors=factors)
    validate(sys)
    return sys


@lru_cache(maxsize=256)
def marginals(sys: DigitSystem) -> Optional[tuple]:
    """One-dimensional factor systems if the measure is a product measure, else None."""
    if sys.factors is not None:
        return sys.factors
    if sys.dim == 1:
        return (sys,)
    margs = []
    for j in range(sys.dim):
        acc: dict = {}
        for d, w in zip(sys.digits, sys.weights):
            acc[d[j]] = acc.get(d[j], Fraction(0)) + w
        margs.append(acc)
    if math.prod(len(m) for m in margs) != len(sys.digits):
        return None
    for d, w in zip(sys.digits, sys.weights):
        if w != math.prod((margs[j][d[j]] for j in range(sys.dim)), start=Fraction(1)):
            return None
    return tuple(
        DigitSystem(sys.base, 1, tuple((e,) for e in sorted(m)), tuple(m[e] for e in sorted(m)))
        for m in margs
    )


# --------------------------------------------------------------------------- boxes


@dataclass(frozen=True)
class Box:
    """Axis-parallel rational box with per-face closedness flags."""

    lo: tuple
    hi: tuple
    closed_lo: tuple = None
    closed_hi: tuple = None

    def __post_init__(self):
        lo = tuple(Fraction(v) for v in self.lo)
        hi = tuple(Fraction(v) for v in self.hi)
        if len(lo) != len(hi):
            raise BoxOutOfRange("lo/hi dimension mismatch")
        k = len(lo)
        cl = tuple(self.closed_lo) if self.closed_lo is not None else (True,) * k
        ch = tuple(self.closed_hi) if self.closed_hi is not None else (True,) * k
        if any(a > b for a, b in zip(lo, hi)):
            raise BoxOutOfRange("lo must not exceed hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "closed_lo", tuple(bool(c) for c in cl))
        object.__setattr__(self, "closed_hi", tuple(bool(c) for c in ch))

    @classmethod
    def closed(cls, lo, hi) -> "Box":
        return cls(tuple(lo), tuple(hi))

    @classmethod
    def open(cls, lo, hi) -> "Box":
        k = len(lo)
        return cls(tuple(lo), tuple(hi), (False,) * k, (False,) * k)

    @classmethod
    def unit(cls, k: int) -> "Box":
        return cls((0,) * k, (1,) * k)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains_box(self, other: "Box") -> bool:
        for j in range(self.dim):
            if other.lo[j] < self.lo[j] or other.hi[j] > self.hi[j]:
                return False
            if other.lo[j] == self.lo[j] and other.closed_lo[j] and not self.closed_lo[j]:
                return False
            if other.hi[j] == self.hi[j] and other.closed_hi[j] and not self.closed_hi[j]:
                return False
        return True


def _check_box(sys: DigitSystem, box: Box) -> None:
    if box.dim != sys.dim:
        raise BoxOutOfRange(f"box has dimension {box.dim}, system {sys.dim}")
    if any(v < 0 or v > 1 for v in box.lo + box.hi):
        raise BoxOutOfRange("box must lie in the unit cube")


def _dirac_point(sys1: DigitSystem) -> Optional[Fraction]:
    if len(sys1.digits) == 1:
        return Fraction(sys1.digits[0][0], sys1.base - 1)
    return None


def _in_interval(x, lo, hi, clo, chi) -> bool:
    if x < lo or x > hi:
        return False
    if x == lo and not clo:
        return False
    if x == hi and not chi:
        return False
    return True


def cdf_1d(sys1: DigitSystem, x: Fraction, max_states: int = DEFAULT_MAX_STATES) -> Fraction:
    """``mu([0, x])`` for a one-dimensional system.

    Walks the base-b expansion of ``x``; every step contributes the weight of the
    smaller digits, and the walk stops at a zero-weight digit or closes a cycle,
    which is summed as a geometric series.
    """
    x = Fraction(x)
    if x < 0:
        return Fraction(0)
    if x >= 1:
        return Fraction(1)
    pt = _dirac_point(sys1)
    if pt is not None:
        return Fraction(int(pt <= x))
    b = sys1.base
    if len(sys1.digits) == b and sys1.is_uniform:
        return x  # Lebesgue
    probs = [Fraction(0)] * b
    for d, w in zip(sys1.digits, sys1.weights):
        probs[d[0]] = w
    below = [sum(probs[:d], Fraction(0)) for d in range(b)]
    seen: dict = {}
    cs: list = []
    ps: list = []
    acc, mult = Fraction(0), Fraction(1)
    while True:
        if x == 1:
            return acc + mult
        if x in seen:
            s = seen[x]
            break
        if len(cs) >= max_states:
            raise MemoCapExceeded("cdf walk exceeded state cap", acc, acc + mult)
        seen[x] = len(cs)
        d = math.floor(x * b)
        c, p = below[d], probs[d]
        cs.append(c)
        ps.append(p)
        acc += mult * c
        mult *= p
        if p == 0:
            return acc
        x = x * b - d
    # x_s = x_n: F(x_s) = C_cyc + pi * F(x_s)
    c_cyc, pi = Fraction(0), Fraction(1)
    for c, p in zip(cs[s:], ps[s:]):
        c_cyc += pi * c
        pi *= p
    f_s = c_cyc / (1 - pi)
    head, m = Fraction(0), Fraction(1)
    for c, p in zip(cs[:s], ps[:s]):
        head += m * c
        m *= p
    return head + m * f_s


def interval_measure_1d(sys1: DigitSystem, lo, hi, closed_lo=True, closed_hi=True,
                        max_states: int = DEFAULT_MAX_STATES) -> Fraction:
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        return Fraction(0)
    pt = _dirac_point(sys1)
    if pt is not None:
        return Fraction(int(_in_interval(pt, lo, hi, closed_lo, closed_hi)))
    if lo == hi:
        return Fraction(0)
    # non-Dirac one-dimensional measures have no atoms
    return cdf_1d(sys1, hi, max_states) - cdf_1d(sys1, lo, max_states)


# ------------------------------------------------------- general (non-product) recursion

_EMPTY = "empty"
_FULL = "full"
_NEG, _BIG = Fraction(-1), Fraction(2)


def _norm_coord(c):
    if c[0] == "p":
        e = c[1]
        return None if e < 0 or e > 1 else c
    lo, hi = c[1], c[2]
    if hi <= 0 or lo >= 1:
        return None
    return ("o", _NEG if lo < 0 else lo, _BIG if hi > 1 else hi)


def _norm_state(coords):
    out = []
    for c in coords:
        n = _norm_coord(c)
        if n is None:
            return _EMPTY
        out.append(n)
    if all(c[0] == "o" and c[1] == _NEG and c[2] == _BIG for c in out):
        return _FULL
    return tuple(out)


def _pieces(box: Box):
    """Split a box into disjoint products of open intervals and points."""
    per = []
    for j in range(box.dim):
        lo, hi = box.lo[j], box.hi[j]
        opts = []
        if lo == hi:
            if box.closed_lo[j] and box.closed_hi[j]:
                opts.append(("p", lo))
        else:
            opts.append(("o", lo, hi))
            if box.closed_lo[j]:
                opts.append(("p", lo))
            if box.closed_hi[j]:
                opts.append(("p", hi))
        per.append(opts)
    return itertools.product(*per)


def _solve_exact(a: list, rhs: list) -> list:
    """Gauss-Jordan elimination over Fractions; ``a`` is dense and nonsingular."""
    n = len(rhs)
    m = [row[:] + [r] for row, r in zip(a, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [v - f * w for v, w in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def _chain_measure(sys: DigitSystem, start, max_states: int) -> Fraction:
    """Exact measure of one normalized piece via the finite self-similarity chain."""
    if start == _EMPTY:
        return Fraction(0)
    if start == _FULL:
        return Fraction(1)
    b = sys.base
    index = {start: 0}
    states = [start]
    edges: list = []
    i = 0
    while i < len(states):
        s = states[i]
        out: dict = {}
        for d, w in zip(sys.digits, sys.weights):
            coords = []
            for c, dj in zip(s, d):
                if c[0] == "p":
                    coords.append(("p", c[1] * b - dj))
                else:
                    coords.append(("o", c[1] * b - dj, c[2] * b - dj))
            child = _norm_state(coords)
            out[child] = out.get(child, Fraction(0)) + w
            if child not in (_EMPTY, _FULL) and child not in index:
                if len(states) >= max_states:
                    raise MemoCapExceeded("box_measure state cap reached")
                index[child] = len(states)
                states.append(child)
        edges.append(out)
        i += 1

    n = len(states)
    rows, cols = [], []
    for u, out in enumerate(edges):
        for c in out:
            if c not in (_EMPTY, _FULL):
                rows.append(u)
                cols.append(index[c])
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=True, connection="strong")

    def settled(s) -> bool:
        # only point coordinates remain undecided
        return all(c[0] == "p" or (c[1] == _NEG and c[2] == _BIG) for c in s)

    target = [False] * n
    members: dict = {}
    for u in range(n):
        members.setdefault(labels[u], []).append(u)
    for comp in members.values():
        lab = labels[comp[0]]
        if all(settled(states[u]) for u in comp) and all(
            c not in (_EMPTY, _FULL) and labels[index[c]] == lab
            for u in comp for c in edges[u]
        ):
            for u in comp:
                target[u] = True

    # states that can reach FULL or a surviving class
    reach = target[:]
    changed = True
    while changed:
        changed = False
        for u in range(n):
            if reach[u]:
                continue
            for c in edges[u]:
                if c == _FULL or (c != _EMPTY and reach[index[c]]):
                    reach[u] = True
                    changed = True
                    break
    if not reach[0]:
        return Fraction(0)
    if target[0]:
        return Fraction(1)
    unknown = [u for u in range(n) if reach[u] and not target[u]]
    pos = {u: t for t, u in enumerate(unknown)}
    size = len(unknown)
    a = [[Fraction(0)] * size for _ in range(size)]
    rhs = [Fraction(0)] * size
    for u in unknown:
        r = pos[u]
        a[r][r] += 1
        for c, w in edges[u].items():
            if c == _FULL:
                rhs[r] += w
            elif c == _EMPTY:
                continue
            else:
                v = index[c]
                if target[v]:
                    rhs[r] += w
                elif v in pos:
                    a[r][pos[v]] -= w
    return _solve_exact(a, rhs)[pos[0]]


def box_measure_general(sys: DigitSystem, box: Box, max_states: int = DEFAULT_MAX_STATES) -> Fraction:
    """Exact box measure without assuming product structure."""
    _check_box(sys, box)
    total = Fraction(0)
    for piece in _pieces(box):
        total += _chain_measure(sys, _norm_state(piece), max_states)
    return total


def box_measure(sys: DigitSystem, box: Box, max_states: int = DEFAULT_MAX_STATES) -> Fraction:
    """Exact ``mu(box)``.

    Product measures reduce to one-dimensional cdf walks; other systems go through
    the general self-similarity chain.  If the state cap is hit, MemoCapExceeded
    carries a depth-capped bracket.
    """
    _check_box(sys, box)
    try:
        margs = marginals(sys)
        if margs is not None:
            out = Fraction(1)
            for j, m in enumerate(margs):
                out *= interval_measure_1d(m, box.lo[j], box.hi[j], box.closed_lo[j],
                                           box.closed_hi[j], max_states)
                if out == 0:
                    break
            return out
        return box_measure_general(sys, box, max_states)
    except MemoCapExceeded as exc:
        lo, hi = box_measure_bracket(sys, box, depth=_bracket_depth(sys))
        raise MemoCapExceeded(str(exc), lo, hi) from None


def _bracket_depth(sys: DigitSystem) -> int:
    return max(1, int(18 / math.log2(max(2, len(sys.digits)))))


def box_measure_bracket(sys: DigitSystem, box: Box, depth: int) -> tuple:
    """``(lower, upper)`` from depth-``depth`` closed cylinders inside / meeting the box."""
    _check_box(sys, box)
    b = sys.base
    lower = Fraction(0)
    upper = Fraction(0)
    stack = [((0,) * sys.dim, 0, Fraction(1))]
    while stack:
        corner, m, w = stack.pop()
        side = Fraction(1, b**m)
        meets = True
        inside = True
        for j in range(sys.dim):
            c0 = corner[j] * side
            c1 = c0 + side
            lo, hi = box.lo[j], box.hi[j]
            if c1 < lo or c0 > hi or (c1 == lo and not box.closed_lo[j]) or (
                c0 == hi and not box.closed_hi[j]
            ):
                meets = False
                break
            if not (_in_interval(c0, lo, hi, box.closed_lo[j], box.closed_hi[j])
                    and _in_interval(c1, lo, hi, box.closed_lo[j], box.closed_hi[j])):
                inside = False
        if not meets:
            continue
        if inside:
            lower += w
            upper += w
            continue
        if m == depth:
            upper += w
            continue
        for d, p in zip(sys.digits, sys.weights):
            stack.append((tuple(c * b + dj for c, dj in zip(corner, d)), m + 1, w * p))
    return lower, upper


def cylinder_box(sys: DigitSystem, word: Sequence) -> Box:
    """Closed cylinder of a digit word."""
    b = sys.base
    corner = [Fraction(0)] * sys.dim
    for m, d in enumerate(word, start=1):
        d = _as_vec(d)
        for j in range(sys.dim):
            corner[j] += Fraction(d[j], b**m)
    side = Fraction(1, b ** len(word))
    return Box.closed(corner, [c + side for c in corner])


# --------------------------------------------------------------------------- sampling


@dataclass(frozen=True)
class SampledPoint:
    coords: tuple
    depth: int


def sample_numerators(sys: DigitSystem, depth: int, size: int, seed) -> np.ndarray:
    """Integer numerators over ``base**depth`` of ``size`` i.i.d. draws, shape (size, dim)."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = np.random.default_rng(seed)
    digits = np.array(sys.digits, dtype=np.int64)
    p = np.array([float(w) for w in sys.weights])
    p /= p.sum()
    idx = rng.choice(len(sys.digits), size=(size, depth), p=p)
    use_int = sys.base**depth < 2**62
    acc = np.zeros((size, sys.dim), dtype=np.int64 if use_int else object)
    for j in range(depth):
        acc = acc * sys.base + digits[idx[:, j]]
    return acc


def sample(sys: DigitSystem, depth: int, seed) -> SampledPoint:
    nums = sample_numerators(sys, depth, 1, seed)[0]
    den = sys.base**depth
    return SampledPoint(tuple(Fraction(int(v), den) for v in nums), depth)


# ----------------------------------------------------------------- membership automaton


class KernelAutomaton:
    """Decides whether the fractal meets a closed rational box.

    States are residual boxes with integer endpoints over a fixed denominator L,
    clipped to ``[0, L]``.  The fractal meets the box iff the digit graph has an
    infinite path from the start state (a reachable cycle) or reaches the full
    cell.  Results are memoized per denominator.
    """

    def __init__(self, sys: DigitSystem, max_states: int = DEFAULT_MAX_STATES):
        self.b = sys.base
        self.digits = sys.digits
        self.dim = sys.dim
        self.max_states = max_states
        self._memo: dict = {}

    def _children(self, state, L):
        """Distinct clipped child states, widest first; ``[True]`` if one is the full cell."""
        b = self.b
        out = {}
        for d in self.digits:
            child = []
            full = True
            for j in range(self.dim):
                lo = state[2 * j] * b - d[j] * L
                hi = state[2 * j + 1] * b - d[j] * L
                if lo < 0:
                    lo = 0
                if hi > L:
                    hi = L
                if lo > hi:
                    child = None
                    break
                if lo != 0 or hi != L:
                    full = False
                child.append(lo)
                child.append(hi)
            if child is None:
                continue
            if full:
                return iter((True,))
            t = tuple(child)
            out[t] = sum(t[1::2]) - sum(t[0::2])
        # wide residual boxes reach a full cell soonest
        return iter(sorted(out, key=lambda t: (-out[t], t)))

    def meets(self, lo_nums, hi_nums, L: int) -> bool:
        """Does the fractal meet ``prod [lo_j/L, hi_j/L]``?"""
        state = []
        for a, c in zip(lo_nums, hi_nums):
            a, c = max(a, 0), min(c, L)
            if a > c:
                return False
            state.extend((a, c))
        if all(state[2 * j] == 0 and state[2 * j + 1] == L for j in range(self.dim)):
            return True
        memo = self._memo.setdefault(L, {})
        start = tuple(state)
        if start in memo:
            return memo[start]
        stack = [(start, self._children(start, L))]
        onstack = {start}
        while stack:
            s, it = stack[-1]
            for c in it:
                if c is True or c in onstack or memo.get(c) is True:
                    for t, _ in stack:
                        memo[t] = True
                    return True
                if c in memo:
                    continue
                if len(memo) + len(onstack) > self.max_states:
                    raise DepthCapHit("membership automaton exceeded its state cap")
                stack.append((c, self._children(c, L)))
                onstack.add(c)
                break
            else:
                memo[s] = False
                onstack.discard(s)
                stack.pop()
        return False


def contains_rational(sys: DigitSystem, point) -> bool:
    """Is the rational point in the fractal?  Both b-adic expansions are allowed."""
    pt = tuple(Fraction(v) for v in (point if isinstance(point, (tuple, list)) else (point,)))
    if len(pt) != sys.dim:
        raise OutOfUnitCube(f"point has dimension {len(pt)}, system {sys.dim}")
    if any(v < 0 or v > 1 for v in pt):
        raise OutOfUnitCube(f"{pt} is outside the unit cube")
    L = math.lcm(*(v.denominator for v in pt))
    nums = [v.numerator * (L // v.denominator) for v in pt]
    return KernelAutomaton(sys).meets(nums, nums, L)


def builtin_system(name: str) -> DigitSystem:
    """Named systems: ``cantor``, ``lebesgue:b:k``, ``slab:b:a:k``."""
    parts = name.strip().lower().split(":")
    try:
        if parts[0] == "cantor" and len(parts) == 1:
            return DigitSystem.uniform(3, [0, 2])
        if parts[0] == "lebesgue" and len(parts) == 3:
            b, k = int(parts[1]), int(parts[2])
            return DigitSystem.uniform(b, itertools.product(range(b), repeat=k), dim=k)
        if parts[0] == "slab" and len(parts) == 4:
            from .counting import slab_system

            return slab_system(int(parts[1]), int(parts[2]), int(parts[3]))
    except ValueError as exc:
        raise ParseError(f"bad built-in system {name!r}: {exc}") from exc
    raise ParseError(f"unknown built-in system {name!r}")
