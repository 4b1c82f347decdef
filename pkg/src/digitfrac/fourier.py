"""Fourier side: the digit polynomial, its products, certified coefficients and l1 bounds.

Floating point throughout, with every truncation or discretisation error carried
explicitly.  Phases follow ``mu_hat(xi) = integral of e(-xi . x) dmu``.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ._parallel import resolve_threads
from .errors import BudgetExceeded, TolTooTight
from .systems import DigitSystem

TWO_PI = 2.0 * math.pi
MAX_PRODUCT_TERMS = 400
LATTICE_BUDGET = 20_000_000
GRID_BUDGET = 2_000_000_000
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class CertifiedValue:
    value: complex
    err: float


@dataclass(frozen=True)
class L1BoundReport:
    level: int
    grid_step: float
    grid_max: float
    lipschitz: float
    certified_sup: float
    bound: float
    vacuous: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("vacuous")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _digit_arrays(sys: DigitSystem):
    return np.array(sys.digits, dtype=float), np.array([float(w) for w in sys.weights])


def _as_points(x, k: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if k == 1 and arr.shape[-1:] != (1,):
        arr = arr[..., None]
    return arr


def g_eval(sys: DigitSystem, x):
    """``|sum_d P(d) e(d . x)|`` at one point or an array of points (last axis = dim)."""
    d, p = _digit_arrays(sys)
    pts = _as_points(x, sys.dim)
    phase = pts @ d.T  # (..., #D)
    out = np.abs(np.exp(1j * TWO_PI * phase) @ p)
    out = np.minimum(out, 1.0)
    return float(out.reshape(-1)[0]) if out.size == 1 and np.ndim(x) <= 1 else out


def s_l_eval(sys: DigitSystem, x, L: int):
    """``prod_{j<L} g(b**j x)``."""
    if L < 1:
        raise ValueError("L must be >= 1")
    pts = _as_points(x, sys.dim)
    out = np.ones(pts.shape[:-1])
    for j in range(L):
        out = out * g_eval_array(sys, pts * float(sys.base) ** j)
    return float(out.reshape(-1)[0]) if out.size == 1 and np.ndim(x) <= 1 else out


def g_eval_array(sys: DigitSystem, pts: np.ndarray) -> np.ndarray:
    d, p = _digit_arrays(sys)
    return np.minimum(np.abs(np.exp(1j * TWO_PI * (pts @ d.T)) @ p), 1.0)


def _truncation(sys: DigitSystem, xi_inf: float, tol: float):
    """Smallest J whose tail error plus rounding stays within ``tol``."""
    k, b = sys.dim, sys.base
    for J in range(0, MAX_PRODUCT_TERMS + 1):
        tail_sum = TWO_PI * k * xi_inf * b ** (-J)
        if tail_sum > 1.0:
            continue
        tail = math.expm1(tail_sum)
        rounding = 8.0 * (J + 1) * (len(sys.digits) + k) * _EPS
        if tail + rounding <= tol:
            return J, tail + rounding
    raise TolTooTight(f"tolerance {tol} needs more than {MAX_PRODUCT_TERMS} factors")


def mu_hat(sys: DigitSystem, xi, tol: float = 1e-12) -> CertifiedValue:
    """Fourier coefficient from the infinite product, truncated with a certified tail.

    Each factor is ``phi(t) = sum_d P(d) e(-d . t)`` at ``t = xi / b**j``;
    ``|1 - phi(t)| <= 2 pi k (b-1) |t|_inf`` bounds the discarded tail.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (sys.dim,):
        raise ValueError(f"xi must have {sys.dim} coordinates")
    xi_inf = float(np.max(np.abs(xi)))
    if xi_inf == 0:
        return CertifiedValue(1 + 0j, 0.0)
    vals = mu_hat_many(sys, xi[None, :], tol)
    return CertifiedValue(complex(vals[0]), _truncation(sys, xi_inf, tol)[1])


def mu_hat_many(sys: DigitSystem, xis: np.ndarray, tol: float) -> np.ndarray:
    """Truncated products for an array of frequencies (rows); error <= tol each."""
    xis = np.asarray(xis, dtype=float)
    xi_inf = float(np.max(np.abs(xis))) if xis.size else 0.0
    J, _ = _truncation(sys, xi_inf, tol)
    d, p = _digit_arrays(sys)
    proj = xis @ d.T  # (n, #D), exact integers up to 2**53
    out = np.ones(len(xis), dtype=complex)
    b = float(sys.base)
    for j in range(1, J + 1):
        # reduce the phase before scaling to keep the argument small
        ph = np.mod(proj, b**j) / b**j
        out *= np.exp(-1j * TWO_PI * ph) @ p
    return out


def lattice_box(Q: int, k: int) -> np.ndarray:
    rng = np.arange(-Q, Q + 1)
    grids = np.meshgrid(*([rng] * k), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def l1_partial_sum(sys: DigitSystem, Q: int, tol_per_term: float = 1e-10,
                   budget: int = LATTICE_BUDGET, threads=None) -> CertifiedValue:
    """``sum_{|xi|_inf <= Q} |mu_hat(xi)|`` with error at most ``(2Q+1)^k tol_per_term``."""
    if Q < 0:
        raise ValueError("Q must be >= 0")
    count = (2 * Q + 1) ** sys.dim
    if count > budget:
        raise BudgetExceeded(f"lattice box has {count} points, budget {budget}")
    if Q == 0:
        return CertifiedValue(1.0, 0.0)
    xis = lattice_box(Q, sys.dim)
    chunks = np.array_split(xis, max(1, len(xis) // 200_000))
    n = resolve_threads(threads)

    def work(c):
        return np.sort(np.abs(mu_hat_many(sys, c, tol_per_term)))

    if n > 1:
        with ThreadPoolExecutor(n) as ex:
            parts = list(ex.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    # fixed reduction order: per-chunk sorted sums, then chunk order
    total = math.fsum(math.fsum(part) for part in parts)
    return CertifiedValue(total, count * tol_per_term)


def partial_sum_series(sys: DigitSystem, Qs, tol_per_term: float = 1e-10, threads=None) -> list:
    return [(Q, l1_partial_sum(sys, Q, tol_per_term, threads=threads)) for Q in Qs]


def averaged_sum(sys: DigitSystem, x: np.ndarray, L: int) -> np.ndarray:
    """``b^{-kL} sum_i S_L(x + i/b^L)`` over ``i`` in ``{0..b^L-1}^k``; rows of ``x`` are points."""
    b, k = sys.base, sys.dim
    x = np.asarray(x, dtype=float).reshape(-1, k)
    n = b**L
    shifts = lattice_box_nonneg(n, k) / n  # (n^k, k)
    out = np.zeros(len(x))
    for s in shifts:
        pts = x + s
        term = np.ones(len(x))
        for j in range(L):
            arg = np.mod(pts * float(b) ** j, 1.0)
            term *= g_eval_array(sys, arg)
        out += term
    return out / float(n) ** k


def lattice_box_nonneg(n: int, k: int) -> np.ndarray:
    return np.array(list(itertools.product(range(n), repeat=k)), dtype=float)


def lipschitz_constant(sys: DigitSystem, L: int) -> float:
    b, k = sys.base, sys.dim
    return TWO_PI * (b - 1) * k * sum(b**j for j in range(L))


def l1_lower_bound(sys: DigitSystem, L: int, grid_step: float, threads=None,
                   chunk: int = 1 << 15) -> L1BoundReport:
    """Certified lower bound on the Fourier l1 dimension at level ``L``.

    The averaged sum is ``b^{-L}``-periodic in every coordinate, so its sup is
    searched on a grid over one period cell.  The step is shrunk so the cell is
    tiled exactly; the grid max plus Lipschitz slack for half a step is a rigorous
    upper bound on the sup.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    b, k = sys.base, sys.dim
    period = 1.0 / b**L
    m = max(1, math.ceil(period / grid_step - 1e-9))
    h = period / m
    if m**k * b ** (L * k) > GRID_BUDGET:
        raise BudgetExceeded(f"grid of {m}^{k} points at level {L} exceeds budget")
    axis = np.arange(m) * h
    n_threads = resolve_threads(threads)

    def block_max(idx_range):
        lo, hi = idx_range
        flat = np.arange(lo, hi)
        coords = np.stack(np.unravel_index(flat, (m,) * k), axis=1)
        return float(np.max(averaged_sum(sys, axis[coords], L)))

    total = m**k
    ranges = [(i, min(i + chunk, total)) for i in range(0, total, chunk)]
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as ex:
            maxima = list(ex.map(block_max, ranges))
    else:
        maxima = [block_max(r) for r in ranges]
    grid_max = max(maxima)
    lip = lipschitz_constant(sys, L)
    sup = min(grid_max + lip * h / 2.0, 1.0)
    bound = -math.log(sup) / math.log(b**L) if sup < 1.0 else 0.0
    return L1BoundReport(L, h, grid_max, lip, sup, bound, vacuous=sup >= 1.0)


def best_l1_lower_bound(sys: DigitSystem, L_max: int, grid_step: float, threads=None) -> list:
    return [l1_lower_bound(sys, L, grid_step, threads) for L in range(1, L_max + 1)]


_THRESHOLDS = {
    "main": lambda k: k - (k - 1) / (k + 1),
    "weak": lambda k: k - k / (k + 1),
    "split": lambda k: 1 - 1 / (k + 1),
}


def assumption_threshold(k: int, which: str) -> float:
    return _THRESHOLDS[which](k)


def check_assumption(kappa: float, k: int, which: str) -> bool:
    """Strict comparison of a dimension lower bound against the named threshold."""
    if which not in _THRESHOLDS:
        raise ValueError(f"unknown assumption {which!r}")
    return kappa > _THRESHOLDS[which](k)


def jb_exponent(t: float, k: int) -> float:
    if t < 0:
        raise ValueError("t must be >= 0")
    return min((k + 1) / (t + 1), k)
