import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CANTOR
from digitfrac.approx import (
    HALF_CLIP,
    ApproxFunction,
    dyadic_sandwich,
    gallagher_sum_mu,
    gallagher_terms,
    hits,
    intrinsic_hits,
    khinchin_sum_lebesgue,
    khinchin_sum_mu,
    limsup_fraction,
    measure_A_n,
    psi_eval,
    psi_exact,
    sandwich_indicators,
)
from digitfrac.errors import BadFamilyParams, PsiTooLarge
from digitfrac.systems import builtin_system, contains_rational, sample
from oracles import expansion_member, scan_hits

F = Fraction
LEB1 = builtin_system("lebesgue:2:1")
LEB2 = builtin_system("lebesgue:2:2")


def psi_t(t):
    return ApproxFunction("power_t", (t,))


def const(c):
    return ApproxFunction("constant", (c,))


# ------------------------------------------------------------------ psi


def test_psi_examples():
    assert psi_eval(psi_t(2), 10) == pytest.approx(0.01)
    assert psi_eval(ApproxFunction("power_log_sim", (1,)), 8) == pytest.approx(0.0289, abs=5e-5)
    assert psi_eval(const(0.3), 17) == 0.3
    assert psi_eval(ApproxFunction("power_log_mult", (2,)), 8) == pytest.approx(
        1 / (8 * math.log(8) ** 3))


def test_psi_n1_clip():
    assert psi_eval(psi_t(1), 1) == pytest.approx(1 - 1e-9, abs=0)
    assert psi_eval(ApproxFunction("power_log_sim", (2,)), 1) < 1


@pytest.mark.parametrize("spec", ["power_t:-1", "constant:1.5", "power_log_sim:0.5", "wobble:1",
                                  "power_t"])
def test_bad_families(spec):
    with pytest.raises(BadFamilyParams):
        ApproxFunction.parse(spec)


@pytest.mark.parametrize("spec", ["power_t:0.4", "power_log_sim:2", "power_log_mult:1"])
def test_psi_non_increasing(spec):
    f = ApproxFunction.parse(spec)
    vals = [psi_eval(f, n) for n in range(2, 2000)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


# ------------------------------------------------------------------ hits


def test_hits_half():
    assert [h.n for h in hits([F(1, 2)], [0], const(0.3), 1, 4)] == [2, 4]


def test_hits_zero_psi_is_empty():
    assert hits([F(2, 7), F(1, 3)], [0, 0], const(0), 1, 50, "sim") == []


def test_hits_mult_against_scan():
    x, y = [F(1, 3), F(1, 2)], [F(0), F(0)]
    got = [h.n for h in hits(x, y, psi_t(1), 1, 12, "mult")]
    assert got == scan_hits(x, y, lambda n: psi_exact(psi_t(1), n), 12, "mult")


def test_hit_record_witness_and_value():
    (h,) = hits([F(1, 5), F(4, 5)], [F(1, 10), 0], const(0.45), 2, 2)
    assert h.n == 2 and h.witnesses == (0, 2) and h.value == pytest.approx(0.4)
    assert hits([F(1, 5)], [F(1, 10)], const(0.2), 3, 3) == []  # distance exactly 1/2


fracs = st.fractions(min_value=0, max_value=1, max_denominator=97)


@settings(max_examples=80, deadline=None)
@given(fracs, fracs, st.sampled_from([0.05, 0.2, 0.45]))
def test_sim_equals_mult_in_dimension_one(x, y, c):
    a = [h.n for h in hits([x], [y], const(c), 1, 40, "sim")]
    b = [h.n for h in hits([x], [y], const(c), 1, 40, "mult")]
    assert a == b


@settings(max_examples=25, deadline=None)
@given(fracs, fracs, fracs, st.integers(-3, 3), st.integers(-3, 3))
def test_translation_invariance(x1, x2, y1, s1, s2):
    y = [y1, F(1, 3)]
    shifted = [y1 + s1, F(1, 3) + s2]
    for mode in ("sim", "mult"):
        a = [(h.n, h.value) for h in hits([x1, x2], y, psi_t(1), 1, 30, mode)]
        b = [(h.n, h.value) for h in hits([x1, x2], shifted, psi_t(1), 1, 30, mode)]
        assert a == b
    assert measure_A_n(CANTOR, psi_t(1), [y1], 7) == measure_A_n(CANTOR, psi_t(1), [y1 + s1], 7)


@settings(max_examples=60, deadline=None)
@given(fracs, fracs, st.floats(0, 0.45), st.floats(0, 0.45), st.integers(2, 40))
def test_monotone_in_psi(x, y, c1, c2, n):
    lo, hi = sorted((c1, c2))
    small = {h.n for h in hits([x], [y], const(lo), 1, 40)}
    big = {h.n for h in hits([x], [y], const(hi), 1, 40)}
    assert small <= big
    assert measure_A_n(CANTOR, const(lo), [y], n) <= measure_A_n(CANTOR, const(hi), [y], n)


# ------------------------------------------------------------------ Khinchin sums


def test_lebesgue_measure_of_A_n_is_box_volume():
    for sys_, k in ((LEB1, 1), (LEB2, 2)):
        ser = khinchin_sum_mu(sys_, psi_t(1), [F(1, 7)] * k, 30)
        for n, term in zip(ser.ns, ser.terms):
            psi = min(F(1, n), HALF_CLIP)
            assert term == (2 * psi) ** k


def test_cantor_zero_psi():
    ser = khinchin_sum_mu(CANTOR, const(0), [0], 20)
    assert all(t == 0 for t in ser.terms) and ser.partial[-1] == 0


def test_series_metadata_records_clip():
    ser = khinchin_sum_mu(CANTOR, psi_t(1), [0], 5)
    assert ser.ns[0] == 2 and ser.meta["n_start"] == 2 and ser.meta["psi_clip"] != "none"
    with pytest.raises(PsiTooLarge):
        khinchin_sum_mu(CANTOR, psi_t(1), [0], 5, clip=False)


def _cantor_points(samples, depth, seed):
    rng = np.random.default_rng(seed)
    digits = 2 * rng.integers(0, 2, size=(samples, depth))
    nums = np.zeros(samples, dtype=np.int64)
    for j in range(depth):
        nums = nums * 3 + digits[:, j]
    return nums, 3**depth


def test_cantor_khinchin_terms_match_monte_carlo():
    f = psi_t(2)
    ser = khinchin_sum_mu(CANTOR, f, [0], 64)
    nums, den = _cantor_points(100_000, 24, seed=5)
    bad = []
    for n, term in zip(ser.ns, ser.terms):
        t = (nums * n) % den / den
        freq = np.mean(np.minimum(t, 1 - t) < psi_eval(f, n))
        p = float(term)
        sigma = math.sqrt(max(p * (1 - p), 1e-12) / len(nums))
        if abs(freq - p) > 3 * sigma + 1e-5:
            bad.append((n, p, freq))
    assert not bad


def test_exact_vs_monte_carlo_random_cases():
    rng = random.Random(17)
    nums, den = _cantor_points(50_000, 24, seed=23)
    for _ in range(20):
        n = rng.randint(2, 200)
        c = rng.choice([0.01, 0.05, 0.1, 0.2, 0.3])
        y = F(rng.randint(0, 99), 100)
        p = float(measure_A_n(CANTOR, const(c), [y], n))
        t = ((nums * n) % den / den - float(y)) % 1.0
        freq = np.mean(np.minimum(t, 1 - t) < c)
        sigma = math.sqrt(max(p * (1 - p), 1e-12) / len(nums))
        assert abs(freq - p) <= 3 * sigma + 1e-5, (n, c, y, p, freq)


def test_lebesgue_sum_with_n1_clip():
    ser = khinchin_sum_lebesgue(psi_t(1), 1, 3)
    assert ser.partial[-1] == pytest.approx(2 * (1 - 1e-9) + 1 + 2 / 3, abs=1e-12)
    assert khinchin_sum_lebesgue(const(0), 2, 10).partial[-1] == 0


def test_lebesgue_sum_log_growth():
    for k in (1, 2):
        N = 100_000
        s = khinchin_sum_lebesgue(psi_t(1 / k), k, N).partial[-1]
        # sum of 2^k / n: 2^k (log N + Euler gamma) up to the n = 1 clip
        assert abs(s - 2**k * math.log(N)) < 2**k


# ------------------------------------------------------------------ dyadic sandwich


def test_sandwich_dimension_one_has_single_shapes():
    low, up = dyadic_sandwich(psi_t(1), 5, 1)
    assert (low.kind, len(low.shapes)) == ("shell", 1)
    assert (up.kind, len(up.shapes)) == ("box", 1)


def test_sandwich_side_products_constant():
    f = psi_t(1)
    for m in (3, 6, 8):
        low, up = dyadic_sandwich(f, m, 2)
        target = psi_exact(f, 2**m) / 2 ** (2 * m)
        assert set(low.side_products()) == {target}
        assert len(set(up.side_products())) == 1
        assert len(low.shapes) == len(up.shapes) <= m + 2


def test_sandwich_pointwise_inclusion_k2():
    rng = np.random.default_rng(3)
    pts = rng.random((10_000, 2))
    f = psi_t(1)
    for n in range(32, 64):
        b, a, c = sandwich_indicators(pts, n, f, [0, 0])
        assert not np.any(b & ~a) and not np.any(a & ~c)


def test_sandwich_pointwise_inclusion_k3_shifted():
    rng = np.random.default_rng(4)
    pts = rng.random((5_000, 3))
    f = ApproxFunction("power_log_mult", (3,))
    for n in range(16, 32):
        b, a, c = sandwich_indicators(pts, n, f, [0.3, 0.1, 0.7])
        assert not np.any(b & ~a) and not np.any(a & ~c)


# ------------------------------------------------------------------ Gallagher sums


def _lebesgue_true_mult(psi: Fraction) -> float:
    """Lebesgue measure of {||nx|| ||ny|| < psi} for psi <= 1/4."""
    psi = float(psi)
    return 4 * psi * (1 + math.log(1 / (4 * psi)))


def _union_area(rects):
    """Area of a union of open rectangles (x0, x1, y0, y1) clipped to [0, 1/2]^2."""
    half = F(1, 2)
    rects = [(max(a, 0), min(b, half), max(c, 0), min(d, half)) for a, b, c, d in rects]
    rects = [r for r in rects if r[0] < r[1] and r[2] < r[3]]
    xs = sorted({v for r in rects for v in r[:2]})
    ys = sorted({v for r in rects for v in r[2:]})
    area = F(0)
    for x0, x1 in zip(xs, xs[1:]):
        for y0, y1 in zip(ys, ys[1:]):
            if any(r[0] <= x0 and x1 <= r[1] and r[2] <= y0 and y1 <= r[3] for r in rects):
                area += (x1 - x0) * (y1 - y0)
    return area


def test_gallagher_lebesgue_matches_rectangle_areas():
    # ||n x|| is uniform on [0, 1/2] under Lebesgue, so a set of distance pairs
    # has measure 4 * area
    f = psi_t(1)
    for n in (5, 9, 16, 23, 40):
        low, up = dyadic_sandwich(f, n.bit_length(), 2)
        lo_rects = [(n * s[0] / 2, n * s[0], n * s[1] / 2, n * s[1]) for s in low.shapes]
        hi_rects = [(0, n * s[0], 0, n * s[1]) for s in up.shapes]
        lo, hi = gallagher_terms(LEB2, f, [0, 0], n)
        assert lo == 4 * _union_area(lo_rects)
        assert hi == 4 * _union_area(hi_rects)


@pytest.fixture(scope="module")
def leb2_gallagher():
    return gallagher_sum_mu(LEB2, psi_t(1), [0, 0], 128)


def test_gallagher_brackets_true_lebesgue_measure(leb2_gallagher):
    ser = leb2_gallagher
    for n, lo, hi in zip(ser.ns, ser.lower_terms, ser.upper_terms):
        assert lo <= hi
        if n >= 4:
            true = _lebesgue_true_mult(F(1, n))
            assert float(lo) <= true <= float(hi) + 1e-12


def test_gallagher_bracket_ratio_lebesgue(leb2_gallagher):
    ser = leb2_gallagher
    assert ser.upper[-1] / ser.lower[-1] <= 8


def test_gallagher_zero_psi():
    ser = gallagher_sum_mu(LEB2, const(0), [0, 0], 20)
    assert all(v == 0 for v in ser.lower + ser.upper)


def test_gallagher_dimension_one_equals_khinchin():
    g = gallagher_sum_mu(CANTOR, psi_t(1), [F(1, 5)], 40)
    k = khinchin_sum_mu(CANTOR, psi_t(1), [F(1, 5)], 40)
    assert g.lower == k.partial == g.upper


def test_gallagher_lower_le_upper_on_cantor_square():
    from digitfrac.systems import product_system

    cc = product_system([CANTOR, CANTOR])
    ser = gallagher_sum_mu(cc, psi_t(1), [0, 0], 40)
    assert all(lo <= hi for lo, hi in zip(ser.lower_terms, ser.upper_terms))


# ------------------------------------------------------------------ Monte Carlo


def test_limsup_zero_psi():
    r = limsup_fraction(CANTOR, const(0), [0], 4, 8, 1000, seed=1)
    assert r.fraction == 0 and r.hits == 0


def test_limsup_lebesgue_constant():
    r = limsup_fraction(LEB1, const(0.4), [0], 1, 1, 20_000, seed=2)
    assert r.ci_lo <= 0.8 <= r.ci_hi


def test_limsup_is_deterministic_per_seed():
    a = limsup_fraction(CANTOR, psi_t(2), [0], 16, 32, 2000, seed=9)
    b = limsup_fraction(CANTOR, psi_t(2), [0], 16, 32, 2000, seed=9)
    assert a == b


def test_limsup_depth_precondition():
    with pytest.raises(ValueError):
        limsup_fraction(CANTOR, psi_t(2), [0], 16, 32, 10, seed=0, depth=3)


# ------------------------------------------------------------------ intrinsic


@pytest.mark.parametrize("tau", [0, 1, 5, 2.5])
def test_intrinsic_quarter(tau):
    got = intrinsic_hits(CANTOR, [F(1, 4)], tau, 10)
    assert ((1,), 4) in got and ((2,), 8) in got


def test_intrinsic_half_against_scan():
    for tau in (0, 0.5, 1, 2):
        got = intrinsic_hits(CANTOR, [F(1, 2)], tau, 10)
        expected = [((a,), n) for n in range(1, 11) for a in range(n + 1)
                    if abs(F(1, 2) - F(a, n)) < n ** (-1 - tau)
                    and expansion_member(a, n, 3, {0, 2})]
        assert got == expected


def test_intrinsic_huge_tau_only_trivial_denominator():
    # at n = 1 the radius n^-tau / n is 1 whatever tau is, so 0/1 and 1/1 always qualify
    x = sample(CANTOR, 30, seed=8).coords
    assert intrinsic_hits(CANTOR, x, 10, 100) == [((0,), 1), ((1,), 1)]


def test_intrinsic_hits_lie_on_fractal():
    for a, n in intrinsic_hits(CANTOR, [F(7, 26)], 0.5, 60):
        assert contains_rational(CANTOR, F(a[0], n))
