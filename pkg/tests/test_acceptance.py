"""
Acceptance criteria, one test each.

Every test records a single PASS/FAIL line (printed in the terminal summary)
and then asserts the same condition.  Criteria that cannot be met are left
failing rather than loosened.
"""

import time
from fractions import Fraction
from math import comb, sqrt

import numpy as np

from multicoin_walk import asymptotics as asy
from multicoin_walk import combinatorics as cb
from multicoin_walk import moments as mo
from multicoin_walk.core import CoinSpec, evolve, initial_state, measure_positions
from multicoin_walk.factorized import multicoin_distribution

C1 = 1 / sqrt(2) - 1


def fmt(values):
    return "[" + ", ".join(f"{v:.5f}" for v in values) + "]"


def test_criterion_1_drift(criterion):
    t0 = time.perf_counter()
    fits = [mo.fit_coefficients(mo.direct_moment_series(m, 400)).c1 for m in range(1, 6)]
    elapsed = time.perf_counter() - t0
    ok_values = all(abs(c - C1) <= 0.01 for c in fits)
    ok = ok_values and elapsed < 10
    criterion(1, ok, f"fitted c1 M=1..5 {fmt(fits)} target {C1:.5f} +-0.01; {elapsed:.1f}s (<10s)")
    assert ok


def test_criterion_2_variance(criterion):
    t0 = time.perf_counter()
    fits = [mo.fit_coefficients(mo.direct_moment_series(m, 400)).var_coeff for m in range(1, 6)]
    elapsed = time.perf_counter() - t0
    targets = [(3 - 2 * sqrt(2) + 1 / m) / (4 * sqrt(2)) for m in range(1, 6)]
    rel = [abs(f - g) / g for f, g in zip(fits, targets)]
    ok = max(rel) <= 0.05 and elapsed < 10
    criterion(2, ok, f"var_coeff M=1..5 {fmt(fits)} vs {fmt(targets)}; max rel {max(rel):.4f} (<=0.05); {elapsed:.1f}s (<10s)")
    assert ok


def test_criterion_3_spectral(criterion):
    t0 = time.perf_counter()
    quad = mo.KQuadrature.gauss_legendre(257)
    errs = []
    for m in range(1, 7):
        s = mo.spectral_coefficients(m, "R", quad)
        c = mo.closed_form_multicoin(m)
        errs.append(max(abs(s.c1 - c.c1), abs(s.c2 - c.c2)))
    elapsed = time.perf_counter() - t0
    ok = max(errs) <= 1e-6 and elapsed < 30
    criterion(3, ok, f"max |spectral - closed| M=1..6 = {max(errs):.2e} (<=1e-6); {elapsed:.1f}s (<30s)")
    assert ok


def test_criterion_4_reset_table(criterion):
    table = {1: (0.0, 0.0), 2: (0.0, 0.125), 3: (-1 / 6, 7 / 72)}
    quad_err = 0.0
    for d, (c1, c2) in table.items():
        c = mo.reset_coin_coefficients(d)
        quad_err = max(quad_err, abs(c.c1 - c1), abs(c.c2 - c2))
    ok_quad = quad_err <= 1e-10

    # simulation fits: 2% relative, or 0.02 absolute where the target is 0
    def close(value, target):
        return abs(value - target) <= (0.02 * abs(target) if target else 0.02)

    sim_ok, sim_parts = True, []
    for d, blocks in ((1, 2000), (2, 1000), (3, 1000)):
        fit = mo.fit_coefficients(mo.reset_coin_simulate(d, blocks, record_every=4))
        c1, c2 = table[d]
        good = close(fit.c1, c1) and close(fit.c2, c2)
        sim_ok &= good
        sim_parts.append(f"d={d} T={d * blocks} ({fit.c1:.5f}, {fit.c2:.5f}) {'ok' if good else 'MISS'}")

    big = mo.reset_coin_coefficients(200)
    ok_big = abs(big.c1 - C1) <= 1e-2 and abs(big.c2 - (1 - 5 / sqrt(32))) <= 1e-2
    ok = ok_quad and sim_ok and ok_big
    criterion(
        4,
        ok,
        f"quadrature err {quad_err:.1e} (<=1e-10); sim {'; '.join(sim_parts)}; "
        f"d=200 ({big.c1:.5f}, {big.c2:.5f}) {'ok' if ok_big else 'MISS'}",
    )
    assert ok


def test_criterion_5_oracles(criterion):
    amp_err = 0.0
    for start in ("R", "L"):
        amp = cb.amp_from_R if start == "R" else cb.amp_from_L
        state = initial_state(CoinSpec.uniform(1, start))
        for t in range(21):
            for x in range(-t, t + 1, 2):
                got = amp(x, t)
                oracle = cb.brute_force_paths(x, t, start)
                for g, o, coin in zip(got, oracle, (1, 0)):
                    direct = state.amplitude(x, coin)
                    amp_err = max(amp_err, abs(float(g) - float(o)), abs(float(g) - direct))
            state = evolve(state, 1)

    dist_err = 0.0
    for m in range(1, 5):
        for steps in range(2, 24 // m + 1, 2):
            for start in ("R", "L", "SYMMETRIC"):
                f = multicoin_distribution(m, steps, start)
                d = measure_positions(evolve(initial_state(CoinSpec.uniform(m, start)), m * steps))
                dist_err = max(dist_err, f.max_abs_diff(d))
    ok = amp_err <= 1e-12 and dist_err <= 1e-10
    criterion(5, ok, f"amplitudes t<=20 max err {amp_err:.1e} (<=1e-12); factorized M<=4 T<=24 max err {dist_err:.1e} (<=1e-10)")
    assert ok


def test_criterion_6_twenty_coins(criterion):
    t0 = time.perf_counter()
    p = multicoin_distribution(20, 10)
    elapsed = time.perf_counter() - t0
    norm_err = abs(p.total() - 1.0)
    parity = bool(np.all(p.probs[(p.positions + p.time) % 2 == 1] == 0.0))
    m1, m2 = mo.empirical_moments(p)
    var = m2 - m1**2
    target = 200**2 * mo.closed_form_multicoin(20).var_coeff
    rel = abs(var - target) / target
    ok = elapsed < 1 and norm_err <= 1e-10 and parity and rel <= 0.05
    criterion(
        6,
        ok,
        f"{elapsed * 1e3:.1f}ms (<1s); norm err {norm_err:.1e}; parity zeros {'exact' if parity else 'BROKEN'}; "
        f"variance {var:.4f} vs {target:.4f} rel {rel:.3f} (<=0.05)",
    )
    assert ok


def test_criterion_7_asymptotics(criterion):
    def interior(t):
        x = np.arange(-t, t + 1)
        return x, asy.caustic_mask(x / t, t)

    t = 500
    x, inside = interior(t)
    exact2 = multicoin_distribution(2, t // 2).probs
    l1_two = float(np.abs(asy.two_coin_probability(x, t) - exact2)[inside].sum())

    errs = []
    for t in (100, 200, 400, 800):
        x, inside = interior(t)
        a_l, a_r = asy.one_coin_asymptotic(x, t)
        g_l, g_r = cb.amplitude_table(t)
        exact1 = np.zeros(2 * t + 1)
        exact1[::2] = g_l**2 + g_r**2
        errs.append(float(np.abs(a_l**2 + a_r**2 - exact1)[inside].sum()))
    monotone = all(b < a for a, b in zip(errs, errs[1:]))

    T = 1000
    times = list(range(T // 2, T + 1, 2))
    with_s = mo.fit_coefficients(asy.two_coin_moment_series(times))
    without = mo.fit_coefficients(asy.two_coin_moment_series(times, include_spikes=False))
    shift = max(abs(with_s.c1 - without.c1), abs(with_s.c2 - without.c2))

    ok = l1_two <= 0.08 and monotone and shift < 1e-3
    criterion(
        7,
        ok,
        f"two-coin t=500 interior L1 {l1_two:.4f} (<=0.08); one-coin L1 t=100..800 {fmt(errs)} "
        f"{'decreasing' if monotone else 'NOT decreasing'}; spike shift in fitted coefficients at T={T} {shift:.1e} (<1e-3)",
    )
    assert ok


def test_criterion_8_classical_limit(criterion):
    exact_ok = True
    for n in range(31):
        want = {2 * j - n: Fraction(comb(n, j), 2**n) for j in range(n + 1)}
        exact_ok &= mo.reset_coin_exact_distribution(1, n) == want
    s = mo.reset_coin_simulate(1, 1000)
    var_err = float(np.max(np.abs(s.variance - s.times)))
    ok = exact_ok and var_err <= 1e-8
    criterion(8, ok, f"binomial exact for T<=30: {exact_ok}; max |variance - t| over t<=1000 {var_err:.1e}")
    assert ok
