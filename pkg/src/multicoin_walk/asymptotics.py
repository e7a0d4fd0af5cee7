"""
Long-time stationary-phase approximations to walk amplitudes.

For a coin that has made t turns the amplitude is an integral over k of
e^{i(kx - w(k) t)} times a spectral projector.  For |x| < t/sqrt2 there are
two stationary points, which give terms of size ~ t^{-1/2} whose phase
oscillates rapidly in x.  Near |x| = t/sqrt2 the two points merge (a caustic
of Airy type, with amplitude ~ t^{-1/3}); this band is not modelled and the
approximations return 0 there.

With several coins every coin i contributes a factor from one of the two
eigen-branches, so each sign pattern b in {+,-}^M gives an effective time
tau = sum_i (+-) t_i.  Patterns with tau = 0 give time-independent "central
spike" components near x = 0, evaluated here by direct k quadrature.
"""

from __future__ import annotations

import functools
import itertools
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .core import Distribution
from .fourier import branch_projectors, omega
from .moments import MomentSeries

__all__ = [
    "MIN_TIME",
    "SPIKE_RANGE",
    "caustic_mask",
    "one_coin_asymptotic",
    "two_coin_asymptotic",
    "general_tau_asymptotic",
    "central_spike",
    "two_coin_probability",
    "two_coin_moment_series",
    "asymptotic_distribution",
]

MIN_TIME = 30
SPIKE_RANGE = 12
_INDEX = {"R": 0, "L": 1}
_EDGE = 1 / np.sqrt(2.0)


def caustic_mask(alpha, tau: float) -> np.ndarray:
    """True where |alpha| lies inside the oscillatory region, clear of the caustic band."""
    return np.abs(alpha) < _EDGE - 3.0 * float(tau) ** (-2.0 / 3.0)


def _parity(x, t) -> np.ndarray:
    return 1.0 + (-1.0) ** ((np.asarray(x) + t) % 2)


def _phase_and_prefactor(x, t):
    x = np.asarray(x, dtype=float)
    alpha = x / t
    ok = caustic_mask(alpha, t)
    a = np.where(ok, alpha, 0.0)
    q = np.sqrt(1 - 2 * a * a)
    w0 = np.arcsin(np.sqrt((1 - 2 * a * a) / (2 - 2 * a * a)))
    theta = t * (a * np.arccos(a / np.sqrt(1 - a * a)) - w0) + np.pi / 4
    pref = np.where(ok, _parity(x, t) / np.sqrt(2 * np.pi * t * (1 - a * a) * q), 0.0)
    return a, q, theta, pref


def one_coin_asymptotic(x, t: int):
    """
    (a_L, a_R) for a single coin started in |R>, valid for large t.

    With alpha = x/t and q = sqrt(1 - 2 alpha^2):

        a_R = A (1 + alpha) cos(theta)
        a_L = A (alpha cos(theta) - q sin(theta))

    where A = (1 + (-1)^(x+t)) / sqrt(2 pi t (1 - alpha^2) q) and
    theta = t (alpha arccos(alpha/sqrt(1-alpha^2)) - w0) + pi/4,
    sin(w0) = sqrt((1 - 2 alpha^2) / (2 - 2 alpha^2)).
    Zero outside the oscillatory region.
    """
    if t < MIN_TIME:
        raise ValueError(f"asymptotic form needs t >= {MIN_TIME}, got {t}")
    a, q, theta, pref = _phase_and_prefactor(x, t)
    a_r = pref * (1 + a) * np.cos(theta)
    a_l = pref * (a * np.cos(theta) - q * np.sin(theta))
    return a_l, a_r


def two_coin_asymptotic(x, t: int):
    """
    Time-dependent components (psi_RR, psi_RL, psi_LR, psi_LL) of two coins
    started in |RR>, each having made t/2 turns.

    Each component is A * 2 Re(g_1 g_2 e^{i theta}) with g_R = (1 + alpha)/2
    and g_L = (alpha + i q)/2, using the one-coin A and theta at time t.
    """
    if t % 2:
        raise ValueError(f"t must be even, got {t}")
    if t < MIN_TIME:
        raise ValueError(f"asymptotic form needs t >= {MIN_TIME}, got {t}")
    a, q, theta, pref = _phase_and_prefactor(x, t)
    c, s = np.cos(theta), np.sin(theta)
    rr = pref * (1 + a) ** 2 / 2 * c
    rl = pref * (1 + a) / 2 * (a * c - q * s)
    ll = pref * 0.5 * ((3 * a * a - 1) * c - 2 * a * q * s)
    return rr, rl, rl.copy(), ll


def general_tau_asymptotic(
    x,
    turns: Sequence[int],
    final: str,
    start: str | None = None,
    *,
    tau_min: int = MIN_TIME,
    drop_constant: bool = False,
):
    """
    Stationary-phase amplitude of one component of an M-coin walk.

    Parameters
    ----------
    x : int or array of int
        Positions.
    turns : sequence of int
        Number of flips t_i made by each coin.
    final : str
        Component to evaluate, one letter per coin, e.g. ``"RL"``.
    start : str, optional
        Initial computational-basis state of the coins (default all R).
    tau_min : int
        Sign patterns with 0 < |tau| < tau_min are not asymptotic.
    drop_constant : bool
        Skip the non-asymptotic patterns (including tau = 0) instead of
        raising.  Their contribution is the time-independent spike near x=0.

    Notes
    -----
    For each sign pattern b the branch-b eigenprojector of every coin is
    evaluated at the stationary points k = +-arccos(beta/sqrt(1-beta^2)),
    beta = x/tau, and the pattern contributes

        (-1)^(sum_{b_i=+} t_i) G(k) e^{i(F + sgn(F'') pi/4)} / sqrt(2 pi |F''|)

    with F = k x - w(k) tau and G the product of projector entries.
    """
    turns = [int(v) for v in turns]
    m = len(turns)
    start = start or "R" * m
    if len(final) != m or len(start) != m:
        raise ValueError("final and start need one letter per coin")
    fin = [_INDEX[c] for c in final.upper()]
    ini = [_INDEX[c] for c in start.upper()]
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    total = np.zeros(x.shape, dtype=complex)

    for pattern in itertools.product((0, 1), repeat=m):  # 0: minus branch, 1: plus branch
        tau = sum(t if b == 0 else -t for t, b in zip(turns, pattern))
        if abs(tau) < tau_min:
            if drop_constant:
                continue
            raise ValueError(
                f"sign pattern {pattern} has |tau| = {abs(tau)} < {tau_min}; "
                "use central_spike for the time-independent part or pass drop_constant=True"
            )
        sign = -1.0 if sum(t for t, b in zip(turns, pattern) if b == 1) % 2 else 1.0
        beta = x / tau
        ok = caustic_mask(beta, abs(tau))
        b = np.where(ok, beta, 0.0)
        k0 = np.arccos(b / np.sqrt(1 - b * b))
        for k in (k0, -k0):
            proj = branch_projectors(k)
            g = np.ones(x.shape, dtype=complex)
            for i in range(m):
                g *= proj[pattern[i]][..., fin[i], ini[i]]
            cos_k, sin_k = np.cos(k), np.sin(k)
            r = np.sqrt(1 + cos_k * cos_k)
            phase = k * x - omega(k) * tau
            curv = tau * sin_k / r**3
            with np.errstate(divide="ignore", invalid="ignore"):
                term = sign * g * np.exp(1j * (phase + np.sign(curv) * np.pi / 4)) / np.sqrt(2 * np.pi * np.abs(curv))
            total += np.where(ok, term, 0.0)
    return complex(total[0]) if scalar else total


@functools.lru_cache(maxsize=4096)
def _spike_integrals(x: int):
    # the four k-integrals the spike components are built from
    def integral(f):
        return quad(f, -np.pi, np.pi, epsabs=1e-10, epsrel=1e-10, limit=200)[0]

    w = lambda k: 1 + np.cos(k) ** 2
    i_rr = integral(lambda k: np.cos(k * x) / w(k))
    i_ll = integral(lambda k: np.cos(k * (x + 2)) / w(k))
    s1 = integral(lambda k: np.cos(k * (x + 1)) * np.cos(k) / w(k))
    s2 = integral(lambda k: np.cos(k * (x + 1)) / np.sqrt(w(k)))
    return i_rr, i_ll, s1, s2


def _spike_components(x: int, t1: int, t2: int):
    a, b = (-1.0) ** t1, (-1.0) ** t2
    i_rr, i_ll, s1, s2 = _spike_integrals(int(x))
    c = 1 / (8 * np.pi)
    rr = c * (a + b) * i_rr
    ll = -c * (a + b) * i_ll
    lr = c * (-(a + b) * s1 + (b - a) * s2)
    rl = c * (-(a + b) * s1 + (a - b) * s2)
    return rr, rl, lr, ll


def central_spike(x: int, t1: int, t2: int):
    """
    Time-independent components (psi_RR, psi_LR, psi_LL) near x = 0 for two
    coins started in |RR> with t1 and t2 turns.

    With a = (-1)^t1, b = (-1)^t2 and n(k) = 1 + cos^2 k:

        psi_RR(x) =  (a+b)/8pi int cos(kx) / n(k) dk
        psi_LL(x) = -(a+b)/8pi int cos(k(x+2)) / n(k) dk  =  -psi_RR(x+2)
        psi_LR(x) = [-(a+b) int cos(k(x+1)) cos k / n(k) dk
                      + (b-a) int cos(k(x+1)) / sqrt(n(k)) dk] / 8pi

    integrated over [-pi, pi] by adaptive quadrature.
    """
    if abs(x) > SPIKE_RANGE:
        raise ValueError(f"spike components are evaluated for |x| <= {SPIKE_RANGE}, got {x}")
    rr, _, lr, ll = _spike_components(x, t1, t2)
    return rr, lr, ll


def two_coin_probability(x, t: int, *, include_spikes: bool = True) -> np.ndarray:
    """Approximate p(x, t) for two |R> coins, t/2 turns each."""
    x = np.atleast_1d(np.asarray(x, dtype=int))
    comps = np.stack(two_coin_asymptotic(x, t), axis=1).astype(float)
    if include_spikes:
        for i, xx in enumerate(x):
            if abs(xx) <= SPIKE_RANGE:
                comps[i] += _spike_components(int(xx), t // 2, t // 2)
    return np.sum(comps**2, axis=1)


def two_coin_moment_series(times: Sequence[int], *, include_spikes: bool = True) -> MomentSeries:
    """Moments of the asymptotic two-coin distribution at the given even times."""
    mean, second = [], []
    for t in times:
        x = np.arange(-t, t + 1)
        p = two_coin_probability(x, t, include_spikes=include_spikes)
        mean.append(float(np.dot(x, p)))
        second.append(float(np.dot(x * x.astype(float), p)))
    return MomentSeries.from_moments(list(times), mean, second)


def asymptotic_distribution(m_coins: int, t: int) -> Distribution:
    """
    Stationary-phase p(x, t) for M coins started in |R>, t/M turns each.

    M = 2 includes the central spike; for other even M the constant-tau
    patterns are dropped.
    """
    if t % m_coins:
        raise ValueError(f"t must be a multiple of M (t={t}, M={m_coins})")
    x = np.arange(-t, t + 1)
    if m_coins == 1:
        a_l, a_r = one_coin_asymptotic(x, t)
        probs = a_l**2 + a_r**2
    elif m_coins == 2:
        probs = two_coin_probability(x, t)
    else:
        turns = [t // m_coins] * m_coins
        probs = np.zeros(x.shape)
        for final in itertools.product("RL", repeat=m_coins):
            amp = general_tau_asymptotic(x, turns, "".join(final), drop_constant=True)
            probs += np.abs(amp) ** 2
    return Distribution(offset=-t, probs=probs, time=t)
