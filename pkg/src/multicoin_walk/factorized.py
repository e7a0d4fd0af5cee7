"""
M-coin distributions from one-coin conditional kernels.

Each coin takes s = T/M steps of its own one-coin walk, and the moves of
different coins commute.  Conditioning a one-coin walk of s steps on the final
coin value gives two position-space amplitude vectors A_L and A_R.  A final
measurement of all M coins that finds N of them in R leaves the particle in
A_R^N A_L^(M-N) |0>, and there are C(M, N) such records.  Operator powers are
discrete convolutions of the kernel vectors, so the cost is polynomial in M
rather than 2^M.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import combinatorics
from ._parallel import ordered_map
from .core import Distribution, coin_state

__all__ = ["ConditionalKernel", "build_kernel", "record_term", "multicoin_distribution"]


@dataclass(frozen=True)
class ConditionalKernel:
    """
    Shift amplitudes of a one-coin walk conditioned on the final coin value.

    ``a_left[j]`` and ``a_right[j]`` are the amplitudes at displacement
    ``-steps + 2*j`` for j = 0 .. steps; a_left vanishes at +steps and
    a_right at -steps.
    """

    steps: int
    a_left: np.ndarray
    a_right: np.ndarray

    @property
    def shifts(self) -> np.ndarray:
        return np.arange(-self.steps, self.steps + 1, 2)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.a_left) ** 2) + np.sum(np.abs(self.a_right) ** 2))


def build_kernel(steps: int, coin_start="R") -> ConditionalKernel:
    """Kernel for ``steps`` flips of a coin started in ``coin_start``."""
    if int(steps) != steps or steps <= 0 or steps % 2:
        raise ValueError(f"steps per coin must be a positive even integer, got {steps!r}")
    alpha, beta = coin_state(coin_start)
    a_left, a_right = combinatorics.amplitude_table(int(steps), alpha, beta)
    return ConditionalKernel(int(steps), a_left, a_right)


def _power(vec: np.ndarray, n: int) -> np.ndarray:
    out = np.ones(1, dtype=vec.dtype)
    for _ in range(n):
        out = np.convolve(out, vec)
    return out


def record_term(n_right: int, n_coins: int, kernel: ConditionalKernel) -> np.ndarray:
    """
    Unnormalised amplitude vector A_R^N A_L^(M-N) |0>.

    Entry j sits at position ``-n_coins*kernel.steps + 2*j``.
    """
    if not 0 <= n_right <= n_coins:
        raise ValueError(f"need 0 <= N <= M, got N={n_right}, M={n_coins}")
    return np.convolve(_power(kernel.a_right, n_right), _power(kernel.a_left, n_coins - n_right))


def multicoin_distribution(m_coins: int, steps_per_coin: int, coin_start="R") -> Distribution:
    """
    p(x) at total time T = M * steps_per_coin, all coins sharing one start state.

    Returns a Distribution over every x in [-T, T]; odd-parity entries are
    exact zeros.
    """
    if int(m_coins) != m_coins or m_coins < 1:
        raise ValueError(f"m_coins must be a positive integer, got {m_coins!r}")
    kernel = build_kernel(steps_per_coin, coin_start)
    M = int(m_coins)
    total = M * kernel.steps

    # powers built incrementally; each record is then a single convolution
    right_pows = [np.ones(1, dtype=kernel.a_right.dtype)]
    left_pows = [np.ones(1, dtype=kernel.a_left.dtype)]
    for _ in range(M):
        right_pows.append(np.convolve(right_pows[-1], kernel.a_right))
        left_pows.append(np.convolve(left_pows[-1], kernel.a_left))

    def weighted(n):
        term = np.convolve(right_pows[n], left_pows[M - n])
        return comb(M, n) * (term.real**2 + term.imag**2)

    even = np.zeros(total + 1)
    for contrib in ordered_map(weighted, range(M + 1)):
        even += contrib

    probs = np.zeros(2 * total + 1)
    probs[::2] = even
    return Distribution(offset=-total, probs=probs, time=total)
