"""
Direct state-vector simulation of discrete-time walks on the integer line.

A walk with M two-level coins lives in the space |x> (x) |c_1 ... c_M>.  The
state is stored as a dense table ``amps[row, coin]`` over a contiguous window
of positions starting at ``offset``.

Coin basis ordering
-------------------
Coin 1 is the most significant bit of the coin index, and each coin uses
R = 0, L = 1.  For M = 2 the columns are therefore RR, RL, LR, LL.

One step with coin m applies the Hadamard flip

    |R> -> (|R> + |L>)/sqrt(2),   |L> -> (|R> - |L>)/sqrt(2)

to coin m and then moves the particle +1 where coin m reads R and -1 where
it reads L.  Memory grows as 2^M, so M is capped (``DIRECT_SIM_CAP``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "DIRECT_SIM_CAP",
    "R",
    "L",
    "SYMMETRIC",
    "R_INDEX",
    "L_INDEX",
    "Schedule",
    "CoinSpec",
    "WalkState",
    "Distribution",
    "coin_state",
    "hadamard",
    "initial_state",
    "step",
    "evolve",
    "measure_positions",
]

DIRECT_SIM_CAP = 16

R_INDEX = 0
L_INDEX = 1

_SQRT_HALF = np.sqrt(0.5)

# Named single-coin presets, as (amplitude on R, amplitude on L).
R = (1.0 + 0j, 0j)
L = (0j, 1.0 + 0j)
SYMMETRIC = (_SQRT_HALF + 0j, 1j * _SQRT_HALF)

_PRESETS = {"R": R, "L": L, "SYMMETRIC": SYMMETRIC}


def hadamard() -> np.ndarray:
    """The 2x2 Hadamard coin flip in the (R, L) basis."""
    return np.array([[1.0, 1.0], [1.0, -1.0]]) * _SQRT_HALF


def coin_state(spec) -> tuple[complex, complex]:
    """
    Normalise a single-coin state description to an (alpha, beta) pair.

    Accepts a preset name ("R", "L", "SYMMETRIC") or a pair of numbers giving
    the R and L amplitudes.  Raises ValueError if the pair is not normalised
    to within 1e-12.
    """
    if isinstance(spec, str):
        try:
            return _PRESETS[spec.upper()]
        except KeyError:
            raise ValueError(f"unknown coin preset {spec!r}") from None
    alpha, beta = (complex(v) for v in spec)
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"coin state not normalised: |a|^2+|b|^2 = {norm!r}")
    return alpha, beta


class Schedule(enum.Enum):
    """Order in which the coins are flipped."""

    CYCLIC = "cyclic"  # 1, 2, ..., M, 1, 2, ...
    BLOCK = "block"  # coin 1 for t/M steps, then coin 2, ...


@dataclass(frozen=True)
class CoinSpec:
    """Number of coins, their initial states and the flip schedule."""

    m_coins: int
    initial: tuple[tuple[complex, complex], ...]
    schedule: Schedule = Schedule.CYCLIC

    def __post_init__(self):
        if int(self.m_coins) != self.m_coins or self.m_coins < 1:
            raise ValueError(f"m_coins must be a positive integer, got {self.m_coins!r}")
        if len(self.initial) != self.m_coins:
            raise ValueError(
                f"need {self.m_coins} initial coin states, got {len(self.initial)}"
            )
        object.__setattr__(self, "initial", tuple(coin_state(s) for s in self.initial))
        object.__setattr__(self, "schedule", Schedule(self.schedule))

    @classmethod
    def uniform(cls, m_coins: int, start="R", schedule=Schedule.CYCLIC) -> "CoinSpec":
        """All M coins start in the same single-coin state."""
        return cls(m_coins, (coin_state(start),) * m_coins, schedule)

    def coin_vector(self) -> np.ndarray:
        """Tensor product of the initial coin states (coin 1 most significant)."""
        vec = np.ones(1, dtype=complex)
        for alpha, beta in self.initial:
            vec = np.kron(vec, np.array([alpha, beta]))
        return vec


@dataclass(frozen=True)
class Distribution:
    """Position probabilities ``probs[i] = p(offset + i)`` at a given time."""

    offset: int
    probs: np.ndarray
    time: int

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.probs))

    def total(self) -> float:
        return float(self.probs.sum())

    def prob(self, x: int) -> float:
        i = x - self.offset
        if 0 <= i < len(self.probs):
            return float(self.probs[i])
        return 0.0

    def on_window(self, lo: int, hi: int) -> np.ndarray:
        """Probabilities on positions lo..hi inclusive, zero outside the support."""
        out = np.zeros(hi - lo + 1)
        a, b = max(lo, self.offset), min(hi, self.offset + len(self.probs) - 1)
        if a <= b:
            out[a - lo : b - lo + 1] = self.probs[a - self.offset : b - self.offset + 1]
        return out

    def max_abs_diff(self, other: "Distribution") -> float:
        lo = min(self.offset, other.offset)
        hi = max(self.offset + len(self.probs), other.offset + len(other.probs)) - 1
        return float(np.max(np.abs(self.on_window(lo, hi) - other.on_window(lo, hi))))

    def l1_diff(self, other: "Distribution") -> float:
        lo = min(self.offset, other.offset)
        hi = max(self.offset + len(self.probs), other.offset + len(other.probs)) - 1
        return float(np.sum(np.abs(self.on_window(lo, hi) - other.on_window(lo, hi))))


@dataclass(frozen=True)
class WalkState:
    """
    Full walk state: dense amplitude table over a position window.

    Attributes
    ----------
    offset : int
        Position of row 0 of ``amps``.
    amps : ndarray, shape (n_positions, 2**m_coins), complex
        ``amps[x - offset, c]``; coin index ordering described in the module
        docstring.
    m_coins : int
        Number of coins M.
    time : int
        Number of steps applied since the initial state.  The CYCLIC schedule
        resumes from ``time mod M``.
    """

    offset: int
    amps: np.ndarray
    m_coins: int
    time: int = 0
    origin: int = field(default=0, compare=False)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def amplitude(self, x: int, coin: int) -> complex:
        i = x - self.offset
        if 0 <= i < self.amps.shape[0]:
            return complex(self.amps[i, coin])
        return 0j


def initial_state(coin_spec: CoinSpec, x0: int = 0, *, cap: int | None = None) -> WalkState:
    """|x0> tensored with the product of the initial coin states."""
    cap = DIRECT_SIM_CAP if cap is None else cap
    if coin_spec.m_coins > cap:
        raise ValueError(
            f"{coin_spec.m_coins} coins exceeds the direct simulation cap of {cap} "
            f"(2^{coin_spec.m_coins} coin amplitudes per position); "
            "use the factorized module for many coins"
        )
    amps = coin_spec.coin_vector()[None, :].copy()
    return WalkState(offset=x0, amps=amps, m_coins=coin_spec.m_coins, time=0, origin=x0)


def step(state: WalkState, active_coin: int) -> WalkState:
    """Flip coin ``active_coin`` (1-based) and shift conditioned on its value."""
    m, M = active_coin, state.m_coins
    if not 1 <= m <= M:
        raise ValueError(f"active coin must be in 1..{M}, got {m}")
    n = state.amps.shape[0]
    a = state.amps.reshape(n, 2 ** (m - 1), 2, 2 ** (M - m))
    right = (a[:, :, R_INDEX, :] + a[:, :, L_INDEX, :]) * _SQRT_HALF
    left = (a[:, :, R_INDEX, :] - a[:, :, L_INDEX, :]) * _SQRT_HALF
    new = np.zeros((n + 2,) + a.shape[1:], dtype=state.amps.dtype)
    new[2:, :, R_INDEX, :] = right
    new[:n, :, L_INDEX, :] = left
    return WalkState(
        offset=state.offset - 1,
        amps=new.reshape(n + 2, 2**M),
        m_coins=M,
        time=state.time + 1,
        origin=state.origin,
    )


def coin_sequence(m_coins: int, t: int, schedule: Schedule, start_time: int = 0) -> list[int]:
    """The 1-based active coin for each of the next ``t`` steps."""
    schedule = Schedule(schedule)
    if schedule is Schedule.CYCLIC:
        return [(start_time + s) % m_coins + 1 for s in range(t)]
    if t % m_coins:
        raise ValueError(f"BLOCK schedule needs t divisible by M (t={t}, M={m_coins})")
    per = t // m_coins
    return [m for m in range(1, m_coins + 1) for _ in range(per)]


def evolve(state: WalkState, t: int, schedule: Schedule = Schedule.CYCLIC) -> WalkState:
    """Apply ``t`` single steps following ``schedule``."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    for m in coin_sequence(state.m_coins, t, schedule, state.time):
        state = step(state, m)
    return state


def iter_evolve(state: WalkState, t: int, schedule: Schedule = Schedule.CYCLIC):
    """Yield the state after each of the next ``t`` steps."""
    for m in coin_sequence(state.m_coins, t, schedule, state.time):
        state = step(state, m)
        yield state


def measure_positions(state: WalkState) -> Distribution:
    """Position marginal p(x) = sum_c |amp(x, c)|^2."""
    probs = np.sum(state.amps.real**2 + state.amps.imag**2, axis=1)
    np.maximum(probs, 0.0, out=probs)
    return Distribution(offset=state.offset, probs=probs, time=state.time)


def spec_from_starts(starts: Sequence, schedule=Schedule.CYCLIC) -> CoinSpec:
    return CoinSpec(len(starts), tuple(coin_state(s) for s in starts), schedule)


def distribution_to_dict(dist: Distribution) -> dict:
    """Plain-Python form of a Distribution (JSON friendly)."""
    return {
        "offset": int(dist.offset),
        "time": int(dist.time),
        "probs": [float(p) for p in dist.probs],
    }


def distribution_from_dict(data: dict) -> Distribution:
    return Distribution(
        offset=int(data["offset"]),
        probs=np.asarray(data["probs"], dtype=float),
        time=int(data["time"]),
    )
