"""
Exact single-coin amplitudes by counting classical paths.

A length-t path is a string of R/L moves.  Its amplitude is
(+-1) * 2^{-t/2}; the sign is -1 for each L that directly follows another L
(the only negative entry of the Hadamard matrix).  Grouping paths by the
number C of L-clusters gives closed binomial sums.  All sums are done in
Python integers; only the common factor 2^{-t/2} is kept symbolic.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, sqrt

import numpy as np

__all__ = [
    "BRUTE_FORCE_MAX_T",
    "binom",
    "PathCounts",
    "ExactAmplitude",
    "path_counts",
    "amp_from_R",
    "amp_from_L",
    "amp_general",
    "brute_force_paths",
    "cluster_terms",
    "amplitude_table",
]

BRUTE_FORCE_MAX_T = 24


def binom(a: int, b: int) -> int:
    """Binomial coefficient, zero whenever b > a, b < 0 or a < 0."""
    if a < 0 or b < 0 or b > a:
        return 0
    return comb(a, b)


@dataclass(frozen=True)
class PathCounts:
    n_left: int
    n_right: int

    @property
    def t(self) -> int:
        return self.n_left + self.n_right

    @property
    def x(self) -> int:
        return self.n_right - self.n_left


@dataclass(frozen=True)
class ExactAmplitude:
    """The real number ``numerator * 2**(-scale_exponent / 2)``."""

    numerator: int
    scale_exponent: int

    def __float__(self) -> float:
        half, odd = divmod(self.scale_exponent, 2)
        val = self.numerator / (1 << half)
        return val / sqrt(2.0) if odd else val

    def squared(self) -> Fraction:
        """Exact probability contribution numerator^2 / 2^t."""
        return Fraction(self.numerator**2, 1 << self.scale_exponent)


def path_counts(x: int, t: int) -> PathCounts:
    """N_L and N_R for a walk that ends at x after t steps."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if abs(x) > t:
        raise ValueError(f"|x| = {abs(x)} exceeds t = {t}")
    if (x + t) % 2:
        raise ValueError(f"x + t must be even (x={x}, t={t})")
    return PathCounts(n_left=(t - x) // 2, n_right=(t + x) // 2)


def _upper(pc: PathCounts) -> int:
    # C runs to N_L for x >= 0 and to N_R + 1 for x < 0
    return pc.n_left if pc.x >= 0 else pc.n_right + 1


def cluster_terms(x: int, t: int, *, split: bool = False) -> tuple[list[int], list[int]]:
    """
    Per-cluster-count terms of the R-start sums, C = 1 .. upper limit.

    With ``split=True`` the R-count factor is written as the sum of two
    binomials in N_R - 1 (the form before Pascal's rule is applied).
    """
    pc = path_counts(x, t)
    nl, nr = pc.n_left, pc.n_right
    left, right = [], []
    for c in range(1, _upper(pc) + 1):
        sign = -1 if (nl - c) % 2 else 1
        lead = sign * binom(nl - 1, c - 1)
        if split:
            left.append(lead * (binom(nr - 1, c - 2) + binom(nr - 1, c - 1)))
            right.append(lead * (binom(nr - 1, c - 1) + binom(nr - 1, c)))
        else:
            left.append(lead * binom(nr, c - 1))
            right.append(lead * binom(nr, c))
    return left, right


def _cluster_sums(pc: PathCounts, weighted: bool) -> tuple[int, int]:
    # same sums as cluster_terms, with each binomial updated from the previous
    # term (exact integer division) instead of recomputed
    nl, nr = pc.n_left, pc.n_right
    b_lead = 1  # C(N_L - 1, C - 1)
    b_nr = 1  # C(N_R, C - 1); C(N_R, C) is the next value
    num_l = num_r = 0
    for c in range(1, _upper(pc) + 1):
        b_next = b_nr * (nr - c + 1) // c
        term = -b_lead if (nl - c) % 2 else b_lead
        if weighted:
            num_l += term * b_nr * (nr - 2 * c + 2)
            num_r += term * b_next * (nr - 2 * c)
        else:
            num_l += term * b_nr
            num_r += term * b_next
        if b_lead == 0 and b_next == 0:
            break
        b_lead = b_lead * (nl - c) // c
        b_nr = b_next
    return num_l, num_r


def amp_from_R(x: int, t: int) -> tuple[ExactAmplitude, ExactAmplitude]:
    """Exact (a_L, a_R) at (x, t) for a walk started in |0>|R>."""
    pc = path_counts(x, t)
    if pc.n_left == 0:
        # only the all-R path; t = 0 lands here too
        return ExactAmplitude(0, t), ExactAmplitude(1, t)
    num_l, num_r = _cluster_sums(pc, weighted=False)
    return ExactAmplitude(num_l, t), ExactAmplitude(num_r, t)


def amp_from_L(x: int, t: int) -> tuple[ExactAmplitude, ExactAmplitude]:
    """Exact (b_L, b_R) at (x, t) for a walk started in |0>|L>."""
    pc = path_counts(x, t)
    nl, nr = pc.n_left, pc.n_right
    if t == 0:
        return ExactAmplitude(1, 0), ExactAmplitude(0, 0)
    if nl == 0:
        return ExactAmplitude(0, t), ExactAmplitude(1, t)
    if nr == 0:
        # single all-L path; the leading L costs an extra sign
        return ExactAmplitude(-((-1) ** (nl - 1)), t), ExactAmplitude(0, t)
    num_l, num_r = _cluster_sums(pc, weighted=True)
    ql, rl = divmod(num_l, nr)
    qr, rr = divmod(num_r, nr)
    if rl or rr:
        raise ArithmeticError(f"non-integer L-start sum at x={x}, t={t}")
    return ExactAmplitude(ql, t), ExactAmplitude(qr, t)


def amp_general(x: int, t: int, alpha: complex, beta: complex) -> tuple[complex, complex]:
    """(g_L, g_R) for the initial coin alpha|R> + beta|L>."""
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"coin state not normalised: |a|^2+|b|^2 = {norm!r}")
    a_l, a_r = amp_from_R(x, t)
    b_l, b_r = amp_from_L(x, t)
    g_l = alpha * float(a_l) + beta * float(b_l)
    g_r = alpha * float(a_r) + beta * float(b_r)
    return complex(g_l), complex(g_r)


@functools.lru_cache(maxsize=8)
def _enumerate(t: int, start_left: bool) -> tuple[tuple[int, ...], tuple[int, ...]]:
    # bit i of a mask is step i+1, set for an L move
    n_x = t + 1
    out_l = np.zeros(n_x, dtype=np.int64)
    out_r = np.zeros(n_x, dtype=np.int64)
    if t == 0:
        (out_l if start_left else out_r)[0] = 1
        return tuple(out_l.tolist()), tuple(out_r.tolist())
    total = 1 << t
    chunk = 1 << 20
    last = np.uint32(1 << (t - 1))
    for lo in range(0, total, chunk):
        m = np.arange(lo, min(lo + chunk, total), dtype=np.uint32)
        pairs = np.bitwise_count(m & (m >> np.uint32(1))).astype(np.int64)
        if start_left:
            pairs += (m & np.uint32(1)).astype(np.int64)
        sign = 1 - 2 * (pairs & 1)
        n_left = np.bitwise_count(m).astype(np.int64)
        ends_l = (m & last) != 0
        out_l += np.bincount(n_left[ends_l], weights=sign[ends_l], minlength=n_x).astype(np.int64)
        out_r += np.bincount(n_left[~ends_l], weights=sign[~ends_l], minlength=n_x).astype(np.int64)
    return tuple(out_l.tolist()), tuple(out_r.tolist())


def brute_force_paths(x: int, t: int, start: str = "R") -> tuple[ExactAmplitude, ExactAmplitude]:
    """
    (amp_L, amp_R) at (x, t) by summing every length-t path.

    Independent of the closed forms; used as an oracle.  Cost is 2^t, so t is
    limited to ``BRUTE_FORCE_MAX_T``.
    """
    if t > BRUTE_FORCE_MAX_T:
        raise ValueError(f"brute-force enumeration limited to t <= {BRUTE_FORCE_MAX_T}, got {t}")
    start = start.upper()
    if start not in ("R", "L"):
        raise ValueError(f"start must be 'R' or 'L', got {start!r}")
    pc = path_counts(x, t)
    left, right = _enumerate(t, start == "L")
    return ExactAmplitude(left[pc.n_left], t), ExactAmplitude(right[pc.n_left], t)


def amplitude_table(t: int, alpha: complex = 1.0, beta: complex = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """
    Floating (g_L, g_R) on x = -t, -t+2, ..., t for the start alpha|R> + beta|L>.

    Real output when the start is |R> or |L>.
    """
    xs = range(-t, t + 1, 2)
    a = [amp_from_R(x, t) for x in xs] if alpha != 0 else None
    b = [amp_from_L(x, t) for x in xs] if beta != 0 else None
    n = t + 1
    real = (a is None or complex(alpha).imag == 0) and (b is None or complex(beta).imag == 0)
    dtype = float if real else complex
    g_l = np.zeros(n, dtype=dtype)
    g_r = np.zeros(n, dtype=dtype)
    if a is not None:
        c = complex(alpha).real if real else alpha
        g_l += c * np.array([float(p[0]) for p in a])
        g_r += c * np.array([float(p[1]) for p in a])
    if b is not None:
        c = complex(beta).real if real else beta
        g_l += c * np.array([float(p[0]) for p in b])
        g_r += c * np.array([float(p[1]) for p in b])
    return g_l, g_r
