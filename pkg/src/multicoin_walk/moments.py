"""
First and second position moments of one- and many-coin walks.

Four routes are provided:

* empirical sums over a Distribution and time series from direct simulation,
* least-squares fits of those series to c1*t and c2*t^2,
* momentum-space quadrature of the time-averaged velocity built from the
  numerically diagonalised M-coin step U_k,
* closed forms, and the walk whose single coin is measured and reset every
  d steps.

Sign convention: the k-space routines (``closed_form_multicoin``,
``spectral_coefficients``, ``reset_coin_coefficients``) share the sign
convention of the closed form for c1, which is the drift of -x for the walk
simulated in ``core``.  c2 and the variance are unaffected.  Simulated series
and fits report the physical drift of x.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import comb, sqrt

import numpy as np
import scipy.fft
import scipy.linalg
from scipy.sparse.csgraph import connected_components
from scipy.special import gammaln

from . import combinatorics, core
from ._parallel import ordered_map
from .errors import NumericError, ResourceLimitError
from .fourier import Z, hadamard_k, hadamard_k_power_sum

__all__ = [
    "SPECTRAL_CAP",
    "RESET_MAX_STEPS",
    "RESET_MAX_CELLS",
    "QuadRule",
    "KQuadrature",
    "MomentSeries",
    "MomentCoefficients",
    "empirical_moments",
    "direct_moment_series",
    "fit_coefficients",
    "closed_form_multicoin",
    "spectral_coefficients",
    "zkd_matrix",
    "reset_coin_coefficients",
    "reset_coin_moment_formula",
    "reset_coin_simulate",
    "reset_coin_exact_distribution",
]

SPECTRAL_CAP = 10
RESET_MAX_STEPS = 10_000
RESET_MAX_CELLS = 40_000_000
DEGENERACY_TOL = 1e-9
MIN_FIT_TIME = 200
# branch vectors are rescaled this often; kernel spectra are bounded by 1
RENORM_EVERY = 8
# rows whose log-weight trails the largest by more than this are dropped
PRUNE_LOG_WEIGHT = 60.0


class QuadRule(enum.Enum):
    GAUSS_LEGENDRE = "gauss-legendre"
    TRAPEZOID = "trapezoid"


@dataclass(frozen=True)
class KQuadrature:
    """Nodes and weights on [-pi, pi]; the weights sum to 2*pi."""

    nodes: np.ndarray
    weights: np.ndarray
    rule: QuadRule

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @classmethod
    def gauss_legendre(cls, n: int = 257) -> "KQuadrature":
        if n < 1:
            raise ValueError(f"need at least one node, got {n}")
        u, w = np.polynomial.legendre.leggauss(n)
        return cls(np.pi * u, np.pi * w, QuadRule.GAUSS_LEGENDRE)

    @classmethod
    def trapezoid(cls, n: int = 256) -> "KQuadrature":
        """Equally spaced periodic rule, exact for trig polynomials of degree < n."""
        if n < 1:
            raise ValueError(f"need at least one node, got {n}")
        nodes = -np.pi + 2 * np.pi * np.arange(n) / n
        return cls(nodes, np.full(n, 2 * np.pi / n), QuadRule.TRAPEZOID)

    @classmethod
    def make(cls, rule, n: int) -> "KQuadrature":
        rule = QuadRule(rule)
        if rule is QuadRule.GAUSS_LEGENDRE:
            return cls.gauss_legendre(n)
        return cls.trapezoid(n)

    def average(self, values) -> float:
        """int dk/2pi f(k) from samples at the nodes."""
        return float(np.dot(self.weights, np.asarray(values, dtype=float)) / (2 * np.pi))


@dataclass(frozen=True)
class MomentSeries:
    times: np.ndarray
    mean: np.ndarray
    second: np.ndarray
    variance: np.ndarray

    @classmethod
    def from_moments(cls, times, mean, second) -> "MomentSeries":
        times = np.asarray(times, dtype=int)
        mean = np.asarray(mean, dtype=float)
        second = np.asarray(second, dtype=float)
        var = np.maximum(second - mean**2, 0.0)
        return cls(times, mean, second, var)

    def to_dict(self) -> dict:
        return {
            "times": [int(t) for t in self.times],
            "mean": [float(v) for v in self.mean],
            "second": [float(v) for v in self.second],
            "variance": [float(v) for v in self.variance],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MomentSeries":
        return cls(
            np.asarray(data["times"], dtype=int),
            np.asarray(data["mean"], dtype=float),
            np.asarray(data["second"], dtype=float),
            np.asarray(data["variance"], dtype=float),
        )


@dataclass(frozen=True)
class MomentCoefficients:
    """
    Long-time coefficients: <x> ~ c1 t and <x^2> ~ c2 t^2.

    ``residual`` is the RMS misfit of the second-moment fit divided by T^2
    (None for values that were not fitted).
    """

    c1: float
    c2: float
    var_coeff: float
    residual: float | None = None

    @classmethod
    def from_c(cls, c1: float, c2: float, residual: float | None = None) -> "MomentCoefficients":
        return cls(float(c1), float(c2), float(c2 - c1 * c1), residual)


def empirical_moments(dist: core.Distribution) -> tuple[float, float]:
    """(sum_x x p(x), sum_x x^2 p(x))."""
    x = dist.positions.astype(float)
    p = dist.probs
    return float(np.dot(x, p)), float(np.dot(x * x, p))


def direct_moment_series(
    m_coins: int,
    total_time: int,
    coin_start="R",
    schedule: core.Schedule = core.Schedule.CYCLIC,
) -> MomentSeries:
    """Moments at every t = 0..total_time from direct state-vector evolution."""
    spec = core.spec_from_starts(_coin_starts(coin_start, m_coins), schedule)
    state = core.initial_state(spec)
    times, mean, second = [0], [0.0], [0.0]
    for st in core.iter_evolve(state, total_time, schedule):
        dist = core.measure_positions(st)
        m1, m2 = empirical_moments(dist)
        times.append(st.time)
        mean.append(m1)
        second.append(m2)
    return MomentSeries.from_moments(times, mean, second)


def fit_coefficients(series: MomentSeries, window: float = 0.5) -> MomentCoefficients:
    """
    Fit mean = c1 t and second = c2 t^2 (no intercepts) on t in [window*T, T].

    Oscillatory terms average out over the window; the first part of the
    series is discarded as transient.
    """
    times = np.asarray(series.times, dtype=float)
    if times.size == 0:
        raise ValueError("empty moment series")
    T = times.max()
    if T < MIN_FIT_TIME:
        raise ValueError(f"series must reach t >= {MIN_FIT_TIME} for a fit, got T={T:g}")
    sel = times >= window * T
    if np.count_nonzero(sel) < 3:
        raise ValueError("too few samples in the fit window")
    t = times[sel]
    m1 = np.asarray(series.mean, dtype=float)[sel]
    m2 = np.asarray(series.second, dtype=float)[sel]
    c1 = np.dot(t, m1) / np.dot(t, t)
    t2 = t * t
    c2 = np.dot(t2, m2) / np.dot(t2, t2)
    resid = float(np.sqrt(np.mean((m2 - c2 * t2) ** 2)) / T**2)
    return MomentCoefficients.from_c(c1, c2, resid)


def closed_form_multicoin(m_coins: int) -> MomentCoefficients:
    """Closed-form c1, c2 and c2 - c1^2 for M coins all started in |R>."""
    if m_coins < 1:
        raise ValueError(f"m_coins must be >= 1, got {m_coins}")
    r = 4 * sqrt(2.0)
    c1 = 1 / sqrt(2.0) - 1
    c2 = 1 - 5 / r + 1 / (m_coins * r)
    var = (3 - 2 * sqrt(2.0) + 1 / m_coins) / r
    return MomentCoefficients(c1, c2, var)


def _coin_starts(spec, m_coins: int) -> list[tuple[complex, complex]]:
    # one shared start (preset name or (alpha, beta)) or a list of M of them
    if isinstance(spec, str):
        return [core.coin_state(spec)] * m_coins
    items = list(spec)
    if len(items) == 2 and all(isinstance(v, (int, float, complex, np.number)) for v in items):
        return [core.coin_state(items)] * m_coins
    if len(items) != m_coins:
        raise ValueError(f"need {m_coins} coin starts, got {len(items)}")
    return [core.coin_state(s) for s in items]


def _rotation_indices(m_coins: int) -> np.ndarray:
    # P|c1 c2 .. cM> = |c2 .. cM c1>; dest[c] is the image of basis index c
    n = 1 << m_coins
    c = np.arange(n)
    return ((c << 1) & (n - 1)) | (c >> (m_coins - 1))


def _spectral_node(k: float, m_coins: int, phi0: np.ndarray, dest: np.ndarray):
    n = 1 << m_coins
    perm = np.zeros((n, n))
    perm[dest, np.arange(n)] = 1.0
    u = np.kron(hadamard_k(k), np.eye(n // 2)) @ perm
    t_mat, vecs = scipy.linalg.schur(u, output="complex")
    lam = np.diag(t_mat)
    if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(vecs))):
        raise FloatingPointError("non-finite eigen-decomposition")
    close = np.abs(lam[:, None] - lam[None, :]) < DEGENERACY_TOL
    n_groups, labels = connected_components(close, directed=False)
    z = np.where(np.arange(n) < n // 2, 1.0, -1.0)
    v1 = v2 = 0.0
    for g in range(n_groups):
        basis = vecs[:, labels == g]
        proj = basis @ (basis.conj().T @ phi0)
        zp = z * proj
        v1 += float(np.real(np.vdot(proj, zp)))
        v2 += float(np.sum(np.abs(basis.conj().T @ zp) ** 2))
    return v1, v2


def spectral_coefficients(
    m_coins: int,
    coin_start="R",
    quad: KQuadrature | None = None,
    *,
    cap: int = SPECTRAL_CAP,
) -> MomentCoefficients:
    """
    Long-time coefficients from the eigenprojectors of the M-coin step U_k.

    U_k = (H_k (x) I) P where P cyclically moves coin 2 into the first slot.
    For each k node the time-averaged velocity is V_k = sum_l Pi_l Z_1 Pi_l
    (Pi_l the eigenprojectors, eigenvalues closer than 1e-9 merged), and

        c1 = -int dk/2pi <Phi0|V_k|Phi0>,  c2 = int dk/2pi <Phi0|V_k^2|Phi0>.
    """
    if m_coins < 1:
        raise ValueError(f"m_coins must be >= 1, got {m_coins}")
    if m_coins > cap:
        raise ResourceLimitError(
            f"spectral quadrature limited to M <= {cap} (2^M-dim eigenproblem per node)"
        )
    quad = quad or KQuadrature.gauss_legendre(257)
    starts = _coin_starts(coin_start, m_coins)
    phi = np.ones(1, dtype=complex)
    for alpha, beta in starts:
        phi = np.kron(phi, np.array([alpha, beta]))
    dest = _rotation_indices(m_coins)
    # start vector before the first rotation, so coin 1 is flipped first
    phi0 = np.empty_like(phi)
    phi0[np.arange(len(phi))] = phi[dest]

    def node(i):
        try:
            return _spectral_node(float(quad.nodes[i]), m_coins, phi0, dest)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
            raise NumericError(f"eigensolver failed at k node {i} (k={quad.nodes[i]!r}): {exc}") from exc

    vals = np.array(ordered_map(node, range(quad.n_nodes)))
    c1 = -quad.average(vals[:, 0])
    c2 = quad.average(vals[:, 1])
    if not (np.isfinite(c1) and np.isfinite(c2)):
        raise NumericError("non-finite spectral coefficients")
    return MomentCoefficients.from_c(c1, c2)


def zkd_matrix(d: int, k: float) -> np.ndarray:
    """Z_kd = sum_{l=1..d} (H_k^dagger)^l Z H_k^l, symmetrised to be exactly Hermitian."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    m = hadamard_k_power_sum(d, float(k), Z)[0]
    return 0.5 * (m + m.conj().T)


def _zkd_expectations(d: int, coin_start, quad: KQuadrature):
    alpha, beta = core.coin_state(coin_start)
    phi = np.array([alpha, beta])
    mats = hadamard_k_power_sum(d, quad.nodes, Z)
    mats = 0.5 * (mats + np.conj(np.swapaxes(mats, -1, -2)))
    zp = mats @ phi
    first = np.real(np.einsum("i,ki->k", phi.conj(), zp))
    squared = np.real(np.einsum("ki,ki->k", zp.conj(), zp))
    return first, squared


def _default_reset_quad(d: int) -> KQuadrature:
    # <Z_kd> is a trig polynomial of degree <= 2d, its square <= 4d
    return KQuadrature.trapezoid(max(64, 4 * d + 1))


def reset_coin_coefficients(d: int, coin_start="R", quad: KQuadrature | None = None) -> MomentCoefficients:
    """
    Coefficients of the walk whose coin is measured and reset every d steps.

        c1 = -(1/d)   int dk/2pi <Phi0|Z_kd|Phi0>
        c2 =  (1/d^2) int dk/2pi <Phi0|Z_kd|Phi0>^2

    The default rule is a trapezoid with more than 4d nodes, which integrates
    these trigonometric polynomials exactly.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    quad = quad or _default_reset_quad(d)
    first, _ = _zkd_expectations(d, coin_start, quad)
    c1 = -quad.average(first) / d
    c2 = quad.average(first**2) / d**2
    return MomentCoefficients.from_c(c1, c2)


def reset_coin_moment_formula(d: int, n_blocks: int, coin_start="R", quad: KQuadrature | None = None) -> MomentSeries:
    """
    Exact moments of the reset walk at t = d*n for n = 0..n_blocks.

    Blocks are independent in k-space, which gives (with z = <Phi0|Z_kd|Phi0>
    and averages over k)

        <x>   = n <z>
        <x^2> = n <Phi0|Z_kd^2|Phi0> + n (n - 1) <z^2>.

    The mean here is the physical drift of x (opposite sign to c1 from
    ``reset_coin_coefficients``).
    """
    if d < 1 or n_blocks < 0:
        raise ValueError("need d >= 1 and n_blocks >= 0")
    quad = quad or _default_reset_quad(d)
    first, squared = _zkd_expectations(d, coin_start, quad)
    z1, z_sq, z1_sq = quad.average(first), quad.average(squared), quad.average(first**2)
    n = np.arange(n_blocks + 1, dtype=float)
    return MomentSeries.from_moments(d * n.astype(int), n * z1, n * z_sq + n * (n - 1) * z1_sq)


def _one_coin_kernel(d: int, coin_start) -> tuple[np.ndarray, np.ndarray]:
    # (a_L, a_R) on shifts -d, -d+2, .., d after d direct steps
    state = core.evolve(core.initial_state(core.spec_from_starts([coin_start])), d)
    amps = state.amps[::2]
    a_l, a_r = amps[:, core.L_INDEX], amps[:, core.R_INDEX]
    if np.all(a_l.imag == 0) and np.all(a_r.imag == 0):
        return a_l.real.copy(), a_r.real.copy()
    return a_l.copy(), a_r.copy()


def _log_binom(n: int, k: np.ndarray) -> np.ndarray:
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


class _Spectrum:
    """DFT grid for branch vectors; half spectrum when the sequences are real."""

    def __init__(self, size: int, real: bool):
        self.size = size
        self.real = real
        if real:
            w = np.full(size // 2 + 1, 2.0)
            w[0] = 1.0
            if size % 2 == 0:
                w[-1] = 1.0
            self.parseval = w / size
        else:
            self.parseval = np.full(size, 1.0 / size)

    def forward(self, vec):
        if self.real:
            return scipy.fft.rfft(np.real(vec), self.size)
        return scipy.fft.fft(vec, self.size)

    def inverse(self, values):
        if self.real:
            return scipy.fft.irfft(values, self.size)
        return scipy.fft.ifft(values, self.size)


def reset_coin_simulate(d: int, n_blocks: int, coin_start="R", record_every: int = 1) -> MomentSeries:
    """
    Simulate the reset walk and return moments at block boundaries.

    Moments are recorded after every ``record_every`` blocks (and always after
    the last one).

    A measurement record with N outcomes R leaves the particle in
    A_R^N A_L^(n-N) |0> (A_R, A_L the d-step conditional kernels), and all
    C(n, N) such records give the same state.  One branch vector c_N is kept
    per N, with its squared norm carried as a log so that C(n, N)-sized
    weights never overflow.

    Branches are held as DFT samples on a grid large enough for the final
    support, where applying a kernel is an elementwise product.  (Repeated
    convolution in position space loses all precision after ~100 blocks: the
    true branch shrinks much faster than rounding noise does.)  Alongside
    each c_N the transform of j*c_N is propagated by the product rule, and
    sum_j j|c_j|^2, sum_j j^2|c_j|^2 follow from Parseval.
    """
    if d < 1 or n_blocks < 0:
        raise ValueError("need d >= 1 and n_blocks >= 0")
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")
    if d * n_blocks > RESET_MAX_STEPS:
        raise ResourceLimitError(f"d*n_blocks = {d * n_blocks} exceeds {RESET_MAX_STEPS}")
    size = scipy.fft.next_fast_len(n_blocks * d + 1)
    a_l, a_r = _one_coin_kernel(d, coin_start)
    spec = _Spectrum(size, real=not (np.iscomplexobj(a_l) or np.iscomplexobj(a_r)))
    n_freq = spec.parseval.size
    cells = 2 * (n_blocks + 1) * n_freq
    if cells > RESET_MAX_CELLS:
        raise ResourceLimitError(f"reset simulation needs {cells} cells (cap {RESET_MAX_CELLS})")

    j = np.arange(d + 1)
    k_l, k_r = spec.forward(a_l), spec.forward(a_r)
    kj_l, kj_r = spec.forward(j * a_l), spec.forward(j * a_r)
    with np.errstate(divide="ignore"):
        log_k_l, log_k_r = np.log(k_l.astype(complex)), np.log(k_r.astype(complex))
    pos = np.arange(size)

    rows = np.zeros((n_blocks + 1, n_freq), dtype=complex)
    jrows = np.zeros_like(rows)  # transform of j * c_N
    scratch = np.empty_like(rows)
    rows[0] = 1.0
    log_norm = np.zeros(n_blocks + 1)
    # Parseval weights acting on interleaved (re, im) pairs
    pw = np.repeat(spec.parseval, 2)

    def moments_of(c, jc):
        cv, jv = c.view(float), jc.view(float)
        sq = np.einsum("ij,ij,j->i", cv, cv, pw)
        return sq, np.einsum("ij,ij,j->i", cv, jv, pw), np.einsum("ij,ij,j->i", jv, jv, pw)

    def candidate(n, N):
        # c_N built from scratch for a stale row; returns its log-weight
        expo = np.zeros(n_freq, dtype=complex)
        with np.errstate(invalid="ignore"):
            if N:
                expo += N * log_k_r
            if n - N:
                expo += (n - N) * log_k_l
        finite = np.isfinite(expo.real)
        shift = expo.real[finite].max()
        c = np.where(finite, np.exp(expo - shift), 0.0)
        sq = float(np.dot(c.real**2 + c.imag**2, spec.parseval))
        rows[N] = c / np.sqrt(sq)
        log_norm[N] = 2 * shift + np.log(sq)
        return _log_binom(n, float(N)) + log_norm[N]

    def admit(N):
        jrows[N] = spec.forward(pos * spec.inverse(rows[N]))

    # rows lo..hi are current; the rest are stale and carry negligible weight
    lo = hi = 0
    times, mean, second = [0], [0.0], [0.0]
    for n in range(1, n_blocks + 1):
        c, jc, tmp = rows[lo : hi + 1], jrows[lo : hi + 1], scratch[lo : hi + 1]
        grow = hi == n - 1
        if grow:
            rows[n] = rows[n - 1] * k_r
            jrows[n] = jrows[n - 1] * k_r + rows[n - 1] * kj_r
            log_norm[n] = log_norm[n - 1]
        np.multiply(c, kj_l, out=tmp)
        np.multiply(jc, k_l, out=jc)
        np.add(jc, tmp, out=jc)
        np.multiply(c, k_l, out=c)
        if grow:
            hi = n

        renorm = n % RENORM_EVERY == 0
        if not (renorm or n % record_every == 0 or n == n_blocks):
            continue
        sq, first, square = moments_of(rows[lo : hi + 1], jrows[lo : hi + 1])
        if np.any(sq <= 0) or not np.all(np.isfinite(sq)):
            raise NumericError(f"degenerate branch norm at block {n}")
        log_w = _log_binom(n, np.arange(lo, hi + 1, dtype=float)) + log_norm[lo : hi + 1] + np.log(sq)
        top = log_w.max()

        # let neighbouring rows back in while they matter (checked at renorm
        # steps only; a row cannot gain a factor e^60 within a few blocks)
        changed = False
        check = renorm or n == n_blocks
        while check and lo > 0 and candidate(n, lo - 1) >= top - PRUNE_LOG_WEIGHT:
            lo -= 1
            admit(lo)
            changed = True
        while check and hi < n and candidate(n, hi + 1) >= top - PRUNE_LOG_WEIGHT:
            hi += 1
            admit(hi)
            changed = True
        if changed:
            sq, first, square = moments_of(rows[lo : hi + 1], jrows[lo : hi + 1])
            log_w = _log_binom(n, np.arange(lo, hi + 1, dtype=float)) + log_norm[lo : hi + 1] + np.log(sq)
        keep = np.flatnonzero(log_w >= log_w.max() - PRUNE_LOG_WEIGHT)
        a, b = keep[0], keep[-1] + 1
        sq, first, square, log_w = sq[a:b], first[a:b], square[a:b], log_w[a:b]
        lo, hi = lo + a, lo + b - 1

        w = np.exp(log_w - log_w.max())
        w /= w.sum()
        j_mean = np.dot(w, first / sq)
        j_sq = np.dot(w, square / sq)
        if n % record_every == 0 or n == n_blocks:
            # x = -n d + 2 j
            base = -n * d
            times.append(n * d)
            mean.append(float(base + 2 * j_mean))
            second.append(float(base * base + 4 * base * j_mean + 4 * j_sq))

        if renorm:
            scale = np.sqrt(sq)[:, None]
            rows[lo : hi + 1] /= scale
            jrows[lo : hi + 1] /= scale
            log_norm[lo : hi + 1] += np.log(sq)
    return MomentSeries.from_moments(times, mean, second)


def reset_coin_exact_distribution(d: int, n_blocks: int, coin_start: str = "R") -> dict[int, Fraction]:
    """
    Exact rational p(x) of the reset walk after n_blocks blocks.

    Only |R> and |L> starts are supported: their kernels are integers times
    2^(-d/2), so every probability is an integer over 2^(d*n_blocks).
    """
    start = str(coin_start).upper()
    if start not in ("R", "L"):
        raise ValueError("exact reset distribution needs coin_start 'R' or 'L'")
    if d < 1 or n_blocks < 0:
        raise ValueError("need d >= 1 and n_blocks >= 0")
    amp = combinatorics.amp_from_R if start == "R" else combinatorics.amp_from_L
    pairs = [amp(x, d) for x in range(-d, d + 1, 2)]
    k_l = [p[0].numerator for p in pairs]
    k_r = [p[1].numerator for p in pairs]

    def conv(a, b):
        out = [0] * (len(a) + len(b) - 1)
        for i, u in enumerate(a):
            if u:
                for j, v in enumerate(b):
                    out[i + j] += u * v
        return out

    rows = [[1]]
    for n in range(1, n_blocks + 1):
        rows = [conv(r, k_l) for r in rows] + [conv(rows[-1], k_r)]
    total = d * n_blocks
    denom = 1 << total
    probs: dict[int, Fraction] = {}
    for N, row in enumerate(rows):
        w = comb(n_blocks, N)
        for j, v in enumerate(row):
            if v:
                x = -total + 2 * j
                probs[x] = probs.get(x, Fraction(0)) + Fraction(w * v * v, denom)
    return dict(sorted(probs.items()))
