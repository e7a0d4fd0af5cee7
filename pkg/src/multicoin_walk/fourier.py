"""
Momentum-space form of the one-coin step.

With psi(x) = int dk/2pi e^{ikx} psi~(k), one step acts on psi~(k) as the
2x2 matrix

    H_k = (1/sqrt2) [[e^{-ik},  e^{-ik}],
                     [ e^{ik}, -e^{ik}]]

whose eigenvalues are e^{-i w} and -e^{i w} with sin w = sin(k)/sqrt2.
"""

from __future__ import annotations

import numpy as np

Z = np.diag([1.0, -1.0])


def hadamard_k(k):
    """H_k for scalar k, or a stack of shape (len(k), 2, 2) for array k."""
    k = np.asarray(k, dtype=float)
    e = np.exp(-1j * k)
    out = np.empty(k.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = e
    out[..., 0, 1] = e
    out[..., 1, 0] = 1 / e
    out[..., 1, 1] = -1 / e
    return out * np.sqrt(0.5)


def omega(k):
    return np.arcsin(np.sin(k) / np.sqrt(2.0))


def branch_projectors(k):
    """
    Spectral projectors (P_minus, P_plus) of H_k.

    P_minus belongs to e^{-i w}, P_plus to -e^{i w}.  Works on scalar k or
    arrays (trailing 2x2 axes).
    """
    k = np.asarray(k, dtype=float)
    w = omega(k)
    lam_m = np.exp(-1j * w)[..., None, None]
    lam_p = -np.exp(1j * w)[..., None, None]
    h = hadamard_k(k)
    eye = np.eye(2)
    p_minus = (h - lam_p * eye) / (lam_m - lam_p)
    p_plus = (h - lam_m * eye) / (lam_p - lam_m)
    return p_minus, p_plus


def hadamard_k_power_sum(d: int, k, observable=Z):
    """sum_{l=1..d} (H_k^l)^dagger A H_k^l, stacked over k."""
    h = hadamard_k(np.atleast_1d(np.asarray(k, dtype=float)))
    u = np.broadcast_to(np.eye(2, dtype=complex), h.shape).copy()
    acc = np.zeros_like(h)
    for _ in range(d):
        u = h @ u
        acc += np.conj(np.swapaxes(u, -1, -2)) @ observable @ u
    return acc
