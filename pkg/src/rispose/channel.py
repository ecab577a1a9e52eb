"""Synthetic channel generation: RIS-UE and RIS-BS links, sounding, noise.

The RIS-UE channel collects per-element, per-antenna phase shifts relative
to the reference path (RIS center to UE center).  Entries have unit modulus;
path loss is left out since the estimators only use phase structure.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .geometry import Pose, SystemConfig, ris_element_grid, unit_direction


class ChannelMode(enum.Enum):
    """Distance model for the RIS-UE link."""

    EXACT = "exact"
    FRESNEL = "fresnel"


def ris_ue_channel(pose: Pose, cfg: SystemConfig,
                   mode: ChannelMode = ChannelMode.FRESNEL) -> np.ndarray:
    """Near-field RIS-UE channel matrix, shape (n_ris, k_ue), complex.

    Entry (i, k) is ``exp(-j 2 pi (r_ik - r) / wavelength)`` where ``r_ik``
    is the distance from RIS element i to UE antenna k and ``r`` the
    reference distance.  In FRESNEL mode ``r_ik`` is replaced by its
    second-order expansion in 1/r, which is the model the estimators invert
    exactly.  EXACT mode keeps the true Euclidean distances.

    Args:
        pose: user pose.
        cfg: system parameters.
        mode: distance model.

    Returns:
        Complex matrix with rows in linear element order (y varying fastest)
        and columns in antenna order -k_half ... k_half.
    """
    n_idx, m_idx = ris_element_grid(cfg)
    sx = n_idx * cfg.d_x
    sy = m_idx * cfg.d_y
    k = cfg.antenna_offsets()
    e = unit_direction(pose.theta, pose.phi)
    g = unit_direction(pose.psi, pose.gamma)

    if mode is ChannelMode.EXACT:
        # q_k: (K, 3) antenna positions; s: (N, 3) element positions
        q = pose.r * e[None, :] + (k * cfg.d_u)[:, None] * g[None, :]
        s = np.stack([sx, sy, np.zeros_like(sx)], axis=1)
        dist = np.linalg.norm(q[None, :, :] - s[:, None, :], axis=2)
        excess = dist - pose.r
    elif mode is ChannelMode.FRESNEL:
        ku = k * cfg.d_u  # (K,)
        s_sq = sx * sx + sy * sy  # (N,)
        e_dot_s = e[0] * sx + e[1] * sy
        g_dot_s = g[0] * sx + g[1] * sy
        e_dot_g = float(e @ g)
        excess = (
            (ku[None, :] ** 2 + s_sq[:, None]) / (2 * pose.r)
            + ku[None, :] * (e_dot_g - g_dot_s[:, None] / pose.r)
            - e_dot_s[:, None]
        )
    else:
        raise ValueError(f"unknown channel mode {mode!r}")
    return np.exp(-2j * np.pi * excess / cfg.wavelength)


def _steering(count: int, zeta: float, wavelength: float) -> np.ndarray:
    """Centered ULA steering vector for spatial frequency ``zeta``."""
    half = (count - 1) / 2
    t = half - np.arange(count)
    return np.exp(2j * np.pi * t * zeta / wavelength)


def ris_bs_channel(cfg: SystemConfig) -> np.ndarray:
    """Static far-field RIS-BS channel, shape (m_bs, n_ris), rank one.

    Outer product of the BS steering vector and the conjugated RIS steering
    vector (x-axis response Kronecker y-axis response, matching the linear
    element order).
    """
    h_b = _steering(cfg.m_bs, cfg.d_b * math.sin(cfg.theta_bs), cfg.wavelength)
    h_rx = _steering(cfg.n_x, cfg.d_x * math.cos(cfg.theta_ris) * math.cos(cfg.phi_ris),
                     cfg.wavelength)
    h_ry = _steering(cfg.n_y, cfg.d_y * math.sin(cfg.theta_ris) * math.cos(cfg.phi_ris),
                     cfg.wavelength)
    return np.outer(h_b, np.conj(np.kron(h_rx, h_ry)))


def ris_profiles(cfg: SystemConfig) -> np.ndarray:
    """RIS phase profiles, one per row, shape (p_profiles, n_ris).

    DFT-style rows ``exp(-j 2 pi p i / n_ris)``.  When p_profiles is a
    multiple of n_ris the profile matrix satisfies
    ``profiles^H profiles = p_profiles * I``, which makes the measurement
    pseudoinverse a plain scaled conjugate transpose.
    """
    p = np.arange(cfg.p_profiles)[:, None]
    i = np.arange(cfg.n_ris)[None, :]
    # reduce p*i mod n_ris in exact integer arithmetic: keeps every phase
    # argument below 2 pi, so Gram cancellation stays at eps scale even for
    # p_profiles >> n_ris
    return np.exp(-2j * np.pi * ((p * i) % cfg.n_ris) / cfg.n_ris)


def pilot_matrix(cfg: SystemConfig) -> np.ndarray:
    """Orthogonal pilot block, shape (k_ue, l_pilot).

    First k_ue rows of the l_pilot-point DFT matrix, scaled so that
    ``S S^H = (power_w / k_ue) * I`` (total transmit power split across
    antennas and pilot symbols).
    """
    a = np.arange(cfg.k_ue)[:, None]
    b = np.arange(cfg.l_pilot)[None, :]
    scale = math.sqrt(cfg.power_w / (cfg.k_ue * cfg.l_pilot))
    return scale * np.exp(-2j * np.pi * a * b / cfg.l_pilot)


def khatri_rao(profiles: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product, shape (m_bs * p_profiles, n_ris).

    Block p (size m_bs) equals ``h @ diag(profiles[p, :])``: the effective
    BS-side mixing for sounding profile p.
    """
    p_cnt, n = profiles.shape
    m, n2 = h.shape
    if n != n2:
        raise ValueError(f"column mismatch: profiles has {n}, h has {n2}")
    out = profiles[:, None, :] * h[None, :, :]
    return out.reshape(p_cnt * m, n)


def noise_sigma_for_snr(hbar: np.ndarray, a: np.ndarray, s: np.ndarray,
                        snr_db: float) -> float:
    """Per-entry complex noise std for a target receive SNR in dB.

    SNR is mean received signal power over noise power per entry:
    ``||hbar @ a @ s||_F^2 / (entries * sigma^2)``.  Infinite SNR maps to 0.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    signal = hbar @ a @ s
    mean_power = np.sum(np.abs(signal) ** 2) / signal.size
    return math.sqrt(mean_power / 10.0 ** (snr_db / 10.0))


def observe(a: np.ndarray, h: np.ndarray, profiles: np.ndarray, s: np.ndarray,
            sigma: float, rng: np.random.Generator,
            hbar: np.ndarray | None = None) -> np.ndarray:
    """Stacked noisy sounding observation, shape (m_bs * p_profiles, l_pilot).

    Computes ``khatri_rao(profiles, h) @ a @ s`` plus circular complex
    Gaussian noise with per-entry variance ``sigma**2``.  The generator is
    not consumed when sigma is zero, so noiseless runs leave the stream
    untouched.
    """
    if hbar is None:
        hbar = khatri_rao(profiles, h)
    y = hbar @ a @ s
    if sigma > 0:
        scale = sigma / math.sqrt(2.0)
        noise = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
        y = y + scale * noise
    return y
