"""Self-check suite: algebraic identities at small dimensions.

Each check is a pure function returning a CheckResult; ``run_validation``
executes the whole suite on a small config so the CLI can verify the build
in seconds.  The model-prediction functions can be swapped via keyword
hooks, which lets tests confirm that a corrupted model actually trips the
corresponding identity check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import (ChannelMode, khatri_rao, observe, pilot_matrix,
                      ris_bs_channel, ris_profiles, ris_ue_channel)
from .estimator import (direction_shifts, direction_transform, distance_shift,
                        distance_transform, estimate_pose_from_channel,
                        orientation_shifts, orientation_transform, shift_pairs,
                        tls_phase_ratio)
from .geometry import (GridIndex, Pose, SystemConfig, flipped_index,
                       linear_index, ris_element_grid)
from .montecarlo import run_trial
from .recovery import measurement_pinv, recover_channel

# identity checks are exact algebra; estimator checks allow roundoff growth
TOL_IDENTITY = 1e-12
TOL_OPERATOR = 1e-10
TOL_ESTIMATE = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name: str, err: float, tol: float) -> CheckResult:
    return CheckResult(name, err < tol, f"max deviation {err:.3e} (tolerance {tol:.0e})")


def validation_config() -> SystemConfig:
    """Small, fast dimensions exercising n_x != n_y."""
    return SystemConfig(m_bs=3, k_ue=7, n_x=5, n_y=7, p_profiles=35, l_pilot=10)


def validation_pose() -> Pose:
    return Pose(r=1.8, theta=math.radians(75.0), phi=math.radians(35.0),
                psi=math.radians(130.0), gamma=math.radians(40.0))


def check_flip_index(cfg: SystemConfig) -> CheckResult:
    """Row reversal maps element (n, m) to (-n, -m)."""
    worst = 0
    for n in range(-cfg.nx_half, cfg.nx_half + 1):
        for m in range(-cfg.ny_half, cfg.ny_half + 1):
            direct = linear_index(GridIndex(-n, -m), cfg)
            flipped = flipped_index(GridIndex(n, m), cfg)
            worst = max(worst, abs(direct - flipped))
    return _result("flip-index identity", float(worst), 1)


def check_distance_identity(cfg: SystemConfig, pose: Pose,
                            shift_fn: Callable = distance_shift) -> CheckResult:
    """Adjacent columns of the distance transform differ by the model ratio."""
    b = distance_transform(ris_ue_channel(pose, cfg, ChannelMode.FRESNEL))
    worst = 0.0
    for k in range(-cfg.k_half, cfg.k_half):
        col = k + cfg.k_half
        pred = shift_fn(k, pose.r, cfg)
        worst = max(worst, float(np.abs(b[:, col + 1] - b[:, col] * pred).max()))
    return _result("distance shift identity", worst, TOL_IDENTITY)


def check_direction_identity(cfg: SystemConfig, pose: Pose,
                             shift_fn: Callable = direction_shifts) -> CheckResult:
    """Row pairs of the direction transform carry the x/y direction ratios."""
    c = direction_transform(ris_ue_channel(pose, cfg, ChannelMode.FRESNEL))
    ex, ey = shift_fn(pose, cfg)
    px, py = shift_pairs(cfg, "x"), shift_pairs(cfg, "y")
    worst = max(
        float(np.abs(c[px.shifted, :] - c[px.kept, :] * ex).max()),
        float(np.abs(c[py.shifted, :] - c[py.kept, :] * ey).max()),
    )
    return _result("direction shift identity", worst, TOL_IDENTITY)


def check_orientation_identity(cfg: SystemConfig, pose: Pose,
                               shift_fn: Callable = orientation_shifts) -> CheckResult:
    """Row pairs of the orientation transform carry the per-antenna ratios."""
    d = orientation_transform(ris_ue_channel(pose, cfg, ChannelMode.FRESNEL))
    px, py = shift_pairs(cfg, "x"), shift_pairs(cfg, "y")
    worst = 0.0
    for k in range(-cfg.k_half, cfg.k_half + 1):
        col = k + cfg.k_half
        gx, gy = shift_fn(pose, k, cfg)
        worst = max(
            worst,
            float(np.abs(d[px.shifted, col] - d[px.kept, col] * gx).max()),
            float(np.abs(d[py.shifted, col] - d[py.kept, col] * gy).max()),
        )
    return _result("orientation shift identity", worst, TOL_IDENTITY)


def check_flip_symmetries(cfg: SystemConfig, pose: Pose) -> CheckResult:
    """Noiseless transforms are symmetric under their defining flips."""
    a = ris_ue_channel(pose, cfg, ChannelMode.FRESNEL)
    b = distance_transform(a)
    c = direction_transform(a)
    d = orientation_transform(a)
    worst = max(
        float(np.abs(b - b[:, ::-1]).max()),
        float(np.abs(c - np.conj(c[::-1, ::-1])).max()),
        float(np.abs(d - np.conj(d[::-1, :])).max()),
    )
    return _result("transform flip symmetries", worst, TOL_IDENTITY)


def check_profile_orthogonality(cfg: SystemConfig) -> CheckResult:
    """Profile matrix satisfies profiles^H profiles = P I when N divides P."""
    worst = 0.0
    for mult in (1, 2):
        p = mult * cfg.n_ris
        phi = ris_profiles(SystemConfig(
            m_bs=cfg.m_bs, k_ue=cfg.k_ue, n_x=cfg.n_x, n_y=cfg.n_y,
            p_profiles=p, l_pilot=cfg.l_pilot))
        gram = phi.conj().T @ phi
        worst = max(worst, float(np.abs(gram - p * np.eye(cfg.n_ris)).max()))
    return _result("profile orthogonality", worst, TOL_IDENTITY)


def check_pilot_orthogonality(cfg: SystemConfig) -> CheckResult:
    """Pilot block satisfies S S^H = (power / K) I."""
    s = pilot_matrix(cfg)
    gram = s @ s.conj().T
    target = cfg.power_w / cfg.k_ue * np.eye(cfg.k_ue)
    return _result("pilot orthogonality", float(np.abs(gram - target).max()),
                   TOL_IDENTITY)


def check_pinv_paths(cfg: SystemConfig) -> CheckResult:
    """Structured and SVD pseudoinverses agree entrywise."""
    hbar = khatri_rao(ris_profiles(cfg), ris_bs_channel(cfg))
    diff = measurement_pinv(hbar, structured=True) - measurement_pinv(hbar)
    return _result("structured vs generic pinv", float(np.abs(diff).max()),
                   TOL_OPERATOR)


def check_noiseless_recovery(cfg: SystemConfig, pose: Pose) -> CheckResult:
    """Zero-noise observation inverts back to the channel in both modes."""
    h = ris_bs_channel(cfg)
    profiles = ris_profiles(cfg)
    s = pilot_matrix(cfg)
    hbar = khatri_rao(profiles, h)
    rng = np.random.default_rng(0)
    worst = 0.0
    for mode in ChannelMode:
        a = ris_ue_channel(pose, cfg, mode)
        y = observe(a, h, profiles, s, 0.0, rng, hbar=hbar)
        rec = recover_channel(y, hbar, s, structured=True)
        worst = max(worst, float(np.abs(rec.matrix - a).max()))
    return _result("noiseless channel recovery", worst, TOL_OPERATOR)


def check_tls_exactness(seed: int) -> CheckResult:
    """TLS ratio is exact on a noiseless rank-one pair."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    true = np.exp(1j * math.pi / 4)
    err = abs(tls_phase_ratio(u, u * true) - true)
    return _result("TLS rank-one exactness", float(err), TOL_IDENTITY)


def check_zero_noise_estimate(cfg: SystemConfig, pose: Pose) -> CheckResult:
    """Full noiseless Fresnel pipeline recovers the pose."""
    a = ris_ue_channel(pose, cfg, ChannelMode.FRESNEL)
    est = estimate_pose_from_channel(a, cfg)
    true = pose.as_tuple()
    got = est.as_tuple()
    err = max(abs(g - t) / (abs(t) if i == 0 else 1.0)
              for i, (g, t) in enumerate(zip(got, true)))
    return _result("zero-noise pose estimate", float(err), TOL_ESTIMATE)


def check_trial_determinism(cfg: SystemConfig, pose: Pose) -> CheckResult:
    """Same seed, same inputs, bit-identical trial outcome."""
    results = []
    for _ in range(2):
        rng = np.random.default_rng(12345)
        results.append(run_trial(cfg, pose, 10.0, ChannelMode.FRESNEL, rng))
    r0, r1 = results
    same = (r0.failed == r1.failed and r0.squared_relative_error
            == r1.squared_relative_error)
    return CheckResult("trial determinism", bool(same),
                       "bit-identical" if same else "results differ")


def run_validation(seed: int = 7,
                   distance_shift_fn: Callable = distance_shift,
                   direction_shift_fn: Callable = direction_shifts,
                   orientation_shift_fn: Callable = orientation_shifts,
                   ) -> list[CheckResult]:
    """Run every check on the validation config; hooks override the models."""
    cfg = validation_config()
    pose = validation_pose()
    return [
        check_flip_index(cfg),
        check_distance_identity(cfg, pose, distance_shift_fn),
        check_direction_identity(cfg, pose, direction_shift_fn),
        check_orientation_identity(cfg, pose, orientation_shift_fn),
        check_flip_symmetries(cfg, pose),
        check_profile_orthogonality(cfg),
        check_pilot_orthogonality(cfg),
        check_pinv_paths(cfg),
        check_noiseless_recovery(cfg, pose),
        check_tls_exactness(seed),
        check_zero_noise_estimate(cfg, pose),
        check_trial_determinism(cfg, pose),
    ]
