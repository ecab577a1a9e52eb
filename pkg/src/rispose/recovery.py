"""Least-squares recovery of the RIS-UE channel from sounding observations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_RANK_TOL = 1e-12


@dataclass(frozen=True)
class RecoveredChannel:
    """Channel estimate plus bookkeeping from the recovery step.

    Attributes:
        matrix: recovered (n_ris, k_ue) channel, equal to the true channel
            plus transformed noise.
        structured: whether the scaled-adjoint shortcut was used.
        residual_noise_scale: per-entry std of the post-recovery noise as a
            multiple of the observation noise std (Frobenius-average gain of
            the two-sided pseudoinverse).
    """

    matrix: np.ndarray
    structured: bool
    residual_noise_scale: float


def measurement_pinv(hbar: np.ndarray, structured: bool = False) -> np.ndarray:
    """Left pseudoinverse of the stacked measurement matrix.

    With DFT profiles and p_profiles a multiple of n_ris, the columns of
    ``hbar`` are orthogonal with squared norm ``rows``; ``structured=True``
    exploits that and returns ``hbar^H / rows`` without an SVD.  The generic
    path raises ValueError if ``hbar`` is (numerically) rank deficient.
    """
    rows, cols = hbar.shape
    if rows < cols:
        raise ValueError(f"need at least as many rows as columns ({rows} < {cols})")
    if structured:
        return hbar.conj().T / rows
    u, sv, vh = np.linalg.svd(hbar, full_matrices=False)
    if sv[-1] <= _RANK_TOL * sv[0]:
        raise ValueError(
            f"measurement matrix is rank deficient "
            f"(sigma_min/sigma_max = {sv[-1] / sv[0]:.3e})"
        )
    return (vh.conj().T / sv) @ u.conj().T


def recover_channel(y: np.ndarray, hbar: np.ndarray, s: np.ndarray,
                    structured: bool = False) -> RecoveredChannel:
    """Invert the sounding equation ``y = hbar @ a @ s`` for the channel a.

    Applies the left pseudoinverse of ``hbar`` and the right pseudoinverse
    of the pilot block ``s``.  Noiseless observations recover the channel to
    machine precision; with noise the estimate is channel plus colored noise
    whose average gain is reported in ``residual_noise_scale``.
    """
    left = measurement_pinv(hbar, structured=structured)
    right = np.linalg.pinv(s)
    gain = float(np.linalg.norm(left) * np.linalg.norm(right)
                 / np.sqrt(left.shape[0] * right.shape[1]))
    return RecoveredChannel(matrix=left @ y @ right, structured=structured,
                            residual_noise_scale=gain)
