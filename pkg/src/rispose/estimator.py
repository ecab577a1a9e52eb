"""Closed-form 5D pose estimators built on shift-invariance of the channel.

Three element-wise products of the recovered channel ``a`` with flipped or
conjugate-flipped copies of itself isolate one unknown each:

* ``distance_transform``  a * flip_cols(a): adjacent columns differ by a
  distance-only phase ratio.
* ``direction_transform`` a * conj(flip_rows(flip_cols(a))): rows shifted by
  one element along x (or y) differ by a ratio fixed by the position
  azimuth/elevation.
* ``orientation_transform`` a * conj(flip_rows(a)): the same row shifts give
  per-antenna ratios that add an orientation term on top of the position
  term.

Each ratio is estimated by a rank-one total-least-squares fit and converted
back to a parameter through its phase.  All of it is exact for the Fresnel
channel model and approximate for true Euclidean distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose, SystemConfig
from .recovery import recover_channel

_TLS_TOL = 1e-12


class EstimationError(Exception):
    """Estimation failed at a named stage; partial results may be attached."""

    def __init__(self, stage: str, message: str, partial: dict | None = None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.partial = partial if partial is not None else {}


class DegenerateGeometryError(EstimationError):
    """A phase ratio is unidentifiable for this geometry (not a numeric bug)."""

    def __init__(self, message: str, stage: str = "tls"):
        super().__init__(stage, message)


@dataclass(frozen=True)
class ShiftPairs:
    """Row-index pairs (kept, shifted) one RIS element apart along one axis."""

    axis: str
    kept: np.ndarray
    shifted: np.ndarray


@dataclass(frozen=True)
class PoseEstimate:
    """Estimated pose with per-stage diagnostics."""

    r_hat: float
    theta_hat: float
    phi_hat: float
    psi_hat: float
    gamma_hat: float
    delta_ex_hat: complex
    delta_ey_hat: complex
    per_k_distance: np.ndarray = field(repr=False)
    diagnostics: dict = field(repr=False, default_factory=dict)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.r_hat, self.theta_hat, self.phi_hat,
                self.psi_hat, self.gamma_hat)

    def to_dict(self) -> dict:
        return {"r": self.r_hat, "theta": self.theta_hat, "phi": self.phi_hat,
                "psi": self.psi_hat, "gamma": self.gamma_hat}


def distance_transform(a: np.ndarray) -> np.ndarray:
    """a * a with columns flipped; rows gain a column-pair distance ratio."""
    return a * a[:, ::-1]


def direction_transform(a: np.ndarray) -> np.ndarray:
    """a * conj(a) with rows and columns flipped; isolates the position angles."""
    return a * np.conj(a[::-1, ::-1])


def orientation_transform(a: np.ndarray) -> np.ndarray:
    """a * conj(a) with rows flipped; keeps position plus orientation terms."""
    return a * np.conj(a[::-1, :])


def shift_pairs(cfg: SystemConfig, axis: str) -> ShiftPairs:
    """Row pairs whose elements are neighbors along the given RIS axis.

    Rows are in linear order with y varying fastest, so an x-neighbor sits
    n_y rows later and a y-neighbor one row later (except at the y-edge).
    """
    n, n_y = cfg.n_ris, cfg.n_y
    if axis == "x":
        kept = np.arange(n - n_y)
        shifted = kept + n_y
    elif axis == "y":
        kept = np.flatnonzero(np.arange(n) % n_y != n_y - 1)
        shifted = kept + 1
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return ShiftPairs(axis=axis, kept=kept, shifted=shifted)


def tls_phase_ratio(u: np.ndarray, v: np.ndarray) -> complex:
    """Total-least-squares estimate of the scalar ratio in ``v ~ u * delta``.

    Stacks [u v] and takes the right singular pair of the smallest singular
    value; the ratio is ``-V12 / V22`` of the 2x2 right factor.  Exact for a
    noiseless rank-one stack, symmetric in the noise on u and v otherwise.

    Raises:
        ValueError: on shape mismatch or an all-zero input vector.
        DegenerateGeometryError: if the fit cannot identify a finite ratio.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    if u.ndim != 1 or u.shape != v.shape:
        raise ValueError(f"need equal-length 1-D inputs, got {u.shape} and {v.shape}")
    if not (np.linalg.norm(u) > 0 and np.linalg.norm(v) > 0):
        raise ValueError("inputs must have nonzero norm")
    stack = np.column_stack((u, v))
    _, _, vh = np.linalg.svd(stack, full_matrices=False)
    # right factor V = vh^H; the null direction is its second column
    v12 = np.conj(vh[-1, 0])
    v22 = np.conj(vh[-1, 1])
    if abs(v22) < _TLS_TOL:
        raise DegenerateGeometryError("null direction orthogonal to the ratio axis")
    return complex(-v12 / v22)


def distance_shift(k: int, r: float, cfg: SystemConfig) -> complex:
    """Model column-pair ratio of the distance transform for antenna index k."""
    phase = -2.0 * math.pi * (2 * k + 1) * cfg.d_u ** 2 / (cfg.wavelength * r)
    return complex(np.exp(1j * phase))


def direction_shifts(pose: Pose, cfg: SystemConfig) -> tuple[complex, complex]:
    """Model x/y row-pair ratios of the direction transform."""
    c = 4.0 * math.pi / cfg.wavelength * math.cos(pose.phi)
    ex = np.exp(1j * c * cfg.d_x * math.cos(pose.theta))
    ey = np.exp(1j * c * cfg.d_y * math.sin(pose.theta))
    return complex(ex), complex(ey)


def orientation_shifts(pose: Pose, k: int,
                       cfg: SystemConfig) -> tuple[complex, complex]:
    """Model x/y row-pair ratios of the orientation transform at antenna k."""
    ex, ey = direction_shifts(pose, cfg)
    c = 4.0 * math.pi * k * cfg.d_u / (cfg.wavelength * pose.r) * math.cos(pose.gamma)
    gx = ex * np.exp(1j * c * cfg.d_x * math.cos(pose.psi))
    gy = ey * np.exp(1j * c * cfg.d_y * math.sin(pose.psi))
    return complex(gx), complex(gy)


def estimate_distance(b: np.ndarray, cfg: SystemConfig) -> tuple[float, np.ndarray]:
    """Distance from the distance transform ``b``, shape (n_ris, k_ue).

    Each adjacent column pair (k, k+1) yields a phase whose model value is
    ``-2 pi (2k+1) d_u^2 / (wavelength r)``.  The two center pairs, where
    the phase magnitude is smallest and cannot wrap inside the near field,
    give a coarse distance; the remaining phases are unwrapped to the branch
    nearest their model prediction before inverting.  The estimate is the
    mean of the per-pair distances.

    Returns:
        (r_hat, per-pair distance array of length k_ue - 1, NaN where a pair
        was excluded).
    """
    n, k_ue = b.shape
    if n != cfg.n_ris or k_ue != cfg.k_ue:
        raise ValueError(f"expected shape {(cfg.n_ris, cfg.k_ue)}, got {b.shape}")
    kh = cfg.k_half
    k_vals = np.arange(-kh, kh)  # pair (k, k+1) per entry
    coeff = -2.0 * math.pi * (2 * k_vals + 1) * cfg.d_u ** 2 / cfg.wavelength

    phases = np.full(k_ue - 1, np.nan)
    for idx in range(k_ue - 1):
        try:
            phases[idx] = np.angle(tls_phase_ratio(b[:, idx], b[:, idx + 1]))
        except DegenerateGeometryError:
            pass  # leave NaN, excluded below

    # coarse distance from the |2k+1| = 1 pairs (k = -1 and k = 0)
    coarse = []
    for idx in (kh - 1, kh):
        ph = phases[idx]
        if np.isfinite(ph) and ph != 0.0 and coeff[idx] / ph > 0:
            coarse.append(coeff[idx] / ph)
    if coarse:
        r_coarse = float(np.mean(coarse))
        predicted = coeff / r_coarse
        phases = phases + 2 * np.pi * np.round((predicted - phases) / (2 * np.pi))

    valid = np.isfinite(phases) & (phases != 0.0)
    per_k = np.full(k_ue - 1, np.nan)
    per_k[valid] = coeff[valid] / phases[valid]
    if not valid.any():
        raise EstimationError("distance", "every column-pair phase was zero or "
                              "unidentifiable (infinite-distance indication)")
    r_hat = float(np.mean(per_k[valid]))
    if not (math.isfinite(r_hat) and r_hat > 0):
        raise EstimationError("distance", f"non-physical distance {r_hat!r}",
                              partial={"per_k_distance": per_k})
    return r_hat, per_k


def estimate_direction(
    c: np.ndarray, cfg: SystemConfig
) -> tuple[float, float, complex, complex, dict]:
    """Position azimuth/elevation from the direction transform ``c``.

    Per column, a TLS fit over x-axis (y-axis) row pairs estimates the two
    element-shift ratios; the complex ratios are averaged over columns, then
    the azimuth comes from the two-argument arctangent of the scaled phases
    and the elevation from an arccosine (argument clipped into [0, 1], with
    the raw value kept as a diagnostic).

    Returns:
        (theta_hat, phi_hat, delta_ex, delta_ey, diagnostics).
    """
    if c.shape != (cfg.n_ris, cfg.k_ue):
        raise ValueError(f"expected shape {(cfg.n_ris, cfg.k_ue)}, got {c.shape}")
    px = shift_pairs(cfg, "x")
    py = shift_pairs(cfg, "y")
    ratios_x, ratios_y = [], []
    skipped = 0
    for col in range(cfg.k_ue):
        try:
            ratios_x.append(tls_phase_ratio(c[px.kept, col], c[px.shifted, col]))
            ratios_y.append(tls_phase_ratio(c[py.kept, col], c[py.shifted, col]))
        except DegenerateGeometryError:
            skipped += 1
    if not ratios_x or not ratios_y:
        raise EstimationError("direction", "shift ratio unidentifiable in every column")
    delta_ex = complex(np.mean(ratios_x))
    delta_ey = complex(np.mean(ratios_y))
    ax = np.angle(delta_ex) / cfg.d_x
    ay = np.angle(delta_ey) / cfg.d_y
    if ax == 0.0 and ay == 0.0:
        # elevation exactly 90 degrees leaves the azimuth undefined
        raise DegenerateGeometryError("both direction phases vanish", stage="direction")
    theta_hat = math.atan2(ay, ax)
    cos_arg = cfg.wavelength / (4 * math.pi) * math.hypot(ax, ay)
    phi_hat = math.acos(min(max(cos_arg, 0.0), 1.0))
    diag = {"phi_cos_arg": cos_arg, "direction_skipped_cols": skipped}
    return theta_hat, phi_hat, delta_ex, delta_ey, diag


def estimate_orientation(
    d: np.ndarray, delta_ex: complex, delta_ey: complex, r_hat: float,
    cfg: SystemConfig
) -> tuple[float, float, dict]:
    """Orientation azimuth/elevation from the orientation transform ``d``.

    For each off-center antenna k, the x/y shift ratios are divided by the
    direction ratios to leave pure orientation phases that scale with
    ``k / r``.  Each k yields an azimuth (sign-corrected so negative k does
    not flip the quadrant) and an elevation; both are averaged over k.

    Returns:
        (psi_hat, gamma_hat, diagnostics).
    """
    if d.shape != (cfg.n_ris, cfg.k_ue):
        raise ValueError(f"expected shape {(cfg.n_ris, cfg.k_ue)}, got {d.shape}")
    if not (math.isfinite(r_hat) and r_hat > 0):
        raise EstimationError("orientation", f"invalid distance input {r_hat!r}")
    px = shift_pairs(cfg, "x")
    py = shift_pairs(cfg, "y")
    psi_per_k = np.full(cfg.k_ue, np.nan)
    gamma_per_k = np.full(cfg.k_ue, np.nan)
    cos_args = []
    skipped = 0
    for k in range(-cfg.k_half, cfg.k_half + 1):
        if k == 0:
            continue  # center antenna carries no orientation phase
        col = k + cfg.k_half
        try:
            gx = tls_phase_ratio(d[px.kept, col], d[px.shifted, col])
            gy = tls_phase_ratio(d[py.kept, col], d[py.shifted, col])
        except DegenerateGeometryError:
            skipped += 1
            continue
        alpha_x = np.angle(gx / delta_ex) / cfg.d_x
        alpha_y = np.angle(gy / delta_ey) / cfg.d_y
        sgn = 1.0 if k > 0 else -1.0
        if alpha_x != 0.0 or alpha_y != 0.0:
            # exact zeros carry no azimuth information; averaging atan2(0, 0)
            # would silently bias the mean toward zero
            psi_per_k[col] = math.atan2(sgn * alpha_y, sgn * alpha_x)
        cos_arg = (cfg.wavelength * r_hat / (4 * math.pi * abs(k) * cfg.d_u)
                   * math.hypot(alpha_x, alpha_y))
        cos_args.append(cos_arg)
        gamma_per_k[col] = math.acos(min(max(cos_arg, 0.0), 1.0))
    psi_valid = np.isfinite(psi_per_k)
    gamma_valid = np.isfinite(gamma_per_k)
    if not psi_valid.any() or not gamma_valid.any():
        raise EstimationError(
            "orientation", "orientation phases unidentifiable for every antenna")
    psi_hat = float(np.mean(psi_per_k[psi_valid]))
    gamma_hat = float(np.mean(gamma_per_k[gamma_valid]))
    diag = {"gamma_cos_arg_max": max(cos_args), "orientation_skipped": skipped,
            "psi_per_k": psi_per_k, "gamma_per_k": gamma_per_k}
    return psi_hat, gamma_hat, diag


def estimate_pose_from_channel(a: np.ndarray, cfg: SystemConfig) -> PoseEstimate:
    """Run the three-stage estimator on an already recovered channel matrix.

    Args:
        a: recovered (n_ris, k_ue) channel.
        cfg: system parameters.

    Returns:
        PoseEstimate with all five parameters and stage diagnostics.

    Raises:
        EstimationError: if any stage fails; ``partial`` carries whatever
            earlier stages produced.
    """
    partial: dict = {}
    try:
        r_hat, per_k = estimate_distance(distance_transform(a), cfg)
        partial["r_hat"] = r_hat
        theta_hat, phi_hat, dex, dey, diag_dir = estimate_direction(
            direction_transform(a), cfg)
        partial.update({"theta_hat": theta_hat, "phi_hat": phi_hat})
        psi_hat, gamma_hat, diag_ori = estimate_orientation(
            orientation_transform(a), dex, dey, r_hat, cfg)
    except EstimationError as err:
        raise EstimationError(err.stage, str(err), partial={**partial, **err.partial})
    diagnostics = {**diag_dir, **diag_ori}
    return PoseEstimate(
        r_hat=r_hat, theta_hat=theta_hat, phi_hat=phi_hat,
        psi_hat=psi_hat, gamma_hat=gamma_hat,
        delta_ex_hat=dex, delta_ey_hat=dey,
        per_k_distance=per_k, diagnostics=diagnostics,
    )


def estimate_pose(y: np.ndarray, hbar: np.ndarray, s: np.ndarray,
                  cfg: SystemConfig, structured: bool = False) -> PoseEstimate:
    """Recover the channel from an observation and estimate the full pose.

    Chains channel recovery (left/right pseudoinverses of the measurement
    matrix and pilot block) with distance, direction, and orientation
    estimation.

    Args:
        y: stacked observation, shape (m_bs * p_profiles, l_pilot).
        hbar: stacked measurement matrix, shape (m_bs * p_profiles, n_ris).
        s: pilot block, shape (k_ue, l_pilot).
        cfg: system parameters.
        structured: use the scaled-adjoint pseudoinverse shortcut (valid when
            p_profiles is a multiple of n_ris).

    Raises:
        EstimationError: if any estimation stage fails.
        ValueError: on shape mismatch or a rank-deficient measurement matrix.
    """
    rec = recover_channel(y, hbar, s, structured=structured)
    return estimate_pose_from_channel(rec.matrix, cfg)
