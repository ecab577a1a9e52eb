"""Array geometry, index maps, near-field bounds, and pose sampling.

Conventions used throughout the package:

* The RIS is a uniform planar array in the xy-plane, centered at the origin,
  with an odd number of elements per axis so that a center element exists.
* The user terminal is a uniform linear array of K antennas (K odd) whose
  center antenna sits at distance ``r`` from the RIS center.
* All angles are in radians and all lengths in meters.  Degrees appear only
  at the command-line boundary.
* Azimuth/elevation pairs map to unit vectors via
  ``[cos(az) cos(el), sin(az) cos(el), sin(el)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# Pose sampling ranges (degrees).  Kept away from the axis singularities at
# 0 and 180 azimuth / 0 and 90 elevation where individual angles become
# unidentifiable or relative errors blow up.
THETA_RANGE_DEG = (10.0, 170.0)
PHI_RANGE_DEG = (10.0, 80.0)
PSI_RANGE_DEG = (15.0, 170.0)
GAMMA_RANGE_DEG = (15.0, 80.0)


class GridIndex(NamedTuple):
    """Signed RIS element index, ``n`` along x and ``m`` along y."""

    n: int
    m: int


@dataclass(frozen=True)
class SystemConfig:
    """Static system parameters.

    Attributes:
        m_bs: number of base-station antennas.
        k_ue: number of user antennas (odd, >= 3).
        n_x, n_y: RIS elements per axis (odd, >= 3).
        p_profiles: number of RIS phase profiles used for sounding.  ``None``
            resolves to the RIS size ``n_x * n_y``.
        l_pilot: pilot sequence length (>= k_ue).
        wavelength: carrier wavelength in meters.
        d_u: user array antenna spacing.
        d_b: base-station antenna spacing.
        d_x, d_y: RIS element spacing per axis.
        power_w: total transmit power in watts.
        theta_bs: BS array broadside angle seen from the RIS.
        theta_ris, phi_ris: azimuth/elevation of the BS seen from the RIS.
    """

    m_bs: int = 9
    k_ue: int = 11
    n_x: int = 11
    n_y: int = 11
    p_profiles: int | None = None
    l_pilot: int = 50
    wavelength: float = 0.33
    d_u: float = 0.165
    d_b: float = 0.165
    d_x: float = 0.0825
    d_y: float = 0.0825
    power_w: float = 10.0
    theta_bs: float = math.radians(30.0)
    theta_ris: float = math.radians(40.0)
    phi_ris: float = math.radians(50.0)

    def __post_init__(self):
        if self.p_profiles is None:
            object.__setattr__(self, "p_profiles", self.n_x * self.n_y)
        for name in ("m_bs", "k_ue", "n_x", "n_y", "p_profiles", "l_pilot"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        for name in ("k_ue", "n_x", "n_y"):
            v = getattr(self, name)
            if v % 2 == 0 or v < 3:
                raise ValueError(f"{name} must be odd and >= 3, got {v}")
        if self.l_pilot < self.k_ue:
            raise ValueError(
                f"l_pilot must be >= k_ue for pilot recovery "
                f"({self.l_pilot} < {self.k_ue})"
            )
        if self.p_profiles < self.n_ris:
            raise ValueError(
                f"p_profiles must be >= the RIS size "
                f"({self.p_profiles} < {self.n_ris})"
            )
        for name in ("wavelength", "d_u", "d_b", "d_x", "d_y", "power_w"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")

    @property
    def n_ris(self) -> int:
        """Total number of RIS elements."""
        return self.n_x * self.n_y

    @property
    def nx_half(self) -> int:
        return (self.n_x - 1) // 2

    @property
    def ny_half(self) -> int:
        return (self.n_y - 1) // 2

    @property
    def k_half(self) -> int:
        return (self.k_ue - 1) // 2

    def antenna_offsets(self) -> np.ndarray:
        """Signed antenna indices ``[-k_half, ..., k_half]`` of the UE array."""
        return np.arange(-self.k_half, self.k_half + 1)


@dataclass(frozen=True)
class Pose:
    """5D user pose: position in spherical form plus array orientation.

    ``r`` is the distance from the RIS center to the center antenna,
    ``theta``/``phi`` the azimuth/elevation of that antenna, and
    ``psi``/``gamma`` the azimuth/elevation of the array axis direction.
    """

    r: float
    theta: float
    phi: float
    psi: float
    gamma: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r!r}")
        for name, hi in (("theta", math.pi), ("phi", math.pi / 2),
                         ("psi", math.pi), ("gamma", math.pi / 2)):
            v = getattr(self, name)
            if not 0.0 < v < hi:
                raise ValueError(
                    f"{name} must lie strictly inside (0, {hi:.6g}), got {v!r}"
                )

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.r, self.theta, self.phi, self.psi, self.gamma)


def unit_direction(azimuth: float, elevation: float) -> np.ndarray:
    """Unit vector for an azimuth/elevation pair, shape (3,)."""
    ca, sa = math.cos(azimuth), math.sin(azimuth)
    ce, se = math.cos(elevation), math.sin(elevation)
    return np.array([ca * ce, sa * ce, se])


def ris_element_position(index: GridIndex, cfg: SystemConfig) -> np.ndarray:
    """Position of RIS element (n, m) in meters, shape (3,)."""
    n, m = index
    if abs(n) > cfg.nx_half or abs(m) > cfg.ny_half:
        raise ValueError(f"element index {index} outside the array")
    return np.array([n * cfg.d_x, m * cfg.d_y, 0.0])


def ue_antenna_position(pose: Pose, k: int, cfg: SystemConfig) -> np.ndarray:
    """Position of user antenna k (signed index from the center), shape (3,)."""
    if abs(k) > cfg.k_half:
        raise ValueError(f"antenna index {k} outside the array")
    e = unit_direction(pose.theta, pose.phi)
    g = unit_direction(pose.psi, pose.gamma)
    return pose.r * e + k * cfg.d_u * g


def linear_index(index: GridIndex, cfg: SystemConfig) -> int:
    """1-based row index of element (n, m): x-major, y varying fastest."""
    n, m = index
    if abs(n) > cfg.nx_half or abs(m) > cfg.ny_half:
        raise ValueError(f"element index {index} outside the array")
    return (n + cfg.nx_half) * cfg.n_y + (m + cfg.ny_half) + 1


def flipped_index(index: GridIndex, cfg: SystemConfig) -> int:
    """1-based row index of the mirrored element (-n, -m).

    Equals ``n_ris - linear_index(index) + 1``: reversing the element order
    mirrors the array through its center.
    """
    return cfg.n_ris - linear_index(index, cfg) + 1


def ris_element_grid(cfg: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    """Signed (n, m) indices of every element in linear-index order.

    Returns two int arrays of length ``n_ris`` such that row ``i`` of any
    RIS-sized matrix corresponds to element ``(n[i], m[i])``.
    """
    n = np.repeat(np.arange(-cfg.nx_half, cfg.nx_half + 1), cfg.n_y)
    m = np.tile(np.arange(-cfg.ny_half, cfg.ny_half + 1), cfg.n_x)
    return n, m


def near_field_bounds(cfg: SystemConfig) -> tuple[float, float]:
    """Radiating near-field distance window of the RIS, (r_min, r_max).

    The lower edge is the Fresnel distance 0.62 * sqrt(D^3 / wavelength) and
    the upper edge the Fraunhofer distance 2 * D^2 / wavelength, where D is
    the RIS diagonal.
    """
    a = 2 * cfg.nx_half * cfg.d_x
    b = 2 * cfg.ny_half * cfg.d_y
    diag_sq = a * a + b * b
    r_min = 0.62 * math.sqrt(diag_sq ** 1.5 / cfg.wavelength)
    r_max = 2.0 * diag_sq / cfg.wavelength
    return r_min, r_max


def sample_pose(rng: np.random.Generator, cfg: SystemConfig,
                r_range: tuple[float, float] | None = None) -> Pose:
    """Draw a uniform random pose inside the near-field window.

    Angles are drawn uniformly from the module-level ranges, the distance
    uniformly from ``r_range`` (default: ``near_field_bounds(cfg)``).  The
    draw order is fixed (theta, phi, psi, gamma, r) so a seeded generator
    yields a reproducible sequence.
    """
    if r_range is None:
        r_range = near_field_bounds(cfg)
    theta = math.radians(rng.uniform(*THETA_RANGE_DEG))
    phi = math.radians(rng.uniform(*PHI_RANGE_DEG))
    psi = math.radians(rng.uniform(*PSI_RANGE_DEG))
    gamma = math.radians(rng.uniform(*GAMMA_RANGE_DEG))
    r = rng.uniform(*r_range)
    return Pose(r=r, theta=theta, phi=phi, psi=psi, gamma=gamma)
