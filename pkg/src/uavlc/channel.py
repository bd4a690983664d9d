"""Lambertian line-of-sight optical channel between the UAV array and users.

The LED array is treated as co-located (one geometry shared by all N LEDs),
so the N x K gain matrix has identical rows within each user column.
Channel estimates carry a bounded error: |h_hat - h| <= delta element-wise,
drawn uniformly and clamped at zero from below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class OpticsParams:
    half_power_semiangle: float   # Phi_1/2 [rad]
    fov_semiangle: float          # Psi_c [rad]
    pd_area: float                # A [m^2]
    refractive_index: float       # q, dimensionless >= 0

    def __post_init__(self):
        if not 0.0 < self.half_power_semiangle < 0.5 * math.pi:
            raise ValueError("half-power semi-angle must be in (0, pi/2)")
        if not 0.0 < self.fov_semiangle <= 0.5 * math.pi:
            raise ValueError("FOV semi-angle must be in (0, pi/2]")
        if self.pd_area <= 0:
            raise ValueError("PD area must be positive")
        if self.refractive_index < 0:
            raise ValueError("refractive index must be >= 0")


@dataclass
class ChannelState:
    true_gain: np.ndarray     # H, N x K
    est_gain: np.ndarray      # H_hat, N x K
    noise_var: np.ndarray     # sigma_k^2, length K
    uncertainty_radius: float # delta


def lambertian_order(half_power_semiangle: float) -> float:
    """Lambertian emission order m = -ln 2 / ln(cos Phi_1/2)."""
    if not 0.0 < half_power_semiangle < 0.5 * math.pi:
        raise ValueError("half-power semi-angle must be in (0, pi/2)")
    c = math.cos(half_power_semiangle)
    if c <= 0.0 or c >= 1.0:
        raise ValueError("cos(half-power semi-angle) must be in (0, 1)")
    return -math.log(2.0) / math.log(c)


def concentrator_gain(psi: float, optics: OpticsParams) -> float:
    """Optical concentrator gain: q^2 / sin^2(Psi_c) inside the FOV, else 0."""
    if psi < 0:
        raise ValueError("incidence angle must be non-negative")
    if psi > optics.fov_semiangle:
        return 0.0
    return optics.refractive_index ** 2 / math.sin(optics.fov_semiangle) ** 2


def los_channel_gain(uav: np.ndarray, user: np.ndarray,
                     optics: OpticsParams) -> float:
    """LoS gain h = (m+1)A/(2 pi d^2) G(psi) cos^m(phi) cos(psi).

    The UAV array points straight down and the PD straight up, so the
    irradiance and incidence angles coincide: cos psi = cos phi = dz / d.
    Returns 0 when the incidence angle exceeds the FOV semi-angle, which
    includes any geometry with the UAV at or below the user's plane.
    """
    uav = np.asarray(uav, dtype=float)
    user = np.asarray(user, dtype=float)
    diff = uav - user
    d = float(np.linalg.norm(diff))
    if d == 0.0:
        raise ValueError("degenerate geometry: UAV and user coincide")
    dz = float(diff[2])
    if dz <= 0.0:
        return 0.0
    cos_psi = dz / d
    psi = math.acos(min(1.0, cos_psi))
    if psi > optics.fov_semiangle:
        return 0.0
    m = lambertian_order(optics.half_power_semiangle)
    g = concentrator_gain(psi, optics)
    return ((m + 1.0) * optics.pd_area / (2.0 * math.pi * d * d)
            * g * cos_psi ** m * cos_psi)


def channel_matrix(uav: np.ndarray, users, optics: OpticsParams,
                   n_leds: int) -> np.ndarray:
    """N x K true-gain matrix; all rows of a column equal (co-located array)."""
    if n_leds < 1:
        raise ValueError("need at least one LED")
    users = list(users)
    if not users:
        raise ValueError("need at least one user")
    gains = np.array([los_channel_gain(uav, u, optics) for u in users])
    return np.tile(gains, (n_leds, 1))


def perturb_csi(h: np.ndarray, delta: float,
                rng: np.random.Generator) -> np.ndarray:
    """Estimated gains: H + eps with eps ~ U[-delta, delta], clamped at 0."""
    if delta < 0:
        raise ValueError("uncertainty radius must be non-negative")
    if delta == 0.0:
        return h.copy()
    eps = rng.uniform(-delta, delta, size=h.shape)
    return np.maximum(h + eps, 0.0)
