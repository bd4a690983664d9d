"""Discrete-time UAV kinematics, flight constraints and rotor power models.

Flight constraints are reported rather than enforced; the environment
decides whether to penalize or clamp. The parasite power term keeps the
rotor-solidity factor exactly as the source model prints it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


@dataclass
class FlightConfig:
    slot_duration: float          # tau [s]
    n_slots: int                  # L
    v_max: float                  # [m/s]
    a_max: float                  # [m/s^2]
    q_min: np.ndarray             # [m]
    q_max: np.ndarray             # [m]
    q_init: np.ndarray            # q_U^I [m]
    return_tolerance: float = 0.5 # [m]

    def __post_init__(self):
        self.q_min = np.asarray(self.q_min, dtype=float)
        self.q_max = np.asarray(self.q_max, dtype=float)
        self.q_init = np.asarray(self.q_init, dtype=float)
        if self.slot_duration <= 0 or self.v_max <= 0 or self.a_max <= 0:
            raise ValueError("tau, v_max and a_max must be positive")
        if not np.all(self.q_min < self.q_max):
            raise ValueError("q_min must be component-wise below q_max")


@dataclass
class RotorcraftParams:
    profile_drag_coeff: float      # rho
    air_density: float             # zeta [kg/m^3]
    rotor_solidity: float
    rotor_disk_area: float         # [m^2]
    blade_angular_velocity: float  # [rad/s]
    rotor_radius: float            # [m]
    correction_factor: float       # iota
    uav_weight: float              # [N]
    induced_hover_velocity: float  # [m/s]
    fuselage_drag_ratio: float

    def __post_init__(self):
        for f in ("profile_drag_coeff", "air_density", "rotor_solidity",
                  "rotor_disk_area", "blade_angular_velocity", "rotor_radius",
                  "correction_factor", "uav_weight", "induced_hover_velocity",
                  "fuselage_drag_ratio"):
            if getattr(self, f) <= 0:
                raise ValueError(f"{f} must be positive")


@dataclass
class UavState:
    position: np.ndarray
    velocity: np.ndarray
    slot: int = 0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)


class HoverPower(NamedTuple):
    blade: float
    induced: float
    total: float


def step_kinematics(state: UavState, v_next: np.ndarray,
                    cfg: FlightConfig) -> UavState:
    """First-order slot update q(l+1) = q(l) + v(l) tau."""
    v_next = np.asarray(v_next, dtype=float)
    return UavState(position=state.position + v_next * cfg.slot_duration,
                    velocity=v_next.copy(),
                    slot=state.slot + 1)


def check_flight(state: UavState, v_next: np.ndarray,
                 cfg: FlightConfig) -> list[str]:
    """Names of violated flight constraints for the proposed slot command.

    C5: next position strictly inside the box; C6: acceleration bound;
    C7: speed bound; RTS: the step finishing the episode must land within
    the return tolerance of the initial position.
    """
    v_next = np.asarray(v_next, dtype=float)
    tau = cfg.slot_duration
    violations = []
    next_pos = state.position + v_next * tau
    if not np.all((cfg.q_min < next_pos) & (next_pos < cfg.q_max)):
        violations.append("C5")
    if np.linalg.norm(v_next - state.velocity) > cfg.a_max * tau * (1 + 1e-12):
        violations.append("C6")
    if np.linalg.norm(v_next) > cfg.v_max * (1 + 1e-12):
        violations.append("C7")
    if state.slot + 1 == cfg.n_slots:
        if np.linalg.norm(next_pos - cfg.q_init) > cfg.return_tolerance:
            violations.append("RTS")
    return violations


def clamp_velocity(state: UavState, v_cmd: np.ndarray,
                   cfg: FlightConfig) -> np.ndarray:
    """Nearest velocity satisfying C6 and C7 jointly.

    Clamp the velocity change into the acceleration ball, then project onto
    the speed ball; projection onto a convex set containing the previous
    (feasible) velocity cannot re-violate the acceleration bound.
    """
    v_cmd = np.asarray(v_cmd, dtype=float)
    dv = v_cmd - state.velocity
    max_dv = cfg.a_max * cfg.slot_duration
    n = np.linalg.norm(dv)
    if n > max_dv:
        dv = dv * (max_dv / n)
    v = state.velocity + dv
    speed = np.linalg.norm(v)
    if speed > cfg.v_max:
        v = v * (cfg.v_max / speed)
    return v


def hover_power(p: RotorcraftParams) -> HoverPower:
    """Blade and induced power at hover; total P_Hov = P_b + P_i."""
    p_b = (p.profile_drag_coeff / 8.0) * p.air_density * p.rotor_solidity \
        * p.rotor_disk_area * p.blade_angular_velocity ** 3 * p.rotor_radius ** 3
    p_i = (1.0 + p.correction_factor) * p.uav_weight ** 1.5 \
        / np.sqrt(2.0 * p.air_density * p.rotor_disk_area)
    return HoverPower(blade=p_b, induced=p_i, total=p_b + p_i)


def propulsion_power(v: np.ndarray, p: RotorcraftParams) -> float:
    """Forward-flight power: blade profile + induced + parasite terms.

    Depends on the speed only; reduces exactly to hover power at v = 0.
    """
    speed2 = float(np.dot(np.asarray(v, dtype=float).ravel(),
                          np.asarray(v, dtype=float).ravel()))
    hov = hover_power(p)
    tip2 = (p.blade_angular_velocity * p.rotor_radius) ** 2
    blade = (1.0 + 3.0 * speed2 / tip2) * hov.blade
    vi2 = p.induced_hover_velocity ** 2
    inner = np.sqrt(1.0 + speed2 ** 2 / (4.0 * vi2 * vi2)) - speed2 / (2.0 * vi2)
    induced = np.sqrt(inner) * hov.induced
    parasite = 0.5 * p.fuselage_drag_ratio * p.air_density * p.rotor_solidity \
        * p.rotor_disk_area * speed2 ** 1.5
    return float(blade + induced + parasite)
