"""System configuration: physical, flight, QoS and learning constants.

All defaults follow the simulation parameter set of the source system
(10-LED array, 60 deg optics, rotary-wing drone). The maximum-velocity
constant appears twice in that set (20 m/s and 10 m/s); we keep the later
value, 10 m/s, and log the conflict once at load time.
"""

from __future__ import annotations

import dataclasses
import hashlib
import logging
import math
from dataclasses import dataclass, field

import yaml

log = logging.getLogger(__name__)

_VMAX_CONFLICT_NOTE = (
    "reference parameter set lists V_max twice (20 m/s and 10 m/s); "
    "using 10 m/s"
)


@dataclass
class SystemConfig:
    # --- optics / channel ---
    half_power_semiangle_deg: float = 60.0   # LED half-power semi-angle
    fov_semiangle_deg: float = 60.0          # receiver FOV semi-angle
    pd_area_m2: float = 1e-4                 # photo-diode detection area
    refractive_index: float = 1.5            # concentrator internal index
    noise_var: float = 1e-20                 # per-user receiver noise variance
    csi_radius: float = 1e-8                 # bounded channel estimation error

    # --- LED array / dimming ---
    n_leds: int = 10
    dimming_level: float = 1.0               # target dimming level, (0, 1]
    i_low: float = 0.0                       # LED driver current lower bound [A]
    i_high: float = 0.010                    # LED driver current upper bound [A]

    # --- power accounting ---
    amp_efficiency: float = 1.2              # amplifier efficiency factor
    conversion_factor: float = 1.0           # DC conversion factor
    circuit_power: float = 1.0               # switch/control circuit power [W]

    # --- QoS ---
    r_min: float = 2.0                       # per-user rate floor [bits/s/Hz]
    p_max: float = 20.0                      # total power budget [W]

    # --- flight ---
    slot_duration: float = 1.0               # tau [s]
    n_slots: int = 20                        # L
    v_max: float = 10.0                      # [m/s]
    a_max: float = 6.0                       # [m/s^2]
    q_min: tuple = (0.0, 0.0, 10.0)          # [m]
    q_max: tuple = (150.0, 150.0, 100.0)     # [m]
    return_tolerance: float = 0.5            # return-to-start slack [m]

    # --- rotorcraft power model ---
    profile_drag_coeff: float = 0.012        # rho
    air_density: float = 1.225               # zeta [kg/m^3]
    rotor_solidity: float = 0.05
    rotor_disk_area: float = 0.79            # [m^2]
    blade_angular_velocity: float = 400.0    # [rad/s]
    rotor_radius: float = 0.05               # [m]
    correction_factor: float = 1.0           # iota
    uav_weight: float = 100.0                # [N]
    induced_hover_velocity: float = 7.2      # [m/s]
    fuselage_drag_ratio: float = 0.3

    # --- environment / MDP ---
    n_users: int = 5
    reward_mode: str = "penalty"             # "penalty" or "paper" (0 on infeasible)
    penalty: float | None = None             # default: -(p_max + hover power)
    observe_pose: bool = True                # False: channels-only state
    clamp_velocity: bool = True              # False: report C6/C7 violations instead

    # --- SAC hyperparameters ---
    gamma: float = 0.99
    entropy_weight: float = 0.2
    polyak: float = 0.005
    batch_size: int = 64
    lr_actor: float = 3e-4
    lr_critic1: float = 3e-4
    lr_critic2: float = 3e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    hidden_sizes: tuple = (64, 64)
    buffer_capacity: int = 100000
    reward_scale: float = 1e-3               # applied inside the learner only
    warmup_steps: int = 200                  # uniform-random action steps
    target_actor_bootstrap: bool = False     # use target actor for a' if True

    # --- meta-learning ---
    inner_steps: int = 5
    support_fraction: float = 0.8
    meta_task_count: int = 4
    episodes_per_task: int = 1
    lr_inner: float = 1e-3
    adapt_episodes: int = 20

    def __post_init__(self):
        self.q_min = tuple(float(v) for v in self.q_min)
        self.q_max = tuple(float(v) for v in self.q_max)
        self.hidden_sizes = tuple(int(v) for v in self.hidden_sizes)
        self.validate()

    # -- derived quantities --

    @property
    def i_zero(self) -> float:
        """Original DC bias I_0 = (I_l + I_h)/2, full-array 100% dimming."""
        return 0.5 * (self.i_low + self.i_high)

    @property
    def half_power_semiangle(self) -> float:
        return math.radians(self.half_power_semiangle_deg)

    @property
    def fov_semiangle(self) -> float:
        return math.radians(self.fov_semiangle_deg)

    def validate(self):
        def req(cond, msg):
            if not cond:
                raise ValueError(f"config: {msg}")

        req(0.0 < self.half_power_semiangle_deg < 90.0,
            "half-power semi-angle must be in (0, 90) deg")
        req(0.0 < self.fov_semiangle_deg <= 90.0,
            "FOV semi-angle must be in (0, 90] deg")
        req(self.pd_area_m2 > 0, "PD area must be positive")
        req(self.refractive_index >= 0, "refractive index must be >= 0")
        req(self.noise_var > 0, "noise variance must be positive")
        req(self.csi_radius >= 0, "CSI radius must be non-negative")
        req(self.n_leds >= 1, "need at least one LED")
        req(0.0 < self.dimming_level <= 1.0, "dimming level must be in (0, 1]")
        req(self.i_low < self.i_high, "need i_low < i_high")
        req(self.r_min > 0, "r_min must be positive")
        req(self.p_max > 0, "p_max must be positive")
        req(self.slot_duration > 0, "slot duration must be positive")
        req(self.n_slots >= 1, "need at least one slot")
        req(self.v_max > 0, "v_max must be positive")
        req(self.a_max > 0, "a_max must be positive")
        req(len(self.q_min) == 3 and len(self.q_max) == 3,
            "q_min/q_max must be 3-vectors")
        req(all(a < b for a, b in zip(self.q_min, self.q_max)),
            "q_min must be component-wise below q_max")
        for name in ("profile_drag_coeff", "air_density", "rotor_solidity",
                     "rotor_disk_area", "blade_angular_velocity", "rotor_radius",
                     "correction_factor", "uav_weight", "induced_hover_velocity",
                     "fuselage_drag_ratio"):
            req(getattr(self, name) > 0, f"{name} must be positive")
        req(self.n_users >= 1, "need at least one user")
        req(self.reward_mode in ("penalty", "paper"),
            "reward_mode must be 'penalty' or 'paper'")
        req(0.0 < self.gamma <= 1.0, "gamma must be in (0, 1]")
        req(self.entropy_weight >= 0, "entropy weight must be non-negative")
        req(0.0 < self.support_fraction < 1.0,
            "support fraction must be in (0, 1)")

    # -- serialization --

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["q_min"] = list(self.q_min)
        d["q_max"] = list(self.q_max)
        d["hidden_sizes"] = list(self.hidden_sizes)
        return d

    def dump(self) -> str:
        """Canonical YAML form (sorted keys); basis of the config hash."""
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    def config_hash(self) -> str:
        return hashlib.sha256(self.dump().encode()).hexdigest()[:16]

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


_FIELD_NAMES = {f.name for f in dataclasses.fields(SystemConfig)}


def load_config(path: str | None = None) -> SystemConfig:
    """Load a YAML config file; missing keys fall back to defaults.

    Unknown keys and out-of-range values are rejected. An empty (or absent)
    file yields the full default parameter set.
    """
    data = {}
    if path is not None:
        with open(path) as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ValueError(f"config parse error in {path}: {e}") from e
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ValueError(f"config {path}: top level must be a mapping")
        unknown = set(data) - _FIELD_NAMES
        if unknown:
            raise ValueError(f"config {path}: unknown keys {sorted(unknown)}")
    log.info(_VMAX_CONFLICT_NOTE)
    return SystemConfig(**data)
