"""NOMA rate computation, power accounting and feasibility checking.

Users decode in ascending order of effective gain |h_k^H A w_k|^2; each user
is interfered only by users later (stronger) in that order. Energy
efficiency is the sum rate over total consumed power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dimming import (LedSelection, beamforming_bound, dimming_level_of,
                      DimmingConfig)
from .uav import UavState, check_flight, FlightConfig


@dataclass
class PowerBreakdown:
    transmit: float     # amplifier-side beamforming power [W]
    bias: float         # DC-bias power [W]
    circuit: float      # P_Cir [W]
    propulsion: float   # P_Prop [W]

    @property
    def total(self) -> float:
        return self.transmit + self.bias + self.circuit + self.propulsion


@dataclass
class RateReport:
    rates: np.ndarray       # per-user, original indexing [bits/s/Hz]
    order: np.ndarray       # decoding order (ascending effective gain)

    @property
    def sum_rate(self) -> float:
        return float(self.rates.sum())


@dataclass
class QosConfig:
    r_min: float    # [bits/s/Hz]
    p_max: float    # [W]

    def __post_init__(self):
        if self.r_min <= 0 or self.p_max <= 0:
            raise ValueError("r_min and p_max must be positive")


def effective_gains(h: np.ndarray, w: np.ndarray,
                    selection: LedSelection) -> np.ndarray:
    """|h_k^H A w_k|^2 for every user."""
    masked = w * selection.a[:, None]
    return np.einsum("nk,nk->k", h, masked) ** 2


def order_users(h: np.ndarray, w: np.ndarray,
                selection: LedSelection) -> np.ndarray:
    """Decoding order: ascending effective gain, ties by user index."""
    g = effective_gains(h, w, selection)
    return np.argsort(g, kind="stable")


def per_user_rate(h: np.ndarray, w: np.ndarray, selection: LedSelection,
                  noise_var: np.ndarray, order: np.ndarray) -> RateReport:
    """Per-user NOMA rate with interference from later-ordered users."""
    noise_var = np.broadcast_to(np.asarray(noise_var, dtype=float),
                                (h.shape[1],))
    masked = w * selection.a[:, None]
    # cross[k, i] = |h_k^H A w_i|^2
    cross = (h.T @ masked) ** 2
    k_users = h.shape[1]
    rates = np.zeros(k_users)
    for pos, k in enumerate(order):
        later = order[pos + 1:]
        interference = cross[k, later].sum() if later.size else 0.0
        sinr = cross[k, k] / (interference + noise_var[k])
        rates[k] = np.log2(1.0 + sinr)
    return RateReport(rates=rates, order=np.asarray(order))


def total_power(w: np.ndarray, selection: LedSelection, i_dc: float,
                p_propulsion: float, amp_efficiency: float,
                conversion_factor: float, circuit_power: float
                ) -> PowerBreakdown:
    """Total power: amplifier + DC bias + circuit + propulsion.

    The amplifier term sums |w_{n,k}| over active LEDs; magnitudes keep the
    term non-negative for signed beamformer entries.
    """
    transmit = amp_efficiency * float(
        (np.abs(w) * selection.a[:, None]).sum())
    bias = conversion_factor * selection.n_active * i_dc
    return PowerBreakdown(transmit=transmit, bias=bias,
                          circuit=circuit_power, propulsion=p_propulsion)


def energy_efficiency(rates: RateReport, power: PowerBreakdown) -> float:
    """Sum rate per watt of total consumed power."""
    if power.total <= 0:
        raise ZeroDivisionError("total power must be positive")
    return rates.sum_rate / power.total


def check_p1_feasibility(w: np.ndarray, selection: LedSelection, i_dc: float,
                         v_next: np.ndarray, h_true: np.ndarray,
                         noise_var: np.ndarray, uav_state: UavState,
                         flight_cfg: FlightConfig, dim_cfg: DimmingConfig,
                         qos: QosConfig, p_propulsion: float,
                         amp_efficiency: float, conversion_factor: float,
                         circuit_power: float) -> dict:
    """Per-constraint boolean report for the full problem at one slot.

    C1 is evaluated against true channels. C4 (the kinematic update rule)
    holds by construction of the environment stepper. RTS is the
    return-to-start boundary condition attached to the final slot.
    """
    order = order_users(h_true, w, selection)
    report_rates = per_user_rate(h_true, w, selection, noise_var, order)
    power = total_power(w, selection, i_dc, p_propulsion,
                        amp_efficiency, conversion_factor, circuit_power)
    flight = check_flight(uav_state, v_next, flight_cfg)
    bound = beamforming_bound(i_dc, dim_cfg.i_low, dim_cfg.i_high)
    row_sums = np.abs(w * selection.a[:, None]).sum(axis=1)
    n_a = selection.n_active
    eta_back = dimming_level_of(n_a, i_dc, dim_cfg)
    report = {
        "C1": bool(np.all(report_rates.rates >= qos.r_min - 1e-12)),
        "C2": power.total <= qos.p_max * (1.0 + 1e-12),
        "C3": bool(np.all(row_sums <= bound * (1.0 + 1e-9) + 1e-15)),
        "C4": True,
        "C5": "C5" not in flight,
        "C6": "C6" not in flight,
        "C7": "C7" not in flight,
        "C8": abs(eta_back - dim_cfg.eta) <= 1e-9,
        "C9": bool(np.all((selection.a == 0) | (selection.a == 1))
                   and n_a >= 1),
        "RTS": "RTS" not in flight,
    }
    report["feasible"] = all(report[k] for k in
                             ("C1", "C2", "C3", "C4", "C5", "C6", "C7",
                              "C8", "C9", "RTS"))
    report["rates"] = report_rates
    report["power"] = power
    return report
