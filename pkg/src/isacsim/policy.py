"""Transmit policies: per-slot precoders and the energy split that meets
the average power constraint.

Three strategies are supported:

* pure_comm      - user-steered beam on data slots only, sensing rides on
                   data echoes.
* time_sharing   - N dedicated pilot slots sweep the angular codebook at
                   the head of every window, data afterwards; the
                   pilot-to-data energy ratio beta tunes the trade-off.
* concurrent     - data slots carry a two-lobe beam, a fraction rho of the
                   power on a sweeping sensing lobe and 1-rho towards the
                   user.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SystemParams, UserGeometry, codebook_angle, steering_vector
from .traffic import DATA, PILOT

PURE_COMM = "pure_comm"
TIME_SHARING = "time_sharing"
CONCURRENT = "concurrent"
POLICY_KINDS = (PURE_COMM, TIME_SHARING, CONCURRENT)


class FeasibilityError(ValueError):
    """Raised when a policy cannot meet its constraints for the given
    system parameters."""


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    beta: float = 0.0  # pilot-to-data energy ratio (time sharing)
    rho: float = 0.0  # sensing power fraction (concurrent)

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")

    @classmethod
    def pure_comm(cls) -> "PolicySpec":
        return cls(PURE_COMM)

    @classmethod
    def time_sharing(cls, beta: float) -> "PolicySpec":
        return cls(TIME_SHARING, beta=beta)

    @classmethod
    def concurrent(cls, rho: float) -> "PolicySpec":
        return cls(CONCURRENT, rho=rho)

    @property
    def param(self) -> float | None:
        if self.kind == TIME_SHARING:
            return self.beta
        if self.kind == CONCURRENT:
            return self.rho
        return None


@dataclass(frozen=True)
class EnergyBudget:
    e_data: float  # J per data symbol
    e_pilot: float = 0.0  # J per pilot symbol


def time_sharing_min_window(params: SystemParams) -> float:
    """Smallest T_s that fits the N-slot sweep plus one full packet."""
    return (params.packet_bits / params.bits_per_symbol + params.n_ant) / params.bw_hz


def energy_budget(policy: PolicySpec, params: SystemParams) -> EnergyBudget:
    """Solve the average power constraint P_T for the symbol energies.

    Data-only policies spend everything on packets: E_s = P_T*log2(Q)/(B*lambda_u).
    Time sharing adds N pilots of energy E_p = beta*E_s per window:
    P_T = (B*lambda_u/log2(Q))*E_s + N*E_p/T_s.
    """
    data_slot_rate = params.packet_bits * params.lambda_u / params.bits_per_symbol
    if policy.kind == TIME_SHARING:
        t_min = time_sharing_min_window(params)
        if params.ts_s <= t_min:
            raise FeasibilityError(
                f"time sharing infeasible: T_s = {params.ts_s:g} s must exceed "
                f"(B/log2(Q) + N)/W = {t_min:g} s"
            )
        e_data = params.pt_w / (data_slot_rate + policy.beta * params.n_ant / params.ts_s)
        return EnergyBudget(e_data=e_data, e_pilot=policy.beta * e_data)
    if data_slot_rate <= 0:
        raise FeasibilityError("data-only policies need lambda_u > 0 to carry power")
    return EnergyBudget(e_data=params.pt_w / data_slot_rate)


def user_precoder(user: UserGeometry, n_ant: int) -> np.ndarray:
    """Maximum-ratio beam towards the user: a*(theta_u)/sqrt(N)."""
    return steering_vector(user.theta_rad, n_ant).conj() / math.sqrt(n_ant)


def sector_precoder(sector: int, params: SystemParams) -> np.ndarray:
    """Sweep beam for codebook sector n (1-based): a*(theta_n)/sqrt(N)."""
    theta = codebook_angle(sector, params.n_ant, params.theta_max_rad)
    return steering_vector(theta, params.n_ant).conj() / math.sqrt(params.n_ant)


def concurrent_precoder(
    rho: float,
    sector: int,
    user: UserGeometry,
    params: SystemParams,
    renormalize: bool = True,
) -> np.ndarray:
    """Two-lobe split beam: sqrt(rho)*f_s + sqrt((1-rho)/N)*a*(theta_u).

    The raw combination is not exactly unit norm (the lobes are not
    orthogonal), so by default it is rescaled to keep the per-slot energy
    accounting exact; renormalize=False keeps the raw vector.
    """
    f = math.sqrt(rho) * sector_precoder(sector, params) + math.sqrt(
        (1.0 - rho) / params.n_ant
    ) * steering_vector(user.theta_rad, params.n_ant).conj()
    if renormalize:
        f = f / np.linalg.norm(f)
    return f


def precoder_for_slot(
    policy: PolicySpec,
    kind: int,
    user: UserGeometry,
    sweep_sector: int,
    params: SystemParams,
    budget: EnergyBudget | None = None,
    pilot_sector: int | None = None,
    renormalize: bool = True,
) -> tuple[np.ndarray, float, int]:
    """Precoder and symbol energy for one non-idle slot.

    sweep_sector is the concurrent sweep position (1-based); it advances
    only on concurrent data slots and is returned updated. Pilot slots
    carry pilot_sector.
    """
    if kind not in (DATA, PILOT):
        raise ValueError("idle slots transmit nothing")
    if budget is None:
        budget = energy_budget(policy, params)
    if kind == PILOT:
        if policy.kind != TIME_SHARING:
            raise ValueError(f"{policy.kind} does not transmit pilots")
        if pilot_sector is None:
            raise ValueError("pilot slot needs a sector index")
        return sector_precoder(pilot_sector, params), budget.e_pilot, sweep_sector
    if policy.kind == CONCURRENT:
        f = concurrent_precoder(policy.rho, sweep_sector, user, params, renormalize)
        return f, budget.e_data, sweep_sector % params.n_ant + 1
    return user_precoder(user, params.n_ant), budget.e_data, sweep_sector
