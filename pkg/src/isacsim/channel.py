"""Matched-filter observations at the sensing array and the user-side SNR.

The sensing receiver sees the superposition of target backscatters plus
circularly-symmetric complex Gaussian noise of covariance N0*I. The
user side is summarized by its sufficient statistic, the instantaneous
communication SNR; symbol-level decoding is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TargetGeometry, UserGeometry, steering_vector


@dataclass(frozen=True)
class ScenarioGeometry:
    user: UserGeometry
    targets: tuple[TargetGeometry, ...]

    def __post_init__(self):
        angles = [self.user.theta_rad] + [t.theta_rad for t in self.targets]
        for th in angles:
            if not -np.pi / 2 <= th <= np.pi / 2:
                raise ValueError(f"angle {th} rad outside [-pi/2, pi/2]")


@dataclass(frozen=True)
class TargetEcho:
    """A scatterer as seen within one window: angle plus complex
    round-trip amplitude (|amp|^2 equals the radar-equation gain)."""

    theta_rad: float
    amp: complex


@dataclass(frozen=True)
class SensingObservation:
    """One transmit/echo pair: the snapshot y and the vector s that
    produced it, recorded exactly as transmitted."""

    y: np.ndarray
    s: np.ndarray
    slot: int = 0


def echoes_from_targets(
    targets: tuple[TargetGeometry, ...], phases: np.ndarray
) -> list[TargetEcho]:
    """Attach one complex phase per target (held fixed within a window)."""
    return [
        TargetEcho(t.theta_rad, np.sqrt(t.alpha_sq) * np.exp(1j * ph))
        for t, ph in zip(targets, phases)
    ]


def target_response(s: np.ndarray, echoes: list[TargetEcho]) -> np.ndarray:
    """Noise-free backscatter sum_k amp_k * a(theta_k) * (a(theta_k)^T s)."""
    s = np.asarray(s, dtype=complex)
    y = np.zeros(s.shape, dtype=complex)
    n_ant = s.shape[0]
    for e in echoes:
        a = steering_vector(e.theta_rad, n_ant)
        if s.ndim == 1:
            y += e.amp * (a @ s) * a
        else:
            y += e.amp * np.outer(a, a @ s)
    return y


def draw_noise(n_ant: int, n0: float, rng: np.random.Generator, count: int | None = None):
    """CN(0, n0*I) noise, one column per observation if count is given."""
    shape = (n_ant,) if count is None else (n_ant, count)
    g = rng.standard_normal((2,) + shape)
    return np.sqrt(n0 / 2.0) * (g[0] + 1j * g[1])


def sense(
    s: np.ndarray,
    echoes: list[TargetEcho],
    n0: float,
    rng: np.random.Generator,
    slot: int = 0,
) -> SensingObservation:
    """One matched-filter snapshot: target response plus AWGN."""
    s = np.asarray(s, dtype=complex)
    y = target_response(s, echoes)
    if n0 > 0:
        y = y + draw_noise(len(s), n0, rng)
    return SensingObservation(y=y, s=s, slot=slot)


def comm_snr(f: np.ndarray, e_s: float, user: UserGeometry, n0: float) -> float:
    """Instantaneous SNR at the user: E_s*|alpha_u|^2*|a(theta_u)^T f|^2 / N0."""
    a = steering_vector(user.theta_rad, len(f))
    return e_s * user.alpha_sq * np.abs(a @ f) ** 2 / n0
