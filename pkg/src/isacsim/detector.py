"""Angle-domain detector: coherent-integration statistic on a grid,
cell-averaging adaptive threshold, peak extraction and truth matching.

Given M transmit/echo pairs (y_m, s_m) collected in one window, the
decision statistic at grid angle theta is

    chi(theta) = |sum_m y_m^H a a^T s_m|^2 / sum_m ||a a^T s_m||^2

with a = a(theta) and the exact identity ||a a^T s||^2 = N*|a^T s|^2.
Under noise only, chi/N0 at any probed cell is exponential with mean 1,
which is what makes the cell-averaging threshold below exact on
homogeneous cells. Cells never probed (zero denominator: every s_m
orthogonal to a(theta)) get chi = 0 and are excluded from threshold
training.

Cell-averaging threshold layout around the cell under test (CUT), with
n_train = 16 and n_guard = 3 shown:

    ... T T T T T T T T  G G G  CUT  G G G  T T T T T T T T ...

threshold = (pfa^(-1/n_train) - 1) * sum(training cells). Near grid
edges (or next to excluded cells) the short side is rebalanced onto the
other side so exactly n_train cells always contribute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import SensingObservation
from .core import TargetGeometry, steering_vector


class UndefinedGainError(ValueError):
    """Gain estimate requested at an angle no transmission ever probed."""


class GridError(ValueError):
    """Angle grid incompatible with the detector configuration."""


@dataclass(frozen=True)
class DetectorSettings:
    """Threshold geometry and scoring tolerance.

    The 0.5 deg grid step oversamples the 16-element beamwidth (~6.4 deg)
    by an order of magnitude. n_guard = 10 cells (5 deg per side) keeps
    the training window outside the mainlobe of an on-grid peak; the hit
    tolerance is about half the 3 dB beamwidth.
    """

    grid_step_rad: float = math.radians(0.5)
    n_train: int = 16
    n_guard: int = 10
    hit_tol_rad: float = math.radians(4.0)

    def __post_init__(self):
        if self.n_train <= 0 or self.n_train % 2:
            raise ValueError("n_train must be a positive even count")
        if self.n_guard < 0:
            raise ValueError("n_guard must be >= 0")
        if self.grid_step_rad <= 0 or self.hit_tol_rad <= 0:
            raise ValueError("grid step and hit tolerance must be positive")


@dataclass
class AngleGrid:
    """Strictly increasing, uniformly spaced scan angles [rad]."""

    angles: np.ndarray
    _steering: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        if self.angles.ndim != 1 or self.angles.size < 2:
            raise GridError("grid needs at least 2 angles")
        steps = np.diff(self.angles)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise GridError("grid angles must be strictly increasing and uniform")

    @classmethod
    def uniform(cls, theta_max_rad: float, step_rad: float) -> "AngleGrid":
        n = int(round(2.0 * theta_max_rad / step_rad)) + 1
        return cls(np.linspace(-theta_max_rad, theta_max_rad, n))

    def __len__(self) -> int:
        return len(self.angles)

    def steering(self, n_ant: int) -> np.ndarray:
        """(n_ant x G) matrix of steering vectors, cached per array size."""
        if n_ant not in self._steering:
            self._steering[n_ant] = np.exp(
                1j * np.pi * np.outer(np.arange(n_ant), np.sin(self.angles))
            )
        return self._steering[n_ant]


@dataclass
class GlrtMap:
    """chi per grid cell, probing validity per cell, and the integrated
    observation count; thresholds attach after cell averaging."""

    chi: np.ndarray
    valid: np.ndarray
    n_obs: int
    thresholds: np.ndarray | None = None


@dataclass(frozen=True)
class Detection:
    angle_rad: float
    alpha_hat: complex
    chi: float


@dataclass
class DetectionReport:
    detections: list[Detection]
    n_obs: int

    def __len__(self) -> int:
        return len(self.detections)


def _stack(obs: list[SensingObservation]) -> tuple[np.ndarray, np.ndarray]:
    y = np.stack([o.y for o in obs], axis=1)
    s = np.stack([o.s for o in obs], axis=1)
    if y.shape != s.shape:
        raise ValueError("observation y/s shapes disagree")
    return y, s


def glrt_map(obs: list[SensingObservation], grid: AngleGrid) -> GlrtMap:
    """Evaluate the coherent-integration statistic on every grid cell."""
    if len(obs) == 0:
        raise ValueError("no observations to integrate")
    y, s = _stack(obs)
    n_ant = y.shape[0]
    a = grid.steering(n_ant)
    w = a.T @ s  # (G, M): a(theta)^T s_m
    c = a.conj().T @ y  # (G, M): a(theta)^H y_m
    num = np.abs(np.sum(np.conj(c) * w, axis=1)) ** 2
    den = n_ant * np.sum(np.abs(w) ** 2, axis=1)
    valid = den > 0.0
    chi = np.where(valid, num / np.where(valid, den, 1.0), 0.0)
    return GlrtMap(chi=chi, valid=valid, n_obs=y.shape[1])


def estimate_gain(obs: list[SensingObservation], theta: float) -> complex:
    """Least-squares complex target gain at a fixed angle:
    sum_m (a a^T s_m)^H y_m / sum_m ||a a^T s_m||^2."""
    y, s = _stack(obs)
    n_ant = y.shape[0]
    a = steering_vector(theta, n_ant)
    w = a @ s  # a^T s_m
    den = n_ant * np.sum(np.abs(w) ** 2)
    if den == 0.0:
        raise UndefinedGainError(f"no transmit energy towards theta={theta:g} rad")
    num = np.sum(np.conj(w) * (a.conj() @ y))
    return complex(num / den)


def cfar_multiplier(pfa: float, n_train: int) -> float:
    return pfa ** (-1.0 / n_train) - 1.0


def _thresholds_uniform(chi: np.ndarray, pfa: float, n_train: int, n_guard: int) -> np.ndarray:
    """Vectorized path for grids where every cell is a valid noise sample."""
    g = len(chi)
    half = n_train // 2
    idx = np.arange(g)
    left_avail = np.clip(idx - n_guard, 0, None)
    right_avail = np.clip(g - 1 - idx - n_guard, 0, None)
    left_take = np.minimum(half, left_avail)
    right_take = np.minimum(n_train - left_take, right_avail)
    left_take = np.minimum(n_train - right_take, left_avail)
    csum = np.concatenate(([0.0], np.cumsum(chi)))
    lo = idx - n_guard - left_take
    left_sum = csum[np.maximum(idx - n_guard, 0)] - csum[np.maximum(lo, 0)]
    hi = np.minimum(idx + n_guard + right_take, g - 1)
    right_sum = csum[hi + 1] - csum[np.minimum(idx + n_guard + 1, g)]
    return cfar_multiplier(pfa, n_train) * (left_sum + right_sum)


def _training_cells(
    i: int, valid: np.ndarray, n_train: int, n_guard: int
) -> list[int]:
    """Nearest valid cells beyond the guard band, half per side, spilling
    the shortfall onto the other side."""
    g = len(valid)
    half = n_train // 2
    left = [j for j in range(i - n_guard - 1, -1, -1) if valid[j]]
    right = [j for j in range(i + n_guard + 1, g) if valid[j]]
    lt, rt = left[:half], right[:half]
    if len(lt) < half:
        rt = right[: half + (half - len(lt))]
    if len(rt) < half:
        lt = left[: half + (half - len(rt))]
    return lt + rt


def cfar_thresholds(
    chi: np.ndarray,
    pfa: float,
    n_train: int,
    n_guard: int,
    valid: np.ndarray | None = None,
) -> np.ndarray:
    """Adaptive threshold per cell from the surrounding training cells.

    Cells flagged invalid (never probed) are skipped when gathering
    training cells; if fewer than n_train valid cells exist anywhere near
    a cell, the multiplier is recomputed for the count actually found
    (infinite threshold when none), keeping the false-alarm calibration.
    """
    chi = np.asarray(chi, dtype=float)
    g = len(chi)
    if g <= n_train + 2 * n_guard + 1:
        raise GridError(
            f"grid of {g} cells too short for n_train={n_train}, n_guard={n_guard}"
        )
    if n_train % 2:
        raise ValueError("n_train must be even")
    if valid is None or bool(np.all(valid)):
        return _thresholds_uniform(chi, pfa, n_train, n_guard)

    thresholds = np.empty(g)
    for i in range(g):
        cells = _training_cells(i, valid, n_train, n_guard)
        if not cells:
            thresholds[i] = np.inf
        else:
            thresholds[i] = cfar_multiplier(pfa, len(cells)) * chi[cells].sum()
    return thresholds


def _peak_candidates(chi: np.ndarray) -> list[int]:
    """Strict local maxima; a flat run counts once, at its leftmost cell.
    Endpoints have only one neighbour and are never candidates."""
    if np.all(np.diff(chi) != 0.0):
        inner = (chi[1:-1] > chi[:-2]) & (chi[1:-1] > chi[2:])
        return list(np.flatnonzero(inner) + 1)
    peaks = []
    g = len(chi)
    i = 1
    while i < g - 1:
        j = i
        while j + 1 < g and chi[j + 1] == chi[i]:
            j += 1
        if j < g - 1 and chi[i] > chi[i - 1] and chi[i] > chi[j + 1]:
            peaks.append(i)
        i = j + 1
    return peaks


def detect(
    glrt: GlrtMap, grid: AngleGrid, obs: list[SensingObservation]
) -> DetectionReport:
    """Report every strict local maximum of chi above its threshold, with
    the complex gain estimate attached."""
    if glrt.thresholds is None:
        raise ValueError("thresholds not computed; run cfar_thresholds first")
    detections = []
    for i in _peak_candidates(glrt.chi):
        if glrt.chi[i] > glrt.thresholds[i]:
            theta = float(grid.angles[i])
            detections.append(
                Detection(theta, estimate_gain(obs, theta), float(glrt.chi[i]))
            )
    return DetectionReport(detections=detections, n_obs=glrt.n_obs)


def match(
    report: DetectionReport,
    targets: tuple[TargetGeometry, ...],
    tol_rad: float,
) -> tuple[list[bool], int]:
    """Greedy nearest-first association of detections to targets.

    A target is hit when some detection lies within tol of its angle;
    each detection matches at most one target, and leftover detections
    count as false detections.
    """
    if tol_rad <= 0:
        raise ValueError("tolerance must be positive")
    pairs = []
    for di, det in enumerate(report.detections):
        for ti, tgt in enumerate(targets):
            gap = abs(det.angle_rad - tgt.theta_rad)
            if gap <= tol_rad:
                pairs.append((gap, di, ti))
    pairs.sort()
    hits = [False] * len(targets)
    used_det: set[int] = set()
    for _, di, ti in pairs:
        if di in used_det or hits[ti]:
            continue
        hits[ti] = True
        used_det.add(di)
    return hits, len(report.detections) - len(used_det)
