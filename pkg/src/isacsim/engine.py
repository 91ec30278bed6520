"""Window-level simulation and Monte Carlo estimation of detection
probability, window false-alarm rate and communication SNR.

Every trial draws one target phase per scatterer, burns in the data
buffer for a few windows, then scores a single window: build the slot
schedule, transmit, integrate the echoes, run the detector, and match
peaks against the true targets. The false-alarm rate is measured on a
paired no-target replay of the same window (same transmit sequence, same
noise draws), which isolates the detector from the traffic process.

Within one window every observation sharing a precoder is summed into a
single symbol-weighted pseudo-observation before the detector runs
(y~ = sum_m x_m^* y_m / sqrt(M_g), s~ = sqrt(M_g E) f). The statistic is
algebraically identical (see compress_observations / the test suite) and
the pseudo-noise keeps the CN(0, N0 I) law, so windows with thousands of
data slots cost the same as the pilot case.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import (
    ScenarioGeometry,
    SensingObservation,
    TargetEcho,
    comm_snr,
    draw_noise,
    echoes_from_targets,
    target_response,
)
from .core import SystemParams, linear_to_db
from .detector import (
    AngleGrid,
    DetectorSettings,
    cfar_thresholds,
    detect,
    glrt_map,
    match,
)
from .policy import (
    CONCURRENT,
    PURE_COMM,
    TIME_SHARING,
    EnergyBudget,
    PolicySpec,
    concurrent_precoder,
    energy_budget,
    sector_precoder,
    user_precoder,
)
from .traffic import DATA, BufferState, PacketArrival, build_schedule, generate_arrivals

DEFAULT_WARMUP_WINDOWS = 5


@dataclass
class WindowResult:
    """Outcome of one scored sensing window."""

    n_obs: int
    hits: tuple[bool, ...]
    n_false: int
    snr_samples: np.ndarray  # linear SNR, one entry per data slot
    h0_detected: bool  # paired no-target replay raised >= 1 detection
    energy_j: float


@dataclass(frozen=True)
class MonteCarloResult:
    p_d_per_target: tuple[float, ...]
    p_fa_window: float
    mean_snr_db: float
    mean_m: float
    n_trials: int
    seed: int
    realized_power_w: float

    @property
    def p_d(self) -> float:
        if not self.p_d_per_target:
            return float("nan")
        return float(np.mean(self.p_d_per_target))


@dataclass(frozen=True)
class SweepRow:
    sweep_name: str
    sweep_value: float
    policy: str
    policy_param: float | None
    p_d: float
    p_fa_window: float
    mean_snr_db: float
    mean_m: float
    n_trials: int
    seed: int


@dataclass
class SweepResult:
    policy: PolicySpec
    rows: list[SweepRow]
    metadata: dict


class _WindowSim:
    """Per-configuration precomputation shared by all windows/trials."""

    def __init__(
        self,
        params: SystemParams,
        scenario: ScenarioGeometry,
        policy: PolicySpec,
        settings: DetectorSettings,
        renormalize: bool = True,
    ):
        self.params = params
        self.scenario = scenario
        self.policy = policy
        self.settings = settings
        self.renormalize = renormalize
        self.budget: EnergyBudget = energy_budget(policy, params)
        self.grid = AngleGrid.uniform(params.theta_max_rad, settings.grid_step_rad)
        self.grid.steering(params.n_ant)  # warm the cache
        n = params.n_ant
        self.f_user = user_precoder(scenario.user, n)
        self.snr_user = comm_snr(self.f_user, self.budget.e_data, scenario.user, params.n0_w_hz)
        if policy.kind == TIME_SHARING:
            self.pilot_f = np.stack(
                [sector_precoder(k, params) for k in range(1, n + 1)], axis=1
            )
        elif policy.kind == CONCURRENT:
            self.cc_f = np.stack(
                [
                    concurrent_precoder(policy.rho, k, scenario.user, params, renormalize)
                    for k in range(1, n + 1)
                ],
                axis=1,
            )
            self.cc_snr = np.array(
                [
                    comm_snr(self.cc_f[:, k], self.budget.e_data, scenario.user, params.n0_w_hz)
                    for k in range(n)
                ]
            )
            self.cc_norm_sq = np.sum(np.abs(self.cc_f) ** 2, axis=0)


def _window_groups(sim: _WindowSim, kinds: np.ndarray, sweep_sector: int):
    """Group the window's transmissions by precoder.

    Returns (groups, snr_samples, n_obs, energy, sweep_out) where groups
    is a list of (precoder, symbol energy, slot count) and n_obs counts
    the observations the detector will integrate: the N pilots under time
    sharing, the data slots otherwise.
    """
    n = sim.params.n_ant
    e_data, e_pilot = sim.budget.e_data, sim.budget.e_pilot
    n_data = int(np.count_nonzero(kinds == DATA))
    if sim.policy.kind == TIME_SHARING:
        groups = [(sim.pilot_f[:, k], e_pilot, 1) for k in range(n)]
        snr = np.full(n_data, sim.snr_user)
        return groups, snr, n, e_pilot * n + e_data * n_data, sweep_sector
    if sim.policy.kind == PURE_COMM:
        groups = [(sim.f_user, e_data, n_data)] if n_data else []
        snr = np.full(n_data, sim.snr_user)
        return groups, snr, n_data, e_data * n_data, sweep_sector
    sectors0 = (sweep_sector - 1 + np.arange(n_data)) % n
    counts = np.bincount(sectors0, minlength=n)
    groups = [(sim.cc_f[:, k], e_data, int(c)) for k, c in enumerate(counts) if c]
    snr = sim.cc_snr[sectors0]
    if sim.renormalize:
        energy = e_data * n_data
    else:
        energy = e_data * float(counts @ sim.cc_norm_sq)
    sweep_out = (sweep_sector - 1 + n_data) % n + 1
    return groups, snr, n_data, energy, sweep_out


def compress_observations(
    obs: list[SensingObservation], symbols: np.ndarray, group_ids: np.ndarray
) -> list[SensingObservation]:
    """Collapse per-slot observations with shared precoders into exact
    sufficient statistics for the coherent-integration detector.

    Slots m in group g (same transmit vector up to the unit symbol x_m)
    combine as y~ = sum_m x_m^* y_m / sqrt(M_g) and s~ = sqrt(M_g) * s,
    leaving every grid statistic unchanged.
    """
    out = []
    for g in np.unique(group_ids):
        sel = np.flatnonzero(group_ids == g)
        x = symbols[sel]
        y = np.stack([obs[m].y for m in sel], axis=1) @ np.conj(x) / math.sqrt(len(sel))
        s_ref = obs[sel[0]].s / symbols[sel[0]]
        out.append(SensingObservation(y=y, s=math.sqrt(len(sel)) * s_ref, slot=int(sel[0])))
    return out


def _detect_window(
    sim: _WindowSim, obs: list[SensingObservation]
) -> tuple[tuple[bool, ...], int, bool]:
    """(per-target hits, false detections) plus whether any peak fired."""
    gmap = glrt_map(obs, sim.grid)
    gmap.thresholds = cfar_thresholds(
        gmap.chi,
        sim.params.pfa,
        sim.settings.n_train,
        sim.settings.n_guard,
        valid=gmap.valid,
    )
    report = detect(gmap, sim.grid, obs)
    hits, n_false = match(report, sim.scenario.targets, sim.settings.hit_tol_rad)
    return tuple(hits), n_false, len(report) > 0


def _run_window(
    sim: _WindowSim,
    buffer_in: BufferState,
    sweep_in: int,
    rng: np.random.Generator,
    echoes: list[TargetEcho],
    arrivals: list[PacketArrival] | None = None,
    collect: bool = True,
) -> tuple[WindowResult, BufferState, int]:
    params = sim.params
    if arrivals is None:
        arrivals = generate_arrivals(
            params.lambda_u, params.ts_s, rng, params.symbols_per_packet
        )
    pilots = range(params.n_ant) if sim.policy.kind == TIME_SHARING else ()
    kinds, buffer_out = build_schedule(
        arrivals, buffer_in, params.slots_per_window, pilots, params.bw_hz
    )
    groups, snr, n_obs, energy, sweep_out = _window_groups(sim, kinds, sweep_in)
    k = len(sim.scenario.targets)
    if not collect or n_obs == 0 or not groups:
        res = WindowResult(n_obs, (False,) * k, 0, snr, False, energy)
        return res, buffer_out, sweep_out

    s_cols = np.stack(
        [math.sqrt(e * c) * f for f, e, c in groups], axis=1
    )  # pseudo transmit vectors
    noise = draw_noise(params.n_ant, params.n0_w_hz, rng, count=s_cols.shape[1])
    y1 = target_response(s_cols, echoes) + noise
    obs1 = [
        SensingObservation(y1[:, j], s_cols[:, j], j) for j in range(s_cols.shape[1])
    ]
    hits, n_false, _ = _detect_window(sim, obs1)
    # paired no-target replay: identical transmissions and noise
    obs0 = [
        SensingObservation(noise[:, j], s_cols[:, j], j) for j in range(s_cols.shape[1])
    ]
    _, _, h0_fired = _detect_window(sim, obs0)
    res = WindowResult(n_obs, hits, n_false, snr, h0_fired, energy)
    return res, buffer_out, sweep_out


def run_window(
    scenario: ScenarioGeometry,
    policy: PolicySpec,
    params: SystemParams,
    buffer_in: BufferState,
    sweep_in: int,
    rng: np.random.Generator,
    settings: DetectorSettings | None = None,
    echoes: list[TargetEcho] | None = None,
    arrivals: list[PacketArrival] | None = None,
    renormalize: bool = True,
) -> tuple[WindowResult, BufferState, int]:
    """Simulate one sensing window end to end.

    When echoes is None, each target gets a fresh uniform phase (the
    per-trial draw of monte_carlo). Arrivals may be injected for tests;
    by default they are drawn from the Poisson process.
    """
    settings = settings or DetectorSettings()
    sim = _WindowSim(params, scenario, policy, settings, renormalize)
    if echoes is None:
        echoes = echoes_from_targets(
            scenario.targets, rng.uniform(0.0, 2.0 * np.pi, len(scenario.targets))
        )
    return _run_window(sim, buffer_in, sweep_in, rng, echoes, arrivals)


def _run_trial(
    sim: _WindowSim, seed: int, trial: int, warmup: int
) -> tuple[tuple[bool, ...], bool, int, float, int, float, float]:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))
    params = sim.params
    phases = rng.uniform(0.0, 2.0 * np.pi, len(sim.scenario.targets))
    echoes = echoes_from_targets(sim.scenario.targets, phases)
    buffer = BufferState()
    sweep = 1
    warm_energy = 0.0
    for _ in range(warmup):
        res, buffer, sweep = _run_window(sim, buffer, sweep, rng, echoes, collect=False)
        warm_energy += res.energy_j
    res, buffer, sweep = _run_window(sim, buffer, sweep, rng, echoes)
    return (
        res.hits,
        res.h0_detected,
        res.n_obs,
        float(res.snr_samples.sum()),
        len(res.snr_samples),
        res.energy_j + warm_energy,
        (warmup + 1) * params.ts_s,
    )


def _trial_batch(args):
    sim, seed, trials, warmup = args
    return [_run_trial(sim, seed, t, warmup) for t in trials]


def monte_carlo(
    params: SystemParams,
    scenario: ScenarioGeometry,
    policy: PolicySpec,
    n_trials: int,
    seed: int,
    settings: DetectorSettings | None = None,
    warmup: int = DEFAULT_WARMUP_WINDOWS,
    workers: int = 1,
    renormalize: bool = True,
) -> MonteCarloResult:
    """Estimate (P_D, window false-alarm rate, mean SNR, mean M) over
    independent trials; trial t is seeded by (seed, t) so results do not
    depend on scheduling or worker count."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    sim = _WindowSim(params, scenario, policy, settings or DetectorSettings(), renormalize)
    if workers > 1:
        chunks = np.array_split(np.arange(n_trials), workers * 4)
        jobs = [(sim, seed, [int(t) for t in c], warmup) for c in chunks if len(c)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = [r for batch in pool.map(_trial_batch, jobs) for r in batch]
    else:
        outs = [_run_trial(sim, seed, t, warmup) for t in range(n_trials)]

    k = len(scenario.targets)
    hit_counts = np.zeros(k, dtype=int)
    fa = 0
    m_sum = 0
    snr_sum = 0.0
    snr_n = 0
    energy = 0.0
    sim_time = 0.0
    for hits, h0, m, s_sum, s_n, e_j, t_s in outs:
        hit_counts += np.asarray(hits, dtype=int)
        fa += int(h0)
        m_sum += m
        snr_sum += s_sum
        snr_n += s_n
        energy += e_j
        sim_time += t_s
    mean_snr_db = float(linear_to_db(snr_sum / snr_n)) if snr_n else float("nan")
    return MonteCarloResult(
        p_d_per_target=tuple(hit_counts / n_trials),
        p_fa_window=fa / n_trials,
        mean_snr_db=mean_snr_db,
        mean_m=m_sum / n_trials,
        n_trials=n_trials,
        seed=seed,
        realized_power_w=energy / sim_time,
    )


def audit_power(
    params: SystemParams,
    scenario: ScenarioGeometry,
    policy: PolicySpec,
    n_windows: int,
    seed: int,
    renormalize: bool = True,
) -> float:
    """Realized average transmit power over a long schedule-only run.

    Only the traffic process and energy accounting execute, so horizons
    of 1e5 windows (enough Poisson arrivals to resolve a 2 percent band)
    stay cheap.
    """
    sim = _WindowSim(params, scenario, policy, DetectorSettings(), renormalize)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    buffer = BufferState()
    sweep = 1
    energy = 0.0
    for _ in range(n_windows):
        res, buffer, sweep = _run_window(sim, buffer, sweep, rng, [], collect=False)
        energy += res.energy_j
    return energy / (n_windows * params.ts_s)


def _row_seed(base_seed: int, policy_idx: int, row_idx: int) -> int:
    ss = np.random.SeedSequence(entropy=(base_seed, policy_idx, row_idx))
    return int(ss.generate_state(1, np.uint64)[0])


def _sweep(
    name: str,
    values,
    params_of,
    scenario_of,
    policies: list[PolicySpec],
    n_trials: int,
    base_seed: int,
    settings: DetectorSettings,
    warmup: int,
    workers: int,
    renormalize: bool,
) -> list[SweepResult]:
    results = []
    for pi, policy in enumerate(policies):
        rows = []
        for ri, v in enumerate(values):
            row_seed = _row_seed(base_seed, pi, ri)
            mc = monte_carlo(
                params_of(v),
                scenario_of(v),
                policy,
                n_trials,
                row_seed,
                settings,
                warmup,
                workers,
                renormalize,
            )
            rows.append(
                SweepRow(
                    sweep_name=name,
                    sweep_value=float(v),
                    policy=policy.kind,
                    policy_param=policy.param,
                    p_d=mc.p_d,
                    p_fa_window=mc.p_fa_window,
                    mean_snr_db=mc.mean_snr_db,
                    mean_m=mc.mean_m,
                    n_trials=n_trials,
                    seed=row_seed,
                )
            )
        results.append(
            SweepResult(policy=policy, rows=rows, metadata={"sweep": name, "base_seed": base_seed})
        )
    return results


def sweep_rcs(
    params: SystemParams,
    scenario: ScenarioGeometry,
    policies: list[PolicySpec],
    rcs_grid_dbsm,
    n_trials: int,
    base_seed: int,
    settings: DetectorSettings | None = None,
    warmup: int = DEFAULT_WARMUP_WINDOWS,
    workers: int = 1,
    renormalize: bool = True,
) -> list[SweepResult]:
    """Detection performance against target strength (one row per RCS)."""
    from .core import TargetGeometry, dbsm_to_m2

    def scenario_of(rcs_dbsm):
        targets = tuple(
            TargetGeometry.at(t.theta_rad, t.dist_m, dbsm_to_m2(rcs_dbsm), params.wavelength_m)
            for t in scenario.targets
        )
        return ScenarioGeometry(scenario.user, targets)

    return _sweep(
        "rcs_dbsm",
        rcs_grid_dbsm,
        lambda v: params,
        scenario_of,
        policies,
        n_trials,
        base_seed,
        settings or DetectorSettings(),
        warmup,
        workers,
        renormalize,
    )


def sweep_ts(
    params: SystemParams,
    scenario: ScenarioGeometry,
    policies: list[PolicySpec],
    ts_grid_s,
    n_trials: int,
    base_seed: int,
    settings: DetectorSettings | None = None,
    warmup: int = DEFAULT_WARMUP_WINDOWS,
    workers: int = 1,
    renormalize: bool = True,
) -> list[SweepResult]:
    """Detection performance against the sensing window length."""
    return _sweep(
        "ts_s",
        ts_grid_s,
        lambda v: replace(params, ts_s=float(v)),
        lambda v: scenario,
        policies,
        n_trials,
        base_seed,
        settings or DetectorSettings(),
        warmup,
        workers,
        renormalize,
    )


def tradeoff_curve(
    params: SystemParams,
    scenario: ScenarioGeometry,
    rho_grid,
    beta_grid,
    n_trials: int,
    base_seed: int,
    settings: DetectorSettings | None = None,
    warmup: int = DEFAULT_WARMUP_WINDOWS,
    workers: int = 1,
    renormalize: bool = True,
) -> list[SweepResult]:
    """Sensing/communication frontier: the pure-communication point, the
    concurrent curve over rho and the time-sharing curve over beta."""
    settings = settings or DetectorSettings()
    out = []
    pure = PolicySpec.pure_comm()
    mc = monte_carlo(
        params, scenario, pure, n_trials, _row_seed(base_seed, 0, 0), settings,
        warmup, workers, renormalize,
    )
    out.append(
        SweepResult(
            policy=pure,
            rows=[
                SweepRow("none", 0.0, pure.kind, None, mc.p_d, mc.p_fa_window,
                         mc.mean_snr_db, mc.mean_m, n_trials, mc.seed)
            ],
            metadata={"sweep": "tradeoff", "base_seed": base_seed},
        )
    )
    for pi, (name, grid, mk) in enumerate(
        [
            ("rho", rho_grid, PolicySpec.concurrent),
            ("beta", beta_grid, PolicySpec.time_sharing),
        ],
        start=1,
    ):
        rows = []
        for ri, v in enumerate(grid):
            policy = mk(float(v))
            row_seed = _row_seed(base_seed, pi, ri)
            mc = monte_carlo(
                params, scenario, policy, n_trials, row_seed, settings,
                warmup, workers, renormalize,
            )
            rows.append(
                SweepRow(name, float(v), policy.kind, policy.param, mc.p_d,
                         mc.p_fa_window, mc.mean_snr_db, mc.mean_m, n_trials, row_seed)
            )
        out.append(
            SweepResult(
                policy=mk(float(grid[0])),
                rows=rows,
                metadata={"sweep": "tradeoff", "base_seed": base_seed},
            )
        )
    return out


def default_workers() -> int:
    """Worker count override from the environment (ISACSIM_WORKERS)."""
    try:
        return max(1, int(os.environ.get("ISACSIM_WORKERS", "1")))
    except ValueError:
        return 1
