"""Run configuration: YAML schema, presentation-unit conversion and
validation against every module precondition before any simulation runs.

Config files use the units people quote (GHz, dBm, dBm/Hz, degrees, ms,
dBsm); everything is converted to SI on load. An empty file yields the
built-in defaults with the low angular-separation scenario preset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import yaml

from .channel import ScenarioGeometry
from .core import (
    SystemParams,
    TargetGeometry,
    UserGeometry,
    dbm_to_watt,
    dbsm_to_m2,
    watt_to_dbm,
)
from .detector import DetectorSettings
from .policy import PolicySpec, time_sharing_min_window

# Scenario presets: angular separation between target and served user.
SCENARIO_PRESETS = {
    "low": 43.0,  # same sector as the 40 deg user
    "mid": -25.0,  # detectable through sidelobes
    "high": -58.0,  # outside the user beam entirely
}

DEFAULT_RCS_GRID_DBSM = tuple(-30.0 + 2.5 * i for i in range(17))
DEFAULT_TS_GRID_MS = (0.2, 0.3, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
DEFAULT_RHO_GRID = tuple(round(0.1 * i, 1) for i in range(11))
# beta = 0 carries no pilot energy (sensing-dead); the default trade-off
# grid starts at 1 inside the documented [0, 200] range.
DEFAULT_BETA_GRID = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0)


class ConfigError(ValueError):
    """Configuration rejected; the message carries the field path."""


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    scenario: ScenarioGeometry
    policies: tuple[PolicySpec, ...]
    detector: DetectorSettings
    rcs_grid_dbsm: tuple[float, ...] = DEFAULT_RCS_GRID_DBSM
    ts_grid_ms: tuple[float, ...] = DEFAULT_TS_GRID_MS
    rho_grid: tuple[float, ...] = DEFAULT_RHO_GRID
    beta_grid: tuple[float, ...] = DEFAULT_BETA_GRID
    n_trials: int = 2000
    seed: int = 20240817
    warmup_windows: int = 5
    out_dir: str = "results"
    concurrent_norm: str = "renormalize"  # or "raw"


def _get(mapping: dict, path: str, key: str, default, kind):
    value = mapping.get(key, default)
    if value is None:
        return None
    try:
        if kind is int and isinstance(value, float) and not value.is_integer():
            raise ValueError
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}, got {value!r}")


def _require_positive(path: str, key: str, value: float):
    if value <= 0:
        raise ConfigError(f"{path}.{key}: must be positive, got {value!r}")


def _build_params(raw: dict) -> SystemParams:
    sec = raw.get("system") or {}
    if not isinstance(sec, dict):
        raise ConfigError("system: expected a mapping")
    path = "system"
    fc_ghz = _get(sec, path, "carrier_ghz", 5.0, float)
    pt_dbm = _get(sec, path, "tx_power_dbm", 20.0, float)
    n_ant = _get(sec, path, "n_antennas", 16, int)
    bw_mhz = _get(sec, path, "bandwidth_mhz", 10.0, float)
    n0_dbm = _get(sec, path, "noise_psd_dbm_hz", -174.0, float)
    bits = _get(sec, path, "packet_bits", 1000, int)
    per_symbol = _get(sec, path, "arrival_per_symbol", None, float)
    per_second = _get(sec, path, "arrival_rate_hz", None, float)
    mod_order = _get(sec, path, "mod_order", 2, int)
    theta_max = _get(sec, path, "theta_max_deg", 70.0, float)
    ts_ms = _get(sec, path, "sensing_window_ms", 0.3, float)
    pfa = _get(sec, path, "pfa", 1e-2, float)

    for key, val in (("carrier_ghz", fc_ghz), ("bandwidth_mhz", bw_mhz), ("sensing_window_ms", ts_ms)):
        _require_positive(path, key, val)
    if per_symbol is not None and per_second is not None:
        raise ConfigError(
            "system: give either arrival_per_symbol or arrival_rate_hz, not both"
        )
    bw_hz = bw_mhz * 1e6
    if per_second is not None:
        lambda_u = per_second
    else:
        lambda_u = (1e-4 if per_symbol is None else per_symbol) * bw_hz
    try:
        return SystemParams(
            fc_hz=fc_ghz * 1e9,
            pt_w=dbm_to_watt(pt_dbm),
            n_ant=n_ant,
            bw_hz=bw_hz,
            n0_w_hz=dbm_to_watt(n0_dbm),
            packet_bits=bits,
            lambda_u=lambda_u,
            mod_order=mod_order,
            theta_max_rad=math.radians(theta_max),
            ts_s=ts_ms * 1e-3,
            pfa=pfa,
        )
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc


def _build_scenario(raw: dict, params: SystemParams) -> ScenarioGeometry:
    sec = raw.get("scenario") or {}
    if not isinstance(sec, dict):
        raise ConfigError("scenario: expected a mapping")
    preset = sec.get("preset", "low")
    if preset not in SCENARIO_PRESETS:
        raise ConfigError(
            f"scenario.preset: unknown preset {preset!r}; choose from {sorted(SCENARIO_PRESETS)}"
        )
    user_sec = sec.get("user") or {}
    theta_u = _get(user_sec, "scenario.user", "angle_deg", 40.0, float)
    d_u = _get(user_sec, "scenario.user", "distance_m", 500.0, float)
    _require_positive("scenario.user", "distance_m", d_u)
    user = UserGeometry.at(math.radians(theta_u), d_u, params.wavelength_m)

    targets_sec = sec.get("targets")
    if targets_sec is None:
        targets_sec = [
            {"angle_deg": SCENARIO_PRESETS[preset], "distance_m": 80.0, "rcs_dbsm": 5.0}
        ]
    if not isinstance(targets_sec, list):
        raise ConfigError("scenario.targets: expected a list")
    targets = []
    for i, tsec in enumerate(targets_sec):
        path = f"scenario.targets[{i}]"
        if not isinstance(tsec, dict):
            raise ConfigError(f"{path}: expected a mapping")
        theta = _get(tsec, path, "angle_deg", None, float)
        dist = _get(tsec, path, "distance_m", 80.0, float)
        rcs = _get(tsec, path, "rcs_dbsm", 5.0, float)
        if theta is None:
            raise ConfigError(f"{path}.angle_deg: required")
        _require_positive(path, "distance_m", dist)
        targets.append(
            TargetGeometry.at(math.radians(theta), dist, dbsm_to_m2(rcs), params.wavelength_m)
        )
    try:
        return ScenarioGeometry(user=user, targets=tuple(targets))
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from exc


def _build_policies(raw: dict) -> tuple[PolicySpec, ...]:
    sec = raw.get("policies")
    if sec is None:
        return (
            PolicySpec.pure_comm(),
            PolicySpec.concurrent(0.5),
            PolicySpec.time_sharing(1.0),
        )
    if not isinstance(sec, list) or not sec:
        raise ConfigError("policies: expected a non-empty list")
    out = []
    for i, psec in enumerate(sec):
        path = f"policies[{i}]"
        if not isinstance(psec, dict) or "kind" not in psec:
            raise ConfigError(f"{path}: expected a mapping with a 'kind' field")
        kind = psec["kind"]
        try:
            out.append(
                PolicySpec(
                    kind=kind,
                    beta=_get(psec, path, "beta", 0.0, float),
                    rho=_get(psec, path, "rho", 0.0, float),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return tuple(out)


def _build_detector(raw: dict, params: SystemParams) -> DetectorSettings:
    sec = raw.get("detector") or {}
    if not isinstance(sec, dict):
        raise ConfigError("detector: expected a mapping")
    path = "detector"
    step = _get(sec, path, "grid_step_deg", 0.5, float)
    n_train = _get(sec, path, "n_train", 16, int)
    n_guard = _get(sec, path, "n_guard", 10, int)
    tol = _get(sec, path, "hit_tol_deg", 4.0, float)
    try:
        settings = DetectorSettings(
            grid_step_rad=math.radians(step),
            n_train=n_train,
            n_guard=n_guard,
            hit_tol_rad=math.radians(tol),
        )
    except ValueError as exc:
        raise ConfigError(f"detector: {exc}") from exc
    n_cells = int(round(2 * math.degrees(params.theta_max_rad) / step)) + 1
    min_cells = n_train + 2 * n_guard + 1
    if n_cells <= min_cells:
        raise ConfigError(
            f"detector.grid_step_deg: {n_cells} grid cells over the sweep range, "
            f"need more than n_train + 2*n_guard + 1 = {min_cells}"
        )
    return settings


def _float_tuple(raw: dict, key: str, default: tuple[float, ...]) -> tuple[float, ...]:
    sec = raw.get("sweeps") or {}
    if not isinstance(sec, dict):
        raise ConfigError("sweeps: expected a mapping")
    value = sec.get(key)
    if value is None:
        return default
    if isinstance(value, dict):
        try:
            start, stop, step = float(value["start"]), float(value["stop"]), float(value["step"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"sweeps.{key}: range form needs numeric start/stop/step")
        if step <= 0 or stop < start:
            raise ConfigError(f"sweeps.{key}: need step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + step * i for i in range(n))
    if not isinstance(value, list) or not value:
        raise ConfigError(f"sweeps.{key}: expected a list or start/stop/step mapping")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"sweeps.{key}: entries must be numeric")


def _cross_validate(cfg: RunConfig):
    uses_ts = any(p.kind == "time_sharing" for p in cfg.policies)
    if uses_ts:
        t_min = time_sharing_min_window(cfg.params)
        if cfg.params.ts_s <= t_min:
            raise ConfigError(
                "system.sensing_window_ms: time sharing infeasible, "
                f"T_s = {cfg.params.ts_s:g} s must exceed (B/log2(Q) + N)/W = {t_min:g} s"
            )
        for v in cfg.ts_grid_ms:
            if v * 1e-3 <= t_min:
                raise ConfigError(
                    f"sweeps.ts_ms: grid point {v} ms infeasible for time sharing, "
                    f"bound is {t_min * 1e3:g} ms"
                )
    for v in cfg.rho_grid:
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"sweeps.rho: {v} outside [0, 1]")
    for v in cfg.beta_grid:
        if v < 0:
            raise ConfigError(f"sweeps.beta: {v} must be >= 0")
    if cfg.n_trials < 1:
        raise ConfigError("run.trials: must be >= 1")
    if cfg.warmup_windows < 0:
        raise ConfigError("run.warmup_windows: must be >= 0")
    if cfg.concurrent_norm not in ("renormalize", "raw"):
        raise ConfigError("run.concurrent_norm: must be 'renormalize' or 'raw'")


def config_from_dict(raw: dict) -> RunConfig:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a mapping")
    params = _build_params(raw)
    run_sec = raw.get("run") or {}
    if not isinstance(run_sec, dict):
        raise ConfigError("run: expected a mapping")
    cfg = RunConfig(
        params=params,
        scenario=_build_scenario(raw, params),
        policies=_build_policies(raw),
        detector=_build_detector(raw, params),
        rcs_grid_dbsm=_float_tuple(raw, "rcs_dbsm", DEFAULT_RCS_GRID_DBSM),
        ts_grid_ms=_float_tuple(raw, "ts_ms", DEFAULT_TS_GRID_MS),
        rho_grid=_float_tuple(raw, "rho", DEFAULT_RHO_GRID),
        beta_grid=_float_tuple(raw, "beta", DEFAULT_BETA_GRID),
        n_trials=_get(run_sec, "run", "trials", 2000, int),
        seed=_get(run_sec, "run", "seed", 20240817, int),
        warmup_windows=_get(run_sec, "run", "warmup_windows", 5, int),
        out_dir=str(run_sec.get("out_dir", "results")),
        concurrent_norm=str(run_sec.get("concurrent_norm", "renormalize")),
    )
    _cross_validate(cfg)
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file does not parse: {exc}")
    return config_from_dict(raw)


def config_to_dict(cfg: RunConfig) -> dict:
    """Presentation-unit dictionary; config_from_dict round-trips it."""
    p = cfg.params
    return {
        "system": {
            "carrier_ghz": p.fc_hz / 1e9,
            "tx_power_dbm": watt_to_dbm(p.pt_w),
            "n_antennas": p.n_ant,
            "bandwidth_mhz": p.bw_hz / 1e6,
            "noise_psd_dbm_hz": watt_to_dbm(p.n0_w_hz),
            "packet_bits": p.packet_bits,
            "arrival_rate_hz": p.lambda_u,
            "mod_order": p.mod_order,
            "theta_max_deg": math.degrees(p.theta_max_rad),
            "sensing_window_ms": p.ts_s * 1e3,
            "pfa": p.pfa,
        },
        "scenario": {
            "user": {
                "angle_deg": math.degrees(cfg.scenario.user.theta_rad),
                "distance_m": cfg.scenario.user.dist_m,
            },
            "targets": [
                {
                    "angle_deg": math.degrees(t.theta_rad),
                    "distance_m": t.dist_m,
                    "rcs_dbsm": 10.0 * math.log10(t.rcs_m2),
                }
                for t in cfg.scenario.targets
            ],
        },
        "policies": [
            {"kind": pol.kind, "beta": pol.beta, "rho": pol.rho} for pol in cfg.policies
        ],
        "detector": {
            "grid_step_deg": math.degrees(cfg.detector.grid_step_rad),
            "n_train": cfg.detector.n_train,
            "n_guard": cfg.detector.n_guard,
            "hit_tol_deg": math.degrees(cfg.detector.hit_tol_rad),
        },
        "sweeps": {
            "rcs_dbsm": list(cfg.rcs_grid_dbsm),
            "ts_ms": list(cfg.ts_grid_ms),
            "rho": list(cfg.rho_grid),
            "beta": list(cfg.beta_grid),
        },
        "run": {
            "trials": cfg.n_trials,
            "seed": cfg.seed,
            "warmup_windows": cfg.warmup_windows,
            "out_dir": cfg.out_dir,
            "concurrent_norm": cfg.concurrent_norm,
        },
    }


def serialize(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=True)
