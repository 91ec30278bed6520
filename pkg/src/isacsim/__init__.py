"""Link-level Monte Carlo simulator of a monostatic sensing-and-
communication base station under bursty Poisson traffic."""

__version__ = "0.1.0"

from .channel import ScenarioGeometry, SensingObservation, TargetEcho, comm_snr, sense
from .config import ConfigError, RunConfig, load_config, serialize
from .core import (
    SystemParams,
    TargetGeometry,
    UserGeometry,
    codebook_angle,
    comm_gain,
    radar_gain,
    steering_vector,
)
from .detector import (
    AngleGrid,
    DetectionReport,
    DetectorSettings,
    GlrtMap,
    cfar_thresholds,
    detect,
    estimate_gain,
    glrt_map,
    match,
)
from .engine import (
    MonteCarloResult,
    SweepResult,
    WindowResult,
    audit_power,
    monte_carlo,
    run_window,
    sweep_rcs,
    sweep_ts,
    tradeoff_curve,
)
from .policy import EnergyBudget, FeasibilityError, PolicySpec, energy_budget
from .traffic import BufferState, PacketArrival, build_schedule, generate_arrivals

__all__ = [
    "__version__",
    "AngleGrid",
    "BufferState",
    "ConfigError",
    "DetectionReport",
    "DetectorSettings",
    "EnergyBudget",
    "FeasibilityError",
    "GlrtMap",
    "MonteCarloResult",
    "PacketArrival",
    "PolicySpec",
    "RunConfig",
    "ScenarioGeometry",
    "SensingObservation",
    "SweepResult",
    "SystemParams",
    "TargetEcho",
    "TargetGeometry",
    "UserGeometry",
    "WindowResult",
    "audit_power",
    "build_schedule",
    "cfar_thresholds",
    "codebook_angle",
    "comm_gain",
    "comm_snr",
    "detect",
    "energy_budget",
    "estimate_gain",
    "generate_arrivals",
    "glrt_map",
    "load_config",
    "match",
    "monte_carlo",
    "radar_gain",
    "run_window",
    "sense",
    "serialize",
    "steering_vector",
    "sweep_rcs",
    "sweep_ts",
    "tradeoff_curve",
]
