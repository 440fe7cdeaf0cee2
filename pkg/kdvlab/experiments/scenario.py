"""
Stability Scenario
Runs the coupled perturbation flow over segments [n delta, (n+1) delta] and
audits the geometric decay ||w(n delta)||_{H1} < kappa^n eps
"""

from enum import Enum
from pathlib import Path
from typing import Any, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field as PydanticField, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from kdvlab.core.config import settings
from kdvlab.core.errors import ConfigError, ConstraintDriftError, FitError, KdVLabError
from kdvlab.core.logging import run_log
from kdvlab.dynamics.evolution import EvolutionConfig, PerturbationState
from kdvlab.dynamics.integrators import Scheme
from kdvlab.dynamics.modulation import ModulationState, constraint_drift, project_initial
from kdvlab.dynamics.perturbation import CoupledStepper
from kdvlab.experiments.fitting import TRANSIENT_FRACTION, DecayFit, fit_decay_rate
from kdvlab.experiments.io import TRAJECTORY_COLUMNS, read_trajectory, write_csv, write_json
from kdvlab.spectral.grid import Field, Grid1D, h1_norm, l2_norm, make_grid
from kdvlab.spectral.soliton import lyapunov_functional, profile_values

TRAJECTORY_FILE = "trajectory.csv"
AUDIT_FILE = "audit.json"


class PerturbationShape(str, Enum):
    GAUSSIAN = "gaussian"
    ODD_GAUSSIAN = "odd-gaussian"
    SECH = "sech"
    RANDOM = "random"


class ScenarioConfig(BaseSettings):
    """
    One stability run

    Read from keyword arguments (command-line flags) and an optional flat
    key=value file passed as `_env_file`; flags win. The process environment
    is not consulted.
    """

    model_config = SettingsConfigDict(extra="forbid", case_sensitive=False, env_file=None)

    c0: float = PydanticField(default=1.0, gt=0.0)
    a: float = PydanticField(default=0.3, ge=0.0)
    epsilon: float = PydanticField(default=1e-3, ge=0.0)
    shape: PerturbationShape = PerturbationShape.GAUSSIAN
    shape_center: float = 0.0
    half_length: float = PydanticField(default_factory=lambda: settings.DEFAULT_HALF_LENGTH, gt=0.0)
    n_points: int = PydanticField(default_factory=lambda: settings.DEFAULT_POINTS)
    dt: float = PydanticField(default_factory=lambda: settings.DEFAULT_DT, gt=0.0)
    t_final: float = PydanticField(default=40.0, gt=0.0)
    delta: float = PydanticField(default=1.0, gt=0.0)
    sample_stride: int = PydanticField(default=100, ge=1)
    scheme: Scheme = Scheme.ETDRK4
    max_reprojections: int = PydanticField(default_factory=lambda: settings.MAX_REPROJECTIONS, ge=0)
    output: Path = PydanticField(default_factory=lambda: Path(settings.OUTPUT_DIR) / "scenario")
    seed: int = 0

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return init_settings, dotenv_settings

    @model_validator(mode="after")
    def check_scenario(self):
        if self.a >= np.sqrt(self.c0 / 3.0):
            raise ValueError(f"weight a={self.a} must stay below sqrt(c0/3)={np.sqrt(self.c0 / 3.0):.4f}")
        if self.epsilon >= settings.SMALLNESS_CAP:
            raise ValueError(f"epsilon={self.epsilon} is not below the smallness cap {settings.SMALLNESS_CAP}")
        if self.n_points < 16 or self.n_points & (self.n_points - 1):
            raise ValueError(f"n_points must be a power of two >= 16, got {self.n_points}")
        if abs(self.segment_steps * self.dt - self.delta) > 1e-9 * self.delta:
            raise ValueError(f"delta={self.delta} is not a whole number of steps dt={self.dt}")
        if abs(self.n_segments * self.delta - self.t_final) > 1e-9 * self.t_final or self.n_segments < 1:
            raise ValueError(f"t_final={self.t_final} is not a whole number of segments delta={self.delta}")
        if self.segment_steps % self.sample_stride:
            raise ValueError(f"sample_stride={self.sample_stride} must divide the {self.segment_steps} steps per segment")
        return self

    @property
    def segment_steps(self) -> int:
        return max(int(round(self.delta / self.dt)), 1)

    @property
    def n_segments(self) -> int:
        return int(round(self.t_final / self.delta))

    @property
    def reference_gap(self) -> float:
        """a (c0 - a^2), the distance of the continuous spectrum from the axis"""
        return self.a * (self.c0 - self.a**2)


def load_scenario_config(path: Optional[Path] = None, **overrides: Any) -> ScenarioConfig:
    """
    Scenario config from an optional key=value file plus overrides

    Raises:
        ConfigError: the file does not exist
        pydantic.ValidationError: unknown keys or invalid values
    """
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if path is None:
        return ScenarioConfig(**overrides)
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    return ScenarioConfig(_env_file=path, **overrides)


# --- audit records --------------------------------------------------------------

class AuditRow(BaseModel):
    """State at t = n delta; cdot/gammadot are sups over the segment ending there"""

    n: int
    t: float
    n_value: float
    h1_w: float
    l2_w: float
    h1_v: float
    c: float
    cdot: float
    gammadot: float
    speed_offset: float
    speed_variation: float
    lyapunov_drift: float
    quintet: float
    w_bound_ok: Optional[bool] = None
    c_bound_ok: Optional[bool] = None


class AuditEvent(BaseModel):
    t: float
    kind: str
    detail: str


class IterationAudit(BaseModel):
    """Audit JSON: config echo, per-segment table, fits, events and the run status"""

    config: dict
    status: str = "ok"
    failure: Optional[str] = None
    c0_measured: Optional[float] = None
    epsilon_measured: Optional[float] = None
    reference_gap: float
    table: list[AuditRow] = []
    kappa: Optional[float] = None
    rate: Optional[float] = None
    b_fit: Optional[float] = None
    r2: Optional[float] = None
    fit_flag: Optional[str] = None
    cdot_rate: Optional[float] = None
    gammadot_rate: Optional[float] = None
    speed_tail_change: Optional[float] = None
    max_h1_v: Optional[float] = None
    max_constraint_drift: float = 0.0
    increment_decrease_fraction: Optional[float] = None
    reprojections: int = 0
    events: list[AuditEvent] = []

    @property
    def ok(self) -> bool:
        return self.status == "ok"


# --- initial data -----------------------------------------------------------------

def perturbation_shape(cfg: ScenarioConfig, grid: Grid1D) -> Field:
    """Shape sampled on the grid and scaled to unit H1 norm"""
    x = grid.points - cfg.shape_center
    if cfg.shape == PerturbationShape.GAUSSIAN:
        values = np.exp(-x**2)
    elif cfg.shape == PerturbationShape.ODD_GAUSSIAN:
        values = x * np.exp(-x**2)
    elif cfg.shape == PerturbationShape.SECH:
        values = 1.0 / np.cosh(x)
    else:
        rng = np.random.default_rng(cfg.seed)
        k = 0.5 * np.arange(1, 7)
        a, b = rng.standard_normal((2, k.size))
        values = np.exp(-(x / 3.0) ** 2) * (np.cos(np.outer(x, k)) @ a + np.sin(np.outer(x, k)) @ b)
    shape = Field(grid, values)
    return shape / h1_norm(shape)


def initial_data(cfg: ScenarioConfig, grid: Grid1D) -> Field:
    """u0 = psi_c0 + eps * shape in the lab frame"""
    soliton = Field(grid, profile_values("psi", cfg.c0, grid.points))
    if cfg.epsilon == 0.0:
        return soliton
    return soliton + cfg.epsilon * perturbation_shape(cfg, grid)


def _initial_state(cfg: ScenarioConfig, grid: Grid1D) -> PerturbationState:
    if cfg.epsilon == 0.0:
        zero = Field.zeros(grid)
        mod = ModulationState(c=cfg.c0, c0=cfg.c0, a=cfg.a)
        return PerturbationState(v=zero, w=zero, mod=mod, t=0.0)
    mod, v0, w0 = project_initial(initial_data(cfg, grid), cfg.c0, cfg.a)
    return PerturbationState(v=v0, w=w0, mod=mod, t=0.0)


# --- the run --------------------------------------------------------------------

class _Recorder:
    """Collects trajectory rows, audit rows and events while the run advances"""

    def __init__(self, c0: float, energy0: float):
        self.c0 = c0
        self.energy0 = energy0
        self.rows: list[tuple] = []
        self.table: list[AuditRow] = []
        self.events: list[AuditEvent] = []
        self.max_h1_v = 0.0
        self.seg_cdot = 0.0
        self.seg_gammadot = 0.0

    def track_rates(self, state: PerturbationState):
        self.seg_cdot = max(self.seg_cdot, abs(state.mod.cdot))
        self.seg_gammadot = max(self.seg_gammadot, abs(state.mod.gammadot))

    def sample(self, state: PerturbationState, event: str = "") -> tuple[float, float, float, float]:
        norms = (l2_norm(state.v), h1_norm(state.v), l2_norm(state.w), h1_norm(state.w))
        mod = state.mod
        self.rows.append((float(state.t), *norms, mod.c, mod.gamma, mod.cdot, mod.gammadot, event))
        self.max_h1_v = max(self.max_h1_v, norms[1])
        return norms

    def audit(self, n: int, state: PerturbationState, norms: tuple[float, float, float, float]):
        _, h1_v, l2_w, h1_w = norms
        mod = state.mod
        if n == 0:
            self.track_rates(state)
        soliton = Field(state.grid, profile_values("psi", mod.c, state.grid.points))
        drift = lyapunov_functional(soliton + state.v, self.c0) - self.energy0
        offset = abs(mod.c - self.c0)
        row = AuditRow(
            n=n,
            t=float(state.t),
            n_value=h1_w**2,
            h1_w=h1_w,
            l2_w=l2_w,
            h1_v=h1_v,
            c=mod.c,
            cdot=self.seg_cdot,
            gammadot=self.seg_gammadot,
            speed_offset=offset,
            speed_variation=mod.speed_variation,
            lyapunov_drift=float(drift),
            quintet=h1_w + h1_v + self.seg_cdot + self.seg_gammadot + offset,
        )
        self.table.append(row)
        self.seg_cdot = self.seg_gammadot = 0.0
        logger.info(
            f"Segment {n}: t={state.t:.3f}, |w|_H1={h1_w:.4e}, |v|_H1={h1_v:.4e}, "
            f"|c-c0|={offset:.3e}, |cdot|={row.cdot:.3e}"
        )

    def event(self, t: float, kind: str, detail: str):
        self.events.append(AuditEvent(t=float(t), kind=kind, detail=detail))


def _safe_fit(times, values, delta: float) -> tuple[Optional[DecayFit], Optional[str]]:
    try:
        return fit_decay_rate(times, values, delta), None
    except FitError as e:
        return None, str(e)


def summarize(audit: IterationAudit, delta: float) -> IterationAudit:
    """Fill fits and bound checks from the table"""
    table = audit.table
    if not table:
        return audit
    times = [row.t for row in table]
    fit, flag = _safe_fit(times, [row.h1_w for row in table], delta)
    update: dict[str, Any] = {"fit_flag": flag}
    if fit is not None:
        update.update(kappa=fit.kappa_per_delta, rate=fit.rate, b_fit=fit.decay_rate, r2=fit.r2)

    later = table[1:]
    cdot_fit, _ = _safe_fit([row.t for row in later], [row.cdot for row in later], delta)
    gammadot_fit, _ = _safe_fit([row.t for row in later], [row.gammadot for row in later], delta)
    update["cdot_rate"] = None if cdot_fit is None else cdot_fit.decay_rate
    update["gammadot_rate"] = None if gammadot_fit is None else gammadot_fit.decay_rate

    update["speed_tail_change"] = _speed_tail_change(table)

    skip = max(1, int(np.floor(TRANSIENT_FRACTION * len(table))))
    increments = [table[i].n_value - table[i - 1].n_value for i in range(skip, len(table))]
    if increments:
        update["increment_decrease_fraction"] = float(np.mean([inc < 0.0 for inc in increments]))

    eps = audit.epsilon_measured
    kappa = update.get("kappa")
    if kappa is not None and eps:
        rows = []
        for row in table:
            w_ok = row.h1_w <= kappa**row.n * eps * (1.0 + 1e-12)
            c_ok = None if row.n == 0 else row.speed_offset < (2.0 - kappa ** (row.n - 1)) * eps
            rows.append(row.model_copy(update={"w_bound_ok": w_ok, "c_bound_ok": c_ok}))
        update["table"] = rows
    return audit.model_copy(update=update)


def _speed_tail_change(table: list[AuditRow]) -> Optional[float]:
    """|c(T) - c(T/2)|"""
    n_last = table[-1].n
    if n_last < 2:
        return None
    half = next((row for row in table if row.n == n_last // 2), None)
    return None if half is None else abs(table[-1].c - half.c)


def _flush(cfg: ScenarioConfig, recorder: Optional[_Recorder], audit: IterationAudit) -> IterationAudit:
    output = Path(cfg.output)
    rows = recorder.rows if recorder is not None else []
    write_csv(output / TRAJECTORY_FILE, TRAJECTORY_COLUMNS, rows)
    write_json(output / AUDIT_FILE, audit)
    return audit


def run_stability_scenario(cfg: ScenarioConfig) -> IterationAudit:
    """
    Project u0 = psi_c0 + eps * shape onto the soliton manifold and evolve the
    coupled (v, w, c, gamma) system to t_final

    Constraint drift triggers a re-projection (logged as an event) and the step
    is retried; more than max_reprojections of them fail the run. A failed run
    still writes the partial trajectory and an audit with status "failed".
    The run's log is kept in <output>/run.log.

    Returns:
        IterationAudit (also written to <output>/audit.json next to trajectory.csv)
    """
    with run_log(Path(cfg.output)):
        return _run_scenario(cfg)


def _run_scenario(cfg: ScenarioConfig) -> IterationAudit:
    logger.info(
        f"Stability scenario: c0={cfg.c0}, a={cfg.a}, eps={cfg.epsilon}, shape={cfg.shape.value}, "
        f"N={cfg.n_points}, dt={cfg.dt}, T={cfg.t_final}, delta={cfg.delta}"
    )
    audit = IterationAudit(config=cfg.model_dump(mode="json"), reference_gap=cfg.reference_gap)
    recorder: Optional[_Recorder] = None
    state: Optional[PerturbationState] = None
    max_drift = 0.0
    reprojections = 0

    try:
        grid = make_grid(cfg.half_length, cfg.n_points)
        state = _initial_state(cfg, grid)
        evo = EvolutionConfig(
            dt=cfg.dt, scheme=cfg.scheme, dealias_on=True, c0=state.mod.c0, a=cfg.a
        )
        stepper = CoupledStepper(evo)
        state = stepper.with_rates(state)

        soliton0 = Field(grid, profile_values("psi", state.mod.c, grid.points))
        recorder = _Recorder(state.mod.c0, lyapunov_functional(soliton0 + state.v, state.mod.c0))
        norms = recorder.sample(state)
        recorder.audit(0, state, norms)
        audit = audit.model_copy(update={
            "c0_measured": state.mod.c0,
            "epsilon_measured": norms[1] + norms[3],
        })

        for n in range(1, cfg.n_segments + 1):
            for k in range(1, cfg.segment_steps + 1):
                while True:
                    try:
                        state = stepper.step(state)
                        break
                    except ConstraintDriftError as e:
                        reprojections += 1
                        if reprojections > cfg.max_reprojections:
                            raise
                        logger.warning(f"{e}; re-projecting at t={state.t:.4f}")
                        state = stepper.reproject(state)
                        recorder.event(state.t, "reproject", f"c={state.mod.c!r}, gamma={state.mod.gamma!r}")
                        recorder.sample(state, event="reproject")
                recorder.track_rates(state)
                max_drift = max(max_drift, constraint_drift(state.w, stepper.package))
                if k % cfg.sample_stride == 0:
                    norms = recorder.sample(state)
            recorder.audit(n, state, norms)

    except KdVLabError as e:
        logger.error(f"Stability scenario failed: {e}")
        t_fail = 0.0 if state is None else state.t
        if recorder is not None:
            recorder.event(t_fail, "failure", str(e))
        audit = audit.model_copy(update={"status": "failed", "failure": f"{type(e).__name__}: {e}"})

    if recorder is not None:
        audit = audit.model_copy(update={
            "table": recorder.table,
            "events": recorder.events,
            "max_h1_v": recorder.max_h1_v,
        })
    audit = audit.model_copy(update={"max_constraint_drift": max_drift, "reprojections": reprojections})
    audit = summarize(audit, cfg.delta)
    logger.info(
        f"Scenario {audit.status}: kappa={audit.kappa}, b_fit={audit.b_fit}, "
        f"reference gap={cfg.reference_gap:.4f}, re-projections={reprojections}"
    )
    return _flush(cfg, recorder, audit)


# --- re-fit from a trajectory file -------------------------------------------------

class TrajectoryAudit(BaseModel):
    """Segment values recomputed from a trajectory CSV"""

    delta: float
    times: list[float]
    n_values: list[float]
    fit: Optional[DecayFit] = None
    fit_flag: Optional[str] = None


def audit_trajectory(path: Path, delta: float) -> TrajectoryAudit:
    """
    N(n) = ||w(n delta)||_H1^2 read back from the sample rows at t = n delta

    Re-projection rows are skipped; the first plain sample at each segment
    boundary is the one the run audited.

    Raises:
        FileNotFoundError: no trajectory at path
        ValueError: the file is not a trajectory or delta is not positive
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    rows = [row for row in read_trajectory(path) if not row["event"]]
    if not rows:
        return TrajectoryAudit(delta=delta, times=[], n_values=[], fit_flag="empty trajectory")

    step = min((b["t"] - a["t"] for a, b in zip(rows, rows[1:]) if b["t"] > a["t"]), default=delta)
    times, n_values, h1_w = [], [], []
    seen = set()
    for row in rows:
        n = int(round(row["t"] / delta))
        if n in seen or abs(row["t"] - n * delta) > 0.5 * min(step, delta):
            continue
        seen.add(n)
        times.append(row["t"])
        h1_w.append(row["h1_w"])
        n_values.append(row["h1_w"] ** 2)

    fit, flag = _safe_fit(times, h1_w, delta)
    logger.info(f"Audit of {path}: {len(times)} segments, kappa={None if fit is None else fit.kappa_per_delta}")
    return TrajectoryAudit(delta=delta, times=times, n_values=n_values, fit=fit, fit_flag=flag)
