"""
Norm Probes
Seeded ensembles of band-limited space-time fields pushed through the estimate
probes; each report carries the largest and mean measured ratio
"""

from enum import Enum
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field as PydanticField

from kdvlab.core.config import settings
from kdvlab.core.errors import ZeroNormError
from kdvlab.experiments.io import write_json
from kdvlab.norms.estimates import (
    EstimateKind,
    bilinear_ratio,
    embedding_constant,
    embedding_ratio,
    linear_estimate_ratio,
    projection_ratio,
    resonance_defect,
    shell_parseval_defect,
)
from kdvlab.norms.spacetime import SpaceTimeField, probe_window, random_bandlimited, xsb1_norm, xsb_norm
from kdvlab.spectral.grid import Field, Grid1D, make_grid
from kdvlab.spectral.linearized_operator import WeightParams
from kdvlab.spectral.package_manager import PackageManager

PROBES_FILE = "norm_probes.json"


class ProbeKind(str, Enum):
    SHELL_PARSEVAL = "shell-parseval"
    RESONANCE = "resonance"
    EMBEDDING = "embedding"
    XSB_EMBEDDING = "xsb-embedding"
    BILINEAR = "bilinear"
    AIRY_HOM = "airy-hom"
    AIRY_INHOM = "airy-inhom"
    DISS_HOM = "diss-hom"
    DISS_INHOM = "diss-inhom"
    PROJECTION = "projection"


DEFAULT_ENSEMBLES = {
    ProbeKind.SHELL_PARSEVAL: 1000,
    ProbeKind.RESONANCE: 10000,
    ProbeKind.EMBEDDING: 200,
    ProbeKind.XSB_EMBEDDING: 100,
    ProbeKind.BILINEAR: 100,
    ProbeKind.AIRY_HOM: 20,
    ProbeKind.AIRY_INHOM: 20,
    ProbeKind.DISS_HOM: 20,
    ProbeKind.DISS_INHOM: 20,
    ProbeKind.PROJECTION: 20,
}

# relative defect accepted for the exact identities
IDENTITY_TOLERANCE = 1e-10


class NormProbeConfig(BaseModel):
    """
    Probe ensemble settings

    The default lattice has dxi = 1/4 and dtau = pi/4; fields are random
    trigonometric polynomials with |xi| <= xi_max and |tau| <= tau_max, so the
    same seed describes the same continuous field at every resolution.
    """

    model_config = ConfigDict(frozen=True)

    seed: int
    s: float = 1.0
    kinds: list[ProbeKind] = list(ProbeKind)
    ensemble_size: Optional[int] = PydanticField(default=None, ge=1)
    half_length: float = PydanticField(default=4.0 * np.pi, gt=0.0)
    n_points: int = 64
    n_t: int = 64
    duration: float = PydanticField(default=8.0, gt=0.0)
    xi_max: float = PydanticField(default=2.0, gt=0.0)
    tau_max: float = PydanticField(default=10.0, gt=0.0)
    b: float = PydanticField(default=0.6, gt=0.5)
    a: float = PydanticField(default=0.3, ge=0.0)
    c0: float = PydanticField(default=1.0, gt=0.0)
    projection_half_length: float = PydanticField(default=20.0 * np.pi, gt=0.0)
    projection_points: int = 256
    refinement: int = PydanticField(default=1, ge=1)
    output: Path = PydanticField(default_factory=lambda: Path(settings.OUTPUT_DIR) / "norms")

    def size_for(self, kind: ProbeKind) -> int:
        return self.ensemble_size or DEFAULT_ENSEMBLES[kind]

    def refined(self, factor: int) -> "NormProbeConfig":
        return self.model_copy(update={"refinement": self.refinement * factor})


class ProbeReport(BaseModel):
    estimate_kind: str
    s: float
    ensemble_size: int
    max_ratio: Optional[float] = None
    mean_ratio: Optional[float] = None
    resolution: dict
    bound: Optional[float] = None
    violations: Optional[int] = None
    failures: int = 0


class RefinementCheck(BaseModel):
    estimate_kind: str
    coarse_max: float
    fine_max: float
    relative_change: float


class NormProbeSuite(BaseModel):
    seed: int
    reports: list[ProbeReport]
    refinement_checks: list[RefinementCheck] = []


class _Lattice:
    """Grids and window for one resolution of the probe config"""

    def __init__(self, cfg: NormProbeConfig):
        self.cfg = cfg
        self.n_t = cfg.n_t * cfg.refinement
        self.dt = cfg.duration / self.n_t
        self.t0 = -0.5 * cfg.duration
        self.grid = make_grid(cfg.half_length, cfg.n_points * cfg.refinement)
        self.projection_grid = make_grid(cfg.projection_half_length, cfg.projection_points * cfg.refinement)

    def field(self, rng: np.random.Generator, grid: Optional[Grid1D] = None) -> SpaceTimeField:
        return random_bandlimited(
            grid or self.grid, self.n_t, self.dt, rng, self.cfg.xi_max, self.cfg.tau_max, self.t0
        )

    def resolution(self) -> dict:
        return {
            "n_points": self.grid.n_points,
            "n_t": self.n_t,
            "half_length": self.grid.half_length,
            "dt": self.dt,
        }


def _kind_rng(seed: int, kind: ProbeKind) -> np.random.Generator:
    return np.random.default_rng([seed, list(ProbeKind).index(kind)])


def _sampler(kind: ProbeKind, lattice: _Lattice) -> Callable[[np.random.Generator], float]:
    cfg = lattice.cfg
    s = cfg.s
    params = WeightParams(weight=cfg.a, speed=cfg.c0)

    if kind == ProbeKind.SHELL_PARSEVAL:
        return lambda rng: shell_parseval_defect(lattice.field(rng))
    if kind == ProbeKind.EMBEDDING:
        return lambda rng: embedding_ratio(lattice.field(rng), s)
    if kind == ProbeKind.XSB_EMBEDDING:
        def xsb(rng):
            F = lattice.field(rng)
            return xsb1_norm(F, s, 1) / xsb_norm(F, s, cfg.b)
        return xsb
    if kind == ProbeKind.BILINEAR:
        return lambda rng: bilinear_ratio(lattice.field(rng), lattice.field(rng), s)
    if kind in (ProbeKind.AIRY_HOM, ProbeKind.DISS_HOM):
        window = probe_window(lattice.grid, lattice.n_t, cfg.duration)

        def homogeneous(rng):
            f = Field(lattice.grid, lattice.field(rng).values[0])
            return linear_estimate_ratio((f, window), EstimateKind(kind.value), s, params)
        return homogeneous
    if kind in (ProbeKind.AIRY_INHOM, ProbeKind.DISS_INHOM):
        return lambda rng: linear_estimate_ratio(lattice.field(rng), EstimateKind(kind.value), s, params)
    if kind == ProbeKind.PROJECTION:
        package = PackageManager().get_package(params, lattice.projection_grid)
        return lambda rng: projection_ratio(lattice.field(rng, lattice.projection_grid), package, s)
    raise ValueError(f"no sampler for {kind}")


def run_probe(cfg: NormProbeConfig, kind: ProbeKind) -> ProbeReport:
    """One ensemble for one estimate kind"""
    kind = ProbeKind(kind)
    lattice = _Lattice(cfg)
    size = cfg.size_for(kind)
    rng = _kind_rng(cfg.seed, kind)

    if kind == ProbeKind.RESONANCE:
        tau1, xi1, tau2, xi2 = rng.uniform(-10.0, 10.0, size=(4, size))
        defects = resonance_defect(tau1, xi1, tau2, xi2)
        return ProbeReport(
            estimate_kind=kind.value, s=cfg.s, ensemble_size=size,
            max_ratio=float(defects.max()), mean_ratio=float(defects.mean()),
            resolution={}, bound=IDENTITY_TOLERANCE,
            violations=int(np.sum(defects >= IDENTITY_TOLERANCE)),
        )

    sample = _sampler(kind, lattice)
    ratios, failures = [], 0
    for _ in range(size):
        try:
            ratios.append(sample(rng))
        except ZeroNormError as e:
            failures += 1
            logger.warning(f"{kind.value} sample rejected: {e}")

    bound = None
    if kind == ProbeKind.EMBEDDING:
        bound = embedding_constant(cfg.s, 2.0 * np.pi / cfg.duration)
    elif kind == ProbeKind.SHELL_PARSEVAL:
        bound = IDENTITY_TOLERANCE

    values = np.asarray(ratios)
    report = ProbeReport(
        estimate_kind=kind.value,
        s=cfg.s,
        ensemble_size=size,
        max_ratio=float(values.max()) if values.size else None,
        mean_ratio=float(values.mean()) if values.size else None,
        resolution=lattice.resolution(),
        bound=bound,
        violations=None if bound is None else int(np.sum(values > bound)),
        failures=failures,
    )
    logger.info(
        f"Probe {kind.value}: {values.size} samples, max {report.max_ratio}, mean {report.mean_ratio}"
    )
    return report


def refinement_check(cfg: NormProbeConfig, kind: ProbeKind, factor: int = 2) -> RefinementCheck:
    """Largest ratio at the configured lattice and at `factor` times finer (N and n_t)"""
    coarse = run_probe(cfg, kind).max_ratio
    fine = run_probe(cfg.refined(factor), kind).max_ratio
    if coarse is None or fine is None:
        raise ZeroNormError(f"{ProbeKind(kind).value}: no usable samples for the refinement check")
    change = abs(fine - coarse) / abs(coarse) if coarse else abs(fine - coarse)
    return RefinementCheck(estimate_kind=ProbeKind(kind).value, coarse_max=coarse, fine_max=fine, relative_change=change)


def run_norm_probes(cfg: NormProbeConfig, check_refinement: bool = False) -> NormProbeSuite:
    """
    Run every configured probe and write <output>/norm_probes.json

    Args:
        cfg: probe config (the seed is mandatory)
        check_refinement: also rerun the ratio probes at doubled resolution
    """
    logger.info(f"Norm probes: seed={cfg.seed}, s={cfg.s}, kinds={[kind.value for kind in cfg.kinds]}")
    reports = [run_probe(cfg, kind) for kind in cfg.kinds]
    checks = []
    if check_refinement:
        exact = (ProbeKind.RESONANCE, ProbeKind.SHELL_PARSEVAL)
        checks = [refinement_check(cfg, kind) for kind in cfg.kinds if kind not in exact]
    suite = NormProbeSuite(seed=cfg.seed, reports=reports, refinement_checks=checks)
    write_json(Path(cfg.output) / PROBES_FILE, suite)
    return suite
