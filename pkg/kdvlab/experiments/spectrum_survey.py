"""
Spectrum Survey
Dense spectra of A_a over a sweep of (a, c), one CSV row per eigenvalue
"""

from pathlib import Path
from typing import Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field as PydanticField, ValidationError

from kdvlab.core.config import settings
from kdvlab.core.errors import EigensolverError
from kdvlab.experiments.io import SPECTRUM_COLUMNS, write_csv
from kdvlab.spectral.grid import make_grid
from kdvlab.spectral.linearized_operator import WeightParams, discretized_spectrum

SPECTRUM_FILE = "spectrum.csv"
SUMMARY_FILE = "spectrum_summary.csv"
SUMMARY_COLUMNS = ("a", "c", "spectral_gap", "reference_gap", "kernel_count", "artifact_count", "max_curve_distance")


class SpectrumSurveyConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    weights: list[float] = [0.1, 0.3, 0.5]
    speeds: list[float] = [1.0]
    half_length: float = PydanticField(default_factory=lambda: settings.DEFAULT_HALF_LENGTH, gt=0.0)
    n_points: int = 512
    output: Path = PydanticField(default_factory=lambda: Path(settings.OUTPUT_DIR) / "spectrum")


class SurveyRow(BaseModel):
    a: float
    c: float
    spectral_gap: float
    reference_gap: float
    kernel_count: int
    artifact_count: int
    max_curve_distance: Optional[float] = None


class SurveySkip(BaseModel):
    a: float
    c: float
    reason: str


class SurveyReport(BaseModel):
    rows: list[SurveyRow] = []
    skipped: list[SurveySkip] = []
    spectrum_file: Path
    summary_file: Path


def run_spectrum_survey(cfg: SpectrumSurveyConfig) -> SurveyReport:
    """
    Eigensolve A_a for every (a, c) pair of the sweep

    Pairs violating 0 <= a < sqrt(c/3), or whose eigensolve fails, are skipped
    with a warning and listed in the report. An empty sweep writes header-only
    files.
    """
    grid = make_grid(cfg.half_length, cfg.n_points)
    eigen_rows: list[tuple] = []
    rows: list[SurveyRow] = []
    skipped: list[SurveySkip] = []

    for c in cfg.speeds:
        for a in cfg.weights:
            try:
                params = WeightParams(weight=a, speed=c)
                result = discretized_spectrum(params, grid)
            except (ValidationError, EigensolverError) as e:
                reason = str(e).splitlines()[0] if isinstance(e, EigensolverError) else _first_error(e)
                logger.warning(f"Skipping survey row a={a}, c={c}: {reason}")
                skipped.append(SurveySkip(a=a, c=c, reason=reason))
                continue

            for lam, mass, kernel in zip(result.eigenvalues, result.boundary_mass, result.is_kernel):
                eigen_rows.append((float(a), float(c), float(lam.real), float(lam.imag), bool(kernel), float(mass)))
            distances = result.curve_distances()
            row = SurveyRow(
                a=a,
                c=c,
                spectral_gap=result.spectral_gap,
                reference_gap=params.gap,
                kernel_count=result.kernel_count,
                artifact_count=int(np.sum(result.is_artifact)),
                max_curve_distance=float(np.max(distances)) if distances.size else None,
            )
            rows.append(row)
            logger.info(
                f"Survey a={a}, c={c}: gap {row.spectral_gap:.4f} (reference {row.reference_gap:.4f}), "
                f"{row.kernel_count} kernel eigenvalues"
            )

    output = Path(cfg.output)
    spectrum_file = write_csv(output / SPECTRUM_FILE, SPECTRUM_COLUMNS, eigen_rows)
    summary_file = write_csv(
        output / SUMMARY_FILE,
        SUMMARY_COLUMNS,
        [
            (r.a, r.c, r.spectral_gap, r.reference_gap, r.kernel_count, r.artifact_count,
             "" if r.max_curve_distance is None else r.max_curve_distance)
            for r in rows
        ],
    )
    return SurveyReport(rows=rows, skipped=skipped, spectrum_file=spectrum_file, summary_file=summary_file)


def _first_error(e: ValidationError) -> str:
    errors = e.errors()
    return errors[0]["msg"] if errors else str(e)
