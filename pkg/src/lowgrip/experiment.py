"""Scenario grids, dataset generation and brute-force evaluation of a model."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    SOILS,
    Deformable,
    GroundModel,
    HardSurface,
    LowgripError,
    ManeuverId,
    ManeuverOutcome,
    Scenario,
    VehicleParams,
)
from .plant import PlantConfig, maneuver_clearance
from .predictor import Dataset, PredictorModel, mode_of, select_maneuver

log = logging.getLogger(__name__)

DEFAULT_SEED = 0
CO_OPTIMAL_TOL_M = 0.01  # oracle maneuvers within 1 cm of the best count as winners


def _soil_list() -> Tuple[Tuple[float, float], ...]:
    return tuple(SOILS.values())


@dataclass(frozen=True)
class ExperimentGrid:
    """Every (velocity x ground x maneuver x repetition) combination.

    Repetitions of one cell differ only by a small seeded perturbation of
    the initial speed (uniform in +-``v_jitter_mps``), standing in for the
    run-to-run scatter of physical tests.
    """

    velocities: Tuple[float, ...] = (1.0, 2.0, 3.0)
    hard_mu: Tuple[float, ...] = (0.25, 0.45, 0.9)
    soils: Tuple[Tuple[float, float], ...] = field(default_factory=_soil_list)  # (c kPa, phi deg)
    sinkages: Tuple[float, ...] = (0.01, 0.03)
    repetitions: int = 2
    seed: int = DEFAULT_SEED
    v_jitter_mps: float = 0.05
    obstacle_distance_m: float = 6.0

    def __post_init__(self):
        if not self.velocities:
            raise ValueError("velocities must not be empty")
        if not (self.hard_mu or (self.soils and self.sinkages)):
            raise ValueError("grid has no grounds")
        if bool(self.soils) != bool(self.sinkages):
            raise ValueError("soils and sinkages must both be given or both be empty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.v_jitter_mps < 0:
            raise ValueError("v_jitter_mps must be >= 0")
        if any(v - self.v_jitter_mps <= 0 for v in self.velocities):
            raise ValueError("velocities must stay positive after jitter")

    def grounds(self) -> List[GroundModel]:
        out: List[GroundModel] = [HardSurface(mu) for mu in self.hard_mu]
        for z in self.sinkages:
            for c, phi in self.soils:
                out.append(Deformable.from_table(z, c, phi))
        return out

    def cells(self) -> List[Tuple[float, GroundModel]]:
        """(v, ground) pairs in enumeration order: ground-major, then velocity."""
        return [(v, g) for g in self.grounds() for v in self.velocities]

    def __len__(self) -> int:
        return len(self.cells()) * len(ManeuverId) * self.repetitions


def evaluation_grid(seed: int = DEFAULT_SEED) -> ExperimentGrid:
    """Twice as dense as the default grid in every axis, without jitter."""
    return ExperimentGrid(
        velocities=(1.0, 1.5, 2.0, 2.5, 3.0),
        hard_mu=(0.25, 0.35, 0.45, 0.675, 0.9),
        soils=tuple(SOILS.values()) + ((37.0, 33.0), (78.5, 28.0), (49.0, 25.0)),
        sinkages=(0.01, 0.02, 0.03),
        repetitions=1, seed=seed, v_jitter_mps=0.0,
    )


def _outcome(scn: Scenario, m: ManeuverId, params: VehicleParams, cfg: PlantConfig) -> ManeuverOutcome:
    try:
        return maneuver_clearance(scn, m, params, cfg=cfg)
    except LowgripError as exc:
        log.warning("rollout failed (%s) for v0=%g %r maneuver %d", exc, scn.v0_mps, scn.ground, int(m))
        status = "runaway" if "runaway" in str(exc) else "error"
        return ManeuverOutcome(scn, m, math.nan, status)


def generate_dataset(grid: ExperimentGrid, params: Optional[VehicleParams] = None,
                     cfg: Optional[PlantConfig] = None) -> Dataset:
    """Run the grid; row order is fixed by enumeration (cell, repetition, maneuver)."""
    params = params or VehicleParams()
    cfg = cfg or PlantConfig()
    rng = np.random.default_rng(grid.seed)
    rows = []
    for v, ground in grid.cells():
        for _rep in range(grid.repetitions):
            jitter = float(rng.uniform(-grid.v_jitter_mps, grid.v_jitter_mps)) if grid.v_jitter_mps else 0.0
            scn = Scenario(v + jitter, ground, grid.obstacle_distance_m)
            for m in ManeuverId:
                rows.append(_outcome(scn, m, params, cfg))
    return Dataset(tuple(rows))


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class CellResult:
    v_mps: float
    ground: GroundModel
    true_d: Tuple[float, ...]
    predicted_d: Tuple[float, ...]
    oracle: ManeuverId
    selected: ManeuverId
    held_out: bool

    @property
    def regret(self) -> float:
        return self.true_d[int(self.oracle) - 1] - self.true_d[int(self.selected) - 1]

    @property
    def exact_match(self) -> bool:
        return self.selected == self.oracle

    @property
    def co_optimal(self) -> bool:
        return self.regret <= CO_OPTIMAL_TOL_M


def _cell_key(v: float, g: GroundModel) -> tuple:
    if isinstance(g, HardSurface):
        return (round(v, 9), "hard", round(g.mu, 9))
    return (round(v, 9), "deformable", round(g.sinkage_m, 9), round(g.cohesion_kpa, 9), round(g.shear_angle_deg, 9))


def evaluate(model: PredictorModel, grid: ExperimentGrid, training: Optional[ExperimentGrid] = None,
             params: Optional[VehicleParams] = None, cfg: Optional[PlantConfig] = None) -> List[CellResult]:
    """Brute-force every maneuver per cell and compare with the model's choice.

    Cells whose ground mode the model cannot serve are skipped. The oracle
    maximizes or minimizes true distance following the model's selection rule.
    """
    params = params or VehicleParams()
    cfg = cfg or PlantConfig()
    seen = {_cell_key(v, g) for v, g in training.cells()} if training else set()
    modes = set(model.trained_modes())
    out = []
    for v, ground in grid.cells():
        if mode_of(ground) not in modes:
            continue
        scn = Scenario(v, ground, grid.obstacle_distance_m)
        d = [_outcome(scn, m, params, cfg).min_distance_m for m in ManeuverId]
        if not all(math.isfinite(x) for x in d):
            log.warning("skipping cell v=%g %r: a rollout failed", v, ground)
            continue
        sel, pred = select_maneuver(model, v, ground)
        arr = np.array(d)
        best = int(np.argmax(arr)) if model.selection == "argmax" else int(np.argmin(arr))
        out.append(CellResult(v, ground, tuple(d), tuple(float(p) for p in pred), ManeuverId(best + 1), sel,
                              _cell_key(v, ground) not in seen))
    return out


def _rate(cells: Sequence[CellResult], attr: str) -> Optional[float]:
    return sum(getattr(c, attr) for c in cells) / len(cells) if cells else None


def summarize(cells: Sequence[CellResult]) -> Dict:
    """Agreement, regret and per-maneuver RMS error as a JSON-ready dict."""
    held = [c for c in cells if c.held_out]
    rms = {}
    for m in ManeuverId:
        errs = [c.predicted_d[int(m) - 1] - c.true_d[int(m) - 1] for c in cells]
        rms[str(int(m))] = math.sqrt(sum(e * e for e in errs) / len(errs)) if errs else None
    by_mode = {}
    for mode in ("hard", "deformable"):
        sub = [c for c in cells if mode_of(c.ground) == mode]
        if sub:
            by_mode[mode] = {"cells": len(sub), "agreement": _rate(sub, "co_optimal"),
                             "mean_regret_m": sum(c.regret for c in sub) / len(sub)}
    return {
        "cells": len(cells),
        "held_out_cells": len(held),
        "co_optimal_tolerance_m": CO_OPTIMAL_TOL_M,
        "agreement_all": _rate(cells, "co_optimal"),
        "agreement_held_out": _rate(held, "co_optimal"),
        "exact_agreement_all": _rate(cells, "exact_match"),
        "exact_agreement_held_out": _rate(held, "exact_match"),
        "mean_regret_m": sum(c.regret for c in cells) / len(cells) if cells else None,
        "mean_regret_held_out_m": sum(c.regret for c in held) / len(held) if held else None,
        "max_regret_m": max((c.regret for c in cells), default=None),
        "rms_error_m": rms,
        "by_mode": by_mode,
    }
