"""Regression predictors of obstacle clearance, one per maneuver and ground mode.

Each maneuver's minimal obstacle distance is modelled as a linear function
of an augmented input vector:

* hard ground:       ``[1, v, mu, v*mu, v**2, mu**2]``
* deformable ground: ``[1, v, z, v*c, phi]`` with c in kPa and phi in rad

Coefficients are ordinary least squares (QR). Maneuver selection picks the
largest predicted distance by default; ``selection="argmin"`` is available
for the literal minimizing rule. Ties go to the lowest maneuver ordinal.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from .core import (
    DataError,
    Deformable,
    GroundModel,
    HardSurface,
    LowgripError,
    ManeuverId,
    ManeuverOutcome,
    NumericalError,
)

log = logging.getLogger(__name__)

HARD = "hard"
DEFORMABLE = "deformable"
MODES = (HARD, DEFORMABLE)

BASIS: Dict[str, Tuple[str, ...]] = {
    HARD: ("1", "v", "mu", "v*mu", "v^2", "mu^2"),
    DEFORMABLE: ("1", "v", "z", "v*c", "phi"),
}

SELECTIONS = ("argmax", "argmin")
COLLINEAR_TOL = 1e-9


class RankDeficiencyError(NumericalError):
    def __init__(self, columns: Sequence[str], context: str = ""):
        self.columns = tuple(columns)
        where = f" ({context})" if context else ""
        super().__init__(f"rank-deficient features{where}: collinear columns {', '.join(self.columns)}")


class UntrainedError(LowgripError):
    exit_code = 2


def mode_of(ground: GroundModel) -> str:
    return HARD if isinstance(ground, HardSurface) else DEFORMABLE


def _mode_for_length(n: int) -> str:
    for mode, names in BASIS.items():
        if len(names) == n:
            return mode
    raise ValueError(f"no feature basis has {n} entries")


def hard_features(v: float, mu: float) -> np.ndarray:
    return np.array([1.0, v, mu, v * mu, v * v, mu * mu])


def deformable_features(v: float, z: float, c_kpa: float, phi_rad: float) -> np.ndarray:
    return np.array([1.0, v, z, v * c_kpa, phi_rad])


def build_features(v: float, ground: GroundModel) -> np.ndarray:
    """Feature vector for a speed and ground; the ground type picks the basis."""
    if not v >= 0.0:
        raise ValueError(f"speed must be >= 0, got {v}")
    if isinstance(ground, HardSurface):
        return hard_features(v, ground.mu)
    if isinstance(ground, Deformable):
        return deformable_features(v, ground.sinkage_m, ground.cohesion_kpa, ground.shear_angle_rad)
    raise TypeError(f"unsupported ground {ground!r}")


# ---------------------------------------------------------------------------
# data


@dataclass(frozen=True)
class Dataset:
    rows: Tuple[ManeuverOutcome, ...] = ()

    def __len__(self) -> int:
        return len(self.rows)

    def usable(self, mode: str, maneuver: ManeuverId) -> List[ManeuverOutcome]:
        """Rows of one (mode, maneuver) pair whose rollout succeeded."""
        m = ManeuverId(maneuver)
        return [r for r in self.rows
                if r.status == "ok" and r.maneuver == m and mode_of(r.scenario.ground) == mode]

    def design(self, mode: str, maneuver: ManeuverId) -> Tuple[np.ndarray, np.ndarray]:
        rows = self.usable(mode, maneuver)
        n = len(BASIS[mode])
        X = np.array([build_features(r.scenario.v0_mps, r.scenario.ground) for r in rows]).reshape(-1, n)
        y = np.array([r.min_distance_m for r in rows], dtype=float)
        return X, y


# ---------------------------------------------------------------------------
# fitting


@dataclass(frozen=True)
class ManeuverFit:
    """Full-length coefficient vector (dropped columns are exactly 0)."""

    coef: Tuple[float, ...]
    n_rows: int
    residual_rms: float
    dropped: Tuple[str, ...] = ()


def collinear_columns(X: np.ndarray, tol: float = COLLINEAR_TOL) -> List[int]:
    """Indices of columns that lie in the span of the earlier, kept columns.

    Columns are visited in basis order, so the intercept and the leading
    terms are preferred over later ones.
    """
    kept: List[int] = []
    bad: List[int] = []
    for j in range(X.shape[1]):
        col = X[:, j]
        norm = float(np.linalg.norm(col))
        if norm == 0.0:
            bad.append(j)
            continue
        if kept:
            Q, _ = np.linalg.qr(X[:, kept])
            res = col - Q @ (Q.T @ col)
            if float(np.linalg.norm(res)) <= tol * norm:
                bad.append(j)
                continue
        kept.append(j)
    return bad


def ols_qr(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(X)
    return solve_triangular(R, Q.T @ y)


def fit_coefficients(X: np.ndarray, y: np.ndarray, names: Sequence[str],
                     drop_collinear: bool = True, context: str = "") -> ManeuverFit:
    """OLS fit of ``y`` on the columns of ``X``.

    Collinear columns are dropped with a warning (their coefficient is 0) or,
    with ``drop_collinear=False``, reported as a RankDeficiencyError.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n < p:
        raise DataError(f"insufficient data{f' ({context})' if context else ''}: {n} rows for {p} features")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("non-finite training data")
    bad = collinear_columns(X)
    if bad:
        cols = [names[j] for j in bad]
        if not drop_collinear:
            raise RankDeficiencyError(cols, context)
        log.warning("dropping collinear feature columns %s%s", ", ".join(cols), f" ({context})" if context else "")
    keep = [j for j in range(p) if j not in bad]
    theta = np.zeros(p)
    theta[keep] = ols_qr(X[:, keep], y)
    resid = y - X @ theta
    rms = float(math.sqrt(float(np.mean(resid ** 2)))) if n else 0.0
    return ManeuverFit(tuple(float(t) for t in theta), n, rms, tuple(names[j] for j in bad))


def fit(ds: Dataset, maneuver: ManeuverId, mode: str, drop_collinear: bool = True) -> ManeuverFit:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    maneuver = ManeuverId(maneuver)
    X, y = ds.design(mode, maneuver)
    return fit_coefficients(X, y, BASIS[mode], drop_collinear, context=f"{mode}, maneuver {int(maneuver)}")


def orthogonality_residual(X: np.ndarray, y: np.ndarray, coef: Sequence[float]) -> float:
    """||X^T (y - X theta)|| relative to ||X^T y||; ~0 for a least-squares solution."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    r = y - X @ np.asarray(coef, dtype=float)
    scale = float(np.linalg.norm(X.T @ y)) or 1.0
    return float(np.linalg.norm(X.T @ r)) / scale


# ---------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class PredictorModel:
    fits: Mapping[Tuple[str, int], ManeuverFit] = field(default_factory=dict)
    selection: str = "argmax"

    def __post_init__(self):
        if self.selection not in SELECTIONS:
            raise ValueError(f"selection must be one of {SELECTIONS}")
        for (mode, ordinal), f in self.fits.items():
            if mode not in MODES or ordinal not in tuple(int(m) for m in ManeuverId):
                raise ValueError(f"bad model key {(mode, ordinal)}")
            if len(f.coef) != len(BASIS[mode]):
                raise ValueError(f"coefficient length {len(f.coef)} does not match {mode} basis")

    def trained(self, mode: str, maneuver: ManeuverId) -> bool:
        return (mode, int(maneuver)) in self.fits

    def trained_modes(self) -> List[str]:
        return [m for m in MODES if all(self.trained(m, k) for k in ManeuverId)]

    def coefficients(self, mode: str, maneuver: ManeuverId) -> np.ndarray:
        key = (mode, int(maneuver))
        if key not in self.fits:
            raise UntrainedError(f"maneuver {int(maneuver)} untrained for {mode} ground")
        return np.array(self.fits[key].coef)

    def scaled(self, k: float) -> "PredictorModel":
        """Every coefficient vector multiplied by ``k``."""
        return PredictorModel({key: ManeuverFit(tuple(k * c for c in f.coef), f.n_rows, abs(k) * f.residual_rms,
                                                f.dropped)
                               for key, f in self.fits.items()}, self.selection)

    def with_selection(self, selection: str) -> "PredictorModel":
        return PredictorModel(dict(self.fits), selection)


def train(ds: Dataset, selection: str = "argmax", drop_collinear: bool = True) -> PredictorModel:
    """Fit every (mode, maneuver) pair that has rows; pairs without rows stay untrained."""
    fits: Dict[Tuple[str, int], ManeuverFit] = {}
    for mode in MODES:
        for m in ManeuverId:
            if not ds.usable(mode, m):
                continue
            fits[(mode, int(m))] = fit(ds, m, mode, drop_collinear)
    return PredictorModel(fits, selection)


def predict_distance(model: PredictorModel, maneuver: ManeuverId, features: Sequence[float],
                     mode: Optional[str] = None) -> float:
    """Raw (unclamped) predicted clearance: coefficients . features."""
    f = np.asarray(features, dtype=float)
    mode = mode or _mode_for_length(len(f))
    return float(model.coefficients(mode, maneuver) @ f)


def choose(distances: Sequence[float], selection: str = "argmax") -> ManeuverId:
    d = np.asarray(distances, dtype=float)
    i = int(np.argmax(d)) if selection == "argmax" else int(np.argmin(d))  # first hit: lowest ordinal
    return ManeuverId(i + 1)


def select_maneuver(model: PredictorModel, v: float, ground: GroundModel) -> Tuple[ManeuverId, np.ndarray]:
    mode = mode_of(ground)
    f = build_features(v, ground)
    d = np.array([predict_distance(model, m, f, mode) for m in ManeuverId])
    return choose(d, model.selection), d


# ---------------------------------------------------------------------------
# decision maps


@dataclass(frozen=True)
class MapCell:
    v_mps: float
    ground: GroundModel
    maneuver: ManeuverId
    predicted: Tuple[float, ...]


@dataclass(frozen=True)
class HardMapGrid:
    v_values: Tuple[float, ...]
    mu_values: Tuple[float, ...]

    mode = HARD

    def cells(self) -> Iterable[Tuple[float, GroundModel]]:
        for mu in self.mu_values:
            for v in self.v_values:
                yield v, HardSurface(mu)


@dataclass(frozen=True)
class DeformableMapGrid:
    v_values: Tuple[float, ...]
    c_kpa_values: Tuple[float, ...]
    phi_deg_values: Tuple[float, ...]
    sinkage_m: float = 0.03

    mode = DEFORMABLE

    def cells(self) -> Iterable[Tuple[float, GroundModel]]:
        for phi in self.phi_deg_values:
            for c in self.c_kpa_values:
                for v in self.v_values:
                    yield v, Deformable.from_table(self.sinkage_m, c, phi)


def linspace(lo: float, hi: float, n: int) -> Tuple[float, ...]:
    if n < 1:
        raise ValueError("need at least one grid point")
    if n == 1:
        return (float(lo),)
    return tuple(float(x) for x in np.linspace(lo, hi, n))


def default_hard_grid(n_v: int = 21, n_mu: int = 14) -> HardMapGrid:
    return HardMapGrid(linspace(1.0, 3.0, n_v), linspace(0.25, 0.9, n_mu))


def default_deformable_grid(z: float = 0.03, n_v: int = 11, n_c: int = 12, n_phi: int = 3) -> DeformableMapGrid:
    return DeformableMapGrid(linspace(1.0, 3.0, n_v), linspace(0.0, 83.0, n_c), linspace(25.0, 35.0, n_phi), z)


def decision_map(model: PredictorModel, grid) -> List[MapCell]:
    out = []
    for v, ground in grid.cells():
        m, d = select_maneuver(model, v, ground)
        out.append(MapCell(v, ground, m, tuple(float(x) for x in d)))
    return out


def neighbour_agreement(cells: Sequence[MapCell], shape: Tuple[int, ...]) -> float:
    """Share of cells agreeing with at least 2 of their in-plane (up to 4) neighbours.

    ``shape`` is the grid shape with the fastest axis last; for a
    deformable map the leading axis (phi) indexes separate panels.
    """
    labels = np.array([int(c.maneuver) for c in cells]).reshape(shape)
    if labels.ndim == 2:
        labels = labels[None]
    ok = total = 0
    for panel in labels:
        rows, cols = panel.shape
        for i in range(rows):
            for j in range(cols):
                same = n = 0
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    a, b = i + di, j + dj
                    if 0 <= a < rows and 0 <= b < cols:
                        n += 1
                        same += panel[a, b] == panel[i, j]
                total += 1
                ok += same >= min(2, n)
    return ok / total if total else 1.0


# ---------------------------------------------------------------------------
# model file


def _fmt(x: float) -> str:
    return repr(float(x))


def model_to_text(model: PredictorModel) -> str:
    lines = ["# obstacle-clearance predictor", "format = 1", f"selection = {model.selection}"]
    for mode in MODES:
        lines.append(f"{mode}.basis = {', '.join(BASIS[mode])}")
        for m in ManeuverId:
            key = (mode, int(m))
            if key not in model.fits:
                lines.append(f"{mode}.{int(m)}.trained = false")
                continue
            f = model.fits[key]
            lines.append(f"{mode}.{int(m)}.trained = true")
            lines.append(f"{mode}.{int(m)}.coef = {', '.join(_fmt(c) for c in f.coef)}")
            lines.append(f"{mode}.{int(m)}.rows = {f.n_rows}")
            lines.append(f"{mode}.{int(m)}.residual_rms = {_fmt(f.residual_rms)}")
            lines.append(f"{mode}.{int(m)}.dropped = {', '.join(f.dropped)}")
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> PredictorModel:
    from .io import parse_key_values

    kv = parse_key_values(text)
    if kv.get("format") != "1":
        raise DataError("unsupported model file format")
    fits = {}
    for mode in MODES:
        for m in ManeuverId:
            pre = f"{mode}.{int(m)}"
            if kv.get(f"{pre}.trained", "false") != "true":
                continue
            try:
                coef = tuple(float(x) for x in kv[f"{pre}.coef"].split(","))
                rows = int(kv[f"{pre}.rows"])
                rms = float(kv[f"{pre}.residual_rms"])
            except (KeyError, ValueError) as exc:
                raise DataError(f"model entry {pre} is incomplete or malformed") from exc
            dropped = tuple(s.strip() for s in kv.get(f"{pre}.dropped", "").split(",") if s.strip())
            if len(coef) != len(BASIS[mode]):
                raise DataError(f"model entry {pre} has {len(coef)} coefficients, expected {len(BASIS[mode])}")
            fits[(mode, int(m))] = ManeuverFit(coef, rows, rms, dropped)
    return PredictorModel(fits, kv.get("selection", "argmax"))
