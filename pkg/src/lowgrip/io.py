"""Plain-text formats: sensor traces, estimate series, datasets, key = value files."""

from __future__ import annotations

import csv
import io as _io
import math
from decimal import Decimal, localcontext
from typing import Dict, IO, Iterable, List, Optional, Sequence, Tuple

from .core import (
    DataError,
    Deformable,
    HardSurface,
    ManeuverId,
    ManeuverOutcome,
    Scenario,
    SensorFrame,
)

TRACE_COLUMNS = ("t_s", "a_imu_mps2", "x_lidar_m", "y_lidar_m", "lidar_fresh",
                 "omega_f_radps", "omega_r_radps", "torque_est_Nm")
OBSERVER_COLUMNS = ("t_s", "v_hat", "omega_hat", "a_hat")
FRICTION_COLUMNS = ("t_s", "mu_hat")
TERRA_COLUMNS = ("t_s", "c_hat_kpa", "phi_hat_deg")
DATASET_COLUMNS = ("v0_mps", "ground_kind", "mu", "z_m", "c_kpa", "phi_deg",
                   "maneuver_ordinal", "min_distance_m", "status")


def fmt(x: Optional[float]) -> str:
    """Shortest round-tripping text for a float; empty for None."""
    return "" if x is None else repr(float(x))


def _writer(buf: IO[str]):
    return csv.writer(buf, lineterminator="\n")


def _text(rows: Iterable[Sequence[str]], header: Sequence[str]) -> str:
    buf = _io.StringIO()
    w = _writer(buf)
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _read_rows(text: str, header: Sequence[str], what: str) -> List[Tuple[int, List[str]]]:
    lines = list(csv.reader(_io.StringIO(text)))
    if not lines:
        raise DataError(f"empty {what}: missing header")
    got = [h.strip() for h in lines[0]]
    if got != list(header):
        raise DataError(f"line 1: bad {what} header, expected {','.join(header)}")
    out = []
    for i, row in enumerate(lines[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"line {i}: expected {len(header)} fields, got {len(row)}")
        out.append((i, [c.strip() for c in row]))
    return out


def _float(s: str, line: int, name: str) -> float:
    try:
        x = float(s)
    except ValueError:
        raise DataError(f"line {line}: field {name} is not a number: {s!r}") from None
    if not math.isfinite(x):
        raise DataError(f"line {line}: field {name} is not finite")
    return x


# ---------------------------------------------------------------------------
# sensor traces


def trace_to_csv(frames: Sequence[SensorFrame]) -> str:
    return _text(([fmt(f.t_s), fmt(f.a_imu_mps2), fmt(f.x_lidar_m), fmt(f.y_lidar_m),
                   "1" if f.lidar_fresh else "0", fmt(f.omega_f_radps), fmt(f.omega_r_radps),
                   fmt(f.torque_est_Nm)] for f in frames), TRACE_COLUMNS)


def trace_from_csv(text: str) -> List[SensorFrame]:
    frames = []
    for line, row in _read_rows(text, TRACE_COLUMNS, "trace"):
        vals = {name: row[k] for k, name in enumerate(TRACE_COLUMNS)}
        if vals["lidar_fresh"] not in ("0", "1"):
            raise DataError(f"line {line}: lidar_fresh must be 0 or 1")
        nums = {n: _float(vals[n], line, n) for n in TRACE_COLUMNS if n != "lidar_fresh"}
        frames.append(SensorFrame(nums["t_s"], nums["a_imu_mps2"], nums["x_lidar_m"], nums["y_lidar_m"],
                                  nums["omega_f_radps"], nums["omega_r_radps"], nums["torque_est_Nm"],
                                  vals["lidar_fresh"] == "1"))
    if not frames:
        raise DataError("empty trace")
    return frames


# ---------------------------------------------------------------------------
# estimate series


def observer_to_csv(estimates) -> str:
    return _text(([fmt(e.t_s), fmt(e.v_hat_mps), fmt(e.omega_hat_radps), fmt(e.a_hat_mps2)]
                  for e in estimates), OBSERVER_COLUMNS)


def friction_to_csv(series: Iterable[Tuple[float, float]]) -> str:
    return _text(([fmt(t), fmt(mu)] for t, mu in series), FRICTION_COLUMNS)


def terra_to_csv(series: Iterable[Tuple[float, Optional[float], Optional[float]]]) -> str:
    """Rows of (t, c_kpa, phi_deg); times before the first estimate have empty fields."""
    return _text(([fmt(t), fmt(c), fmt(p)] for t, c, p in series), TERRA_COLUMNS)


def series_from_csv(text: str, header: Sequence[str]) -> List[Tuple[Optional[float], ...]]:
    out = []
    for line, row in _read_rows(text, header, "estimate file"):
        out.append(tuple(None if s == "" else _float(s, line, n) for s, n in zip(row, header)))
    return out


# ---------------------------------------------------------------------------
# datasets


def _kpa_text(c_pa: float) -> str:
    # decimal shift of the shortest repr, so Pa -> kPa -> Pa is exact
    d = Decimal(repr(float(c_pa))).scaleb(-3).normalize()
    s = format(d, "f")
    return s if "." in s else s + ".0"


def _pa_from_kpa(s: str) -> float:
    return float(Decimal(s).scaleb(3))


_PI = Decimal("3.14159265358979323846264338327950288419716939937510")
_LONG_DIGITS = 17  # texts longer than a float repr take the high-precision path


def _deg_text(rad: float) -> str:
    """Degree text that converts back to exactly ``rad``.

    The short repr is used whenever ``math.radians`` inverts it; some radian
    values have no such preimage and get a 25-digit decimal instead.
    """
    deg = math.degrees(rad)
    cand = deg
    for _ in range(16):
        if math.radians(cand) == rad:
            return repr(cand)
        cand = math.nextafter(cand, math.inf if math.radians(cand) < rad else -math.inf)
    with localcontext() as ctx:
        ctx.prec = 40
        d = Decimal(rad) * 180 / _PI
    return format(d, ".25g")


def _deg_field(s: str, line: int) -> float:
    """Radians from degree text; long texts are converted at 40-digit precision."""
    digits = sum(ch.isdigit() for ch in s.lower().split("e")[0].lstrip("-+0."))
    if digits <= _LONG_DIGITS:
        return math.radians(_float(s, line, "phi_deg"))
    try:
        with localcontext() as ctx:
            ctx.prec = 40
            x = float(Decimal(s) * _PI / 180)
    except Exception:
        raise DataError(f"line {line}: field phi_deg is not a number: {s!r}") from None
    if not math.isfinite(x):
        raise DataError(f"line {line}: field phi_deg is not finite")
    return x


def dataset_to_csv(rows: Iterable[ManeuverOutcome]) -> str:
    out = []
    for r in rows:
        g = r.scenario.ground
        if isinstance(g, HardSurface):
            ground = [g.kind, fmt(g.mu), "", "", ""]
        else:
            ground = [g.kind, "", fmt(g.sinkage_m), _kpa_text(g.cohesion_pa), _deg_text(g.shear_angle_rad)]
        d = "" if r.min_distance_m is None or not math.isfinite(r.min_distance_m) else fmt(r.min_distance_m)
        out.append([fmt(r.scenario.v0_mps)] + ground + [str(int(r.maneuver)), d, r.status])
    return _text(out, DATASET_COLUMNS)


def dataset_from_csv(text: str, obstacle_distance_m: float = 6.0) -> List[ManeuverOutcome]:
    rows = []
    for line, row in _read_rows(text, DATASET_COLUMNS, "dataset"):
        v = dict(zip(DATASET_COLUMNS, row))
        v0 = _float(v["v0_mps"], line, "v0_mps")
        try:
            if v["ground_kind"] == HardSurface.kind:
                if v["z_m"] or v["c_kpa"] or v["phi_deg"]:
                    raise DataError(f"line {line}: hard-ground row carries soil fields")
                ground = HardSurface(_float(v["mu"], line, "mu"))
            elif v["ground_kind"] == Deformable.kind:
                if v["mu"]:
                    raise DataError(f"line {line}: deformable row carries a mu field")
                c = v["c_kpa"]
                try:
                    c_pa = _pa_from_kpa(c)
                except Exception:
                    raise DataError(f"line {line}: field c_kpa is not a number: {c!r}") from None
                ground = Deformable(_float(v["z_m"], line, "z_m"), c_pa,
                                    _deg_field(v["phi_deg"], line))
            else:
                raise DataError(f"line {line}: unknown ground_kind {v['ground_kind']!r}")
            scn = Scenario(v0, ground, obstacle_distance_m)
            maneuver = ManeuverId(int(v["maneuver_ordinal"]))
        except ValueError as exc:
            raise DataError(f"line {line}: {exc}") from None
        status = v["status"] or "ok"
        if v["min_distance_m"] == "":
            if status == "ok":
                raise DataError(f"line {line}: missing min_distance_m on an ok row")
            d = math.nan
        else:
            d = _float(v["min_distance_m"], line, "min_distance_m")
        rows.append(ManeuverOutcome(scn, maneuver, d, status))
    return rows


# ---------------------------------------------------------------------------
# key = value files


def parse_key_values(text: str) -> Dict[str, str]:
    """``key = value`` per line; ``#`` starts a comment; later keys win."""
    out: Dict[str, str] = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"line {i}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise DataError(f"line {i}: empty key")
        out[key] = value
    return out
