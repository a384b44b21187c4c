"""Command-line harness: generate, estimate, train, map, evaluate, simulate.

Errors end with a single stderr line ``lowgrip: error: <kind>: <reason>``
and exit status 1 (usage), 2 (data) or 3 (numerical).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

from . import io as lio
from .core import (DataError, Deformable, HardSurface, LowgripError, ManeuverId, NumericalError, Scenario,
                   VehicleParams, min_obstacle_distance)
from .experiment import DEFAULT_SEED, ExperimentGrid, evaluate, evaluation_grid, generate_dataset, summarize
from .maps import map_to_csv, map_to_svg
from .plant import NoiseConfig, PlantConfig, rollout_maneuver, run_acceleration, synthesize_sensors
from .predictor import (
    DEFORMABLE,
    HARD,
    Dataset,
    DeformableMapGrid,
    HardMapGrid,
    UntrainedError,
    decision_map,
    default_deformable_grid,
    default_hard_grid,
    model_from_text,
    model_to_text,
    train,
)
from .replay import replay_friction, replay_terra

log = logging.getLogger("lowgrip")

SEED_ENV = "LOWGRIP_SEED"


class UsageError(LowgripError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D401 - argparse hook
        raise UsageError(message)


# ---------------------------------------------------------------------------
# config


def _floats(text: str, key: str) -> Tuple[float, ...]:
    """Comma list ``1, 2, 3`` or inclusive range ``lo:hi:n``; empty means none."""
    from .predictor import linspace

    text = text.strip()
    try:
        if not text:
            return ()
        if ":" in text:
            lo, hi, n = text.split(":")
            return linspace(float(lo), float(hi), int(n))
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise DataError(f"config key {key}: expected numbers, got {text!r}") from None


def _soils(text: str, key: str) -> Tuple[Tuple[float, float], ...]:
    out = []
    for item in (s.strip() for s in text.split(",")):
        if not item:
            continue
        try:
            c, phi = item.split("/")
            out.append((float(c), float(phi)))
        except ValueError:
            raise DataError(f"config key {key}: expected c_kpa/phi_deg pairs, got {item!r}") from None
    return tuple(out)


def _int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise DataError(f"config key {key}: expected an integer, got {text!r}") from None


def load_config(path: Optional[str]) -> Dict[str, str]:
    return lio.parse_key_values(_read(path)) if path else {}


def resolve_seed(flag: Optional[int], config: Dict[str, str]) -> int:
    """Flag, then config file, then environment, then the package default."""
    if flag is not None:
        return flag
    if "seed" in config:
        return _int(config["seed"], "seed")
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def grid_from_config(config: Dict[str, str], seed: int, prefix: str = "",
                     base: Optional[ExperimentGrid] = None) -> ExperimentGrid:
    base = base or ExperimentGrid()
    kw = {}
    for name in ("velocities", "hard_mu", "sinkages"):
        if prefix + name in config:
            kw[name] = _floats(config[prefix + name], prefix + name)
    if prefix + "soils" in config:
        kw["soils"] = _soils(config[prefix + "soils"], prefix + "soils")
    if prefix + "repetitions" in config:
        kw["repetitions"] = _int(config[prefix + "repetitions"], prefix + "repetitions")
    for name in ("v_jitter_mps", "obstacle_distance_m"):
        if prefix + name in config:
            kw[name] = _floats(config[prefix + name], prefix + name)[0]
    fields = {f: getattr(base, f) for f in ("velocities", "hard_mu", "soils", "sinkages", "repetitions",
                                            "v_jitter_mps", "obstacle_distance_m")}
    fields.update(kw)
    try:
        return ExperimentGrid(seed=seed, **fields)
    except ValueError as exc:
        raise DataError(f"grid: {exc}") from None


def map_grid_from_config(config: Dict[str, str], mode: str, z: Optional[float]):
    if mode == HARD:
        g = default_hard_grid()
        return HardMapGrid(_floats(config.get("map.v", ""), "map.v") or g.v_values,
                           _floats(config.get("map.mu", ""), "map.mu") or g.mu_values)
    g = default_deformable_grid(z if z is not None else 0.03)
    return DeformableMapGrid(_floats(config.get("map.v", ""), "map.v") or g.v_values,
                             _floats(config.get("map.c_kpa", ""), "map.c_kpa") or g.c_kpa_values,
                             _floats(config.get("map.phi_deg", ""), "map.phi_deg") or g.phi_deg_values,
                             g.sinkage_m)


# ---------------------------------------------------------------------------
# file helpers


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from None


def _ground_from_args(args) -> object:
    soil = [args.z, args.c_kpa, args.phi_deg]
    mode = args.mode or (DEFORMABLE if any(x is not None for x in soil) else HARD)
    try:
        if mode == HARD:
            return HardSurface(0.45 if args.mu is None else args.mu)
        if any(x is None for x in soil):
            raise UsageError("deformable ground needs --z, --c-kpa and --phi-deg")
        return Deformable.from_table(args.z, args.c_kpa, args.phi_deg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _maneuver(text: str) -> Optional[ManeuverId]:
    """Ordinal 1-5 or enum name; ``accel`` (or 0) selects the straight acceleration run."""
    if text.lower() in ("accel", "acceleration", "0"):
        return None
    try:
        return ManeuverId(int(text))
    except ValueError:
        pass
    try:
        return ManeuverId[text]
    except KeyError:
        raise UsageError(f"unknown maneuver {text!r}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    config = load_config(args.grid_file)
    grid = grid_from_config(config, resolve_seed(args.seed, config))
    ds = generate_dataset(grid)
    failed = sum(r.status != "ok" for r in ds.rows)
    if failed:
        log.warning("%d of %d rollouts failed; recorded with their status", failed, len(ds.rows))
    _write(args.out, lio.dataset_to_csv(ds.rows))
    return 0


def cmd_estimate(args) -> int:
    if args.mode == DEFORMABLE and args.z is None:
        raise UsageError("deformable mode requires --z")
    frames = lio.trace_from_csv(_read(args.trace))
    params = VehicleParams()
    if args.mode == HARD:
        series, _, _ = replay_friction(frames, params)
        _write(args.out, lio.friction_to_csv(series))
    else:
        if not 0.0 < args.z < params.wheel_radius_m:
            raise UsageError(f"--z must lie in (0, {params.wheel_radius_m})")
        _write(args.out, lio.terra_to_csv(replay_terra(frames, args.z, params)))
    return 0


def cmd_train(args) -> int:
    ds = Dataset(tuple(lio.dataset_from_csv(_read(args.dataset))))
    model = train(ds, selection=args.selection, drop_collinear=not args.strict)
    for mode in (HARD, DEFORMABLE):
        missing = [int(m) for m in ManeuverId if not model.trained(mode, m)]
        if missing:
            log.warning("%s regressions untrained for maneuvers %s (no usable rows)", mode, missing)
    if not model.fits:
        raise DataError("dataset has no usable rows")
    _write(args.out, model_to_text(model))
    return 0


def cmd_map(args) -> int:
    if args.out in (None, "-"):
        raise UsageError("map needs --out PREFIX (writes PREFIX.csv and PREFIX.svg)")
    model = model_from_text(_read(args.model))
    mode = args.mode or HARD
    if mode not in model.trained_modes():
        raise UntrainedError(f"{mode} mode is untrained in this model")
    config = load_config(args.grid_file)
    grid = map_grid_from_config(config, mode, args.z)
    cells = decision_map(model, grid)
    prefix = args.out[:-4] if args.out.endswith((".csv", ".svg")) else args.out
    _write(prefix + ".csv", map_to_csv(cells))
    _write(prefix + ".svg", map_to_svg(cells, grid))
    return 0


def _cell_json(c) -> Dict:
    g = c.ground
    ground = ({"kind": g.kind, "mu": g.mu} if isinstance(g, HardSurface) else
              {"kind": g.kind, "z_m": g.sinkage_m, "c_kpa": round(g.cohesion_kpa, 9),
               "phi_deg": round(g.shear_angle_deg, 9)})
    return {"v_mps": c.v_mps, "ground": ground, "oracle": int(c.oracle), "selected": int(c.selected),
            "regret_m": c.regret, "co_optimal": c.co_optimal, "held_out": c.held_out,
            "true_d_m": list(c.true_d), "predicted_d_m": list(c.predicted_d)}


def cmd_evaluate(args) -> int:
    model = model_from_text(_read(args.model))
    config = load_config(args.grid_file)
    seed = resolve_seed(args.seed, config)
    training = grid_from_config(config, seed)
    grid = grid_from_config(config, seed, prefix="eval.", base=evaluation_grid(seed))
    cells = evaluate(model, grid, training)
    if not cells:
        raise DataError("no evaluable cells (model untrained for every grid mode?)")
    report = {"summary": summarize(cells), "cells": [_cell_json(c) for c in cells], "seed": seed}
    _write(args.out, json.dumps(report, sort_keys=True, indent=1) + "\n")
    return 0


def cmd_simulate(args) -> int:
    ground = _ground_from_args(args)
    maneuver = _maneuver(args.maneuver)
    seed = resolve_seed(args.seed, {})
    params, cfg = VehicleParams(), PlantConfig()
    if maneuver is None:
        ro = run_acceleration(ground, params, cfg=cfg)
        summary = f"maneuver=accel frames={len(ro.states)}"
    else:
        try:
            scn = Scenario(2.0 if args.v0 is None else args.v0, ground)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        ro = rollout_maneuver(scn, maneuver, params, cfg=cfg)
        d = min_obstacle_distance(ro.trajectory(), scn.obstacle)
        summary = f"maneuver={int(maneuver)} frames={len(ro.states)} min_distance_m={d!r}"
    frames = synthesize_sensors(ro.states, ro.torques, NoiseConfig(rng_seed=seed), params, cfg)
    _write(args.out, lio.trace_to_csv(frames))
    if args.out not in (None, "-"):
        print(summary)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lowgrip", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, out_help="output file (default: stdout)"):
        sp.add_argument("--out", help=out_help)
        sp.add_argument("--seed", type=int, help=f"RNG seed (default: ${SEED_ENV} or {DEFAULT_SEED})")
        sp.add_argument("--grid-file", help="key = value config overriding grid defaults")

    sp = sub.add_parser("generate", help="run the scenario grid, write the dataset CSV")
    common(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("estimate", help="replay a sensor trace through observer and estimator")
    sp.add_argument("trace")
    sp.add_argument("--mode", choices=(HARD, DEFORMABLE), required=True)
    sp.add_argument("--z", type=float, help="sinkage [m], required in deformable mode")
    common(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("train", help="fit per-maneuver regressions from a dataset")
    sp.add_argument("dataset")
    sp.add_argument("--selection", choices=("argmax", "argmin"), default="argmax")
    sp.add_argument("--strict", action="store_true", help="fail on collinear basis columns instead of dropping")
    common(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("map", help="decision map CSV and SVG")
    sp.add_argument("model")
    sp.add_argument("--mode", choices=(HARD, DEFORMABLE))
    sp.add_argument("--z", type=float, help="sinkage [m] for the deformable map (default 0.03)")
    common(sp, "output prefix; writes PREFIX.csv and PREFIX.svg")
    sp.set_defaults(func=cmd_map)

    sp = sub.add_parser("evaluate", help="compare model choices with brute-force rollouts")
    sp.add_argument("model")
    common(sp, "JSON report (default: stdout)")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("simulate", help="single rollout, sensor trace dump")
    sp.add_argument("--mode", choices=(HARD, DEFORMABLE))
    sp.add_argument("--v0", type=float, help="initial speed [m/s] (default 2)")
    sp.add_argument("--mu", type=float, help="hard-ground friction (default 0.45)")
    sp.add_argument("--z", type=float)
    sp.add_argument("--c-kpa", type=float)
    sp.add_argument("--phi-deg", type=float)
    sp.add_argument("--maneuver", default="1", help="1-5, maneuver name, or 'accel'")
    common(sp)
    sp.set_defaults(func=cmd_simulate)
    return p


_KINDS = {1: "usage", 2: "data", 3: "numerical"}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("missing command (generate, estimate, train, map, evaluate, simulate)")
        return args.func(args)
    except LowgripError as exc:
        code, err = exc.exit_code, exc
    except (FloatingPointError, ZeroDivisionError, OverflowError) as exc:
        code, err = NumericalError.exit_code, exc
    reason = " ".join(str(err).split()) or type(err).__name__
    print(f"lowgrip: error: {_KINDS[code]}: {reason}", file=sys.stderr)
    return code
