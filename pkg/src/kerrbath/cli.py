"""Command-line driver: configuration, figure presets and output files.

Usage examples::

    kerrbath --preset fig2b --out-dir out/fig2b
    kerrbath --spectrum subohmic --gamma 0.3 --cutoff 1 --mode both --bath-modes 2000
    kerrbath --config run.yaml --h 0.01

Settings are layered: built-in defaults, then the config file, then flags.
Exit status is 0 on success, 2 for configuration errors and 3 for
numerical failures (partial outputs are flagged in the metadata file).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

import yaml

from . import __version__, spectra
from .discrete_oracle import (default_omega_max, discretize_bath, oracle_eta,
                              truncation_report)
from .errors import ConvergenceError, DomainError, InstabilityError
from .greens import solve_greens, write_greens_csv
from .nonlinearity import EtaSeries, eta_series
from .spectra import BathSpectrum

__all__ = ["RunConfig", "validate", "run", "main", "load_config", "expand_curves",
           "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERICAL"]

log = logging.getLogger("kerrbath")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

PRESETS = {"fig2a": 1.0, "fig2b": 100.0}
PRESET_GAMMA = 0.3
KINDS = ("subohmic", "ohmic", "superohmic", "general")
MODES = ("continuum", "oracle", "both")
CSV_HEADER = ["t", "eta", "eta_unitary", "eta_bath", "eta_closed"]

# settings that reproduce the reference figure curves (see README)
FIGURE_CONVENTION = "unit"
FIGURE_NORMALIZATION = "printed"


@dataclass
class RunConfig:
    """Flat run configuration.

    ``convention`` and ``kernel_normalization`` may be left ``None``: presets
    then use the figure settings and single runs the defaults
    (``two-over-pi`` and ``exact``).
    """

    preset: Optional[str] = None
    kind: str = "ohmic"
    k: Optional[float] = None
    gamma: float = 0.3
    cutoff: float = 1.0
    g0: float = 1.0
    t_max: float = 20.0
    h: float = 0.02
    mode: str = "continuum"
    bath_modes: Optional[int] = None
    omega_max: Optional[float] = None
    convention: Optional[str] = None
    kernel_normalization: Optional[str] = None
    tol: float = 0.02
    greens_tol: float = 1e-8
    out_dir: str = "out"
    omega_m_hz: Optional[float] = None
    workers: int = 1
    dump_greens: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    def resolved_convention(self) -> str:
        if self.convention is not None:
            return self.convention
        return FIGURE_CONVENTION if self.preset else "two-over-pi"

    def resolved_normalization(self) -> str:
        if self.kernel_normalization is not None:
            return self.kernel_normalization
        return FIGURE_NORMALIZATION if self.preset else "exact"


_FIELDS = {f.name for f in fields(RunConfig)}
_ALIASES = {"spectrum": "kind", "tmax": "t_max", "bath_coupling_convention": "convention",
            "n": "bath_modes", "normalization": "kernel_normalization",
            "eta_tol": "tol"}


def _normalize_key(key: str) -> str:
    key = str(key).strip().lower().replace("-", "_")
    return _ALIASES.get(key, key)


_FLOAT_KEYS = {"k", "gamma", "cutoff", "g0", "t_max", "h", "omega_max", "tol",
               "greens_tol", "omega_m_hz"}
_INT_KEYS = {"bath_modes", "workers"}


def _coerce(name: str, value):
    """Convert scalar text from the config file to the field's type."""
    if value is None:
        return None
    try:
        if name in _FLOAT_KEYS:
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if name in _INT_KEYS:
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise ValueError
            return int(float(value))
        if name == "dump_greens":
            if not isinstance(value, bool):
                raise ValueError
            return value
    except (TypeError, ValueError):
        raise DomainError(f"config key {name!r} has an invalid value {value!r}") from None
    value = str(value)
    if name == "preset" and value.lower() == "none":
        return None
    return value


def load_config(path) -> dict:
    """Read a flat key-value file (YAML, hence also JSON) into a dict of overrides."""
    text = Path(path).read_text()
    data = yaml.safe_load(text) if text.strip() else {}
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise DomainError("config file must contain a flat mapping of keys to values")
    out = {}
    for key, value in data.items():
        name = _normalize_key(key)
        if name not in _FIELDS:
            raise DomainError(f"unknown config key {key!r}")
        if isinstance(value, (dict, list)):
            raise DomainError(f"config key {key!r} must hold a scalar value")
        out[name] = _coerce(name, value)
    return out


def _positive(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) \
        and math.isfinite(value) and value > 0


def validate(config: RunConfig) -> list[str]:
    """Human-readable problems with ``config``; empty means runnable."""
    problems = []
    if config.preset not in (None, "none", *PRESETS):
        problems.append(f"preset must be one of none, {', '.join(PRESETS)}")
    if config.kind not in KINDS:
        problems.append(f"spectrum kind must be one of {', '.join(KINDS)}")
    if config.kind == "general" and not _positive(config.k):
        problems.append("general spectrum needs a positive exponent k")
    if config.k is not None and not _positive(config.k):
        problems.append("k must be positive")
    if not (isinstance(config.gamma, (int, float)) and math.isfinite(config.gamma)
            and config.gamma >= 0):
        problems.append("gamma must be non-negative")
    if not _positive(config.cutoff):
        problems.append("cutoff must be positive")
    if not (isinstance(config.g0, (int, float)) and math.isfinite(config.g0)):
        problems.append("g0 must be a finite number")
    if not _positive(config.t_max):
        problems.append("t_max must be positive")
    if not _positive(config.h):
        problems.append("h must be positive")
    elif config.h > 0.05:
        problems.append("h must not exceed 0.05")
    elif _positive(config.t_max) and config.t_max < config.h:
        problems.append("t_max must be at least one step h")
    elif _positive(config.t_max) and abs(round(config.t_max / config.h) * config.h
                                         - config.t_max) > 1e-9 * config.t_max:
        problems.append("t_max must be a whole multiple of h")
    if config.mode not in MODES:
        problems.append(f"mode must be one of {', '.join(MODES)}")
    if config.mode in ("oracle", "both"):
        if config.bath_modes is None:
            problems.append("oracle mode needs the number of bath modes (--bath-modes N)")
        elif isinstance(config.bath_modes, bool) or not isinstance(config.bath_modes, int) \
                or config.bath_modes < 2:
            problems.append("bath_modes must be an integer >= 2")
    if config.omega_max is not None and not _positive(config.omega_max):
        problems.append("omega_max must be positive")
    if config.convention is not None and config.convention not in spectra.COUPLING_CONVENTIONS:
        problems.append(f"convention must be one of {', '.join(spectra.COUPLING_CONVENTIONS)}")
    if config.kernel_normalization is not None and \
            config.kernel_normalization not in spectra.KERNEL_NORMALIZATIONS:
        problems.append("kernel_normalization must be exact or printed")
    if not _positive(config.tol):
        problems.append("tol must be positive")
    if not _positive(config.greens_tol):
        problems.append("greens_tol must be positive")
    if config.omega_m_hz is not None and not _positive(config.omega_m_hz):
        problems.append("omega_m_hz must be positive")
    if isinstance(config.workers, bool) or not isinstance(config.workers, int) \
            or config.workers < 1:
        problems.append("workers must be a positive integer")
    return problems


def expand_curves(config: RunConfig) -> list[tuple[str, BathSpectrum]]:
    """Named spectra to compute; presets give the closed curve plus three kinds."""
    if config.preset in PRESETS:
        cutoff = PRESETS[config.preset]
        curves = [("closed", BathSpectrum(1.0, 0.0, cutoff))]
        for kind in ("subohmic", "ohmic", "superohmic"):
            curves.append((kind, spectra.preset(kind, PRESET_GAMMA, cutoff)))
        return curves
    if config.kind == "general":
        spec = BathSpectrum(float(config.k), float(config.gamma), float(config.cutoff))
    else:
        spec = spectra.preset(config.kind, float(config.gamma), float(config.cutoff))
    name = "closed" if spec.gamma == 0 else config.kind
    return [(name, spec)]


# ---------------------------------------------------------------------------
# computation
# ---------------------------------------------------------------------------

def _write_csv(series: EtaSeries, path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in series.rows():
            writer.writerow([repr(float(x)) for x in row])


def _curve_task(args) -> dict:
    """Compute one curve; returns a picklable summary with the series."""
    name, spec, config = args
    convention = config.resolved_convention()
    normalization = config.resolved_normalization()
    result = {"name": name, "spec": spec.to_dict(), "status": "ok", "series": {},
              "diagnostics": {}}
    started = time.perf_counter()
    try:
        if config.mode in ("continuum", "both"):
            table = solve_greens(spec, config.t_max, config.h, config.greens_tol,
                                 convention=convention)
            series = eta_series(table, spec, config.g0, convention=convention,
                                normalization=normalization, tol=config.tol)
            result["series"]["continuum"] = series
            result["diagnostics"]["continuum"] = dict(series.grid_meta)
            if config.dump_greens:
                result["greens"] = table
        if config.mode in ("oracle", "both"):
            omega_max = config.omega_max or default_omega_max(spec)
            bath = discretize_bath(spec, config.bath_modes, omega_max, convention)
            times = [i * config.h for i in range(int(round(config.t_max / config.h)) + 1)]
            series = oracle_eta(bath, config.g0, times, h=config.h)
            result["series"]["oracle"] = series
            result["diagnostics"]["oracle"] = dict(series.grid_meta)
            result["diagnostics"]["truncation"] = truncation_report(bath)
    except (ConvergenceError, InstabilityError) as exc:
        result["status"] = "failed"
        result["error"] = f"{type(exc).__name__}: {exc}"
    result["wall_time_s"] = time.perf_counter() - started
    return result


def run(config: RunConfig) -> int:
    """Execute a validated configuration and write outputs.

    Returns the process exit status.
    """
    problems = validate(config)
    if problems:
        for p in problems:
            log.error("config: %s", p)
        return EXIT_CONFIG
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    curves = expand_curves(config)
    tasks = [(name, spec, config) for name, spec in curves]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_curve_task, tasks))
    else:
        results = [_curve_task(t) for t in tasks]

    meta_curves = []
    failed = False
    for res in results:
        files = []
        for label, series in res["series"].items():
            suffix = "" if label == "continuum" else "_oracle"
            path = out_dir / f"eta_{res['name']}{suffix}.csv"
            _write_csv(series, path)
            files.append(path.name)
        if "greens" in res:
            path = write_greens_csv(res["greens"], out_dir / f"greens_{res['name']}.csv")
            files.append(path.name)
        failed |= res["status"] != "ok"
        entry = {k: v for k, v in res.items() if k not in ("series", "greens")}
        entry["files"] = files
        meta_curves.append(entry)
        log.info("curve %s: %s (%.1f s)", res["name"], res["status"], res["wall_time_s"])

    meta = {
        "artifact": "kerrbath",
        "version": __version__,
        "status": "failed" if failed else "ok",
        "partial": failed,
        "config": config.to_dict(),
        "resolved": {"convention": config.resolved_convention(),
                     "kernel_normalization": config.resolved_normalization(),
                     "convention_factor": spectra.convention_factor(
                         config.resolved_convention())},
        "units": {"dimensionless": True, "omega_m_hz": config.omega_m_hz,
                  "time_unit_s": (None if config.omega_m_hz is None
                                  else 1.0 / (2.0 * math.pi * config.omega_m_hz))},
        "curves": meta_curves,
        "wall_time_s": time.perf_counter() - started,
    }
    (out_dir / "metadata.json").write_text(json.dumps(meta, indent=2, default=_jsonable) + "\n")
    return EXIT_NUMERICAL if failed else EXIT_OK


def _jsonable(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="kerrbath",
        description="Optomechanical self-Kerr nonlinearity under quantum Brownian motion.")
    p.add_argument("--config", help="flat key-value YAML/JSON file; flags override it")
    p.add_argument("--preset", choices=["none", *PRESETS])
    p.add_argument("--spectrum", dest="kind", choices=KINDS)
    p.add_argument("--k", type=float, help="exponent for --spectrum general")
    p.add_argument("--gamma", type=float)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--g0", type=float)
    p.add_argument("--tmax", dest="t_max", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--bath-modes", dest="bath_modes", type=int)
    p.add_argument("--omega-max", dest="omega_max", type=float)
    p.add_argument("--convention", choices=list(spectra.COUPLING_CONVENTIONS))
    p.add_argument("--kernel-normalization", dest="kernel_normalization",
                   choices=list(spectra.KERNEL_NORMALIZATIONS))
    p.add_argument("--tol", type=float, help="relative step-doubling tolerance for eta")
    p.add_argument("--greens-tol", dest="greens_tol", type=float)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--omega-m-hz", dest="omega_m_hz", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--dump-greens", dest="dump_greens", action="store_const", const=True)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(argv=None) -> tuple[RunConfig, argparse.Namespace]:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        values.update(load_config(args.config))
    for name in _FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    if values.get("preset") == "none":
        values["preset"] = None
    return replace(RunConfig(), **values), args


def main(argv=None) -> int:
    try:
        config, args = config_from_args(argv)
    except (DomainError, OSError, yaml.YAMLError, TypeError) as exc:
        print(f"kerrbath: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    problems = validate(config)
    if problems:
        for p in problems:
            print(f"kerrbath: config error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
