"""Command-line front end.

Each subcommand reads a sectioned INI file and writes three files into the
output directory: ``<name>.report.json``, ``<name>.csv`` and
``<name>.manifest``. Exit codes: 0 success, 2 configuration error,
3 quadrature did not reach its error target, 4 causality filter rejection.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import logging
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .correlators import Dressing, FormulaMode
from .kernel import SingularPointError
from .quad import THREADS_ENV, Backend, BilinearCache, QuadSettings
from .search import (
    DEFAULT_RANGES,
    FilterStatus,
    SearchConfig,
    evaluate_chsh,
    evaluate_cluster,
    evaluate_mermin,
    extrapolate_massless,
    mass_sweep,
    random_search,
)
from .specfun import regime_constants
from .testfn import BellParameters, ClusterParameters, MerminParameters

__all__ = ["main", "ConfigError", "EXIT_OK", "EXIT_CONFIG", "EXIT_NONCONVERGED", "EXIT_REJECTED"]

log = logging.getLogger("bellqft")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGED = 3
EXIT_REJECTED = 4

BELL_KEYS = ("a", "eta", "b", "sigma", "a_prime", "eta_prime", "b_prime", "sigma_prime", "m", "R", "R_prime")
MERMIN_EXTRA = ("p", "p_prime", "zeta", "zeta_prime")
CLUSTER_KEYS = ("a", "eta", "p", "zeta", "R", "m")
QUAD_KEYS = ("backend", "points_per_axis", "sample_count", "lightcone_clamp", "seed", "target_rel_error", "cache")


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config


def load_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (R vs r)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return cp


def config_hash(cp: configparser.ConfigParser) -> str:
    """SHA-256 of the config with sections and keys sorted and values stripped."""
    canon = {s: {k: cp[s][k].strip() for k in sorted(cp[s])} for s in sorted(cp.sections())}
    blob = json.dumps(canon, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _float(section, key):
    raw = section.get(key)
    if raw is None:
        raise ConfigError(f"[{section.name}] missing key {key!r}")
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key} = {raw!r} is not a number") from None
    if not math.isfinite(value):
        raise ConfigError(f"[{section.name}] {key} must be finite")
    return value


def _section(cp, name):
    if not cp.has_section(name):
        raise ConfigError(f"missing section [{name}]")
    return cp[name]


def _check_keys(section, allowed):
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"[{section.name}] unknown key(s): {', '.join(unknown)}")


def _build(factory, **kw):
    try:
        return factory(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def read_bell(section) -> BellParameters:
    return _build(BellParameters, **{k: _float(section, k) for k in BELL_KEYS})


def read_mermin(section) -> MerminParameters:
    _check_keys(section, BELL_KEYS + MERMIN_EXTRA + ("d", "d_prime"))
    vals = {k: _float(section, k) for k in BELL_KEYS + MERMIN_EXTRA}
    vals["d"] = _float(section, "d") if "d" in section else 2.0 * vals["R"]
    vals["d_prime"] = _float(section, "d_prime") if "d_prime" in section else 2.0 * vals["R"]
    return _build(MerminParameters, **vals)


def read_cluster(section) -> ClusterParameters:
    _check_keys(section, CLUSTER_KEYS + ("d", "h_center"))
    vals = {k: _float(section, k) for k in CLUSTER_KEYS}
    if "d" in section:
        vals["d"] = _float(section, "d")
    elif "h_center" in section:
        # gap between [0, 2R] and [c - R, c + R]
        vals["d"] = _float(section, "h_center") - 3.0 * vals["R"]
    else:
        raise ConfigError(f"[{section.name}] needs d or h_center")
    return _build(ClusterParameters, **vals)


def read_quadrature(cp, threads=None) -> tuple:
    if not cp.has_section("quadrature"):
        return _build(QuadSettings, workers=threads), None
    sec = cp["quadrature"]
    _check_keys(sec, QUAD_KEYS)
    kw = {}
    if "backend" in sec:
        try:
            kw["backend"] = Backend(sec["backend"].strip())
        except ValueError:
            raise ConfigError(f"[quadrature] unknown backend {sec['backend']!r}") from None
    for key in ("points_per_axis", "sample_count", "seed"):
        if key in sec:
            try:
                kw[key] = int(sec[key])
            except ValueError:
                raise ConfigError(f"[quadrature] {key} must be an integer") from None
    for key in ("lightcone_clamp", "target_rel_error"):
        if key in sec:
            kw[key] = _float(sec, key)
    kw["workers"] = threads
    settings = _build(QuadSettings, **kw)
    cache = sec.get("cache")
    return settings, (cache.strip() if cache else None)


def read_search(cp, settings, threads=None) -> SearchConfig:
    sec = _section(cp, "search")
    allowed = {"target", "sample_count", "seed", "top_k", "mass_min", "mass_max", "d_min", "d_max",
               "formula_mode", "dressing"} | set(DEFAULT_RANGES)
    _check_keys(sec, allowed)
    ranges = {}
    for name in DEFAULT_RANGES:
        if name in sec:
            parts = [p.strip() for p in sec[name].split(",")]
            try:
                lo, hi = (float(p) for p in parts)
            except ValueError:
                raise ConfigError(f"[search] {name} must be 'lo, hi'") from None
            ranges[name] = (lo, hi)
    kw = dict(
        target=sec.get("target", "chsh").strip(),
        sample_count=int(sec.get("sample_count", "100000")),
        seed=int(sec.get("seed", "0")),
        top_k=int(sec.get("top_k", "10")),
        ranges=ranges,
        mass_range=(float(sec.get("mass_min", "1e-8")), float(sec.get("mass_max", "1.0"))),
        settings=settings,
        workers=threads,
    )
    if "d_min" in sec or "d_max" in sec:
        kw["d_range"] = (_float(sec, "d_min"), _float(sec, "d_max"))
    if "formula_mode" in sec:
        kw["formula_mode"] = sec["formula_mode"].strip()
    if "dressing" in sec:
        kw["dressing"] = sec["dressing"].strip()
    return _build(SearchConfig, **kw)


# ---------------------------------------------------------------------------
# outputs


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def _fmt(v):
    # full round-trip precision, '.' decimal separator regardless of locale
    if isinstance(v, float):
        return repr(v)
    return v


class Run:
    """Output sink for one command invocation."""

    def __init__(self, args, command, cp=None):
        self.command = command
        self.name = args.name or command
        self.out = Path(args.out)
        self.cp = cp
        self.start = time.time()
        self.manifest_extra = {}

    def path(self, suffix):
        return self.out / f"{self.name}{suffix}"

    def write_report(self, report: dict):
        self.out.mkdir(parents=True, exist_ok=True)
        with open(self.path(".report.json"), "w", encoding="utf-8") as fh:
            json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, header, rows):
        self.out.mkdir(parents=True, exist_ok=True)
        with open(self.path(".csv"), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(row.get(h, "")) for h in header])

    def write_manifest(self, settings=None, mode=None, dressing=None, cache=None, seed=None):
        self.out.mkdir(parents=True, exist_ok=True)
        man = {
            "tool": "bellqft",
            "version": __version__,
            "command": self.command,
            "config_hash": config_hash(self.cp) if self.cp is not None else None,
            "config": {s: dict(self.cp[s]) for s in self.cp.sections()} if self.cp is not None else None,
            "seed": seed if seed is not None else (settings.seed if settings else None),
            "quadrature": settings.as_dict() if settings else None,
            "formula_mode": mode.value if mode else None,
            "dressing": dressing.value if dressing else None,
            "specfun": regime_constants(),
            "wall_clock_seconds": time.time() - self.start,
            "cache": cache.stats() if cache is not None else None,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        }
        man.update(self.manifest_extra)
        with open(self.path(".manifest"), "w", encoding="utf-8") as fh:
            json.dump(_jsonable(man), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _mode_and_dressing(args, default_dressing):
    mode = FormulaMode.PRINTED if args.printed else FormulaMode.DERIVED
    dressing = Dressing(args.dressing) if args.dressing else default_dressing
    return mode, dressing


def _report_dict(ev, params):
    rec = ev.report.as_record()
    rec["converged"] = ev.converged
    rec["parameters"] = params.as_dict()
    return rec


# ---------------------------------------------------------------------------
# commands


def cmd_chsh(args) -> int:
    cp = load_config(args.config)
    sec = _section(cp, "bell")
    _check_keys(sec, BELL_KEYS)
    params = read_bell(sec)
    settings, cache_path = read_quadrature(cp, args.threads)
    cache = BilinearCache(cache_path)
    mode, dressing = _mode_and_dressing(args, Dressing.UNIFORM)
    ev = evaluate_chsh(params, settings, cache, mode, dressing)
    run = Run(args, "chsh", cp)
    report = _report_dict(ev, params)
    run.write_report(report)
    row = {"value": ev.value, "bound_check": ev.report.bound_check.value, "converged": ev.converged}
    row.update(params.as_dict())
    run.write_csv(["value", "bound_check", "converged", *BELL_KEYS], [row])
    run.write_manifest(settings, mode, dressing, cache)
    print(f"<C> = {ev.value!r} ({ev.report.bound_check.value})")
    return EXIT_OK if ev.converged else EXIT_NONCONVERGED


def cmd_mermin(args) -> int:
    cp = load_config(args.config)
    params = read_mermin(_section(cp, "mermin"))
    settings, cache_path = read_quadrature(cp, args.threads)
    cache = BilinearCache(cache_path)
    mode, dressing = _mode_and_dressing(args, Dressing.ALTERNATING)
    ev = evaluate_mermin(params, settings, cache, mode, dressing)
    run = Run(args, "mermin", cp)
    status = ev.filter.status
    if ev.report is None:
        report = {"filter_status": status.value, "parameters": params.as_dict(), "value": None}
        value = None
    else:
        report = _report_dict(ev, params)
        report["filter_tolerances"] = ev.filter.tolerances
        value = ev.value
    run.write_report(report)
    row = {"value": "" if value is None else value, "filter_status": status.value,
           "converged": ev.converged}
    row.update(params.as_dict())
    keys = BELL_KEYS + MERMIN_EXTRA + ("d", "d_prime")
    run.write_csv(["value", "filter_status", "converged", *keys], [row])
    run.write_manifest(settings, mode, dressing, cache)
    if status is not FilterStatus.ACCEPTED:
        print(f"filter rejected the configuration: {status.value}", file=sys.stderr)
        return EXIT_REJECTED
    print(f"<M3> = {value!r} ({ev.report.bound_check.value})")
    return EXIT_OK if ev.converged else EXIT_NONCONVERGED


def cmd_cluster(args) -> int:
    cp = load_config(args.config)
    params = read_cluster(_section(cp, "cluster"))
    settings, cache_path = read_quadrature(cp, args.threads)
    cache = BilinearCache(cache_path)
    _, dressing = _mode_and_dressing(args, Dressing.ALTERNATING)
    ev = evaluate_cluster(params, settings, cache, dressing)
    run = Run(args, "cluster", cp)
    run.write_report(_report_dict(ev, params))
    run.write_csv(["C_cluster", "m", "d"], [{"C_cluster": ev.value, "m": params.m, "d": params.d}])
    run.write_manifest(settings, FormulaMode.DERIVED, dressing, cache)
    print(f"C_cluster = {ev.value!r}")
    return EXIT_OK if ev.converged else EXIT_NONCONVERGED


SEARCH_FIELDS = {
    "chsh": ("a", "eta", "b", "sigma", "a_prime", "eta_prime", "b_prime", "sigma_prime", "m", "R", "R_prime"),
    "mermin3": BELL_KEYS + MERMIN_EXTRA + ("d", "d_prime"),
    "cluster": ("a", "eta", "p", "zeta", "R", "m", "d"),
}


def cmd_search(args) -> int:
    cp = load_config(args.config)
    settings, cache_path = read_quadrature(cp, args.threads)
    cfg = read_search(cp, settings, args.threads)
    cache = BilinearCache(cache_path)
    outcome = random_search(cfg, cache)
    run = Run(args, "search", cp)
    header = ["rank", "index", "value", *SEARCH_FIELDS[cfg.target]]
    rows = []
    for rank, rec in enumerate(outcome.records, 1):
        row = {"rank": rank, "index": rec.index, "value": rec.value}
        row.update(rec.params)
        rows.append(row)
    run.write_csv(header, rows)
    run.write_report({"target": cfg.target, "counts": outcome.counts, "records": rows})
    run.manifest_extra["counts"] = outcome.counts
    run.write_manifest(settings, cfg.formula_mode, cfg.resolved_dressing(), cache, seed=cfg.seed)
    best = rows[0]["value"] if rows else None
    print(f"{outcome.counts}; best = {best!r}")
    return EXIT_OK


def cmd_mass_sweep(args) -> int:
    cp = load_config(args.config)
    sections = [s for s in cp.sections() if s == "bell" or s.startswith("bell.")]
    if not sections:
        raise ConfigError("mass-sweep needs at least one [bell] or [bell.<tag>] section")
    entries = []
    for s in sections:
        _check_keys(cp[s], BELL_KEYS)
        entries.append(read_bell(cp[s]))
    settings, cache_path = read_quadrature(cp, args.threads)
    cache = BilinearCache(cache_path)
    _, dressing = _mode_and_dressing(args, Dressing.UNIFORM)
    points = mass_sweep(entries, settings, cache, dressing)
    run = Run(args, "mass_sweep", cp)
    rows = [{"m": m, "inv_log_m": 1.0 / abs(math.log(m)), "C": v} for m, v in points]
    run.write_csv(["m", "inv_log_m", "C"], rows)
    report = {"points": rows}
    if len(points) >= 3:
        try:
            intercept, coef = extrapolate_massless(points, args.degree)
        except ValueError as exc:
            report["extrapolation_error"] = str(exc)
        else:
            report["extrapolation"] = {"degree": args.degree, "intercept": intercept,
                                       "coefficients": [float(c) for c in coef]}
            print(f"m -> 0 intercept: {intercept!r}")
    run.write_report(report)
    run.write_manifest(settings, FormulaMode.DERIVED, dressing, cache)
    for r in rows:
        print(f"m = {r['m']!r}: <C> = {r['C']!r}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_checks

    if args.clamp is not None:
        try:
            QuadSettings(lightcone_clamp=args.clamp)
        except SingularPointError as exc:
            print(f"FAIL clamp: singular-point error: {exc}")
            return EXIT_CONFIG
    cache = BilinearCache(args.cache) if args.cache else BilinearCache()
    if cache.corrupt_lines:
        print(f"WARN cache: {cache.corrupt_lines} malformed line(s) ignored")
    results = run_checks(cache=cache)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    failed = sum(1 for _, ok, _ in results if not ok)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else 1


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bellqft", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, dressing=True, printed=False):
        sp.add_argument("config", help="INI configuration file")
        sp.add_argument("--out", default=".", help="output directory (default: .)")
        sp.add_argument("--name", default=None, help="run name used for output files")
        sp.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or all cores)")
        if dressing:
            sp.add_argument("--dressing", choices=[d.value for d in Dressing], default=None)
        if printed:
            sp.add_argument("--printed", action="store_true", help="use the printed closed form")
        else:
            sp.set_defaults(printed=False)

    common(sub.add_parser("chsh", help="Bell-CHSH correlator"), printed=True)
    common(sub.add_parser("mermin", help="Mermin-3 correlator"), printed=True)
    common(sub.add_parser("cluster", help="cluster-property quantity"))
    sp = sub.add_parser("search", help="random parameter search")
    common(sp, dressing=False)
    sp = sub.add_parser("mass-sweep", help="CHSH against mass with m -> 0 extrapolation")
    common(sp)
    sp.add_argument("--degree", type=int, default=2, help="polynomial degree in 1/|ln m|")
    sp = sub.add_parser("verify", help="run the invariant suite")
    sp.add_argument("--clamp", type=float, default=None, help="light-cone clamp to validate")
    sp.add_argument("--cache", default=None, help="cache file to load")
    return p


COMMANDS = {
    "chsh": cmd_chsh,
    "mermin": cmd_mermin,
    "cluster": cmd_cluster,
    "search": cmd_search,
    "mass-sweep": cmd_mass_sweep,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
