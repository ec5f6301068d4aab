"""Command-line entry point: ``sgpe run``, ``sgpe study`` and ``sgpe selftest``.

Exit codes: 0 success, 1 selftest failure, 2 configuration error,
3 runtime (numerical) error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from .config import (
    INITIAL_KEYS,
    RUN_KEYS,
    SCHEME_KEYS,
    STUDY_KEYS,
    ConfigParseError,
    jsonable,
    config_hash,
    initial_from_dict,
    parse_config_file,
    parse_override,
    scheme_config_from_dict,
    scheme_config_to_dict,
)
from .errors import ConfigurationError, NumericalError, SGPEError
from .experiments import (
    PRESET_NAMES,
    ROW_COLUMNS,
    ErrorNorm,
    StudyConfig,
    StudyKind,
    preset,
    run_study,
    study_config_to_dict,
)
from .schemes import GridState, SchemeConfig, evolve, initial_state
from .selftest import FAULTS, run_batteries
from .stochastic import generate_path

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SELFTEST_BUDGET_S = 60.0

RUN_ALLOWED = {**SCHEME_KEYS, **INITIAL_KEYS, **RUN_KEYS}
STUDY_ALLOWED = {
    **SCHEME_KEYS,
    **INITIAL_KEYS,
    **STUDY_KEYS,
    "seed": RUN_KEYS["seed"],
    "preset": (str, None),
    "scale": (str, None),
}
TRAJECTORY_COLUMNS = ("step", "t", "l2_norm_sq", "sigma1_norm_sq", "fp_iters", "chi")


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:  # pragma: no cover - running from a source tree
        return "0+unknown"


def _fmt(value) -> str:
    """CSV cell text: floats with 17 significant digits, None as empty."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _out_dir(args) -> Path:
    root = args.out or os.environ.get("SGPE_OUT_DIR") or "."
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _gather(args, allowed: dict) -> dict:
    values = parse_config_file(args.config, allowed) if args.config else {}
    for text in args.override or ():
        try:
            key, value = parse_override(text, allowed)
        except ConfigParseError as exc:
            raise ConfigParseError(f"--override {text!r}: {exc}") from None
        values[key] = value
    if args.seed is not None:
        values["seed"] = args.seed
    return values


def _write_manifest(path: Path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# run


def cmd_run(args) -> int:
    values = _gather(args, RUN_ALLOWED)
    cfg = scheme_config_from_dict(values, SchemeConfig())
    init = initial_from_dict(values)
    seed = values.get("seed", 0)
    resolved = {"scheme": scheme_config_to_dict(cfg), "initial": init.to_dict(), "seed": seed}
    digest = config_hash(resolved)
    out = _out_dir(args)
    stem = f"run-{digest[:12]}"

    t0 = time.perf_counter()
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    path = generate_path(seed, cfg.T, cfg.dt)
    tr = evolve(cfg, path, initial_state(cfg, init))

    outputs = []
    csv_path = out / f"{stem}.csv"
    _write_csv(csv_path, TRAJECTORY_COLUMNS,
               zip(range(tr.n_steps + 1), tr.t, tr.l2_norm_sq, tr.sigma1_norm_sq, tr.fp_iters, tr.chi))
    outputs.append(csv_path.name)
    if values.get("dump_final"):
        final_path = out / f"{stem}.final.csv"
        if isinstance(tr.final, GridState):
            rows = zip(tr.final.x, tr.final.values.real, tr.final.values.imag)
            header = ("x", "re", "im")
        else:
            rows = zip(range(tr.final.size), tr.final.real, tr.final.imag)
            header = ("mode", "re", "im")
        _write_csv(final_path, header, rows)
        outputs.append(final_path.name)

    manifest = {
        "command": "run",
        "artifact_version": _version(),
        "config": resolved,
        "config_hash": digest,
        "seed": seed,
        "n_steps": tr.n_steps,
        "stopping_index": tr.stopping_index,
        "outputs": outputs,
        "started": started,
        "wall_clock_s": round(time.perf_counter() - t0, 3),
    }
    _write_manifest(out / f"{stem}.manifest.json", manifest)
    print(f"wrote {', '.join(str(out / o) for o in outputs)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# study


def _study_config(values: dict, args) -> StudyConfig:
    name = args.preset or values.get("preset")
    scale = args.scale or values.get("scale", "desk")
    if name:
        base_study = preset(name, scale)
    elif "kind" not in values or "ladder" not in values:
        raise ConfigParseError("a study needs either a preset or both 'kind' and 'ladder'")
    else:
        base_study = None

    base = scheme_config_from_dict(values, base_study.base if base_study else SchemeConfig())
    init = initial_from_dict(values, base_study.initial if base_study else None)
    kwargs = {} if base_study is None else {
        k: getattr(base_study, k) for k in (
            "kind", "ladder", "n_samples", "error_norm", "seed", "schemes", "k_values",
            "n_steps_values", "lx_values", "alpha_values", "eval_points", "reference_scheme")
    }
    if base_study is not None and ("K" in values or "alpha" in values or "Lx" in values):
        # explicit scalar settings replace the preset's lists derived from them
        if "K" in values:
            kwargs["k_values"] = ()
        if "alpha" in values:
            kwargs["alpha_values"] = ()
        if "Lx" in values:
            kwargs["lx_values"] = ()
    for key in STUDY_KEYS:
        if key in values:
            kwargs[key] = values[key]
    if "seed" in values:
        kwargs["seed"] = values["seed"]
    try:
        if "kind" in kwargs:
            kwargs["kind"] = StudyKind(getattr(kwargs["kind"], "value", kwargs["kind"]).upper())
        if "error_norm" in kwargs:
            kwargs["error_norm"] = ErrorNorm(getattr(kwargs["error_norm"], "value", kwargs["error_norm"]).upper())
    except ValueError as exc:
        raise ConfigParseError(str(exc)) from None
    try:
        return StudyConfig(base=base, initial=init, **kwargs)
    except ConfigurationError as exc:
        raise ConfigParseError(str(exc)) from None


def _default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - platforms without affinity
        return os.cpu_count() or 1


def cmd_study(args) -> int:
    values = _gather(args, STUDY_ALLOWED)
    scfg = _study_config(values, args)
    digest = config_hash(study_config_to_dict(scfg))
    out = _out_dir(args)
    stem = f"study-{scfg.kind.value.lower()}-{digest[:12]}"
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    if jobs < 1:
        raise ConfigParseError("--jobs must be at least 1")

    t0 = time.perf_counter()
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    result = run_study(scfg, jobs=jobs)
    csv_path = out / f"{stem}.csv"
    _write_csv(csv_path, ROW_COLUMNS, ([row[c] for c in ROW_COLUMNS] for row in result.rows))
    fits = {
        "|".join(_fmt(k) for k in key): (fit._asdict() if hasattr(fit, "_asdict") else {"error": fit})
        for key, fit in result.fits.items()
    }
    manifest = {
        "command": "study",
        "artifact_version": _version(),
        "preset": args.preset or values.get("preset"),
        "config": study_config_to_dict(scfg),
        "config_hash": digest,
        "seed": scfg.seed,
        "jobs": jobs,
        "meta": result.meta,
        "fits": fits,
        "outputs": [csv_path.name],
        "started": started,
        "wall_clock_s": round(time.perf_counter() - t0, 3),
    }
    _write_manifest(out / f"{stem}.manifest.json", manifest)
    print(f"wrote {csv_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest


def cmd_selftest(args) -> int:
    faults = tuple(args.inject_fault or ())
    env_fault = os.environ.get("SGPE_SELFTEST_FAULT")
    if env_fault:
        faults += (env_fault,)
    unknown = [f for f in faults if f not in FAULTS]
    if unknown:
        raise ConfigParseError(f"unknown fault {unknown[0]!r}; known: {', '.join(FAULTS)}")
    t0 = time.perf_counter()
    results = run_batteries(faults)
    for name, ok, detail, secs in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail} ({secs:.2f} s)")
    total = time.perf_counter() - t0
    if total > SELFTEST_BUDGET_S:
        print(f"warning: selftest took {total:.1f} s (budget {SELFTEST_BUDGET_S:.0f} s)", file=sys.stderr)
    return EXIT_OK if all(ok for _, ok, _, _ in results) else EXIT_SELFTEST


# ---------------------------------------------------------------------------
# entry point


def _seed(text):
    try:
        value = RUN_KEYS["seed"][0](text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value config file")
    common.add_argument("--override", metavar="KEY=VALUE", action="append",
                        help="override one config key (repeatable)")
    common.add_argument("--out", metavar="DIR", help="output directory (default $SGPE_OUT_DIR or .)")
    common.add_argument("--seed", type=_seed, help="RNG seed (unsigned 64-bit)")
    common.add_argument("--jobs", type=int, help="worker processes for studies (default: all CPUs)")
    common.add_argument("--preset", choices=PRESET_NAMES, help="named study configuration")
    common.add_argument("--scale", choices=("desk", "full"), help="preset scale (default desk)")

    parser = _Parser(prog="sgpe", description="Stochastic Gross-Pitaevskii solvers and convergence studies.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("run", parents=[common], help="integrate one trajectory")
    sub.add_parser("study", parents=[common], help="run a convergence or stability study")
    st = sub.add_parser("selftest", parents=[common], help="run the invariant batteries")
    st.add_argument("--inject-fault", action="append", metavar="NAME", help=argparse.SUPPRESS)
    return parser


COMMANDS = {"run": cmd_run, "study": cmd_study, "selftest": cmd_selftest}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, OSError) as exc:
        print(f"sgpe {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"sgpe {args.command}: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except SGPEError as exc:
        print(f"sgpe {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
