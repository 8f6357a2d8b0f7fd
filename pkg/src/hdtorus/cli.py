"""Command line entry point: ``hdtorus <command> --spec FILE [options]``.

Settings are merged with precedence flags > config file > defaults.  Every
output starts with a header carrying the tool version, the seed and a hash
of the fully resolved configuration, which is enough to rerun it.  Outputs
contain no timestamps, so equal configurations give byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, HdtorusError
from .torus import TorusSpec

log = logging.getLogger("hdtorus")

COMMANDS = ("rw", "mc", "oracle", "triangle", "bootstrap", "pc", "window")
SPEC_KEYS = {"family", "r", "n", "L"}

# per-command parameters and their defaults; None means "required" for p
_DEFAULTS = {
    "rw": {"mu_omega": 1.0},
    "mc": {"p": None, "samples": 10_000, "pi0": True},
    "oracle": {"p": None},
    "triangle": {"p": None, "tau": None, "samples": 10_000},
    "bootstrap": {"p": None, "lambda": 0.25, "tau": None, "samples": 10_000},
    "pc": {"lambda": 0.25, "budget": 10_000},
    "window": {"lambda": 0.25, "eps": None, "budget": 10_000, "pc": None},
}
_COMMON = {"seed": 0, "workers": None, "out": None}


@dataclass
class ExperimentConfig:
    command: str
    spec: TorusSpec
    params: dict
    seed: int = 0
    workers: int | None = None
    out: str | None = None
    defaulted: list = field(default_factory=list)

    def canonical(self):
        """Everything that determines the result (the worker count does not)."""
        return {
            "command": self.command,
            "spec": self.spec.to_dict(),
            "params": self.params,
            "seed": self.seed,
        }

    @property
    def config_hash(self):
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def header(self):
        return {
            "tool": "hdtorus",
            "version": __version__,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "config": self.canonical(),
        }


# -- config loading ----------------------------------------------------------------


def _read_file(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            import yaml

            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except Exception as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    return data


def _split_file(data, command):
    """A file is either a bare spec mapping or ``{"spec": {...}, <params>}``."""
    if "spec" not in data:
        return dict(data), {}
    spec = data["spec"]
    if not isinstance(spec, dict):
        raise ConfigError("key 'spec' must be a mapping")
    rest = {k: v for k, v in data.items() if k != "spec"}
    allowed = set(_DEFAULTS[command]) | set(_COMMON)
    for key in rest:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} for command {command!r}")
    return dict(spec), rest


def _number(key, value, kind=float, lo=None, hi=None, lo_open=False):
    try:
        x = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a {kind.__name__}, got {value!r}") from None
    if kind is float and not math.isfinite(x):
        raise ConfigError(f"{key} must be finite")
    if lo is not None and (x < lo or (lo_open and x == lo)):
        raise ConfigError(f"{key} = {x} out of range")
    if hi is not None and x > hi:
        raise ConfigError(f"{key} = {x} out of range")
    return x


def _validate(command, params):
    out = {}
    for key, value in params.items():
        if value is None:
            out[key] = None
        elif key in ("p", "pc"):
            out[key] = _number(key, value, float, 0.0, 1.0)
        elif key == "mu_omega":
            out[key] = _number(key, value, float, 0.0, 1.0)
        elif key == "lambda":
            out[key] = _number(key, value, float, 0.0, lo_open=True)
        elif key in ("samples", "budget"):
            out[key] = _number(key, value, int, 1)
        elif key == "pi0":
            out[key] = bool(value)
        elif key == "tau":
            out[key] = str(value)
        elif key == "eps":
            if isinstance(value, str):
                value = [value]
            value = [v for item in value for v in str(item).replace(",", " ").split()]
            out[key] = [_number("eps", v) for v in value]
    if "p" in _DEFAULTS[command] and out.get("p") is None:
        raise ConfigError(f"command {command!r} needs p")
    return out


def load_config(command, spec_file=None, flags=None) -> ExperimentConfig:
    """Resolve a command's configuration from a file and command-line flags.

    ``flags`` maps parameter names to values, with ``None`` meaning "not
    given".  Spec fields may also come from flags (``family``, ``r``, ``n``,
    ``L``).
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    flags = {k: v for k, v in (flags or {}).items() if v is not None}
    spec_data, file_params = ({}, {})
    if spec_file is not None:
        spec_data, file_params = _split_file(_read_file(spec_file), command)
    for key in SPEC_KEYS:
        if key in flags:
            spec_data[key] = flags.pop(key)
    if not spec_data:
        raise ConfigError("no torus given: pass --spec FILE or --family/--r/--n")
    spec = TorusSpec.from_dict(spec_data)

    merged = dict(_COMMON) | dict(_DEFAULTS[command])
    defaulted = [k for k in _DEFAULTS[command] if k not in file_params and k not in flags]
    for source in (file_params, flags):
        for key, value in source.items():
            if key not in merged:
                raise ConfigError(f"unknown key {key!r} for command {command!r}")
            merged[key] = value
    for key in defaulted:
        if key == "lambda":
            log.info("lambda not given for %s; using default %s", command, merged[key])
    seed = _number("seed", merged.pop("seed"), int, 0)
    workers = merged.pop("workers")
    if workers is not None:
        workers = _number("workers", workers, int, 1)
    out = merged.pop("out")
    params = _validate(command, merged)
    return ExperimentConfig(command, spec, params, seed, workers, out, defaulted)


# -- serialisation -----------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dump_json(config: ExperimentConfig, result) -> str:
    doc = {"header": config.header(), "result": _plain(result)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def dump_csv(config: ExperimentConfig, columns, rows) -> str:
    buf = io.StringIO()
    h = config.header()
    buf.write(f"# tool: {h['tool']} {h['version']}\n")
    buf.write(f"# config_hash: {h['config_hash']}\n")
    buf.write(f"# seed: {h['seed']}\n")
    buf.write(f"# config: {json.dumps(h['config'], sort_keys=True, separators=(',', ':'))}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def read_tau_csv(path, spec: TorusSpec):
    """Read ``x_index, tau[, tau_stderr]`` columns written by ``hdtorus mc``."""
    try:
        with open(path) as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read tau file {path}: {exc}") from exc
    reader = csv.DictReader(lines)
    if not reader.fieldnames or "x_index" not in reader.fieldnames or "tau" not in reader.fieldnames:
        raise ConfigError(f"tau file {path} needs columns x_index and tau")
    tau = np.full(spec.V, np.nan)
    se = np.zeros(spec.V)
    for row in reader:
        x = int(row["x_index"])
        if not 0 <= x < spec.V:
            raise ConfigError(f"tau file {path}: x_index {x} outside [0, {spec.V})")
        tau[x] = float(row["tau"])
        if row.get("tau_stderr"):
            se[x] = float(row["tau_stderr"])
    if np.isnan(tau).any():
        raise ConfigError(f"tau file {path} must list all {spec.V} sites")
    return tau, se


# -- commands ----------------------------------------------------------------------


def _tau_for(cfg):
    from .percolation import estimate_observables

    if cfg.params.get("tau"):
        return read_tau_csv(cfg.params["tau"], cfg.spec)
    est, _ = estimate_observables(cfg.spec, cfg.params["p"], cfg.params["samples"], cfg.seed, cfg.workers)
    return est.tau, est.stderr


def _cmd_rw(cfg):
    from .spectral import infrared_margin, rw_triangle_sums

    spec = cfg.spec
    sums = rw_triangle_sums(spec, cfg.params["mu_omega"] / spec.omega)
    out = {"V": spec.V, "omega": spec.omega} | sums.to_dict()
    if spec.V > 1:
        out["infrared"] = infrared_margin(spec).to_dict()
    return dump_json(cfg, out), None


def _cmd_mc(cfg):
    from .percolation import estimate_double_connection, estimate_observables

    spec, prm = cfg.spec, cfg.params
    est, st = estimate_observables(spec, prm["p"], prm["samples"], cfg.seed, cfg.workers)
    cols = ["x_index", "tau", "tau_stderr"]
    data = [np.arange(spec.V), est.tau, est.stderr]
    if prm["pi0"]:
        dc = estimate_double_connection(spec, prm["p"], prm["samples"], cfg.seed, cfg.workers)
        cols += ["pi0", "pi0_stderr"]
        data += [dc.pi0, dc.stderr]
    rows = [[int(x)] + [float(c[x]) for c in data[1:]] for x in range(spec.V)]
    summary = {"p": prm["p"], "samples": prm["samples"]} | st.to_dict()
    return dump_csv(cfg, cols, rows), dump_json(cfg, summary)


def _cmd_oracle(cfg):
    from .oracle import exact_observables

    return dump_json(cfg, exact_observables(cfg.spec, cfg.params["p"]).to_dict()), None


def _cmd_triangle(cfg):
    from .diagrams import check_triangle_condition, diagram_report, triangle_stderr
    from .spectral import rw_triangle_sums

    spec, p = cfg.spec, cfg.params["p"]
    tau, se = _tau_for(cfg)
    rep = diagram_report(tau, p, spec)
    out = rep.to_dict()
    if spec.V > 1:
        beta = rw_triangle_sums(spec, 1.0 / spec.omega).beta_triangle
        chk = check_triangle_condition(rep.nabla, beta, float(tau.sum()), spec.V)
        out["triangle_condition"] = {
            "beta": beta,
            "chi": float(tau.sum()),
            "ok": chk.ok,
            "margin": chk.margin,
            "argmin": chk.argmin,
            "bound_offdiag": chk.bound_offdiag,
            "nabla_stderr_max": float(triangle_stderr(tau, se, spec).max()),
        }
    return dump_json(cfg, out), None


def _cmd_bootstrap(cfg):
    from .bootstrap import bootstrap_f
    from .spectral import dft

    spec, prm = cfg.spec, cfg.params
    tau, se = _tau_for(cfg)
    rep = bootstrap_f(dft(tau, spec), prm["p"], spec, prm["lambda"], tau_stderr=se)
    return dump_json(cfg, rep.to_dict()), None


def _cmd_pc(cfg):
    from .threshold import find_pc, pc_asymptotics_check

    prm = cfg.params
    res = find_pc(cfg.spec, prm["lambda"], prm["budget"], cfg.seed, workers=cfg.workers)
    out = res.to_dict() | pc_asymptotics_check(res, cfg.spec)
    return dump_json(cfg, out), None


def _cmd_window(cfg):
    from .threshold import default_epsilons, find_pc, window_scan

    spec, prm = cfg.spec, cfg.params
    eps = prm["eps"] if prm["eps"] is not None else default_epsilons(spec, prm["lambda"])
    p_c = prm["pc"]
    if p_c is None:
        p_c = find_pc(spec, prm["lambda"], prm["budget"], cfg.seed, workers=cfg.workers)
    rows = window_scan(spec, prm["lambda"], eps, prm["budget"], cfg.seed, p_c=p_c, workers=cfg.workers)
    table = [[r.epsilon, r.p, r.chi, r.chi_se, r.cmax, r.cmax_se] for r in rows]
    return dump_csv(cfg, ["epsilon", "p", "chi", "chi_se", "cmax", "cmax_se"], table), None


_RUNNERS = {
    "rw": _cmd_rw,
    "mc": _cmd_mc,
    "oracle": _cmd_oracle,
    "triangle": _cmd_triangle,
    "bootstrap": _cmd_bootstrap,
    "pc": _cmd_pc,
    "window": _cmd_window,
}


def _companion_path(out):
    path = Path(out)
    return path.with_suffix(".json") if path.suffix != ".json" else path.with_name(path.stem + ".summary.json")


def run(cfg: ExperimentConfig, stdout=None) -> int:
    """Execute ``cfg`` and write its artifacts; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    primary, companion = _RUNNERS[cfg.command](cfg)
    if cfg.out:
        Path(cfg.out).write_text(primary)
        if companion is not None:
            _companion_path(cfg.out).write_text(companion)
    else:
        stdout.write(primary)
    return 0


# -- argument parsing --------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="JSON or YAML file with the torus and optional parameters")
    common.add_argument("--family")
    common.add_argument("--r", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--L", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int, help="defaults to $HDTORUS_WORKERS or 1")
    common.add_argument("--out", help="output file (stdout if omitted)")

    parser = argparse.ArgumentParser(prog="hdtorus", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hdtorus {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rw", parents=[common], help="random-walk triangle sums and infrared margin")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--mu", type=float, help="mu (mu Omega defaults to 1)")
    g.add_argument("--mu-omega", dest="mu_omega", type=float)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo tau and Pi^0 table (CSV)")
    p.add_argument("--p", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--no-pi0", dest="pi0", action="store_const", const=False)

    p = sub.add_parser("oracle", parents=[common], help="exact enumeration on a tiny torus")
    p.add_argument("--p", type=float)

    for name, text in (("triangle", "diagram quantities"), ("bootstrap", "bootstrap functions")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--p", type=float)
        p.add_argument("--tau", help="CSV from 'hdtorus mc'; otherwise tau is simulated")
        p.add_argument("--samples", type=int)
        if name == "bootstrap":
            p.add_argument("--lambda", dest="lambda_", type=float)

    p = sub.add_parser("pc", parents=[common], help="critical threshold chi(p_c) = lambda V^(1/3)")
    p.add_argument("--lambda", dest="lambda_", type=float)
    p.add_argument("--budget", type=int, help="samples per evaluation")

    p = sub.add_parser("window", parents=[common], help="scaling-window scan (CSV)")
    p.add_argument("--lambda", dest="lambda_", type=float)
    p.add_argument("--eps", nargs="+", help="epsilon values, e.g. --eps -1 0 1 or --eps=-1,0,1")
    p.add_argument("--budget", type=int)
    p.add_argument("--pc", type=float, help="skip the threshold search and use this p_c")
    return parser


def _flags(ns):
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "spec")}
    if "lambda_" in flags:
        flags["lambda"] = flags.pop("lambda_")
    return flags


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="hdtorus: %(message)s", stream=sys.stderr)
    ns = build_parser().parse_args(argv)
    flags = _flags(ns)
    try:
        if ns.command == "rw" and flags.get("mu") is not None:
            cfg = load_config(ns.command, ns.spec, {k: v for k, v in flags.items() if k != "mu"})
            cfg.params["mu_omega"] = _number("mu", flags["mu"] * cfg.spec.omega, float, 0.0, 1.0)
        else:
            flags.pop("mu", None)
            cfg = load_config(ns.command, ns.spec, flags)
        return run(cfg)
    except HdtorusError as exc:
        print(f"hdtorus: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
