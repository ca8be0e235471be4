"""Command-line experiment harness.

Subcommands::

    bregman-tv run <config> [--set key=value ...] [--output-dir DIR]
    bregman-tv phantom <kind> <size> <out.pgm>
    bregman-tv plot <trace.csv> <outdir>

A config is a flat ``key = value`` file; ``#`` starts a comment.  The
output directory is taken from ``BREGMAN_TV_OUTPUT_DIR`` if set, then from
``--output-dir``, then from the ``output_dir`` key.
"""

import argparse
import dataclasses
import logging
import math
import os
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import io as bio
from ._validation import InvalidInputError, InvalidParameterError
from .forward_models import add_noise, operator_norm, radon_operator
from .phantoms import KINDS, make_phantom
from .regularization import IndexFunction
from .solver import RunTrace, SolverConfig, initial_guess, solve

logger = logging.getLogger(__name__)

OUTPUT_ENV = "BREGMAN_TV_OUTPUT_DIR"
EXIT_OK, EXIT_DIVERGED, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    """Malformed config file or override; the message carries the location."""


@dataclasses.dataclass
class ExperimentConfig:
    """Everything needed to reproduce one desk-scale run."""

    name: str = "experiment"
    phantom: str = "star"
    size: int = 64
    arms: int = 8
    operator: str = "full"
    n_detectors: int = 0        # 0: round(1.5 * size)
    n_angles: int = 0           # 0: derived from ``operator``
    delta_rel: float = 0.001
    noise_seed: int = 1
    psi_c: float = 1.0
    psi_p: float = 0.5
    mu_scale: float = 1.0       # mu = mu_scale / ||T||^2
    relaxation: float = 1.5
    nu: float = 0.0             # 0: default from the noise level
    inner_iters: int = 10
    max_outer: int = 2000
    stopping: str = "mdp"
    tau_lo: float = 1.1
    tau_hi: float = 1.5
    epsilon: float = 0.0
    allow_unstable_step: bool = False
    divergence_factor: float = 10.0
    seed: int = 0
    budget_s: float = 120.0
    output_dir: str = "out"

    def geometry(self):
        """``(n_angles, n_detectors)`` for the configured operator."""
        n_det = self.n_detectors or int(round(1.5 * self.size))
        if self.n_angles:
            return self.n_angles, n_det
        full = int(round(self.size * self.size / n_det))
        if self.operator == "full":
            return full, n_det
        return max(full // 2, 1), n_det

    def solver_config(self, op_norm):
        return SolverConfig(
            mu=self.mu_scale / op_norm**2,
            relaxation=self.relaxation,
            nu=self.nu or None,
            inner_iters=self.inner_iters,
            max_outer=self.max_outer,
            stopping=self.stopping,
            tau_lo=self.tau_lo,
            tau_hi=self.tau_hi,
            epsilon=self.epsilon or None,
            psi=IndexFunction(self.psi_c, self.psi_p),
            allow_unstable_step=self.allow_unstable_step,
            divergence_factor=self.divergence_factor,
            record_timing=False,
            seed=self.seed,
        )


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_CHOICES = {"phantom": KINDS, "operator": ("full", "half")}


def _coerce(key, raw, where):
    if key not in _FIELDS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    kind = _FIELDS[key].type
    raw = raw.strip()
    try:
        if kind in ("bool", bool):
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            value = low in ("true", "1", "yes")
        elif kind in ("int", int):
            value = int(raw)
        elif kind in ("float", float):
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError(raw)
        else:
            value = raw
    except ValueError:
        raise ConfigError(f"{where}: bad value {raw!r} for {key} ({kind})") from None
    if key in _CHOICES and value not in _CHOICES[key]:
        raise ConfigError(f"{where}: {key} must be one of {_CHOICES[key]}")
    return value


def parse_config(text, source="<config>"):
    """Parse ``key = value`` lines into an :class:`ExperimentConfig`.

    Raises
    ------
    ConfigError
        With ``source:line`` for the first offending line.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected key = value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        values[key] = _coerce(key, raw, where)
    return ExperimentConfig(**values)


def load_config(path, overrides=()):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    cfg = parse_config(text, str(path))
    if cfg.name == ExperimentConfig.name:
        cfg.name = path.stem
    for k, item in enumerate(overrides, 1):
        if "=" not in item:
            raise ConfigError(f"--set #{k}: expected key=value, got {item!r}")
        key, raw = (s.strip() for s in item.split("=", 1))
        setattr(cfg, key, _coerce(key, raw, f"--set #{k}"))
    return cfg


def preset_path(name):
    """Path of a shipped preset by stem, e.g. ``"full_angles"``."""
    path = resources.files("bregman_tv") / "presets" / f"{name}.cfg"
    if not path.is_file():
        raise ConfigError(f"no preset named {name!r}; available: {', '.join(list_presets())}")
    return Path(str(path))


def list_presets():
    root = resources.files("bregman_tv") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


@dataclasses.dataclass
class ExperimentResult:
    config: ExperimentConfig
    output_dir: Path
    termination: str
    trace: RunTrace
    summary: dict
    exit_code: int


def _resolve_output_dir(cfg, output_dir):
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    return Path(output_dir if output_dir is not None else cfg.output_dir)


def run_experiment(config, output_dir=None, overrides=()):
    """Simulate data, reconstruct, and write the artifacts of one run.

    ``config`` is an :class:`ExperimentConfig` or a path.  Writes
    ``phantom.pgm``, ``sinogram.csv``, ``recon.pgm``, ``recon.csv``,
    ``trace.csv`` and ``summary.txt``.
    """
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config, overrides)
    out = _resolve_output_dir(cfg, output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    u_true = make_phantom(cfg.phantom, cfg.size, arms=cfg.arms)
    n_angles, n_det = cfg.geometry()
    op = radon_operator(cfg.size, cfg.size, n_angles, n_det)
    meas = add_noise(op.apply(u_true), cfg.delta_rel, seed=cfg.noise_seed)
    norm = operator_norm(op, seed=cfg.seed)
    scfg = cfg.solver_config(norm)
    u_start = initial_guess(op, meas.v_delta, u_true.shape)

    result = solve(op, meas.v_delta, u_true.shape, scfg, delta=meas.delta_abs,
                   u_dagger=u_true, u_init=u_start, op_norm=norm)
    wall = time.perf_counter() - t0

    bio.write_pgm(out / "phantom.pgm", u_true)
    bio.write_sinogram_csv(out / "sinogram.csv", meas.v_delta, n_angles, n_det)
    u_out = result.u if np.all(np.isfinite(result.u)) else np.zeros_like(u_true)
    bio.write_pgm(out / "recon.pgm", u_out)
    bio.write_image_csv(out / "recon.csv", u_out)
    result.trace.to_csv(out / "trace.csv")

    rel = result.trace.column("rel_error")
    init_err = float(np.linalg.norm(u_start - u_true) / np.linalg.norm(u_true))
    summary = {
        "name": cfg.name,
        "termination": result.termination,
        "outer_iterations": len(result.trace),
        "initial_rel_error": init_err,
        "final_rel_error": float(rel[-1]) if rel.size else math.nan,
        "min_rel_error": float(np.nanmin(rel)) if rel.size else math.nan,
        "final_discrepancy": float(result.trace.records[-1].discrepancy)
        if len(result.trace) else math.nan,
        "delta_rel": cfg.delta_rel,
        "delta_abs": meas.delta_abs,
        "mdp_band": f"[{cfg.tau_lo * meas.delta_abs!r}, {cfg.tau_hi * meas.delta_abs!r}]",
        "operator": cfg.operator,
        "n_angles": n_angles,
        "n_detectors": n_det,
        "shape_M_N": f"{op.out_dim}x{op.in_dim}",
        "op_norm": norm,
        "mu": result.mu,
        "nu": result.nu,
        "monitor_violations": result.monitor_violations,
        "wall_time_s": wall,
        "budget_s": cfg.budget_s,
        "within_budget": wall <= cfg.budget_s,
    }
    with open(out / "summary.txt", "w") as fh:
        for k, v in summary.items():
            fh.write(f"{k}: {v!r}\n" if isinstance(v, float) else f"{k}: {v}\n")
    code = EXIT_DIVERGED if result.termination == "diverged" else EXIT_OK
    return ExperimentResult(cfg, out, result.termination, result.trace, summary, code)


def read_summary(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        key, _, value = line.partition(": ")
        out[key] = value
    return out


PLOT_COLUMNS = ("iter", "rel_error", "discrepancy")


def emit_profile_plots(trace_csv, outdir):
    """Write ``profile.dat`` and a gnuplot script ``profile.gp``.

    The data file starts with the trace column names, so the script refers
    to columns by name.  Returns the two paths.

    Raises
    ------
    InvalidInputError
        If the trace has no records.
    """
    trace = RunTrace.from_csv(trace_csv)
    if len(trace) == 0:
        raise InvalidInputError(f"{trace_csv}: trace has no records")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    dat, gp = outdir / "profile.dat", outdir / "profile.gp"
    with open(dat, "w") as fh:
        fh.write(" ".join(PLOT_COLUMNS) + "\n")
        for r in trace.records:
            fh.write(" ".join(repr(float(getattr(r, c))) if c != "iter" else str(r.iter)
                              for c in PLOT_COLUMNS) + "\n")
    style = "linespoints" if len(trace) > 1 else "points"
    script = [
        "set terminal pngcairo size 900,600",
        "set output 'profile.png'",
        f"set title 'termination: {trace.termination}'",
        "set xlabel 'iter'",
        "set logscale y",
        "set key autotitle columnhead",
        "set datafile missing 'nan'",
        "plot 'profile.dat' using 'iter':'rel_error' with " + style + " title 'rel_error', \\",
        "     'profile.dat' using 'iter':'discrepancy' with " + style + " title 'discrepancy'",
    ]
    gp.write_text("\n".join(script) + "\n")
    return dat, gp


def read_profile_data(path):
    """Parse ``profile.dat`` back into a dict of column arrays."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split()
    rows = np.array([[float(x) for x in line.split()] for line in lines[1:]], ndmin=2)
    return {name: rows[:, k] for k, name in enumerate(header)}


def _build_parser():
    p = argparse.ArgumentParser(prog="bregman-tv", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment from a config file or preset name")
    r.add_argument("config", help="path to a config file, or preset:<name>")
    r.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    r.add_argument("--output-dir")
    ph = sub.add_parser("phantom", help="write a phantom image")
    ph.add_argument("kind", choices=KINDS)
    ph.add_argument("size", type=int)
    ph.add_argument("out")
    pl = sub.add_parser("plot", help="emit a gnuplot script for a trace")
    pl.add_argument("trace")
    pl.add_argument("outdir")
    sub.add_parser("presets", help="list shipped presets")
    return p


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            path = args.config
            if path.startswith("preset:"):
                path = preset_path(path.split(":", 1)[1])
            res = run_experiment(load_config(path, args.overrides), args.output_dir)
            print(f"{res.termination}: {res.summary['outer_iterations']} outer steps, "
                  f"final rel_error {res.summary['final_rel_error']:.4g} -> {res.output_dir}")
            return res.exit_code
        if args.command == "phantom":
            bio.write_pgm(args.out, make_phantom(args.kind, args.size))
            return EXIT_OK
        if args.command == "plot":
            dat, gp = emit_profile_plots(args.trace, args.outdir)
            print(f"wrote {dat} and {gp}")
            return EXIT_OK
        if args.command == "presets":
            print("\n".join(list_presets()))
            return EXIT_OK
    except (ConfigError, InvalidInputError, InvalidParameterError, OSError) as exc:
        print(f"bregman-tv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
