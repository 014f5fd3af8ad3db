"""Command-line front end: run experiments, compare posteriors, calibrate.

All result files are written with 17 significant digits so that reals
round-trip exactly; identical configurations therefore produce
byte-identical particle files regardless of the worker count.
"""

import argparse
import csv
import glob
import json
import os
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .engine import StoppingRules, ThresholdSchedule, run
from .metrics import EmpiricalSample, wasserstein1_resampled
from .models import get_model, mad_calibrate
from .proposals import ProposalSpec
from .rngs import PURPOSE_RESAMPLE, calibration_rng, stream

WORKERS_ENV = "GUIDED_ABC_WORKERS"

_PARTICLE_RE = re.compile(r"particles_run(\d+)_t(\d+)\.csv$")


class ConfigError(ValueError):
    """Invalid run configuration; reported as exit code 2."""


@dataclass
class RunConfig:
    """Fully resolved configuration of one experiment."""

    model: str
    proposal: ProposalSpec
    schedule: ThresholdSchedule
    n_particles: int
    seed: int = 0
    n_repeats: int = 1
    workers: int = 1
    out: str = "runs"
    model_params: dict = field(default_factory=dict)
    stop: StoppingRules = field(default_factory=StoppingRules)
    mad_sims: int | None = None

    def __post_init__(self):
        if self.n_particles < 2:
            raise ConfigError("n_particles must be at least 2")
        if self.n_repeats < 1:
            raise ConfigError("n_repeats must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def to_dict(self):
        return {
            "model": {"name": self.model, "params": dict(self.model_params)},
            "proposal": self.proposal.to_dict(),
            "schedule": self.schedule.to_dict(),
            "n_particles": self.n_particles,
            "seed": self.seed,
            "n_repeats": self.n_repeats,
            "workers": self.workers,
            "out": self.out,
            "stop": self.stop.to_dict(),
            "mad_sims": self.mad_sims,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            model = d["model"]
            if isinstance(model, str):
                name, params = model, {}
            else:
                name, params = model["name"], dict(model.get("params", {}))
            return cls(
                model=name,
                model_params=params,
                proposal=ProposalSpec.from_dict(d["proposal"]),
                schedule=ThresholdSchedule.from_dict(d["schedule"]),
                n_particles=int(d["n_particles"]),
                seed=int(d.get("seed", 0)),
                n_repeats=int(d.get("n_repeats", 1)),
                workers=int(d.get("workers", 1)),
                out=str(d.get("out", "runs")),
                stop=StoppingRules.from_dict(d.get("stop", {})),
                mad_sims=d.get("mad_sims"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _fmt(x):
    return format(float(x), ".17g")


def _apply_override(cfg_dict, dotted, raw):
    """Set a dotted-path key; values parse as JSON when possible."""
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg_dict
    parts = dotted.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override path {dotted!r} crosses a non-object")
    node[parts[-1]] = value


def load_config(path, overrides=()):
    try:
        with open(path) as fh:
            cfg_dict = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        _apply_override(cfg_dict, key, raw)
    return cfg_dict


def build_model(cfg):
    model = get_model(cfg.model, **cfg.model_params)
    if model.wants_mad:
        n = cfg.mad_sims if cfg.mad_sims is not None else model.mad_default_sims
        model.set_distance_scale(mad_calibrate(model, n, calibration_rng(cfg.seed)))
    return model


def write_report_csv(path, rows):
    header = ["run", "t", "delta", "n_proposals", "acceptance_rate", "ess",
              "n_sims", "wallclock_s"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def write_particles_csv(path, system):
    d = system.d_theta
    header = [f"theta_{j + 1}" for j in range(d)] + ["weight", "distance"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(system.n):
            row = [_fmt(v) for v in system.thetas[i]]
            row.append(_fmt(system.weights[i]))
            row.append(_fmt(system.distances[i]))
            writer.writerow(row)


def read_particles_csv(path):
    """Particle file as (thetas, weights, distances)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [list(map(float, row)) for row in reader]
    data = np.asarray(rows)
    theta_cols = [i for i, name in enumerate(header) if name.startswith("theta_")]
    w_col = header.index("weight")
    d_col = header.index("distance")
    return data[:, theta_cols], data[:, w_col], data[:, d_col]


def cmd_run(args):
    cfg_dict = load_config(args.config, args.set or ())
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    if args.out is not None:
        cfg_dict["out"] = args.out
    if args.workers is not None:
        cfg_dict["workers"] = args.workers
    elif "workers" not in cfg_dict and os.environ.get(WORKERS_ENV):
        cfg_dict["workers"] = int(os.environ[WORKERS_ENV])
    cfg = RunConfig.from_dict(cfg_dict)
    model = build_model(cfg)
    os.makedirs(cfg.out, exist_ok=True)

    report_rows = []
    for r in range(cfg.n_repeats):
        result = run(
            model,
            cfg.proposal,
            cfg.schedule,
            cfg.n_particles,
            seed=cfg.seed + r,
            stop=cfg.stop,
            workers=cfg.workers,
        )
        for rep in result.reports:
            report_rows.append([
                r, rep.t, _fmt(rep.delta), rep.n_proposals,
                _fmt(rep.acceptance_rate), _fmt(rep.ess),
                rep.n_model_simulations, _fmt(rep.wallclock_seconds),
            ])
        for system in result.systems:
            path = os.path.join(cfg.out, f"particles_run{r}_t{system.iteration}.csv")
            write_particles_csv(path, system)
    write_report_csv(os.path.join(cfg.out, "report.csv"), report_rows)
    manifest = {
        "config": cfg.to_dict(),
        "versions": {
            "guided_abc": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "seeds": [cfg.seed + r for r in range(cfg.n_repeats)],
    }
    with open(os.path.join(cfg.out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_compare(args):
    files = sorted(glob.glob(args.a))
    if not files:
        raise ConfigError(f"no particle files match {args.a!r}")
    ref_thetas, ref_weights, _ = read_particles_csv(args.b)
    reference = EmpiricalSample(ref_thetas, ref_weights)
    rng = stream(args.seed, 0, PURPOSE_RESAMPLE)
    rows = []
    for path in files:
        thetas, weights, _ = read_particles_csv(path)
        w1 = wasserstein1_resampled(
            EmpiricalSample(thetas, weights), reference, m=args.m, rng=rng
        )
        match = _PARTICLE_RE.search(os.path.basename(path))
        run_id = int(match.group(1)) if match else -1
        t = int(match.group(2)) if match else -1
        rows.append([path, run_id, t, args.m, _fmt(w1)])
        print(f"{path}\tw1={_fmt(w1)}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["file", "run", "t", "m", "w1"])
            writer.writerows(rows)
    return 0


def cmd_calibrate(args):
    model = get_model(args.model)
    scale = mad_calibrate(model, args.n, calibration_rng(args.seed))
    record = {
        "model": args.model,
        "n_sims": args.n,
        "seed": args.seed,
        "scale": [float(v) for v in scale],
    }
    text = json.dumps(record, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="guided-abc",
        description="Sequential ABC with guided proposal samplers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True, help="JSON config path")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="dotted-path config override")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--workers", type=int, default=None)
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="Wasserstein-1 against a reference")
    p_cmp.add_argument("--a", required=True, help="glob of particle CSVs")
    p_cmp.add_argument("--b", required=True, help="reference particle CSV")
    p_cmp.add_argument("--m", type=int, default=256, help="subsample size")
    p_cmp.add_argument("--seed", type=int, default=0)
    p_cmp.add_argument("--out", default=None, help="optional CSV output path")
    p_cmp.set_defaults(func=cmd_compare)

    p_cal = sub.add_parser("calibrate", help="prior-predictive MAD scales")
    p_cal.add_argument("--model", required=True)
    p_cal.add_argument("--n", type=int, required=True)
    p_cal.add_argument("--seed", type=int, default=0)
    p_cal.add_argument("--out", default=None)
    p_cal.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        json.dump({"error": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
