"""Command line interface.

    echoevo run        evolve populations and record metrics
    echoevo export-dot render a saved genome as graphviz DOT
    echoevo summarize  aggregate test accuracies across finished runs

Exit codes: 0 success, 2 configuration problems, 3 data problems, 4
anything else.
"""

import argparse
import dataclasses
import datetime
import json
import os
import sys
import traceback

import numpy as np

from .data import (DataError, SynthConfig, load_and_filter, synth_dataset)
from .dot_export import genome_to_dot
from .evolution import EvolutionConfig, seed_population
from .genome_io import load_genome, save_genome
from .task_harness import (ChampionTracker, TaskConfig, prepare_recordings,
                           read_metrics_csv, run_generations, write_metrics_csv)


class ConfigError(Exception):
    pass


def _utcnow() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


@dataclasses.dataclass
class RunConfig:
    network: str = "echo"          # echo | rnn
    data: str = "synthetic"        # synthetic | real
    data_dir: str = None
    out_dir: str = "runs/out"
    seed: int = 0
    repeats: int = 10
    # the documented export recipe already removes the untouched set-aside,
    # so by default the loader must not remove a second one
    set_aside_count: int = 0
    confidence_floor: float = 50.0
    waveform_format: str = "auto"
    evolution: EvolutionConfig = dataclasses.field(default_factory=EvolutionConfig)
    task: TaskConfig = dataclasses.field(default_factory=TaskConfig)
    synth: SynthConfig = dataclasses.field(default_factory=SynthConfig)

    def validate(self):
        if self.network not in ("echo", "rnn"):
            raise ConfigError(f"network must be 'echo' or 'rnn', got {self.network!r}")
        if self.data not in ("synthetic", "real"):
            raise ConfigError(f"data must be 'synthetic' or 'real', got {self.data!r}")
        if self.data == "real" and not self.data_dir:
            raise ConfigError("data 'real' needs --data-dir")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.set_aside_count < 0:
            raise ConfigError("set_aside_count must be >= 0")
        try:
            self.evolution.validate()
            self.task.validate()
            if self.data == "synthetic":
                self.synth.validate()
        except ValueError as e:
            raise ConfigError(str(e)) from e
        return self

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def run_config_from_dict(d: dict) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("configuration document must be a JSON object")
    plain = {f.name for f in dataclasses.fields(RunConfig)} - {"evolution", "task", "synth"}
    unknown = set(d) - plain - {"evolution", "task", "synth"}
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    kwargs = {k: d[k] for k in plain if k in d}
    try:
        kwargs["evolution"] = EvolutionConfig(**d.get("evolution", {}))
        kwargs["task"] = TaskConfig(**d.get("task", {}))
        kwargs["synth"] = SynthConfig(**d.get("synth", {}))
    except TypeError as e:
        raise ConfigError(str(e)) from e
    return RunConfig(**kwargs)


def load_run_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file is not valid JSON: {e}") from e
    return run_config_from_dict(doc)


# ---------------------------------------------------------------------------
# experiment driver

def summary_stats(values) -> dict:
    """Mean/std/min/max of run accuracies; std is the sample standard
    deviation and reported as 0.0 for a single run."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no values to summarize")
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return {
        "count": int(arr.size),
        "mean": float(arr.mean()),
        "std": std,
        "min": float(arr.min()),
        "max": float(arr.max()),
    }


def _build_dataset(cfg: RunConfig, data_rng):
    if cfg.data == "synthetic":
        return synth_dataset(cfg.synth, data_rng)
    return load_and_filter(cfg.data_dir, data_rng,
                           set_aside_count=cfg.set_aside_count,
                           confidence_floor=cfg.confidence_floor,
                           waveform_format=cfg.waveform_format)


def run_experiment(cfg: RunConfig, log=None, on_generation=None) -> dict:
    """Run `repeats` independent evolutions against one shared dataset.

    RNG streams: SeedSequence(seed) spawns one child for the dataset and
    one per repeat; each repeat's child spawns one stream for subset
    sampling and one per island. Artifacts under out_dir/run_<k>/ are
    byte-deterministic for a fixed config.
    """
    cfg.validate()
    started = _utcnow()
    os.makedirs(cfg.out_dir, exist_ok=True)
    children = np.random.SeedSequence(cfg.seed).spawn(1 + cfg.repeats)
    dataset = _build_dataset(cfg, np.random.default_rng(children[0]))
    if not dataset.validation or not dataset.test:
        raise DataError("validation and test splits must be non-empty")
    val_set = prepare_recordings(dataset.validation, cfg.task.window_width)
    test_set = prepare_recordings(dataset.test, cfg.task.window_width)

    resolved = cfg.as_dict()
    runs = []
    for r in range(cfg.repeats):
        run_dir = os.path.join(cfg.out_dir, f"run_{r:02d}")
        os.makedirs(run_dir, exist_ok=True)
        streams = children[1 + r].spawn(1 + cfg.evolution.island_count)
        subset_rng = np.random.default_rng(streams[0])
        islands = [seed_population(cfg.evolution, cfg.network,
                                   np.random.default_rng(s))
                   for s in streams[1:]]
        tracker = ChampionTracker(val_set, cfg.task, out_dir=run_dir)
        run_generations(islands, dataset.train, tracker, cfg.evolution,
                        cfg.task, subset_rng)
        metrics = tracker.finalize(test_set)
        write_metrics_csv(metrics, os.path.join(run_dir, "metrics.csv"))
        save_genome(tracker.champion, os.path.join(run_dir, "champion_final.json"))
        with open(os.path.join(run_dir, "champion_final.dot"), "w") as fh:
            fh.write(genome_to_dot(tracker.champion, name=f"champion_run{r}"))
        with open(os.path.join(run_dir, "config.json"), "w") as fh:
            json.dump({"run_index": r, **resolved}, fh, indent=2)
            fh.write("\n")
        runs.append({
            "index": r,
            "path": run_dir,
            "test_accuracy": metrics.test_accuracy,
            "champion_generation": metrics.champion_generation,
        })
        if log:
            log(f"run {r}: test accuracy {metrics.test_accuracy:.4f} "
                f"(champion from generation {metrics.champion_generation})")

    manifest = {
        "config": resolved,
        "runs": runs,
        "summary": summary_stats([run["test_accuracy"] for run in runs]),
        "started_at": started,
        "finished_at": _utcnow(),
    }
    if dataset.filter_report is not None:
        manifest["data_report"] = dataset.filter_report.as_dict()
    with open(os.path.join(cfg.out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest


# ---------------------------------------------------------------------------
# argument parsing

_SECTION_TYPES = {"evolution": EvolutionConfig, "task": TaskConfig, "synth": SynthConfig}
_SECTION_PREFIX = {"evolution": "", "task": "", "synth": "synth-"}


def _add_override_flags(parser):
    for section, dc_type in _SECTION_TYPES.items():
        group = parser.add_argument_group(f"{section} overrides")
        for f in dataclasses.fields(dc_type):
            flag = "--" + _SECTION_PREFIX[section] + f.name.replace("_", "-")
            group.add_argument(flag, dest=f"{section}__{f.name}", type=f.type
                               if isinstance(f.type, type) else type(f.default),
                               default=None, metavar="X",
                               help=f"{section}.{f.name} (default {f.default})")


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    for top in ("network", "data", "data_dir", "out_dir", "seed", "repeats",
                "set_aside_count", "confidence_floor", "waveform_format"):
        value = getattr(args, top, None)
        if value is not None:
            setattr(cfg, top, value)
    for section in _SECTION_TYPES:
        target = getattr(cfg, section)
        for f in dataclasses.fields(target):
            value = getattr(args, f"{section}__{f.name}", None)
            if value is not None:
                setattr(target, f.name, value)
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="echoevo",
        description="Neuroevolution of connection-matrix recurrent networks")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an evolution experiment")
    run_p.add_argument("--config", help="JSON config file; flags override it")
    run_p.add_argument("--network", choices=("echo", "rnn"))
    run_p.add_argument("--data", choices=("synthetic", "real"))
    run_p.add_argument("--data-dir", dest="data_dir")
    run_p.add_argument("--out", dest="out_dir")
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--repeats", type=int)
    run_p.add_argument("--set-aside-count", dest="set_aside_count", type=int)
    run_p.add_argument("--confidence-floor", dest="confidence_floor", type=float)
    run_p.add_argument("--waveform-format", dest="waveform_format",
                       choices=("auto", "f32", "csv"))
    run_p.add_argument("--verbose", action="store_true",
                       help="print per-generation progress")
    _add_override_flags(run_p)
    run_p.set_defaults(func=cmd_run)

    dot_p = sub.add_parser("export-dot", help="render a genome file as DOT")
    dot_p.add_argument("genome", help="path to a genome JSON file")
    dot_p.add_argument("--out", help="output path (default: stdout)")
    dot_p.add_argument("--name", default="network", help="graph name")
    dot_p.set_defaults(func=cmd_export_dot)

    sum_p = sub.add_parser("summarize", help="aggregate finished runs")
    sum_p.add_argument("directory", help="experiment output directory")
    sum_p.set_defaults(func=cmd_summarize)
    return parser


def cmd_run(args) -> int:
    if args.config:
        cfg = load_run_config(args.config)
    else:
        cfg = RunConfig()
    cfg = _apply_overrides(cfg, args)
    cfg.validate()
    print("resolved configuration:")
    print(json.dumps(cfg.as_dict(), indent=2))
    manifest = run_experiment(cfg, log=print)
    stats = manifest["summary"]
    print(f"{cfg.network}: mean test accuracy {stats['mean']:.4f} "
          f"(std {stats['std']:.4f}, min {stats['min']:.4f}, max {stats['max']:.4f}, "
          f"runs {stats['count']})")
    return 0


def cmd_export_dot(args) -> int:
    try:
        genome = load_genome(args.genome)
    except OSError as e:
        raise DataError(f"cannot read genome file: {e}") from e
    except ValueError as e:
        raise DataError(f"not a genome file: {e}") from e
    text = genome_to_dot(genome, name=args.name)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_summarize(args) -> int:
    by_network = {}
    for root, dirs, files in os.walk(args.directory):
        dirs.sort()
        if "metrics.csv" not in files:
            continue
        try:
            metrics = read_metrics_csv(os.path.join(root, "metrics.csv"))
        except ValueError as e:
            raise DataError(str(e)) from e
        if metrics.test_accuracy is None:
            continue
        network = "unknown"
        config_path = os.path.join(root, "config.json")
        if os.path.exists(config_path):
            with open(config_path) as fh:
                network = json.load(fh).get("network", "unknown")
        by_network.setdefault(network, []).append(metrics.test_accuracy)
    if not by_network:
        raise DataError(f"no finished runs under {args.directory}")
    print(f"{'network':<10}{'runs':>6}{'mean':>10}{'std':>10}{'min':>10}{'max':>10}")
    for network in sorted(by_network):
        stats = summary_stats(by_network[network])
        print(f"{network:<10}{stats['count']:>6}{stats['mean']:>10.4f}"
              f"{stats['std']:>10.4f}{stats['min']:>10.4f}{stats['max']:>10.4f}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except (DataError, FileNotFoundError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # pragma: no cover - defensive
        traceback.print_exc()
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
