'''
Command-line entry point.

    migbatchsim run        --config scenario.yaml [--seed N] [--out DIR] [--trace]
    migbatchsim sweep      --config sweep.yaml    [--seed N] [--out DIR] [--parallel N]
    migbatchsim tune       --profile model.csv    [--mig 1g.5gb(7x)] [--bucket-width 2.5] [--out policy.json]
    migbatchsim trace-dump --config scenario.yaml [--seed N] [--out DIR]

Log level comes from the MIGBATCHSIM_LOG environment variable.
'''

import functools
import math
from pathlib import Path

import click

from ..tuning.curves import DEFAULT_DELTA
from ..tuning.mig import parse_mig_notation
from ..tuning.policy import DEFAULT_BUCKET_WIDTH_S, build_batching_policy
from ..tuning.profile import load_profile
from ..utils.errors import MigBatchSimError
from ..utils.logging import configure_logging, print_tree
from .config import ScenarioConfig, load_scenario, load_sweep
from .runner import ScenarioRunner
from .sweep import run_sweep, write_sweep_csv


def _friendly_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except MigBatchSimError as e:
            raise click.ClickException(str(e))
        except OSError as e:
            raise click.ClickException(f"{e.filename or ''}: {e.strerror or e}")
    return wrapper


def _override(config: ScenarioConfig, seed, out, trace=False, event_trace=False) -> ScenarioConfig:
    if seed is not None:
        config = config.with_value("sim.seed", seed)
    if out is not None:
        config = config.with_value("outputs.dir", str(out))
    if trace:
        config = config.with_value("outputs.trace", True)
    if event_trace:
        config = config.with_value("outputs.event_trace", True)
    return config


config_option = click.option("--config", "config_path", required=True,
                             type=click.Path(exists=True, dir_okay=False, path_type=Path),
                             help="Scenario (or sweep) YAML file.")
seed_option = click.option("--seed", type=click.IntRange(min=0), default=None, help="Overrides sim.seed.")
out_option = click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None,
                          help="Overrides outputs.dir.")


@click.group()
def cli():
    """Discrete-event simulator of a MIG-partitioned inference server."""
    configure_logging()


@cli.command()
@config_option
@seed_option
@out_option
@click.option("--trace", is_flag=True, help="Write the per-request trace CSV.")
@_friendly_errors
def run(config_path, seed, out, trace):
    """Simulate one scenario and write report.json."""
    config = _override(load_scenario(config_path), seed, out, trace=trace)
    runner = ScenarioRunner(config, run_name=config.outputs.run_name or config_path.stem)
    report = runner.run()
    print_tree(f"Report ({runner.out_dir})", report.summary())


@cli.command()
@config_option
@seed_option
@out_option
@click.option("--parallel", type=click.IntRange(min=1), default=None, help="Concurrent grid points.")
@_friendly_errors
def sweep(config_path, seed, out, parallel):
    """Run a parameter sweep and write sweep.csv."""
    spec = load_sweep(config_path)
    if seed is not None:
        spec = spec.model_copy(update={"base": spec.base.with_value("sim.seed", seed)})
    out_dir = Path(out) if out is not None else Path(spec.base.outputs.dir) / config_path.stem
    frame, error = run_sweep(spec, parallel=parallel)
    path = write_sweep_csv(frame, out_dir / "sweep.csv")
    click.echo(f"{len(frame)} point(s) written to {path}")
    if error is not None:
        raise click.ClickException(f"sweep incomplete: {error}")


@cli.command()
@click.option("--profile", "profile_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path), help="Latency profile CSV.")
@click.option("--mig", "mig_notation", default="1g.5gb(7x)", show_default=True, help="MIG configuration.")
@click.option("--bucket-width", type=click.FloatRange(min=0, min_open=True),
              default=DEFAULT_BUCKET_WIDTH_S, show_default=True, help="Audio bucket width (s).")
@click.option("--delta", type=click.FloatRange(0, 1, min_open=True, max_open=True),
              default=DEFAULT_DELTA, show_default=True, help="Knee marginal-gain threshold.")
@click.option("--model-name", default=None, help="Defaults to the profile file name.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Policy JSON path (default: <profile>.policy.json).")
@_friendly_errors
def tune(profile_path, mig_notation, bucket_width, delta, model_name, out):
    """Derive batch_max per bucket and time_queue from a profile."""
    try:
        mig = parse_mig_notation(mig_notation)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--mig")
    profile = load_profile(profile_path, model_name=model_name, vgpu_shape=mig.shape)
    policy = build_batching_policy(profile, mig, bucket_width, delta)
    path = policy.save(out or profile_path.with_suffix(".policy.json"))

    buckets = {}
    for k, cap in enumerate(policy.batch_max):
        lo, hi = policy.bucket_range(k)
        label = "all inputs" if math.isinf(hi) else f"[{lo:g}, {hi:g}) s"
        knee = policy.raw_knees[k] if k < len(policy.raw_knees) else cap
        buckets[label] = cap if knee == cap else f"{cap} (knee {knee})"
    print_tree(f"Policy for {profile.model_name} on {mig.notation}", {
        "Batch_max": buckets,
        "Tail_knee (us)": policy.tail_knee,
        "Time_queue (us)": policy.time_queue,
        "Written to": str(path),
    })


@cli.command("trace-dump")
@config_option
@seed_option
@out_option
@_friendly_errors
def trace_dump(config_path, seed, out):
    """Run a scenario with event recording and write events.csv."""
    config = _override(load_scenario(config_path), seed, out, event_trace=True)
    runner = ScenarioRunner(config, run_name=config.outputs.run_name or config_path.stem)
    runner.run()
    click.echo(f"{len(runner.simulation.engine.trace)} events written to {runner.out_dir / 'events.csv'}")


if __name__ == "__main__":
    cli()
