"""Command-line front end over the pipeline stages."""

from __future__ import annotations

import sys

import click

from . import __version__, runner
from .config import RunConfig
from .errors import ZoneMeterError, exit_code_for


def _load_config(config_path, overrides) -> RunConfig:
    config = RunConfig() if config_path is None else RunConfig.load(config_path)
    if overrides:
        pairs = {}
        for item in overrides:
            key, sep, value = item.partition("=")
            if not sep:
                raise click.UsageError(f"--set expects KEY=VALUE, got {item!r}")
            pairs[key] = value
        config = config.with_overrides(pairs)
    return config


def _run(stage, config: RunConfig):
    try:
        return stage(config)
    except ZoneMeterError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(exit_code_for(e))


def _echo_files(summary: dict):
    for key, value in summary.items():
        if isinstance(value, str) and "/" in value:
            click.echo(f"wrote {value}")
        elif isinstance(value, list):
            for v in value:
                click.echo(f"wrote {v}")


@click.group()
@click.version_option(version=__version__)
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Run configuration JSON; defaults apply when omitted.",
)
@click.option(
    "--set",
    "overrides",
    multiple=True,
    metavar="KEY=VALUE",
    help="Override a config value by dotted path, e.g. simulate.seed=7.",
)
@click.pass_context
def cli(ctx, config_path, overrides):
    """Zone-level electrical load metering from building trend data."""
    try:
        ctx.obj = _load_config(config_path, overrides)
    except ZoneMeterError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(exit_code_for(e))


@cli.command()
@click.pass_obj
def simulate(config: RunConfig):
    """Generate a synthetic campus dataset with known parameters."""
    summary = _run(runner.run_simulate, config)
    click.echo(
        f"simulated {summary['days']} days, {summary['zones']} zones, "
        f"{summary['timestamps']} timestamps (seed {summary['seed']})"
    )
    _echo_files(summary)


@cli.command()
@click.pass_obj
def fit(config: RunConfig):
    """Fit the fresh-air, building, and fan models."""
    summary = _run(runner.run_fit, config)
    click.echo(summary["report_text"])
    click.echo(f"wrote {summary['models']}")
    click.echo(f"wrote {summary['fit_report']}")


@cli.command()
@click.pass_obj
def disaggregate(config: RunConfig):
    """Apply fitted models to produce per-zone load series."""
    summary = _run(runner.run_disaggregate, config)
    click.echo(
        f"disaggregated {summary['n_zones']} zones over {summary['timestamps']} timestamps"
    )
    click.echo(
        f"coverage mean {summary['mean_coverage']:.3f}, min {summary['min_coverage']:.3f}"
    )
    for flag, count in summary["flags"].items():
        click.echo(f"flag {flag}: {count} samples")
    click.echo(f"wrote {summary['zone_loads']}")
    click.echo(f"wrote {summary['diagnostics']}")


@cli.command()
@click.pass_obj
def report(config: RunConfig):
    """Compute flexibility metrics, thermal impact, and charts."""
    summary = _run(runner.run_report, config)
    click.echo(
        f"report covers {summary['n_buildings']} buildings, {summary['n_ahus']} AHUs, "
        f"{summary['n_zones']} zones"
    )
    click.echo(f"wrote {summary['report']}")
    click.echo(f"wrote {summary['thermal']}")
    for p in summary["charts"]:
        click.echo(f"wrote {p}")


@cli.command()
@click.pass_obj
def pipeline(config: RunConfig):
    """Run simulate, fit, disaggregate, and report in sequence."""
    summary = _run(runner.run_pipeline, config)
    for stage in ("simulate", "fit", "disaggregate", "report"):
        click.echo(f"[{stage}] done")
    _echo_files(summary["report"])
    click.echo(f"models at {summary['fit']['models']}")
    click.echo(f"zone loads at {summary['disaggregate']['zone_loads']}")


@cli.command()
@click.pass_obj
def init(config: RunConfig):
    """Print the effective configuration as JSON."""
    import json

    click.echo(json.dumps(config.model_dump(), indent=2))


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.pass_obj
def serve(config: RunConfig, host, port):
    """Serve the pipeline stages over HTTP."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(default_config=config), host=host, port=port)


def main():
    cli(prog_name="zonemeter")


if __name__ == "__main__":
    main()
