import logging
import os

import click

from . import __version__
from .dichotomy import BracketNotFound
from .dichotomy import TrialOracle
from .dichotomy import build_staircase
from .dichotomy import constant_dichotomy
from .dichotomy import gaussian_envelopes
from .handlers import SimulationHandler
from .io import read_config
from .io import run_manifest
from .io import write_envelopes
from .io import write_manifest
from .io import write_report
from .io import write_search
from .simulation import run_simulation
from .utils import parse_bands


logger = logging.getLogger("dampkdv")
logger.setLevel(logging.INFO)


# exit status of a run that blew up
EXIT_BLOWUP = 2


class Config:
    def __init__(self):
        self.config = {}

    def set_config(self, key, value):
        self.config[key] = value


pass_config = click.make_pass_decorator(Config)


def _fail(message):
    click.echo(f"Error: {message}", err=True)
    click.get_current_context().exit(1)


def _load(config_path):
    try:
        return read_config(config_path)
    except (OSError, ValueError, NotImplementedError) as e:
        _fail(e)


def _template(config_path):
    template = _load(config_path)
    if template.damping is not None:
        logger.info("Damping of the config is replaced by the search trials")
    return template


@click.group(name="dampkdv")
@click.version_option(version=__version__)
@click.option("-q", "--quiet", is_flag=True, help="Suppress logs and warnings.")
@click.option(
    "-j",
    "--jobs",
    default=1,
    type=click.IntRange(min=1),
    help="Worker processes for independent simulations.",
)
@click.pass_context
def cli(ctx, *args, **kwargs):
    """dampkdv: damped gKdV simulations and damping searches"""
    ctx.obj = Config()
    for key, value in kwargs.items():
        ctx.obj.set_config(key, value)
    if kwargs["quiet"]:
        logger.setLevel(logging.ERROR)


@cli.command("simulate")
@click.option(
    "-o", "--output", default="output", show_default=True, help="Output directory."
)
@click.argument("config_path")
@pass_config
def simulate(c, config_path, output):
    """Run one simulation and write norms.csv, snapshots.csv, energy.csv,
    outcome.json and manifest.json. Exits with 2 when the run blows up.
    """
    quiet = c.config.get("quiet")
    config = _load(config_path)
    try:
        report = run_simulation(config, suppress_stdout=quiet)
        write_report(report, output)
        write_manifest(run_manifest("simulate", config, output), output)
    except (ValueError, OSError) as e:
        _fail(e)
    outcome = report.outcome
    if outcome.is_blowup:
        click.echo(f"Blow-up at t={outcome.t_detect:.6g} ({outcome.trigger})")
        click.get_current_context().exit(EXIT_BLOWUP)
    if outcome.kind == "failure":
        _fail(outcome.description)
    click.echo(f"Completed at t={outcome.t_end:.6g}")


@cli.command("find-constant")
@click.option("--gamma0", default=0.01, show_default=True, help="Initial damping.")
@click.option("--eps", default=2e-4, show_default=True, help="Bracket width.")
@click.option(
    "-o", "--output", default="output", show_default=True, help="Output directory."
)
@click.argument("config_path")
@pass_config
def find_constant(c, config_path, gamma0, eps, output):
    """Bracket the smallest constant damping preventing blow-up and
    write search.json and profile.csv.
    """
    quiet = c.config.get("quiet")
    template = _template(config_path)
    oracle = TrialOracle(template, suppress_stdout=quiet)
    try:
        result = constant_dichotomy(gamma0, eps, oracle)
        write_search(result, output)
        manifest = run_manifest(
            "find-constant", template, output, gamma0=gamma0, eps=eps
        )
        write_manifest(manifest, output)
    except (ValueError, BracketNotFound, OSError) as e:
        _fail(e)
    click.echo(
        f"gamma_e={result.gamma_e:.6g} gamma_a={result.gamma_a:.6g}"
        f" ({oracle.n_simulations} simulations)"
    )


@cli.command("find-bands")
@click.option(
    "--bands",
    default="64,128,256",
    show_default=True,
    help="Comma-separated band cutoffs. Example: 64,128,256",
)
@click.option("--iters", default=10, show_default=True, help="Bisections per band.")
@click.option("--gamma0", default=0.01, show_default=True, help="Initial damping.")
@click.option("--eps", default=2e-4, show_default=True, help="Bracket width.")
@click.option(
    "-o", "--output", default="output", show_default=True, help="Output directory."
)
@click.argument("config_path")
@pass_config
def find_bands(c, config_path, bands, iters, gamma0, eps, output):
    """Build a non-increasing band profile, its Gaussian envelopes and
    check them by simulation. Writes profile.csv, envelopes.csv and
    search.json.
    """
    quiet = c.config.get("quiet")
    try:
        cutoffs = parse_bands(bands)
    except ValueError as e:
        _fail(e)
    template = _template(config_path)
    oracle = TrialOracle(template, suppress_stdout=quiet)
    try:
        stair = build_staircase(cutoffs, gamma0, eps, iters, oracle)
        gamma_1, gamma_2 = gaussian_envelopes(stair)
    except (ValueError, BracketNotFound) as e:
        _fail(e)

    handler = SimulationHandler(jobs=c.config.get("jobs", 1))
    reports = handler.run(
        [template.with_damping(gamma_1), template.with_damping(gamma_2)],
        suppress_stdout=quiet,
    )
    envelopes = {
        name: dict(profile=profile.to_dict(), **report.outcome.to_dict())
        for name, profile, report in zip(
            ("gamma_1", "gamma_2"), (gamma_1, gamma_2), reports
        )
    }
    try:
        write_search(stair, output, extra={"envelopes": envelopes})
        write_envelopes(stair, gamma_1, gamma_2, os.path.join(output, "envelopes.csv"))
        manifest = run_manifest(
            "find-bands",
            template,
            output,
            bands=cutoffs,
            iters=iters,
            gamma0=gamma0,
            eps=eps,
        )
        write_manifest(manifest, output)
    except OSError as e:
        _fail(e)
    for name, report in zip(("gamma_1", "gamma_2"), reports):
        click.echo(f"{name}: {report.outcome!r}")
