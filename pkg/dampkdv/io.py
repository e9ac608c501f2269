import json
import os

import pandas as pd

from .__version__ import __version__
from .core import StaircaseResult
from .simulation import SimulationConfig
from .utils import write_csv
from .utils import write_json


def read_config(path):
    """Reads a JSON run configuration.

    Parameters
    ----------
    path : str
        Filepath of the JSON document.

    Returns
    -------
    config : dampkdv.simulation.SimulationConfig

    Raises
    ------
    OSError
        The file cannot be read.
    ValueError
        The document is not valid JSON or not a valid configuration.

    """
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path} is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise ValueError(f"{path} must hold a JSON object")
    try:
        return SimulationConfig.from_dict(data)
    except TypeError as e:
        raise ValueError(f"Invalid value in {path}: {e}") from None


def write_report(report, out_dir):
    """Writes norms.csv, snapshots.csv, energy.csv and outcome.json."""
    report.export(out_dir)


def write_search(result, out_dir, extra=None):
    """Writes search.json, and profile.csv for the final profile.

    Parameters
    ----------
    result : dampkdv.core.DichotomyResult or dampkdv.core.StaircaseResult
    out_dir : str
    extra : dict, optional (default: None)
        Additional top-level entries of search.json.

    """
    os.makedirs(out_dir, exist_ok=True)
    data = result.to_dict()
    if extra:
        data.update(extra)
    write_json(data, os.path.join(out_dir, "search.json"))
    if isinstance(result, StaircaseResult):
        profile = result.profile
    else:
        profile = result.profile_a
    profile.to_csv(os.path.join(out_dir, "profile.csv"))


def write_envelopes(stair, gamma_1, gamma_2, path):
    """Writes the staircases and their Gaussian envelopes to a csv file
    with header mode,staircase_a,staircase_e,gamma_1,gamma_2.
    """
    grid = stair.profile.grid
    order = grid.mode_order()
    df = pd.DataFrame(
        {
            "mode": grid.modes[order],
            "staircase_a": stair.profile.gamma[order],
            "staircase_e": stair.profile_e.gamma[order],
            "gamma_1": gamma_1.gamma[order],
            "gamma_2": gamma_2.gamma[order],
        }
    )
    write_csv(df, path)


def run_manifest(subcommand, config, out_dir, **params):
    """Everything needed to re-run a command.

    Parameters
    ----------
    subcommand : str
    config : dampkdv.simulation.SimulationConfig
        Resolved configuration (the search template for searches).
    out_dir : str
    params : dict
        Search parameters.

    Returns
    -------
    manifest : dict

    """
    return {
        "subcommand": subcommand,
        "version": __version__,
        "config": config.to_dict(),
        "parameters": params,
        "output": os.path.abspath(out_dir),
        # no randomness anywhere; a run is reproducible on one thread
        "deterministic": True,
    }


def write_manifest(manifest, out_dir):
    """Writes manifest.json to out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    write_json(manifest, os.path.join(out_dir, "manifest.json"))
