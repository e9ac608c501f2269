import os
import warnings

import pytest

from dampkdv.damping import constant_profile
from dampkdv.dichotomy import TrialOracle
from dampkdv.io import read_config
from dampkdv.schemes import get_scheme
from dampkdv.simulation import SimulationConfig
from dampkdv.simulation import run_simulation
from dampkdv.spectral import make_grid
from dampkdv.timestepping import StepController


def _config_dict(**kwargs):
    data = {
        "grid": {"half_length": 1.0, "n_points": 8},
        "p": 5,
        "initial": {"type": "samples", "values": [0.0] * 8},
        "damping": {"type": "constant", "gamma": 0.1},
        "controller": {"mode": "fixed", "dt": 0.1, "dt_max": 0.1},
        "t_end": 1.0,
    }
    data.update(kwargs)
    return data


def test_unknown_scheme():
    message = (
        "Unknown scheme specified."
        " Use one of sanz-serna, crank-nicolson, implicit-euler."
    )
    with pytest.raises(NotImplementedError, match=message):
        get_scheme("leapfrog")
    with pytest.raises(NotImplementedError, match="Unknown scheme specified"):
        SimulationConfig.from_dict(_config_dict(scheme="rk4"))


def test_unknown_config_key():
    message = "tmax cannot be used in 'config'"
    with pytest.raises(ValueError, match=message):
        SimulationConfig.from_dict(_config_dict(tmax=20))


@pytest.mark.parametrize("key", ["grid", "p", "initial"])
def test_missing_config_key(key):
    data = _config_dict()
    del data[key]
    with pytest.raises(ValueError, match=f"missing required key '{key}'"):
        SimulationConfig.from_dict(data)


@pytest.mark.parametrize(
    "kwargs,message",
    [
        ({"grid": {"half_length": 1.0}}, "needs both 'half_length' and 'n_points'"),
        ({"grid": {"half_length": 1.0, "n_points": 12}}, "power of two"),
        ({"initial": {"type": "gaussian"}}, "Unknown initial data type 'gaussian'"),
        ({"initial": {"type": "soliton", "d": 1.0}}, "needs a speed 'c'"),
        ({"initial": {"type": "samples", "values": [0.0]}}, "must have 8 values"),
        (
            {"initial": {"type": "soliton", "c": 1.5, "shift": 1}},
            "shift cannot be used",
        ),
        ({"damping": {"type": "constant", "gamma": -1.0}}, "must be nonnegative"),
        ({"t_end": 0}, "t_end must be positive"),
        ({"blowup_ratio": 1}, "blowup_ratio must be > 1"),
        ({"record_every": 0}, "record_every must be an integer"),
        ({"snapshot_times": [-1.0]}, "Snapshot times must be nonnegative"),
        ({"controller": {"mode": "fixed", "step": 0.1}}, "step cannot be used"),
    ],
)
def test_invalid_config(kwargs, message):
    with pytest.raises(ValueError, match=message):
        SimulationConfig.from_dict(_config_dict(**kwargs))


def test_non_object_config(testdir):
    with pytest.raises(ValueError, match="is not valid JSON"):
        read_config(os.path.join(testdir, "truncated.json"))
    with pytest.raises(OSError):
        read_config(os.path.join(testdir, "missing.json"))


def test_snapshot_warning_suppressed():
    config = SimulationConfig.from_dict(_config_dict(snapshot_times=[5.0]))
    with warnings.catch_warnings():
        # the test should fail if any warning is thrown
        warnings.simplefilter("error")
        try:
            run_simulation(config, suppress_stdout=True)
        except Warning as e:
            warning_text = str(e)
            pytest.fail(f"Unexpected warning: {warning_text}")


def test_snapshot_warning():
    config = SimulationConfig.from_dict(_config_dict(snapshot_times=[5.0]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(UserWarning) as e:
            run_simulation(config)
        assert str(e.value) == "Snapshot time 5.0 is beyond t_end=1.0, skipped"


def test_omega_warning_suppressed():
    config = SimulationConfig.from_dict(_config_dict(p=2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        try:
            run_simulation(config, suppress_stdout=True)
        except Warning as e:
            warning_text = str(e)
            pytest.fail(f"Unexpected warning: {warning_text}")


def test_failed_trial_warning():
    grid = make_grid(1.0, 8)
    template = SimulationConfig(
        grid,
        5,
        {"type": "samples", "values": [0.0] * 8},
        controller=StepController(mode="fixed", dt=0.1, dt_max=0.1),
        max_steps=2,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(UserWarning) as e:
            TrialOracle(template).evaluate(0.1, constant_profile(grid, 0.1))
        assert "counted as no explosion" in str(e.value)

    trial = TrialOracle(template, suppress_stdout=True).evaluate(
        0.1, constant_profile(grid, 0.1)
    )
    assert not trial.exploded
    assert trial.outcome.kind == "failure"
