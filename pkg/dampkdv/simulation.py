import copy
import logging
import math
import warnings

import numpy as np

from .core import EnergyRecord
from .core import NormSeries
from .core import Outcome
from .core import SimulationReport
from .damping import DampingProfile
from .damping import OmegaInputs
from .damping import omega_threshold
from .schemes import get_scheme
from .spectral import NonFiniteError
from .spectral import RealField
from .spectral import inverse
from .spectral import make_grid
from .spectral import norms
from .spectral import soliton
from .spectral import to_physical
from .spectral import to_spectral
from .timestepping import PicardConfig
from .timestepping import PicardDiverged
from .timestepping import StepController
from .timestepping import StepUnderflow
from .timestepping import advance
from .utils import validate_keys


logger = logging.getLogger("dampkdv")


# halvings of dt allowed after a diverged Picard iteration
MAX_PICARD_RETRIES = 3

CONFIG_KEYS = [
    "grid",
    "p",
    "initial",
    "damping",
    "scheme",
    "picard",
    "controller",
    "t_end",
    "blowup_ratio",
    "snapshot_times",
    "record_every",
    "dealias",
    "nonlinear",
    "max_steps",
]
INITIAL_KEYS = {
    "soliton": ["type", "c", "d", "amplitude_factor", "sign", "width"],
    "samples": ["type", "values"],
}


class SimulationConfig:
    """Everything needed to reproduce one run.

    Parameters
    ----------
    grid : dampkdv.spectral.Grid
    p : int
        Nonlinearity exponent.
    initial : dict
        {'type': 'soliton', 'c': ..., 'd': ..., 'amplitude_factor': ...,
        'sign': ..., 'width': ...} or {'type': 'samples', 'values': [...]}.
    damping : dampkdv.damping.DampingProfile, optional (default: None)
        None only for search templates.
    scheme : str, optional (default: 'sanz-serna')
        {'sanz-serna', 'crank-nicolson', 'implicit-euler'}
    picard : dampkdv.timestepping.PicardConfig, optional (default: None)
    controller : dampkdv.timestepping.StepController, optional (default: None)
    t_end : float, optional (default: 20.0)
    blowup_ratio : float, optional (default: 1e3)
        Blow-up is declared when h1(t) >= blowup_ratio * h1(0).
    snapshot_times : list, optional (default: None)
    record_every : int, optional (default: 10)
        Norms are recorded every record_every accepted steps, at
        snapshot times and at the final time.
    dealias : bool, optional (default: False)
    nonlinear : bool, optional (default: True)
    max_steps : int, optional (default: 2000000)

    """

    def __init__(
        self,
        grid,
        p,
        initial,
        damping=None,
        scheme="sanz-serna",
        picard=None,
        controller=None,
        t_end=20.0,
        blowup_ratio=1e3,
        snapshot_times=None,
        record_every=10,
        dealias=False,
        nonlinear=True,
        max_steps=2_000_000,
    ):
        if int(p) != p or p < 1:
            raise ValueError(f"p must be an integer >= 1, got {p}")
        get_scheme(scheme)
        if not t_end > 0 or not math.isfinite(t_end):
            raise ValueError(f"t_end must be positive, got {t_end}")
        if not blowup_ratio > 1:
            raise ValueError(f"blowup_ratio must be > 1, got {blowup_ratio}")
        if int(record_every) != record_every or record_every < 1:
            raise ValueError(
                f"record_every must be an integer >= 1, got {record_every}"
            )
        if int(max_steps) != max_steps or max_steps < 1:
            raise ValueError(f"max_steps must be an integer >= 1, got {max_steps}")
        snapshot_times = [] if snapshot_times is None else list(snapshot_times)
        if any(not s >= 0 for s in snapshot_times):
            raise ValueError(
                f"Snapshot times must be nonnegative, got {snapshot_times}"
            )
        if damping is not None:
            grid.check_same(damping.grid)
        _validate_initial(initial, grid)

        self.grid = grid
        self.p = int(p)
        self.initial = dict(initial)
        self.damping = damping
        self.scheme = scheme
        self.picard = picard if picard is not None else PicardConfig()
        self.controller = controller if controller is not None else StepController()
        self.t_end = float(t_end)
        self.blowup_ratio = float(blowup_ratio)
        self.snapshot_times = [float(s) for s in snapshot_times]
        self.record_every = int(record_every)
        self.dealias = bool(dealias)
        self.nonlinear = bool(nonlinear)
        self.max_steps = int(max_steps)
        self.initial_field()

    def __repr__(self):
        return (
            f"<SimulationConfig p={self.p} scheme={self.scheme} t_end={self.t_end}"
            f" damping={self.damping!r}>"
        )

    def with_damping(self, profile):
        """Returns a copy using the given damping profile."""
        self.grid.check_same(profile.grid)
        config = copy.copy(self)
        config.damping = profile
        return config

    def initial_field(self):
        """Samples u0 on the grid."""
        kw = {k: v for k, v in self.initial.items() if k != "type"}
        if self.initial["type"] == "samples":
            return RealField(self.grid, kw["values"])
        return soliton(self.grid, self.p, **kw)

    def to_dict(self):
        return {
            "grid": {
                "half_length": self.grid.half_length,
                "n_points": self.grid.n_points,
            },
            "p": self.p,
            "initial": dict(self.initial),
            "damping": None if self.damping is None else self.damping.to_dict(),
            "scheme": self.scheme,
            "picard": self.picard.to_dict(),
            "controller": self.controller.to_dict(),
            "t_end": self.t_end,
            "blowup_ratio": self.blowup_ratio,
            "snapshot_times": list(self.snapshot_times),
            "record_every": self.record_every,
            "dealias": self.dealias,
            "nonlinear": self.nonlinear,
            "max_steps": self.max_steps,
        }

    @classmethod
    def from_dict(cls, data):
        """Builds a config from its JSON description. Missing keys take
        their defaults; unknown keys raise ValueError.
        """
        validate_keys(data, CONFIG_KEYS, "config")
        for key in ("grid", "p", "initial"):
            if key not in data:
                raise ValueError(f"Config is missing required key '{key}'")
        grid_kwargs = data["grid"]
        validate_keys(grid_kwargs, ["half_length", "n_points"], "grid")
        if set(grid_kwargs) != {"half_length", "n_points"}:
            raise ValueError("Grid needs both 'half_length' and 'n_points'")
        grid = make_grid(grid_kwargs["half_length"], grid_kwargs["n_points"])
        kwargs = {k: v for k, v in data.items() if k not in ("grid", "damping")}
        if data.get("damping") is not None:
            kwargs["damping"] = DampingProfile.from_dict(grid, data["damping"])
        if "picard" in data:
            kwargs["picard"] = PicardConfig.from_dict(data["picard"])
        if "controller" in data:
            kwargs["controller"] = StepController.from_dict(data["controller"])
        return cls(grid, **kwargs)


def _validate_initial(initial, grid):
    kind = initial.get("type")
    if kind not in INITIAL_KEYS:
        raise ValueError(
            f"Unknown initial data type '{kind}'. Use one of {', '.join(INITIAL_KEYS)}"
        )
    validate_keys(initial, INITIAL_KEYS[kind], "initial")
    if kind == "soliton" and "c" not in initial:
        raise ValueError("Soliton initial data needs a speed 'c'")
    if kind == "samples" and len(initial.get("values", [])) != grid.n_points:
        raise ValueError(f"Initial samples must have {grid.n_points} values")


def energy_terms(coefficients, profile, p, nonlinear=True):
    """Energy, ||u_xx|| and energy source S of the state.

    E = ||u_x||^2 / 2 - int u^{p+2} dx / ((p+1)(p+2))
    S = -|u_x|_gamma^2 + <L_gamma u, u^{p+1}> / (p+1)

    The potential terms are dropped for the linear equation.
    """
    grid = profile.grid
    w = grid.weight
    k = grid.odd_wavenumbers
    power = np.abs(coefficients) ** 2
    energy = 0.5 * w * float(np.sum(k**2 * power))
    uxx_l2 = math.sqrt(w * float(np.sum(grid.wavenumbers**4 * power)))
    source = -w * float(np.sum(profile.gamma * k**2 * power))
    if nonlinear:
        u = inverse(coefficients)
        damped = inverse(profile.gamma * coefficients)
        with np.errstate(over="ignore", invalid="ignore"):
            up1 = u ** (p + 1)
            energy -= float(np.sum(up1 * u)) * grid.dx / ((p + 1) * (p + 2))
            source += float(np.sum(damped * up1)) * grid.dx / (p + 1)
    return energy, uxx_l2, source


def classify(series, status=None, blowup_ratio=1e3, t_end=None):
    """Classifies a run from its recorded norms.

    Parameters
    ----------
    series : dampkdv.core.NormSeries
    status : dampkdv.core.Outcome, optional (default: None)
        Outcome signalled by the driver (step underflow, diverged
        Picard iteration, non-finite state or failure).
    blowup_ratio : float, optional (default: 1e3)
    t_end : float, optional (default: None)
        Reported for a completed run; defaults to the last recorded time.

    Returns
    -------
    outcome : dampkdv.core.Outcome

    """
    if not len(series):
        raise ValueError("Cannot classify an empty norm series")
    df = series.df
    t = df["t"].to_numpy()
    h1 = df["h1"].to_numpy()
    finite = np.isfinite(df[["l2", "h1", "hgamma", "linf"]].to_numpy()).all(axis=1)
    h1_0 = h1[0]
    crossed = np.zeros(len(t), dtype=bool)
    if finite[0] and h1_0 > 0:
        with np.errstate(invalid="ignore"):
            crossed = h1 >= blowup_ratio * h1_0
    events = np.flatnonzero(~finite | crossed)
    if events.size:
        i = events[0]
        trigger = "NonFinite" if not finite[i] else "H1Ratio"
        return Outcome.blowup(float(t[i]), trigger)
    if status is not None:
        return status
    return Outcome.completed(float(t[-1]) if t_end is None else t_end)


def dissipation_residual(series):
    """Largest defect of N(u(t)) + D(t) = N(u0) over the recorded times,
    relative to N(u0) = ||u0||^2, or absolute when N(u0) is 0.
    """
    if not len(series):
        return 0.0
    df = series.df
    n = df["l2"].to_numpy() ** 2
    defect = np.abs(n + df["D"].to_numpy() - n[0])
    residual = float(np.max(defect))
    return residual / n[0] if n[0] > 0 else residual


def energy_residual(record):
    """Largest defect of E(t) = E(0) + int_0^t S over the recorded times,
    relative to |E(0)|.
    """
    if not len(record):
        return 0.0
    df = record.df
    t = df["t"].to_numpy()
    e = df["energy"].to_numpy()
    s = df["energy_source"].to_numpy()
    integral = np.concatenate(([0.0], np.cumsum(0.5 * np.diff(t) * (s[1:] + s[:-1]))))
    defect = np.abs(e - e[0] - integral)
    return float(np.max(defect)) / max(abs(e[0]), 1e-300)


def _record(series, energy, t, dt, state, field, profile, config):
    bundle = norms(field, profile)
    series.append(t, dt, bundle)
    energy.append(
        t, *energy_terms(state.coefficients, profile, config.p, config.nonlinear)
    )
    return bundle


def run_simulation(config, suppress_stdout=False):
    """Marches the damped gKdV equation from t = 0 to t_end or until
    blow-up is detected.

    Parameters
    ----------
    config : dampkdv.simulation.SimulationConfig
    suppress_stdout : bool, optional (default: False)
        Silence warnings.

    Returns
    -------
    report : dampkdv.core.SimulationReport

    """
    if config.damping is None:
        raise ValueError("A damping profile is required to run a simulation")
    with warnings.catch_warnings():
        if suppress_stdout:
            warnings.simplefilter("ignore")
        return _run(config)


def _run(config):
    grid = config.grid
    profile = config.damping
    p = config.p
    controller = config.controller
    u0 = config.initial_field()
    if not u0.is_finite:
        raise ValueError("Initial data contains non-finite samples")
    scheme = get_scheme(config.scheme)(
        grid, profile, p, nonlinear=config.nonlinear, dealias=config.dealias
    )
    theta = omega_threshold(OmegaInputs.from_field(u0, p))

    pending = []
    for s in sorted(set(config.snapshot_times)):
        if s > config.t_end:
            warnings.warn(f"Snapshot time {s} is beyond t_end={config.t_end}, skipped")
        else:
            pending.append(s)

    logger.info(
        f"Running {config.scheme} p={p} N={grid.n_points} L={grid.half_length}"
        f" damping={profile.spec['type']} t_end={config.t_end}"
    )
    series = NormSeries()
    energy = EnergyRecord()
    snapshots = {}
    state = to_spectral(u0)
    t = 0.0
    bundle = _record(series, energy, t, 0.0, state, u0, profile, config)
    h1_0 = bundle.h1
    if pending and pending[0] == 0:
        snapshots[pending.pop(0)] = u0

    status = None
    n_steps = 0
    last_dt = 0.0
    while t < config.t_end:
        if n_steps >= config.max_steps:
            status = Outcome.failure("step budget exhausted")
            break
        target = pending[0] if pending else config.t_end
        remaining = target - t
        try:
            dt = controller.next_dt(scheme, bundle.linf, p, grid.dx)
            dt = min(dt, remaining)
            for retry in range(MAX_PICARD_RETRIES + 1):
                try:
                    result = advance(scheme, state, dt, picard=config.picard)
                    break
                except PicardDiverged as e:
                    if retry == MAX_PICARD_RETRIES:
                        raise
                    logger.warning(f"{e}; retrying with dt={0.5 * dt:.3e}")
                    dt = controller.next_dt(
                        scheme, bundle.linf, p, grid.dx, failed_dt=dt
                    )
        except StepUnderflow as e:
            logger.info(f"Step underflow at t={t:.6g}: {e}")
            status = Outcome.blowup(t, "StepUnderflow")
            break
        except PicardDiverged as e:
            logger.info(f"Picard iteration diverged at t={t:.6g}: {e}")
            status = Outcome.blowup(t, "PicardDiverged")
            break
        except NonFiniteError as e:
            logger.info(f"Non-finite state at t={t:.6g}: {e}")
            status = Outcome.blowup(t, "NonFinite")
            break

        landed = dt == remaining
        state = result.state
        t = target if landed else t + dt
        last_dt = dt
        n_steps += 1
        logger.debug(
            f"step {n_steps}: t={t:.6g} dt={dt:.3e}"
            f" picard_iterations={result.picard_iterations}"
        )
        field = to_physical(state)
        try:
            bundle = norms(field, profile)
        except NonFiniteError:
            status = Outcome.blowup(t, "NonFinite")
            break
        crossed = h1_0 > 0 and bundle.h1 >= config.blowup_ratio * h1_0
        if n_steps % config.record_every == 0 or landed or crossed:
            _record(series, energy, t, dt, state, field, profile, config)
        if landed and pending and t == pending[0]:
            snapshots[pending.pop(0)] = field
        if crossed:
            break

    non_finite = status is not None and status.trigger == "NonFinite"
    if t > series.last_time and not non_finite:
        _record(series, energy, t, last_dt, state, to_physical(state), profile, config)
    outcome = classify(series, status, config.blowup_ratio, config.t_end)
    logger.info(f"Finished after {n_steps} steps: {outcome!r}")
    return SimulationReport(
        config,
        series,
        energy,
        snapshots,
        outcome,
        theta,
        dissipation_residual(series),
        energy_residual(energy),
        n_steps=n_steps,
    )
