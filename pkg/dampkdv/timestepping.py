import logging
import math

import numpy as np

from .schemes import BaseScheme
from .schemes import PicardDiverged  # noqa: F401
from .schemes import get_scheme
from .spectral import SpectralField
from .spectral import inverse
from .utils import validate_keys


logger = logging.getLogger("dampkdv")


CONTROLLER_MODES = ["fixed", "adaptive"]


class StepUnderflow(RuntimeError):
    """Raised when the step controller needs a dt below dt_min. Read by
    the simulation driver as a blow-up signal.
    """


class PicardConfig:
    """Settings of the fixed-point iteration solving each implicit step.

    Parameters
    ----------
    tolerance : float, optional (default: 1e-12)
        Stop when the L2 norm of the difference of successive iterates
        is below tolerance * (1 + L2 norm of the iterate).
    max_iterations : int, optional (default: 100)
    under_relaxation : float, optional (default: 1.0)
        Factor in (0, 1] applied to each Picard update.

    """

    def __init__(self, tolerance=1e-12, max_iterations=100, under_relaxation=1.0):
        if not tolerance > 0:
            raise ValueError(f"Picard tolerance must be positive, got {tolerance}")
        if int(max_iterations) != max_iterations or max_iterations < 1:
            raise ValueError(
                f"Picard max_iterations must be an integer >= 1, got {max_iterations}"
            )
        if not 0 < under_relaxation <= 1:
            raise ValueError(
                f"Picard under_relaxation must lie in (0, 1], got {under_relaxation}"
            )
        self.tolerance = float(tolerance)
        self.max_iterations = int(max_iterations)
        self.under_relaxation = float(under_relaxation)

    def __repr__(self):
        return (
            f"<PicardConfig tolerance={self.tolerance}"
            f" max_iterations={self.max_iterations}"
            f" under_relaxation={self.under_relaxation}>"
        )

    def to_dict(self):
        return {
            "tolerance": self.tolerance,
            "max_iterations": self.max_iterations,
            "under_relaxation": self.under_relaxation,
        }

    @classmethod
    def from_dict(cls, kwargs):
        validate_keys(
            kwargs, ["tolerance", "max_iterations", "under_relaxation"], "picard"
        )
        return cls(**kwargs)


class StepController:
    """Chooses the time step.

    Parameters
    ----------
    mode : str, optional (default: 'adaptive')
        {'fixed', 'adaptive'}
        'fixed' always returns dt. 'adaptive' returns safety_factor
        times the stability bound of the scheme, capped at dt_max.
    dt : float, optional (default: 1e-3)
    dt_min : float, optional (default: 1e-6)
    dt_max : float, optional (default: 1e-2)
    safety_factor : float, optional (default: 0.8)

    """

    def __init__(
        self, mode="adaptive", dt=1e-3, dt_min=1e-6, dt_max=1e-2, safety_factor=0.8
    ):
        if mode not in CONTROLLER_MODES:
            raise ValueError(
                f"Unknown controller mode '{mode}'."
                f" Use one of {', '.join(CONTROLLER_MODES)}"
            )
        if not 0 < dt_min <= dt <= dt_max:
            raise ValueError(
                f"Step sizes must satisfy 0 < dt_min <= dt <= dt_max,"
                f" got dt_min={dt_min}, dt={dt}, dt_max={dt_max}"
            )
        if not 0 < safety_factor < 1:
            raise ValueError(f"safety_factor must lie in (0, 1), got {safety_factor}")
        self.mode = mode
        self.dt = float(dt)
        self.dt_min = float(dt_min)
        self.dt_max = float(dt_max)
        self.safety_factor = float(safety_factor)

    def __repr__(self):
        return f"<StepController mode={self.mode} dt={self.dt}>"

    def to_dict(self):
        return {
            "mode": self.mode,
            "dt": self.dt,
            "dt_min": self.dt_min,
            "dt_max": self.dt_max,
            "safety_factor": self.safety_factor,
        }

    @classmethod
    def from_dict(cls, kwargs):
        validate_keys(
            kwargs, ["mode", "dt", "dt_min", "dt_max", "safety_factor"], "controller"
        )
        return cls(**kwargs)

    def next_dt(self, scheme, linf, p, dx, failed_dt=None):
        """Returns the next time step.

        Parameters
        ----------
        scheme : str or dampkdv.schemes.BaseScheme
            Scheme flavor or instance, for the stability bound.
        linf : float
            Max norm of the current state.
        p : int
        dx : float
        failed_dt : float, optional (default: None)
            dt of a step whose Picard iteration diverged; half of it is
            returned.

        Returns
        -------
        dt : float

        """
        if failed_dt is not None:
            dt = 0.5 * failed_dt
            if dt < self.dt_min:
                raise StepUnderflow(
                    f"Halved step {dt:.3e} is below dt_min={self.dt_min:.3e}"
                )
            return dt
        if self.mode == "fixed":
            return self.dt
        dt = self.safety_factor * stability_dt_bound(scheme, linf, p, dx)
        if dt < self.dt_min:
            raise StepUnderflow(
                f"Stable step {dt:.3e} is below dt_min={self.dt_min:.3e}"
                f" (linf={linf:.6g})"
            )
        return min(dt, self.dt_max)


class StepResult:
    """Outcome of one accepted time step.

    Attributes
    ----------
    state : dampkdv.spectral.SpectralField
    picard_iterations : int
    picard_residual : float
    dt_used : float
    residuals : list
        Picard residual of every sweep.

    """

    def __init__(
        self, state, picard_iterations, picard_residual, dt_used, residuals=None
    ):
        self.state = state
        self.picard_iterations = picard_iterations
        self.picard_residual = picard_residual
        self.dt_used = dt_used
        self.residuals = residuals if residuals is not None else [picard_residual]

    def __repr__(self):
        return (
            f"<StepResult dt_used={self.dt_used:.3e}"
            f" picard_iterations={self.picard_iterations}"
            f" picard_residual={self.picard_residual:.3e}>"
        )


def stability_dt_bound(scheme, linf, p, dx):
    """Step bound under which the Picard map of the scheme contracts.

    Parameters
    ----------
    scheme : str or dampkdv.schemes.BaseScheme
        {'sanz-serna', 'crank-nicolson', 'implicit-euler'}
    linf : float
    p : int
    dx : float

    Returns
    -------
    bound : float
        math.inf when linf is 0.

    """
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx}")
    cls = get_scheme(scheme) if isinstance(scheme, str) else scheme
    try:
        return cls.stability_bound(linf, p, dx)
    except OverflowError:
        return 0.0


def next_dt(controller, scheme, state, p, dx, failed_dt=None):
    """Returns the next dt for the state given as a SpectralField."""
    linf = float(np.max(np.abs(inverse(state.coefficients))))
    return controller.next_dt(scheme, linf, p, dx, failed_dt=failed_dt)


def advance(scheme, state, dt, picard=None):
    """Advances state by dt with an already built scheme."""
    if picard is None:
        picard = PicardConfig()
    residuals = []
    coefficients, iterations, residual = scheme.solve(
        state.coefficients,
        dt,
        tolerance=picard.tolerance,
        max_iterations=picard.max_iterations,
        relaxation=picard.under_relaxation,
        residuals=residuals,
    )
    return StepResult(
        SpectralField(state.grid, coefficients),
        iterations,
        residual,
        dt,
        residuals=residuals,
    )


def step(scheme, state, profile, p, dt, picard=None, nonlinear=True, dealias=False):
    """Advances û^n by one step of the chosen implicit scheme.

    Parameters
    ----------
    scheme : str or dampkdv.schemes.BaseScheme
        Scheme flavor {'sanz-serna', 'crank-nicolson', 'implicit-euler'},
        or a scheme built on the same grid, profile and p.
    state : dampkdv.spectral.SpectralField
    profile : dampkdv.damping.DampingProfile
    p : int
    dt : float
    picard : dampkdv.timestepping.PicardConfig, optional (default: None)
    nonlinear : bool, optional (default: True)
        Drop the u^p u_x term when False.
    dealias : bool, optional (default: False)

    Returns
    -------
    result : dampkdv.timestepping.StepResult

    Raises
    ------
    PicardDiverged
        The fixed-point iteration did not converge.
    NonFiniteError
        A NaN or Inf appeared.

    """
    if not isinstance(scheme, BaseScheme):
        scheme = get_scheme(scheme)(
            state.grid, profile, p, nonlinear=nonlinear, dealias=dealias
        )
    if not math.isfinite(dt):
        raise ValueError(f"dt must be finite, got {dt}")
    return advance(scheme, state, dt, picard=picard)
