import logging
import math
import warnings

import numpy as np

from .core import DichotomyResult
from .core import StaircaseResult
from .core import Trial
from .damping import band_profile
from .damping import constant_profile
from .damping import gaussian_profile
from .simulation import run_simulation
from .utils import validate_cutoffs


logger = logging.getLogger("dampkdv")


# doublings or halvings allowed before giving up on a bracket
MAX_BRACKET_STEPS = 60


class BracketNotFound(RuntimeError):
    """Raised when doubling or halving the damping never flips the
    outcome of the trial runs.
    """


class TrialOracle:
    """Runs one simulation per damping profile and answers whether it
    exploded (any blow-up outcome before t_end).

    Outcomes are cached by profile values since runs are deterministic.

    Parameters
    ----------
    template : dampkdv.simulation.SimulationConfig
        Config whose damping is replaced by each trial profile.
    suppress_stdout : bool, optional (default: False)
        Silence warnings of the trial runs.

    Attributes
    ----------
    n_simulations : int
        Number of simulations actually run.

    """

    def __init__(self, template, suppress_stdout=False):
        self.template = template
        self.grid = template.grid
        self.suppress_stdout = suppress_stdout
        self.n_simulations = 0
        self._cache = {}

    def __repr__(self):
        return f"<{self.__class__.__name__} n_simulations={self.n_simulations}>"

    def evaluate(self, value, profile):
        """Returns the dampkdv.core.Trial of profile, labelled by value."""
        key = profile.key
        if key in self._cache:
            return Trial(value, profile, self._cache[key], cached=True)
        config = self.template.with_damping(profile)
        outcome = run_simulation(config, suppress_stdout=self.suppress_stdout).outcome
        self.n_simulations += 1
        if outcome.kind == "failure" and not self.suppress_stdout:
            warnings.warn(
                f"Trial at gamma={value:.6g} failed ({outcome.description}),"
                " counted as no explosion"
            )
        logger.info(f"Trial {self.n_simulations}: gamma={value:.6g} -> {outcome!r}")
        self._cache[key] = outcome
        return Trial(value, profile, outcome)


def _run_trial(oracle, trials, value, profile):
    trial = oracle.evaluate(value, profile)
    for other in trials:
        if trial.exploded != other.exploded and (
            (trial.exploded and trial.value >= other.value)
            or (other.exploded and other.value >= trial.value)
        ):
            logger.warning(
                f"Blow-up is not monotone in the damping: gamma={trial.value:.6g}"
                f" {trial.outcome.kind}, gamma={other.value:.6g} {other.outcome.kind}"
            )
            break
    trials.append(trial)
    return trial


def constant_dichotomy(gamma0, eps, oracle):
    """Brackets the smallest constant damping preventing blow-up.

    Simulates at gamma0, doubles gamma until the run is damped if it
    explodes (or halves it until it explodes otherwise), then bisects
    the bracket until gamma_a - gamma_e <= eps.

    Parameters
    ----------
    gamma0 : float
        Initial damping, > 0.
    eps : float
        Target bracket width, > 0.
    oracle : dampkdv.dichotomy.TrialOracle

    Returns
    -------
    result : dampkdv.core.DichotomyResult

    """
    if not gamma0 > 0:
        raise ValueError(f"gamma0 must be positive, got {gamma0}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    grid = oracle.grid
    trials = []

    def run(gamma):
        return _run_trial(oracle, trials, gamma, constant_profile(grid, gamma))

    first = run(gamma0)
    factor = 2.0 if first.exploded else 0.5
    current = first
    for __ in range(MAX_BRACKET_STEPS):
        previous, current = current, run(current.value * factor)
        if current.exploded != first.exploded:
            break
    else:
        raise BracketNotFound(
            f"No outcome change after {MAX_BRACKET_STEPS}"
            f" {'doublings' if first.exploded else 'halvings'} from gamma0={gamma0}"
        )
    if first.exploded:
        trial_a, trial_e = current, previous
    else:
        trial_a, trial_e = previous, current
    logger.info(f"Initial bracket: [{trial_e.value:.6g}, {trial_a.value:.6g}]")

    iterations = 0
    while trial_a.value - trial_e.value > eps:
        trial = run(0.5 * (trial_a.value + trial_e.value))
        if trial.exploded:
            trial_e = trial
        else:
            trial_a = trial
        iterations += 1
        logger.info(f"Bracket: [{trial_e.value:.6g}, {trial_a.value:.6g}]")

    return DichotomyResult(
        "constant",
        trial_a.value,
        trial_e.value,
        trial_a.profile,
        trial_e.profile,
        trials,
        iterations,
    )


def band_dichotomy(base, cutoff, nb_iter, oracle):
    """Brackets the damping needed beyond mode cutoff, keeping the
    modes |j| <= cutoff of a damping profile known to prevent blow-up.

    Tries a zero tail first and returns it when it is enough. Otherwise
    halves base's tail until the run explodes, then bisects the tail
    scale nb_iter times.

    Parameters
    ----------
    base : dampkdv.damping.DampingProfile
        Profile whose run completes.
    cutoff : int
        Band edge N, 0 < N < n_points / 2.
    nb_iter : int
        Bisection steps.
    oracle : dampkdv.dichotomy.TrialOracle

    Returns
    -------
    result : dampkdv.core.DichotomyResult
        gamma_a and gamma_e are the tail values at |j| = cutoff + 1.
        gamma_e is None when the zero tail prevents blow-up.

    """
    grid = oracle.grid
    grid.check_same(base.grid)
    validate_cutoffs([cutoff], grid.n_points)
    if int(nb_iter) != nb_iter or nb_iter < 0:
        raise ValueError(f"nb_iter must be a nonnegative integer, got {nb_iter}")
    base_value = base.tail_value(cutoff)
    trials = []

    def run(scale):
        return _run_trial(
            oracle, trials, scale * base_value, base.scale_tail(cutoff, scale)
        )

    if run(1.0).exploded:
        raise ValueError(f"Base profile does not prevent blow-up: {base!r}")
    zero = run(0.0)
    if not zero.exploded:
        logger.info(f"Zero tail beyond N={cutoff} prevents blow-up")
        return DichotomyResult(
            "band", 0.0, None, zero.profile, None, trials, 0, cutoff=cutoff
        )

    scale_a, trial_a = 1.0, trials[0]
    for __ in range(MAX_BRACKET_STEPS):
        trial = run(0.5 * scale_a)
        if trial.exploded:
            scale_e, trial_e = 0.5 * scale_a, trial
            break
        scale_a, trial_a = 0.5 * scale_a, trial
    else:
        raise BracketNotFound(
            f"Tail beyond N={cutoff} never exploded after {MAX_BRACKET_STEPS} halvings"
        )

    for __ in range(int(nb_iter)):
        scale = 0.5 * (scale_a + scale_e)
        trial = run(scale)
        if trial.exploded:
            scale_e, trial_e = scale, trial
        else:
            scale_a, trial_a = scale, trial
    logger.info(
        f"Band N={cutoff}: tail bracket [{trial_e.value:.6g}, {trial_a.value:.6g}]"
    )
    return DichotomyResult(
        "band",
        trial_a.value,
        trial_e.value,
        trial_a.profile,
        trial_e.profile,
        trials,
        int(nb_iter),
        cutoff=cutoff,
    )


def build_staircase(cutoffs, gamma0, eps, nb_iter, oracle):
    """Runs the constant search, then a band search at each cutoff
    starting from the previous gamma_a profile.

    Parameters
    ----------
    cutoffs : list
        Strictly increasing band edges, all below n_points / 2.
    gamma0 : float
    eps : float
    nb_iter : int
    oracle : dampkdv.dichotomy.TrialOracle

    Returns
    -------
    result : dampkdv.core.StaircaseResult

    """
    grid = oracle.grid
    cutoffs = [int(n) for n in cutoffs]
    validate_cutoffs(cutoffs, grid.n_points)
    constant = constant_dichotomy(gamma0, eps, oracle)
    profile = constant.profile_a
    bands = []
    for n in cutoffs:
        result = band_dichotomy(profile, n, nb_iter, oracle)
        bands.append(result)
        profile = result.profile_a

    if cutoffs:
        values_e = [constant.gamma_e] + [
            0.0 if band.gamma_e is None else band.gamma_e for band in bands
        ]
        edges = cutoffs + [grid.nyquist]
        profile_e = band_profile(grid, list(zip(edges, values_e)))
    else:
        profile_e = constant.profile_e
    return StaircaseResult(cutoffs, constant, bands, profile, profile_e)


def gaussian_envelopes(stair):
    """Gaussian profiles a exp(-k^2 / (2 sigma^2)) above the gamma_a
    staircase and below the gamma_e staircase.

    sigma is the wavenumber of the outermost band edge (k_max without
    bands). The amplitude of the upper envelope is the smallest one
    dominating the staircase at every mode and that of the lower
    envelope the largest one staying below it.

    Parameters
    ----------
    stair : dampkdv.core.StaircaseResult

    Returns
    -------
    gamma_1 : dampkdv.damping.DampingProfile
    gamma_2 : dampkdv.damping.DampingProfile

    """
    if not stair.is_non_increasing:
        raise ValueError("Staircase must be non-increasing in |j|")
    grid = stair.profile.grid
    if stair.cutoffs:
        sigma = math.pi * stair.cutoffs[-1] / grid.half_length
    else:
        sigma = grid.k_max
    k = grid.wavenumbers
    with np.errstate(over="ignore"):
        growth = np.exp(k * k / (2.0 * sigma * sigma))
    upper = stair.profile.gamma * growth
    lower = stair.profile_e.gamma * growth
    a1 = float(np.max(upper)) * (1 + 1e-12)
    a2 = float(np.min(lower)) * (1 - 1e-12)
    if not (math.isfinite(a1) and math.isfinite(a2)):
        raise ValueError(
            f"No finite Gaussian envelope with sigma={sigma:.6g} on this grid"
        )
    if a2 == 0:
        logger.warning(
            "Lower Gaussian envelope is zero: the gamma_e staircase vanishes"
        )
    gamma_1 = gaussian_profile(grid, a1, sigma)
    gamma_2 = gaussian_profile(grid, a2, sigma)
    if np.any(gamma_1.gamma < stair.profile.gamma):
        raise ValueError("Upper Gaussian envelope does not dominate the staircase")
    if np.any(gamma_2.gamma > stair.profile_e.gamma):
        raise ValueError("Lower Gaussian envelope is not below the staircase")
    return gamma_1, gamma_2
