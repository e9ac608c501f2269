import logging
import math
import warnings

import numpy as np
import pandas as pd

from .spectral import SpectralField
from .spectral import derivative_symbol
from .spectral import forward
from .spectral import spectral_l2
from .utils import write_csv


logger = logging.getLogger("dampkdv")


PROFILE_TYPES = ["constant", "bands", "gaussian", "viscous", "explicit"]


class EmbeddingUndefinedError(ValueError):
    """Raised when the H_gamma -> Linf embedding constant needs a
    strictly positive symbol and some gamma_j is zero.
    """


class DampingProfile:
    """Defines a nonnegative, even damping symbol gamma_j on the modes
    of a grid. The damping operator acts as a Fourier multiplier,
    (L_gamma u)_j = gamma_j u_j.

    Parameters
    ----------
    grid : dampkdv.spectral.Grid
    gamma : array_like
        Symbol values in FFT order (same order as grid.modes).
    spec : dict, optional (default: None)
        JSON description of how the profile was built. When None the
        profile is described as 'explicit'.

    """

    def __init__(self, grid, gamma, spec=None):
        gamma = np.array(gamma, dtype=float)
        if gamma.shape != (grid.n_points,):
            raise ValueError(
                f"Expected {grid.n_points} damping values, got shape {gamma.shape}"
            )
        if not np.all(np.isfinite(gamma)):
            raise ValueError("Damping values must be finite")
        if np.any(gamma < 0):
            raise ValueError("Damping values must be nonnegative")
        mirrored = gamma[grid.mirror]
        if not np.allclose(gamma, mirrored, rtol=1e-12, atol=0.0):
            raise ValueError("Damping profile must be even: gamma_{-j} == gamma_j")
        # exact symmetry keeps L_gamma real
        gamma = 0.5 * (gamma + mirrored)
        gamma.flags.writeable = False
        self.grid = grid
        self.gamma = gamma
        self._spec = spec

    def __repr__(self):
        kind = self.spec["type"]
        return f"<DampingProfile type={kind} max={float(self.gamma.max()):.6g}>"

    @property
    def spec(self):
        if self._spec is None:
            order = self.grid.mode_order()
            return {"type": "explicit", "gamma": self.gamma[order].tolist()}
        return self._spec

    @property
    def key(self):
        """Hashable identity of the symbol values."""
        return (self.grid.half_length, self.grid.n_points, self.gamma.tobytes())

    def to_dict(self):
        return dict(self.spec)

    @classmethod
    def from_dict(cls, grid, spec):
        """Builds a profile from its JSON description.

        Parameters
        ----------
        grid : dampkdv.spectral.Grid
        spec : dict
            {'type': 'constant', 'gamma': g}
            {'type': 'bands', 'levels': [[N, g], ...], 'trailing_zero': bool}
            {'type': 'gaussian', 'amplitude': a, 'width': sigma}
            {'type': 'viscous', 'delta': delta}
            {'type': 'explicit', 'gamma': [...]} in mode order -N/2 .. N/2-1

        Returns
        -------
        profile : dampkdv.damping.DampingProfile

        """
        kind = spec.get("type")
        if kind not in PROFILE_TYPES:
            raise ValueError(
                f"Unknown damping type '{kind}'. Use one of {', '.join(PROFILE_TYPES)}"
            )
        try:
            if kind == "constant":
                return constant_profile(grid, spec["gamma"])
            if kind == "bands":
                levels = [tuple(level) for level in spec["levels"]]
                return band_profile(
                    grid, levels, trailing_zero=spec.get("trailing_zero", False)
                )
            if kind == "gaussian":
                return gaussian_profile(grid, spec["amplitude"], spec["width"])
            if kind == "viscous":
                return viscous_profile(grid, spec["delta"])
            return explicit_profile(grid, spec["gamma"])
        except KeyError as e:
            raise ValueError(f"Damping type '{kind}' is missing key {e}") from None

    def to_frame(self):
        order = self.grid.mode_order()
        return pd.DataFrame(
            {"mode": self.grid.modes[order], "gamma": self.gamma[order]}
        )

    def to_csv(self, path, **kwargs):
        """Writes the profile to a two-column (mode, gamma) csv file.

        For kwargs, check :meth:`pandas.DataFrame.to_csv`.

        Parameters
        ----------
        path : str
            Output filepath.

        """
        write_csv(self.to_frame(), path, **kwargs)

    def tail_mask(self, cutoff):
        return np.abs(self.grid.modes) > cutoff

    def with_tail(self, cutoff, values):
        """Returns a copy with modes |j| > cutoff replaced by values
        (scalar or array over the tail modes).
        """
        gamma = self.gamma.copy()
        gamma[self.tail_mask(cutoff)] = values
        return DampingProfile(self.grid, gamma)

    def scale_tail(self, cutoff, factor):
        """Returns a copy with the tail |j| > cutoff multiplied by factor.

        A uniform tail over a piecewise-constant head is described as a
        'bands' profile ending at the Nyquist mode, anything else as
        'explicit'.
        """
        mask = self.tail_mask(cutoff)
        tail = self.gamma[mask]
        levels = self._head_levels(cutoff)
        if levels is not None and tail.size and np.all(tail == tail[0]):
            levels.append((self.grid.nyquist, factor * float(tail[0])))
            return band_profile(self.grid, levels)
        return self.with_tail(cutoff, factor * tail)

    def _head_levels(self, cutoff):
        # band levels reproducing gamma on 0 <= |j| <= cutoff, or None
        head = self.gamma[: cutoff + 1]
        levels = []
        for j in range(cutoff + 1):
            if j == cutoff or head[j + 1] != head[j]:
                if j == 0:
                    return None
                levels.append((j, float(head[j])))
        return levels

    def tail_value(self, cutoff):
        """Value of gamma at the first tail mode |j| = cutoff + 1."""
        mask = np.abs(self.grid.modes) == cutoff + 1
        if not np.any(mask):
            raise ValueError(f"No mode beyond cutoff {cutoff}")
        return float(self.gamma[mask][0])


def constant_profile(grid, gamma):
    """gamma_j = gamma for every mode."""
    if not gamma >= 0:
        raise ValueError(f"Constant damping must be nonnegative, got {gamma}")
    return DampingProfile(
        grid,
        np.full(grid.n_points, float(gamma)),
        spec={"type": "constant", "gamma": float(gamma)},
    )


def band_profile(grid, levels, trailing_zero=False):
    """Piecewise-constant profile over frequency bands.

    gamma_j = g_i for N_{i-1} < |j| <= N_i (N_0 = 0, mode 0 belongs to
    the first band), and the last value (or 0 with trailing_zero) for
    |j| > N_last.

    Parameters
    ----------
    grid : dampkdv.spectral.Grid
    levels : list
        List of (cutoff N_i, value g_i) with strictly increasing cutoffs.
    trailing_zero : bool, optional (default: False)

    Returns
    -------
    profile : dampkdv.damping.DampingProfile

    """
    if not levels:
        raise ValueError("At least one band level is required")
    cutoffs = [int(n) for n, __ in levels]
    values = [float(g) for __, g in levels]
    if cutoffs[0] <= 0 or any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError(f"Band cutoffs must be positive and increasing, got {cutoffs}")
    if any(not g >= 0 for g in values):
        raise ValueError("Band values must be nonnegative")
    absmodes = np.abs(grid.modes)
    gamma = np.full(grid.n_points, 0.0 if trailing_zero else values[-1])
    lower = -1
    for n, g in zip(cutoffs, values):
        gamma[(absmodes > lower) & (absmodes <= n)] = g
        lower = n
    spec = {
        "type": "bands",
        "levels": [[n, g] for n, g in zip(cutoffs, values)],
        "trailing_zero": bool(trailing_zero),
    }
    return DampingProfile(grid, gamma, spec=spec)


def gaussian_profile(grid, amplitude, width):
    """gamma_j = amplitude * exp(-k_j^2 / (2 width^2))."""
    if not amplitude >= 0:
        raise ValueError(f"Gaussian amplitude must be nonnegative, got {amplitude}")
    if not width > 0:
        raise ValueError(f"Gaussian width must be positive, got {width}")
    k = grid.wavenumbers
    gamma = amplitude * np.exp(-(k * k) / (2.0 * width * width))
    spec = {"type": "gaussian", "amplitude": float(amplitude), "width": float(width)}
    return DampingProfile(grid, gamma, spec=spec)


def viscous_profile(grid, delta):
    """gamma_j = delta * k_j^2, the symbol of -delta u_xx."""
    if not delta >= 0:
        raise ValueError(f"Viscosity must be nonnegative, got {delta}")
    k = grid.wavenumbers
    return DampingProfile(
        grid, delta * k * k, spec={"type": "viscous", "delta": float(delta)}
    )


def explicit_profile(grid, values):
    """Profile from values listed in mode order j = -N/2, ..., N/2 - 1."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_points,):
        raise ValueError(
            f"Expected {grid.n_points} damping values, got shape {values.shape}"
        )
    gamma = np.empty(grid.n_points)
    gamma[grid.mode_order()] = values
    return DampingProfile(grid, gamma)


def apply_damping(spectral, profile):
    """Applies L_gamma: multiplies each coefficient by gamma_j.

    Parameters
    ----------
    spectral : dampkdv.spectral.SpectralField
    profile : dampkdv.damping.DampingProfile

    Returns
    -------
    spectral : dampkdv.spectral.SpectralField

    """
    spectral.grid.check_same(profile.grid)
    return SpectralField(spectral.grid, profile.gamma * spectral.coefficients)


def embedding_constant(profile):
    """Constant C of the discrete embedding ||u||_inf <= C |u|_gamma.

    With u(x) = sum_j u_j e^{i k_j x} and |u|_gamma^2 = w sum_j gamma_j |u_j|^2
    (w = 2L), Cauchy-Schwarz on sum_j |u_j| gives
    C = sqrt(sum_j 1 / (w gamma_j)).

    Parameters
    ----------
    profile : dampkdv.damping.DampingProfile

    Returns
    -------
    constant : float

    """
    gamma = profile.gamma
    if np.any(gamma <= 0):
        raise EmbeddingUndefinedError(
            "Embedding constant needs a strictly positive damping symbol"
        )
    return math.sqrt(float(np.sum(1.0 / (profile.grid.weight * gamma))))


class SmoothingReport:
    """Observed supremum of gamma^r exp(-2 gamma t) over the modes
    against the scalar bound (r/2)^r e^{-r} / t^r.
    """

    def __init__(self, r, t, sup_observed, bound):
        self.r = r
        self.t = t
        self.sup_observed = sup_observed
        self.bound = bound
        self.holds = sup_observed <= bound * (1 + 1e-12)

    def __repr__(self):
        return (
            f"<SmoothingReport r={self.r} t={self.t} sup={self.sup_observed:.6g}"
            f" bound={self.bound:.6g} holds={self.holds}>"
        )


def check_smoothing_bound(profile, r, t):
    """Checks the semigroup smoothing estimate mode by mode.

    Parameters
    ----------
    profile : dampkdv.damping.DampingProfile
    r : float
        Exponent in (0, 2).
    t : float
        Positive time.

    Returns
    -------
    report : dampkdv.damping.SmoothingReport

    """
    if not 0 < r < 2:
        raise ValueError(f"r must lie in (0, 2), got {r}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    gamma = profile.gamma
    sup_observed = float(np.max(gamma**r * np.exp(-2.0 * gamma * t)))
    bound = (r / 2.0) ** r * math.exp(-r) / t**r
    return SmoothingReport(r, t, sup_observed, bound)


class OmegaInputs:
    """Arguments of the global-existence threshold.

    Parameters
    ----------
    a : float
        L2 norm of u0.
    b : float
        L2 norm of u0_xx.
    p : int
        Nonlinearity exponent.

    """

    def __init__(self, a, b, p):
        if a < 0 or b < 0:
            raise ValueError(f"Norms must be nonnegative, got a={a}, b={b}")
        self.a = float(a)
        self.b = float(b)
        self.p = p

    def __repr__(self):
        return f"<OmegaInputs a={self.a:.6g} b={self.b:.6g} p={self.p}>"

    @classmethod
    def from_field(cls, field, p):
        coefficients = forward(field.values)
        a = spectral_l2(coefficients, field.grid)
        b = spectral_l2(coefficients * derivative_symbol(field.grid, 2), field.grid)
        return cls(a, b, p)


def omega_threshold(inputs):
    """Damping level theta above which global existence holds for p >= 4.

    theta = (5p/2) (2 a^{3/2} b^{1/2})^{(p-1)/2} a^{1/4} b^{3/4}
            + p (p-1) (2 a^{3/2} b^{1/2})^{(p-2)/2} a b

    evaluated as printed, including its suspected exponent typos. The
    value is advisory and never gates a simulation.

    Parameters
    ----------
    inputs : dampkdv.damping.OmegaInputs

    Returns
    -------
    theta : float

    """
    a, b, p = inputs.a, inputs.b, inputs.p
    if p < 4:
        warnings.warn(
            f"p={p} < 4: solutions are global for any damping, theta is not needed"
        )
    base = 2.0 * a**1.5 * b**0.5
    first = 2.5 * p * base ** ((p - 1) / 2.0) * a**0.25 * b**0.75
    second = p * (p - 1) * base ** ((p - 2) / 2.0) * a * b if p > 1 else 0.0
    return first + second
