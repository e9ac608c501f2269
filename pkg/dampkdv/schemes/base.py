import logging
import math

import numpy as np

from ..spectral import NonFiniteError
from ..spectral import power_coefficients
from ..spectral import spectral_l2


logger = logging.getLogger("dampkdv")


class PicardDiverged(RuntimeError):
    """Raised when the fixed-point sweep of an implicit step does not
    converge (residual grows or the iteration budget is exhausted).
    """


class BaseScheme:
    """Defines a base implicit Fourier-space scheme for

    u_t + u_x + u_xxx + u^p u_x + L_gamma(u) = 0.

    Per mode the linear symbol is sigma_k = ik - ik^3 + gamma_k and the
    nonlinearity is (ik / (p+1)) F[u^{p+1}]. Subclasses provide the
    linear multipliers and the nonlinear update; the implicit equation
    is solved by Picard iteration starting from u^n.

    Parameters
    ----------
    grid : dampkdv.spectral.Grid
    profile : dampkdv.damping.DampingProfile
    p : int
        Nonlinearity exponent.
    nonlinear : bool, optional (default: True)
        Drop the u^p u_x term when False.
    dealias : bool, optional (default: False)
        Zero-pad the power nonlinearity.

    """

    name = None

    def __init__(self, grid, profile, p, nonlinear=True, dealias=False):
        grid.check_same(profile.grid)
        if int(p) != p or p < 1:
            raise ValueError(f"p must be an integer >= 1, got {p}")
        self.grid = grid
        self.profile = profile
        self.p = int(p)
        self.nonlinear = nonlinear
        self.dealias = dealias
        k = grid.odd_wavenumbers
        self.ik = 1j * k
        self.sigma = 1j * k - 1j * k**3 + profile.gamma

    def __repr__(self):
        return f"<{self.__class__.__name__} p={self.p} dealias={self.dealias}>"

    def linear_multiplier(self, dt):
        """One-step multiplier of the scheme on u^n with the
        nonlinearity suppressed.
        """
        raise NotImplementedError

    @staticmethod
    def stability_bound(linf, p, dx):
        """Largest dt for which the linearized Picard map contracts."""
        raise NotImplementedError

    def _prepare(self, coefficients, dt):
        """Returns the state reused by every sweep of one step."""
        raise NotImplementedError

    def _sweep(self, guess, prepared):
        """One application of the scheme map to the current iterate."""
        raise NotImplementedError

    def _power(self, coefficients):
        return power_coefficients(
            coefficients, self.grid, self.p + 1, dealias=self.dealias
        )

    def solve(
        self,
        coefficients,
        dt,
        tolerance=1e-12,
        max_iterations=100,
        relaxation=1.0,
        residuals=None,
    ):
        """Advances the coefficients of u^n by dt.

        Parameters
        ----------
        coefficients : numpy.ndarray
            Coefficients of u^n in FFT order.
        dt : float
        tolerance : float, optional (default: 1e-12)
            Absolute and relative tolerance on the L2 norm of the
            difference of successive iterates.
        max_iterations : int, optional (default: 100)
        relaxation : float, optional (default: 1.0)
            Under-relaxation factor in (0, 1].
        residuals : list, optional (default: None)
            Receives the residual of every sweep, in order.

        Returns
        -------
        coefficients : numpy.ndarray
        iterations : int
        residual : float

        """
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt}")
        if not self.nonlinear:
            out = self.linear_multiplier(dt) * coefficients
            if not np.all(np.isfinite(out)):
                raise NonFiniteError("Non-finite coefficients after a linear step")
            if residuals is not None:
                residuals.append(0.0)
            return out, 1, 0.0

        prepared = self._prepare(coefficients, dt)
        guess = coefficients
        previous = math.inf
        for iteration in range(1, max_iterations + 1):
            new = self._sweep(guess, prepared)
            if not np.all(np.isfinite(new)):
                raise NonFiniteError(f"Non-finite iterate at Picard sweep {iteration}")
            change = new - guess
            residual = spectral_l2(change, self.grid)
            if residuals is not None:
                residuals.append(residual)
            threshold = tolerance * (1.0 + spectral_l2(new, self.grid))
            guess = guess + relaxation * change if relaxation != 1.0 else new
            if residual <= threshold:
                logger.debug(
                    f"{self.name}: converged in {iteration} sweeps"
                    f" (residual={residual:.3e}, dt={dt:.3e})"
                )
                return guess, iteration, residual
            # growth below 10x the threshold is rounding noise
            if iteration > 1 and residual > previous and residual > 10 * threshold:
                raise PicardDiverged(
                    f"Picard residual grew from {previous:.3e} to {residual:.3e}"
                    f" at sweep {iteration} (dt={dt:.3e})"
                )
            previous = residual
        raise PicardDiverged(
            f"Picard iteration did not converge in {max_iterations} sweeps"
            f" (residual={previous:.3e}, dt={dt:.3e})"
        )
