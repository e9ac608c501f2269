import logging
import math

import numpy as np


logger = logging.getLogger("dampkdv")


# smallest grid accepted by make_grid
MIN_POINTS = 8


class NonFiniteError(FloatingPointError):
    """Raised when a field or spectrum contains NaN or Inf values."""


def is_power_of_two(n):
    return isinstance(n, (int, np.integer)) and n > 0 and (n & (n - 1)) == 0


class Grid:
    """Defines a uniform periodic grid on [-L, L).

    Parameters
    ----------
    half_length : float
        Half of the domain length, L.
    n_points : int
        Number of grid points, a power of two not smaller than 8.

    Attributes
    ----------
    length : float
        Total domain length 2L.
    dx : float
        Grid spacing 2L / n_points.
    x : numpy.ndarray
        Sample positions -L + i * dx.
    modes : numpy.ndarray
        Integer mode indices j in FFT order (0, 1, ..., N/2 - 1, -N/2, ..., -1).
    wavenumbers : numpy.ndarray
        k_j = pi * j / L in FFT order.
    odd_wavenumbers : numpy.ndarray
        Same as wavenumbers with the Nyquist mode zeroed. Used for every
        odd-order factor (ik, ik^3) so that real fields stay real.

    """

    def __init__(self, half_length, n_points):
        if not half_length > 0 or not math.isfinite(half_length):
            raise ValueError(f"half_length must be positive, got {half_length}")
        if not is_power_of_two(n_points) or n_points < MIN_POINTS:
            raise ValueError(
                f"n_points must be a power of two >= {MIN_POINTS}, got {n_points}"
            )
        self.half_length = float(half_length)
        self.n_points = int(n_points)
        self.length = 2.0 * self.half_length
        self.dx = self.length / self.n_points
        self.x = -self.half_length + self.dx * np.arange(self.n_points)
        self.modes = np.fft.fftfreq(self.n_points, d=1.0 / self.n_points).astype(int)
        self.wavenumbers = np.pi * self.modes / self.half_length
        self.nyquist = self.n_points // 2
        self.odd_wavenumbers = self.wavenumbers.copy()
        self.odd_wavenumbers[self.nyquist] = 0.0
        # index of mode -j for every index of mode j
        self.mirror = (-np.arange(self.n_points)) % self.n_points
        for arr in (self.x, self.modes, self.wavenumbers, self.odd_wavenumbers):
            arr.flags.writeable = False

    def __repr__(self):
        return f"<Grid half_length={self.half_length} n_points={self.n_points}>"

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.half_length == other.half_length and self.n_points == other.n_points
        )

    def __hash__(self):
        return hash((self.half_length, self.n_points))

    @property
    def weight(self):
        """Spectral quadrature weight w such that sum_i u_i^2 dx equals
        w * sum_j |u_j|^2 for the coefficients of e^{i k_j x}.
        """
        return self.length

    @property
    def k_max(self):
        return np.pi * self.nyquist / self.half_length

    def mode_order(self):
        """Permutation taking FFT order to increasing mode order
        j = -N/2, ..., N/2 - 1.
        """
        return np.argsort(self.modes, kind="stable")

    def check_same(self, other):
        if self != other:
            raise ValueError(f"Grid mismatch: {self!r} != {other!r}")


def make_grid(half_length, n_points):
    """Returns the periodic grid on [-half_length, half_length).

    Parameters
    ----------
    half_length : float
    n_points : int

    Returns
    -------
    grid : dampkdv.spectral.Grid

    """
    return Grid(half_length, n_points)


def _frozen(values, dtype):
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


class RealField:
    """Samples u(x_i) of a real periodic function on a grid."""

    def __init__(self, grid, values):
        values = _frozen(values, float)
        if values.shape != (grid.n_points,):
            raise ValueError(
                f"Expected {grid.n_points} samples, got shape {values.shape}"
            )
        self.grid = grid
        self.values = values

    def __repr__(self):
        return f"<RealField n_points={self.grid.n_points}>"

    @property
    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))


class SpectralField:
    """Complex Fourier coefficients u_j of e^{i k_j x}, stored in FFT order.

    For a field representing a real function the coefficients are
    Hermitian symmetric: u_{-j} = conj(u_j).
    """

    def __init__(self, grid, coefficients):
        coefficients = _frozen(coefficients, complex)
        if coefficients.shape != (grid.n_points,):
            raise ValueError(
                f"Expected {grid.n_points} coefficients, got shape {coefficients.shape}"
            )
        self.grid = grid
        self.coefficients = coefficients

    def __repr__(self):
        return f"<SpectralField n_points={self.grid.n_points}>"

    def is_hermitian(self, rtol=1e-12):
        c = self.coefficients
        scale = max(float(np.max(np.abs(c))), np.finfo(float).tiny)
        defect = np.max(np.abs(c[self.grid.mirror] - np.conj(c)))
        return bool(defect <= rtol * scale)


def forward(values):
    """Coefficients of e^{i k_j x} from samples (array level)."""
    return np.fft.fft(values) / values.shape[-1]


def inverse(coefficients):
    """Real samples from coefficients (array level)."""
    return (np.fft.ifft(coefficients) * coefficients.shape[-1]).real


def to_spectral(field):
    """Transforms a real field to its Fourier coefficients.

    Parameters
    ----------
    field : dampkdv.spectral.RealField

    Returns
    -------
    spectral : dampkdv.spectral.SpectralField

    """
    return SpectralField(field.grid, forward(field.values))


def to_physical(spectral):
    """Transforms Fourier coefficients back to real samples.

    Parameters
    ----------
    spectral : dampkdv.spectral.SpectralField

    Returns
    -------
    field : dampkdv.spectral.RealField

    """
    return RealField(spectral.grid, inverse(spectral.coefficients))


def derivative_symbol(grid, order):
    """Returns (i k_j)^order with the Nyquist mode zeroed for odd orders."""
    if order not in (1, 2, 3, 4):
        raise ValueError(f"Unsupported derivative order {order}, use 1, 2, 3 or 4")
    k = grid.odd_wavenumbers if order % 2 else grid.wavenumbers
    return (1j * k) ** order


def derivative(spectral, order):
    """Spectral derivative of the given order.

    Parameters
    ----------
    spectral : dampkdv.spectral.SpectralField
    order : int
        One of 1, 2, 3, 4.

    Returns
    -------
    spectral : dampkdv.spectral.SpectralField

    """
    symbol = derivative_symbol(spectral.grid, order)
    return SpectralField(spectral.grid, symbol * spectral.coefficients)


class NormBundle:
    """Norms of a real field.

    Attributes
    ----------
    l2 : float
        sqrt(sum_i u_i^2 dx).
    h1_seminorm : float
        L2 norm of the spectral derivative u_x.
    h1 : float
        sqrt(l2^2 + h1_seminorm^2).
    linf : float
        max_i |u_i|.
    hgamma : float or None
        sqrt(2L sum_j gamma_j |u_j|^2), only when a damping profile is given.

    """

    def __init__(self, l2, h1_seminorm, linf, hgamma=None):
        self.l2 = l2
        self.h1_seminorm = h1_seminorm
        self.h1 = math.sqrt(l2 * l2 + h1_seminorm * h1_seminorm)
        self.linf = linf
        self.hgamma = hgamma

    def __repr__(self):
        return (
            f"<NormBundle l2={self.l2:.6g} h1={self.h1:.6g} linf={self.linf:.6g}"
            f" hgamma={self.hgamma}>"
        )

    def as_dict(self):
        return {
            "l2": self.l2,
            "h1_seminorm": self.h1_seminorm,
            "h1": self.h1,
            "linf": self.linf,
            "hgamma": self.hgamma,
        }


def l2_norm(values, dx):
    return math.sqrt(float(np.sum(values * values)) * dx)


def spectral_l2(coefficients, grid):
    """L2 norm computed from coefficients (Parseval)."""
    return math.sqrt(grid.weight * float(np.sum(np.abs(coefficients) ** 2)))


def hgamma_norm(coefficients, gamma, grid):
    """sqrt(w * sum_j gamma_j |u_j|^2) with w = 2L."""
    return math.sqrt(grid.weight * float(np.sum(gamma * np.abs(coefficients) ** 2)))


def seminorm(field, order):
    """L2 norm of the derivative of the given order."""
    coefficients = forward(field.values) * derivative_symbol(field.grid, order)
    return spectral_l2(coefficients, field.grid)


def norms(field, profile=None):
    """Computes the L2, H1 and Linf norms, and the H_gamma norm when a
    damping profile is given.

    Parameters
    ----------
    field : dampkdv.spectral.RealField
    profile : dampkdv.damping.DampingProfile, optional (default: None)

    Returns
    -------
    bundle : dampkdv.spectral.NormBundle

    """
    if not field.is_finite:
        raise NonFiniteError("Field contains non-finite samples")
    grid = field.grid
    u = field.values
    coefficients = forward(u)
    ux = inverse(1j * grid.odd_wavenumbers * coefficients)
    hgamma = None
    if profile is not None:
        grid.check_same(profile.grid)
        hgamma = hgamma_norm(coefficients, profile.gamma, grid)
    return NormBundle(
        l2_norm(u, grid.dx),
        l2_norm(ux, grid.dx),
        float(np.max(np.abs(u))),
        hgamma=hgamma,
    )


def soliton(grid, p, c, d=0.0, amplitude_factor=1.0, sign=1, width="printed"):
    """Samples the (possibly perturbed) gKdV soliton at t = 0.

    u0(x) = factor * ((p+1)(p+2)(c-1)/2)^(1/p) * cosh(sign * B * (x - d))^(-2/p)

    The argument x - d is wrapped onto [-L, L) so the profile is centered
    at x = d on the torus.

    Parameters
    ----------
    grid : dampkdv.spectral.Grid
    p : int
        Nonlinearity exponent, >= 1.
    c : float
        Speed, > 1.
    d : float, optional (default: 0.0)
        Center of the profile.
    amplitude_factor : float, optional (default: 1.0)
        Multiplicative perturbation of the amplitude.
    sign : int, optional (default: 1)
        +1 or -1 in the cosh argument.
    width : str, optional (default: 'printed')
        {'printed', 'exact'}
        'printed' uses B = sqrt(p(c-1)/4). 'exact' uses
        B = p sqrt(c-1)/2, the width of the exact traveling wave of
        u_t + u_x + u_xxx + u^p u_x = 0. Both agree for p = 1.

    Returns
    -------
    field : dampkdv.spectral.RealField

    """
    if int(p) != p or p < 1:
        raise ValueError(f"p must be an integer >= 1, got {p}")
    if not c > 1:
        raise ValueError(f"Soliton speed c must be > 1, got {c}")
    if amplitude_factor < 0:
        raise ValueError(
            f"amplitude_factor must be nonnegative, got {amplitude_factor}"
        )
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if width == "printed":
        b = math.sqrt(p * (c - 1) / 4.0)
    elif width == "exact":
        b = p * math.sqrt(c - 1) / 2.0
    else:
        raise ValueError(f"Unknown soliton width '{width}', use 'printed' or 'exact'")
    amplitude = ((p + 1) * (p + 2) * (c - 1) / 2.0) ** (1.0 / p)
    L = grid.half_length
    shifted = np.mod(grid.x - d + L, grid.length) - L
    # cosh^(-2/p) written through exp to stay finite far from the peak
    z = np.abs(sign * b * shifted)
    values = (2.0 * np.exp(-z) / (1.0 + np.exp(-2.0 * z))) ** (2.0 / p)
    return RealField(grid, amplitude_factor * amplitude * values)


def power_coefficients(coefficients, grid, q, dealias=False):
    """Coefficients of the pointwise q-th power of the field given by
    its coefficients (array level).

    With dealias, the product is formed on a zero-padded grid holding
    ceil((q+1)/2) * N/2 modes per side and truncated back.
    """
    if int(q) != q or q < 1:
        raise ValueError(f"Power must be a positive integer, got {q}")
    n = grid.n_points
    factor = math.ceil((q + 1) / 2)
    with np.errstate(over="ignore", invalid="ignore"):
        if not dealias or factor == 1:
            out = forward(inverse(coefficients) ** q)
        else:
            half = n // 2
            size = factor * n
            padded = np.zeros(size, dtype=complex)
            padded[:half] = coefficients[:half]
            padded[size - half + 1 :] = coefficients[half + 1 :]
            # split the Nyquist coefficient between +N/2 and -N/2
            padded[half] += 0.5 * coefficients[half]
            padded[size - half] += 0.5 * coefficients[half]
            spectrum = forward(inverse(padded) ** q)
            out = np.empty(n, dtype=complex)
            out[:half] = spectrum[:half]
            out[half + 1 :] = spectrum[size - half + 1 :]
            out[half] = spectrum[half] + spectrum[size - half]
    if not np.all(np.isfinite(out)):
        raise NonFiniteError(f"Overflow while forming the power {q} of the field")
    return out


def nonlinear_power(field, q, dealias=False):
    """Transform of the pointwise q-th power of a real field.

    Parameters
    ----------
    field : dampkdv.spectral.RealField
    q : int
        Positive power.
    dealias : bool, optional (default: False)
        Use zero padding (generalized 2/3 rule for power q).

    Returns
    -------
    spectral : dampkdv.spectral.SpectralField

    """
    coefficients = forward(field.values)
    return SpectralField(
        field.grid, power_coefficients(coefficients, field.grid, q, dealias=dealias)
    )
