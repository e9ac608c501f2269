import math

from .base import BaseScheme


class SanzSerna(BaseScheme):
    """Implicit midpoint scheme. The nonlinearity is evaluated at
    (u^{n+1} + u^n) / 2:

    u^{n+1} = M u^n - D (ik dt / ((p+1) 2^{p+1})) F[(u^{n+1} + u^n)^{p+1}]

    with M = (1 - dt sigma / 2) / (1 + dt sigma / 2) and
    D = 1 / (1 + dt sigma / 2).

    Conserves the discrete L2 norm when gamma = 0.
    """

    name = "sanz-serna"

    def linear_multiplier(self, dt):
        half = 0.5 * dt * self.sigma
        return (1.0 - half) / (1.0 + half)

    @staticmethod
    def stability_bound(linf, p, dx):
        if linf == 0:
            return math.inf
        return (p + 1) * dx / (2.0 * math.pi * linf**p)

    def _prepare(self, coefficients, dt):
        denominator = 1.0 + 0.5 * dt * self.sigma
        linear = (1.0 - 0.5 * dt * self.sigma) / denominator * coefficients
        factor = self.ik * dt / ((self.p + 1) * 2.0 ** (self.p + 1)) / denominator
        return linear, factor, coefficients

    def _sweep(self, guess, prepared):
        linear, factor, coefficients = prepared
        return linear - factor * self._power(guess + coefficients)
