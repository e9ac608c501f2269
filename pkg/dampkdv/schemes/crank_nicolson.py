import math

from .base import BaseScheme


class CrankNicolson(BaseScheme):
    """Trapezoidal scheme: the nonlinearity is the average of its values
    at u^n and u^{n+1},

    u^{n+1} = M u^n - D (ik dt / 2) (F[u_{n+1}^{p+1}] + F[u_n^{p+1}]) / (p+1)
    """

    name = "crank-nicolson"

    def linear_multiplier(self, dt):
        half = 0.5 * dt * self.sigma
        return (1.0 - half) / (1.0 + half)

    @staticmethod
    def stability_bound(linf, p, dx):
        if linf == 0:
            return math.inf
        return dx / (math.pi * linf**p)

    def _prepare(self, coefficients, dt):
        denominator = 1.0 + 0.5 * dt * self.sigma
        factor = 0.5 * self.ik * dt / (self.p + 1) / denominator
        linear = (1.0 - 0.5 * dt * self.sigma) / denominator * coefficients
        linear = linear - factor * self._power(coefficients)
        return linear, factor

    def _sweep(self, guess, prepared):
        linear, factor = prepared
        return linear - factor * self._power(guess)
