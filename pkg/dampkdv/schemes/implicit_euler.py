import math

from .base import BaseScheme


class ImplicitEuler(BaseScheme):
    """First order backward Euler scheme,

    u^{n+1} = (u^n - (ik dt / (p+1)) F[u_{n+1}^{p+1}]) / (1 + dt sigma)
    """

    name = "implicit-euler"

    def linear_multiplier(self, dt):
        return 1.0 / (1.0 + dt * self.sigma)

    @staticmethod
    def stability_bound(linf, p, dx):
        # contraction factor 2 pi dt linf^p / dx, no 1/2 from averaging
        if linf == 0:
            return math.inf
        return dx / (2.0 * math.pi * linf**p)

    def _prepare(self, coefficients, dt):
        denominator = 1.0 + dt * self.sigma
        return coefficients / denominator, self.ik * dt / (self.p + 1) / denominator

    def _sweep(self, guess, prepared):
        linear, factor = prepared
        return linear - factor * self._power(guess)
