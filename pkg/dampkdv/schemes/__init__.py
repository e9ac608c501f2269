from .base import BaseScheme
from .base import PicardDiverged
from .crank_nicolson import CrankNicolson
from .implicit_euler import ImplicitEuler
from .sanz_serna import SanzSerna


SCHEMES = {
    "sanz-serna": SanzSerna,
    "crank-nicolson": CrankNicolson,
    "implicit-euler": ImplicitEuler,
}


def get_scheme(flavor):
    """Returns the scheme class registered under flavor."""
    if flavor not in SCHEMES:
        raise NotImplementedError(
            f"Unknown scheme specified. Use one of {', '.join(SCHEMES)}."
        )
    return SCHEMES[flavor]
