import os

import numpy as np
import pandas as pd

from .utils import write_csv
from .utils import write_json


# blow-up triggers reported by the simulation driver
TRIGGERS = ["H1Ratio", "StepUnderflow", "PicardDiverged", "NonFinite"]


class NormSeries:
    """Norm time series of a run, one row per recorded time.

    Columns are t, dt, l2, h1, hgamma, linf and D, where D is the
    cumulative dissipation 2 * int_0^t |u|_gamma^2 by the trapezoid rule
    over the recorded times.
    """

    columns = ["t", "dt", "l2", "h1", "hgamma", "linf", "D"]

    def __init__(self):
        self._rows = []

    def __repr__(self):
        return f"<{self.__class__.__name__} n={len(self)}>"

    def __len__(self):
        return len(self._rows)

    def append(self, t, dt, bundle):
        """Records the NormBundle of the state at time t, reached with
        a last step of size dt.
        """
        hgamma = bundle.hgamma if bundle.hgamma is not None else 0.0
        if self._rows:
            t_prev, hgamma_prev, d_prev = (
                self._rows[-1][0],
                self._rows[-1][4],
                self._rows[-1][6],
            )
            if not t > t_prev:
                raise ValueError(f"Times must increase, got {t} after {t_prev}")
            d = d_prev + (t - t_prev) * (hgamma_prev**2 + hgamma**2)
        else:
            d = 0.0
        self._rows.append((t, dt, bundle.l2, bundle.h1, hgamma, bundle.linf, d))

    @property
    def df(self):
        return pd.DataFrame(self._rows, columns=self.columns, dtype=float)

    @property
    def last_time(self):
        return self._rows[-1][0] if self._rows else None

    def to_csv(self, path, **kwargs):
        """Writes the series to a csv file with header t,dt,l2,h1,hgamma,linf,D.

        For kwargs, check :meth:`pandas.DataFrame.to_csv`.
        """
        write_csv(self.df, path, **kwargs)


class EnergyRecord:
    """Energy E(u) = ||u_x||^2 / 2 - int u^{p+2} / ((p+1)(p+2)) per
    recorded time, with ||u_xx|| and the source term of the energy
    balance dE/dt = S.
    """

    columns = ["t", "energy", "uxx_l2", "energy_source"]

    def __init__(self):
        self._rows = []

    def __repr__(self):
        return f"<{self.__class__.__name__} n={len(self)}>"

    def __len__(self):
        return len(self._rows)

    def append(self, t, energy, uxx_l2, energy_source):
        self._rows.append((t, energy, uxx_l2, energy_source))

    @property
    def df(self):
        return pd.DataFrame(self._rows, columns=self.columns, dtype=float)

    def to_csv(self, path, **kwargs):
        write_csv(self.df, path, **kwargs)


class Outcome:
    """Classification of a run.

    Parameters
    ----------
    kind : str
        {'completed', 'blowup', 'failure'}
    t_end : float, optional (default: None)
        Final time of a completed run.
    t_detect : float, optional (default: None)
        Time at which blow-up was detected.
    trigger : str, optional (default: None)
        {'H1Ratio', 'StepUnderflow', 'PicardDiverged', 'NonFinite'}
    description : str, optional (default: None)
        Reason of a failure.

    """

    def __init__(self, kind, t_end=None, t_detect=None, trigger=None, description=None):
        if kind not in ("completed", "blowup", "failure"):
            raise ValueError(f"Unknown outcome kind '{kind}'")
        if kind == "blowup" and trigger not in TRIGGERS:
            raise ValueError(
                f"Unknown blow-up trigger '{trigger}'. Use one of {', '.join(TRIGGERS)}"
            )
        self.kind = kind
        self.t_end = t_end
        self.t_detect = t_detect
        self.trigger = trigger
        self.description = description

    @classmethod
    def completed(cls, t_end):
        return cls("completed", t_end=t_end)

    @classmethod
    def blowup(cls, t_detect, trigger):
        return cls("blowup", t_detect=t_detect, trigger=trigger)

    @classmethod
    def failure(cls, description):
        return cls("failure", description=description)

    def __repr__(self):
        if self.kind == "blowup":
            return f"<Outcome blowup t_detect={self.t_detect} trigger={self.trigger}>"
        if self.kind == "failure":
            return f"<Outcome failure description={self.description!r}>"
        return f"<Outcome completed t_end={self.t_end}>"

    def __eq__(self, other):
        if not isinstance(other, Outcome):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    @property
    def is_blowup(self):
        return self.kind == "blowup"

    def to_dict(self):
        out = {"outcome": self.kind}
        if self.kind == "completed":
            out["t_end"] = self.t_end
        elif self.kind == "blowup":
            out["t_detect"] = self.t_detect
            out["trigger"] = self.trigger
        else:
            out["description"] = self.description
        return out


class SimulationReport:
    """Everything produced by one run.

    Attributes
    ----------
    config : dampkdv.simulation.SimulationConfig
    norms : dampkdv.core.NormSeries
    energy : dampkdv.core.EnergyRecord
    snapshots : dict
        Requested time -> dampkdv.spectral.RealField, for the times
        actually reached.
    outcome : dampkdv.core.Outcome
    theta : float
        Global-existence damping threshold evaluated on u0.
    dissipation_residual : float
    energy_residual : float
    n_steps : int
        Accepted time steps.

    """

    def __init__(
        self,
        config,
        norms,
        energy,
        snapshots,
        outcome,
        theta,
        dissipation_residual,
        energy_residual,
        n_steps=0,
    ):
        self.config = config
        self.norms = norms
        self.energy = energy
        self.snapshots = snapshots
        self.outcome = outcome
        self.theta = theta
        self.dissipation_residual = dissipation_residual
        self.energy_residual = energy_residual
        self.n_steps = n_steps

    def __repr__(self):
        return (
            f"<{self.__class__.__name__} outcome={self.outcome.kind}"
            f" n_steps={self.n_steps}>"
        )

    def snapshots_frame(self):
        """Snapshots in long format with columns t, x, u."""
        frames = [
            pd.DataFrame({"t": t, "x": field.grid.x, "u": field.values})
            for t, field in sorted(self.snapshots.items())
        ]
        if not frames:
            return pd.DataFrame(columns=["t", "x", "u"], dtype=float)
        return pd.concat(frames, ignore_index=True)

    def to_dict(self):
        out = self.outcome.to_dict()
        out["theta"] = self.theta
        out["dissipation_residual"] = self.dissipation_residual
        out["energy_residual"] = self.energy_residual
        out["n_steps"] = self.n_steps
        out["config"] = self.config.to_dict()
        return out

    def export(self, out_dir):
        """Writes norms.csv, snapshots.csv, energy.csv and outcome.json
        to out_dir, creating it if needed.

        Parameters
        ----------
        out_dir : str
            Output directory.

        """
        os.makedirs(out_dir, exist_ok=True)
        self.norms.to_csv(os.path.join(out_dir, "norms.csv"))
        write_csv(self.snapshots_frame(), os.path.join(out_dir, "snapshots.csv"))
        self.energy.to_csv(os.path.join(out_dir, "energy.csv"))
        write_json(self.to_dict(), os.path.join(out_dir, "outcome.json"))


class Trial:
    """One oracle call of a damping search.

    Parameters
    ----------
    value : float
        Searched scalar: gamma for a constant search, the first tail
        value for a band search.
    profile : dampkdv.damping.DampingProfile
    outcome : dampkdv.core.Outcome
    cached : bool, optional (default: False)
        True when the outcome came from the oracle cache.

    """

    def __init__(self, value, profile, outcome, cached=False):
        self.value = value
        self.profile = profile
        self.outcome = outcome
        self.cached = cached

    def __repr__(self):
        return f"<Trial value={self.value:.6g} outcome={self.outcome.kind}>"

    @property
    def exploded(self):
        return self.outcome.is_blowup

    def to_dict(self):
        out = {"gamma": self.value, "gamma_spec": self.profile.to_dict()}
        out.update(self.outcome.to_dict())
        out["cached"] = self.cached
        return out


class DichotomyResult:
    """Bracket (gamma_e, gamma_a) around the blow-up frontier.

    Attributes
    ----------
    kind : str
        {'constant', 'band'}
    gamma_a : float
        Value whose run completed.
    gamma_e : float or None
        Value whose run blew up. None when a band search returned on
        its first trial with a zero tail.
    profile_a : dampkdv.damping.DampingProfile
    profile_e : dampkdv.damping.DampingProfile or None
    trials : list
        List of dampkdv.core.Trial in call order.
    iterations : int
        Bisection steps.
    cutoff : int or None
        Band cutoff of a band search.

    """

    def __init__(
        self,
        kind,
        gamma_a,
        gamma_e,
        profile_a,
        profile_e,
        trials,
        iterations,
        cutoff=None,
    ):
        self.kind = kind
        self.gamma_a = gamma_a
        self.gamma_e = gamma_e
        self.profile_a = profile_a
        self.profile_e = profile_e
        self.trials = trials
        self.iterations = iterations
        self.cutoff = cutoff

    def __repr__(self):
        return (
            f"<{self.__class__.__name__} kind={self.kind} gamma_a={self.gamma_a}"
            f" gamma_e={self.gamma_e}>"
        )

    @property
    def width(self):
        if self.gamma_e is None:
            return 0.0
        return self.gamma_a - self.gamma_e

    @property
    def n_simulations(self):
        return sum(1 for trial in self.trials if not trial.cached)

    def to_dict(self):
        out = {
            "kind": self.kind,
            "bracket": {"gamma_a": self.gamma_a, "gamma_e": self.gamma_e},
            "trials": [trial.to_dict() for trial in self.trials],
            "iterations": self.iterations,
            "n_simulations": self.n_simulations,
        }
        if self.cutoff is not None:
            out["cutoff"] = self.cutoff
        return out


class StaircaseResult:
    """Non-increasing band profile found by successive band searches.

    Attributes
    ----------
    cutoffs : list
        Band cutoffs N_1 < N_2 < ...
    constant : dampkdv.core.DichotomyResult
        Initial constant search.
    bands : list
        One dampkdv.core.DichotomyResult per cutoff.
    profile : dampkdv.damping.DampingProfile
        Final gamma_a profile.
    profile_e : dampkdv.damping.DampingProfile
        Staircase of the gamma_e values, zero where a band returned a
        zero tail.

    """

    def __init__(self, cutoffs, constant, bands, profile, profile_e):
        self.cutoffs = cutoffs
        self.constant = constant
        self.bands = bands
        self.profile = profile
        self.profile_e = profile_e

    def __repr__(self):
        return f"<{self.__class__.__name__} cutoffs={self.cutoffs}>"

    @property
    def brackets(self):
        """(gamma_a, gamma_e) of the constant search then of each band."""
        return [(self.constant.gamma_a, self.constant.gamma_e)] + [
            (band.gamma_a, band.gamma_e) for band in self.bands
        ]

    @property
    def is_non_increasing(self):
        order = np.argsort(np.abs(self.profile.grid.modes), kind="stable")
        values = self.profile.gamma[order]
        return bool(np.all(np.diff(values) <= 0))

    @property
    def n_simulations(self):
        return self.constant.n_simulations + sum(b.n_simulations for b in self.bands)

    def to_dict(self):
        searches = [self.constant] + self.bands
        return {
            "kind": "staircase",
            "cutoffs": list(self.cutoffs),
            "bracket": {
                "gamma_a": self.constant.gamma_a,
                "gamma_e": self.constant.gamma_e,
            },
            "brackets": [{"gamma_a": a, "gamma_e": e} for a, e in self.brackets],
            "trials": [t.to_dict() for s in searches for t in s.trials],
            "iterations": sum(s.iterations for s in searches),
            "n_simulations": self.n_simulations,
            "profile": self.profile.to_dict(),
            "profile_e": self.profile_e.to_dict(),
        }
