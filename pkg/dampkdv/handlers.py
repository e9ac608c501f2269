import logging
import multiprocessing as mp

from .simulation import run_simulation


logger = logging.getLogger("dampkdv")


class SimulationHandler:
    """Runs independent simulations, one after the other or on a pool
    of worker processes. Each simulation stays single-threaded.

    Parameters
    ----------
    jobs : int, optional (default: 1)
        Number of worker processes. 1 runs everything in this process.

    """

    def __init__(self, jobs=1):
        if int(jobs) != jobs or jobs < 1:
            raise ValueError(f"jobs must be an integer >= 1, got {jobs}")
        self.jobs = int(jobs)

    def __repr__(self):
        return f"<{self.__class__.__name__} jobs={self.jobs}>"

    def run(self, configs, suppress_stdout=False):
        """Runs every config.

        Parameters
        ----------
        configs : list
            List of dampkdv.simulation.SimulationConfig.
        suppress_stdout : bool, optional (default: False)
            Silence warnings.

        Returns
        -------
        reports : list
            List of dampkdv.core.SimulationReport in the order of configs.

        """
        configs = list(configs)
        cpu_count = mp.cpu_count()
        processes = min(self.jobs, len(configs), cpu_count)
        if processes > 1:
            logger.info(f"Running {len(configs)} simulations on {processes} processes")
            with mp.get_context("spawn").Pool(processes=processes) as pool:
                jobs = [
                    pool.apply_async(self._run_one, (config, suppress_stdout))
                    for config in configs
                ]
                return [j.get() for j in jobs]
        return [self._run_one(config, suppress_stdout) for config in configs]

    def _run_one(self, config, suppress_stdout):
        return run_simulation(config, suppress_stdout=suppress_stdout)
