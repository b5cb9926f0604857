"""Distribution families available in model files."""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..distributions import (
    exponential_logpdf,
    gamma_logpdf,
    normal_logpdf,
    poisson_logpmf,
    uniform_logpdf,
)


@dataclass(frozen=True)
class Family:
    name: str
    params: tuple  # argument names
    scale: tuple  # indices of arguments that must be strictly positive
    logpdf: Callable
    support: str  # real | half | interval | count

    def valid(self, args) -> np.ndarray:
        """Where the (broadcast) arguments define a proper density."""
        ok = np.ones(np.broadcast(*args).shape if args else (), dtype=bool)
        for i in self.scale:
            ok = ok & (np.asarray(args[i]) > 0)
        if self.name == "uniform":
            ok = ok & (np.asarray(args[1]) > np.asarray(args[0]))
        return ok


FAMILIES = {
    "normal": Family("normal", ("mean", "sd"), (1,), normal_logpdf, "real"),
    "gamma": Family("gamma", ("shape", "rate"), (0, 1), gamma_logpdf, "half"),
    "exponential": Family("exponential", ("rate",), (0,), exponential_logpdf, "half"),
    "uniform": Family("uniform", ("lo", "hi"), (), uniform_logpdf, "interval"),
    "poisson": Family("poisson", ("rate",), (0,), poisson_logpmf, "count"),
}
