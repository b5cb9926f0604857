"""
Waiting times: a grid posterior next to its closed form
=======================================================

A rate theta gets a Gamma(2, 2) prior and one waiting time y ~ Exp(theta) is
observed.  The posterior is Gamma(3, 2 + y), so every number the grid engine
produces below has an exact counterpart.
"""

import math

import numpy as np

from bayescond.bayes import empirical_bayes_rate, posterior
from bayescond.corpus import waiting_times_model
from bayescond.distributions import gamma_logpdf
from bayescond.measure import GridSpec

g = GridSpec(100_000)
model = waiting_times_model()

for y in (0.5, 1.0, 2.0, 5.0):
    res = posterior(model, y, g)
    theta = res.points[:, 0]
    exact = np.exp(gamma_logpdf(theta, 3.0, 2.0 + y))
    err = np.max(np.abs(np.exp(res.log_density) - exact))
    print(f"y={y:<4} log p(y) grid={res.log_marginal_likelihood:.10f} "
          f"exact={math.log(8 / (y + 2) ** 3):.10f}  MAP={res.map_refined[0]:.8f} "
          f"(exact {2 / (2 + y):.8f})  sup error {err:.1e}")

# %%
# Choosing the prior rate from the data itself.  The log marginal
# 2 b^2 / (b + y)^3 peaks at b = 2y, which the golden-section search finds.

for y in (1.0, 3.0):
    r = empirical_bayes_rate(2.0, y)
    print(f"empirical Bayes rate for y={y}: {r.rate:.6f}")
