"""
Model files
===========

The hierarchical model with a funnel-shaped prior (delta -> m -> y <- lambda)
lives in a small text file.  Parse it, print its canonical form, compile it,
and compute the three-dimensional grid posterior for one observation.
"""

import pathlib

import numpy as np

from bayescond.bayes import posterior
from bayescond.dsl import compile_joint, load, print_canonical
from bayescond.measure import GridSpec

models = pathlib.Path(__file__).resolve().parent.parent / "models"
graph = load(models / "fig2_acausality.bmod")
print(print_canonical(graph))
print("edges:", graph.edges)

compiled = compile_joint(graph)
res = posterior(compiled.bayes_model("hierarchical"), [0.7], GridSpec(50))
print("MAP (delta, m, lambda):", np.round(res.map_point, 3))
print("log marginal likelihood:", round(res.log_marginal_likelihood, 6))

# %%
# The shared-parameter model: two measurements of one quantity.

right = compile_joint(load(models / "fig1_right.bmod"))
res = posterior(right.bayes_model("shared"), [0.3, 1.1], GridSpec(4096))
print("posterior mode of v:", round(res.map_refined[0], 6), "(exact", round(1.4 / 3, 6), ")")
