"""
Two ways to condition on v1 = v2
================================

Take v1, v2 independent Exp(1).  The diagonal is where v1 - v2 = 0 and also
where v1 / v2 = 1.  Conditioning on the first variable leaves a density
proportional to exp(-2v) along the diagonal; conditioning on the second
brings in the change-of-variables factor v and gives v exp(-2v).
"""

import numpy as np

from bayescond.borel import PROBES, DiagonalConditioningProblem, paradox_report
from bayescond.corpus import independent_exp_joint
from bayescond.measure import GridSpec

problem = DiagonalConditioningProblem(independent_exp_joint(), "Exp(1) x Exp(1)")
rep = paradox_report(problem, GridSpec(4096))

print("mean along the diagonal, via v1 - v2:", round(rep["difference"]["mean"], 6))
print("mean along the diagonal, via v1 / v2:", round(rep["ratio"]["mean"], 6))
print("largest gap between the two densities:", round(rep["supdiff"], 6))

# %%
# Shrinking bands |v1 - v2| < eps approach the first answer and shrinking
# wedges |v1/v2 - 1| < eps approach the second.

for family, info in rep["nested"].items():
    rows = zip(info["eps"], info["distance_to_limit"], info["distance_to_other"])
    print(family, "->", info["limit"])
    for eps, near, far in rows:
        print(f"   eps={eps:<6} distance to own limit {near:.4f}   to the other {far:.4f}")

# a few values of each density on the probe lattice
idx = np.linspace(0, len(PROBES) - 1, 6).astype(int)
for i in idx:
    print(f"v={PROBES[i]:.3f}  difference={rep['difference']['density'][i]:.5f}  "
          f"ratio={rep['ratio']['density'][i]:.5f}")

print(rep["verdict"])
