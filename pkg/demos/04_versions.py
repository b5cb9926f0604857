"""
Versions of a conditional density
=================================

A conditional density is only pinned down up to sets of y that have
probability zero.  Rewriting the slice at a handful of points gives a new
version that is indistinguishable under the marginal of y, unless y is a
count and the point carries mass.
"""

from bayescond.conditional import ae_distance, condition_on_y, tweak_version
from bayescond.corpus import correlated_exp_joint, gamma_poisson_joint, waiting_times_joint
from bayescond.distributions import exponential_density
from bayescond.measure import GridSpec

g = GridSpec(4096)
c = condition_on_y(waiting_times_joint(), g)

# replace the slice at y = 42 by a unit exponential
t = tweak_version(c, 42.0, exponential_density(1.0), g)
print("slice at y=42 before:", float(c(1.0, 42.0)), " after:", float(t(1.0, 42.0)))
print("a.e. distance between the two versions:", ae_distance(c, t, c.marginal_y, g))

other = condition_on_y(correlated_exp_joint(), g)
print("a.e. distance to a conditional of another joint:", round(ae_distance(c, other, c.marginal_y, g), 4))

# %%
# With a counting variable the same edit is visible.

cp = condition_on_y(gamma_poisson_joint(), g)
tp = tweak_version(cp, 2, exponential_density(1.0), g)
print("counting y, tweak at k=2, a.e. distance:", round(ae_distance(cp, tp, cp.marginal_y, g), 4))
