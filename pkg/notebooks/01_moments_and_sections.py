# %% [markdown]
# # Moments and sections of a cube
#
# The half-unit cube with the uniform density is the extremal case of the
# inequality between the largest section along a direction and the p-th moment
# in that direction: along a coordinate axis both sides agree. Away from the
# axis the inequality becomes strict.

# %%
import numpy as np

from slicelab import IntegrationConfig, make_cube, make_density, moment, section_moment_check

cfg = IntegrationConfig(sphere_samples=16384, section_samples=4096, seed=1)
cube = make_cube(3, 0.5)
one = make_density({"type": "constant"})

for p in (1.0, 2.0, 5.0):
    axis = section_moment_check(cube, one, p, np.eye(3)[0], cfg)
    tilted = section_moment_check(cube, one, p, np.array([1.0, 1.0, 0.0]) / np.sqrt(2), cfg)
    print(f"p={p:g}  axis lhs/rhs={axis.lhs / axis.rhs:.6f}  tilted lhs/rhs={tilted.lhs / tilted.rhs:.4f}")

# %% [markdown]
# The axis moment has the closed form 2^{-p}/(p+1).

# %%
for p in (1.0, 2.0, 5.0):
    m = moment(cube, one, p, np.eye(3)[0], cfg)
    print(f"p={p:g}  moment={m.value:.8f} +- {m.std_error:.1e}  closed form={2.0**-p / (p + 1):.8f}")

# %% [markdown]
# ## Where is the moment smallest?
#
# For an ellipsoid the minimal directional moment sits on the shortest axis.

# %%
from slicelab import make_ellipsoid, min_moment

res = min_moment(make_ellipsoid([1.0, 0.5, 2.0]), one, 2.0, cfg)
print("direction", np.round(res.direction, 4), "value", res.value.value)
