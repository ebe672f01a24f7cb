# %% [markdown]
# # Slicing constants of built-in bodies
#
# S = mass / (largest section * |K|^{1/n}). For log-concave even densities on
# symmetric convex bodies the largest section passes through the origin; a
# radial density |x| pushes the best hyperplane away from the centre.

# %%
import math

from slicelab import (IntegrationConfig, make_cross_polytope, make_cube, make_density, make_ellipsoid,
                      make_lq_ball, max_section, slicing_constant)

cfg = IntegrationConfig(sphere_samples=16384, section_samples=4096, seed=2)
one = make_density({"type": "constant"})

for n in (2, 3, 4):
    bodies = {"cube": make_cube(n), "cross": make_cross_polytope(n), "l3": make_lq_ball(n, 3.0),
              "ellipsoid": make_ellipsoid([0.6 + k / n for k in range(n)])}
    row = {name: slicing_constant(b, one, "central", cfg).central_constant for name, b in bodies.items()}
    print(n, {k: round(v, 4) for k, v in row.items()}, "bound", round(2 * math.sqrt(n), 4))

# %% [markdown]
# The disk has S = sqrt(pi)/2.

# %%
print(slicing_constant(make_lq_ball(2, 2.0), one, "central", cfg).central_constant, math.sqrt(math.pi) / 2)

# %% [markdown]
# ## Off-centre maximum

# %%
radial = make_density({"type": "radial_power", "alpha": 1.0})
disk = make_lq_ball(2, 2.0)
central = max_section(disk, radial, "central", cfg)
affine = max_section(disk, radial, "affine", cfg)
print(f"central {central.value.value:.6f}  affine {affine.value.value:.6f} at offset {abs(affine.s):.4f}")
