# %% [markdown]
# # Distances to L_p balls and the moment comparison
#
# Distances are witness-restricted: every number is an upper bound computed
# from the homothets of the witnesses supplied.

# %%
import math

from slicelab import (IntegrationConfig, bp_compare, dovr_upper, euclidean_witness, john_witnesses,
                      lp_ball_witness, make_cube, make_density, make_ellipsoid, make_lq_ball)

cfg = IntegrationConfig(sphere_samples=16384, section_samples=4096, seed=3)

square = make_cube(2)
rep = dovr_upper(square, 2.0, [euclidean_witness(2, 2.0)], cfg)
print(f"square in disk: {rep.dovr_upper:.5f} vs sqrt(pi/2) = {math.sqrt(math.pi / 2):.5f}; dbm {rep.dbm_upper:.5f}")

# %% [markdown]
# With the circumscribed ball alone an eccentric ellipsoid exceeds sqrt(n);
# adding the John ellipsoid brings the bound back to 1.

# %%
ell = make_ellipsoid([0.6, 1.6])
for w in john_witnesses(ell, 2.0) + [lp_ball_witness(2, 2.0)]:
    print(w.tag, round(dovr_upper(ell, 2.0, [w], cfg, with_dbm=False).dovr_upper, 5))

# %% [markdown]
# ## Moment comparison
#
# If every directional moment of K is at most that of M, the mass of K is at
# most a^p times the mass of M, with a the distance from M to a body D in L_p.
# Ball inside cube, D the ball: a = sqrt(n).

# %%
one = make_density({"type": "constant"})
for n, p in ((2, 2.0), (3, 3.0)):
    rep = bp_compare(make_lq_ball(n, 2.0), make_cube(n), one, p, euclidean_witness(n, p), cfg)
    print(n, p, "hypothesis", rep.hypothesis_holds, "a", round(rep.a, 6),
          "lhs", round(rep.lhs.value, 5), "rhs", round(rep.rhs, 5), rep.status)
