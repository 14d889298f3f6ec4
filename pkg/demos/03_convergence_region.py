"""How far the activity can go: the solvent-aware criterion against the plain volume-scaling one."""

import numpy as np

from bimix import MixtureParams
from bimix import convergence as cv

p = MixtureParams(1.0, 0.1, 0.0, 0.1)
zh, zR = cv.max_zhat_easy(p)
print(f"R=1, r=0.1, z_r=0.1: zhat <= {zh:.10f}, z_R <= {zR:.10f}, volume-scaling z_R <= {cv.max_zR_kp(p):.10f}")
print(f"gain factor {cv.improvement_ratio(p):.8f}\n")

print(cv.sweep_csv(cv.region_sweep(np.linspace(0, 0.2, 9))))

col = MixtureParams(1.0, 0.1, 0.0, 0.05, model="colloid")
b, c, alpha = cv.default_construction(col)
bound = cv.hs_zhat_bound(col, b, c, alpha)
w = cv.witness_search_hs(col, 0.5 * bound)
print(f"colloid, z_r=0.05: default construction allows zhat < {bound:.3e}; witness at half of it: "
      f"{ {k: round(v, 4) for k, v in w.constants.items()} }")
