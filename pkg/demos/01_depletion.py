"""Depletion picture: how the small spheres renormalize the large-sphere activity and pair interaction."""

import numpy as np

from bimix import MixtureParams, zhat
from bimix.effective import w2_penetrable_array, w_J_cloud_series

params = MixtureParams(R=1.0, r=0.1, z_R=1.0, z_r=0.1)

act = zhat(params)
print(f"effective activity: z_R = {params.z_R}  ->  zhat = {act.value:.6f} (exponent {act.exponent:.6f})")

print("\nsolvent-induced pair potential W_2(s) between two large spheres")
print(f"{'s':>6} {'exact':>12} {'cloud series':>14} {'stderr':>10}")
for s in np.linspace(2.0, 2.2, 5):
    exact = float(w2_penetrable_array(np.array([s]), params)[0])
    mc = w_J_cloud_series([[0, 0, 0], [s, 0, 0]], params, samples=40_000, seed=1)
    print(f"{s:6.3f} {exact:12.6f} {mc.value:14.6f} {mc.error:10.2e}")

colloid = params.with_(model="colloid")
for k in (1, 2, 3):
    res = zhat(colloid, truncation=k, samples=100_000, seed=2)
    print(f"colloid zhat, clouds up to {k} spheres: {res.value:.6f} +- {res.error:.1e}")
