"""Cluster coefficients of the effective large-sphere gas as the solvent activity grows."""

from bimix import MixtureParams, b_m
from bimix.expansion import b2_quadrature, db2_quadrature, db_m_dzr

# the same seed at every z_r, so the Monte Carlo columns shift together
print(f"{'z_r':>5} {'b_2 (quad)':>12} {'b_2 (MC)':>18} {'b_3 (MC)':>14} {'db_2/dz_r':>11}")
for zr in (0.0, 0.05, 0.1, 0.2):
    p = MixtureParams(1.0, 0.1, 0.0, zr)
    b2 = b_m(2, p, 100_000, seed=1)
    b3 = b_m(3, p, 50_000, seed=1)
    print(f"{zr:5.2f} {b2_quadrature(p):12.5f} {b2.estimate:11.5f}+-{b2.stderr:.4f} {b3.estimate:9.2f}+-{b3.stderr:4.1f} "
          f"{db2_quadrature(p):11.5f}")

p = MixtureParams(1.0, 0.1, 0.0, 0.1)
rooted = db_m_dzr(2, p, 100_000, seed=3)
print(f"\nrooted estimate of db_2/dz_r at z_r = 0.1: {rooted.estimate:.5f} +- {rooted.stderr:.5f}")
