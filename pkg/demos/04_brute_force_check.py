"""Truncated series against a brute-force grand-canonical evaluation in a small periodic box."""

from bimix.validation import check_desk

ok, detail = check_desk(seed=42, samples=100_000)
print(f"{'quantity':<14} {'oracle':>14} {'series':>14} {'z':>7}")
for key in ("pressure_M3", "rho_R_M3", "rho_r_M3", "pressure_M4", "rho_R_M4", "rho_r_M4"):
    d = detail[key]
    print(f"{key:<14} {d['oracle']:14.9f} {d['series']:14.9f} {d['z']:7.2f}")
fv = detail["free_volume_identity"]
print(f"free-volume identity: rho_r V = {fv['rho_r_V']:.5f}, z_r <V_free> = {fv['zr_Vfree']:.5f} (z = {fv['z']:.2f})")
print("all within 3 sigma" if ok else "disagreement beyond 3 sigma")
