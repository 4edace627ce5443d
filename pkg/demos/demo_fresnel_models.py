"""The two Fresnel DoP curves and their numerical inversion.

Diffuse-dominant reflection maps zenith angle to degree of polarization
monotonically, so a measured DoP pins down one zenith. Specular-dominant
reflection is unimodal with its peak at the Brewster angle, so the same
DoP is explained by two zeniths -- the ambiguity this toolkit carries
around as N_spec1/N_spec2.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from polarshape import (
    diffuse_dop,
    invert_diffuse_dop,
    invert_specular_dop,
    specular_dop,
    specular_dop_peak,
)

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

n = 1.5
theta = np.linspace(0.0, np.pi / 2, 600)
rho_d = diffuse_dop(theta, n)
rho_s = specular_dop(theta, n)
theta_star, rho_peak = specular_dop_peak(n)

print(f"refractive index n = {n}")
print(f"diffuse DoP saturates at {rho_d[-1]:.4f} (grazing incidence)")
print(f"specular DoP peaks at {np.rad2deg(theta_star):.2f} deg "
      f"(Brewster angle atan(n) = {np.rad2deg(np.arctan(n)):.2f} deg), "
      f"peak value {rho_peak:.6f}")

# Round trip a diffuse measurement.
rho = diffuse_dop(np.deg2rad(40.0), n)
back, saturated = invert_diffuse_dop(rho, n)
print(f"\ndiffuse: rho({40.0:.0f} deg) = {rho:.6f} "
      f"-> inverse gives {np.rad2deg(back):.10f} deg (saturated={saturated})")

# The same specular DoP is explained by two zeniths.
rho = specular_dop(np.deg2rad(30.0), n)
t_lo, t_hi, _ = invert_specular_dop(rho, n)
print(f"specular: rho(30 deg) = {rho:.6f} -> zenith candidates "
      f"{np.rad2deg(t_lo):.4f} deg and {np.rad2deg(t_hi):.4f} deg")

fig, ax = plt.subplots(figsize=(7, 4.5))
ax.plot(np.rad2deg(theta), rho_d, label="diffuse dominant")
ax.plot(np.rad2deg(theta), rho_s, label="specular dominant")
ax.axvline(np.rad2deg(theta_star), color="gray", ls=":",
           label="Brewster angle")
ax.axhline(rho, color="k", lw=0.6, ls="--")
ax.plot([np.rad2deg(t_lo), np.rad2deg(t_hi)], [rho, rho], "ko", ms=4)
ax.set_xlabel("zenith angle (deg)")
ax.set_ylabel("degree of polarization")
ax.set_title(f"Fresnel DoP models, n = {n}")
ax.legend()
fig.tight_layout()
fig.savefig(out_dir / "fresnel_models.png", dpi=120)
print(f"\nwrote {out_dir / 'fresnel_models.png'}")
