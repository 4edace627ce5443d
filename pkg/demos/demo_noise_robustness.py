"""Photon noise and the DoP estimate.

A polarizer discards half the light, so shot noise matters. Rendering the
same pixel many times under Poisson noise shows the DoP estimate's spread
shrinking with the square root of the photon scale.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from polarshape import (
    CANONICAL_ANGLES,
    NoiseSpec,
    NormalMap,
    SceneSpec,
    angles_to_normal,
    dop_from_fit,
    fit_sinusoid,
    render_stack,
)

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

trials = 2000
normals = np.tile(angles_to_normal(0.3, 0.9), (trials, 1, 1))
scales = np.logspace(3, 6, 7)
stds = []
for scale in scales:
    scene = SceneSpec(
        normals=NormalMap(normals=normals, mask=np.ones((trials, 1), dtype=bool)),
        dominance=np.zeros((trials, 1), dtype=bool),
        unpolarized_intensity=np.full((trials, 1), 0.5),
        noise=NoiseSpec(kind="poisson", scale=scale, seed=1))
    rho = dop_from_fit(fit_sinusoid(render_stack(scene, CANONICAL_ANGLES)))
    stds.append(rho.std())
    print(f"photon scale {scale:9.0f}: rho std = {rho.std():.5f}")

fig, ax = plt.subplots(figsize=(6, 4))
ax.loglog(scales, stds, "o-", label="measured")
ax.loglog(scales, stds[0] * np.sqrt(scales[0] / scales), "--",
          label="1/sqrt(scale)")
ax.set_xlabel("photons per unit intensity")
ax.set_ylabel("std of DoP estimate")
ax.set_title(f"Shot-noise scaling over {trials} trials")
ax.legend()
fig.tight_layout()
fig.savefig(out_dir / "noise_scaling.png", dpi=120)
print(f"wrote {out_dir / 'noise_scaling.png'}")
