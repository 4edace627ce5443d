"""The shifted-tiling patch protocol.

Big images are processed as fixed-size patches; a diagonal schedule of
shifted tilings means interior pixels receive many votes and the fused
prediction has no visible patch seams.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from polarshape import make_patch_plan

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

plan = make_patch_plan((512, 512), patch_size=256, n_shifts=32)
origins = plan.origins()
print(f"plan: {len(plan.offsets)} diagonal shifts, {len(origins)} patches")

count = np.zeros((512, 512), dtype=int)
for y0, x0 in origins:
    count[y0:y0 + 256, x0:x0 + 256] += 1
print(f"coverage: min {count.min()}, max {count.max()} votes per pixel")

fig, ax = plt.subplots(figsize=(5.5, 4.5))
im = ax.imshow(count)
ax.set_title("votes per pixel, 256 px patches, 32 shifts")
fig.colorbar(im, ax=ax, label="votes")
fig.tight_layout()
fig.savefig(out_dir / "patch_coverage.png", dpi=120)
print(f"wrote {out_dir / 'patch_coverage.png'}")
