"""Angular-error metric and the patch split/stitch inference protocol.

Large images are evaluated as overlapping fixed-size patches whose
predictions are averaged back together; a diagonal schedule of shifted
tilings hides the patch boundaries.
"""

from dataclasses import dataclass

import numpy as np

from .core import NormalMap

DEFAULT_PATCH_SIZE = 256
DEFAULT_N_SHIFTS = 32


def _unit_rows(vectors):
    v = np.asarray(vectors, dtype=np.float64)
    return v / np.maximum(np.linalg.norm(v, axis=-1, keepdims=True), 1e-12)


def mean_angular_error(est: NormalMap, truth: NormalMap) -> float:
    """Mean angular error in degrees over the intersection of both masks.

    Inputs are renormalized in float64 first so that storage precision
    (e.g. float32 PFM files) does not masquerade as angular error.
    """
    est_dims = (est.height, est.width)
    truth_dims = (truth.height, truth.width)
    if est_dims != truth_dims:
        raise ValueError(
            f"dimension mismatch: estimate {est_dims} vs truth {truth_dims}")
    both = est.mask & truth.mask
    if not np.any(both):
        raise ValueError("no pixel is masked-in in both maps")
    a = _unit_rows(est.normals[both])
    b = _unit_rows(truth.normals[both])
    dots = np.clip(np.sum(a * b, axis=-1), -1.0, 1.0)
    return float(np.degrees(np.mean(np.arccos(dots))))


@dataclass
class PatchPlan:
    """A base tiling plus diagonally shifted tilings of one image."""

    patch_size: int
    offsets: list          # [(dx, dy), ...] global shifts, (0, 0) first
    height: int
    width: int

    def origins(self):
        """Unique (row, col) patch origins per shift, clamped in-bounds."""
        seen = []
        for dx, dy in self.offsets:
            for y0 in _axis_origins(self.height, self.patch_size, dy):
                for x0 in _axis_origins(self.width, self.patch_size, dx):
                    seen.append((y0, x0))
        return seen


def _axis_origins(extent, patch, shift):
    positions = set()
    pos = shift - patch
    while pos < extent:
        positions.add(min(max(pos, 0), extent - patch))
        pos += patch
    return sorted(positions)


def make_patch_plan(dims, patch_size=DEFAULT_PATCH_SIZE,
                    n_shifts=DEFAULT_N_SHIFTS) -> PatchPlan:
    """Build the shifted-tiling plan for an image of (height, width).

    The base tiling counts as shift 0; the remaining n_shifts - 1 tilings
    are displaced along the diagonal by uniformly spaced steps, so every
    pixel is covered at least once and interior pixels many times.
    """
    height, width = int(dims[0]), int(dims[1])
    patch_size = int(patch_size)
    if patch_size < 1 or n_shifts < 1:
        raise ValueError("patch size and shift count must be positive")
    if height < patch_size or width < patch_size:
        raise ValueError(
            f"image ({height}, {width}) is smaller than the patch size "
            f"{patch_size}; pad the image up to the patch size first")
    steps = [(i * patch_size) // n_shifts for i in range(n_shifts)]
    if len(set(steps)) != n_shifts:
        raise ValueError(
            f"{n_shifts} shifts do not fit a {patch_size}-pixel patch; "
            "reduce the shift count")
    return PatchPlan(patch_size=patch_size,
                     offsets=[(s, s) for s in steps],
                     height=height, width=width)


def stitch(patch_outputs, dims):
    """Fuse per-patch normal predictions into one map of (height, width).

    Takes (origin, NormalMap) pairs with origin = (row, col). Each pixel is
    the running vector mean of all covering votes, renormalized to unit
    length; pixels never covered are masked out. Returns the fused map and
    a flag plane marking pixels whose votes cancelled to zero norm (filled
    with (0, 0, 1)).
    """
    height, width = int(dims[0]), int(dims[1])
    count = np.zeros((height, width), dtype=int)
    fused = np.zeros((height, width, 3))
    for (y0, x0), patch in patch_outputs:
        ph, pw = patch.height, patch.width
        if y0 < 0 or x0 < 0 or y0 + ph > height or x0 + pw > width:
            raise ValueError(f"patch at ({y0}, {x0}) falls outside ({height}, {width})")
        sub_c = count[y0:y0 + ph, x0:x0 + pw]
        sub_n = fused[y0:y0 + ph, x0:x0 + pw]
        m = patch.mask
        sub_c[m] += 1
        sub_n[m] += (patch.normals[m] - sub_n[m]) / sub_c[m, None]
    covered = count > 0
    norms = np.linalg.norm(fused, axis=-1)
    degenerate = covered & (norms < 1e-8)
    # Renormalize only where the mean actually left the unit sphere, so a
    # pixel whose votes all agree passes through bit-exact.
    scale = covered & ~degenerate & (np.abs(norms - 1.0) > 1e-12)
    fused[scale] /= norms[scale, None]
    fused[degenerate] = [0.0, 0.0, 1.0]
    fused[~covered] = [0.0, 0.0, 1.0]
    return NormalMap(normals=fused, mask=covered), degenerate
