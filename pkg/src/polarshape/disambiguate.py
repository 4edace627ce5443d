"""Resolvers for the azimuth pi-ambiguity and the specular two-zenith
ambiguity: an oracle (testing upper bound) and a convexity heuristic."""

from dataclasses import dataclass

import numpy as np

from .core import NormalMap, PriorNormals


@dataclass
class CandidateSet:
    """Per-pixel candidate unit normals: 2 for diffuse, 4 for specular."""

    normals: np.ndarray  # (H, W, K, 3)
    counts: np.ndarray   # (H, W) candidates valid per pixel, 1..K
    mask: np.ndarray     # (H, W) bool

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=int)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.normals.ndim != 4 or self.normals.shape[-1] != 3:
            raise ValueError("candidate normals must have shape (H, W, K, 3)")
        if np.any(self.counts[self.mask] < 1):
            raise ValueError("masked-in pixels must have at least one candidate")


def _flip_azimuth(normals):
    flipped = normals.copy()
    flipped[..., :2] *= -1.0
    return flipped


def candidates_from_priors(priors: PriorNormals, model: str) -> CandidateSet:
    """Expand prior maps into explicit candidate lists.

    Diffuse: the prior normal and its azimuth-flipped twin. Specular: both
    zenith solutions, each with both azimuths (4 candidates).
    """
    if model == "diffuse":
        base = priors.n_diff
        stackup = [base.normals, _flip_azimuth(base.normals)]
        mask = base.mask
    elif model == "specular":
        s1, s2 = priors.n_spec1, priors.n_spec2
        stackup = [s1.normals, _flip_azimuth(s1.normals),
                   s2.normals, _flip_azimuth(s2.normals)]
        mask = s1.mask & s2.mask
    else:
        raise ValueError(f"model must be 'diffuse' or 'specular', got {model!r}")
    cands = np.stack(stackup, axis=2)
    counts = np.full(mask.shape, cands.shape[2], dtype=int)
    return CandidateSet(normals=cands, counts=counts, mask=mask)


def oracle_disambiguate(cands: CandidateSet, truth: NormalMap) -> NormalMap:
    """Select the candidate closest to the ground truth at every pixel.

    This is the physics-only error floor: no learned or heuristic resolver
    can beat it on the same candidate set.
    """
    if cands.mask.shape != truth.mask.shape:
        raise ValueError(
            f"candidate dims {cands.mask.shape} do not match truth {truth.mask.shape}")
    k = cands.normals.shape[2]
    dots = np.einsum("hwkc,hwc->hwk", cands.normals, truth.normals)
    invalid = np.arange(k)[None, None, :] >= cands.counts[..., None]
    dots = np.where(invalid, -np.inf, dots)
    best = np.argmax(dots, axis=2)
    chosen = np.take_along_axis(cands.normals, best[..., None, None], axis=2)
    return NormalMap(normals=chosen[:, :, 0, :], mask=cands.mask & truth.mask)


def convexity_disambiguate(cands: CandidateSet, mask=None) -> NormalMap:
    """Pick the azimuth candidate pointing outward from the mask centroid.

    A convex blob's normals lean away from its center, so the candidate
    whose in-plane component has positive dot product with the outward
    direction wins; ties go to the first candidate. Assumes a single
    connected region; known to fail on non-convex silhouettes, but the
    output is always total and unit-norm.
    """
    if mask is None:
        mask = cands.mask
    mask = np.asarray(mask, dtype=bool)
    if not np.any(mask):
        raise ValueError("convexity heuristic needs a non-empty mask")
    ys, xs = np.nonzero(mask)
    cy, cx = ys.mean(), xs.mean()

    h, w = mask.shape
    yy, xx = np.meshgrid(np.arange(h, dtype=float), np.arange(w, dtype=float),
                         indexing="ij")
    out_y, out_x = yy - cy, xx - cx

    k = cands.normals.shape[2]
    score = (cands.normals[..., 0] * out_x[..., None]
             + cands.normals[..., 1] * out_y[..., None])
    invalid = np.arange(k)[None, None, :] >= cands.counts[..., None]
    outward = (score > 0.0) & ~invalid
    # argmax of a boolean plane returns the first True, or 0 when none is
    # positive -- which is exactly the first-candidate tie-break.
    best = np.argmax(outward, axis=2)
    chosen = np.take_along_axis(cands.normals, best[..., None, None], axis=2)
    return NormalMap(normals=chosen[:, :, 0, :], mask=cands.mask & mask)
