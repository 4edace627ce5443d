"""Forward polarimetric renderer: synthesize polarization stacks from known
geometry, for round-trip tests and training data.

The camera is orthographic and no shading model is applied: the per-pixel
mean intensity is user-supplied, which isolates the polarization signal
from brightness cues.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import NormalMap, PolarizationStack, _distinct_mod_pi, normal_to_angles
from .fresnel import (
    DEFAULT_REFRACTIVE_INDEX,
    check_refractive_index,
    diffuse_dop,
    specular_dop,
)

NOISE_KINDS = ("none", "gaussian", "poisson")


@dataclass
class NoiseSpec:
    """Sensor noise model applied after the ideal render."""

    kind: str = "none"
    sigma: float = 0.0     # gaussian: additive std in intensity units
    scale: float = 1.0e4   # poisson: photons per unit intensity
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("gaussian sigma must be >= 0")
        if self.scale <= 0:
            raise ValueError("poisson scale must be > 0")


@dataclass
class SceneSpec:
    """Simulator input: geometry, per-pixel reflection dominance, and lighting."""

    normals: NormalMap
    dominance: np.ndarray               # (H, W) bool, True = specular-dominant
    unpolarized_intensity: np.ndarray   # (H, W) mean intensity, >= 0
    n: float = DEFAULT_REFRACTIVE_INDEX
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def __post_init__(self):
        self.dominance = np.asarray(self.dominance, dtype=bool)
        self.unpolarized_intensity = np.broadcast_to(
            np.asarray(self.unpolarized_intensity, dtype=float),
            self.normals.mask.shape).copy()
        if self.dominance.shape != self.normals.mask.shape:
            raise ValueError(
                f"dominance shape {self.dominance.shape} does not match "
                f"normals {self.normals.mask.shape}")
        if np.any(self.unpolarized_intensity[self.normals.mask] < 0):
            raise ValueError("unpolarized intensity must be >= 0")
        self.n = check_refractive_index(self.n)


def render_stack(scene: SceneSpec, angles) -> PolarizationStack:
    """Evaluate the polarizer sinusoid of each pixel at the requested angles.

    Per pixel: zenith/azimuth come from the ground-truth normal, the DoP
    from the dominance-selected Fresnel model, and the sinusoid phase from
    the azimuth (shifted by -pi/2 under specular dominance). Noise is
    applied last; intensities are clipped at 0 so the result is a valid
    stack. Deterministic given the noise seed.
    """
    angles = np.asarray(angles, dtype=float)
    if angles.ndim != 1 or angles.shape[0] < 3:
        raise ValueError("need at least 3 polarizer angles")
    if _distinct_mod_pi(angles) < angles.shape[0]:
        raise ValueError("polarizer angles must be distinct modulo pi")

    mask = scene.normals.mask
    safe = np.where(mask[..., None], scene.normals.normals, [0.0, 0.0, 1.0])
    azimuth, zenith = normal_to_angles(safe)

    rho = np.where(scene.dominance,
                   specular_dop(zenith, scene.n),
                   diffuse_dop(zenith, scene.n))
    phase = np.where(scene.dominance,
                     np.mod(azimuth - np.pi / 2, np.pi),
                     np.mod(azimuth, np.pi))

    mean = scene.unpolarized_intensity
    planes = mean * (1.0 + rho * np.cos(2.0 * (angles[:, None, None] - phase)))

    noise = scene.noise
    if noise.kind != "none":
        rng = np.random.default_rng(noise.seed)
        if noise.kind == "gaussian":
            planes = planes + rng.normal(0.0, noise.sigma, planes.shape)
        else:
            planes = rng.poisson(np.maximum(planes, 0.0) * noise.scale) / noise.scale
        planes = np.maximum(planes, 0.0)

    return PolarizationStack(angles=angles, images=planes, mask=mask.copy())


def synth_sphere(radius_px: int) -> NormalMap:
    """Orthographic normal map of a sphere with a circular validity mask.

    The returned image is (2r+1) x (2r+1) with the sphere centered on the
    middle pixel; pixels outside the disk are masked out and filled with
    (0, 0, 1).
    """
    radius_px = int(radius_px)
    if radius_px < 4:
        raise ValueError("sphere radius must be at least 4 pixels")
    coords = np.arange(2 * radius_px + 1, dtype=float) - radius_px
    y, x = np.meshgrid(coords, coords, indexing="ij")
    r2 = (x * x + y * y) / float(radius_px) ** 2
    mask = r2 <= 1.0
    nz = np.sqrt(np.clip(1.0 - r2, 0.0, None))
    normals = np.stack([x / radius_px, y / radius_px, nz], axis=-1)
    normals[~mask] = [0.0, 0.0, 1.0]
    return NormalMap(normals=normals, mask=mask)
