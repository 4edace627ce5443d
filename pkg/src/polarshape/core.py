"""Per-pixel polarimetric math: sinusoid fitting, DoP/phase extraction,
angle/normal conversions, and the three ambiguous normal prior maps.

Intensity through a linear polarizer at angle ``a`` varies as

    I(a) = mean + amplitude * cos(2 * (a - phase)),

so three distinct polarizer angles (modulo pi) determine the per-pixel
triplet (mean, amplitude, phase). All operations are pure per-pixel
functions over immutable inputs and safe to run concurrently on disjoint
tiles.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fresnel import (
    DEFAULT_REFRACTIVE_INDEX,
    check_refractive_index,
    invert_diffuse_dop,
    invert_specular_dop,
)

# Relative amplitude below which the sinusoid phase is considered noise:
# the polarization signal is very subtle for fronto-parallel geometry.
AMPLITUDE_CONFIDENCE_FLOOR = 1e-3

CANONICAL_ANGLES = np.deg2rad([0.0, 45.0, 90.0, 135.0])

THREADS_ENV_VAR = "POLARSHAPE_THREADS"


class DegenerateAngles(ValueError):
    """Fewer than three polarizer angles distinct modulo pi."""


def _distinct_mod_pi(angles, tol=1e-9):
    folded = np.sort(np.mod(angles, np.pi))
    gaps = np.diff(np.concatenate([folded, [folded[0] + np.pi]]))
    return int(np.count_nonzero(gaps > tol))


@dataclass
class PolarizationStack:
    """M co-registered grayscale planes with their polarizer angles."""

    angles: np.ndarray  # (M,) radians
    images: np.ndarray  # (M, H, W) non-negative intensities
    mask: np.ndarray    # (H, W) bool

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        self.images = np.asarray(self.images, dtype=float)
        if self.angles.ndim != 1 or self.images.ndim != 3:
            raise ValueError("expected angles (M,) and images (M, H, W)")
        if self.images.shape[0] != self.angles.shape[0]:
            raise ValueError(
                f"{self.images.shape[0]} image planes for "
                f"{self.angles.shape[0]} polarizer angles")
        if self.mask is None:
            self.mask = np.ones(self.images.shape[1:], dtype=bool)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != self.images.shape[1:]:
            raise ValueError(
                f"mask shape {self.mask.shape} does not match image planes "
                f"{self.images.shape[1:]}")
        if self.angles.shape[0] < 3:
            raise DegenerateAngles("need at least 3 polarizer angles")
        if _distinct_mod_pi(self.angles) < self.angles.shape[0]:
            raise ValueError("polarizer angles must be distinct modulo pi")
        vals = self.images[:, self.mask]
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("intensities must be finite and >= 0 on masked-in pixels")

    @property
    def height(self) -> int:
        return self.images.shape[1]

    @property
    def width(self) -> int:
        return self.images.shape[2]


@dataclass
class SinusoidFit:
    """Per-pixel (mean, amplitude, phase) of the polarizer sinusoid."""

    mean: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray           # radians in [0, pi)
    low_confidence: np.ndarray  # bool


@dataclass
class NormalMap:
    """Per-pixel unit normals in camera space with a validity mask."""

    normals: np.ndarray  # (H, W, 3), camera-facing (n_z >= 0)
    mask: np.ndarray     # (H, W) bool

    def __post_init__(self):
        self.normals = np.asarray(self.normals)
        if self.normals.ndim != 3 or self.normals.shape[-1] != 3:
            raise ValueError("normals must have shape (H, W, 3)")
        if self.mask is None:
            self.mask = np.ones(self.normals.shape[:2], dtype=bool)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != self.normals.shape[:2]:
            raise ValueError(
                f"mask shape {self.mask.shape} does not match normals "
                f"{self.normals.shape[:2]}")

    @property
    def height(self) -> int:
        return self.normals.shape[0]

    @property
    def width(self) -> int:
        return self.normals.shape[1]

    def validate(self, atol=1e-6):
        """Check unit norm and the camera-facing convention on masked-in pixels."""
        vecs = self.normals[self.mask]
        norms = np.linalg.norm(vecs, axis=-1)
        if np.any(np.abs(norms - 1.0) > atol):
            raise ValueError("masked-in normals must have unit length")
        if np.any(vecs[:, 2] < -atol):
            raise ValueError("masked-in normals must be camera-facing (n_z >= 0)")
        return self


@dataclass
class PriorNormals:
    """The three ambiguous physical solutions fed to downstream consumers."""

    n_diff: NormalMap
    n_spec1: NormalMap
    n_spec2: NormalMap


def fit_sinusoid(stack: PolarizationStack,
                 eps_amp=AMPLITUDE_CONFIDENCE_FLOOR) -> SinusoidFit:
    """Least-squares fit of I(a) = c0 + c1 cos(2a) + c2 sin(2a) per pixel.

    mean = c0, amplitude = hypot(c1, c2), phase = atan2(c2, c1) / 2 folded
    into [0, pi). For the canonical angle set {0, 45, 90, 135} degrees this
    reduces exactly to the Stokes estimates c0 = (I0+I45+I90+I135)/4,
    c1 = (I0-I90)/2, c2 = (I45-I135)/2. Pixels whose relative amplitude
    falls below ``eps_amp`` carry no usable polarization signal: they are
    flagged low-confidence and their amplitude and phase are zeroed.
    """
    if _distinct_mod_pi(stack.angles) < 3:
        raise DegenerateAngles(
            "sinusoid fit needs at least 3 polarizer angles distinct modulo pi")
    two_a = 2.0 * stack.angles
    design = np.stack([np.ones_like(two_a), np.cos(two_a), np.sin(two_a)], axis=1)
    coeffs = np.tensordot(np.linalg.pinv(design), stack.images, axes=([1], [0]))
    mean, b, c = coeffs
    amplitude = np.hypot(b, c)
    phase = np.mod(0.5 * np.arctan2(c, b), np.pi)
    low = (amplitude < eps_amp * mean) | (mean <= 0.0)
    phase = np.where(low, 0.0, phase)
    amplitude = np.where(low, 0.0, amplitude)
    return SinusoidFit(mean=mean, amplitude=amplitude, phase=phase,
                       low_confidence=low)


def dop_from_fit(fit: SinusoidFit) -> np.ndarray:
    """Degree of polarization rho = amplitude / mean, clamped to [0, 1].

    Dark pixels (mean = 0) map to rho = 0 by convention.
    """
    positive = fit.mean > 0.0
    rho = np.where(positive, fit.amplitude / np.where(positive, fit.mean, 1.0), 0.0)
    return np.clip(rho, 0.0, 1.0)


def azimuth_candidates(phase, model: str):
    """The two azimuth angles consistent with a sinusoid phase in [0, pi).

    Diffuse dominance puts the azimuth at the phase itself; specular
    dominance shifts it by pi/2. The linear polarizer cannot distinguish a
    pi rotation, so each model yields a pair, folded into [0, 2*pi).
    """
    phase = np.asarray(phase, dtype=float)
    if model == "diffuse":
        first = phase
    elif model == "specular":
        first = phase + np.pi / 2
    else:
        raise ValueError(f"model must be 'diffuse' or 'specular', got {model!r}")
    two_pi = 2.0 * np.pi
    return np.mod(first, two_pi), np.mod(first + np.pi, two_pi)


def angles_to_normal(azimuth, zenith) -> np.ndarray:
    """Unit normal (sin t cos p, sin t sin p, cos t) from azimuth/zenith."""
    azimuth = np.asarray(azimuth, dtype=float)
    zenith = np.asarray(zenith, dtype=float)
    st = np.sin(zenith)
    return np.stack([st * np.cos(azimuth), st * np.sin(azimuth),
                     np.cos(zenith)], axis=-1)


def normal_to_angles(normals, atol=1e-6):
    """Azimuth in [0, 2*pi) and zenith in [0, pi/2] of camera-facing unit normals.

    The inverse of :func:`angles_to_normal`; azimuth is 0 by convention at
    zero zenith. Non-unit or back-facing input raises.
    """
    normals = np.asarray(normals, dtype=float)
    norms = np.linalg.norm(normals, axis=-1)
    if np.any(np.abs(norms - 1.0) > atol):
        raise ValueError("normals must have unit length")
    nz = normals[..., 2]
    if np.any(nz < -atol):
        raise ValueError("normals must be camera-facing (n_z >= 0)")
    zenith = np.arccos(np.clip(nz, 0.0, 1.0))
    azimuth = np.mod(np.arctan2(normals[..., 1], normals[..., 0]), 2.0 * np.pi)
    azimuth = np.where(zenith == 0.0, 0.0, azimuth)
    return azimuth, zenith


def thread_count() -> int:
    """Worker count for tile-parallel maps, from the environment (default 1)."""
    raw = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        count = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}")
    return max(count, 1)


def compute_priors(stack: PolarizationStack,
                   n=DEFAULT_REFRACTIVE_INDEX,
                   eps_amp=AMPLITUDE_CONFIDENCE_FLOOR,
                   threads: int | None = None) -> PriorNormals:
    """The ambiguous normal maps implied by the diffuse and specular models.

    The diffuse prior takes azimuth = phase (the candidate in [0, pi)) and
    the diffuse zenith inverse; the two specular priors take
    azimuth = phase + pi/2 and the two zeniths of the specular inverse.
    Low-confidence pixels yield (0, 0, 1) in all three maps and are flagged
    out of the prior masks.
    """
    n = check_refractive_index(n)
    if threads is None:
        threads = thread_count()

    fit = fit_sinusoid(stack, eps_amp=eps_amp)
    rho = dop_from_fit(fit)
    phase = fit.phase

    def invert_band(rows):
        band = rho[rows]
        theta_d, _ = invert_diffuse_dop(band, n)
        theta_s1, theta_s2, _ = invert_specular_dop(band, n)
        return theta_d, theta_s1, theta_s2

    if threads > 1 and stack.height >= 2 * threads:
        bands = np.array_split(np.arange(stack.height), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(invert_band, bands))
        theta_d = np.concatenate([p[0] for p in parts])
        theta_s1 = np.concatenate([p[1] for p in parts])
        theta_s2 = np.concatenate([p[2] for p in parts])
    else:
        theta_d, theta_s1, theta_s2 = invert_band(slice(None))

    up = np.array([0.0, 0.0, 1.0])
    low = fit.low_confidence[..., None]
    az_spec = np.mod(phase + np.pi / 2, 2.0 * np.pi)
    maps = []
    for azimuth, zenith in ((phase, theta_d), (az_spec, theta_s1),
                            (az_spec, theta_s2)):
        normals = np.where(low, up, angles_to_normal(azimuth, zenith))
        maps.append(NormalMap(normals, stack.mask & ~fit.low_confidence))
    return PriorNormals(n_diff=maps[0], n_spec1=maps[1], n_spec2=maps[2])
