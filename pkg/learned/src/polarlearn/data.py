"""Training data: synthetic geometry rendered through the polarshape CLI.

Ground-truth normals come from random smooth height fields (sums of
gaussian bumps, slope-limited to stay away from grazing incidence). The
polarization stacks and the ambiguous prior maps are produced by the
primary toolkit's ``render`` and ``priors`` subcommands, then read back
from disk; this package never links against the primary.
"""

import subprocess
import sys
from pathlib import Path

import numpy as np

from . import formats

POLARSHAPE = [sys.executable, "-m", "polarshape"]
PLANE_NAMES = None  # taken from the rendered manifest


def run_polarshape(*args):
    """Invoke the primary CLI; raises with its stderr on failure."""
    cmd = POLARSHAPE + [str(a) for a in args]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{' '.join(cmd)} failed ({proc.returncode}): "
                           f"{proc.stderr.strip()}")
    return proc.stdout


def bump_normals(size, rng, n_bumps=4, max_slope=1.6) -> np.ndarray:
    """Unit normals of a random gaussian-bump height field, (H, W, 3).

    The slope cap bounds the zenith at atan(max_slope), keeping the render
    away from grazing incidence where the Fresnel models saturate.
    """
    coords = np.linspace(-1.0, 1.0, size)
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    dzdx = np.zeros((size, size))
    dzdy = np.zeros((size, size))
    for _ in range(n_bumps):
        amp = rng.uniform(-1.0, 1.0)
        cx, cy = rng.uniform(-0.7, 0.7, 2)
        sigma = rng.uniform(0.25, 0.6)
        g = amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma**2))
        dzdx += g * (-(xx - cx) / sigma**2)
        dzdy += g * (-(yy - cy) / sigma**2)
    slope = np.hypot(dzdx, dzdy).max()
    if slope > max_slope:
        dzdx *= max_slope / slope
        dzdy *= max_slope / slope
    normals = np.stack([-dzdx, -dzdy, np.ones_like(dzdx)], axis=-1)
    return normals / np.linalg.norm(normals, axis=-1, keepdims=True)


def bump_texture(size, rng, lo=0.15, hi=0.5) -> np.ndarray:
    """A smooth random brightness field in [lo, hi] (texture-copy bait)."""
    coords = np.linspace(-1.0, 1.0, size)
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    field = np.zeros((size, size))
    for _ in range(6):
        amp = rng.uniform(-1.0, 1.0)
        cx, cy = rng.uniform(-0.9, 0.9, 2)
        sigma = rng.uniform(0.1, 0.35)
        field += amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma**2))
    span = field.max() - field.min()
    if span < 1e-9:
        return np.full((size, size), 0.5 * (lo + hi))
    return lo + (hi - lo) * (field - field.min()) / span


def make_sample(sample_dir, rng, size=64, dominance="diffuse",
                textured=False, seed=0) -> Path:
    """Write one (truth, stack, priors) triple under ``sample_dir``."""
    sample_dir = Path(sample_dir)
    sample_dir.mkdir(parents=True, exist_ok=True)
    formats.write_pfm(sample_dir / "truth.pfm",
                      bump_normals(size, rng).astype(np.float32))
    scene = {
        "normals": "truth.pfm",
        "dominance": dominance,
        "unpolarized_intensity": 0.45,
        "refractive_index": 1.5,
        "noise": {"kind": "none"},
        "angles": [0, 45, 90, 135],
    }
    if textured:
        formats.write_gray16_png(sample_dir / "texture.png",
                                 bump_texture(size, rng))
        scene["unpolarized_intensity"] = "texture.png"
    formats.write_json(sample_dir / "scene.json", scene)
    run_polarshape("render", "--scene", sample_dir / "scene.json",
                   "--out", sample_dir / "capture", "--seed", seed)
    run_polarshape("priors", "--manifest", sample_dir / "capture/manifest.json",
                   "--out", sample_dir / "priors")
    return sample_dir


def load_sample(sample_dir):
    """Read one sample back as (input, truth) float32 arrays.

    Input is (13, H, W): the four polarization planes in manifest order,
    then n_diff, n_spec1, n_spec2 as three channels each. Truth is (3, H, W).
    """
    sample_dir = Path(sample_dir)
    manifest = formats.read_json(sample_dir / "capture/manifest.json")
    planes = [formats.read_gray_png(sample_dir / "capture" / name)
              for name in manifest["images"]]
    priors = [formats.read_pfm(sample_dir / "priors" / name)
              for name in ("n_diff.pfm", "n_spec1.pfm", "n_spec2.pfm")]
    channels = planes + [p[..., c] for p in priors for c in range(3)]
    x = np.stack(channels).astype(np.float32)
    truth = formats.read_pfm(sample_dir / "truth.pfm")
    y = np.moveaxis(truth, -1, 0).astype(np.float32)
    return x, y


def generate_dataset(root, count, seed, size=64, dominance="mixed",
                     textured=False):
    """Write ``count`` samples and return their (input, truth) pairs."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(count):
        label = dominance
        if dominance == "mixed":
            label = "diffuse" if i % 2 == 0 else "specular"
        sample = make_sample(root / f"sample_{i:03d}", rng, size=size,
                             dominance=label, textured=textured, seed=seed + i)
        pairs.append(load_sample(sample))
    return pairs
