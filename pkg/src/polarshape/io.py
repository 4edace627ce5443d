"""File formats and manifests: PFM float maps, grayscale PNG planes, and the
JSON manifests that tie a capture together.

PFM is used for float imagery (no compression ambiguity, bit-exact round
trips); PNG for integer planes and masks; JSON for manifests. Intensities
are treated as linear unless the manifest flags gamma-encoded input.
"""

import json
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .core import NormalMap, PolarizationStack
from .simulate import NoiseSpec, SceneSpec

SCHEMA_VERSION = 1
LIGHTING_LABELS = ("indoor", "overcast", "sunlight", "synthetic")
GAMMA_EXPONENT = 2.2

MANIFEST_KEYS = {"schema_version", "angles", "images", "truth_normals",
                 "mask", "lighting", "refractive_index", "gamma_encoded"}
SCENE_KEYS = {"schema_version", "normals", "dominance", "unpolarized_intensity",
              "refractive_index", "noise", "angles"}


class LoadError(ValueError):
    """A file could not be decoded; the message names the offending path."""


# ---------------------------------------------------------------------------
# PFM

def write_pfm(path, data):
    """Write a (H, W) or (H, W, 3) float32 PFM, little-endian, bottom-up rows."""
    path = Path(path)
    data = np.asarray(data, dtype=np.float32)
    if data.ndim == 2:
        header = b"Pf"
    elif data.ndim == 3 and data.shape[2] == 3:
        header = b"PF"
    else:
        raise ValueError(f"PFM data must be (H, W) or (H, W, 3), got {data.shape}")
    height, width = data.shape[:2]
    with open(path, "wb") as f:
        f.write(header + b"\n")
        f.write(f"{width} {height}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(np.flipud(data).astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    """Read a PFM file; big-endian files (positive scale) are converted."""
    path = Path(path)
    with open(path, "rb") as f:
        raw = f.read()

    def fail(msg, offset):
        raise LoadError(f"{path}: {msg} at byte offset {offset}")

    pos = 0
    tokens = []
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            fail("truncated PFM header", pos)
        tokens.append(raw[start:pos])
    if tokens[0] not in (b"PF", b"Pf"):
        fail(f"not a PFM file (magic {tokens[0]!r})", 0)
    channels = 3 if tokens[0] == b"PF" else 1
    try:
        width, height = int(tokens[1]), int(tokens[2])
        scale = float(tokens[3])
    except ValueError:
        fail("malformed PFM header", pos)
    if width <= 0 or height <= 0 or scale == 0.0:
        fail("malformed PFM header", pos)
    pos += 1  # single whitespace byte terminates the header
    expected = width * height * channels * 4
    if len(raw) - pos < expected:
        fail(f"expected {expected} pixel bytes, file ends", len(raw))
    endian = "<" if scale < 0 else ">"
    data = np.frombuffer(raw, dtype=f"{endian}f4", count=width * height * channels,
                         offset=pos)
    data = data.astype(np.float32).reshape(
        (height, width) if channels == 1 else (height, width, 3))
    return np.flipud(data).copy()


def _mask_companion(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + "_mask.png")


def save_normal_map(nmap: NormalMap, path):
    """Write normals as 3-channel float32 PFM plus a companion mask PNG.

    Refuses NaN on masked-in pixels; a silently corrupt map is worse than a
    failed save.
    """
    if np.any(~np.isfinite(nmap.normals[nmap.mask])):
        raise ValueError(f"refusing to save {path}: NaN/Inf in masked-in normals")
    write_pfm(path, nmap.normals)
    write_mask_png(_mask_companion(path), nmap.mask)


def load_normal_map(path) -> NormalMap:
    """Read a normal map written by :func:`save_normal_map`.

    A missing mask companion means all pixels are valid.
    """
    path = Path(path)
    normals = read_pfm(path)
    if normals.ndim != 3:
        raise LoadError(f"{path}: expected a 3-channel PFM normal map")
    companion = _mask_companion(path)
    mask = None
    if companion.exists():
        mask = read_mask_png(companion)
        if mask.shape != normals.shape[:2]:
            raise LoadError(
                f"{companion}: mask shape {mask.shape} does not match the "
                f"{normals.shape[:2]} normal map in {path.name}")
    return NormalMap(normals=normals, mask=mask)


# ---------------------------------------------------------------------------
# PNG planes

def read_gray_png(path) -> np.ndarray:
    """Decode an 8- or 16-bit grayscale PNG to linear float in [0, 1]."""
    path = Path(path)
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError:
        raise LoadError(f"{path}: file not found")
    except Exception as exc:
        raise LoadError(f"{path}: {exc}")
    if img.mode == "L":
        max_value = 255.0
    elif img.mode in ("I", "I;16"):
        max_value = 65535.0
    else:
        raise LoadError(f"{path}: unsupported PNG mode {img.mode!r}; "
                        "expected 8- or 16-bit grayscale")
    return np.asarray(img, dtype=float) / max_value


def write_gray16_png(path, values):
    """Quantize [0, 1] float values to a 16-bit grayscale PNG."""
    values = np.asarray(values, dtype=float)
    quantized = np.round(np.clip(values, 0.0, 1.0) * 65535.0).astype(np.uint16)
    Image.fromarray(quantized).save(Path(path), format="PNG")


def write_mask_png(path, mask):
    data = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(Path(path), format="PNG")


def read_mask_png(path) -> np.ndarray:
    path = Path(path)
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError:
        raise LoadError(f"{path}: file not found")
    except Exception as exc:
        raise LoadError(f"{path}: {exc}")
    if img.mode != "L":
        raise LoadError(f"{path}: mask must be an 8-bit grayscale PNG")
    return np.asarray(img) > 0


# ---------------------------------------------------------------------------
# Manifests

@dataclass
class Manifest:
    """A capture: per-angle image paths plus optional truth and mask."""

    angles_deg: list
    images: list
    base_dir: Path
    truth_normals: str | None = None
    mask: str | None = None
    lighting: str = "synthetic"
    refractive_index: float = 1.5
    gamma_encoded: bool = False

    def resolve(self, name) -> Path:
        return self.base_dir / name


def _read_json(path) -> dict:
    path = Path(path)
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError:
        raise LoadError(f"{path}: file not found")
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path}: invalid JSON ({exc})")


def _check_schema(doc, path, known_keys):
    version = doc.get("schema_version", 1)
    if not isinstance(version, int) or version > SCHEMA_VERSION:
        raise LoadError(f"{path}: unsupported schema_version {version!r} "
                        f"(this build reads <= {SCHEMA_VERSION})")
    unknown = set(doc) - known_keys
    if unknown:
        warnings.warn(f"{path}: ignoring unknown keys {sorted(unknown)}")


def load_manifest(path) -> Manifest:
    path = Path(path)
    doc = _read_json(path)
    _check_schema(doc, path, MANIFEST_KEYS)
    angles = doc.get("angles")
    images = doc.get("images")
    if not angles or not images:
        raise LoadError(f"{path}: manifest needs 'angles' and 'images'")
    if len(angles) != len(images):
        raise LoadError(f"{path}: {len(images)} image paths for "
                        f"{len(angles)} angles")
    lighting = doc.get("lighting", "synthetic")
    if lighting not in LIGHTING_LABELS:
        raise LoadError(f"{path}: unknown lighting label {lighting!r}; "
                        f"expected one of {LIGHTING_LABELS}")
    return Manifest(angles_deg=list(angles), images=list(images),
                    base_dir=path.parent,
                    truth_normals=doc.get("truth_normals"),
                    mask=doc.get("mask"),
                    lighting=lighting,
                    refractive_index=float(doc.get("refractive_index", 1.5)),
                    gamma_encoded=bool(doc.get("gamma_encoded", False)))


def load_stack(manifest) -> PolarizationStack:
    """Decode the planes a manifest references into a polarization stack."""
    if not isinstance(manifest, Manifest):
        manifest = load_manifest(manifest)
    planes = []
    shape = None
    for name in manifest.images:
        plane = read_gray_png(manifest.resolve(name))
        if shape is None:
            shape = plane.shape
        elif plane.shape != shape:
            raise LoadError(f"{manifest.resolve(name)}: plane shape "
                            f"{plane.shape} does not match {shape}")
        planes.append(plane)
    images = np.stack(planes)
    if manifest.gamma_encoded:
        images = images ** GAMMA_EXPONENT
    if manifest.mask is not None:
        mask = read_mask_png(manifest.resolve(manifest.mask))
        if mask.shape != shape:
            raise LoadError(f"{manifest.resolve(manifest.mask)}: mask shape "
                            f"{mask.shape} does not match planes {shape}")
    else:
        mask = np.ones(shape, dtype=bool)
    return PolarizationStack(angles=np.deg2rad(manifest.angles_deg),
                             images=images, mask=mask)


def save_stack(stack: PolarizationStack, out_dir, lighting="synthetic",
               refractive_index=1.5) -> Path:
    """Write a stack as 16-bit PNG planes plus a manifest; returns its path.

    Intensities are clipped to [0, 1] for quantization; keep the scene's
    unpolarized intensity at or below 0.5 to stay in gamut.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if np.any(stack.images[:, stack.mask] > 1.0):
        warnings.warn(f"{out_dir}: intensities above 1.0 were clipped for PNG output")
    names = []
    for i in range(stack.angles.shape[0]):
        name = f"plane_{i:02d}.png"
        write_gray16_png(out_dir / name, stack.images[i])
        names.append(name)
    write_mask_png(out_dir / "mask.png", stack.mask)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "angles": [float(a) for a in np.rad2deg(stack.angles)],
        "images": names,
        "mask": "mask.png",
        "lighting": lighting,
        "refractive_index": refractive_index,
        "gamma_encoded": False,
    }
    manifest_path = out_dir / "manifest.json"
    write_json(manifest_path, doc)
    return manifest_path


def write_json(path, doc):
    """Deterministic JSON dump: sorted keys, fixed separators, trailing newline."""
    with open(Path(path), "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# Scene files

def load_scene(path):
    """Read a scene manifest; returns (SceneSpec, polarizer angles in radians).

    The dominance entry is either the string 'diffuse'/'specular' for a
    uniform label or a PNG path where nonzero marks specular pixels.
    Unpolarized intensity is a scalar or a grayscale PNG path.
    """
    path = Path(path)
    doc = _read_json(path)
    _check_schema(doc, path, SCENE_KEYS)
    for key in ("normals", "dominance", "unpolarized_intensity", "angles"):
        if key not in doc:
            raise LoadError(f"{path}: scene needs {key!r}")
    normals = load_normal_map(path.parent / doc["normals"])

    dominance = doc["dominance"]
    if dominance == "diffuse":
        dom = np.zeros(normals.mask.shape, dtype=bool)
    elif dominance == "specular":
        dom = np.ones(normals.mask.shape, dtype=bool)
    else:
        dom = read_mask_png(path.parent / dominance)
        if dom.shape != normals.mask.shape:
            raise LoadError(f"{path.parent / dominance}: dominance shape "
                            f"{dom.shape} does not match normals {normals.mask.shape}")

    intensity = doc["unpolarized_intensity"]
    if isinstance(intensity, str):
        intensity = read_gray_png(path.parent / intensity)
        if intensity.shape != normals.mask.shape:
            raise LoadError(f"{path}: intensity plane does not match normals")

    noise_doc = dict(doc.get("noise", {"kind": "none"}))
    try:
        noise = NoiseSpec(**noise_doc)
    except TypeError as exc:
        raise LoadError(f"{path}: bad noise spec ({exc})")

    scene = SceneSpec(normals=normals, dominance=dom,
                      unpolarized_intensity=intensity,
                      n=float(doc.get("refractive_index", 1.5)),
                      noise=noise)
    return scene, np.deg2rad(np.asarray(doc["angles"], dtype=float))
