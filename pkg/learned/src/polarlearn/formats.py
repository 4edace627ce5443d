"""Readers and writers for the file formats the polarshape CLI speaks.

The contract between this package and the primary toolkit is the files, not
a linked API: PFM float maps, 8/16-bit grayscale PNG planes, and JSON
manifests / patch plans. These codecs are deliberately self-contained.
"""

import json
from pathlib import Path

import numpy as np
from PIL import Image


def write_pfm(path, data):
    """Write (H, W) or (H, W, 3) float32 PFM, little-endian, bottom-up rows."""
    data = np.asarray(data, dtype=np.float32)
    if data.ndim == 2:
        magic = b"Pf"
    elif data.ndim == 3 and data.shape[2] == 3:
        magic = b"PF"
    else:
        raise ValueError(f"PFM data must be (H, W) or (H, W, 3), got {data.shape}")
    height, width = data.shape[:2]
    with open(Path(path), "wb") as f:
        f.write(magic + b"\n")
        f.write(f"{width} {height}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(np.flipud(data).astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic not in (b"PF", b"Pf"):
            raise ValueError(f"{path}: not a PFM file")
        width, height = (int(v) for v in f.readline().split())
        scale = float(f.readline())
        channels = 3 if magic == b"PF" else 1
        endian = "<" if scale < 0 else ">"
        raw = f.read(width * height * channels * 4)
    data = np.frombuffer(raw, dtype=f"{endian}f4").astype(np.float32)
    data = data.reshape((height, width) if channels == 1 else (height, width, 3))
    return np.flipud(data).copy()


def read_gray_png(path) -> np.ndarray:
    """Grayscale PNG to linear float in [0, 1] (8- or 16-bit)."""
    img = Image.open(Path(path))
    img.load()
    if img.mode == "L":
        max_value = 255.0
    elif img.mode in ("I", "I;16"):
        max_value = 65535.0
    else:
        raise ValueError(f"{path}: unsupported PNG mode {img.mode!r}")
    return np.asarray(img, dtype=np.float32) / max_value


def write_gray16_png(path, values):
    quantized = np.round(np.clip(values, 0.0, 1.0) * 65535.0).astype(np.uint16)
    Image.fromarray(quantized).save(Path(path), format="PNG")


def read_json(path) -> dict:
    with open(Path(path)) as f:
        return json.load(f)


def write_json(path, doc):
    with open(Path(path), "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
