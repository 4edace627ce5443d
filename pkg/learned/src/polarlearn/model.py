"""Encoder-decoder normal estimator with spatially-adaptive normalization.

The input is the 13-channel concatenation of the four polarization planes
and the three ambiguous prior normal maps. A stack of 1x1 convolutions
extracts per-pixel polarization features, five strided blocks encode, and
five decoder blocks with skip connections decode; each decoder block is
modulated by affine parameters learned from the resized polarization
planes, which re-injects image information that deep encoders tend to wash
out. The head output is renormalized to unit vectors.
"""

from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

POLARIZATION_CHANNELS = 4
PRIOR_CHANNELS = 9


@dataclass
class ModelConfig:
    in_channels: int = POLARIZATION_CHANNELS + PRIOR_CHANNELS
    encoder_levels: int = 5
    base_width: int = 16   # bottleneck = base_width * 2**(levels - 1)
    patch: int = 64
    batch: int = 4

    def __post_init__(self):
        if self.in_channels != POLARIZATION_CHANNELS + PRIOR_CHANNELS:
            raise ValueError(
                "input is 4 polarization planes + 3x3 prior normals = 13 channels")
        if self.patch % (1 << self.encoder_levels):
            raise ValueError(
                f"patch size {self.patch} must be divisible by "
                f"2^{self.encoder_levels}")
        if self.base_width < 1 or self.batch < 1 or self.encoder_levels < 1:
            raise ValueError("widths, batch, and levels must be positive")


def paper_scale_config() -> ModelConfig:
    """The full-size configuration: 512-channel bottleneck at 8x8 for 256 px
    patches. Provided for completeness; the toy default is what CI trains."""
    return ModelConfig(base_width=32, patch=256)


def standardize(x, eps=1e-5):
    """Parameter-free feature standardization over batch and spatial dims."""
    mu = x.mean(dim=(0, 2, 3), keepdim=True)
    var = x.var(dim=(0, 2, 3), keepdim=True, unbiased=False)
    return (x - mu) / torch.sqrt(var + eps)


class SpadeNorm(nn.Module):
    """Standardize features, then modulate with fields learned from the
    resized polarization planes: out = xhat * alpha + beta."""

    def __init__(self, channels, cond_channels=POLARIZATION_CHANNELS, hidden=32):
        super().__init__()
        self.trunk = nn.Conv2d(cond_channels, hidden, 3, padding=1)
        self.to_alpha = nn.Conv2d(hidden, channels, 3, padding=1)
        self.to_beta = nn.Conv2d(hidden, channels, 3, padding=1)

    def forward(self, x, cond):
        xhat = standardize(x)
        cond = F.interpolate(cond, size=x.shape[-2:], mode="nearest")
        h = F.relu(self.trunk(cond))
        return xhat * self.to_alpha(h) + self.to_beta(h)


class DecoderBlock(nn.Module):
    def __init__(self, in_channels, skip_channels, out_channels):
        super().__init__()
        self.conv = nn.Conv2d(in_channels + skip_channels, out_channels, 3,
                              padding=1)
        self.norm = SpadeNorm(out_channels)

    def forward(self, x, skip, cond):
        x = F.interpolate(x, scale_factor=2, mode="nearest")
        x = self.conv(torch.cat([x, skip], dim=1))
        return F.relu(self.norm(x, cond))


class NormalEstimator(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        widths = [cfg.base_width << i for i in range(cfg.encoder_levels)]
        self.lead = nn.Sequential(
            nn.Conv2d(cfg.in_channels, cfg.base_width, 1), nn.ReLU(),
            nn.Conv2d(cfg.base_width, cfg.base_width, 1), nn.ReLU())
        enc_in = [cfg.base_width] + widths[:-1]
        self.encoders = nn.ModuleList(
            nn.Conv2d(cin, cout, 3, stride=2, padding=1)
            for cin, cout in zip(enc_in, widths))
        skip_widths = list(reversed(enc_in))
        dec_in = list(reversed(widths))
        self.decoders = nn.ModuleList(
            DecoderBlock(cin, skip, skip)
            for cin, skip in zip(dec_in, skip_widths))
        self.head = nn.Conv2d(cfg.base_width, 3, 1)

    def encode(self, x):
        """Per-pixel feature stack plus the encoder pyramid; returns
        (skips shallowest-first, bottleneck)."""
        feats = self.lead(x)
        skips = [feats]
        for enc in self.encoders:
            feats = F.relu(enc(feats))
            skips.append(feats)
        return skips[:-1], skips[-1]

    def forward(self, x):
        cond = x[:, :POLARIZATION_CHANNELS]
        skips, feats = self.encode(x)
        for dec, skip in zip(self.decoders, reversed(skips)):
            feats = dec(feats, skip, cond)
        return F.normalize(self.head(feats), dim=1, eps=1e-8)


def build_model(cfg: ModelConfig, seed=None) -> NormalEstimator:
    """Construct the estimator; pass ``seed`` for reproducible init."""
    if seed is not None:
        torch.manual_seed(seed)
    return NormalEstimator(cfg)
