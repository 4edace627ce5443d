"""Shape-from-polarization toolkit.

Converts four-angle polarization image stacks into per-pixel degree of
polarization, phase, and the three ambiguous surface-normal prior maps via
the Fresnel diffuse/specular reflection models; includes a forward
polarimetric renderer, disambiguation baselines, patch-based inference
plumbing, and angular-error evaluation.
"""

from .core import (
    AMPLITUDE_CONFIDENCE_FLOOR,
    CANONICAL_ANGLES,
    DegenerateAngles,
    NormalMap,
    PolarizationStack,
    PriorNormals,
    SinusoidFit,
    angles_to_normal,
    azimuth_candidates,
    compute_priors,
    dop_from_fit,
    fit_sinusoid,
    normal_to_angles,
)
from .disambiguate import (
    CandidateSet,
    candidates_from_priors,
    convexity_disambiguate,
    oracle_disambiguate,
)
from .evaluate import PatchPlan, make_patch_plan, mean_angular_error, stitch
from .fresnel import (
    DEFAULT_REFRACTIVE_INDEX,
    diffuse_dop,
    invert_diffuse_dop,
    invert_specular_dop,
    specular_dop,
    specular_dop_peak,
)
from .simulate import NoiseSpec, SceneSpec, render_stack, synth_sphere

__version__ = "0.1.0"

__all__ = [
    "AMPLITUDE_CONFIDENCE_FLOOR",
    "CANONICAL_ANGLES",
    "CandidateSet",
    "DEFAULT_REFRACTIVE_INDEX",
    "DegenerateAngles",
    "NoiseSpec",
    "NormalMap",
    "PatchPlan",
    "PolarizationStack",
    "PriorNormals",
    "SceneSpec",
    "SinusoidFit",
    "angles_to_normal",
    "azimuth_candidates",
    "candidates_from_priors",
    "compute_priors",
    "convexity_disambiguate",
    "diffuse_dop",
    "dop_from_fit",
    "fit_sinusoid",
    "invert_diffuse_dop",
    "invert_specular_dop",
    "make_patch_plan",
    "mean_angular_error",
    "normal_to_angles",
    "oracle_disambiguate",
    "render_stack",
    "specular_dop",
    "specular_dop_peak",
    "stitch",
    "synth_sphere",
]
