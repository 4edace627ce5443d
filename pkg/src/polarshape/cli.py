"""Command-line pipeline driver.

Every subcommand is deterministic given its inputs and --seed; failures
print a single-line error to stderr and exit 1 (usage problems exit 2).
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .core import compute_priors, dop_from_fit, fit_sinusoid
from .disambiguate import candidates_from_priors, convexity_disambiguate, oracle_disambiguate
from .evaluate import make_patch_plan, mean_angular_error
from .simulate import render_stack, synth_sphere


def _cmd_synth(args):
    sphere = synth_sphere(args.radius)
    io.save_normal_map(sphere, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_render(args):
    scene, angles = io.load_scene(args.scene)
    if args.seed is not None:
        scene = replace(scene, noise=replace(scene.noise, seed=args.seed))
    stack = render_stack(scene, angles)
    manifest = io.save_stack(stack, args.out, refractive_index=scene.n)
    print(f"wrote {manifest}")
    return 0


def _cmd_fit(args):
    stack = io.load_stack(args.manifest)
    fit = fit_sinusoid(stack)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_pfm(out / "mean.pfm", fit.mean)
    io.write_pfm(out / "amplitude.pfm", fit.amplitude)
    io.write_pfm(out / "phase.pfm", fit.phase)
    io.write_pfm(out / "rho.pfm", dop_from_fit(fit))
    io.write_mask_png(out / "low_confidence.png", fit.low_confidence)
    print(f"wrote {out}")
    return 0


def _cmd_priors(args):
    manifest = io.load_manifest(args.manifest)
    stack = io.load_stack(manifest)
    n = args.n if args.n is not None else manifest.refractive_index
    priors = compute_priors(stack, n=n)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.save_normal_map(priors.n_diff, out / "n_diff.pfm")
    io.save_normal_map(priors.n_spec1, out / "n_spec1.pfm")
    io.save_normal_map(priors.n_spec2, out / "n_spec2.pfm")
    print(f"wrote {out}")
    return 0


def _cmd_disambiguate(args):
    manifest = io.load_manifest(args.manifest)
    stack = io.load_stack(manifest)
    n = args.n if args.n is not None else manifest.refractive_index
    priors = compute_priors(stack, n=n)
    cands = candidates_from_priors(priors, args.model)
    if args.method == "oracle":
        truth_path = args.truth or (
            manifest.resolve(manifest.truth_normals)
            if manifest.truth_normals else None)
        if truth_path is None:
            raise ValueError("oracle disambiguation needs --truth or a "
                             "truth_normals entry in the manifest")
        truth = io.load_normal_map(truth_path)
        resolved = oracle_disambiguate(cands, truth)
    else:
        resolved = convexity_disambiguate(cands)
    io.save_normal_map(resolved, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_eval(args):
    est = io.load_normal_map(args.est)
    truth = io.load_normal_map(args.truth)
    if args.mask is not None:
        extra = io.read_mask_png(args.mask)
        est = type(est)(normals=est.normals, mask=est.mask & extra)
    mae = mean_angular_error(est, truth)
    both = est.mask & truth.mask
    report = {
        "mae_degrees": mae,
        "pixels_evaluated": int(np.count_nonzero(both)),
        "pixels_masked_out": int(both.size - np.count_nonzero(both)),
        "est": str(args.est),
        "truth": str(args.truth),
    }
    report_path = Path(args.report) if args.report else Path(
        str(args.est) + ".eval.json")
    io.write_json(report_path, report)
    print(f"{mae:.2f}")
    return 0


def _cmd_patchify(args):
    plan = make_patch_plan((args.height, args.width),
                           patch_size=args.patch, n_shifts=args.shifts)
    doc = {
        "patch_size": plan.patch_size,
        "height": plan.height,
        "width": plan.width,
        "offsets": [list(o) for o in plan.offsets],
        "origins": [list(o) for o in plan.origins()],
    }
    io.write_json(args.out, doc)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarshape",
        description="Shape-from-polarization pipeline tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write an analytic sphere normal map")
    p.add_argument("--radius", type=int, required=True, help="sphere radius in pixels")
    p.add_argument("--out", required=True, help="output PFM path")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("render", help="render a polarization stack from a scene file")
    p.add_argument("--scene", required=True, help="scene JSON path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the scene noise seed")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("fit", help="fit the polarizer sinusoid per pixel")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("priors", help="compute the three ambiguous normal maps")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n", type=float, default=None, help="refractive index override")
    p.set_defaults(func=_cmd_priors)

    p = sub.add_parser("disambiguate", help="resolve ambiguous normals")
    p.add_argument("--manifest", required=True)
    p.add_argument("--method", choices=("oracle", "convexity"), required=True)
    p.add_argument("--model", choices=("diffuse", "specular"), default="diffuse")
    p.add_argument("--truth", default=None, help="truth normals for the oracle")
    p.add_argument("--n", type=float, default=None, help="refractive index override")
    p.add_argument("--out", required=True, help="output PFM path")
    p.set_defaults(func=_cmd_disambiguate)

    p = sub.add_parser("eval", help="mean angular error between two normal maps")
    p.add_argument("--est", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--mask", default=None)
    p.add_argument("--report", default=None, help="JSON report path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("patchify", help="write a patch split/stitch plan")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--patch", type=int, default=256)
    p.add_argument("--shifts", type=int, default=32)
    p.add_argument("--out", required=True, help="plan JSON path")
    p.set_defaults(func=_cmd_patchify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        message = " ".join(str(exc).split())
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
