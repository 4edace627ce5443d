"""Full-image inference through the patch plan written by the primary CLI."""

import numpy as np
import torch


def predict_full(model, x, plan):
    """Run the model per patch and fuse the predictions.

    ``x`` is the (13, H, W) input; ``plan`` is the dict from a plan JSON
    written by ``polarshape patchify`` (patch_size, origins, dims). Returns
    (normals, covered): an (H, W, 3) unit normal map and the bool plane of
    pixels receiving at least one vote. Fusion is the running vector mean
    of all covering patch predictions, renormalized.
    """
    p = int(plan["patch_size"])
    height, width = int(plan["height"]), int(plan["width"])
    if x.shape[1:] != (height, width):
        raise ValueError(f"input {x.shape[1:]} does not match plan "
                         f"({height}, {width})")
    count = np.zeros((height, width), dtype=int)
    fused = np.zeros((height, width, 3))
    model.eval()
    with torch.no_grad():
        for y0, x0 in plan["origins"]:
            crop = np.ascontiguousarray(x[:, y0:y0 + p, x0:x0 + p])
            out = model(torch.from_numpy(crop)[None])[0]
            vote = np.moveaxis(out.numpy(), 0, -1)
            region_c = count[y0:y0 + p, x0:x0 + p]
            region_n = fused[y0:y0 + p, x0:x0 + p]
            region_c += 1
            region_n += (vote - region_n) / region_c[..., None]
    covered = count > 0
    norms = np.linalg.norm(fused, axis=-1)
    safe = covered & (norms > 1e-8)
    fused[safe] /= norms[safe, None]
    fused[~safe] = [0.0, 0.0, 1.0]
    return fused, covered
