"""Seeded training loop: Adam, random square crops, plain-text and JSON
metrics logs, and a divergence guard."""

from pathlib import Path

import numpy as np
import torch

from . import formats
from .loss import cosine_loss


def train(model, dataset, epochs, lr, seed, batch=4, patch=None,
          log_dir=None):
    """Train in place; returns the per-epoch mean loss curve.

    ``dataset`` is a list of (input, truth) float32 arrays of shapes
    (13, H, W) and (3, H, W). Samples larger than ``patch`` are randomly
    cropped each time they are drawn (the augmentation); order, crops, and
    weight init noise are all derived from ``seed``, so two runs produce
    identical curves. A non-finite loss aborts with diagnostics rather
    than silently training on garbage.
    """
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    history = []
    lines = []
    step = 0
    for epoch in range(epochs):
        order = rng.permutation(len(dataset))
        losses = []
        for start in range(0, len(order), batch):
            xs, ys = [], []
            for idx in order[start:start + batch]:
                x, y = dataset[idx]
                if patch is not None and (x.shape[1] > patch
                                          or x.shape[2] > patch):
                    top = rng.integers(0, x.shape[1] - patch + 1)
                    left = rng.integers(0, x.shape[2] - patch + 1)
                    x = x[:, top:top + patch, left:left + patch]
                    y = y[:, top:top + patch, left:left + patch]
                xs.append(torch.from_numpy(np.ascontiguousarray(x)))
                ys.append(torch.from_numpy(np.ascontiguousarray(y)))
            est = model(torch.stack(xs))
            loss = cosine_loss(est, torch.stack(ys))
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"training diverged: loss={loss.item()} at step {step} "
                    f"(epoch {epoch}, lr={lr}); reduce the learning rate")
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(float(loss.detach()))
            step += 1
        history.append(float(np.mean(losses)))
        lines.append(f"{epoch} {history[-1]:.8f}")
    if log_dir is not None:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        (log_dir / "metrics.txt").write_text("\n".join(lines) + "\n")
        formats.write_json(log_dir / "metrics.json", {
            "epochs": epochs, "steps": step, "lr": lr, "seed": seed,
            "batch": batch, "final_loss": history[-1], "loss_curve": history,
        })
        torch.save(model.state_dict(), log_dir / "checkpoint.pt")
    return history
