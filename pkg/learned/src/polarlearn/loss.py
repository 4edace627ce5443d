"""Cosine similarity loss for unit-vector regression."""


def cosine_loss(est, truth):
    """Mean over batch and pixels of 1 - <est, truth>.

    Both tensors are (B, 3, H, W) with unit-norm vectors along dim 1; the
    loss lives in [0, 2] and vanishes exactly when orientations agree.
    """
    if est.shape != truth.shape:
        raise ValueError(f"shape mismatch: {tuple(est.shape)} vs "
                         f"{tuple(truth.shape)}")
    return (1.0 - (est * truth).sum(dim=1)).mean()
