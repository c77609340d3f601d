"""Training losses: event matching, caption generation, and their sum.

The matching loss aligns the connector output for the full video with the
output for the event window: rows are L2-normalized, the pairwise similarity
matrix is softmaxed per row at temperature tau, and the cross-entropy against
the identity target keeps only the diagonal terms. Identity as target forces
every output row to be distinguishable from every other row.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

DEFAULT_TAU = 0.07


def matching_loss(f_v: torch.Tensor, f_e: torch.Tensor, tau: float = DEFAULT_TAU) -> torch.Tensor:
    """Event matching loss between two (c, D2) connector outputs.

    L = -(1/c) * sum_i log softmax(f_v_n @ f_e_n.T / tau)[i, i]
    where f_v_n, f_e_n are the row-normalized inputs.
    """
    if f_v.shape != f_e.shape or f_v.ndim != 2:
        raise ValueError(f"shape mismatch: {tuple(f_v.shape)} vs {tuple(f_e.shape)}")
    if not (torch.isfinite(f_v).all() and torch.isfinite(f_e).all()):
        raise ValueError("matching loss inputs must be finite")
    if tau <= 0.0:
        raise ValueError(f"temperature must be positive, got {tau}")
    norms_v = f_v.norm(dim=-1, keepdim=True)
    norms_e = f_e.norm(dim=-1, keepdim=True)
    if (norms_v == 0).any() or (norms_e == 0).any():
        raise ValueError("matching loss inputs contain a zero row")
    logits = (f_v / norms_v) @ (f_e / norms_e).t() / tau  # (c, c)
    log_p = F.log_softmax(logits, dim=-1)
    return -log_p.diagonal().mean()


def generation_loss(
    logits: torch.Tensor, targets: torch.Tensor, loss_mask: torch.Tensor
) -> torch.Tensor:
    """Mean cross-entropy over the unmasked text positions.

    logits (T, V), targets (T,) token ids, loss_mask (T,) booleans. The mean
    (rather than the sum) keeps the generation term on the same scale as the
    matching term under the unweighted total.
    """
    if logits.ndim != 2 or targets.shape != logits.shape[:1]:
        raise ValueError(
            f"logits (T, V) and targets (T,) expected, got {tuple(logits.shape)} "
            f"and {tuple(targets.shape)}"
        )
    if loss_mask.shape != targets.shape:
        raise ValueError("loss_mask must match targets shape")
    if not bool(loss_mask.any()):
        raise ValueError("generation loss needs at least one unmasked position")
    idx = loss_mask.nonzero(as_tuple=True)[0]
    log_p = F.log_softmax(logits[idx], dim=-1)
    return -log_p.gather(1, targets[idx, None]).mean()


def total_loss(l_m: torch.Tensor, l_g: torch.Tensor) -> torch.Tensor:
    """Unweighted sum of the matching and generation losses."""
    l_m = torch.as_tensor(l_m)
    l_g = torch.as_tensor(l_g)
    if not (torch.isfinite(l_m) and torch.isfinite(l_g)):
        raise ValueError("total loss inputs must be finite")
    return l_m + l_g
