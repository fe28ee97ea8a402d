"""The preference-optimization objective and its gradient, computed over
supplied per-token log-probabilities (no model weights involved).

Per example, with sequence log-probs aggregated by token sum:
    dw = sum(policy_chosen) - sum(ref_chosen)
    dl = sum(policy_rejected) - sum(ref_rejected)
    z  = beta * (dw - dl)
    loss = -log sigmoid(z) = log(1 + exp(-z))
evaluated in the overflow-safe branch form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

DEFAULT_BETA = 0.1


@dataclass(frozen=True)
class SequenceLogProbs:
    policy_chosen: tuple[float, ...]
    ref_chosen: tuple[float, ...]
    policy_rejected: tuple[float, ...]
    ref_rejected: tuple[float, ...]

    def __post_init__(self):
        if len(self.policy_chosen) != len(self.ref_chosen):
            raise ValueError("policy/ref lengths differ for the chosen sequence")
        if len(self.policy_rejected) != len(self.ref_rejected):
            raise ValueError("policy/ref lengths differ for the rejected sequence")
        for name in ("policy_chosen", "ref_chosen", "policy_rejected", "ref_rejected"):
            for v in getattr(self, name):
                if not math.isfinite(v):
                    raise ValueError(f"non-finite log-probability in {name}: {v!r}")
                if v > 0:
                    raise ValueError(f"log-probability above 0 in {name}: {v!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "SequenceLogProbs":
        return cls(
            policy_chosen=tuple(d["policy_chosen"]),
            ref_chosen=tuple(d["ref_chosen"]),
            policy_rejected=tuple(d["policy_rejected"]),
            ref_rejected=tuple(d["ref_rejected"]),
        )


@dataclass(frozen=True)
class DpoConfig:
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be > 0")


def _softplus(x: float) -> float:
    """log(1 + exp(x)) without overflow."""
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def example_margin(example: SequenceLogProbs, cfg: DpoConfig) -> float:
    dw = sum(example.policy_chosen) - sum(example.ref_chosen)
    dl = sum(example.policy_rejected) - sum(example.ref_rejected)
    return cfg.beta * (dw - dl)


def dpo_loss(batch: list[SequenceLogProbs], cfg: DpoConfig | None = None) -> dict:
    """Mean and per-example -log sigmoid(z) over the batch."""
    cfg = cfg or DpoConfig()
    if not batch:
        raise ValueError("batch must be non-empty")
    per_example = [_softplus(-example_margin(ex, cfg)) for ex in batch]
    return {"mean_loss": sum(per_example) / len(per_example), "per_example": per_example}


def dpo_grad(example: SequenceLogProbs, cfg: DpoConfig | None = None) -> dict:
    """Gradients of the loss w.r.t. each policy token log-prob.

    Every chosen token gets -beta * sigmoid(-z) and every rejected token
    +beta * sigmoid(-z); reference entries have zero gradient.
    """
    cfg = cfg or DpoConfig()
    z = example_margin(example, cfg)
    coeff = cfg.beta * _sigmoid(-z)
    return {
        "policy_chosen": [-coeff] * len(example.policy_chosen),
        "policy_rejected": [coeff] * len(example.policy_rejected),
        "ref_chosen": [0.0] * len(example.ref_chosen),
        "ref_rejected": [0.0] * len(example.ref_rejected),
    }
