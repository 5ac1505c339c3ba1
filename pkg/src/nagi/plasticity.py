"""Spike-timing-dependent plasticity with per-neuron incoming-weight caps.

Four rule shapes are supported. Asymmetric rules use exponential windows on
either side of ``dt = t_post - t_pre``; symmetric rules use a difference of
Gaussians (Mexican hat). The anti-Hebbian variants are exact negations.

Updates are event driven with nearest-neighbour pairing: only the most recent
spike of the partner neuron is considered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from nagi.config import PlasticityConfig
    from nagi.neuron import NetworkPhenotype


class RuleKind(str, Enum):
    ASYMMETRIC_HEBBIAN = "asymmetric_hebbian"
    SYMMETRIC_HEBBIAN = "symmetric_hebbian"
    ASYMMETRIC_ANTI_HEBBIAN = "asymmetric_anti_hebbian"
    SYMMETRIC_ANTI_HEBBIAN = "symmetric_anti_hebbian"

    @property
    def symmetric(self) -> bool:
        return self in (RuleKind.SYMMETRIC_HEBBIAN, RuleKind.SYMMETRIC_ANTI_HEBBIAN)

    @property
    def anti(self) -> bool:
        return self in (RuleKind.ASYMMETRIC_ANTI_HEBBIAN, RuleKind.SYMMETRIC_ANTI_HEBBIAN)


RULE_KINDS: tuple[RuleKind, ...] = tuple(RuleKind)


@dataclass(frozen=True)
class PlasticityRule:
    kind: RuleKind
    a_plus: float
    a_minus: float
    tau_plus: float = 20.0
    tau_minus: float = 20.0
    sigma_plus: float = 10.0
    sigma_minus: float = 20.0

    @classmethod
    def from_gene(cls, kind: RuleKind, a_plus: float, a_minus: float, cfg: PlasticityConfig) -> "PlasticityRule":
        return cls(RuleKind(kind), a_plus, a_minus, cfg.tau_plus, cfg.tau_minus, cfg.sigma_plus, cfg.sigma_minus)


def stdp_delta(rule: PlasticityRule, delta_t: float) -> float:
    """Weight-magnitude change for a spike pair separated by ``delta_t = t_post - t_pre`` ms."""
    if rule.kind.symmetric:
        sq = delta_t * delta_t
        dw = rule.a_plus * math.exp(-sq / (2.0 * rule.sigma_plus ** 2)) - rule.a_minus * math.exp(
            -sq / (2.0 * rule.sigma_minus ** 2)
        )
    elif delta_t > 0:
        dw = rule.a_plus * math.exp(-delta_t / rule.tau_plus)
    elif delta_t < 0:
        dw = -rule.a_minus * math.exp(delta_t / rule.tau_minus)
    else:
        dw = 0.0
    return -dw if rule.kind.anti else dw


def normalize_weights(magnitudes: Sequence[float], cap: float) -> list[float]:
    """Scale ``magnitudes`` down proportionally so their sum does not exceed ``cap``."""
    total = math.fsum(magnitudes)
    if total <= cap:
        return list(magnitudes)
    scale = cap / total
    return [m * scale for m in magnitudes]


def normalize_incoming(net: NetworkPhenotype, neuron: int, cap: float | None = None) -> None:
    """Rescale the incoming synapse magnitudes of ``neuron`` in place if over the cap."""
    if cap is None:
        cap = net.w_cap
    mag = net.magnitude
    incoming = net.incoming[neuron]
    total = math.fsum(mag[s] for s in incoming)
    if total > cap:
        scale = cap / total
        for s in incoming:
            mag[s] *= scale
    if net.observer is not None:
        net.observer(net, neuron)


def on_post_spike(net: NetworkPhenotype, neuron: int, now: int) -> None:
    """Causal branch: neuron ``neuron`` spiked at step ``now``; update its afferents."""
    rule = net.rules[neuron]
    mag, pre, last = net.magnitude, net.pre, net.last_spike
    w_max = net.w_max
    touched = False
    for s in net.incoming[neuron]:
        t_pre = last[pre[s]]
        if t_pre is None:
            continue
        w = mag[s] + stdp_delta(rule, now - t_pre)
        mag[s] = 0.0 if w < 0.0 else (w_max if w > w_max else w)
        touched = True
    if touched:
        normalize_incoming(net, neuron)


def on_pre_spike(net: NetworkPhenotype, synapse: int, now: int) -> None:
    """Anti-causal branch: the presynaptic node of ``synapse`` spiked at step ``now``.

    Pairs already handled by :func:`on_post_spike` in the same step
    (postsynaptic spike at ``now``) are skipped so no pair is counted twice.
    """
    post = net.post[synapse]
    t_post = net.last_spike[net.n_inputs + post]
    if t_post is None or t_post >= now:
        return
    w = net.magnitude[synapse] + stdp_delta(net.rules[post], t_post - now)
    w_max = net.w_max
    net.magnitude[synapse] = 0.0 if w < 0.0 else (w_max if w > w_max else w)
    normalize_incoming(net, post)
