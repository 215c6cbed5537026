"""Ramsey-readout probability model and a deterministic shot simulator.

After the pulse train, the readout maps the accumulated phase theta onto a
two-outcome observable with

    p(n | theta) = 1/2 [1 + n sin(theta) coherence],   n = +/-1,

so a finite-shot experiment estimates the attenuated observable
``sin(theta) * coherence``.  Inversion back to field parameters lives in
:mod:`ddmag.estimation`, including the bounded-phase ambiguity; this module
only produces the forward statistics.

Shots are i.i.d., so the plus-count is drawn as binomials over fixed-size
logical blocks.  Each block seeds its own generator from (seed, block
index), which makes records bit-identical for identical inputs regardless
of how blocks might be distributed across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decoherence import NoiseModel, attenuation_w
from .fields import Gyromagnetic, MultiField
from .sequences import SequenceSpec, theta_closed

#: shots per independently seeded block
BLOCK_SHOTS = 1 << 20


@dataclass(frozen=True)
class MeasurementSettings:
    shots: int
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.shots, (int, np.integer)) and self.shots >= 1):
            raise ValueError(f"shots must be a positive integer, got {self.shots!r}")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class MeasurementRecord:
    """Shot counts plus the resulting attenuated-observable estimate."""

    sequence: SequenceSpec
    counts_plus: int
    counts_minus: int
    theta_tilde_hat: float
    std_error: float

    @property
    def shots(self) -> int:
        return self.counts_plus + self.counts_minus

    def to_dict(self) -> dict:
        return {
            "seq": self.sequence.to_dict(),
            "counts": [self.counts_plus, self.counts_minus],
            "theta_tilde": self.theta_tilde_hat,
            "stderr": self.std_error,
        }


def outcome_probability(theta: float, coherence: float, outcome: int) -> float:
    """p(outcome | theta) for outcome in {+1, -1}."""
    if outcome not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome}")
    if not 0.0 < coherence <= 1.0:
        raise ValueError(f"coherence must lie in (0, 1], got {coherence}")
    return 0.5 * (1.0 + outcome * math.sin(theta) * coherence)


def expectation_sigma_z(field: MultiField, seq: SequenceSpec, noise: NoiseModel,
                        gamma: Gyromagnetic) -> float:
    """Noiseless expected observable sin(theta) * coherence."""
    theta = theta_closed(seq, field, gamma)
    return math.sin(theta) * attenuation_w(seq, noise).coherence


def simulate_measurement(field: MultiField, seq: SequenceSpec, noise: NoiseModel,
                         gamma: Gyromagnetic,
                         settings: MeasurementSettings) -> MeasurementRecord:
    """Draw shot outcomes from the readout model; bit-identical per seed."""
    theta = theta_closed(seq, field, gamma)
    coherence = attenuation_w(seq, noise).coherence
    p_plus = 0.5 * (1.0 + math.sin(theta) * coherence)
    p_plus = min(max(p_plus, 0.0), 1.0)
    shots = settings.shots
    counts_plus = 0
    block = 0
    remaining = shots
    while remaining > 0:
        chunk = min(BLOCK_SHOTS, remaining)
        rng = np.random.default_rng([settings.seed, block])
        counts_plus += int(rng.binomial(chunk, p_plus))
        remaining -= chunk
        block += 1
    counts_minus = shots - counts_plus
    p_hat = counts_plus / shots
    return MeasurementRecord(
        sequence=seq,
        counts_plus=counts_plus,
        counts_minus=counts_minus,
        theta_tilde_hat=(counts_plus - counts_minus) / shots,
        std_error=2.0 * math.sqrt(p_hat * (1.0 - p_hat) / shots),
    )
