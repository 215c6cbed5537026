"""AC magnetic-field model and the exact phase integral.

Everything internal runs in one unit system: seconds, hertz, nanotesla,
radians.  The qubit coupling defaults to 28 Hz/nT, so the recurring ratio
``gamma * b / f`` is dimensionless.

The field is a sum of sinusoids ``b_m sin(2 pi f_m t + phi_m)``.  A freely
precessing two-level probe accumulates relative phase at rate
``2 pi gamma B(t)``, so the phase picked up between ``t1`` and ``t2`` is

    Phi[t2, t1] = -sum_m (gamma b_m / f_m)
                  [cos(2 pi f_m t2 + phi_m) - cos(2 pi f_m t1 + phi_m)],

the primitive every pulse-sequence calculation is built from.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

#: pairwise-distinct frequency tolerance; coincident frequencies make the
#: multi-component inversion matrix singular, so reject them at construction
FREQ_DISTINCT_RTOL = 1e-9


def canonical_phase(phi: float) -> float:
    """Reduce an angle to the interval (-pi, pi]."""
    c = math.remainder(phi, TWO_PI)
    if c <= -math.pi:
        c += TWO_PI
    return c


@dataclass(frozen=True)
class Gyromagnetic:
    """Probe coupling to the field, in hertz per nanotesla."""

    hz_per_nt: float = 28.0

    def __post_init__(self):
        if not self.hz_per_nt > 0:
            raise ValueError(f"gyromagnetic coupling must be > 0, got {self.hz_per_nt}")


@dataclass(frozen=True)
class FieldComponent:
    """One sinusoidal field component: amplitude [nT], frequency [Hz], phase [rad].

    The phase is stored as given; ``canonical_phase_rad`` reports it in
    (-pi, pi].
    """

    amplitude_nt: float
    frequency_hz: float
    phase_rad: float = 0.0

    def __post_init__(self):
        if not self.frequency_hz > 0:
            raise ValueError(f"frequency must be > 0, got {self.frequency_hz}")
        if not self.amplitude_nt >= 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude_nt}")
        if not math.isfinite(self.phase_rad):
            raise ValueError("phase must be finite")

    @property
    def canonical_phase_rad(self) -> float:
        return canonical_phase(self.phase_rad)


@dataclass(frozen=True)
class MultiField:
    """Ordered collection of sinusoidal components with distinct frequencies."""

    components: tuple[FieldComponent, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) < 1:
            raise ValueError("field needs at least one component")
        freqs = [c.frequency_hz for c in comps]
        for i in range(len(freqs)):
            for j in range(i + 1, len(freqs)):
                if abs(freqs[i] - freqs[j]) <= FREQ_DISTINCT_RTOL * max(freqs[i], freqs[j]):
                    raise ValueError(
                        f"component frequencies must be pairwise distinct: "
                        f"{freqs[i]} Hz vs {freqs[j]} Hz"
                    )

    @classmethod
    def single(cls, amplitude_nt: float, frequency_hz: float, phase_rad: float = 0.0) -> "MultiField":
        return cls((FieldComponent(amplitude_nt, frequency_hz, phase_rad),))

    def __len__(self) -> int:
        return len(self.components)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([c.amplitude_nt for c in self.components])

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([c.frequency_hz for c in self.components])

    @property
    def phases(self) -> np.ndarray:
        return np.array([c.phase_rad for c in self.components])

    def to_dict(self, gamma: Gyromagnetic | None = None) -> dict:
        d = {
            "components": [
                {"b_nT": c.amplitude_nt, "f_Hz": c.frequency_hz, "phi_rad": c.phase_rad}
                for c in self.components
            ]
        }
        if gamma is not None:
            d["gamma_Hz_per_nT"] = gamma.hz_per_nt
        return d

    @classmethod
    def from_dict(cls, d: dict) -> tuple["MultiField", Gyromagnetic]:
        """Parse the serialised form, rejecting unknown keys."""
        if not isinstance(d, dict):
            raise ValueError(f"field: expected object, got {type(d).__name__}")
        unknown = set(d) - {"components", "gamma_Hz_per_nT"}
        if unknown:
            raise ValueError(f"field: unknown keys {sorted(unknown)}")
        if "components" not in d:
            raise ValueError("field: missing 'components'")
        comps = []
        for i, cd in enumerate(d["components"]):
            if not isinstance(cd, dict):
                raise ValueError(f"field.components[{i}]: expected object")
            bad = set(cd) - {"b_nT", "f_Hz", "phi_rad"}
            if bad:
                raise ValueError(f"field.components[{i}]: unknown keys {sorted(bad)}")
            try:
                comps.append(
                    FieldComponent(
                        amplitude_nt=float(cd["b_nT"]),
                        frequency_hz=float(cd["f_Hz"]),
                        phase_rad=float(cd.get("phi_rad", 0.0)),
                    )
                )
            except KeyError as exc:
                raise ValueError(f"field.components[{i}]: missing {exc}") from None
        gamma = Gyromagnetic(float(d.get("gamma_Hz_per_nT", 28.0)))
        return cls(tuple(comps)), gamma

    def to_json(self, gamma: Gyromagnetic | None = None) -> str:
        return json.dumps(self.to_dict(gamma))

    @classmethod
    def from_json(cls, s: str) -> tuple["MultiField", Gyromagnetic]:
        return cls.from_dict(json.loads(s))


def evaluate_field(field: MultiField, t):
    """Field value in nT at time(s) ``t`` [s]."""
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("t must be finite")
    out = np.zeros_like(t)
    for c in field.components:
        out = out + c.amplitude_nt * np.sin(TWO_PI * c.frequency_hz * t + c.phase_rad)
    return out if out.ndim else float(out)


def phase_integral(field: MultiField, gamma: Gyromagnetic, t1: float, t2: float) -> float:
    """Accumulated free-precession phase Phi[t2, t1] in radians.

    Closed form of the integral of ``2 pi gamma B(t)`` over [t1, t2];
    requires ``t1 <= t2``.
    """
    if t1 > t2:
        raise ValueError(f"need t1 <= t2, got t1={t1} > t2={t2}")
    total = 0.0
    for c in field.components:
        coef = gamma.hz_per_nt * c.amplitude_nt / c.frequency_hz
        total -= coef * (
            math.cos(TWO_PI * c.frequency_hz * t2 + c.phase_rad)
            - math.cos(TWO_PI * c.frequency_hz * t1 + c.phase_rad)
        )
    return total
