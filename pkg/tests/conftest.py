import math
from pathlib import Path

import numpy as np
import pytest

from ddmag import FieldComponent, Gyromagnetic, MultiField

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

PI = math.pi


@pytest.fixture(scope="session")
def gamma():
    return Gyromagnetic()


@pytest.fixture(scope="session")
def mono_field():
    """The monochromatic example field: 100 nT at 0.75 MHz, phase pi/3."""
    return MultiField.single(100.0, 0.75e6, PI / 3)


@pytest.fixture(scope="session")
def bichromatic_field():
    """The bichromatic example field from the combined-curve scenario."""
    return MultiField(
        (
            FieldComponent(125.0, 1.0e6, PI / 3),
            FieldComponent(150.0, 1.75e6, PI / 5),
        )
    )


def scenario_path(name: str) -> str:
    return str(SCENARIO_DIR / name)


def random_field(rng: np.random.Generator, max_components: int = 3,
                 pole_margin: float = 0.0) -> MultiField:
    """Random multi-component field; optional guard keeps frequency ratios
    away from odd integers (where resonant cross terms blow up)."""
    while True:
        m = int(rng.integers(1, max_components + 1))
        freqs = 10 ** rng.uniform(5.3, 6.5, size=m)
        if any(
            abs(freqs[i] - freqs[j]) < 1e-6 * max(freqs[i], freqs[j])
            for i in range(m) for j in range(i + 1, m)
        ):
            continue
        if pole_margin > 0.0 and any(
            abs(freqs[i] / freqs[j] - round(freqs[i] / freqs[j])) < pole_margin
            and round(freqs[i] / freqs[j]) % 2 == 1
            for i in range(m) for j in range(m) if i != j
        ):
            continue
        comps = tuple(
            FieldComponent(
                amplitude_nt=float(rng.uniform(10.0, 300.0)),
                frequency_hz=float(f),
                phase_rad=float(rng.uniform(-PI, PI)),
            )
            for f in freqs
        )
        return MultiField(comps)
