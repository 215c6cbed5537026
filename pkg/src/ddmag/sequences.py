"""Pulse-train timing, the alternating sign function, and the accumulated phase.

Two pulse families are supported, both built from N pi-pulses in N/2 cycles
over total time T = N * tau:

* PDD  -- pulses at tau, 2 tau, ..., N tau; N equal segments whose sign
  alternates starting at +1 (the final pulse sits at T and flips nothing
  observable, but is part of the cycle definition),
* CPMG -- pulses at tau/2, 3 tau/2, ..., (N - 1/2) tau; N+1 segments with
  half-length segments at both ends.

For a field component with ``x = f * tau``, the closed-form accumulated
phase per component is

    PDD:   (gamma b / f) tan(pi x) [sin(phi) - sin(2 pi N x + phi)],
    CPMG:  (gamma b / f) [sec(pi x) - 1] [cos(2 pi N x + phi) - cos(phi)].

Both expressions have removable singularities at every half-odd-integer
``x`` (the resonances).  Instead of evaluating them naively, every
evaluation here reduces ``x = h + u`` with ``h`` the nearest half-odd
integer and |u| <= 1/2, which for even N turns the products into

    PDD:   2 [sin(pi N u)/sin(pi u)] cos(pi u) cos(pi N u + phi),
    CPMG:  2 sin(pi N u + phi) [sigma sin(pi N u)/sin(pi u) + sin(pi N u)],

with ``sigma = (-1)^floor(x)``.  These are exact identities, finite and
numerically stable arbitrarily close to resonance, and they double as exact
argument reduction for large N.  Only the literal float ``u == 0`` needs a
branch, where the ratio is N and its derivative 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .fields import Gyromagnetic, MultiField

TWO_PI = 2.0 * math.pi

#: reject tan/sec poles closer than this in |f*tau - half-odd-integer|
POLE_GUARD = 1e-9


class SequenceKind(str, Enum):
    PDD = "PDD"
    CPMG = "CPMG"


def _coerce_kind(kind) -> SequenceKind:
    if isinstance(kind, SequenceKind):
        return kind
    return SequenceKind(str(kind).upper())


@dataclass(frozen=True)
class SequenceSpec:
    """Pulse family, even pulse count N >= 2, and pulse interval tau [s]."""

    kind: SequenceKind
    num_pulses: int
    tau_s: float

    def __post_init__(self):
        object.__setattr__(self, "kind", _coerce_kind(self.kind))
        n = self.num_pulses
        if not (isinstance(n, (int, np.integer)) and n >= 2 and n % 2 == 0):
            raise ValueError(f"num_pulses must be an even integer >= 2, got {n!r}")
        object.__setattr__(self, "num_pulses", int(n))
        if not (self.tau_s > 0 and math.isfinite(self.tau_s)):
            raise ValueError(f"tau_s must be positive and finite, got {self.tau_s}")

    @property
    def total_time_s(self) -> float:
        return self.num_pulses * self.tau_s

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "N": self.num_pulses, "tau_s": self.tau_s}

    @classmethod
    def from_dict(cls, d: dict) -> "SequenceSpec":
        unknown = set(d) - {"kind", "N", "tau_s"}
        if unknown:
            raise ValueError(f"sequence: unknown keys {sorted(unknown)}")
        try:
            return cls(_coerce_kind(d["kind"]), int(d["N"]), float(d["tau_s"]))
        except KeyError as exc:
            raise ValueError(f"sequence: missing {exc}") from None


@dataclass(frozen=True)
class SignFunction:
    """Explicit piecewise-constant xi(t): segment boundaries, signs, pulse times."""

    boundaries_s: np.ndarray
    signs: np.ndarray
    pulse_times_s: np.ndarray


def sign_function(seq: SequenceSpec) -> SignFunction:
    """Segment representation of xi(t) for the pulse train."""
    n, tau = seq.num_pulses, seq.tau_s
    if seq.kind is SequenceKind.PDD:
        boundaries = np.arange(n + 1) * tau
        signs = (-1.0) ** np.arange(n)
        pulses = np.arange(1, n + 1) * tau
    else:
        boundaries = np.concatenate([[0.0], (np.arange(n) + 0.5) * tau, [n * tau]])
        signs = (-1.0) ** np.arange(n + 1)
        pulses = (np.arange(n) + 0.5) * tau
    return SignFunction(boundaries, signs, pulses)


def theta_oracle(seq: SequenceSpec, field: MultiField, gamma: Gyromagnetic) -> float:
    """Brute-force accumulated phase: sum of sign_k * Phi[t_{k+1}, t_k].

    Ground truth for the closed forms; never shares code with them.
    """
    sf = sign_function(seq)
    return _kernels.segment_theta(
        sf.boundaries_s, sf.signs,
        field.amplitudes, field.frequencies, field.phases,
        gamma.hz_per_nt,
    )


# ---------------------------------------------------------------------------
# reduced closed-form evaluation
# ---------------------------------------------------------------------------

def _reduce(x):
    """Split f*tau into nearest half-odd integer + remainder u, |u| <= 1/2."""
    x = np.asarray(x, dtype=float)
    j = np.floor(x)
    u = x - (j + 0.5)
    sigma = 1.0 - 2.0 * (np.asarray(j, dtype=np.int64) % 2)
    return u, sigma


def _dirichlet_ratio(u, n: int):
    """sin(pi N u) / sin(pi u), with its limit N at u == 0."""
    s_small = np.sin(np.pi * u)
    s_big = np.sin(np.pi * n * u)
    safe = np.where(s_small == 0.0, 1.0, s_small)
    return np.where(u == 0.0, float(n), s_big / safe), s_small, s_big


def _response(kind: SequenceKind, n: int, x, phi):
    """Dimensionless per-component response P; theta = (gamma b / f) * P."""
    u, sigma = _reduce(x)
    ratio, _, s_big = _dirichlet_ratio(u, n)
    pnu = np.pi * n * u
    if kind is SequenceKind.PDD:
        return 2.0 * ratio * np.cos(np.pi * u) * np.cos(pnu + phi)
    return 2.0 * np.sin(pnu + phi) * (sigma * ratio + s_big)


def _response_with_grad(kind: SequenceKind, n: int, x, phi):
    """P plus its partials dP/dphi and dP/du (u the reduced detuning)."""
    u, sigma = _reduce(x)
    ratio, s_small, s_big = _dirichlet_ratio(u, n)
    pu = np.pi * u
    pnu = np.pi * n * u
    cu = np.cos(pu)
    cnu = np.cos(pnu)
    safe = np.where(s_small == 0.0, 1.0, s_small)
    # d/du of the Dirichlet ratio; even in u, so 0 at u == 0
    dratio = np.where(
        u == 0.0,
        0.0,
        (np.pi * n * cnu * s_small - np.pi * cu * s_big) / safe**2,
    )
    if kind is SequenceKind.PDD:
        c_shift = np.cos(pnu + phi)
        s_shift = np.sin(pnu + phi)
        p = 2.0 * ratio * cu * c_shift
        dp_dphi = -2.0 * ratio * cu * s_shift
        dp_du = (
            2.0 * dratio * cu * c_shift
            - TWO_PI * ratio * s_small * c_shift
            - TWO_PI * n * ratio * cu * s_shift
        )
    else:
        c_shift = np.cos(pnu + phi)
        s_shift = np.sin(pnu + phi)
        core = sigma * ratio + s_big
        p = 2.0 * s_shift * core
        dp_dphi = 2.0 * c_shift * core
        dp_du = (
            TWO_PI * n * c_shift * core
            + 2.0 * s_shift * (sigma * dratio + np.pi * n * cnu)
        )
    return p, dp_dphi, dp_du


def theta_closed(seq: SequenceSpec, field: MultiField, gamma: Gyromagnetic) -> float:
    """Closed-form accumulated phase, exact at and near every resonance."""
    total = 0.0
    for c in field.components:
        p = _response(seq.kind, seq.num_pulses, c.frequency_hz * seq.tau_s, c.phase_rad)
        total += gamma.hz_per_nt * c.amplitude_nt / c.frequency_hz * float(p)
    return total


def theta_closed_grid(kind, num_pulses: int, tau_grid, field: MultiField,
                      gamma: Gyromagnetic) -> np.ndarray:
    """Vectorised ``theta_closed`` over an array of pulse intervals."""
    kind = _coerce_kind(kind)
    tau_grid = np.asarray(tau_grid, dtype=float)
    total = np.zeros_like(tau_grid)
    for c in field.components:
        p = _response(kind, num_pulses, c.frequency_hz * tau_grid, c.phase_rad)
        total += gamma.hz_per_nt * c.amplitude_nt / c.frequency_hz * p
    return total


def theta_with_derivatives(seq: SequenceSpec, field: MultiField, gamma: Gyromagnetic):
    """theta plus per-component partials.

    Returns ``(theta, d_db, d_dphi, d_df)`` with one entry per component.
    The frequency derivative treats tau as fixed.
    """
    m = len(field)
    d_db = np.empty(m)
    d_dphi = np.empty(m)
    d_df = np.empty(m)
    theta = 0.0
    for i, c in enumerate(field.components):
        b, f, phi = c.amplitude_nt, c.frequency_hz, c.phase_rad
        g = gamma.hz_per_nt
        p, dp_dphi, dp_du = _response_with_grad(
            seq.kind, seq.num_pulses, f * seq.tau_s, phi
        )
        p, dp_dphi, dp_du = float(p), float(dp_dphi), float(dp_du)
        theta += g * b / f * p
        d_db[i] = g / f * p
        d_dphi[i] = g * b / f * dp_dphi
        # u = f*tau - h  =>  du/df = tau at fixed tau
        d_df[i] = -g * b / f**2 * p + g * b / f * seq.tau_s * dp_du
    return theta, d_db, d_dphi, d_df


def theta_resonant(kind, field: MultiField, gamma: Gyromagnetic, num_pulses: int,
                   component_index: int) -> float:
    """Accumulated phase at pulse interval exactly 1/(2 f_l).

    The component ``l`` hits its resonance (reduced detuning exactly zero);
    every other component enters through its detuned cross term.  Rejected
    when some other frequency ratio ``f_m / f_l`` sits on an odd integer,
    where the cross term itself is singular.
    """
    kind = _coerce_kind(kind)
    m = len(field)
    if not 0 <= component_index < m:
        raise ValueError(f"component_index out of range: {component_index}")
    f_l = field.components[component_index].frequency_hz
    total = 0.0
    for i, c in enumerate(field.components):
        x = 0.5 if i == component_index else c.frequency_hz / (2.0 * f_l)
        if i != component_index:
            u, _ = _reduce(x)
            if abs(float(u)) < POLE_GUARD:
                raise ValueError(
                    f"cross term singular: f[{i}]/f[{component_index}] = "
                    f"{c.frequency_hz / f_l:.9g} is an odd integer"
                )
        p = _response(kind, num_pulses, x, c.phase_rad)
        total += gamma.hz_per_nt * c.amplitude_nt / c.frequency_hz * float(p)
    return total


def alternating_cosine_sums(num_pulses: int, f_tau: float, phi: float) -> tuple[float, float]:
    """Closed forms of the two alternating cosine sums behind the phase formulas.

    For even N:

    * ``sum_{k=1}^{N-1} (-1)^k cos(2 pi k x + phi)``
      = -1/2 sec(pi x) [cos(pi x + phi) + cos(2 pi N x - pi x + phi)]
    * ``sum_{k=0}^{N-1} (-1)^k cos((2k+1) pi x + phi)``
      = 1/2 sec(pi x) [cos(phi) - cos(2 pi N x + phi)]

    Rejected at the sec poles (x on a half-odd integer).
    """
    n = int(num_pulses)
    if n < 2 or n % 2:
        raise ValueError(f"num_pulses must be an even integer >= 2, got {num_pulses}")
    u, _ = _reduce(f_tau)
    if abs(float(u)) < POLE_GUARD:
        raise ValueError(f"sec singularity: f*tau = {f_tau} is a half-odd integer")
    sec = 1.0 / math.cos(math.pi * f_tau)
    # reduce N*x mod 1 before scaling by 2 pi; exact when f_tau is exact
    nx = math.fmod(n * f_tau, 1.0)
    first = -0.5 * sec * (
        math.cos(math.pi * f_tau + phi) + math.cos(TWO_PI * nx - math.pi * f_tau + phi)
    )
    second = 0.5 * sec * (math.cos(phi) - math.cos(TWO_PI * nx + phi))
    return first, second
