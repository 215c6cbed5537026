"""Fisher-information matrices and Cramer-Rao bounds for field parameters.

For the two-outcome readout the per-shot Fisher matrix of one pulse train
reduces to the outer product of the accumulated-phase gradient, suppressed
by the squared coherence:

    I_mn = (d theta / d y_m)(d theta / d y_n) exp(-2 lambda^2 W),

and matrices from independent trains add.  That weak-signal form is the
default; the exact Bernoulli matrix

    I_mn = (d tt / d y_m)(d tt / d y_n) / (1 - tt^2),
    tt   = sin(theta) exp(-lambda^2 W),

is available as an opt-in diagnostic (``exact=True``).  The quantum version
(optimum over all measurements of the pure dephasing-free state) is built
explicitly from symmetric logarithmic derivatives and coincides with the
classical matrix at zero coupling.

Gradients come from the analytic derivatives of the closed-form phase at
the actual pulse interval.  The resonant-limit matrix entries quoted for
``tau -> 1/(2f)`` are provided only as reference formulas for tests
(:func:`resonant_fisher_reference`); the production path never special-cases
them.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .decoherence import NoiseModel, attenuation_w
from .fields import Gyromagnetic, MultiField
from .sequences import SequenceSpec, _coerce_kind, SequenceKind, theta_with_derivatives

_LABEL_RE = re.compile(r"^(b|phi|f)(\d*)$")

#: joint bounds are refused above this condition number
CONDITION_LIMIT = 1e12


def parse_selector(labels: Sequence[str], n_components: int) -> tuple[tuple[str, int], ...]:
    """Parse parameter labels like ``b1, phi2, f1`` into (kind, index) pairs.

    A bare ``b``/``phi``/``f`` refers to component 1.  Labels must be
    distinct and indices must address existing components (1-based).
    """
    if not labels:
        raise ValueError("selector must contain at least one parameter label")
    parsed = []
    for lab in labels:
        m = _LABEL_RE.match(lab.strip())
        if not m:
            raise ValueError(f"bad parameter label {lab!r} (want b1, phi1, f1, ...)")
        idx = int(m.group(2)) if m.group(2) else 1
        if not 1 <= idx <= n_components:
            raise ValueError(f"label {lab!r} refers to component {idx}, field has {n_components}")
        parsed.append((m.group(1), idx - 1))
    if len(set(parsed)) != len(parsed):
        raise ValueError(f"duplicate labels in selector: {list(labels)}")
    return tuple(parsed)


def selector_labels(parsed: Iterable[tuple[str, int]]) -> tuple[str, ...]:
    return tuple(f"{kind}{idx + 1}" for kind, idx in parsed)


@dataclass(frozen=True)
class FisherMatrix:
    """Symmetric positive-semidefinite information matrix with parameter labels."""

    labels: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        k = len(self.labels)
        if m.shape != (k, k):
            raise ValueError(f"matrix shape {m.shape} does not match {k} labels")
        scale = float(np.max(np.abs(m))) or 1.0
        if np.max(np.abs(m - m.T)) > 1e-12 * scale:
            raise ValueError("matrix is not symmetric")
        eigs = np.linalg.eigvalsh(0.5 * (m + m.T))
        if eigs.min() < -1e-10 * scale:
            raise ValueError(f"matrix is not positive semidefinite (min eig {eigs.min():.3e})")

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "matrix": [list(r) for r in self.matrix]}


def _gradient(field: MultiField, seq: SequenceSpec, gamma: Gyromagnetic,
              parsed) -> tuple[float, np.ndarray]:
    theta, d_db, d_dphi, d_df = theta_with_derivatives(seq, field, gamma)
    table = {"b": d_db, "phi": d_dphi, "f": d_df}
    return theta, np.array([table[kind][idx] for kind, idx in parsed])


def _as_seq_list(seqs) -> list[SequenceSpec]:
    if isinstance(seqs, SequenceSpec):
        return [seqs]
    out = list(seqs)
    if not out:
        raise ValueError("need at least one sequence")
    return out


def fisher_matrix(field: MultiField, seqs, noise: NoiseModel, gamma: Gyromagnetic,
                  labels: Sequence[str], exact: bool = False) -> FisherMatrix:
    """Per-shot Fisher matrix summed over one or more pulse trains."""
    parsed = parse_selector(labels, len(field))
    k = len(parsed)
    total = np.zeros((k, k))
    for seq in _as_seq_list(seqs):
        theta, grad = _gradient(field, seq, gamma, parsed)
        coherence = attenuation_w(seq, noise).coherence
        if exact:
            tt = math.sin(theta) * coherence
            grad_tt = math.cos(theta) * coherence * grad
            total += np.outer(grad_tt, grad_tt) / (1.0 - tt * tt)
        else:
            total += np.outer(grad, grad) * coherence**2
    return FisherMatrix(selector_labels(parsed), total)


def quantum_fisher(field: MultiField, seq: SequenceSpec, gamma: Gyromagnetic,
                   labels: Sequence[str]) -> FisherMatrix:
    """Measurement-optimised information matrix of the pure readout state.

    Builds the 2x2 density matrix of (|0> + e^{i theta} |1>)/sqrt(2),
    eigendecomposes it, constructs the symmetric logarithmic derivative for
    each parameter and returns Tr[d rho L].  Equals the classical matrix at
    zero coupling.
    """
    parsed = parse_selector(labels, len(field))
    theta, grad = _gradient(field, seq, gamma, parsed)
    k = len(parsed)

    e_minus = np.exp(-1j * theta)
    e_plus = np.exp(1j * theta)
    rho = 0.5 * np.array([[1.0, e_minus], [e_plus, 1.0]])
    evals, evecs = np.linalg.eigh(rho)
    d_rhos = [
        0.5 * np.array([[0.0, -1j * g * e_minus], [1j * g * e_plus, 0.0]])
        for g in grad
    ]
    slds = []
    for d_rho in d_rhos:
        mat = evecs.conj().T @ d_rho @ evecs
        lam = np.zeros((2, 2), dtype=complex)
        for a in range(2):
            for b in range(2):
                denom = evals[a] + evals[b]
                if denom > 1e-12:
                    lam[a, b] = 2.0 * mat[a, b] / denom
        slds.append(evecs @ lam @ evecs.conj().T)
    out = np.empty((k, k))
    for m in range(k):
        for n in range(k):
            out[m, n] = float(np.real(np.trace(d_rhos[m] @ slds[n])))
    out = 0.5 * (out + out.T)
    return FisherMatrix(selector_labels(parsed), out)


@dataclass(frozen=True)
class CramerRaoBounds:
    """Variance lower bounds derived from a Fisher matrix.

    ``joint_variances`` holds the diagonal of the inverse when the matrix is
    well conditioned, else None with ``is_singular`` set (some parameter
    combination is unidentifiable from these measurements alone).
    ``single_variances`` are the 1/I_jj bounds that ignore cross
    correlations (inf where I_jj is 0).
    """

    labels: tuple[str, ...]
    joint_variances: np.ndarray | None
    single_variances: np.ndarray
    is_singular: bool
    condition_number: float

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "joint_variances": None if self.joint_variances is None
            else [float(v) for v in self.joint_variances],
            "single_variances": [float(v) for v in self.single_variances],
            "singular": self.is_singular,
            "condition_number": self.condition_number,
        }


def cramer_rao(fm: FisherMatrix, condition_limit: float = CONDITION_LIMIT) -> CramerRaoBounds:
    """Joint and single-parameter variance bounds, with singularity flagging."""
    m = fm.matrix
    diag = np.diag(m)
    with np.errstate(divide="ignore"):
        single = np.where(diag > 0.0, 1.0 / np.where(diag > 0.0, diag, 1.0), np.inf)
    svals = np.linalg.svd(m, compute_uv=False)
    cond = float(svals[0] / svals[-1]) if svals[-1] > 0.0 else math.inf
    if not math.isfinite(cond) or cond > condition_limit:
        return CramerRaoBounds(fm.labels, None, single, True, cond)
    joint = np.diag(np.linalg.inv(m)).copy()
    return CramerRaoBounds(fm.labels, joint, single, False, cond)


# ---------------------------------------------------------------------------
# reference formulas (tests only; production differentiates the closed form)
# ---------------------------------------------------------------------------

def resonant_fisher_reference(kind, amplitude_nt: float, frequency_hz: float,
                              phase_rad: float, gamma: Gyromagnetic,
                              num_pulses: int) -> np.ndarray:
    """Resonant-limit (b, phi) information matrix at tau -> 1/(2f), no noise.

    ``kind`` is a sequence family or ``'both'`` for the two-train sum.  The
    combined off-diagonal cancels identically.
    """
    n, g, b, f = num_pulses, gamma.hz_per_nt, amplitude_nt, frequency_hz
    base = 4.0 * n**2 * g**2 / f**2
    c2, s2 = math.cos(phase_rad) ** 2, math.sin(phase_rad) ** 2
    cross = 2.0 * n**2 * g**2 * b * math.sin(2.0 * phase_rad) / f**2
    if str(kind).lower() == "both":
        return np.array([[base, 0.0], [0.0, base * b**2]])
    kind = _coerce_kind(kind)
    if kind is SequenceKind.PDD:
        return np.array([[base * c2, -cross], [-cross, base * b**2 * s2]])
    return np.array([[base * s2, cross], [cross, base * b**2 * c2]])


def freq_info_two_peak(amplitude_nt: float, frequency_hz: float, phase_rad: float,
                       gamma: Gyromagnetic, num_pulses: int) -> float:
    """Frequency information of the two-peak spacing method (printed form)."""
    n, g, b, f, phi = num_pulses, gamma.hz_per_nt, amplitude_nt, frequency_hz, phase_rad
    return (n**2 * g**2 * b**2 / f**4) * (
        10.0 * n**2 * math.pi**2 * math.sin(phi) ** 2
        + 8.0 * n * math.pi * math.sin(2.0 * phi)
        + 4.0 * math.cos(phi) ** 2
    )


def freq_info_combined_peak(amplitude_nt: float, frequency_hz: float, phase_rad: float,
                            gamma: Gyromagnetic, num_pulses: int) -> float:
    """Frequency information of the combined-curve peak method (printed form)."""
    n, g, b, f, phi = num_pulses, gamma.hz_per_nt, amplitude_nt, frequency_hz, phase_rad
    s2 = math.sin(phi) ** 2
    return (n * g * b / f**2) ** 2 * (
        math.pi**2 * (n**2 + n * math.sin(2.0 * phi) + s2) + 4.0 * math.pi * s2 + 4.0
    )


def peak_offset_delta(num_pulses: int, phase_rad: float) -> float:
    """Fractional offset of the combined-curve peak from tau = 1/(2f).

    Large-N expansion; the peak sits at tau = (1 + delta) / (2f).
    """
    n, phi = num_pulses, phase_rad
    denom = math.pi * (n**2 - 6.0 * n * math.sin(2.0 * phi) + 3.0 * math.cos(2.0 * phi) - 1.0)
    if abs(denom) < 1e-300:
        raise ValueError("peak-offset denominator vanishes for these (N, phi)")
    return 6.0 * math.sin(phi) ** 2 / denom
