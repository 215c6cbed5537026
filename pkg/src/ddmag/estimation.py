"""Field-parameter recovery from accumulated-phase observables.

Three estimation routes:

* resonant single-component inversion -- the two readouts at pulse interval
  1/(2f) give ``tan(phi) = theta_cpmg / theta_pdd`` and
  ``b = f sqrt(theta_pdd^2 + theta_cpmg^2) / (2 N gamma)`` after undoing
  each train's own attenuation factor and the arcsine readout nonlinearity,
* multi-component linear inversion -- the 2M resonant readouts (both
  families at each 1/(2 f_l)) are linear in ``x_m = b_m cos(phi_m)`` and
  ``y_m = b_m sin(phi_m)``; building that response matrix and solving it
  recovers every amplitude and phase at once,
* frequency discovery -- scan the accumulated phase against the pulse
  interval and read frequencies off the peak pattern, either from the
  spacing of consecutive peaks (period 1/f) or from the combined-curve
  peak near 1/(2f).

Peak detection operates on curve magnitudes: the signed curves dip negative
at alternate resonances, and every quoted feature position corresponds to
an extremum of |theta|.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .decoherence import NoiseModel, coherence_grid, w_exponent
from .fields import FieldComponent, Gyromagnetic, MultiField, canonical_phase
from .fisher import CramerRaoBounds, cramer_rao, fisher_matrix, peak_offset_delta
from .sequences import (
    POLE_GUARD,
    SequenceKind,
    SequenceSpec,
    _coerce_kind,
    _reduce,
    _response,
    theta_closed_grid,
)

#: response matrices worse conditioned than this are rejected
INVERSION_CONDITION_LIMIT = 1e10

#: redundant period-repeat peaks are pruned within this relative window
PRUNE_REL_WINDOW = 0.02

DEFAULT_GRID_POINTS = 400
DEFAULT_PEAK_THRESHOLD = 0.4


class EstimationError(ValueError):
    """Measurement values inconsistent with the assumed model."""


@dataclass(frozen=True)
class ThetaCurve:
    """Accumulated phase (or its attenuated version) over a pulse-interval grid."""

    tau_s: np.ndarray
    values: np.ndarray
    kind: str
    num_pulses: int
    attenuated: bool = False

    def __post_init__(self):
        tau = np.asarray(self.tau_s, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "tau_s", tau)
        object.__setattr__(self, "values", vals)
        if tau.ndim != 1 or tau.shape != vals.shape:
            raise ValueError("tau grid and values must be 1-d arrays of equal length")
        if tau.size and np.any(np.diff(tau) <= 0):
            raise ValueError("tau grid must be strictly increasing")
        if not np.all(np.isfinite(vals)):
            raise ValueError("curve values must be finite")

    @property
    def value_name(self) -> str:
        return "theta_tilde" if self.attenuated else "theta"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"tau_s,{self.value_name}\n")
        for t, v in zip(self.tau_s, self.values):
            buf.write(f"{t:.17g},{v:.17g}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class PeakList:
    """Refined peak locations [s] and magnitudes, plus the threshold used."""

    locations_s: np.ndarray
    heights: np.ndarray
    threshold: float
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "locations_s", np.asarray(self.locations_s, dtype=float))
        object.__setattr__(self, "heights", np.asarray(self.heights, dtype=float))

    def __len__(self) -> int:
        return int(self.locations_s.size)

    @property
    def tallest_s(self) -> float:
        if not len(self):
            raise EstimationError("no peaks detected" + (f" ({self.note})" if self.note else ""))
        return float(self.locations_s[int(np.argmax(self.heights))])


@dataclass(frozen=True)
class ComponentEstimate:
    amplitude_nt: float
    phase_rad: float
    frequency_hz: float | None = None
    amplitude_var_bound: float | None = None
    phase_var_bound: float | None = None

    def to_dict(self) -> dict:
        return {
            "b_nT": self.amplitude_nt,
            "phi_rad": self.phase_rad,
            "f_Hz": self.frequency_hz,
            "var_b_bound": self.amplitude_var_bound,
            "var_phi_bound": self.phase_var_bound,
        }


@dataclass(frozen=True)
class FieldEstimate:
    """Recovered per-component parameters with diagnostics."""

    components: tuple[ComponentEstimate, ...]
    condition_number: float
    attenuation_corrected: bool
    phase_ambiguous: bool = False
    bounds: CramerRaoBounds | None = None

    def to_dict(self) -> dict:
        return {
            "components": [c.to_dict() for c in self.components],
            "condition_number": self.condition_number,
            "attenuation_corrected": self.attenuation_corrected,
            "phase_ambiguous": self.phase_ambiguous,
            "cramer_rao": None if self.bounds is None else self.bounds.to_dict(),
        }


# ---------------------------------------------------------------------------
# scanning
# ---------------------------------------------------------------------------

def default_tau_grid(f_max_guess: float, f_min_guess: float | None = None,
                     points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Pulse-interval grid [0.1/(2 f_max), 3.5/(2 f_min)] resolving the peak pattern."""
    if f_min_guess is None:
        f_min_guess = f_max_guess
    if points < 3:
        raise ValueError(f"grid needs at least 3 points, got {points}")
    return np.linspace(0.1 / (2.0 * f_max_guess), 3.5 / (2.0 * f_min_guess), points)


def scan_theta(field: MultiField, kind, num_pulses: int, tau_grid,
               gamma: Gyromagnetic, noise: NoiseModel | None = None) -> ThetaCurve:
    """Analytic curve of theta (times the coherence factor when noise is given)."""
    kind = _coerce_kind(kind)
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.size == 0:
        raise ValueError("tau grid must be nonempty")
    values = theta_closed_grid(kind, num_pulses, tau_grid, field, gamma)
    attenuated = noise is not None and not noise.is_off
    if attenuated:
        values = values * coherence_grid(kind, num_pulses, tau_grid, noise)
    return ThetaCurve(tau_grid, values, kind.value, num_pulses, attenuated)


def curve_from_records(records) -> ThetaCurve:
    """Curve assembled from measurement records, one grid point per record."""
    records = list(records)
    if not records:
        raise ValueError("need at least one record")
    kinds = {r.sequence.kind for r in records}
    ns = {r.sequence.num_pulses for r in records}
    if len(kinds) != 1 or len(ns) != 1:
        raise ValueError("records must share one sequence family and pulse count")
    records.sort(key=lambda r: r.sequence.tau_s)
    tau = np.array([r.sequence.tau_s for r in records])
    vals = np.array([r.theta_tilde_hat for r in records])
    return ThetaCurve(tau, vals, kinds.pop().value, ns.pop(), attenuated=True)


def combine_curves(curve_a: ThetaCurve, curve_b: ThetaCurve) -> ThetaCurve:
    """Pointwise root-sum-square of two curves on the identical grid."""
    if curve_a.tau_s.shape != curve_b.tau_s.shape or not np.array_equal(curve_a.tau_s, curve_b.tau_s):
        raise ValueError("curves must share an identical tau grid")
    if curve_a.num_pulses != curve_b.num_pulses:
        raise ValueError("curves must share the pulse count")
    return ThetaCurve(
        curve_a.tau_s,
        np.hypot(curve_a.values, curve_b.values),
        "combined",
        curve_a.num_pulses,
        curve_a.attenuated or curve_b.attenuated,
    )


# ---------------------------------------------------------------------------
# peaks
# ---------------------------------------------------------------------------

def find_peaks(curve: ThetaCurve, threshold_frac: float = DEFAULT_PEAK_THRESHOLD) -> PeakList:
    """Local maxima of |values| above threshold * global max, parabolically refined."""
    if curve.tau_s.size < 3:
        raise ValueError("peak finding needs at least 3 grid points")
    mag = np.abs(curve.values)
    gmax = float(mag.max())
    threshold = threshold_frac * gmax
    if gmax == 0.0:
        return PeakList(np.array([]), np.array([]), threshold, note="curve identically zero")
    locs, heights = [], []
    tau = curve.tau_s
    for i in range(1, mag.size - 1):
        if mag[i] > mag[i - 1] and mag[i] >= mag[i + 1] and mag[i] >= threshold:
            denom = mag[i - 1] - 2.0 * mag[i] + mag[i + 1]
            if denom < 0.0:
                offset = 0.5 * (mag[i - 1] - mag[i + 1]) / denom
                step_l = tau[i] - tau[i - 1]
                step_r = tau[i + 1] - tau[i]
                step = step_l if offset < 0 else step_r
                locs.append(tau[i] + offset * step)
                heights.append(mag[i] - 0.25 * (mag[i - 1] - mag[i + 1]) * offset)
            else:
                locs.append(float(tau[i]))
                heights.append(float(mag[i]))
    note = "" if locs else f"no local maxima above {threshold:.3g}"
    return PeakList(np.array(locs), np.array(heights), threshold, note=note)


def prune_redundant_peaks(peaks: PeakList, rel_window: float = PRUNE_REL_WINDOW) -> PeakList:
    """Drop period repeats of earlier peaks before assigning frequencies.

    A peak at tau_i implies frequency 1/(2 tau_i), whose resonances repeat
    at every odd multiple (2k + 1) tau_i; later peaks within the window of
    any repeat carry no new frequency and are removed.  The single-component
    spacing method keeps its repeats on purpose and does not prune.
    """
    order = np.argsort(peaks.locations_s)
    locs = peaks.locations_s[order]
    heights = peaks.heights[order]
    keep = np.ones(locs.size, dtype=bool)
    for j in range(locs.size):
        for i in range(j):
            if not keep[i]:
                continue
            k = round((locs[j] / locs[i] - 1.0) / 2.0)
            if k >= 1 and abs(locs[j] - (2 * k + 1) * locs[i]) <= rel_window * locs[j]:
                keep[j] = False
                break
    return PeakList(locs[keep], heights[keep], peaks.threshold, note=peaks.note)


def freq_from_peak_spacing(peaks: PeakList) -> float:
    """Frequency from the spacing of the two dominant peaks (period 1/f)."""
    if len(peaks) < 2:
        raise EstimationError(
            "peak-spacing method needs two peaks; use the combined-curve method"
        )
    top = np.argsort(peaks.heights)[-2:]
    a, b = np.sort(peaks.locations_s[top])
    return 1.0 / (b - a)


def freq_from_resonance_peak(peaks: PeakList, num_pulses: int | None = None,
                             phase_rad: float | None = None) -> float:
    """Frequency from the tallest peak, f = 1/(2 tau_peak).

    With the pulse count and phase supplied, applies the known fractional
    peak offset: f = (1 + delta)/(2 tau_peak).
    """
    tau_peak = peaks.tallest_s
    if num_pulses is not None and phase_rad is not None:
        return (1.0 + peak_offset_delta(num_pulses, phase_rad)) / (2.0 * tau_peak)
    return 1.0 / (2.0 * tau_peak)


# ---------------------------------------------------------------------------
# resonant inversion
# ---------------------------------------------------------------------------

_SIN_1 = math.sin(1.0)
_UNIT_SLACK = 1e-9


def _resonant_w(kind, num_pulses: int, frequency_hz: float,
                noise: NoiseModel | None) -> float:
    if noise is None or noise.is_off:
        return 0.0
    w = w_exponent(kind, num_pulses, 0.5 / frequency_hz, noise.corr_time_s)
    return noise.coupling_per_s**2 * w


def estimate_mono_resonant(theta_tilde_pdd: float, theta_tilde_cpmg: float,
                           frequency_hz: float, num_pulses: int,
                           gamma: Gyromagnetic,
                           noise: NoiseModel | None = None) -> FieldEstimate:
    """Amplitude and phase from the two resonant readouts of one component.

    Each input is the attenuated observable of its own pulse train at
    interval 1/(2f).  The estimator multiplies away the train-specific
    attenuation, inverts the arcsine readout nonlinearity, and converts the
    (pdd, cpmg) pair to polar field parameters.  A de-attenuated magnitude
    above 1 is inconsistent with the assumed noise model and raises
    :class:`EstimationError`; magnitudes in (sin 1, 1] are inverted but
    flagged ambiguous, since phases beyond +-pi/2 alias.
    """
    if theta_tilde_pdd == 0.0 and theta_tilde_cpmg == 0.0:
        raise EstimationError("both observables vanish; no signal to invert")
    exp_w = {
        kind: math.exp(_resonant_w(kind, num_pulses, frequency_hz, noise))
        for kind in (SequenceKind.PDD, SequenceKind.CPMG)
    }
    corrected = {}
    ambiguous = False
    for kind, tt in ((SequenceKind.PDD, theta_tilde_pdd), (SequenceKind.CPMG, theta_tilde_cpmg)):
        c = tt * exp_w[kind]
        if abs(c) > 1.0 + _UNIT_SLACK:
            raise EstimationError(
                f"de-attenuated {kind.value} observable {c:.6g} exceeds 1; "
                "noise model inconsistent with the data"
            )
        c = min(1.0, max(-1.0, c))
        if abs(c) > _SIN_1:
            ambiguous = True
        corrected[kind] = math.asin(c)
    theta_pdd = corrected[SequenceKind.PDD]
    theta_cpmg = corrected[SequenceKind.CPMG]
    phi_hat = math.atan2(theta_cpmg, theta_pdd)
    b_hat = frequency_hz * math.hypot(theta_pdd, theta_cpmg) / (
        2.0 * num_pulses * gamma.hz_per_nt
    )
    response = resonant_response_matrix([frequency_hz], num_pulses, gamma, noise)
    cond = float(np.linalg.cond(response))
    bounds = None
    var_b = var_phi = None
    if b_hat > 0.0:
        est_field = MultiField.single(b_hat, frequency_hz, phi_hat)
        seqs = [SequenceSpec(k, num_pulses, 0.5 / frequency_hz)
                for k in (SequenceKind.PDD, SequenceKind.CPMG)]
        fm = fisher_matrix(est_field, seqs, noise or NoiseModel(0.0, 1.0), gamma,
                           ["b1", "phi1"])
        bounds = cramer_rao(fm)
        if bounds.joint_variances is not None:
            var_b, var_phi = (float(v) for v in bounds.joint_variances)
    comp = ComponentEstimate(
        amplitude_nt=b_hat,
        phase_rad=canonical_phase(phi_hat),
        frequency_hz=frequency_hz,
        amplitude_var_bound=var_b,
        phase_var_bound=var_phi,
    )
    return FieldEstimate(
        components=(comp,),
        condition_number=cond,
        attenuation_corrected=noise is not None and not noise.is_off,
        phase_ambiguous=ambiguous,
        bounds=bounds,
    )


def resonant_response_matrix(frequencies_hz, num_pulses: int, gamma: Gyromagnetic,
                             noise: NoiseModel | None = None) -> np.ndarray:
    """2M x 2M map from (b cos phi, b sin phi) to the resonant readouts.

    Row order: theta_pdd at 1/(2 f_1) ... 1/(2 f_M), then theta_cpmg at the
    same intervals.  Column order: x_1 ... x_M then y_1 ... y_M.  With a
    noise model, each row is scaled by its own coherence factor so raw
    attenuated observables can be inverted directly.  The x/y columns of a
    detuned component are its response evaluated at unit amplitude with
    phase 0 and pi/2 respectively.
    """
    freqs = [float(f) for f in frequencies_hz]
    m = len(freqs)
    n, g = num_pulses, gamma.hz_per_nt
    a = np.zeros((2 * m, 2 * m))
    for l, f_l in enumerate(freqs):
        for kind_i, kind in enumerate((SequenceKind.PDD, SequenceKind.CPMG)):
            row = kind_i * m + l
            for c, f_c in enumerate(freqs):
                x = 0.5 if c == l else f_c / (2.0 * f_l)
                if c != l:
                    u, _ = _reduce(x)
                    if abs(float(u)) < POLE_GUARD:
                        raise ValueError(
                            f"response matrix singular: f[{c}]={f_c} over "
                            f"f[{l}]={f_l} is an odd integer ratio"
                        )
                a[row, c] = g / f_c * float(_response(kind, n, x, 0.0))
                a[row, m + c] = g / f_c * float(_response(kind, n, x, math.pi / 2.0))
            if noise is not None and not noise.is_off:
                a[row, :] *= math.exp(-_resonant_w(kind, n, f_l, noise))
    return a


def estimate_multi(theta_values, frequencies_hz, num_pulses: int,
                   gamma: Gyromagnetic,
                   noise: NoiseModel | None = None) -> FieldEstimate:
    """Invert the 2M resonant readouts into every component's (b, phi).

    ``theta_values`` are ordered like the response-matrix rows: both
    families' readouts at each 1/(2 f_l), family-major.  Raises on
    ill-conditioned response matrices, naming the closest frequency pair.
    """
    freqs = [float(f) for f in frequencies_hz]
    m = len(freqs)
    theta = np.asarray(theta_values, dtype=float)
    if theta.shape != (2 * m,):
        raise ValueError(f"need {2 * m} readout values for {m} frequencies, got {theta.shape}")
    a = resonant_response_matrix(freqs, num_pulses, gamma, noise)
    cond = float(np.linalg.cond(a))
    if not math.isfinite(cond) or cond > INVERSION_CONDITION_LIMIT:
        pair = min(
            ((i, j) for i in range(m) for j in range(i + 1, m)),
            key=lambda ij: abs(freqs[ij[0]] - freqs[ij[1]]),
            default=(0, 0),
        )
        raise EstimationError(
            f"response matrix ill-conditioned (cond {cond:.3g}); nearest "
            f"frequency pair f[{pair[0]}]={freqs[pair[0]]} Hz, "
            f"f[{pair[1]}]={freqs[pair[1]]} Hz"
        )
    sol = np.linalg.solve(a, theta)
    xs, ys = sol[:m], sol[m:]
    comps = []
    for f_c, x, y in zip(freqs, xs, ys):
        b_hat = math.hypot(x, y)
        phi_hat = math.atan2(y, x) if b_hat > 0.0 else 0.0
        comps.append((b_hat, phi_hat, f_c))
    bounds = None
    per_comp_bounds: list[tuple[float | None, float | None]] = [(None, None)] * m
    if all(b > 0.0 for b, _, _ in comps):
        est_field = MultiField(tuple(FieldComponent(b, f, p) for b, p, f in comps))
        seqs = [
            SequenceSpec(kind, num_pulses, 0.5 / f_l)
            for kind in (SequenceKind.PDD, SequenceKind.CPMG)
            for f_l in freqs
        ]
        labels = [f"b{i + 1}" for i in range(m)] + [f"phi{i + 1}" for i in range(m)]
        fm = fisher_matrix(est_field, seqs, noise or NoiseModel(0.0, 1.0), gamma, labels)
        bounds = cramer_rao(fm)
        if bounds.joint_variances is not None:
            per_comp_bounds = [
                (float(bounds.joint_variances[i]), float(bounds.joint_variances[m + i]))
                for i in range(m)
            ]
    return FieldEstimate(
        components=tuple(
            ComponentEstimate(
                amplitude_nt=b,
                phase_rad=canonical_phase(p),
                frequency_hz=f,
                amplitude_var_bound=per_comp_bounds[i][0],
                phase_var_bound=per_comp_bounds[i][1],
            )
            for i, (b, p, f) in enumerate(comps)
        ),
        condition_number=cond,
        attenuation_corrected=noise is not None and not noise.is_off,
        bounds=bounds,
    )
