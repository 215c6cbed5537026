"""AC magnetometry with a dynamically decoupled two-level probe.

Core pipeline: model the oscillating field, pick a pulse train, evaluate
the accumulated phase and its dephasing attenuation, quantify parameter
sensitivity via Fisher information, and invert (simulated) readouts back
into amplitudes, phases, and frequencies.
"""

from ._backend import backend_detail, backend_name
from .decoherence import (
    AttenuationResult,
    NoiseModel,
    attenuation_w,
    attenuation_w_oracle,
    coherence_monte_carlo,
    echo_t2,
    w_exponent,
)
from .estimation import (
    ComponentEstimate,
    EstimationError,
    FieldEstimate,
    PeakList,
    ThetaCurve,
    combine_curves,
    curve_from_records,
    default_tau_grid,
    estimate_mono_resonant,
    estimate_multi,
    find_peaks,
    freq_from_peak_spacing,
    freq_from_resonance_peak,
    prune_redundant_peaks,
    resonant_response_matrix,
    scan_theta,
)
from .fields import (
    FieldComponent,
    Gyromagnetic,
    MultiField,
    canonical_phase,
    evaluate_field,
    phase_integral,
)
from .fisher import (
    CramerRaoBounds,
    FisherMatrix,
    cramer_rao,
    fisher_matrix,
    freq_info_combined_peak,
    freq_info_two_peak,
    peak_offset_delta,
    quantum_fisher,
    resonant_fisher_reference,
)
from .measurement import (
    MeasurementRecord,
    MeasurementSettings,
    expectation_sigma_z,
    outcome_probability,
    simulate_measurement,
)
from .optimize import (
    OptimizeResult,
    optimal_pulses_cpmg,
    optimal_pulses_pdd,
    optimal_pulses_scan,
)
from .sequences import (
    SequenceKind,
    SequenceSpec,
    SignFunction,
    alternating_cosine_sums,
    sign_function,
    theta_closed,
    theta_closed_grid,
    theta_oracle,
    theta_resonant,
    theta_with_derivatives,
)

__version__ = "0.1.0"

__all__ = [
    "AttenuationResult",
    "ComponentEstimate",
    "CramerRaoBounds",
    "EstimationError",
    "FieldComponent",
    "FieldEstimate",
    "FisherMatrix",
    "Gyromagnetic",
    "MeasurementRecord",
    "MeasurementSettings",
    "MultiField",
    "NoiseModel",
    "OptimizeResult",
    "PeakList",
    "SequenceKind",
    "SequenceSpec",
    "SignFunction",
    "ThetaCurve",
    "alternating_cosine_sums",
    "attenuation_w",
    "attenuation_w_oracle",
    "backend_detail",
    "backend_name",
    "canonical_phase",
    "coherence_monte_carlo",
    "combine_curves",
    "cramer_rao",
    "curve_from_records",
    "default_tau_grid",
    "echo_t2",
    "estimate_mono_resonant",
    "estimate_multi",
    "evaluate_field",
    "expectation_sigma_z",
    "find_peaks",
    "fisher_matrix",
    "freq_from_peak_spacing",
    "freq_from_resonance_peak",
    "freq_info_combined_peak",
    "freq_info_two_peak",
    "optimal_pulses_cpmg",
    "optimal_pulses_pdd",
    "optimal_pulses_scan",
    "outcome_probability",
    "peak_offset_delta",
    "phase_integral",
    "prune_redundant_peaks",
    "quantum_fisher",
    "resonant_fisher_reference",
    "resonant_response_matrix",
    "scan_theta",
    "sign_function",
    "simulate_measurement",
    "theta_closed",
    "theta_closed_grid",
    "theta_oracle",
    "theta_resonant",
    "theta_with_derivatives",
    "w_exponent",
]
