"""Command-line front end.

Subcommands:

* ``theta-scan``  -- accumulated-phase curve against the pulse interval (CSV),
* ``estimate``    -- parameter recovery from simulated shots or a theta file (JSON),
* ``fisher``      -- information matrix + variance bounds, or an (N, objective) scan,
* ``optimize``    -- optimal pulse count by root/closed form or objective scan.

Every command reads a scenario JSON (field, optional noise, defaults) given
with ``--config``; unknown keys anywhere in the file are rejected with a
path diagnostic.  Output goes to stdout or ``--out``; diagnostics go to
stderr.  Exit codes: 0 success, 2 usage/config errors, 3 estimation
inconsistency.  Identical arguments, config, and seed produce byte-identical
output.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from .decoherence import NoiseModel
from .estimation import (
    DEFAULT_PEAK_THRESHOLD,
    EstimationError,
    combine_curves,
    default_tau_grid,
    estimate_mono_resonant,
    estimate_multi,
    find_peaks,
    freq_from_peak_spacing,
    freq_from_resonance_peak,
    prune_redundant_peaks,
    scan_theta,
)
from .fields import Gyromagnetic, MultiField
from .fisher import cramer_rao, fisher_matrix
from .measurement import MeasurementSettings, simulate_measurement
from .optimize import (
    DEFAULT_N_MAX,
    DEFAULT_N_MIN,
    optimal_pulses_cpmg,
    optimal_pulses_pdd,
    optimal_pulses_scan,
)
from .sequences import SequenceKind, SequenceSpec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INCONSISTENT = 3


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    field: MultiField
    gamma: Gyromagnetic
    noise: NoiseModel | None
    default_n: int
    default_shots: int
    default_seed: int


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ScenarioError("config root must be an object")
    unknown = set(raw) - {"field", "noise", "defaults"}
    if unknown:
        raise ScenarioError(f"config: unknown keys {sorted(unknown)}")
    if "field" not in raw:
        raise ScenarioError("config: missing 'field'")
    try:
        field, gamma = MultiField.from_dict(raw["field"])
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    noise = None
    if "noise" in raw and raw["noise"] is not None:
        try:
            noise = NoiseModel.from_dict(raw["noise"])
        except ValueError as exc:
            raise ScenarioError(str(exc)) from None
    defaults = raw.get("defaults", {})
    if not isinstance(defaults, dict):
        raise ScenarioError("config: 'defaults' must be an object")
    bad = set(defaults) - {"N", "shots", "seed"}
    if bad:
        raise ScenarioError(f"config.defaults: unknown keys {sorted(bad)}")
    n = int(defaults.get("N", 20))
    if n < 2 or n % 2:
        raise ScenarioError(f"config.defaults.N must be even >= 2, got {n}")
    return Scenario(
        field=field,
        gamma=gamma,
        noise=noise,
        default_n=n,
        default_shots=int(defaults.get("shots", 100000)),
        default_seed=int(defaults.get("seed", 0)),
    )


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_theta_scan(args) -> int:
    sc = load_scenario(args.config)
    n = args.N if args.N is not None else sc.default_n
    if args.points < 3:
        raise ScenarioError(f"--points must be >= 3 for downstream peak finding, got {args.points}")
    f_max = float(sc.field.frequencies.max())
    f_min = float(sc.field.frequencies.min())
    tau_min = args.tau_min if args.tau_min is not None else 0.1 / (2.0 * f_max)
    tau_max = args.tau_max if args.tau_max is not None else 3.5 / (2.0 * f_min)
    if not tau_min < tau_max:
        raise ScenarioError(f"need --tau-min < --tau-max, got {tau_min} >= {tau_max}")
    grid = np.linspace(tau_min, tau_max, args.points)
    noise = None if args.no_noise else sc.noise
    if args.combine:
        curve = combine_curves(
            scan_theta(sc.field, SequenceKind.PDD, n, grid, sc.gamma, noise),
            scan_theta(sc.field, SequenceKind.CPMG, n, grid, sc.gamma, noise),
        )
    else:
        curve = scan_theta(sc.field, args.seq, n, grid, sc.gamma, noise)
    _emit(curve.to_csv(), args.out)
    return EXIT_OK


def _simulate_resonant_pair(sc: Scenario, f_l: float, n: int, shots: int, seed: int,
                            seed_offset: int) -> tuple[float, float]:
    noise = sc.noise or NoiseModel(0.0, 1.0)
    out = []
    for i, kind in enumerate((SequenceKind.PDD, SequenceKind.CPMG)):
        seq = SequenceSpec(kind, n, 0.5 / f_l)
        rec = simulate_measurement(
            sc.field, seq, noise, sc.gamma,
            MeasurementSettings(shots=shots, seed=seed + seed_offset * 2 + i),
        )
        out.append(rec.theta_tilde_hat)
    return out[0], out[1]


def _load_theta_file(path: str, n_freqs: int) -> tuple[list[float], list[float]]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    unknown = set(data) - {"pdd", "cpmg"}
    if unknown:
        raise ScenarioError(f"theta file: unknown keys {sorted(unknown)}")
    try:
        pdd, cpmg = data["pdd"], data["cpmg"]
    except KeyError as exc:
        raise ScenarioError(f"theta file: missing {exc}") from None
    if n_freqs == 1 and isinstance(pdd, (int, float)):
        pdd, cpmg = [pdd], [cpmg]
    if len(pdd) != n_freqs or len(cpmg) != n_freqs:
        raise ScenarioError(f"theta file: need {n_freqs} values per family")
    return [float(v) for v in pdd], [float(v) for v in cpmg]


def _cmd_estimate(args) -> int:
    sc = load_scenario(args.config)
    n = args.N if args.N is not None else sc.default_n
    shots = args.shots if args.shots is not None else sc.default_shots
    seed = args.seed if args.seed is not None else sc.default_seed
    freqs = ([float(f) for f in args.freqs.split(",")] if args.freqs
             else [c.frequency_hz for c in sc.field.components])

    if args.mode == "mono":
        if len(freqs) != 1:
            raise ScenarioError("mono mode needs exactly one frequency")
        f_l = freqs[0]
        if args.theta_file:
            (tt_pdd,), (tt_cpmg,) = _load_theta_file(args.theta_file, 1)
        else:
            tt_pdd, tt_cpmg = _simulate_resonant_pair(sc, f_l, n, shots, seed, 0)
        est = estimate_mono_resonant(tt_pdd, tt_cpmg, f_l, n, sc.gamma, sc.noise)
        report = {"mode": "mono", "N": n, "estimate": est.to_dict()}
        if not args.theta_file:
            report["shots"] = shots
            report["seed"] = seed
        _emit(_json_dump(report), args.out)
        return EXIT_OK

    if args.mode == "multi":
        m = len(freqs)
        if args.theta_file:
            pdd_vals, cpmg_vals = _load_theta_file(args.theta_file, m)
        else:
            pdd_vals, cpmg_vals = [], []
            for l, f_l in enumerate(freqs):
                a, b = _simulate_resonant_pair(sc, f_l, n, shots, seed, l)
                pdd_vals.append(a)
                cpmg_vals.append(b)
        est = estimate_multi(pdd_vals + cpmg_vals, freqs, n, sc.gamma, sc.noise)
        report = {"mode": "multi", "N": n, "frequencies_Hz": freqs, "estimate": est.to_dict()}
        if not args.theta_file:
            report["shots"] = shots
            report["seed"] = seed
        _emit(_json_dump(report), args.out)
        return EXIT_OK

    # freq mode: analytic combined + spacing methods on the scenario curves
    f_max = float(sc.field.frequencies.max())
    f_min = float(sc.field.frequencies.min())
    grid = default_tau_grid(f_max, f_min, args.points)
    curve_pdd = scan_theta(sc.field, SequenceKind.PDD, n, grid, sc.gamma, sc.noise)
    curve_cpmg = scan_theta(sc.field, SequenceKind.CPMG, n, grid, sc.gamma, sc.noise)
    combined = combine_curves(curve_pdd, curve_cpmg)
    peaks = find_peaks(combined, args.threshold)
    report: dict = {
        "mode": "freq",
        "N": n,
        "peaks_s": [float(t) for t in peaks.locations_s],
        "peak_heights": [float(h) for h in peaks.heights],
    }
    report["f_combined_Hz"] = freq_from_resonance_peak(peaks)
    pruned = prune_redundant_peaks(peaks)
    report["pruned_peaks_s"] = [float(t) for t in pruned.locations_s]
    report["frequencies_from_peaks_Hz"] = [
        1.0 / (2.0 * float(t)) for t in pruned.locations_s
    ]
    try:
        report["f_spacing_Hz"] = freq_from_peak_spacing(find_peaks(curve_pdd, args.threshold))
    except EstimationError as exc:
        report["f_spacing_Hz"] = None
        report["f_spacing_note"] = str(exc)
    _emit(_json_dump(report), args.out)
    return EXIT_OK


def _parse_kind_set(spec: str) -> list[SequenceKind]:
    table = {"pdd": [SequenceKind.PDD], "cpmg": [SequenceKind.CPMG],
             "both": [SequenceKind.PDD, SequenceKind.CPMG]}
    try:
        return table[spec.lower()]
    except KeyError:
        raise ScenarioError(f"--seq-set must be pdd, cpmg, or both, got {spec!r}") from None


def _cmd_fisher(args) -> int:
    sc = load_scenario(args.config)
    labels = [s.strip() for s in args.params.split(",") if s.strip()]
    if not labels:
        raise ScenarioError("--params must list at least one label")
    kinds = _parse_kind_set(args.seq_set)
    noise = sc.noise or NoiseModel(0.0, 1.0)

    if args.scan_N:
        try:
            lo, hi = (int(x) for x in args.scan_N.split(":"))
        except ValueError:
            raise ScenarioError(f"--scan-N must be LO:HI, got {args.scan_N!r}") from None
        objective = "det" if len(labels) > 1 else labels[0]
        res = optimal_pulses_scan(objective, sc.field, kinds, noise, sc.gamma, lo, hi)
        lines = ["N,objective"]
        lines += [f"{int(nv)},{_fmt(v)}" for nv, v in zip(res.n_grid, res.values)]
        lines.append("")
        _emit("\n".join(lines), args.out)
        print(f"argmax N = {res.best_n} (objective {_fmt(res.best_value)})"
              + (f"; {res.note}" if res.note else ""), file=sys.stderr)
        return EXIT_OK

    n = args.N if args.N is not None else sc.default_n
    seqs = [
        SequenceSpec(kind, n, 0.5 / f_l)
        for kind in kinds
        for f_l in sc.field.frequencies
    ]
    fm = fisher_matrix(sc.field, seqs, noise, sc.gamma, labels)
    bounds = cramer_rao(fm)
    report = {"N": n, "fisher": fm.to_dict(), "cramer_rao": bounds.to_dict()}
    if args.exact:
        report["fisher_exact"] = fisher_matrix(
            sc.field, seqs, noise, sc.gamma, labels, exact=True
        ).to_dict()
    _emit(_json_dump(report), args.out)
    return EXIT_OK


def _cmd_optimize(args) -> int:
    sc = load_scenario(args.config)
    if args.kind is None and args.objective is None:
        raise ScenarioError("optimize needs --kind or --objective")
    report: dict = {}
    if args.kind is not None:
        if sc.noise is None or sc.noise.is_off:
            report = {"kind": args.kind, "best_N": None,
                      "note": "no finite optimum without decoherence"}
            _emit(_json_dump(report), args.out)
            return EXIT_OK
        f_l = float(sc.field.frequencies[0])
        best = (optimal_pulses_pdd if args.kind == "pdd" else optimal_pulses_cpmg)(f_l, sc.noise)
        report = {"kind": args.kind, "best_N": best}
        _emit(_json_dump(report), args.out)
        return EXIT_OK
    noise = sc.noise or NoiseModel(0.0, 1.0)
    kinds = _parse_kind_set(args.seq_set)
    res = optimal_pulses_scan(args.objective, sc.field, kinds, noise, sc.gamma,
                              args.n_min, args.n_max)
    report = {"objective": args.objective, "seq_set": args.seq_set, **res.to_dict()}
    _emit(_json_dump(report), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ddmag",
        description="AC magnetometry with a dynamically decoupled qubit",
    )
    sub = p.add_subparsers(dest="command", required=True)

    ts = sub.add_parser("theta-scan", help="accumulated-phase curve vs pulse interval (CSV)")
    ts.add_argument("--config", required=True)
    ts.add_argument("--seq", choices=["PDD", "CPMG"], default="PDD")
    ts.add_argument("--N", type=int, default=None)
    ts.add_argument("--tau-min", dest="tau_min", type=float, default=None)
    ts.add_argument("--tau-max", dest="tau_max", type=float, default=None)
    ts.add_argument("--points", type=int, default=400)
    ts.add_argument("--combine", action="store_true",
                    help="root-sum-square of both families")
    ts.add_argument("--no-noise", action="store_true",
                    help="ignore the scenario noise model")
    ts.add_argument("--out", default=None)
    ts.set_defaults(func=_cmd_theta_scan)

    es = sub.add_parser("estimate", help="field-parameter estimation (JSON)")
    es.add_argument("--config", required=True)
    es.add_argument("--mode", choices=["mono", "multi", "freq"], required=True)
    es.add_argument("--N", type=int, default=None)
    es.add_argument("--shots", type=int, default=None)
    es.add_argument("--seed", type=int, default=None)
    es.add_argument("--freqs", default=None, help="comma-separated frequencies [Hz]")
    es.add_argument("--theta-file", dest="theta_file", default=None,
                    help="JSON {'pdd': ..., 'cpmg': ...} instead of simulation")
    es.add_argument("--points", type=int, default=400)
    es.add_argument("--threshold", type=float, default=DEFAULT_PEAK_THRESHOLD)
    es.add_argument("--out", default=None)
    es.set_defaults(func=_cmd_estimate)

    fi = sub.add_parser("fisher", help="information matrix / scans")
    fi.add_argument("--config", required=True)
    fi.add_argument("--params", required=True, help="comma-separated labels, e.g. b1,phi1")
    fi.add_argument("--seq-set", dest="seq_set", default="both")
    fi.add_argument("--N", type=int, default=None)
    fi.add_argument("--scan-N", dest="scan_N", default=None, help="LO:HI even range")
    fi.add_argument("--exact", action="store_true",
                    help="also report the exact two-outcome matrix")
    fi.add_argument("--out", default=None)
    fi.set_defaults(func=_cmd_fisher)

    op = sub.add_parser("optimize", help="optimal pulse count")
    op.add_argument("--config", required=True)
    op.add_argument("--kind", choices=["pdd", "cpmg"], default=None,
                    help="analytic route for the given family")
    op.add_argument("--objective", default=None,
                    help="scan objective: parameter label or 'det'")
    op.add_argument("--seq-set", dest="seq_set", default="both")
    op.add_argument("--n-min", dest="n_min", type=int, default=DEFAULT_N_MIN)
    op.add_argument("--n-max", dest="n_max", type=int, default=DEFAULT_N_MAX)
    op.add_argument("--out", default=None)
    op.set_defaults(func=_cmd_optimize)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except EstimationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
