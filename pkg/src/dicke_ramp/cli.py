"""Batch command-line driver: JSON scenario configs in, CSV/JSON files out.

Frequencies in configs are plain f/(2 pi): kHz for fields/detunings, Hz for
small longitudinal fields; times are ms and decoherence rates 1/s, matching
the conventions the scenario numbers are usually quoted in.  Every run
writes a manifest with the echoed config, its content hash, the package
version, wall time and convergence diagnostics.  CSV files are RFC-4180
(CRLF, header row) with 17-significant-digit floats and are byte-identical
across reruns of the same config.

Subcommands: spectrum | ramp | evolve | qfi | disentangle | bzscan | benchmark
Exit codes: 0 ok, 2 config error, 3 compute error, 4 I/O error.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .analysis import (
    DisentangleSpec,
    balance_scan,
    bz_resilience_scan,
    disentangle,
    qfi_optimized,
)
from .errors import ConfigError, DickeRampError
from .evolve import (
    EvolutionSpec,
    cat_fidelity,
    crude_dephasing,
    evolve_fock_cutoff,
    evolve_lindblad_lipkin,
    evolve_thermal,
    ising_benchmark,
)
from .hilbert import ThermalSpec, thermal_weights
from .lindblad import DecoherenceParams
from .models import DickeParams
from .ramps import build_exp, build_laa, build_lin, sample_schedule
from .spectral import critical_field_estimate, fock_cutoff, gap_curve, gap_ratio_scan
from .units import angular_to_khz, hz_to_angular, khz_to_angular

ENV_THREADS = "DICKE_RAMP_THREADS"

_PARAMS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["N", "delta_khz"],
    "properties": {
        "N": {"type": "integer", "minimum": 1},
        "delta_khz": {"type": "number", "exclusiveMaximum": 0},
        "g0_khz": {"type": "number", "exclusiveMinimum": 0},
        "J_khz": {"type": "number", "exclusiveMinimum": 0},
        "Bz_hz": {"type": "number"},
    },
}

_RAMP_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["protocol", "B0_khz", "tau_ramp_ms"],
    "properties": {
        "protocol": {"enum": ["LIN", "EXP", "LAA"]},
        "B0_khz": {"type": "number", "exclusiveMinimum": 0},
        "tau_ramp_ms": {"type": "number", "exclusiveMinimum": 0},
        "tau_ms": {"type": "number", "exclusiveMinimum": 0},
        "tau_over_tau_ramp": {"type": "number", "exclusiveMinimum": 0},
        "gap_source": {"enum": ["lipkin", "dicke"]},
        "gap_points": {"type": "integer", "minimum": 16},
    },
}

_THERMAL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "n_bar": {"type": "number", "minimum": 0},
        "weight_cutoff": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    },
}

_DECOHERENCE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "Gamma_el_per_s": {"type": "number", "minimum": 0},
        "Gamma_ud_per_s": {"type": "number", "minimum": 0},
        "Gamma_du_per_s": {"type": "number", "minimum": 0},
    },
}

_NMAX_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "policy": {"enum": ["auto", "fixed"]},
        "value": {"type": "integer", "minimum": 1},
    },
}

_GRID_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["min", "max", "count"],
    "properties": {
        "min": {"type": "number"},
        "max": {"type": "number"},
        "count": {"type": "integer", "minimum": 2},
    },
}

SCHEMAS = {
    "spectrum": {
        "type": "object",
        "additionalProperties": False,
        "required": ["params", "B_grid_khz"],
        "properties": {
            "params": _PARAMS_SCHEMA,
            "models": {"type": "array", "items": {"enum": ["dicke", "lipkin"]}},
            "B_grid_khz": _GRID_SCHEMA,
            "k": {"type": "integer", "minimum": 2},
            "n_max": _NMAX_SCHEMA,
            "ratio_scan_delta_khz": {
                "type": "array", "items": {"type": "number", "exclusiveMaximum": 0},
                "minItems": 1,
            },
        },
    },
    "ramp": {
        "type": "object",
        "additionalProperties": False,
        "required": ["params", "ramp"],
        "properties": {
            "params": _PARAMS_SCHEMA,
            "ramp": _RAMP_SCHEMA,
            "protocols": {"type": "array", "items": {"enum": ["LIN", "EXP", "LAA"]}},
            "sample_count": {"type": "integer", "minimum": 2},
        },
    },
    "evolve": {
        "type": "object",
        "additionalProperties": False,
        "required": ["model", "params", "ramp"],
        "properties": {
            "model": {"enum": ["dicke", "lipkin"]},
            "params": _PARAMS_SCHEMA,
            "ramp": _RAMP_SCHEMA,
            "thermal": _THERMAL_SCHEMA,
            "n_max": _NMAX_SCHEMA,
            "sample_count": {"type": "integer", "minimum": 2},
            "crude_dephasing_Gamma_el_per_s": {"type": "number", "minimum": 0},
            "pmz_snapshots": {"type": "integer", "minimum": 0},
        },
    },
    "qfi": {
        "type": "object",
        "additionalProperties": False,
        "required": ["params", "ramp", "tau_ramp_list_ms"],
        "properties": {
            "model": {"enum": ["dicke", "lipkin"]},
            "params": _PARAMS_SCHEMA,
            "ramp": _RAMP_SCHEMA,
            "tau_ramp_list_ms": {
                "type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                "minItems": 1,
            },
            "thermal": _THERMAL_SCHEMA,
            "n_max": _NMAX_SCHEMA,
            "decoherence": _DECOHERENCE_SCHEMA,
        },
    },
    "disentangle": {
        "type": "object",
        "additionalProperties": False,
        "required": ["params", "ramp"],
        "properties": {
            "params": _PARAMS_SCHEMA,
            "ramp": _RAMP_SCHEMA,
            "thermal": _THERMAL_SCHEMA,
            "n_max": _NMAX_SCHEMA,
            "variant": {"enum": ["quench_2delta", "resonant"]},
            "ideal_cat_input": {"type": "boolean"},
        },
    },
    "bzscan": {
        "type": "object",
        "additionalProperties": False,
        "required": ["params", "ramp", "grid_hz"],
        "properties": {
            "mode": {"enum": ["resilience", "balance"]},
            "params": _PARAMS_SCHEMA,
            "ramp": _RAMP_SCHEMA,
            "grid_hz": {"type": "array", "items": {"type": "number"}, "minItems": 2},
            "thermal": _THERMAL_SCHEMA,
            "n_max": _NMAX_SCHEMA,
            "variant": {"enum": ["quench_2delta", "resonant"]},
        },
    },
    "benchmark": {
        "type": "object",
        "additionalProperties": False,
        "required": ["params", "tau_max_ms"],
        "properties": {
            "model": {"enum": ["dicke", "lipkin"]},
            "params": _PARAMS_SCHEMA,
            "tau_max_ms": {"type": "number", "exclusiveMinimum": 0},
            "sample_count": {"type": "integer", "minimum": 2},
            "n_max": _NMAX_SCHEMA,
        },
    },
}


def load_config(path, command):
    try:
        with open(path) as fh:
            config = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    import jsonschema

    try:
        jsonschema.validate(config, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config validation failed: {exc.message}") from exc
    return config


def params_from_config(block):
    if ("g0_khz" in block) == ("J_khz" in block):
        raise ConfigError("give exactly one of g0_khz or J_khz")
    delta = khz_to_angular(block["delta_khz"])
    bz = hz_to_angular(block.get("Bz_hz", 0.0))
    if "g0_khz" in block:
        return DickeParams(N=block["N"], delta=delta,
                           g0=khz_to_angular(block["g0_khz"]), Bz=bz)
    return DickeParams.from_J(N=block["N"], delta=delta,
                              J_mag=khz_to_angular(block["J_khz"]), Bz=bz)


def _laa_gap_curve(params, B0, block):
    source = block.get("gap_source", "lipkin")
    points = block.get("gap_points", 121)
    grid = np.concatenate([[0.0], np.geomspace(1e-3 * B0, B0, points)])
    n_max = fock_cutoff(params) if source == "dicke" else None
    return gap_curve(params, source, grid, n_max=n_max)


def schedule_from_config(params, block, tau_override=None, protocol_override=None):
    protocol = protocol_override or block["protocol"]
    B0 = khz_to_angular(block["B0_khz"])
    tau_ramp = tau_override if tau_override is not None else block["tau_ramp_ms"]
    if protocol == "LIN":
        return build_lin(B0, tau_ramp)
    if protocol == "EXP":
        # fixed experimental time constant when given (also under tau_ramp
        # scans); otherwise scale with the ramp duration
        if "tau_ms" in block:
            tau = block["tau_ms"]
        else:
            tau = block.get("tau_over_tau_ramp", 0.3) * tau_ramp
        return build_exp(B0, tau_ramp, tau)
    return build_laa(B0, tau_ramp, _laa_gap_curve(params, B0, block))


def thermal_from_config(config):
    block = config.get("thermal", {})
    return ThermalSpec(block.get("n_bar", 0.0), block.get("weight_cutoff", 0.999))


def nmax_from_config(config, params, thermal):
    block = config.get("n_max", {"policy": "auto"})
    if block.get("policy", "auto") == "fixed":
        if "value" not in block:
            raise ConfigError("n_max policy 'fixed' needs a value")
        return block["value"]
    return None  # auto: per-branch evolve_fock_cutoff


def fmt(x):
    return f"{x:.17g}"


def write_csv(path, header, rows):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)  # csv defaults to RFC-4180 CRLF line endings
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    os.replace(tmp, path)
    return path


def write_json(path, payload):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON serializable: {type(obj)}")


def config_hash(config):
    return hashlib.sha256(
        json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def write_manifest(out_dir, command, config, outputs, diagnostics, wall_time):
    return write_json(
        os.path.join(out_dir, f"{command}_manifest.json"),
        {
            "command": command,
            "config": config,
            "config_sha256": config_hash(config),
            "package_version": __version__,
            "wall_time_s": wall_time,
            "outputs": [os.path.basename(p) for p in outputs],
            "diagnostics": diagnostics,
        },
    )


def _resolve_plan(command, config):
    """Dry-run payload: resolved sizes, cutoffs and branch counts."""
    plan = {"command": command, "config_sha256": config_hash(config)}
    if "params" in config:
        params = params_from_config(config["params"])
        plan["J_khz"] = angular_to_khz(params.J)
        plan["B_c_khz"] = angular_to_khz(params.B_c)
        plan["alpha0_sq"] = abs(params.alpha0) ** 2
        thermal = thermal_from_config(config)
        if config.get("model", "dicke") == "dicke":
            weights = thermal_weights(thermal, 10_000)
            plan["thermal_branches"] = len(weights)
            fixed = nmax_from_config(config, params, thermal)
            if fixed is not None:
                plan["n_max"] = fixed
            else:
                plan["n_max_per_branch"] = [
                    evolve_fock_cutoff(params, n) for n, _ in weights[:: max(1, len(weights) - 1)]
                ]
                plan["spectral_n_max"] = fock_cutoff(params)
    if "B_grid_khz" in config:
        plan["grid_points"] = config["B_grid_khz"]["count"]
    if "tau_ramp_list_ms" in config:
        plan["tau_points"] = len(config["tau_ramp_list_ms"])
    if "grid_hz" in config:
        plan["grid_points"] = len(config["grid_hz"])
    return plan


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_spectrum(config, out_dir, threads):
    params = params_from_config(config["params"])
    g = config["B_grid_khz"]
    grid = khz_to_angular(np.linspace(g["min"], g["max"], g["count"]))
    grid = np.where(grid == 0.0, 1e-9, grid)
    k = config.get("k", 6)
    outputs, diagnostics = [], {}
    for model in config.get("models", ["dicke", "lipkin"]):
        n_max = None
        if model == "dicke":
            block = config.get("n_max", {"policy": "auto"})
            n_max = block.get("value") if block.get("policy") == "fixed" else fock_cutoff(params)
            diagnostics[f"{model}_n_max"] = n_max
        curve = gap_curve(params, model, grid, k=k, n_max=n_max, threads=threads)
        rows = [
            (angular_to_khz(b), angular_to_khz(m), angular_to_khz(lo))
            for b, m, lo in zip(curve.B_grid, curve.main_gap, curve.low_gap)
        ]
        outputs.append(
            write_csv(
                os.path.join(out_dir, f"gap_curve_{model}.csv"),
                ["B_over_2pi_kHz", "main_gap_over_2pi_kHz", "low_gap_over_2pi_kHz"],
                rows,
            )
        )
        try:
            diagnostics[f"{model}_critical_field_khz"] = angular_to_khz(
                critical_field_estimate(curve)
            )
        except DickeRampError as exc:
            diagnostics[f"{model}_critical_field_khz"] = f"unavailable: {exc}"
    if "ratio_scan_delta_khz" in config:
        deltas = [khz_to_angular(d) for d in config["ratio_scan_delta_khz"]]
        res = gap_ratio_scan(abs(params.J), params.N, deltas, k=k)
        rows = [
            (angular_to_khz(d), r, angular_to_khz(diag["B_at_min"]), diag["n_max"])
            for d, r, diag in res
        ]
        outputs.append(
            write_csv(
                os.path.join(out_dir, "gap_ratio_scan.csv"),
                ["delta_over_2pi_kHz", "main_gap_ratio", "B_at_min_over_2pi_kHz", "n_max"],
                rows,
            )
        )
    return outputs, diagnostics


def cmd_ramp(config, out_dir, threads):
    params = params_from_config(config["params"])
    block = config["ramp"]
    count = config.get("sample_count", 513)
    outputs, diagnostics = [], {}
    for protocol in config.get("protocols", [block["protocol"]]):
        sched = schedule_from_config(params, block, protocol_override=protocol)
        times = np.linspace(0.0, sched.tau_ramp, count)
        values = sample_schedule(sched, times)
        outputs.append(
            write_csv(
                os.path.join(out_dir, f"ramp_{protocol}.csv"),
                ["t_ms", "B_over_2pi_kHz"],
                [(float(t), angular_to_khz(v)) for t, v in zip(times, values)],
            )
        )
        meta = {k: v for k, v in sched.meta.items()}
        meta["protocol"] = protocol
        diagnostics[protocol] = meta
    return outputs, diagnostics


def _series_rows(result):
    rows = []
    for i, t in enumerate(result.times):
        rows.append(
            (
                float(t),
                float(result.Sx[i]),
                float(result.Sy[i]),
                float(result.Sz[i]),
                float(result.abs_Sz[i]),
                float(result.n_mean[i]),
                float(result.parity[i].real),
                float(result.parity[i].imag),
                float(result.norm_drift[i]),
            )
        )
    return rows


_SERIES_HEADER = [
    "t_ms", "Sx", "Sy", "Sz", "absSz", "n_mean",
    "parity_re", "parity_im", "norm_drift",
]


def cmd_evolve(config, out_dir, threads):
    params = params_from_config(config["params"])
    model = config["model"]
    sched = schedule_from_config(params, config["ramp"])
    thermal = thermal_from_config(config)
    times = np.linspace(0.0, sched.tau_ramp, config.get("sample_count", 41))
    spec = EvolutionSpec(
        model=model, params=params, schedule=sched, thermal=thermal,
        sample_times=times, n_max=nmax_from_config(config, params, thermal),
    )
    result = evolve_thermal(spec, threads=threads)
    if "crude_dephasing_Gamma_el_per_s" in config:
        gamma = config["crude_dephasing_Gamma_el_per_s"] / 2.0 * 1e-3  # Gamma_el/2, 1/ms
        result = crude_dephasing(result, gamma)
    outputs = [
        write_csv(os.path.join(out_dir, "observables.csv"), _SERIES_HEADER,
                  _series_rows(result))
    ]
    n_snap = config.get("pmz_snapshots", 5)
    if n_snap:
        snap_idx = np.unique(np.linspace(0, len(times) - 1, n_snap).astype(int))
        m_values = np.arange(result.N + 1) - result.N / 2.0
        for i in snap_idx:
            rows = [(float(m), float(p)) for m, p in zip(m_values, result.P_Mz[i])]
            outputs.append(
                write_csv(
                    os.path.join(out_dir, f"pmz_t{result.times[i]:.4f}ms.csv"),
                    ["M_z", "P"], rows,
                )
            )
    fid = cat_fidelity(result, params)
    diagnostics = {
        "retained_mass": result.retained_mass,
        "n_branches": result.meta["n_branches"],
        "cutoffs": result.meta.get("cutoffs"),
        "top_level_population": result.meta.get("top_level_population"),
        "cat_fidelity_plus": fid["plus"],
        "cat_fidelity_minus": fid["minus"],
        "cat_fidelity_primary": fid["primary"],
        "final_abs_Sz": float(result.abs_Sz[-1]),
        "final_n_mean": float(result.n_mean[-1]),
        "max_norm_drift": float(result.norm_drift.max()),
    }
    return outputs, diagnostics


def cmd_qfi(config, out_dir, threads):
    params = params_from_config(config["params"])
    model = config.get("model", "dicke")
    block = config["ramp"]
    thermal = thermal_from_config(config)
    dec = None
    if "decoherence" in config:
        d = config["decoherence"]
        dec = DecoherenceParams.from_per_second(
            d.get("Gamma_el_per_s", 0.0), d.get("Gamma_ud_per_s", 0.0),
            d.get("Gamma_du_per_s", 0.0),
        )
    rows = []
    from .analysis import SpectralDecomposition, qfi_optimized as _qopt

    for tau in config["tau_ramp_list_ms"]:
        sched = schedule_from_config(params, block, tau_override=tau)
        spec = EvolutionSpec(
            model=model, params=params, schedule=sched, thermal=thermal,
            sample_times=np.array([0.0, tau]),
            n_max=nmax_from_config(config, params, thermal),
            uniform_cutoff=thermal.n_bar > 0,
        )
        if dec is not None:
            result = evolve_lindblad_lipkin(spec, dec)
            f_gs = result.meta["cat_fidelity"]["primary"]
            f_q = result.meta["qfi_optimized"]
        else:
            result = evolve_thermal(spec, threads=threads)
            f_gs = cat_fidelity(result, params)["primary"]
            if len(result.branch_finals) == 1:
                f_q, _ = _qopt(result.branch_finals[0])
            else:
                dec_state = SpectralDecomposition.from_ensemble(
                    result.branch_finals[0].basis, result.branch_finals,
                    result.branch_weights,
                )
                f_q, _ = _qopt(dec_state)
        rows.append((float(tau), float(f_gs), float(f_q / params.N)))
    outputs = [
        write_csv(os.path.join(out_dir, "fidelity_qfi_vs_tau.csv"),
                  ["tau_ramp_ms", "F_GS", "F_Q_over_N"], rows)
    ]
    return outputs, {"model": model, "lindblad": dec is not None}


def cmd_disentangle(config, out_dir, threads):
    params = params_from_config(config["params"])
    sched = schedule_from_config(params, config["ramp"])
    thermal = thermal_from_config(config)
    variant = config.get("variant", "quench_2delta")
    if config.get("ideal_cat_input", False):
        from .hilbert import ModeBasis, ProductBasis, SpinBasis
        from .models import cat_state_target

        n_max = nmax_from_config(config, params, thermal) or evolve_fock_cutoff(params)
        basis = ProductBasis(SpinBasis(params.N), ModeBasis(n_max))
        states, weights = [cat_state_target(params, basis)], [1.0]
    else:
        spec = EvolutionSpec(
            model="dicke", params=params, schedule=sched, thermal=thermal,
            sample_times=np.array([0.0, sched.tau_ramp]),
            n_max=nmax_from_config(config, params, thermal),
        )
        result = evolve_thermal(spec, threads=threads)
        states, weights = result.branch_finals, result.branch_weights
    _, report = disentangle(states, params, DisentangleSpec(variant), weights=weights)
    reduced = report.reduced.matrix
    m_values = np.arange(params.N + 1) - params.N / 2.0
    rows = [
        (float(m1), float(m2), float(reduced[i, j].real), float(reduced[i, j].imag))
        for i, m1 in enumerate(m_values)
        for j, m2 in enumerate(m_values)
    ]
    outputs = [
        write_csv(os.path.join(out_dir, "reduced_spin_state.csv"),
                  ["m_row", "m_col", "re", "im"], rows)
    ]
    diagnostics = {
        "variant": variant,
        "hold_time_ms": report.meta["hold_time"],
        "coherence": report.coherence,
        "residual_displacement": report.residual_displacement,
        "residual_occupation": report.residual_occupation,
    }
    return outputs, diagnostics


def cmd_bzscan(config, out_dir, threads):
    params = params_from_config(config["params"])
    sched = schedule_from_config(params, config["ramp"])
    mode = config.get("mode", "resilience")
    grid = hz_to_angular(np.asarray(config["grid_hz"], dtype=float))
    thermal = thermal_from_config(config)
    n_max = nmax_from_config(config, params, thermal)
    if mode == "resilience":
        curve = bz_resilience_scan(params, sched, grid, n_max=n_max,
                                   variant=config.get("variant", "quench_2delta"))
        rows = [(float(bz / hz_to_angular(1.0)), float(c)) for bz, c in curve]
        outputs = [
            write_csv(os.path.join(out_dir, "coherence_vs_bz.csv"),
                      ["Bz_over_2pi_Hz", "coherence"], rows)
        ]
        return outputs, {"mode": mode}
    offsets, sz, crossing = balance_scan(params, sched, grid, n_max=n_max)
    rows = [(float(o / hz_to_angular(1.0)), float(s)) for o, s in zip(offsets, sz)]
    outputs = [
        write_csv(os.path.join(out_dir, "sz_vs_offset.csv"),
                  ["offset_Hz", "Sz_mean"], rows)
    ]
    return outputs, {"mode": mode, "zero_crossing_hz": crossing / hz_to_angular(1.0)}


def cmd_benchmark(config, out_dir, threads):
    params = params_from_config(config["params"])
    model = config.get("model", "lipkin")
    n_max = config.get("n_max", {}).get("value")
    result = ising_benchmark(params, config["tau_max_ms"], model=model,
                             n_samples=config.get("sample_count", 161), n_max=n_max)
    rows = []
    for i, t in enumerate(result.times):
        from .hilbert import StateVector

        psi = StateVector(result.branch_finals[0].basis, result.sample_states[i])
        f_q, _ = qfi_optimized(psi)
        rows.append((float(t), float(f_q / params.N), float(result.Sx[i]),
                     float(result.abs_Sz[i]), float(result.n_mean[i])))
    outputs = [
        write_csv(os.path.join(out_dir, "ising_benchmark.csv"),
                  ["t_ms", "F_Q_over_N", "Sx", "absSz", "n_mean"], rows)
    ]
    peak = max(rows, key=lambda r: r[1])
    return outputs, {"model": model, "peak_F_Q_over_N": peak[1], "peak_t_ms": peak[0]}


COMMANDS = {
    "spectrum": cmd_spectrum,
    "ramp": cmd_ramp,
    "evolve": cmd_evolve,
    "qfi": cmd_qfi,
    "disentangle": cmd_disentangle,
    "bzscan": cmd_bzscan,
    "benchmark": cmd_benchmark,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dicke-ramp",
        description="Spin-boson adiabatic ramp simulations (batch driver)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", required=True, help="JSON scenario file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker processes (default ${ENV_THREADS} or 1)")
        p.add_argument("--dry-run", action="store_true",
                       help="validate and print the resolved plan, no compute")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get(ENV_THREADS, "1"))
    try:
        config = load_config(args.config, args.command)
        if args.dry_run:
            print(json.dumps(_resolve_plan(args.command, config), indent=2,
                             sort_keys=True, default=_json_default))
            return 0
        os.makedirs(args.out, exist_ok=True)
        start = time.time()
        outputs, diagnostics = COMMANDS[args.command](config, args.out, threads)
        write_manifest(args.out, args.command, config, outputs, diagnostics,
                       time.time() - start)
        for path in outputs:
            print(path)
        return 0
    except ConfigError as exc:
        _emit_error(exc)
        return 2
    except DickeRampError as exc:
        _emit_error(exc)
        return 3
    except OSError as exc:
        _emit_error(exc)
        return 4


def _emit_error(exc):
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
          file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
