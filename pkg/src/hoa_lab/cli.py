"""Experiment runner: named figure recipes, flat config files, CSV output.

Config files are UTF-8 text, one 'section.key = value' per line, '#'
comments.  Values are scalars or comma-separated lists; grids are
'min:max:count' log-spaced triples.  Every stochastic recipe requires an
explicit seed, and each CSV embeds the fully resolved configuration as
'# key = value' metadata lines, so a run is reproducible from its output
alone.

    hoa-lab run <recipe> --config <path> [--scale desk|paper] [--seed N] [--out path]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .hamiltonian import (
    PauliSum,
    heisenberg,
    hubbard_2x2_jw,
    load_pauli_file,
    spectral_bound,
    to_dense,
)
from .hoa import HoaConfig, error_budget, hoa_expectation
from .ground_solvers import (
    DirectIterationConfig,
    QfdConfig,
    direct_iteration,
    qfd_build,
    solve_generalized,
)
from .measurement import sampled_hoa_energy
from .noise import NoiseConfig, noisy_hoa_energy
from .statevector import Propagator, StateVector, basis_state, expectation, uniform_state
from .stencil import stencil_coefficients, truncation_constant
from .trotter import HeisenbergParams, trotterized_hoa_energy
from .vqe import vqe_run

__all__ = ["main", "run", "validate", "ConfigError", "ExperimentConfig", "RECIPES"]

STOCHASTIC_RECIPES = {"shots-sweep", "noise-sweep", "vqe-compare"}


class ConfigError(ValueError):
    """Aggregated, path-qualified configuration problems."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved recipe configuration."""

    recipe: str
    scale: str
    seed: int | None
    out: str
    values: dict


def _parse_config_text(text: str, origin: str = "<config>") -> dict:
    values = {}
    problems = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"{origin}:{lineno}: expected 'key = value', got {raw!r}")
            continue
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    if problems:
        raise ConfigError(problems)
    return values


def _coerce(kind: str, raw):
    if isinstance(raw, str):
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "int_list":
            return [int(x) for x in raw.split(",") if x.strip()]
        if kind == "float_list":
            return [float(x) for x in raw.split(",") if x.strip()]
        if kind == "log_grid":
            lo, hi, count = raw.split(":")
            return [float(lo), float(hi), int(count)]
        return raw
    return raw


# recipe -> key -> (type, desk default, paper default); None means required
_COMMON_MODEL = {
    "model.kind": ("str", "heisenberg", "heisenberg"),
    "model.n": ("int", 8, 13),
    "model.j": ("float", 1.0, 1.0),
    "model.h": ("float", 0.1, 0.1),
    "model.boundary": ("str", "open", "open"),
    "model.antiferromagnetic": ("bool", False, False),
    "model.u": ("float", 1.0, 1.0),
    "model.mu": ("float", 0.05, 0.05),
    "model.field": ("float", 0.001, 0.001),
    "model.path": ("str", "", ""),
}

RECIPES: dict[str, dict] = {
    "dt-sweep": {
        **_COMMON_MODEL,
        "hoa.points_list": ("int_list", [3, 5, 7, 9], [3, 5, 7, 9]),
        "hoa.dt_grid": ("log_grid", [0.01, 1.0, 13], [0.001, 1.0, 25]),
        "state.reference": ("str", "uniform", "uniform"),
    },
    "shots-sweep": {
        **_COMMON_MODEL,
        "hoa.points": ("int", 5, 5),
        "hoa.dt": ("float", 0.5, 0.5),
        "measurement.n_meas_grid": ("log_grid", [1e3, 1e7, 5], [1e3, 1e9, 7]),
        "measurement.repeats": ("int", 150, 150),
        "state.reference": ("str", "uniform", "uniform"),
    },
    "noise-sweep": {
        **_COMMON_MODEL,
        "model.n": ("int", 4, 8),
        "hoa.points": ("int", 5, 5),
        "hoa.dt_list": ("float_list", [0.05, 0.1, 0.2, 0.5, 2.0], [0.05, 0.1, 0.2, 0.5, 1.0, 2.0]),
        "measurement.shots": ("int", 100000, 1000000000),
        "measurement.repeats": ("int", 3, 50),
        "noise.gamma": ("float", 0.1, 0.1),
        "noise.substep": ("float", 0.01, 0.01),
        "state.reference": ("str", "uniform", "uniform"),
    },
    "direct-iter": {
        **_COMMON_MODEL,
        "model.n": ("int", 6, 6),
        "model.h": ("float", 1.0, 1.0),
        "model.antiferromagnetic": ("bool", True, True),
        "hoa.points": ("int", 5, 5),
        "hoa.dt": ("float", 10**-1.75, 10**-1.75),
        "solver.iterations": ("int", 6, 10),
        "solver.shift": ("float", 0.0, 0.0),
        "state.reference": ("str", "neel", "neel"),
    },
    "qfd": {
        **_COMMON_MODEL,
        "model.kind": ("str", "hubbard", "hubbard"),
        "model.j": ("float", 0.1, 0.1),
        "hoa.points": ("int", 5, 5),
        "hoa.dt": ("float", 0.01, 0.01),
        "solver.k_max": ("int", 4, 10),
        "solver.kappa": ("float", 0.0, 0.0),  # 0 -> Gershgorin auto-fill
        "solver.threshold": ("float", 1e-12, 1e-12),
        "state.reference": ("str", "uniform", "uniform"),
    },
    "vqe-compare": {
        **_COMMON_MODEL,
        "model.n": ("int", 6, 14),
        "model.h": ("float", 1.0, 1.0),
        "model.boundary": ("str", "ring", "ring"),
        "model.antiferromagnetic": ("bool", True, True),
        "vqe.layout": ("str", "HEA", "HEA"),
        "vqe.depths": ("int_list", [2, 4, 6], [20, 60, 100]),
        "vqe.iterations": ("int", 300, 3000),
        "vqe.learning_rate": ("float", 0.001, 0.001),
    },
    "trotter-error": {
        **_COMMON_MODEL,
        "model.n": ("int", 5, 13),
        "model.boundary": ("str", "ring", "ring"),
        "hoa.points": ("int", 25, 25),
        "hoa.dt": ("float", 0.1, 0.1),
        "backend.r_list": ("int_list", [1, 2, 4, 8], [1, 2, 5, 10]),
        "state.reference": ("str", "uniform", "uniform"),
    },
    "stencil-table": {
        "stencil.points_list": ("int_list", [5], [25]),
        "stencil.order": ("int", 1, 1),
    },
    "error-budget": {
        **_COMMON_MODEL,
        "hoa.points_list": ("int_list", [3, 5, 7], [3, 5, 7, 9, 25]),
        "hoa.dt_grid": ("log_grid", [1e-8, 1.0, 17], [1e-10, 1.0, 41]),
        "budget.eps_machine": ("float", 1e-16, 1e-16),
        "budget.norm_method": ("str", "coefficient_sum", "coefficient_sum"),
    },
}


def validate(recipe: str, raw_values: dict, scale: str = "desk", seed=None, out: str = "") -> ExperimentConfig:
    """Type-check, default, and cross-validate a raw key-value mapping."""
    problems = []
    if recipe not in RECIPES:
        raise ConfigError([f"unknown recipe {recipe!r}; choose from {sorted(RECIPES)}"])
    if scale not in ("desk", "paper"):
        raise ConfigError([f"run.scale: must be 'desk' or 'paper', got {scale!r}"])
    schema = RECIPES[recipe]
    values = {}
    for key, (kind, desk, paper) in schema.items():
        values[key] = desk if scale == "desk" else paper
    for key, raw in raw_values.items():
        if key in ("run.seed", "run.out", "run.scale"):
            continue
        if key not in schema:
            problems.append(f"{key}: unknown key for recipe {recipe}")
            continue
        try:
            values[key] = _coerce(schema[key][0], raw)
        except (ValueError, TypeError) as exc:
            problems.append(f"{key}: {exc}")
    if "run.seed" in raw_values:
        try:
            seed = int(raw_values["run.seed"]) if seed is None else seed
        except ValueError:
            problems.append(f"run.seed: not an integer: {raw_values['run.seed']!r}")
    if "run.out" in raw_values and not out:
        out = str(raw_values["run.out"])
    if "run.scale" in raw_values:
        pass  # scale is resolved before defaults apply; CLI flag wins

    if recipe in STOCHASTIC_RECIPES and seed is None:
        problems.append("run.seed: required for stochastic recipes")
    if values.get("model.kind") == "file" and not values.get("model.path"):
        problems.append("model.path: required when model.kind = file")
    if values.get("model.kind", "heisenberg") not in ("heisenberg", "hubbard", "file"):
        problems.append(f"model.kind: unknown model {values['model.kind']!r}")
    points = values.get("hoa.points")
    if points is not None and points % 2 == 0:
        problems.append(
            f"hoa.points: symmetric shift (S-1)/2 needs odd S, got {points}"
        )
    if problems:
        raise ConfigError(problems)
    if not out:
        out = f"{recipe}.csv"
    return ExperimentConfig(recipe, scale, seed, out, values)


def _build_model(values: dict) -> PauliSum:
    kind = values["model.kind"]
    if kind == "heisenberg":
        return heisenberg(
            values["model.n"], values["model.j"], values["model.h"],
            values["model.boundary"],
            antiferromagnetic=values["model.antiferromagnetic"],
        )
    if kind == "hubbard":
        return hubbard_2x2_jw(
            values["model.u"], values["model.j"], values["model.mu"], values["model.field"]
        )
    return load_pauli_file(values["model.path"])


def _reference_state(values: dict, n: int) -> StateVector:
    ref = values.get("state.reference", "uniform")
    if ref == "uniform":
        return uniform_state(n)
    if ref == "neel":
        return basis_state(n, "".join("01"[q % 2] for q in range(n)))
    if ref.startswith("basis:"):
        return basis_state(n, ref.split(":", 1)[1])
    raise ConfigError([f"state.reference: unknown reference {ref!r}"])


def _log_grid(spec) -> np.ndarray:
    lo, hi, count = spec
    return np.logspace(np.log10(lo), np.log10(hi), int(count))


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: str, cfg: ExperimentConfig, header: list[str], rows, extra_meta=()):
    lines = [f"# version = {__version__}", f"# recipe = {cfg.recipe}", f"# scale = {cfg.scale}"]
    if cfg.seed is not None:
        lines.append(f"# seed = {cfg.seed}")
    for key in sorted(cfg.values):
        lines.append(f"# {key} = {_fmt(cfg.values[key])}")
    for item in extra_meta:
        lines.append(f"# {item}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _run_dt_sweep(cfg: ExperimentConfig) -> list[str]:
    v = cfg.values
    h = _build_model(v)
    psi = _reference_state(v, h.n_qubits)
    e_true = expectation(h, psi)
    prop = Propagator(h)
    weights = np.abs(prop.to_eigenbasis(psi.amplitudes)) ** 2
    rows = []
    for points in v["hoa.points_list"]:
        scheme = stencil_coefficients(points, (points - 1) // 2, 1)
        for dt in _log_grid(v["hoa.dt_grid"]):
            est = hoa_expectation(
                h, psi, HoaConfig(scheme, float(dt)),
                overlap_fn=lambda t: complex(np.sum(weights * np.exp(-1j * prop.eigenvalues * t))),
            )
            rows.append((points, float(dt), est.real, abs(est.real - e_true)))
    _write_csv(cfg.out, cfg, ["S", "dt", "energy", "delta_e"], rows,
               extra_meta=[f"true_energy = {e_true!r}"])
    return [cfg.out]


def _run_shots_sweep(cfg: ExperimentConfig) -> list[str]:
    v = cfg.values
    h = _build_model(v)
    psi = _reference_state(v, h.n_qubits)
    e_true = expectation(h, psi)
    scheme = stencil_coefficients(v["hoa.points"], (v["hoa.points"] - 1) // 2, 1)
    hoa_cfg = HoaConfig(scheme, v["hoa.dt"])
    prop = Propagator(h)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for n_meas in _log_grid(v["measurement.n_meas_grid"]):
        shots = int(round(n_meas))
        for repeat in range(v["measurement.repeats"]):
            res = sampled_hoa_energy(h, psi, hoa_cfg, shots, rng, prop)
            rows.append((shots, repeat, res.energy, abs(res.energy - e_true), res.std_error))
    _write_csv(cfg.out, cfg, ["n_meas", "repeat", "energy", "delta_e", "std_error"], rows,
               extra_meta=[f"true_energy = {e_true!r}"])
    return [cfg.out]


def _run_noise_sweep(cfg: ExperimentConfig) -> list[str]:
    v = cfg.values
    h = _build_model(v)
    psi = _reference_state(v, h.n_qubits)
    e_true = expectation(h, psi)
    scheme = stencil_coefficients(v["hoa.points"], (v["hoa.points"] - 1) // 2, 1)
    prop = Propagator(h)
    rng = np.random.default_rng(cfg.seed)
    noise_cfg = NoiseConfig(v["noise.gamma"], v["noise.substep"])
    rows = []
    for dt in v["hoa.dt_list"]:
        hoa_cfg = HoaConfig(scheme, float(dt))
        for repeat in range(v["measurement.repeats"]):
            res = noisy_hoa_energy(
                h, psi, hoa_cfg, noise_cfg, v["measurement.shots"], rng, prop
            )
            rows.append(
                (float(dt), repeat, res.energy, abs(res.energy - e_true), res.mean_jumps)
            )
    _write_csv(cfg.out, cfg, ["dt", "repeat", "energy", "delta_e", "mean_jumps"], rows,
               extra_meta=[f"true_energy = {e_true!r}"])
    return [cfg.out]


def _run_direct_iter(cfg: ExperimentConfig) -> list[str]:
    v = cfg.values
    h = _build_model(v)
    psi0 = _reference_state(v, h.n_qubits)
    e_ground = float(np.linalg.eigvalsh(to_dense(h))[0])
    scheme = stencil_coefficients(v["hoa.points"], (v["hoa.points"] - 1) // 2, 1)
    hoa_cfg = HoaConfig(scheme, v["hoa.dt"])
    k = v["solver.iterations"]
    res_exact = direct_iteration(h, psi0, DirectIterationConfig(k, "exact", shift=v["solver.shift"]))
    res_hoa = direct_iteration(h, psi0, DirectIterationConfig(k, "hoa", hoa_cfg, v["solver.shift"]))
    rows = []
    for i in range(k + 1):
        rows.append(
            (
                i,
                res_exact.energies[i],
                res_hoa.energies[i],
                res_hoa.hoa_energies[i],
                abs(res_exact.energies[i] - e_ground),
                abs(res_hoa.energies[i] - e_ground),
            )
        )
    _write_csv(
        cfg.out, cfg,
        ["iteration", "energy_exact_mode", "energy_hoa_mode", "hoa_estimate",
         "error_exact_mode", "error_hoa_mode"],
        rows, extra_meta=[f"ground_energy = {e_ground!r}"],
    )
    return [cfg.out]


def _run_qfd(cfg: ExperimentConfig) -> list[str]:
    v = cfg.values
    h = _build_model(v)
    psi = _reference_state(v, h.n_qubits)
    e_ground = float(np.linalg.eigvalsh(to_dense(h))[0])
    kappa = v["solver.kappa"]
    kappa_source = "config"
    if kappa <= 0:
        kappa = spectral_bound(h, "gershgorin").kappa
        kappa_source = "gershgorin"
    scheme = stencil_coefficients(v["hoa.points"], (v["hoa.points"] - 1) // 2, 1)
    hoa_cfg = HoaConfig(scheme, v["hoa.dt"])
    prop = Propagator(h)
    rows = []
    for k_max in range(v["solver.k_max"] + 1):
        out = {}
        for mode in ("exact", "hoa"):
            qcfg = QfdConfig(
                k_max, kappa, (psi,), mode,
                hoa_cfg if mode == "hoa" else None, v["solver.threshold"],
            )
            hm, sm = qfd_build(h, qcfg, prop)
            out[mode] = solve_generalized(hm, sm, v["solver.threshold"])
        rows.append(
            (
                k_max,
                out["exact"].ground_energy,
                out["hoa"].ground_energy,
                out["exact"].ground_energy - e_ground,
                out["hoa"].ground_energy - e_ground,
                out["exact"].retained_dim,
                out["hoa"].retained_dim,
            )
        )
    _write_csv(
        cfg.out, cfg,
        ["k_max", "energy_exact", "energy_hoa", "error_exact", "error_hoa",
         "retained_exact", "retained_hoa"],
        rows,
        extra_meta=[f"ground_energy = {e_ground!r}", f"kappa = {kappa!r} ({kappa_source})"],
    )
    return [cfg.out]


def _run_vqe_compare(cfg: ExperimentConfig) -> list[str]:
    v = cfg.values
    h = _build_model(v)
    e_ground = float(np.linalg.eigvalsh(to_dense(h))[0])
    rows = []
    for depth in v["vqe.depths"]:
        res = vqe_run(
            h, v["vqe.layout"], depth, v["vqe.iterations"], cfg.seed,
            v["vqe.learning_rate"], v["model.boundary"],
        )
        for i, e in enumerate(res.energies):
            grad = res.gradient_norms[i - 1] if i > 0 else float("nan")
            rows.append((v["vqe.layout"], depth, i, e, grad, res.gate_count))
    _write_csv(
        cfg.out, cfg,
        ["layout", "depth", "iteration", "energy", "grad_norm", "gate_count"],
        rows, extra_meta=[f"ground_energy = {e_ground!r}"],
    )
    return [cfg.out]


def _run_trotter_error(cfg: ExperimentConfig) -> list[str]:
    v = cfg.values
    params = HeisenbergParams(
        v["model.n"], v["model.j"], v["model.h"], v["model.boundary"],
        antiferromagnetic=v["model.antiferromagnetic"],
    )
    h = params.to_pauli_sum()
    psi = _reference_state(v, h.n_qubits)
    e_true = expectation(h, psi)
    scheme = stencil_coefficients(v["hoa.points"], (v["hoa.points"] - 1) // 2, 1)
    hoa_cfg = HoaConfig(scheme, v["hoa.dt"])
    e_hoa = hoa_expectation(h, psi, hoa_cfg).real
    rows = []
    for r in v["backend.r_list"]:
        e_trot = trotterized_hoa_energy(params, psi, hoa_cfg, r).real
        rows.append(
            (v["model.n"], r, e_trot, e_hoa, e_true,
             abs(e_trot - e_hoa), abs(e_hoa - e_true))
        )
    _write_csv(
        cfg.out, cfg,
        ["n", "r", "e_trotter_hoa", "e_exact_hoa", "e_true", "trotter_vs_hoa", "hoa_vs_true"],
        rows,
    )
    return [cfg.out]


def _run_stencil_table(cfg: ExperimentConfig) -> list[str]:
    v = cfg.values
    rows = []
    for points in v["stencil.points_list"]:
        scheme = stencil_coefficients(points, (points - 1) // 2, v["stencil.order"])
        for n, q in zip(scheme.offsets, scheme.coefficients):
            rows.append((points, scheme.shift, scheme.order, n, str(q), float(q)))
    _write_csv(
        cfg.out, cfg,
        ["S", "shift", "k", "offset", "coefficient", "coefficient_float"],
        rows,
    )
    return [cfg.out]


def _run_error_budget(cfg: ExperimentConfig) -> list[str]:
    v = cfg.values
    h = _build_model(v)
    rows = []
    meta = []
    for points in v["hoa.points_list"]:
        scheme = stencil_coefficients(points, (points - 1) // 2, 1)
        for dt in _log_grid(v["hoa.dt_grid"]):
            budget = error_budget(
                h, HoaConfig(scheme, float(dt)),
                v["budget.eps_machine"], v["budget.norm_method"],
            )
            rows.append((points, float(dt), budget.eps_appr, budget.eps_num, budget.eps_total))
        meta.append(f"dt_star_S{points} = {budget.dt_star!r}")
    _write_csv(cfg.out, cfg, ["S", "dt", "eps_appr", "eps_num", "eps_total"], rows, meta)
    return [cfg.out]


_RUNNERS = {
    "dt-sweep": _run_dt_sweep,
    "shots-sweep": _run_shots_sweep,
    "noise-sweep": _run_noise_sweep,
    "direct-iter": _run_direct_iter,
    "qfd": _run_qfd,
    "vqe-compare": _run_vqe_compare,
    "trotter-error": _run_trotter_error,
    "stencil-table": _run_stencil_table,
    "error-budget": _run_error_budget,
}


def run(cfg: ExperimentConfig) -> list[str]:
    """Execute a validated recipe; returns the list of files written."""
    return _RUNNERS[cfg.recipe](cfg)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hoa-lab",
        description="Propagator-stencil energy measurement and ground-state experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run a named experiment recipe")
    runp.add_argument("recipe", help=f"one of {', '.join(sorted(RECIPES))}")
    runp.add_argument("--config", help="flat key = value config file")
    runp.add_argument("--scale", choices=("desk", "paper"), default="desk")
    runp.add_argument("--seed", type=int)
    runp.add_argument("--out", default="")
    args = parser.parse_args(argv)

    try:
        raw = {}
        if args.config:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = _parse_config_text(fh.read(), origin=args.config)
        scale = raw.get("run.scale", args.scale) if args.scale == "desk" else args.scale
        cfg = validate(args.recipe, raw, scale, args.seed, args.out)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        files = run(cfg)
    except Exception as exc:  # noqa: BLE001 - runner failures map to exit 3
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    for path in files:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
