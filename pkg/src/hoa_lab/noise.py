"""Wavefunction Monte-Carlo (quantum-trajectory) amplitude decay.

Each qubit decays at rate gamma through the lowering operator that takes
its |1> level to |0> (the sigma-minus = (X + iY)/2 convention; basis label
|1> is the decaying level).  One trajectory interleaves unitary substeps
with probabilistic jumps: per substep and qubit j the jump probability is
gamma * dtau * <n_j>, a jump applies the normalized lowering operator,
otherwise the state takes a unitary step followed by the diagonal no-jump
decay weight and renormalization.  First-order unraveling with a fixed
substep is accurate once gamma * dtau <= 1e-3, which the config enforces.

Trajectories evolve as rows of a batch so the substep unitary is one dense
matrix product; the noisy energy estimator reads each trajectory out
against the ideal reference state, exactly like the shot-sampling model.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .hamiltonian import PauliSum
from .hoa import HoaConfig, collapsed_imaginary_energy
from .measurement import OverlapEstimate, SampledEnergy, _split_shots, sampled_hoa_energy
from .statevector import Propagator, StateVector

__all__ = ["NoiseConfig", "NoisyEnergy", "mcwf_evolve", "noisy_hoa_energy"]

_BATCH = 4096


@dataclass(frozen=True)
class NoiseConfig:
    """Decay rate, trajectory integration substep, default ensemble size."""

    gamma: float
    substep: float = 1e-3
    n_trajectories: int = 1

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"decay rate must be >= 0, got {self.gamma}")
        if self.substep <= 0:
            raise ValueError(f"substep must be positive, got {self.substep}")
        if self.gamma * self.substep > 1e-3:
            raise ValueError(
                f"gamma * substep = {self.gamma * self.substep:.2e} > 1e-3; "
                "shrink the substep for a valid first-order unraveling"
            )
        if self.n_trajectories < 1:
            raise ValueError("need at least one trajectory")


@dataclass(frozen=True)
class NoisyEnergy(SampledEnergy):
    """Sampled energy plus trajectory jump statistics."""

    mean_jumps: float = 0.0


def _bit_table(n: int) -> np.ndarray:
    """(2^n, n) matrix of basis-index bits; column q is qubit q's occupation."""
    idx = np.arange(2**n, dtype=np.uint64)
    return np.stack(
        [((idx >> np.uint64(n - 1 - q)) & np.uint64(1)).astype(float) for q in range(n)],
        axis=1,
    )


def _mcwf_batch(p: Propagator, amps0: np.ndarray, t: float, cfg: NoiseConfig, rng, batch: int):
    """Evolve `batch` copies of amps0 for time t; returns (states, jump counts)."""
    n = p.n_qubits
    dim = 2**n
    amps = np.tile(amps0, (batch, 1)).astype(complex)
    jumps = np.zeros(batch, dtype=np.int64)
    if t == 0 or cfg.gamma == 0 and t >= 0:
        if t != 0:
            amps = amps @ p.step_matrix(t).T
        return amps, jumps
    if t < 0:
        raise ValueError(f"trajectories run forward in time only, got t = {t}")

    steps = max(1, ceil(t / cfg.substep))
    h = t / steps
    step_u = p.step_matrix(h).T
    bits = _bit_table(n)
    excitation = bits.sum(axis=1)
    no_jump_weight = np.exp(-(cfg.gamma * h / 2.0) * excitation)

    for _ in range(steps):
        populations = (np.abs(amps) ** 2) @ bits
        prob = cfg.gamma * h * populations
        total = prob.sum(axis=1)
        if np.any(total > 0.1):
            raise ValueError(
                f"total jump probability {total.max():.3f} > 0.1 per substep; "
                "shrink NoiseConfig.substep"
            )
        u = rng.random(batch)
        v = rng.random(batch)  # always drawn: deterministic stream layout
        jump_rows = np.flatnonzero(u < total)
        if jump_rows.size:
            cums = np.cumsum(prob[jump_rows], axis=1)
            marks = (v[jump_rows] * total[jump_rows])[:, None]
            qubit_pick = np.minimum((cums <= marks).sum(axis=1), p.n_qubits - 1)
            for q in np.unique(qubit_pick):
                rows = jump_rows[qubit_pick == q]
                bit = 1 << (n - 1 - q)
                lowered = np.flatnonzero((np.arange(dim) & bit) == 0)
                upper = lowered | bit
                block = amps[rows]
                block[:, lowered] = block[:, upper]
                block[:, upper] = 0.0
                block /= np.linalg.norm(block, axis=1)[:, None]
                amps[rows] = block
            jumps[jump_rows] += 1
        keep = np.ones(batch, dtype=bool)
        keep[jump_rows] = False
        if keep.any():
            block = amps[keep] @ step_u
            block *= no_jump_weight
            block /= np.linalg.norm(block, axis=1)[:, None]
            amps[keep] = block
    return amps, jumps


def mcwf_evolve(
    p: Propagator, psi: StateVector, t: float, cfg: NoiseConfig, rng
) -> tuple[StateVector, int]:
    """One stochastic trajectory of noisy evolution; returns (state, jump count)."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    amps, jumps = _mcwf_batch(p, psi.amplitudes, t, cfg, rng, 1)
    out = amps[0]
    out = out / np.linalg.norm(out)
    return StateVector(psi.n_qubits, out), int(jumps[0])


def noisy_hoa_energy(
    h: PauliSum,
    psi: StateVector,
    cfg_hoa: HoaConfig,
    cfg_noise: NoiseConfig,
    shots: int,
    rng,
    propagator: Propagator = None,
) -> NoisyEnergy:
    """Sampled HOA energy where every shot propagates a fresh noisy trajectory.

    The bra side of each overlap stays the ideal reference state; only the
    propagated branch is corrupted, so collapsed trajectories feed erroneous
    overlap readings into the 1/dt-weighted stencil sum.  gamma = 0 reduces
    exactly to sampled_hoa_energy (same readout draws, no trajectory draws).
    """
    scheme = cfg_hoa.scheme
    if not scheme.is_symmetric or scheme.order != 1:
        raise ValueError("noisy energy estimation uses symmetric first-derivative schemes")
    if cfg_noise.gamma == 0:
        base = sampled_hoa_energy(h, psi, cfg_hoa, shots, rng, propagator)
        return NoisyEnergy(base.energy, base.std_error, base.overlaps, base.shots_total, 0.0)
    if shots < 1:
        raise ValueError(f"need at least one shot, got {shots}")

    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    prop = propagator if propagator is not None else Propagator(h)
    reference = psi.amplitudes.conj()

    positive = scheme.positive_offset_pairs()
    shot_split = _split_shots(shots, len(positive))
    children = rng.spawn(len(positive))
    estimates = []
    im_by_offset = {}
    var_terms = []
    total_jumps = 0
    for (n, q), n_shots, child in zip(positive, shot_split, children):
        t = n * cfg_hoa.dt
        z_hits = 0
        done = 0
        while done < n_shots:
            batch = min(_BATCH, n_shots - done)
            states, jumps = _mcwf_batch(prop, psi.amplitudes, t, cfg_noise, child, batch)
            total_jumps += int(jumps.sum())
            overlaps = states @ reference
            p_one = np.clip((1.0 - overlaps.imag) / 2.0, 0.0, 1.0)
            z_hits += int(np.sum(child.random(batch) < p_one))
            done += batch
        z_mean = 2.0 * z_hits / n_shots - 1.0
        im_hat = -z_mean
        var = (1.0 - im_hat**2) / n_shots
        estimates.append(OverlapEstimate(0.0, im_hat, 0, n_shots, var))
        im_by_offset[n] = im_hat
        var_terms.append((2.0 * float(q) / cfg_hoa.dt) ** 2 * var)
    energy = collapsed_imaginary_energy(scheme, cfg_hoa.dt, im_by_offset)
    return NoisyEnergy(
        energy,
        float(np.sqrt(sum(var_terms))),
        tuple(estimates),
        shots,
        total_jumps / shots,
    )
