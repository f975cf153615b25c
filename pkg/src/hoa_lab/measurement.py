"""Shot-sampled overlap estimation modeling the ancilla Hadamard/SWAP test.

The readout circuit prepares (|psi>|0> + i U|psi>|1>)/sqrt(2) and measures
the ancilla in Z, whose expectation is -Im <psi|U|psi>; dropping the i
phase gives the real part instead.  The ancilla statistics are sampled
analytically (binomial on the exact outcome probability) rather than by
simulating the N+1-qubit circuit amplitude by amplitude: statistically
identical and exponentially cheaper.

For symmetric first-derivative stencils the energy needs only the
imaginary parts of the positive-offset overlaps, which halves the shot
cost; sampled_hoa_energy uses that collapsed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import PauliSum
from .hoa import HoaConfig, collapsed_imaginary_energy, hoa_expectation
from .statevector import Propagator, StateVector

__all__ = ["OverlapEstimate", "SampledEnergy", "sample_overlap_part", "sampled_hoa_energy"]


@dataclass(frozen=True)
class OverlapEstimate:
    """Estimated complex overlap with shot counts and readout variance."""

    re: float
    im: float
    shots_re: int
    shots_im: int
    variance_im: float

    @staticmethod
    def exact(value: complex) -> "OverlapEstimate":
        return OverlapEstimate(value.real, value.imag, 0, 0, 0.0)


@dataclass(frozen=True)
class SampledEnergy:
    """Energy assembled from sampled overlaps, with propagated standard error."""

    energy: float
    std_error: float
    overlaps: tuple
    shots_total: int


def _sample_z(z_expectation: float, shots: int, rng) -> float:
    """Empirical <Z> from `shots` Bernoulli outcomes with p = (1 + <Z>)/2."""
    p = float(np.clip((1.0 + z_expectation) / 2.0, 0.0, 1.0))
    hits = rng.binomial(shots, p)
    return 2.0 * hits / shots - 1.0


def sample_overlap_part(true_overlap: complex, part: str, shots: int, rng) -> float:
    """Sampled Re or Im of an overlap through the ancilla Z readout."""
    if shots < 1:
        raise ValueError(f"need at least one shot, got {shots}")
    if abs(true_overlap) > 1.0 + 1e-9:
        raise ValueError(f"|overlap| = {abs(true_overlap)} exceeds 1")
    if part == "im":
        return -_sample_z(-true_overlap.imag, shots, rng)
    if part == "re":
        return _sample_z(true_overlap.real, shots, rng)
    raise ValueError(f"part must be 're' or 'im', got {part!r}")


def _split_shots(total: int, ways: int) -> list[int]:
    base, extra = divmod(total, ways)
    return [base + (1 if i < extra else 0) for i in range(ways)]


def sampled_hoa_energy(
    h: PauliSum,
    psi: StateVector,
    cfg: HoaConfig,
    shots_total: int | None,
    rng,
    propagator: Propagator = None,
) -> SampledEnergy:
    """Shot-noise-aware energy -(2/dt) sum_{n>0} q_n Im<psi|U(n dt)|psi>.

    shots_total is split equally over the unique positive-offset overlaps,
    each sampled with an independently spawned child generator so overlaps
    may also be evaluated concurrently.  shots_total=None bypasses sampling
    and reproduces hoa_expectation exactly.

    Non-symmetric schemes fall back to sampling both quadratures of every
    non-zero offset with an even split (the n = 0 overlap is identically 1
    and never sampled).
    """
    scheme = cfg.scheme
    if scheme.order != 1:
        raise ValueError("energy sampling needs a first-derivative scheme")
    prop = propagator if propagator is not None else Propagator(h)
    coeffs = prop.to_eigenbasis(psi.amplitudes)
    weights = np.abs(coeffs) ** 2

    def exact_overlap(t: float) -> complex:
        return complex(np.sum(weights * np.exp(-1j * prop.eigenvalues * t)))

    if shots_total is None:
        estimate = hoa_expectation(h, psi, cfg, overlap_fn=exact_overlap)
        overlaps = tuple(
            OverlapEstimate.exact(exact_overlap(n * cfg.dt))
            for n in scheme.offsets
            if n != 0
        )
        return SampledEnergy(estimate.real, 0.0, overlaps, 0)
    if shots_total < 1:
        raise ValueError(f"need at least one shot, got {shots_total}")

    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng

    if scheme.is_symmetric:
        positive = scheme.positive_offset_pairs()
        shot_split = _split_shots(shots_total, len(positive))
        children = rng.spawn(len(positive))
        estimates = []
        im_by_offset = {}
        var_terms = []
        for (n, q), shots, child in zip(positive, shot_split, children):
            o = exact_overlap(n * cfg.dt)
            im_hat = sample_overlap_part(o, "im", shots, child)
            var = (1.0 - im_hat**2) / shots
            estimates.append(OverlapEstimate(0.0, im_hat, 0, shots, var))
            im_by_offset[n] = im_hat
            var_terms.append((2.0 * float(q) / cfg.dt) ** 2 * var)
        energy = collapsed_imaginary_energy(scheme, cfg.dt, im_by_offset)
        return SampledEnergy(energy, float(np.sqrt(sum(var_terms))), tuple(estimates), shots_total)

    # general fallback: both quadratures, even split over non-zero offsets
    offsets = [(n, q) for n, q in zip(scheme.offsets, scheme.coefficients_float) if n != 0]
    shot_split = _split_shots(shots_total, 2 * len(offsets))
    children = rng.spawn(len(offsets))
    estimates = []
    energy = 0.0
    var_terms = []
    for i, ((n, q), child) in enumerate(zip(offsets, children)):
        o = exact_overlap(n * cfg.dt)
        shots_im, shots_re = shot_split[2 * i], shot_split[2 * i + 1]
        im_hat = sample_overlap_part(o, "im", shots_im, child)
        re_hat = sample_overlap_part(o, "re", shots_re, child)
        var = (1.0 - im_hat**2) / shots_im
        estimates.append(OverlapEstimate(re_hat, im_hat, shots_re, shots_im, var))
        energy += -q / cfg.dt * im_hat
        var_terms.append((q / cfg.dt) ** 2 * var)
    # the n = 0 offset contributes -q_0/dt * Im(1) = 0 and is never sampled
    return SampledEnergy(energy, float(np.sqrt(sum(var_terms))), tuple(estimates), shots_total)
