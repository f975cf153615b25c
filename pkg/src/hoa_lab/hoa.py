"""Differential representation of H as a stencil combination of propagators.

The k-th derivative of U(t) = exp(-iHt) at t = 0 equals (-iH)^k, so a
finite-difference scheme over the grid t = n*dt turns products of
propagators into an operator approximation

    H^k ~ 1/(-i dt)^k * sum_n q_n U(n dt)

and expectation values into weighted sums of overlaps <psi|psi(n dt)>.
For symmetric first-derivative schemes the real parts of the overlaps
cancel exactly and the energy collapses to -(2/dt) sum_{n>0} q_n Im O_n,
which is the form a Hadamard-test measurement estimates directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import PauliSum, to_dense
from .statevector import Propagator, StateVector
from .stencil import StencilScheme, truncation_constant

__all__ = [
    "HoaConfig",
    "ErrorBudget",
    "hoa_expectation",
    "hoa_power_expectation",
    "hoa_apply",
    "error_budget",
    "collapsed_imaginary_energy",
]


@dataclass(frozen=True)
class HoaConfig:
    """Stencil scheme + time step + propagation backend descriptor.

    backend is metadata for reporting: 'exact' uses the cached
    eigendecomposition; Trotterized propagation is wired in through the
    trotter module, which substitutes compiled circuits for each time point.
    """

    scheme: StencilScheme
    dt: float
    backend: str = "exact"
    trotter_steps: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        if self.backend not in ("exact", "trotter"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == "trotter" and self.trotter_steps < 1:
            raise ValueError("trotter backend needs at least one step")

    @property
    def max_propagation_phase(self) -> float:
        """T = S * dt, the complexity figure reported with every result."""
        return self.scheme.points * self.dt


@dataclass(frozen=True)
class ErrorBudget:
    """Truncation + round-off error split and its minimizing time step."""

    eps_appr: float
    eps_num: float
    eps_total: float
    dt_star: float


def _overlap_table(h: PauliSum, psi: StateVector, cfg: HoaConfig, overlap_fn=None):
    """<psi|U(n dt)|psi> for every stencil offset n."""
    if overlap_fn is None:
        prop = Propagator(h)
        coeffs = prop.to_eigenbasis(psi.amplitudes)
        weights = np.abs(coeffs) ** 2

        def overlap_fn(t: float) -> complex:
            return complex(np.sum(weights * np.exp(-1j * prop.eigenvalues * t)))

    return [overlap_fn(n * cfg.dt) for n in cfg.scheme.offsets]


def hoa_expectation(h: PauliSum, psi: StateVector, cfg: HoaConfig, overlap_fn=None) -> complex:
    """(i/dt) sum_n q_n <psi|psi(n dt)>.

    The real part is the energy estimate; the imaginary part is returned as
    a diagnostic (zero up to round-off for symmetric schemes on the exact
    backend, informative under shot noise or Trotterization).  overlap_fn
    (t -> complex) substitutes a different propagation backend.
    """
    if cfg.scheme.order != 1:
        raise ValueError(
            f"energy estimation needs a first-derivative scheme, got k={cfg.scheme.order}"
        )
    overlaps = _overlap_table(h, psi, cfg, overlap_fn)
    weights = cfg.scheme.coefficients_float
    return complex(1j / cfg.dt * np.dot(weights, overlaps))


def hoa_power_expectation(
    h: PauliSum, psi: StateVector, cfg: HoaConfig, k: int, overlap_fn=None
) -> complex:
    """<psi|H^k|psi> estimate via the k-th derivative scheme.

    Needs cfg.scheme built for derivative order k (k < S); k = 2 gives the
    variance through <H^2> - <H>^2.
    """
    if k >= cfg.scheme.points:
        raise ValueError(f"power k={k} needs more than {cfg.scheme.points} stencil points")
    if cfg.scheme.order != k:
        raise ValueError(f"scheme solves order {cfg.scheme.order}, requested power {k}")
    overlaps = _overlap_table(h, psi, cfg, overlap_fn)
    weights = cfg.scheme.coefficients_float
    return complex(np.dot(weights, overlaps) / (-1j * cfg.dt) ** k)


def hoa_apply(h: PauliSum, psi: StateVector, cfg: HoaConfig, propagator: Propagator = None):
    """(i/dt) sum_n q_n U(n dt)|psi>, an unnormalized amplitude vector.

    Approaches H|psi> at the scheme's order as dt -> 0; the propagator
    argument lets callers amortize the eigendecomposition across calls.
    """
    if cfg.scheme.order != 1:
        raise ValueError("operator application uses first-derivative schemes")
    prop = propagator if propagator is not None else Propagator(h)
    coeffs = prop.to_eigenbasis(psi.amplitudes)
    acc = np.zeros_like(coeffs)
    for n, q in zip(cfg.scheme.offsets, cfg.scheme.coefficients_float):
        if q != 0.0:
            acc += q * np.exp(-1j * prop.eigenvalues * (n * cfg.dt)) * coeffs
    return 1j / cfg.dt * (prop.eigenvectors @ acc)


def error_budget(
    h: PauliSum,
    cfg: HoaConfig,
    eps_machine: float = 1e-16,
    norm_method: str = "coefficient_sum",
) -> ErrorBudget:
    """Truncation/round-off split for the energy estimate at cfg.dt.

    eps_appr = C * dt^order * |H|^(order+1) with the scheme's effective
    order and leading residual constant; eps_num = (eps_machine/dt) sum|q_n|
    since every propagator has unit norm.  dt_star minimizes the sum on a
    log grid and is advisory output only.
    """
    if norm_method == "exact":
        eigs = np.linalg.eigvalsh(to_dense(h))
        norm = float(max(abs(eigs[0]), abs(eigs[-1])))
    elif norm_method == "coefficient_sum":
        norm = h.coefficient_norm_bound()
    else:
        raise ValueError(f"unknown norm method {norm_method!r}")

    scheme = cfg.scheme
    order = scheme.effective_order
    c_s = truncation_constant(scheme)
    q_sum = float(np.sum(np.abs(scheme.coefficients_float)))

    def appr(dt):
        return c_s * dt**order * norm ** (order + 1)

    def num(dt):
        return eps_machine / dt * q_sum

    grid = np.logspace(-12, 1, 1301)
    totals = appr(grid) + num(grid)
    dt_star = float(grid[int(np.argmin(totals))])
    e_appr = float(appr(cfg.dt))
    e_num = float(num(cfg.dt))
    return ErrorBudget(e_appr, e_num, e_appr + e_num, dt_star)


def collapsed_imaginary_energy(scheme: StencilScheme, dt: float, im_by_offset) -> float:
    """-(2/dt) sum_{n>0} q_n Im O_n for symmetric first-derivative schemes.

    im_by_offset maps positive offsets to (estimates of) Im <psi|U(n dt)|psi>.
    Exact-overlap inputs reproduce Re hoa_expectation; sampled inputs halve
    the shot cost versus estimating both quadratures.
    """
    if not scheme.is_symmetric or scheme.order != 1:
        raise ValueError("collapsed form needs a symmetric first-derivative scheme")
    total = 0.0
    for n, q in scheme.positive_offset_pairs():
        total += float(q) * im_by_offset[n]
    return -2.0 / dt * total
