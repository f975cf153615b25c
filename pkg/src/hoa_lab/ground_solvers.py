"""Ground-state preparation: direct power iteration and filter diagonalization.

Both solvers run against the exact Hamiltonian or its propagator-stencil
substitute.  Direct iteration repeatedly applies (H - lambda) and
normalizes, converging to the dominant-|eigenvalue| eigenvector; the
filter-diagonalization route spans a subspace with time-propagated
reference states exp(-iHk/kappa)|psi_j>, k = -k_max..k_max, and solves the
generalized eigenproblem over the propagator-overlap matrices.  kappa
should upper-bound the spectral spread; the Gershgorin estimate keeps that
scalable.

In stencil mode every matrix element of the projected Hamiltonian is a pure
propagator overlap at a shifted time, so when the stencil step equals the
filter step 1/kappa the distinct evolution times collapse to
(4 k_max + 1) + (S - 1) values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import PauliSum, SpectralBound
from .hoa import HoaConfig, hoa_apply, hoa_expectation
from .statevector import Propagator, StateVector

__all__ = [
    "DirectIterationConfig",
    "DirectIterationResult",
    "QfdConfig",
    "QfdResult",
    "direct_iteration",
    "qfd_build",
    "solve_generalized",
    "unique_overlap_count",
    "qfd_evaluation_times",
]


@dataclass(frozen=True)
class DirectIterationConfig:
    """Iteration count, operator mode (exact | hoa), spectral shift lambda."""

    iterations: int
    mode: str = "exact"
    hoa: HoaConfig | None = None
    shift: float = 0.0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if self.mode not in ("exact", "hoa"):
            raise ValueError(f"mode must be 'exact' or 'hoa', got {self.mode!r}")
        if self.mode == "hoa" and self.hoa is None:
            raise ValueError("hoa mode needs an HoaConfig")


@dataclass(frozen=True)
class DirectIterationResult:
    """Per-iteration energies, index 0 being the starting state.

    energies is the exact diagnostic <Psi_k|H|Psi_k> in both modes;
    hoa_energies carries the stencil estimate of the same quantity when
    iterating in hoa mode (None otherwise).
    """

    energies: tuple
    hoa_energies: tuple | None
    final_state: StateVector


def direct_iteration(
    h: PauliSum, psi0: StateVector, cfg: DirectIterationConfig
) -> DirectIterationResult:
    """|Psi_k> = Op|Psi_{k-1}> / norm with Op = H - lambda (exact or stencil).

    Converges to the dominant eigenvector when the start overlaps it;
    reported energies are un-shifted.  Norm collapse below 1e-12 aborts
    (start state annihilated by the shifted operator).
    """
    prop = Propagator(h) if cfg.mode == "hoa" else None

    def exact_energy(state: StateVector) -> float:
        return float(np.vdot(state.amplitudes, h.apply(state.amplitudes)).real)

    def hoa_energy(state: StateVector) -> float:
        weights = np.abs(prop.to_eigenbasis(state.amplitudes)) ** 2

        def overlap_fn(t: float) -> complex:
            return complex(np.sum(weights * np.exp(-1j * prop.eigenvalues * t)))

        return hoa_expectation(h, state, cfg.hoa, overlap_fn=overlap_fn).real

    state = psi0
    energies = [exact_energy(state)]
    hoa_energies = [hoa_energy(state)] if cfg.mode == "hoa" else None
    for _ in range(cfg.iterations):
        if cfg.mode == "exact":
            vec = h.apply(state.amplitudes)
        else:
            vec = hoa_apply(h, state, cfg.hoa, propagator=prop)
        if cfg.shift != 0.0:
            vec = vec - cfg.shift * state.amplitudes
        norm = np.linalg.norm(vec)
        if norm < 1e-12:
            raise ValueError(
                "iteration collapsed the state to norm < 1e-12; "
                "the start state is (near-)degenerate with the shift"
            )
        state = StateVector(state.n_qubits, vec / norm)
        energies.append(exact_energy(state))
        if hoa_energies is not None:
            hoa_energies.append(hoa_energy(state))
    return DirectIterationResult(
        tuple(energies),
        tuple(hoa_energies) if hoa_energies is not None else None,
        state,
    )


@dataclass(frozen=True)
class QfdConfig:
    """Filter-diagonalization setup over time-propagated reference states."""

    k_max: int
    kappa: SpectralBound | float
    references: tuple
    mode: str = "exact"
    hoa: HoaConfig | None = None
    s_threshold: float = 1e-10

    def __post_init__(self):
        if self.k_max < 0:
            raise ValueError("k_max must be >= 0")
        if self.kappa_value <= 0:
            raise ValueError("kappa must be positive")
        if not self.references:
            raise ValueError("need at least one reference state")
        if self.mode not in ("exact", "hoa"):
            raise ValueError(f"mode must be 'exact' or 'hoa', got {self.mode!r}")
        if self.mode == "hoa" and self.hoa is None:
            raise ValueError("hoa mode needs an HoaConfig")

    @property
    def kappa_value(self) -> float:
        return self.kappa.kappa if isinstance(self.kappa, SpectralBound) else float(self.kappa)

    @property
    def basis_size(self) -> int:
        return len(self.references) * (2 * self.k_max + 1)


@dataclass(frozen=True)
class QfdResult:
    """Generalized-eigenproblem solution after canonical orthogonalization."""

    eigenvalues: np.ndarray
    coefficients: np.ndarray
    retained_dim: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])


def qfd_build(h: PauliSum, cfg: QfdConfig, propagator: Propagator = None):
    """Projected (H_matrix, S_matrix) over states exp(-iHk/kappa)|psi_j>.

    S[(j',k'),(j,k)] = <psi_j'| exp(-iH (k-k')/kappa) |psi_j>; the Hamiltonian
    insertion commutes with the propagators, so in hoa mode each H element is
    the stencil combination of the same overlap at times shifted by n*dt.
    Both matrices are Hermitized by averaging with their conjugate transpose.
    """
    kappa = cfg.kappa_value
    prop = propagator if propagator is not None else Propagator(h)
    lam = prop.eigenvalues
    coords = [prop.to_eigenbasis(ref.amplitudes) for ref in cfg.references]
    ks = np.arange(-cfg.k_max, cfg.k_max + 1)
    n_ref = len(coords)
    size = cfg.basis_size

    def gram(jp: int, j: int, t: float) -> complex:
        return complex(np.sum(coords[jp].conj() * coords[j] * np.exp(-1j * lam * t)))

    def h_insert(jp: int, j: int, t: float) -> complex:
        if cfg.mode == "exact":
            return complex(
                np.sum(coords[jp].conj() * coords[j] * lam * np.exp(-1j * lam * t))
            )
        total = 0.0j
        for n, q in zip(cfg.hoa.scheme.offsets, cfg.hoa.scheme.coefficients_float):
            if q != 0.0:
                total += q * gram(jp, j, t + n * cfg.hoa.dt)
        return 1j / cfg.hoa.dt * total

    s_matrix = np.zeros((size, size), dtype=complex)
    h_matrix = np.zeros((size, size), dtype=complex)
    for jp in range(n_ref):
        for j in range(n_ref):
            for a, kp in enumerate(ks):
                for b, k in enumerate(ks):
                    row = jp * len(ks) + a
                    col = j * len(ks) + b
                    t = (k - kp) / kappa
                    s_matrix[row, col] = gram(jp, j, t)
                    h_matrix[row, col] = h_insert(jp, j, t)
    s_matrix = 0.5 * (s_matrix + s_matrix.conj().T)
    h_matrix = 0.5 * (h_matrix + h_matrix.conj().T)
    return h_matrix, s_matrix


def solve_generalized(h_matrix: np.ndarray, s_matrix: np.ndarray, threshold: float = 1e-10) -> QfdResult:
    """Canonical orthogonalization, then an ordinary Hermitian eigensolve.

    Overlap-matrix directions with eigenvalue below threshold * max are
    discarded; coefficients are mapped back to the original (non-orthogonal)
    basis.  Raises when nothing survives the cutoff.
    """
    if h_matrix.shape != s_matrix.shape or h_matrix.shape[0] != h_matrix.shape[1]:
        raise ValueError("H and S must be square matrices of equal size")
    s_eigs, s_vecs = np.linalg.eigh(s_matrix)
    cutoff = threshold * float(s_eigs[-1])
    keep = s_eigs > cutoff
    if not np.any(keep):
        raise ValueError(
            f"all {s_eigs.size} overlap eigenvalues fall below the cutoff {cutoff:.3e}"
        )
    transform = s_vecs[:, keep] / np.sqrt(s_eigs[keep])
    reduced = transform.conj().T @ h_matrix @ transform
    reduced = 0.5 * (reduced + reduced.conj().T)
    eigenvalues, vectors = np.linalg.eigh(reduced)
    coefficients = transform @ vectors
    diagnostics = {
        "s_eigenvalue_min_retained": float(s_eigs[keep].min()),
        "s_eigenvalue_max": float(s_eigs[-1]),
        "condition_number": float(s_eigs[-1] / s_eigs[keep].min()),
        "discarded": int(np.sum(~keep)),
    }
    return QfdResult(eigenvalues, coefficients, int(np.sum(keep)), diagnostics)


def unique_overlap_count(k_max: int, points: int = 5, aligned: bool = True) -> int:
    """Distinct propagation times a stencil-mode filter solve needs.

    Aligned grids (stencil step equal to the filter step 1/kappa) merge the
    time arguments down to (4 k_max + 1) + (S - 1); incommensurate steps
    keep all (4 k_max + 1) * S products distinct.
    """
    if aligned:
        return 4 * k_max + points
    return (4 * k_max + 1) * points


def qfd_evaluation_times(cfg: QfdConfig) -> np.ndarray:
    """Sorted distinct evolution times qfd_build evaluates in its mode."""
    kappa = cfg.kappa_value
    deltas = np.arange(-2 * cfg.k_max, 2 * cfg.k_max + 1)
    times = set()
    for dk in deltas:
        times.add(dk / kappa)
        if cfg.mode == "hoa":
            for n in cfg.hoa.scheme.offsets:
                times.add(dk / kappa + n * cfg.hoa.dt)
    arr = np.array(sorted(times))
    # collapse float twins from aligned grids ((dk + n)/kappa reached two ways)
    if arr.size > 1:
        scale = max(np.max(np.abs(arr)), 1e-30)
        keep = np.ones(arr.size, dtype=bool)
        keep[1:] = np.diff(arr) > 1e-12 * scale
        arr = arr[keep]
    return arr
