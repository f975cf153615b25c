"""Dense statevector engine: preparation, exact evolution, overlaps, gates.

Basis convention: qubit 0 is the most significant bit of the basis index,
so |10> on two qubits is index 2.  Global phases are never stripped; the
propagator-overlap energy estimates depend on them.

Exact evolution goes through one cached Hermitian eigendecomposition per
Hamiltonian; every time point afterwards is two dense matrix-vector
products.  Gate kernels operate in place on raw amplitude arrays with an
optional leading batch axis and per-row angles; they back both the Trotter
executor and the variational-circuit code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import PauliSum, to_dense

__all__ = [
    "StateVector",
    "Propagator",
    "HermiticityError",
    "uniform_state",
    "basis_state",
    "evolve",
    "overlap",
    "expectation",
    "apply_operator",
]

_NORM_TOL = 1e-10


class HermiticityError(ValueError):
    """Expectation value came out with a non-negligible imaginary part."""


@dataclass
class StateVector:
    """Unit-norm complex amplitude vector over 2^n basis states."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise ValueError(
                f"amplitude vector of shape {self.amplitudes.shape} does not "
                f"match {self.n_qubits} qubits"
            )
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state norm {norm} deviates from 1 beyond {_NORM_TOL}")

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    @staticmethod
    def from_unnormalized(amplitudes: np.ndarray) -> "StateVector":
        amplitudes = np.asarray(amplitudes, dtype=complex)
        n = int(np.log2(amplitudes.size).round())
        norm = np.linalg.norm(amplitudes)
        if norm < 1e-12:
            raise ValueError("cannot normalize a (near-)zero vector")
        return StateVector(n, amplitudes / norm)


def uniform_state(n: int) -> StateVector:
    """|+>^n, the Hadamard-string state with all amplitudes 2^(-n/2)."""
    if n < 1:
        raise ValueError(f"need n >= 1 qubits, got {n}")
    return StateVector(n, np.full(2**n, 2.0 ** (-n / 2), dtype=complex))


def basis_state(n: int, bitstring: str) -> StateVector:
    """Computational basis state; bitstring[0] is qubit 0 (most significant)."""
    if len(bitstring) != n:
        raise ValueError(f"bitstring {bitstring!r} has length {len(bitstring)} != {n}")
    if set(bitstring) - {"0", "1"}:
        raise ValueError(f"bitstring {bitstring!r} must be over 0/1")
    amps = np.zeros(2**n, dtype=complex)
    amps[int(bitstring, 2)] = 1.0
    return StateVector(n, amps)


class Propagator:
    """exp(-iHt) for all t via one cached eigendecomposition of H."""

    def __init__(self, hamiltonian: PauliSum):
        self.hamiltonian = hamiltonian
        dense = to_dense(hamiltonian)
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(dense)

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits

    def to_eigenbasis(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.eigenvectors.conj().T @ amplitudes

    def evolve_amplitudes(self, amplitudes: np.ndarray, t: float) -> np.ndarray:
        phases = np.exp(-1j * self.eigenvalues * t)
        return self.eigenvectors @ (phases * self.to_eigenbasis(amplitudes))

    def evolve(self, psi: StateVector, t: float) -> StateVector:
        return StateVector(self.n_qubits, self.evolve_amplitudes(psi.amplitudes, t))

    def step_matrix(self, t: float) -> np.ndarray:
        """Dense exp(-iHt), for repeated fixed-step propagation."""
        phases = np.exp(-1j * self.eigenvalues * t)
        return (self.eigenvectors * phases) @ self.eigenvectors.conj().T


def evolve(p: Propagator, psi: StateVector, t: float) -> StateVector:
    if psi.n_qubits != p.n_qubits:
        raise ValueError(f"state on {psi.n_qubits} qubits, propagator on {p.n_qubits}")
    return p.evolve(psi, t)


def overlap(phi: StateVector, psi: StateVector) -> complex:
    """<phi|psi>, conjugating the first argument."""
    if phi.n_qubits != psi.n_qubits:
        raise ValueError("overlap between states of different size")
    return complex(np.vdot(phi.amplitudes, psi.amplitudes))


def expectation(h: PauliSum, psi: StateVector) -> float:
    """Re <psi|H|psi>; raises HermiticityError on imaginary residue > 1e-10."""
    if h.n_qubits != psi.n_qubits:
        raise ValueError(f"operator on {h.n_qubits} qubits, state on {psi.n_qubits}")
    value = complex(np.vdot(psi.amplitudes, h.apply(psi.amplitudes)))
    if abs(value.imag) > 1e-10:
        raise HermiticityError(
            f"expectation has imaginary residue {value.imag:.3e}; operator not Hermitian?"
        )
    return value.real


def apply_operator(h: PauliSum, psi: StateVector) -> np.ndarray:
    """H|psi> as a raw, unnormalized amplitude vector."""
    if h.n_qubits != psi.n_qubits:
        raise ValueError(f"operator on {h.n_qubits} qubits, state on {psi.n_qubits}")
    return h.apply(psi.amplitudes)


# --- in-place gate kernels on raw amplitude arrays -------------------------
#
# amps has shape (..., 2^n); angles are scalars or arrays broadcastable over
# the leading axes.  All kernels mutate amps and return it.


def _split(amps: np.ndarray, n: int, q: int):
    """View of amps as (..., 2^q, 2, 2^(n-1-q)) exposing qubit q's axis."""
    assert amps.flags.c_contiguous, "gate kernels need C-contiguous amplitudes"
    lead = amps.shape[:-1]
    view = amps.reshape(*lead, 2**q, 2, 2 ** (n - 1 - q))
    return view[..., 0, :], view[..., 1, :]


def _angle(theta, extra_dims: int):
    a = np.asarray(theta, dtype=float)
    if a.ndim == 0:
        return a
    return a.reshape(a.shape + (1,) * extra_dims)


def apply_rz(amps, n, q, theta):
    """exp(-i theta Z_q / 2)."""
    a0, a1 = _split(amps, n, q)
    t = _angle(theta, 2)
    a0 *= np.exp(-0.5j * t)
    a1 *= np.exp(0.5j * t)
    return amps


def apply_rx(amps, n, q, theta):
    """exp(-i theta X_q / 2)."""
    a0, a1 = _split(amps, n, q)
    t = _angle(theta, 2)
    c, s = np.cos(t / 2), np.sin(t / 2)
    new0 = c * a0 - 1j * s * a1
    a1[...] = c * a1 - 1j * s * a0
    a0[...] = new0
    return amps


def apply_hadamard(amps, n, q):
    a0, a1 = _split(amps, n, q)
    inv = 1.0 / np.sqrt(2.0)
    new0 = (a0 + a1) * inv
    a1[...] = (a0 - a1) * inv
    a0[...] = new0
    return amps


def apply_phase_s(amps, n, q, dagger=False):
    """S = diag(1, i) on qubit q (S-dagger with dagger=True)."""
    _, a1 = _split(amps, n, q)
    a1 *= -1j if dagger else 1j
    return amps


def apply_cnot(amps, n, control, target):
    assert amps.flags.c_contiguous, "gate kernels need C-contiguous amplitudes"
    lead = amps.shape[:-1]
    a, b = sorted((control, target))
    view = amps.reshape(*lead, 2**a, 2, 2 ** (b - a - 1), 2, 2 ** (n - 1 - b))
    if control < target:
        hi = view[..., 1, :, :, :]
        hi[...] = hi[..., ::-1, :]
    else:
        hi = view[..., :, :, 1, :]
        hi[...] = hi[..., ::-1, :, :]
    return amps


def _split2(amps: np.ndarray, n: int, q1: int, q2: int):
    """Views of the four (b1, b2) blocks for qubits q1 < q2."""
    assert amps.flags.c_contiguous, "gate kernels need C-contiguous amplitudes"
    lead = amps.shape[:-1]
    view = amps.reshape(
        *lead, 2**q1, 2, 2 ** (q2 - q1 - 1), 2, 2 ** (n - 1 - q2)
    )
    return (
        view[..., 0, :, 0, :],
        view[..., 0, :, 1, :],
        view[..., 1, :, 0, :],
        view[..., 1, :, 1, :],
    )


def apply_pauli_pair_rotation(amps, n, q1, q2, theta, axes: str):
    """exp(-i theta P_q1 P_q2) for P in {X, Y, Z}.

    Note the full angle convention (no 1/2): exp(-i theta XX) etc., matching
    the Molmer-Sorensen XX(phi) definition.
    """
    if q1 == q2:
        raise ValueError("two-qubit rotation needs distinct qubits")
    a, b = sorted((q1, q2))
    v00, v01, v10, v11 = _split2(amps, n, a, b)
    t = _angle(theta, 3)
    if axes == "ZZ":
        even, odd = np.exp(-1j * t), np.exp(1j * t)
        v00 *= even
        v11 *= even
        v01 *= odd
        v10 *= odd
        return amps
    c, s = np.cos(t), np.sin(t)
    if axes == "XX":
        f_outer, f_inner = -1j * s, -1j * s
    elif axes == "YY":
        # YY|00> = -|11>, YY|01> = |10>
        f_outer, f_inner = 1j * s, -1j * s
    else:
        raise ValueError(f"unsupported pair rotation {axes!r}")
    new00 = c * v00 + f_outer * v11
    v11[...] = c * v11 + f_outer * v00
    v00[...] = new00
    new01 = c * v01 + f_inner * v10
    v10[...] = c * v10 + f_inner * v01
    v01[...] = new01
    return amps
