"""Variational eigensolver baseline: HEA/HVA ansatz, parameter shift, Adam.

Two circuit families:

* HEA: per layer, an RZ-RX-RZ triplet on every qubit followed by a CNOT
  chain (3N parameters per layer);
* HVA: per layer, evolutions of the XX, YY, ZZ and Z Hamiltonian term
  groups (one shared parameter each) plus per-qubit RX and RZ rotations
  (4 + 2N parameters per layer).

Every parameterized gate uses the half-angle convention exp(-i theta G/2)
with an involutory generator G, so the analytic gradient is the two-point
shift rule dE/dtheta = (E(theta + pi/2) - E(theta - pi/2)) / 2 summed over
the occurrences of a shared parameter.  All shifted evaluations of one
gradient run as rows of a single batched statevector pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import PauliSum
from .statevector import (
    apply_cnot,
    apply_pauli_pair_rotation,
    apply_rx,
    apply_rz,
)

__all__ = [
    "ParamCircuit",
    "AdamState",
    "VqeResult",
    "build_circuit",
    "energy",
    "parameter_shift_gradient",
    "vqe_run",
    "gate_count",
]


@dataclass(frozen=True)
class ParamCircuit:
    """Gate template with parameter bookkeeping.

    gates entries: ('rz'|'rx', qubit, param, occurrence),
    ('pp', q1, q2, axes, param, occurrence), ('cnot', control, target).
    occurrences[p] lists the occurrence ids where parameter p appears.
    """

    layout: str
    n_qubits: int
    depth: int
    gates: tuple
    n_parameters: int
    occurrences: tuple


def build_circuit(layout: str, n: int, depth: int, boundary: str = "ring") -> ParamCircuit:
    """Assemble the gate template for an HEA or HVA ansatz."""
    gates: list = []
    occurrences: list[list[int]] = []
    occ_counter = 0

    def new_param() -> int:
        occurrences.append([])
        return len(occurrences) - 1

    def add_rot(kind: str, qubits, param: int):
        nonlocal occ_counter
        occurrences[param].append(occ_counter)
        if kind == "pp":
            q1, q2, axes = qubits
            gates.append(("pp", q1, q2, axes, param, occ_counter))
        else:
            gates.append((kind, qubits, param, occ_counter))
        occ_counter += 1

    bonds = [(q, q + 1) for q in range(n - 1)]
    if boundary == "ring" and n > 2:
        bonds.append((n - 1, 0))

    if layout == "HEA":
        for _ in range(depth):
            for q in range(n):
                add_rot("rz", q, new_param())
                add_rot("rx", q, new_param())
                add_rot("rz", q, new_param())
            for q in range(n - 1):
                gates.append(("cnot", q, q + 1))
    elif layout == "HVA":
        for _ in range(depth):
            for axes in ("XX", "YY", "ZZ"):
                p = new_param()
                for a, b in bonds:
                    add_rot("pp", (a, b, axes), p)
            p = new_param()
            for q in range(n):
                add_rot("rz", q, p)
            for q in range(n):
                add_rot("rx", q, new_param())
            for q in range(n):
                add_rot("rz", q, new_param())
    else:
        raise ValueError(f"layout must be 'HEA' or 'HVA', got {layout!r}")
    return ParamCircuit(
        layout, n, depth, tuple(gates), len(occurrences),
        tuple(tuple(o) for o in occurrences),
    )


def _run_rows(circuit: ParamCircuit, theta: np.ndarray, shift_occ, shift_delta) -> np.ndarray:
    """Run B circuit copies from |0..0>, row r shifting occurrence shift_occ[r]."""
    n = circuit.n_qubits
    batch = shift_occ.shape[0]
    amps = np.zeros((batch, 2**n), dtype=complex)
    amps[:, 0] = 1.0
    for gate in circuit.gates:
        if gate[0] == "cnot":
            apply_cnot(amps, n, gate[1], gate[2])
            continue
        if gate[0] == "pp":
            _, q1, q2, axes, p, occ = gate
            angles = np.full(batch, theta[p])
            angles[shift_occ == occ] += shift_delta[shift_occ == occ]
            apply_pauli_pair_rotation(amps, n, q1, q2, angles / 2.0, axes)
            continue
        kind, q, p, occ = gate
        angles = np.full(batch, theta[p])
        angles[shift_occ == occ] += shift_delta[shift_occ == occ]
        if kind == "rz":
            apply_rz(amps, n, q, angles)
        else:
            apply_rx(amps, n, q, angles)
    return amps


def _batch_energies(h: PauliSum, states: np.ndarray) -> np.ndarray:
    return np.einsum("bi,bi->b", states.conj(), h.apply(states)).real


def energy(circuit: ParamCircuit, theta: np.ndarray, h: PauliSum) -> float:
    """<0..0| U(theta)^dag H U(theta) |0..0>."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_parameters,):
        raise ValueError(
            f"expected {circuit.n_parameters} parameters, got shape {theta.shape}"
        )
    if h.n_qubits != circuit.n_qubits:
        raise ValueError("Hamiltonian and circuit qubit counts differ")
    none = np.full(1, -1)
    states = _run_rows(circuit, theta, none, np.zeros(1))
    return float(_batch_energies(h, states)[0])


def parameter_shift_gradient(circuit: ParamCircuit, theta: np.ndarray, h: PauliSum) -> np.ndarray:
    """Analytic gradient via +-pi/2 shifts, one batched pass for all rows."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_parameters,):
        raise ValueError(
            f"expected {circuit.n_parameters} parameters, got shape {theta.shape}"
        )
    occ_rows = []
    delta_rows = []
    for p in range(circuit.n_parameters):
        for occ in circuit.occurrences[p]:
            occ_rows.extend([occ, occ])
            delta_rows.extend([np.pi / 2, -np.pi / 2])
    shift_occ = np.array(occ_rows)
    shift_delta = np.array(delta_rows)
    states = _run_rows(circuit, theta, shift_occ, shift_delta)
    energies = _batch_energies(h, states)
    grad = np.zeros(circuit.n_parameters)
    row = 0
    for p in range(circuit.n_parameters):
        for _ in circuit.occurrences[p]:
            grad[p] += (energies[row] - energies[row + 1]) / 2.0
            row += 2
    return grad


@dataclass
class AdamState:
    """Adaptive-moment optimizer state (Kingma-Ba defaults, lr 0.001)."""

    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    m: np.ndarray = None
    v: np.ndarray = None
    step: int = 0

    def update(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m = np.zeros_like(theta)
            self.v = np.zeros_like(theta)
        self.step += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad**2
        m_hat = self.m / (1 - self.beta1**self.step)
        v_hat = self.v / (1 - self.beta2**self.step)
        return theta - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


@dataclass(frozen=True)
class VqeResult:
    energies: tuple
    gradient_norms: tuple
    theta: np.ndarray = field(repr=False)
    gate_count: int = 0


def vqe_run(
    h: PauliSum,
    layout: str,
    depth: int,
    iterations: int,
    seed: int,
    learning_rate: float = 0.001,
    boundary: str = "ring",
) -> VqeResult:
    """Adam loop from small uniform random angles; per-iteration energy trace.

    The trace has iterations+1 entries (the initial energy first); gradient
    norms align with the performed updates.  Identical seeds reproduce the
    trace bit for bit.
    """
    circuit = build_circuit(layout, h.n_qubits, depth, boundary)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-0.1, 0.1, size=circuit.n_parameters)
    adam = AdamState(learning_rate=learning_rate)
    energies = [energy(circuit, theta, h)]
    grad_norms = []
    for _ in range(iterations):
        grad = parameter_shift_gradient(circuit, theta, h)
        grad_norms.append(float(np.linalg.norm(grad)))
        theta = adam.update(theta, grad)
        energies.append(energy(circuit, theta, h))
    return VqeResult(tuple(energies), tuple(grad_norms), theta, gate_count(circuit))


def gate_count(circuit: ParamCircuit) -> int:
    """Emitted elementary gates: rotations (1Q and 2Q) plus CNOTs."""
    return len(circuit.gates)
