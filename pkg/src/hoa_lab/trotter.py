"""Second-order Trotterized Heisenberg evolution as explicit gate lists.

One step for time tau/r is the palindromic layer sequence

    XX YY ZZ | Z field | ZZ YY XX

with every coupling exponential carrying half a step's angle and the field
the full step, which makes the product formula second order.  Two-qubit
terms compile to Molmer-Sorensen gates XX(phi) = exp(-i phi X X); YY and
ZZ come from conjugating XX with S / Hadamard pairs.  Within a layer all
terms commute, so the emitted site order is cosmetic and follows the
source formula (reversed site order first half, forward second half).

Gate accounting: a ring of N qubits costs exactly 23*N*r gates
(2*(1+5+5)*N couplings + N field rotations per step); the reference total
23*N*r + 3*N carries an extra 3N constant that gate emission alone does
not produce, so count reports include the residual explicitly instead of
forcing a match.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import PauliSum, heisenberg
from .hoa import HoaConfig, hoa_expectation
from .statevector import (
    StateVector,
    apply_hadamard,
    apply_pauli_pair_rotation,
    apply_phase_s,
    apply_rz,
)

__all__ = [
    "HeisenbergParams",
    "TrotterPlan",
    "GateSequence",
    "compile_trotter",
    "apply_sequence",
    "sequence_to_text",
    "gate_count_report",
    "trotterized_hoa_energy",
]


@dataclass(frozen=True)
class HeisenbergParams:
    """Chain/ring parameters shared by the model builder and the compiler."""

    n: int
    J: float
    h: float
    boundary: str = "open"
    antiferromagnetic: bool = False

    def bonds(self) -> list[tuple[int, int]]:
        bonds = [(j, j + 1) for j in range(self.n - 1)]
        if self.boundary == "ring":
            bonds.append((self.n - 1, 0))
        return bonds

    def coupling(self) -> float:
        return self.J if self.antiferromagnetic else -self.J

    def to_pauli_sum(self) -> PauliSum:
        return heisenberg(
            self.n, self.J, self.h, self.boundary,
            antiferromagnetic=self.antiferromagnetic,
        )


@dataclass(frozen=True)
class TrotterPlan:
    """r second-order steps covering total evolution time tau."""

    params: HeisenbergParams
    tau: float
    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"need at least one Trotter step, got {self.r}")


@dataclass(frozen=True)
class GateSequence:
    """Ordered elementary gates; entries are ('XX', i, j, phi), ('S'/'SDG'/'H', i), ('RZ', i, theta)."""

    n_qubits: int
    gates: tuple = field(default_factory=tuple)

    def count(self) -> int:
        return len(self.gates)


def _coupling_layer(gates, axes: str, bonds, phi: float):
    for i, j in bonds:
        if axes == "XX":
            gates.append(("XX", i, j, phi))
        elif axes == "YY":
            gates.append(("S", i))
            gates.append(("S", j))
            gates.append(("XX", i, j, phi))
            gates.append(("SDG", i))
            gates.append(("SDG", j))
        else:  # ZZ
            gates.append(("H", i))
            gates.append(("H", j))
            gates.append(("XX", i, j, phi))
            gates.append(("H", i))
            gates.append(("H", j))


def compile_trotter(plan: TrotterPlan) -> GateSequence:
    """Explicit gate list for the full r-step second-order evolution."""
    p = plan.params
    bonds = p.bonds()
    reversed_bonds = bonds[::-1]
    phi = p.coupling() * plan.tau / (2.0 * plan.r)
    field_theta = -2.0 * p.h * plan.tau / plan.r  # exp(+i h tau/r Z) = RZ(-2 h tau/r)
    gates: list = []
    for _ in range(plan.r):
        _coupling_layer(gates, "XX", reversed_bonds, phi)
        _coupling_layer(gates, "YY", reversed_bonds, phi)
        _coupling_layer(gates, "ZZ", reversed_bonds, phi)
        for q in range(p.n):
            gates.append(("RZ", q, field_theta))
        _coupling_layer(gates, "ZZ", bonds, phi)
        _coupling_layer(gates, "YY", bonds, phi)
        _coupling_layer(gates, "XX", bonds, phi)
    return GateSequence(p.n, tuple(gates))


def apply_sequence(seq: GateSequence, psi: StateVector) -> StateVector:
    """Run the gate list on a private copy of the state."""
    if psi.n_qubits != seq.n_qubits:
        raise ValueError(f"state on {psi.n_qubits} qubits, circuit on {seq.n_qubits}")
    n = seq.n_qubits
    amps = psi.amplitudes.copy()
    for gate in seq.gates:
        kind = gate[0]
        if kind == "XX":
            _, i, j, phi = gate
            apply_pauli_pair_rotation(amps, n, i, j, phi, "XX")
        elif kind == "RZ":
            _, q, theta = gate
            apply_rz(amps, n, q, theta)
        elif kind == "S":
            apply_phase_s(amps, n, gate[1])
        elif kind == "SDG":
            apply_phase_s(amps, n, gate[1], dagger=True)
        elif kind == "H":
            apply_hadamard(amps, n, gate[1])
        else:
            raise ValueError(f"unknown gate {gate!r}")
    return StateVector(n, amps)


def sequence_to_text(seq: GateSequence) -> str:
    """Line-per-gate text form 'GATE q0 [q1] [angle]' for inspection."""
    lines = []
    for gate in seq.gates:
        if gate[0] == "XX":
            lines.append(f"XX {gate[1]} {gate[2]} {gate[3]!r}")
        elif gate[0] == "RZ":
            lines.append(f"RZ {gate[1]} {gate[2]!r}")
        else:
            lines.append(f"{gate[0]} {gate[1]}")
    return "\n".join(lines) + "\n"


def gate_count_report(plan: TrotterPlan) -> dict:
    """Raw emitted count with a per-layer reconciliation table.

    For rings the raw count is exactly 23*N*r; the reference total
    23*N*r + 3*N is reported alongside with its unexplained residual 3N.
    """
    p = plan.params
    n_bonds = len(p.bonds())
    per_step = {
        "xx_layers": 2 * n_bonds,
        "yy_layers": 2 * 5 * n_bonds,
        "zz_layers": 2 * 5 * n_bonds,
        "field_layer": p.n,
    }
    raw = sum(per_step.values()) * plan.r
    reference = 23 * p.n * plan.r + 3 * p.n
    return {
        "raw_count": raw,
        "per_step": per_step,
        "steps": plan.r,
        "coupling_term_23nr": 23 * p.n * plan.r,
        "reference_23nr_plus_3n": reference,
        "residual": reference - raw,
    }


def trotterized_hoa_energy(
    params: HeisenbergParams, psi: StateVector, cfg: HoaConfig, r: int
) -> complex:
    """hoa_expectation with every evolve(n dt) replaced by a compiled circuit.

    Each stencil time point gets its own r-step sequence for total time
    n*dt (negative times compile to negated angles; the palindromic step is
    its own inverse under time reversal).
    """
    cache: dict[float, complex] = {}

    def overlap_fn(t: float) -> complex:
        if t not in cache:
            if t == 0.0:
                cache[t] = 1.0 + 0.0j
            else:
                seq = compile_trotter(TrotterPlan(params, t, r))
                evolved = apply_sequence(seq, psi)
                cache[t] = complex(np.vdot(psi.amplitudes, evolved.amplitudes))
        return cache[t]

    return hoa_expectation(params.to_pauli_sum(), psi, cfg, overlap_fn=overlap_fn)
