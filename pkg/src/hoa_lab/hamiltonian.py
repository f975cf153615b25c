"""Pauli-sum Hamiltonians: spin models, Jordan-Wigner Hubbard, file I/O.

Conventions fixed here and relied on everywhere else:

* qubit 0 is the most significant bit of a basis index, so a dense
  realization is built as kron(P_0, kron(P_1, ...));
* Hubbard spin-orbitals are ordered site-major, spin-minor
  (qubit 2*i = site i up, qubit 2*i+1 = site i down), and Jordan-Wigner
  strings follow this linear qubit order;
* duplicate Pauli strings are merged at construction and coefficients
  below 1e-15 in magnitude are dropped, so equal operators compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PauliTerm",
    "PauliSum",
    "SpectralBound",
    "DENSE_QUBIT_CAP",
    "heisenberg",
    "hubbard_2x2_jw",
    "load_pauli_file",
    "parse_pauli_text",
    "pauli_sum_to_text",
    "save_pauli_file",
    "to_dense",
    "spectral_bound",
]

DENSE_QUBIT_CAP = 14

_AXES = "IXYZ"

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


@dataclass(frozen=True)
class PauliTerm:
    """One weighted Pauli string; the coefficient is real (Hermitian term)."""

    coefficient: float
    axes: str

    def __post_init__(self):
        if not np.isfinite(self.coefficient):
            raise ValueError(f"non-finite coefficient {self.coefficient}")
        bad = set(self.axes) - set(_AXES)
        if bad:
            raise ValueError(f"invalid Pauli axes {sorted(bad)} in {self.axes!r}")


class PauliSum:
    """Hermitian operator as a merged, canonically ordered sum of Pauli strings."""

    def __init__(self, n_qubits: int, terms):
        if n_qubits < 1:
            raise ValueError(f"need at least one qubit, got {n_qubits}")
        merged: dict[str, float] = {}
        for term in terms:
            if len(term.axes) != n_qubits:
                raise ValueError(
                    f"term {term.axes!r} has {len(term.axes)} axes, expected {n_qubits}"
                )
            merged[term.axes] = merged.get(term.axes, 0.0) + float(term.coefficient)
        self.n_qubits = n_qubits
        self.terms = tuple(
            PauliTerm(c, axes) for axes, c in sorted(merged.items()) if abs(c) >= 1e-15
        )
        self._dense = None

    def __eq__(self, other):
        return (
            isinstance(other, PauliSum)
            and self.n_qubits == other.n_qubits
            and self.terms == other.terms
        )

    def __repr__(self):
        return f"PauliSum(n_qubits={self.n_qubits}, n_terms={len(self.terms)})"

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def coefficient_norm_bound(self) -> float:
        """sum |c_P| over all terms, an upper bound on the operator norm."""
        return float(sum(abs(t.coefficient) for t in self.terms))

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        """H @ amplitudes without forming the dense matrix.

        Each string permutes basis indices by a fixed XOR mask and attaches
        a +-1 / +-i phase, so the action is a handful of vectorized
        reindex-and-scale passes.  Equals to_dense(self) @ amplitudes.
        """
        dim = self.dim
        if amplitudes.shape[-1] != dim:
            raise ValueError(f"state length {amplitudes.shape[-1]} != 2^{self.n_qubits}")
        idx = np.arange(dim)
        out = np.zeros_like(amplitudes, dtype=complex)
        for flip, values in self._column_values().items():
            if flip == 0:
                out += values * amplitudes
            else:
                src = idx ^ flip
                out += values[..., src] * amplitudes[..., src]
        return out

    def _column_values(self) -> dict[int, np.ndarray]:
        """Per flip-mask arrays v_m with <i^m|H|i> = v_m[i], merged over terms."""
        if getattr(self, "_columns", None) is not None:
            return self._columns
        n = self.n_qubits
        dim = self.dim
        idx = np.arange(dim)
        groups: dict[int, np.ndarray] = {}
        for term in self.terms:
            flip = 0
            phase_mask = 0  # qubits contributing (-1)^bit: Y and Z
            n_y = 0
            for q, axis in enumerate(term.axes):
                bit = 1 << (n - 1 - q)
                if axis in "XY":
                    flip |= bit
                if axis in "YZ":
                    phase_mask |= bit
                if axis == "Y":
                    n_y += 1
            parity = _bit_parity(idx & phase_mask)
            values = term.coefficient * (1j**n_y) * np.where(parity, -1.0, 1.0)
            if flip in groups:
                groups[flip] = groups[flip] + values
            else:
                groups[flip] = values.astype(complex)
        self._columns = groups
        return groups


def _bit_parity(values: np.ndarray) -> np.ndarray:
    return np.bitwise_count(values.astype(np.uint64)) & 1


@dataclass(frozen=True)
class SpectralBound:
    """Upper bound kappa >= E_max - E_min and the method that produced it."""

    kappa: float
    method: str


def heisenberg(
    n: int, J: float, h: float, boundary: str = "open", *, antiferromagnetic: bool = False
) -> PauliSum:
    """Heisenberg chain/ring -J sum (XX+YY+ZZ) - h sum Z.

    The literal sign convention with J > 0 is ferromagnetic; pass
    antiferromagnetic=True to flip the coupling sign (+J sum, field
    unchanged), which is the regime where h/J = 1 has an entangled
    ground state.
    """
    if n < 2:
        raise ValueError(f"Heisenberg model needs n >= 2 sites, got {n}")
    if boundary not in ("open", "ring"):
        raise ValueError(f"boundary must be 'open' or 'ring', got {boundary!r}")
    coupling = J if antiferromagnetic else -J
    bonds = [(j, j + 1) for j in range(n - 1)]
    if boundary == "ring":
        bonds.append((n - 1, 0))
    terms = []
    for a, b in bonds:
        for axis in "XYZ":
            axes = "".join(axis if q in (a, b) else "I" for q in range(n))
            terms.append(PauliTerm(coupling, axes))
    for q in range(n):
        axes = "".join("Z" if p == q else "I" for p in range(n))
        terms.append(PauliTerm(-h, axes))
    return PauliSum(n, terms)


def _jw_number_terms(n: int, orbital: int, coeff: float) -> list[PauliTerm]:
    """coeff * n_orbital = coeff * (I - Z_orbital) / 2."""
    z_axes = "".join("Z" if q == orbital else "I" for q in range(n))
    return [PauliTerm(coeff / 2, "I" * n), PauliTerm(-coeff / 2, z_axes)]


def _jw_hopping_terms(n: int, p: int, q: int, coeff: float) -> list[PauliTerm]:
    """coeff * (c+_p c_q + c+_q c_p) -> (coeff/2)(X Z..Z X + Y Z..Z Y)."""
    lo, hi = min(p, q), max(p, q)

    def string(end_axis: str) -> str:
        chars = []
        for qq in range(n):
            if qq in (lo, hi):
                chars.append(end_axis)
            elif lo < qq < hi:
                chars.append("Z")
            else:
                chars.append("I")
        return "".join(chars)

    return [PauliTerm(coeff / 2, string("X")), PauliTerm(coeff / 2, string("Y"))]


def hubbard_2x2_jw(U: float, J: float, mu: float, h: float) -> PauliSum:
    """Four-site 2D Fermi-Hubbard on 8 qubits via Jordan-Wigner.

    H = -J sum_<ij>,s (c+_is c_js + h.c.) + U sum_i n_iu n_id
        - mu sum_i (n_iu + n_id) - h sum_i (n_iu - n_id)

    Sites sit on a 2x2 plaquette with bonds (0,1), (2,3), (0,2), (1,3),
    each counted once.  The h term weakly splits the up/down chemical
    potentials.
    """
    n = 8
    bonds = [(0, 1), (2, 3), (0, 2), (1, 3)]
    terms: list[PauliTerm] = []
    for i, j in bonds:
        for spin in (0, 1):
            terms.extend(_jw_hopping_terms(n, 2 * i + spin, 2 * j + spin, -J))
    for site in range(4):
        up, down = 2 * site, 2 * site + 1
        # U n_up n_down = U/4 (I - Z_up)(I - Z_down)
        zu = "".join("Z" if q == up else "I" for q in range(n))
        zd = "".join("Z" if q == down else "I" for q in range(n))
        zz = "".join("Z" if q in (up, down) else "I" for q in range(n))
        terms.append(PauliTerm(U / 4, "I" * n))
        terms.append(PauliTerm(-U / 4, zu))
        terms.append(PauliTerm(-U / 4, zd))
        terms.append(PauliTerm(U / 4, zz))
        terms.extend(_jw_number_terms(n, up, -mu - h))
        terms.extend(_jw_number_terms(n, down, -mu + h))
    return PauliSum(n, terms)


def parse_pauli_text(text: str, origin: str = "<string>") -> PauliSum:
    """Parse the '<coefficient> <string>' line format; '#' starts a comment."""
    n_qubits = None
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(
                f"{origin}:{lineno}: expected '<coefficient> <string>', got {raw!r}"
            )
        try:
            coeff = float(parts[0])
        except ValueError:
            raise ValueError(f"{origin}:{lineno}: bad coefficient {parts[0]!r}") from None
        axes = parts[1].upper()
        if set(axes) - set(_AXES):
            raise ValueError(f"{origin}:{lineno}: bad Pauli string {parts[1]!r}")
        if n_qubits is None:
            n_qubits = len(axes)
        elif len(axes) != n_qubits:
            raise ValueError(
                f"{origin}:{lineno}: string length {len(axes)} != {n_qubits} "
                "set by the first data line"
            )
        terms.append(PauliTerm(coeff, axes))
    if n_qubits is None:
        raise ValueError(f"{origin}: no Pauli terms found")
    return PauliSum(n_qubits, terms)


def load_pauli_file(path) -> PauliSum:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_pauli_text(fh.read(), origin=str(path))


def pauli_sum_to_text(h: PauliSum) -> str:
    lines = [f"{t.coefficient!r} {t.axes}" for t in h.terms]
    return "\n".join(lines) + "\n"


def save_pauli_file(h: PauliSum, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(pauli_sum_to_text(h))


def to_dense(h: PauliSum, max_qubits: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense Hermitian matrix by Kronecker composition, cached on the operator."""
    if h.n_qubits > max_qubits:
        raise ValueError(
            f"dense realization of {h.n_qubits} qubits exceeds the cap {max_qubits}"
        )
    if h._dense is not None:
        return h._dense
    dim = h.dim
    matrix = np.zeros((dim, dim), dtype=complex)
    for term in h.terms:
        acc = np.array([[term.coefficient]], dtype=complex)
        for axis in term.axes:
            acc = np.kron(acc, _PAULI_MATRICES[axis])
        matrix += acc
    h._dense = matrix
    return matrix


def spectral_bound(h: PauliSum, method: str = "gershgorin") -> SpectralBound:
    """Bound on the spectral spread E_max - E_min.

    gershgorin walks matrix rows without densifying (disc centers are the
    diagonal, radii the absolute off-diagonal row sums); coefficient_sum is
    2 sum|c_P| over non-identity strings; exact diagonalizes.
    """
    if method == "coefficient_sum":
        kappa = 2.0 * sum(
            abs(t.coefficient) for t in h.terms if set(t.axes) != {"I"}
        )
        return SpectralBound(float(kappa), method)
    if method == "gershgorin":
        columns = h._column_values()
        dim = h.dim
        idx = np.arange(dim)
        diag = np.zeros(dim)
        radius = np.zeros(dim)
        for flip, values in columns.items():
            if flip == 0:
                diag = values.real.copy()
            else:
                radius += np.abs(values)[idx ^ flip]
        kappa = float(np.max(diag + radius) - np.min(diag - radius))
        return SpectralBound(kappa, method)
    if method == "exact":
        eigs = np.linalg.eigvalsh(to_dense(h))
        return SpectralBound(float(eigs[-1] - eigs[0]), method)
    raise ValueError(f"unknown spectral bound method {method!r}")
