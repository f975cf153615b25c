"""Finite-difference stencil coefficients by exact rational solves.

A scheme with S points, shift s and derivative order k approximates
f^(k)(0) as (1/dt^k) * sum_n q_n f(n*dt) over integer offsets
n = -s .. S-s-1.  The coefficients solve the Vandermonde moment system

    sum_n q_n * n^j = k! * delta_{j,k}   for j = 0 .. S-1

which is done in Fraction arithmetic: the float Vandermonde solve is
hopeless already around S ~ 15, and schemes up to S = 25 are needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

__all__ = ["StencilScheme", "stencil_coefficients", "truncation_constant"]


@dataclass(frozen=True)
class StencilScheme:
    """Exact finite-difference scheme on a uniform unit grid."""

    points: int
    shift: int
    order: int
    offsets: tuple[int, ...]
    coefficients: tuple[Fraction, ...]

    @property
    def coefficients_float(self) -> np.ndarray:
        return np.array([float(q) for q in self.coefficients])

    @property
    def is_symmetric(self) -> bool:
        """Odd point count centered on 0 with antisymmetric/symmetric weights."""
        return self.points % 2 == 1 and self.shift == (self.points - 1) // 2

    def positive_offset_pairs(self):
        """(offset, coefficient) for offsets > 0, used by collapsed overlap sums."""
        return [
            (n, q) for n, q in zip(self.offsets, self.coefficients) if n > 0
        ]

    def moment(self, j: int) -> Fraction:
        """Exact j-th moment sum_n q_n * n^j."""
        return sum(
            (q * Fraction(n) ** j for n, q in zip(self.offsets, self.coefficients)),
            Fraction(0),
        )

    def residual_order(self) -> tuple[int, Fraction]:
        """First Taylor index j >= S with non-vanishing moment, and that moment.

        Symmetric schemes annihilate every even (for odd k) or odd (for even
        k) moment, so the leading residual can sit above the nominal index S.
        """
        j = self.points
        while True:
            m = self.moment(j)
            if m != 0:
                return j, m
            j += 1

    @property
    def effective_order(self) -> int:
        """Convergence order of the derivative estimate in the step size."""
        j, _ = self.residual_order()
        return j - self.order


def _solve_rational(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination with partial (max-|pivot|) pivoting over Fractions."""
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[pivot][col] == 0:
            raise ValueError("singular moment system")
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def stencil_coefficients(points: int, shift: int, order: int) -> StencilScheme:
    """Solve the moment system for an S-point, order-k scheme at shift s.

    Raises ValueError when order >= points (underdetermined: an S-point
    scheme resolves derivatives only up to k = S-1) or the shift is outside
    0 .. S-1.
    """
    if points < 2:
        raise ValueError(f"need at least 2 stencil points, got {points}")
    if not 1 <= order <= points - 1:
        raise ValueError(
            f"derivative order {order} needs more than {points} points "
            f"(require k <= S-1)"
        )
    if not 0 <= shift <= points - 1:
        raise ValueError(f"shift {shift} outside 0..{points - 1}")

    offsets = tuple(range(-shift, points - shift))
    matrix = [[Fraction(n) ** j for n in offsets] for j in range(points)]
    rhs = [Fraction(factorial(order)) if j == order else Fraction(0) for j in range(points)]
    coeffs = tuple(_solve_rational(matrix, rhs))
    return StencilScheme(points, shift, order, offsets, coeffs)


def truncation_constant(scheme: StencilScheme) -> float:
    """Leading Taylor-residual coefficient |sum q_n n^j| / j!.

    j is the first non-annihilated moment index at or above S, so the
    derivative error behaves as C * dt^(j-k) for smooth inputs.
    """
    j, m = scheme.residual_order()
    return float(abs(m) / factorial(j))
