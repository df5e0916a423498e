"""Per-cell parabolic reconstruction from (left point, average, right point).

The reconstruction underlying the scheme is the unique parabola on a cell
that interpolates both interface point values and has the prescribed mean.
Its one-sided edge derivatives are exactly the one-sided point stencils, and
their average is the central stencil, so this module rebuilds the operator
stencils from first principles.
"""

from __future__ import annotations

import dataclasses

import numpy as np

__all__ = ["CellParabola", "edge_derivative", "reconstruct"]


@dataclasses.dataclass(frozen=True)
class CellParabola:
    """``p(xi) = c0 + c1 xi + c2 xi**2`` in the cell-local coordinate.

    ``xi`` runs over ``[-dx/2, dx/2]`` with 0 at the cell midpoint.
    """

    c0: float
    c1: float
    c2: float
    dx: float

    def __call__(self, xi):
        return self.c0 + self.c1 * xi + self.c2 * np.square(xi)

    def derivative(self, xi):
        return self.c1 + 2.0 * self.c2 * xi

    @property
    def mean(self) -> float:
        # exact mean of a parabola over [-dx/2, dx/2]
        return self.c0 + self.c2 * self.dx**2 / 12.0

    @property
    def left_value(self) -> float:
        return self(-0.5 * self.dx)

    @property
    def right_value(self) -> float:
        return self(0.5 * self.dx)


def reconstruct(u_left: float, u_avg: float, u_right: float, dx: float) -> CellParabola:
    """Parabola matching the interface values and the cell mean.

    The coefficients are

        c0 = (6 u_avg - u_right - u_left) / 4,
        c1 = (u_right - u_left) / dx,
        c2 = 3 (u_right + u_left - 2 u_avg) / dx**2,

    so the midpoint value c0 ties the three dofs together through the
    trapezoidal identity ``u_avg = u_left/6 + (2/3) c0 + u_right/6``.
    """
    dx = float(dx)
    if not dx > 0.0:
        raise ValueError(f"need dx > 0, got {dx}")
    return CellParabola(
        c0=(6.0 * u_avg - u_right - u_left) / 4.0,
        c1=(u_right - u_left) / dx,
        c2=3.0 * (u_right + u_left - 2.0 * u_avg) / dx**2,
        dx=dx,
    )


def edge_derivative(p: CellParabola, side: str) -> float:
    """Derivative of the reconstruction at the ``"left"`` or ``"right"`` edge.

    The right-edge value applied to ``(u_{i-1/2}, u_i, u_{i+1/2})`` is the
    left-biased point stencil ``(2 u_L - 6 u_avg + 4 u_R)/dx``; the left-edge
    value is the right-biased stencil ``(-4 u_L + 6 u_avg - 2 u_R)/dx`` for
    the shifted cell.
    """
    if side == "left":
        return float(p.derivative(-0.5 * p.dx))
    if side == "right":
        return float(p.derivative(0.5 * p.dx))
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")
