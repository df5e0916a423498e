"""Block-circulant operators for the periodic Active Flux discretization.

The semi-discrete scheme evolves, per cell ``i`` of a uniform periodic mesh,
one interface point value and one cell average.  All state vectors use the
interleaved layout

    index 2i   -> point value  u_{i-1/2}  (left interface of cell i),
    index 2i+1 -> cell average u_i,

with the periodic identification ``u_{n-1/2} == u_{-1/2}``.  Every operator in
this module (derivative operators, mass matrices) is block circulant with
2x2 blocks: block row ``i`` applies the block ``A_j`` to the dofs of cell
``(i + j) mod n``.  Blocks are stored by their signed stencil offset ``j``
together with a single scalar prefactor (``1/dx`` for derivatives, ``dx`` for
mass matrices) so that stencil entries stay exact integers or exact
parameter expressions in floating point.

For very small ``n`` distinct signed offsets may alias the same block column
(e.g. ``-2 == +1 (mod 3)``); all evaluation paths accumulate aliased blocks,
which preserves symmetry and the operator identities.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "DENSE_LIMIT",
    "BlockCirculantOp",
    "DofVector",
    "Grid",
    "MassParams",
    "banded_mass",
    "build_grid",
    "central_D",
    "diagonal_mass",
    "extended_mass",
    "scaled_central_mass",
    "upwind_D_minus",
    "upwind_D_plus",
    "upwind_mass",
]

#: Interleaved state vector of length 2n; see the module docstring for layout.
DofVector = np.ndarray

#: Largest n for which dense materialization is permitted (oracle cross-checks
#: only; everything structural runs on blocks and Fourier symbols).
DENSE_LIMIT = 2048


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclasses.dataclass(frozen=True, eq=False)
class Grid:
    """Uniform periodic 1-D mesh with ``n`` cells on ``[x_min, x_max]``.

    ``interfaces[i]`` is the coordinate of point dof ``2i`` (the left interface
    of cell ``i``); ``centers[i]`` is the midpoint of cell ``i``.
    """

    n: int
    x_min: float
    x_max: float
    dx: float
    interfaces: np.ndarray
    centers: np.ndarray

    @property
    def length(self) -> float:
        return self.x_max - self.x_min


def build_grid(n: int, x_min: float = 0.0, x_max: float = 2.0 * math.pi) -> Grid:
    """Build a uniform periodic grid with ``n >= 3`` cells.

    ``n < 3`` is rejected: the three-cell stencils would make distinct
    entries collide on the same dof.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise TypeError(f"n must be an integer, got {n!r}")
    if n < 3:
        raise ValueError(f"need at least 3 cells, got n={n}")
    x_min = float(x_min)
    x_max = float(x_max)
    if not (x_max > x_min):
        raise ValueError(f"empty domain: x_max={x_max} must exceed x_min={x_min}")
    dx = (x_max - x_min) / n
    i = np.arange(n)
    return Grid(
        n=int(n),
        x_min=x_min,
        x_max=x_max,
        dx=dx,
        interfaces=_frozen(x_min + i * dx),
        centers=_frozen(x_min + (i + 0.5) * dx),
    )


@dataclasses.dataclass(frozen=True)
class MassParams:
    """Free coefficients of the mass-matrix families.

    The primary five are stored; the coupling coefficients are always derived:

        m_pp = (3 m_p - m_v + 2 m_vv) / 6,      m_vp = (m_v - 3 m_p) / 2,

    and for the seven-band family additionally

        y = (3 m_p - m_v + 2 m_vv - 2 m_vvp) / 6.
    """

    m_v: float
    m_p: float
    m_vv: float = 0.0
    m_vvp: float = 0.0
    m_vvv: float = 0.0

    @property
    def m_pp(self) -> float:
        return (3.0 * self.m_p - self.m_v + 2.0 * self.m_vv) / 6.0

    @property
    def m_vp(self) -> float:
        return (self.m_v - 3.0 * self.m_p) / 2.0

    @property
    def y(self) -> float:
        return (3.0 * self.m_p - self.m_v + 2.0 * self.m_vv - 2.0 * self.m_vvp) / 6.0


@dataclasses.dataclass(frozen=True, eq=False)
class BlockCirculantOp:
    """Operator on interleaved dof vectors, given by a ring of 2x2 blocks.

    ``blocks[j]`` acts on cell ``i + j`` from block row ``i`` and is stored
    unscaled; the effective matrix is ``scale * circulant(blocks)``.  Offsets
    are kept as given (signed, possibly outside ``range(n)``) and reduced
    mod ``n`` only when the operator is evaluated.
    """

    n: int
    dx: float
    scale: float
    blocks: Mapping[int, np.ndarray]

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"need n >= 3, got {self.n}")
        clean = {}
        for j, a in self.blocks.items():
            a = np.asarray(a, dtype=float)
            if a.shape != (2, 2):
                raise ValueError(f"block at offset {j} has shape {a.shape}, want (2, 2)")
            if np.any(a != 0.0):
                clean[int(j)] = _frozen(a)
        object.__setattr__(self, "blocks", clean)

    # -- structure ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (2 * self.n, 2 * self.n)

    def offsets(self) -> list[int]:
        return sorted(self.blocks)

    def block(self, j: int) -> np.ndarray:
        """The stored block at signed offset ``j`` (zeros if absent)."""
        return self.blocks.get(int(j), _ZERO_BLOCK)

    def reduced_blocks(self) -> dict[int, np.ndarray]:
        """Blocks accumulated onto canonical offsets ``0..n-1``."""
        red: dict[int, np.ndarray] = {}
        for j, a in self.blocks.items():
            r = j % self.n
            red[r] = red[r] + a if r in red else a.copy()
        return red

    # -- evaluation --------------------------------------------------------

    def matvec(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        if u.shape != (2 * self.n,):
            raise ValueError(f"expected shape ({2 * self.n},), got {u.shape}")
        x = u.reshape(self.n, 2)
        out = np.zeros(x.shape, dtype=np.result_type(x.dtype, float))
        for j, a in self.blocks.items():
            # block row i reads cell i + j, so the operand rolls backwards
            out += np.roll(x, -j, axis=0) @ a.T
        return self.scale * out.reshape(-1)

    def dense(self) -> np.ndarray:
        """Materialize the full ``2n x 2n`` matrix (guarded by DENSE_LIMIT)."""
        if self.n > DENSE_LIMIT:
            raise ValueError(f"n={self.n} exceeds the dense limit {DENSE_LIMIT}")
        out = np.zeros(self.shape)
        rows = np.arange(self.n)
        for j, a in self.reduced_blocks().items():
            cols = (rows + j) % self.n
            for r in range(2):
                for c in range(2):
                    out[2 * rows + r, 2 * cols + c] += self.scale * a[r, c]
        return out

    def norm_inf(self) -> float:
        """Matrix infinity norm (maximum absolute row sum)."""
        red = self.reduced_blocks()
        row = np.zeros(2)
        for a in red.values():
            row += np.abs(self.scale * a).sum(axis=1)
        return float(row.max(initial=0.0))

    # -- algebra -----------------------------------------------------------

    def _require_compatible(self, other: "BlockCirculantOp") -> None:
        if self.n != other.n or self.dx != other.dx:
            raise ValueError(
                f"incompatible operators: (n={self.n}, dx={self.dx}) "
                f"vs (n={other.n}, dx={other.dx})"
            )

    def __add__(self, other: "BlockCirculantOp") -> "BlockCirculantOp":
        if not isinstance(other, BlockCirculantOp):
            return NotImplemented
        self._require_compatible(other)
        if self.scale == other.scale:
            merged = {j: a.copy() for j, a in self.blocks.items()}
            for j, a in other.blocks.items():
                merged[j] = merged[j] + a if j in merged else a.copy()
            return BlockCirculantOp(self.n, self.dx, self.scale, merged)
        # unequal prefactors: fold them into the blocks
        merged = {j: self.scale * a for j, a in self.blocks.items()}
        for j, a in other.blocks.items():
            b = other.scale * a
            merged[j] = merged[j] + b if j in merged else b
        return BlockCirculantOp(self.n, self.dx, 1.0, merged)

    def __sub__(self, other: "BlockCirculantOp") -> "BlockCirculantOp":
        if not isinstance(other, BlockCirculantOp):
            return NotImplemented
        return self + (-1.0) * other

    def __mul__(self, c: float) -> "BlockCirculantOp":
        if not isinstance(c, (int, float, np.floating, np.integer)):
            return NotImplemented
        return BlockCirculantOp(self.n, self.dx, self.scale * float(c), dict(self.blocks))

    __rmul__ = __mul__

    def __neg__(self) -> "BlockCirculantOp":
        return (-1.0) * self

    def __matmul__(self, other):
        if isinstance(other, BlockCirculantOp):
            self._require_compatible(other)
            conv: dict[int, np.ndarray] = {}
            for i, a in self.blocks.items():
                for j, b in other.blocks.items():
                    # row picks A_i from cell k+i, whose row picks B_j from cell k+i+j
                    k = i + j
                    ab = a @ b
                    conv[k] = conv[k] + ab if k in conv else ab
            return BlockCirculantOp(self.n, self.dx, self.scale * other.scale, conv)
        if isinstance(other, np.ndarray):
            return self.matvec(other)
        return NotImplemented

    @property
    def T(self) -> "BlockCirculantOp":
        """Transpose: block at offset ``j`` becomes the transpose at ``-j``."""
        return BlockCirculantOp(
            self.n, self.dx, self.scale, {-j: a.T for j, a in self.blocks.items()}
        )

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "dx": self.dx,
            "scale": self.scale,
            "blocks": [
                {"offset": j, "rows": self.blocks[j].tolist()} for j in self.offsets()
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "BlockCirculantOp":
        try:
            blocks = {int(b["offset"]): np.asarray(b["rows"], dtype=float) for b in data["blocks"]}
            return cls(int(data["n"]), float(data["dx"]), float(data["scale"]), blocks)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed operator description: {exc}") from exc


_ZERO_BLOCK = _frozen(np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# derivative operators
# ---------------------------------------------------------------------------

def central_D(grid: Grid) -> BlockCirculantOp:
    """Central derivative operator.

    Point rows approximate the derivative at the interface from both adjacent
    parabolae,

        (u_{i-1/2} - 3 u_i + 3 u_{i+1} - u_{i+3/2}) / dx,

    and average rows apply the flux difference ``(u_{i+1/2} - u_{i-1/2})/dx``.
    Stencil entries are exact integers; the only scaling is the 1/dx prefactor.
    """
    blocks = {
        -1: [[1.0, -3.0], [0.0, 0.0]],
        0: [[0.0, 3.0], [-1.0, 0.0]],
        1: [[-1.0, 0.0], [1.0, 0.0]],
    }
    return BlockCirculantOp(grid.n, grid.dx, 1.0 / grid.dx, blocks)


def upwind_D_minus(grid: Grid) -> BlockCirculantOp:
    """One-sided derivative operator biased left (advection speed > 0).

    Point rows differentiate the parabola of the cell to the left of the
    interface, ``(2 u_{i-1/2} - 6 u_i + 4 u_{i+1/2}) / dx``; average rows are
    shared with :func:`central_D`.
    """
    blocks = {
        -1: [[2.0, -6.0], [0.0, 0.0]],
        0: [[4.0, 0.0], [-1.0, 0.0]],
        1: [[0.0, 0.0], [1.0, 0.0]],
    }
    return BlockCirculantOp(grid.n, grid.dx, 1.0 / grid.dx, blocks)


def upwind_D_plus(grid: Grid) -> BlockCirculantOp:
    """One-sided derivative operator biased right (advection speed < 0).

    Point rows differentiate the parabola of the cell to the right of the
    interface, ``(-4 u_{i+1/2} + 6 u_{i+1} - 2 u_{i+3/2}) / dx``; average rows
    are shared with :func:`central_D`.  Averaging the two one-sided operators
    recovers the central one entrywise.
    """
    blocks = {
        0: [[-4.0, 6.0], [-1.0, 0.0]],
        1: [[-2.0, 0.0], [1.0, 0.0]],
    }
    return BlockCirculantOp(grid.n, grid.dx, 1.0 / grid.dx, blocks)


# ---------------------------------------------------------------------------
# mass matrices
# ---------------------------------------------------------------------------

def diagonal_mass(grid: Grid) -> BlockCirculantOp:
    """Diagonal mass matrix: ``dx/4`` on points, ``3 dx/4`` on averages.

    Normalized so that ``1^T M 1 = x_max - x_min``; the induced quadrature is
    the chained trapezoidal rule through interface and reconstructed midpoint
    values.
    """
    return BlockCirculantOp(grid.n, grid.dx, grid.dx, {0: [[0.25, 0.0], [0.0, 0.75]]})


def _banded_blocks(p: MassParams) -> dict[int, list]:
    m_pp, m_vp = p.m_pp, p.m_vp
    return {
        -1: [[m_pp, m_vp], [0.0, p.m_vv]],
        0: [[p.m_p, m_vp], [m_vp, p.m_v]],
        1: [[m_pp, 0.0], [m_vp, p.m_vv]],
    }


def banded_mass(grid: Grid, params: MassParams) -> BlockCirculantOp:
    """Symmetric pentadiagonal mass matrix family.

    Point rows carry ``(m_pp, m_vp, m_p, m_vp, m_pp) * dx`` and average rows
    ``(m_vv, m_vp, m_v, m_vp, m_vv) * dx`` with the derived couplings

        m_vp = (m_v - 3 m_p) / 2,        m_pp = (3 m_p - m_v + 2 m_vv) / 6,

    which make the matrix skew-symmetrize the central derivative operator for
    every parameter choice.  Definiteness depends on the parameters and is
    classified separately.
    """
    if params.m_vvp != 0.0 or params.m_vvv != 0.0:
        raise ValueError(
            "banded_mass takes m_vvp = m_vvv = 0; use extended_mass for the seven-band family"
        )
    return BlockCirculantOp(grid.n, grid.dx, grid.dx, _banded_blocks(params))


def upwind_mass(grid: Grid, m_v: float = 1.0) -> BlockCirculantOp:
    """The unique pentadiagonal mass matrix adjoint-pairing the one-sided operators.

    Equals :func:`banded_mass` at ``m_p = 2 m_v / 3``, ``m_vv = 0`` (hence
    ``m_vp = -m_v/2``, ``m_pp = m_v/6``).  Positive semidefinite for
    ``m_v > 0`` with one zero eigenvalue, eigenvector ``1``; every row sums
    to zero.
    """
    m_v = float(m_v)
    return banded_mass(grid, MassParams(m_v=m_v, m_p=2.0 * m_v / 3.0))


def scaled_central_mass(grid: Grid, m_v: float, m_p: float) -> BlockCirculantOp:
    """Positive definite pentadiagonal mass, rescaled to unit-measure rows.

    Requires the open definiteness window ``2 m_v/9 < m_p < 2 m_v/3`` (with
    ``m_v > 0``); the window boundary gives a singular matrix and is rejected.
    The raw banded matrix has per-cell row sum ``(8 m_v - 12 m_p)/3 * dx``, so
    multiplying by ``3 / (8 m_v - 12 m_p)`` restores ``1^T M 1 = x_max - x_min``.
    """
    m_v = float(m_v)
    m_p = float(m_p)
    if not m_v > 0.0:
        raise ValueError(f"need m_v > 0, got m_v={m_v}")
    if not (2.0 * m_v / 9.0 < m_p < 2.0 * m_v / 3.0):
        raise ValueError(
            f"m_p={m_p} outside the open definiteness window "
            f"({2.0 * m_v / 9.0}, {2.0 * m_v / 3.0}) for m_v={m_v}"
        )
    factor = 3.0 / (8.0 * m_v - 12.0 * m_p)
    return factor * banded_mass(grid, MassParams(m_v=m_v, m_p=m_p))


def extended_mass(grid: Grid, params: MassParams) -> BlockCirculantOp:
    """Symmetric seven-band mass matrix family.

    Point rows carry

        ((m_vvv - m_vvp)/3, m_vvp, y, m_vp, m_p, m_vp, y, m_vvp, (m_vvv - m_vvp)/3) * dx

    and average rows ``(0, m_vvv, m_vvp, m_vv, m_vp, m_v, m_vp, m_vv, m_vvp,
    m_vvv) * dx`` with ``y = (3 m_p - m_v + 2 m_vv - 2 m_vvp)/6``.  Reduces to
    :func:`banded_mass` at ``m_vvp = m_vvv = 0`` and skew-symmetrizes the
    central derivative operator for every parameter choice.
    """
    p = params
    m_vp, y = p.m_vp, p.y
    far = (p.m_vvv - p.m_vvp) / 3.0
    blocks = {
        -2: [[far, p.m_vvp], [0.0, p.m_vvv]],
        -1: [[y, m_vp], [p.m_vvp, p.m_vv]],
        0: [[p.m_p, m_vp], [m_vp, p.m_v]],
        1: [[y, p.m_vvp], [m_vp, p.m_vv]],
        2: [[far, 0.0], [p.m_vvp, p.m_vvv]],
    }
    return BlockCirculantOp(grid.n, grid.dx, grid.dx, blocks)


# ---------------------------------------------------------------------------
# dof-vector helpers
# ---------------------------------------------------------------------------

def point_values(u: DofVector) -> np.ndarray:
    """The interface point values (even entries) of an interleaved state."""
    return np.asarray(u)[0::2]


def cell_averages(u: DofVector) -> np.ndarray:
    """The cell averages (odd entries) of an interleaved state."""
    return np.asarray(u)[1::2]


def interleave(points: np.ndarray, averages: np.ndarray) -> DofVector:
    points = np.asarray(points, dtype=float)
    averages = np.asarray(averages, dtype=float)
    if points.shape != averages.shape or points.ndim != 1:
        raise ValueError("points and averages must be 1-D arrays of equal length")
    out = np.empty(2 * points.size)
    out[0::2] = points
    out[1::2] = averages
    return out


def coordinate_dofs(grid: Grid) -> DofVector:
    """Samples of the identity map x: points at interfaces, averages at centers."""
    return interleave(grid.interfaces, grid.centers)
