"""Fourier-symbol analysis of block-circulant operators.

A block-circulant operator with 2x2 blocks ``A_j`` is block-diagonalized by
the DFT: mode ``k`` sees the 2x2 symbol

    B_k = scale * sum_j A_j r**(j k),        r = exp(2 pi i / n),

and the union of the symbol eigenvalues over all modes is the full spectrum.
Everything here works mode-wise (O(n) total) with dense materialization only
as a cross-check oracle.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .operators import BlockCirculantOp

__all__ = [
    "DefectiveSymbolError",
    "Definiteness",
    "Symbol",
    "block_diagonalize_check",
    "eigenvalues",
    "eigenvector",
    "hermitian_classify",
    "symbol",
]


class DefectiveSymbolError(ValueError):
    """A 2x2 symbol is not diagonalizable; eigenvectors are not fabricated."""


@dataclasses.dataclass(frozen=True, eq=False)
class Symbol:
    """The 2x2 symbol of one Fourier mode (``theta = 2 pi k / n``)."""

    entries: np.ndarray
    theta: float
    k: int
    n: int


def _all_symbols(op: BlockCirculantOp) -> np.ndarray:
    """Symbols of every mode, shape ``(n, 2, 2)`` complex."""
    theta = 2.0 * np.pi * np.arange(op.n) / op.n
    out = np.zeros((op.n, 2, 2), dtype=complex)
    for j, a in op.blocks.items():
        out += np.exp(1j * (theta * j))[:, None, None] * a
    return op.scale * out


def symbol(op: BlockCirculantOp, k: int) -> Symbol:
    """The symbol ``B_k`` of mode ``k`` (including the operator's scale)."""
    if not 0 <= k < op.n:
        raise ValueError(f"mode index k={k} out of range [0, {op.n})")
    theta = 2.0 * np.pi * k / op.n
    entries = np.zeros((2, 2), dtype=complex)
    for j, a in op.blocks.items():
        entries += np.exp(1j * (theta * j)) * a
    return Symbol(entries=op.scale * entries, theta=theta, k=int(k), n=op.n)


def _eig_pairs(B: np.ndarray) -> np.ndarray:
    """Eigenvalue pairs of stacked 2x2 matrices, each pair sorted by (re, im).

    Uses the closed-form quadratic with a cancellation-safe discriminant: the
    square root is oriented along the trace, and the second eigenvalue comes
    from the product identity ``lam1 * lam2 = det``.
    """
    t = B[..., 0, 0] + B[..., 1, 1]
    d = B[..., 0, 0] * B[..., 1, 1] - B[..., 0, 1] * B[..., 1, 0]
    s = np.sqrt((t * t - 4.0 * d).astype(complex))
    s = np.where(np.real(np.conj(t) * s) < 0.0, -s, s)
    lam1 = 0.5 * (t + s)
    safe = np.where(lam1 == 0.0, 1.0, lam1)
    lam2 = np.where(lam1 == 0.0, 0.5 * (t - s), d / safe)
    first = (np.real(lam1) < np.real(lam2)) | (
        (np.real(lam1) == np.real(lam2)) & (np.imag(lam1) <= np.imag(lam2))
    )
    lo = np.where(first, lam1, lam2)
    hi = np.where(first, lam2, lam1)
    return np.stack([lo, hi], axis=-1)


def eigenvalues(op: BlockCirculantOp) -> np.ndarray:
    """All ``2n`` eigenvalues: the symbol pairs concatenated for ``k = 0..n-1``.

    Within a mode the pair is ordered by (real, imaginary); the multiset
    equals the dense-matrix spectrum.
    """
    return _eig_pairs(_all_symbols(op)).reshape(-1)


def eigenvector(op: BlockCirculantOp, k: int, which: int) -> np.ndarray:
    """Full eigenvector ``(v, r^k v, ..., r^{(n-1)k} v)`` for one symbol branch.

    ``which`` selects the branch in the same (re, im) order as
    :func:`eigenvalues`.  A scalar symbol ``B_k = lam*I`` is diagonalizable
    with arbitrary basis; the canonical choice ``v = (1, 1)/sqrt(2)`` and
    ``(1, -1)/sqrt(2)`` makes the ``k = 0`` branches of a consistent operator
    the constant state and the alternating point/average state.  A genuinely
    defective symbol raises :class:`DefectiveSymbolError`.
    """
    if which not in (0, 1):
        raise ValueError(f"which must be 0 or 1, got {which}")
    sym = symbol(op, k)
    B = sym.entries
    pair = _eig_pairs(B[None])[0]
    lam = pair[which]
    bnorm = float(np.abs(B).max())
    gap = abs(pair[1] - pair[0])
    if gap <= 1e-8 * max(bnorm, abs(pair[0]), abs(pair[1])) or bnorm == 0.0:
        # coalescent eigenvalues: diagonalizable only in the scalar case
        if np.abs(B - lam * np.eye(2)).max() <= 1e-10 * max(bnorm, abs(lam), 1e-300):
            v = np.array([1.0, 1.0 - 2.0 * which]) / np.sqrt(2.0)
        else:
            raise DefectiveSymbolError(
                f"symbol of mode k={k} (theta={sym.theta:.6g}) has a double "
                f"eigenvalue {lam:.6g} with a one-dimensional eigenspace"
            )
    else:
        r1 = np.array([B[0, 1], lam - B[0, 0]])
        r2 = np.array([lam - B[1, 1], B[1, 0]])
        v = r1 if np.linalg.norm(r1) >= np.linalg.norm(r2) else r2
        v = v / np.linalg.norm(v)
    phases = np.exp(2j * np.pi * k / op.n * np.arange(op.n))
    return np.kron(phases, v) / np.sqrt(op.n)


def block_diagonalize_check(op: BlockCirculantOp) -> float:
    """Residual of the DFT block diagonalization against the dense matrix.

    Returns ``|| (F* kron I) A (F kron I) - diag(B_0..B_{n-1}) ||_inf`` with
    ``F`` the unitary DFT matrix.
    """
    n = op.n
    F = np.exp(2j * np.pi / n * np.outer(np.arange(n), np.arange(n))) / np.sqrt(n)
    G = np.kron(F, np.eye(2))
    transformed = G.conj().T @ op.dense() @ G
    expected = np.zeros_like(transformed)
    for k, B in enumerate(_all_symbols(op)):
        expected[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = B
    return float(np.abs(transformed - expected).sum(axis=1).max())


_KINDS = (
    "positive_definite",
    "positive_semidefinite",
    "indefinite",
    "negative_semidefinite",
    "negative_definite",
)


@dataclasses.dataclass(frozen=True)
class Definiteness:
    """Spectral classification of a symmetric block-circulant operator."""

    kind: str
    zero_multiplicity: int
    min_eigenvalue: float
    max_eigenvalue: float


def hermitian_classify(op: BlockCirculantOp, rel_zero_tol: float = 1e-10) -> Definiteness:
    """Classify a symmetric operator from its (real) symbol eigenvalues.

    Eigenvalues within ``rel_zero_tol * max|lambda|`` of zero count as zero;
    the tolerance is relative to the spectral radius so the classification is
    invariant under dx rescaling.
    """
    defect = (op - op.T).norm_inf()
    if defect > 1e-12 * max(op.norm_inf(), 1e-300):
        raise ValueError(f"operator is not symmetric (defect {defect:.3e})")
    B = _all_symbols(op)
    H = 0.5 * (B + np.conj(np.swapaxes(B, 1, 2)))
    a = H[:, 0, 0].real
    d = H[:, 1, 1].real
    mean = 0.5 * (a + d)
    rad = np.sqrt((0.5 * (a - d)) ** 2 + np.abs(H[:, 0, 1]) ** 2)
    lam = np.concatenate([mean - rad, mean + rad])
    eps0 = rel_zero_tol * float(np.abs(lam).max(initial=0.0))
    zeros = int(np.count_nonzero(np.abs(lam) <= eps0))
    npos = int(np.count_nonzero(lam > eps0))
    nneg = int(np.count_nonzero(lam < -eps0))
    if nneg == 0:
        kind = "positive_definite" if zeros == 0 else "positive_semidefinite"
    elif npos == 0:
        kind = "negative_definite" if zeros == 0 else "negative_semidefinite"
    else:
        kind = "indefinite"
    return Definiteness(
        kind=kind,
        zero_multiplicity=zeros,
        min_eigenvalue=float(lam.min()),
        max_eigenvalue=float(lam.max()),
    )
