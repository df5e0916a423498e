"""Von Neumann symbols: the central derivative symbol and mass-symbol synthesis.

With the translation factor ``tau = exp(i theta)``, the central derivative
operator has the dimensionless (per ``1/dx``) symbol

    D(theta) = [[1/tau - tau, 3 - 3/tau],
                [tau - 1,     0        ]],

whose eigenvalues are purely imaginary.  Any Hermitian symbol of the form

    M(theta) = [[alpha,     beta               ],
                [beta*tau,  3 alpha + beta (1+tau)]]

with Laurent polynomials ``alpha`` (symmetric) and ``beta`` (satisfying
``conj(beta) = beta*tau``) skew-symmetrizes ``D``; the diagonal, pentadiagonal
and seven-band mass matrices are exactly the low-order members of this family.
"""

from __future__ import annotations

import dataclasses
from typing import Mapping

import numpy as np

from .operators import MassParams
from .spectral import DefectiveSymbolError

__all__ = [
    "InadmissibleFamilyError",
    "LaurentPoly",
    "admissible_basis",
    "central_symbol",
    "central_symbol_eigenvalues",
    "mass_family_coefficients",
    "mass_symbol_family",
    "mass_symbol_from_eigvectors",
]


class InadmissibleFamilyError(ValueError):
    """The (alpha, beta) pair does not produce a Hermitian symbol."""

    def __init__(self, message: str, alpha_residual: float, beta_residual: float):
        super().__init__(message)
        self.alpha_residual = alpha_residual
        self.beta_residual = beta_residual


@dataclasses.dataclass(frozen=True, eq=False)
class LaurentPoly:
    """Finite Laurent polynomial in ``tau``, stored as ``{power: coefficient}``."""

    coeffs: Mapping[int, float]

    def __post_init__(self) -> None:
        clean = {int(p): float(c) for p, c in self.coeffs.items() if c != 0.0}
        object.__setattr__(self, "coeffs", clean)

    def coefficient(self, p: int) -> float:
        return self.coeffs.get(int(p), 0.0)

    def support(self) -> list[int]:
        return sorted(self.coeffs)

    def __call__(self, tau: complex) -> complex:
        return sum(c * tau**p for p, c in self.coeffs.items())

    def at_theta(self, theta: float) -> complex:
        return self(np.exp(1j * theta))


def _alpha_residual(alpha: LaurentPoly) -> float:
    """Defect of ``conj(alpha) == alpha`` on the unit circle: ``c_p == c_{-p}``."""
    powers = set(alpha.coeffs) | {-p for p in alpha.coeffs}
    return max((abs(alpha.coefficient(p) - alpha.coefficient(-p)) for p in powers), default=0.0)


def _beta_residual(beta: LaurentPoly) -> float:
    """Defect of ``conj(beta) == beta*tau``: ``c_{-p} == c_{p-1}`` for every p."""
    powers = {-p for p in beta.coeffs} | {p + 1 for p in beta.coeffs}
    return max((abs(beta.coefficient(-p) - beta.coefficient(p - 1)) for p in powers), default=0.0)


def central_symbol(theta: float) -> np.ndarray:
    """Dimensionless symbol of the central derivative operator (per 1/dx)."""
    tau = np.exp(1j * theta)
    return np.array(
        [[1.0 / tau - tau, 3.0 - 3.0 / tau], [tau - 1.0, 0.0]], dtype=complex
    )


def central_symbol_eigenvalues(theta: float) -> tuple[complex, complex]:
    """Closed-form eigenvalues of the central symbol,

        lam_pm = (tau - 1) / (2 tau) * (-tau - 1 +- sqrt(1 + 14 tau + tau**2)).

    Both are purely imaginary for every theta (the symbol is similar to a
    skew-Hermitian matrix); at theta = 0 both vanish.
    """
    tau = np.exp(1j * theta)
    root = np.sqrt(complex(1.0 + 14.0 * tau + tau * tau))
    pre = (tau - 1.0) / (2.0 * tau)
    return complex(pre * (-tau - 1.0 + root)), complex(pre * (-tau - 1.0 - root))


def mass_symbol_from_eigvectors(theta: float) -> np.ndarray:
    """Hermitian mass symbol synthesized from the eigenvector matrix.

    Diagonalizing ``D = V diag(lam) V^{-1}`` and setting ``R = V^{-1}`` gives
    ``M = R^dagger R``, which is Hermitian positive definite and satisfies
    ``M D + D^dagger M = 0`` because the eigenvalues are purely imaginary.
    At theta = 0 the two eigenvalues collide (double zero) and the
    construction is refused rather than regularized.
    """
    D = central_symbol(theta)
    lam, V = np.linalg.eig(D)
    scale = max(1.0, float(np.abs(lam).max()))
    if abs(lam[0] - lam[1]) <= 1e-8 * scale:
        raise DefectiveSymbolError(
            f"central symbol at theta={theta:.6g} has coalescent eigenvalues; "
            "no eigenvector normalization is defined there"
        )
    R = np.linalg.inv(V)
    return R.conj().T @ R


def mass_symbol_family(alpha: LaurentPoly, beta: LaurentPoly, theta: float) -> np.ndarray:
    """Evaluate the two-parameter Hermitian mass-symbol family

        [[alpha, beta], [beta*tau, 3 alpha + beta (1 + tau)]].

    ``(alpha, beta)`` must satisfy the Hermitian admissibility identities
    ``conj(alpha) = alpha`` and ``conj(beta) = beta*tau`` as exact coefficient
    identities; inadmissible pairs are rejected with the coefficient residuals.
    """
    ra = _alpha_residual(alpha)
    rb = _beta_residual(beta)
    if ra != 0.0 or rb != 0.0:
        raise InadmissibleFamilyError(
            f"(alpha, beta) is not Hermitian-admissible "
            f"(alpha residual {ra:.3e}, beta residual {rb:.3e})",
            alpha_residual=ra,
            beta_residual=rb,
        )
    tau = np.exp(1j * theta)
    a = alpha(tau)
    b = beta(tau)
    return np.array([[a, b], [b * tau, 3.0 * a + b * (1.0 + tau)]], dtype=complex)


def admissible_basis(s: int) -> tuple[list[LaurentPoly], list[LaurentPoly]]:
    """Basis polynomials of the admissible family up to support ``s``.

    alpha: ``1, tau + 1/tau, tau**2 + 1/tau**2, ...``
    beta:  ``1 + 1/tau, tau + 1/tau**2, ...`` (empty for s = 0).
    """
    if s < 0:
        raise ValueError(f"need s >= 0, got {s}")
    alphas = [LaurentPoly({0: 1.0})]
    alphas += [LaurentPoly({m: 1.0, -m: 1.0}) for m in range(1, s + 1)]
    betas = [LaurentPoly({m - 1: 1.0, -m: 1.0}) for m in range(1, s + 1)]
    return alphas, betas


def mass_family_coefficients(params: MassParams) -> tuple[LaurentPoly, LaurentPoly]:
    """The (alpha, beta) pair whose family symbol matches the mass operator.

    For the seven-band family (pentadiagonal when ``m_vvp = m_vvv = 0``):

        alpha = m_p + y (tau + 1/tau) + (m_vvv - m_vvp)/3 (tau**2 + 1/tau**2),
        beta  = m_vp (1 + 1/tau) + m_vvp (tau + 1/tau**2),

    an exact algebraic correspondence (entrywise, per unit ``dx``).
    """
    p = params
    far = (p.m_vvv - p.m_vvp) / 3.0
    alpha = LaurentPoly({0: p.m_p, 1: p.y, -1: p.y, 2: far, -2: far})
    beta = LaurentPoly({0: p.m_vp, -1: p.m_vp, 1: p.m_vvp, -2: p.m_vvp})
    return alpha, beta
