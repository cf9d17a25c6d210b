"""Dense Lyapunov/Riccati kernels and stability checks.

Every H2 evaluation in the package goes through :func:`solve_lyapunov`, and
the centralized (gamma = 0) design goes through :func:`solve_care`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = [
    "SpectrumReport",
    "MatrixEquationError",
    "UnstableCoefficientError",
    "spectrum",
    "solve_lyapunov",
    "solve_care",
    "relative_lyapunov_residual",
    "relative_care_residual",
]

RESIDUAL_TOL = 1e-8
SCHUR_COND_LIMIT = 1e10


class MatrixEquationError(ArithmeticError):
    """A matrix equation could not be solved to the required accuracy."""


class UnstableCoefficientError(MatrixEquationError):
    """Raised when a Lyapunov coefficient matrix is not Hurwitz."""

    def __init__(self, max_real_part):
        self.max_real_part = float(max_real_part)
        super().__init__(
            f"unstable coefficient: max real part of eigenvalues is "
            f"{self.max_real_part:.6g}")


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    max_real_part: float
    is_hurwitz: bool


def _square(M, name="M"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"{name} must be a nonempty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def spectrum(M, hurwitz_tol=0.0):
    """Eigenvalues of `M` and a Hurwitz verdict.

    `M` is Hurwitz when every eigenvalue has real part below ``-hurwitz_tol``.
    """
    M = _square(M)
    try:
        eigs = sla.eigvals(M, check_finite=False)
    except np.linalg.LinAlgError as exc:
        # LAPACK reports the index of the first eigenvalue that failed
        raise MatrixEquationError(
            f"eigenvalue iteration did not converge for order {M.shape[0]}: {exc}"
        ) from exc
    max_re = float(np.max(eigs.real))
    return SpectrumReport(eigenvalues=eigs, max_real_part=max_re,
                          is_hurwitz=bool(max_re < -hurwitz_tol))


def relative_lyapunov_residual(A, P, W):
    """``||A^T P + P A + W||_F / max(1, ||W||_F)``."""
    res = A.T @ P + P @ A + W
    return float(np.linalg.norm(res) / max(1.0, np.linalg.norm(W)))


def solve_lyapunov(A, W, hurwitz_tol=0.0, check_stability=True):
    """Solve ``A^T P + P A = -W`` for symmetric `P`.

    Parameters
    ----------
    A : (n, n) array_like
        Hurwitz coefficient matrix.
    W : (n, n) array_like
        Symmetric right-hand side.
    hurwitz_tol : float, optional
        Stability slack passed to :func:`spectrum`.
    check_stability : bool, optional
        Skip the eigenvalue check when the caller has already done it.

    Returns
    -------
    P : (n, n) ndarray
        Symmetric solution.

    Raises
    ------
    UnstableCoefficientError
        If `A` is not Hurwitz.
    MatrixEquationError
        If the relative residual exceeds 1e-8.
    """
    A = _square(A, "A")
    W = _square(W, "W")
    if W.shape != A.shape:
        raise ValueError(f"W shape {W.shape} does not match A shape {A.shape}")
    if check_stability:
        rep = spectrum(A, hurwitz_tol)
        if not rep.is_hurwitz:
            raise UnstableCoefficientError(rep.max_real_part)
    W = 0.5 * (W + W.T)
    # Bartels-Stewart: real Schur form of A^T followed by triangular solves
    P = sla.solve_continuous_lyapunov(A.T, -W)
    P = 0.5 * (P + P.T)
    res = relative_lyapunov_residual(A, P, W)
    if not res <= RESIDUAL_TOL:
        raise MatrixEquationError(f"Lyapunov residual {res:.3e} exceeds {RESIDUAL_TOL:g}")
    return P


def relative_care_residual(A, B, Q, R, P):
    """Relative Frobenius residual of the continuous-time Riccati equation."""
    BRB = B @ np.linalg.solve(R, B.T)
    res = A.T @ P + P @ A - P @ BRB @ P + Q
    scale = max(1.0, np.linalg.norm(Q), np.linalg.norm(A.T @ P + P @ A),
                np.linalg.norm(P @ BRB @ P))
    return float(np.linalg.norm(res) / scale)


def solve_care(A, B, Q, R):
    """Stabilizing solution of ``A^T P + P A - P B R^{-1} B^T P + Q = 0``.

    The stable invariant subspace of the Hamiltonian
    ``[[A, -B R^{-1} B^T], [-Q, -A^T]]`` is extracted with an ordered real
    Schur decomposition; ``P = U21 U11^{-1}``.

    Returns
    -------
    P : (n, n) ndarray
    K : (p, n) ndarray
        Optimal gain ``R^{-1} B^T P`` for ``u = -K x``.
    """
    A = _square(A, "A")
    Q = _square(Q, "Q")
    R = _square(R, "R")
    B = np.atleast_2d(np.asarray(B, dtype=float))
    n = A.shape[0]
    if B.shape[0] != n or Q.shape != A.shape or R.shape[0] != B.shape[1]:
        raise ValueError("inconsistent CARE dimensions")
    Q = 0.5 * (Q + Q.T)
    R = 0.5 * (R + R.T)
    try:
        np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        raise ValueError("R must be symmetric positive definite") from None

    G = B @ np.linalg.solve(R, B.T)
    H = np.block([[A, -G], [-Q, -A.T]])
    T, Z, sdim = sla.schur(H, output="real", sort="lhp")
    if sdim != n:
        raise MatrixEquationError(
            f"Hamiltonian splitting failed: {sdim} stable eigenvalues, expected {n}")
    U11 = Z[:n, :n]
    U21 = Z[n:, :n]
    cond = np.linalg.cond(U11)
    if not cond < SCHUR_COND_LIMIT:
        raise MatrixEquationError(
            f"Hamiltonian splitting failed: stable subspace basis condition "
            f"{cond:.3e} exceeds {SCHUR_COND_LIMIT:g}")
    P = np.linalg.solve(U11.T, U21.T).T
    P = 0.5 * (P + P.T)
    res = relative_care_residual(A, B, Q, R, P)
    if not res <= RESIDUAL_TOL:
        raise MatrixEquationError(f"Riccati residual {res:.3e} exceeds {RESIDUAL_TOL:g}")
    K = np.linalg.solve(R, B.T @ P)
    if not spectrum(A - B @ K).is_hurwitz:
        raise MatrixEquationError("Hamiltonian splitting failed: closed loop not Hurwitz")
    return P, K
