"""Clifford algebra of Euclidean 4-space and spin lifts of SO(4) frames.

Conventions: with Pauli matrices tau_1..tau_3 and tau_4 = I, the four
gamma matrices are

    gamma^i = tau_1 (x) tau_i   (i = 1, 2, 3),
    gamma^4 = tau_2 (x) I,

which are Hermitian, square to the identity and pairwise anticommute.
``spin_lift`` maps a special orthogonal 4x4 matrix R to a unitary U with
U gamma^i U^{-1} = sum_mu R^i_mu gamma^mu; U is unique up to a global
sign, which is fixed here by the principal logarithm of R and is
irrelevant to every bilinear quantity downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


__all__ = [
    "GammaSet",
    "SpinMatrix",
    "GAMMA",
    "SIGMA34",
    "TANGENT_SPIN_GENERATOR",
    "gamma",
    "basis_square",
    "basis_round",
    "cospinor",
    "so4_pairing",
    "spin_lift",
    "gauge_rotation",
    "iota_g",
    "iota_r",
    "match_sign",
]


_I2 = np.eye(2, dtype=complex)
TAU = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
    _I2,
)

# gamma^1..gamma^4; index 0 unused so that gamma(i) is 1-based like the math
GAMMA = (
    np.kron(TAU[0], TAU[0]),
    np.kron(TAU[0], TAU[1]),
    np.kron(TAU[0], TAU[2]),
    np.kron(TAU[1], TAU[3]),
)

# generator of normal-plane rotations: gamma^3 gamma^4 = i diag(1,-1,-1,1)
SIGMA34 = GAMMA[2] @ GAMMA[3]

# image of the 2d volume element tau_1 tau_2 under the ring embedding
TANGENT_SPIN_GENERATOR = np.kron(_I2, TAU[0] @ TAU[1])


@dataclass(frozen=True)
class GammaSet:
    """The four constant gamma matrices as one bundle."""

    matrices: tuple = GAMMA


@dataclass(frozen=True)
class SpinMatrix:
    """A unitary spin transformation U = exp(-Omega) with its generator.

    ``flagged`` marks lifts of rotations with a pi-angle invariant plane,
    where the principal logarithm is branch-ambiguous and the angle was
    nudged by 1e-9 to pick a branch.
    """

    matrix: np.ndarray
    generator: np.ndarray
    flagged: bool = False


def gamma(i: int) -> np.ndarray:
    """Return gamma^i for i in 1..4."""
    if i not in (1, 2, 3, 4):
        raise IndexError(f"gamma index out of range: {i}")
    return GAMMA[i - 1]


def basis_square():
    """The four standard unit spinors (orthonormal under the pairing)."""
    return tuple(np.eye(4, dtype=complex)[:, a].copy() for a in range(4))


def basis_round():
    """Constant spinors whose gamma bilinears give the coordinate one-forms.

    For the k-th spinor psi the 4-vector with components
    conj(psi) gamma^j psi equals the k-th standard basis vector.
    """
    return (
        0.5 * np.array([1, 1, 1, 1], dtype=complex),
        0.5 * np.array([1, 1j, 1, 1j], dtype=complex),
        np.array([1, 0, 1, 0], dtype=complex) / np.sqrt(2.0),
        0.5 * np.array([1, 1, 1j, 1j], dtype=complex),
    )


def cospinor(psi) -> np.ndarray:
    """Hermitian-conjugate row form of a spinor."""
    return np.conj(np.asarray(psi, dtype=complex))


def so4_pairing(psi_bar, psi) -> np.ndarray:
    """Component j is psi_bar . gamma^j . psi  (j = 1..4)."""
    psi_bar = np.asarray(psi_bar, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    return np.array([psi_bar @ g @ psi for g in GAMMA])


def _principal_antisymmetric_log(R, tol):
    """Principal real logarithm of special orthogonal R via real Schur form.

    Returns (A, flagged); flagged is set when an invariant plane rotates by
    an angle within 1e-6 of pi.  There the branch is fixed by shrinking
    the angle by 1e-12: enough to make the selection deterministic, small
    enough that the noise it injects into lifted frame fields stays far
    below second-order finite-difference tolerances.
    """
    T, Q = scipy.linalg.schur(R, output="real")
    n = R.shape[0]
    S = np.zeros((n, n))
    flagged = False
    minus_ones = []
    j = 0
    while j < n:
        if j + 1 < n and abs(T[j + 1, j]) > tol:
            phi = float(np.arctan2(T[j + 1, j], T[j, j]))
            if abs(phi) > np.pi - 1e-6:
                phi = np.sign(phi) * (np.pi - 1e-12)
                flagged = True
            S[j, j + 1] = -phi
            S[j + 1, j] = phi
            j += 2
        else:
            if T[j, j] < 0.0:
                minus_ones.append(j)
            j += 1
    # pairs of -1 eigenvalues form a pi-rotation plane (det is +1)
    for a, b in zip(minus_ones[::2], minus_ones[1::2]):
        phi = np.pi - 1e-12
        S[a, b] = -phi
        S[b, a] = phi
        flagged = True
    return Q @ S @ Q.T, flagged


def spin_lift(rotation, tol: float = 1e-10) -> SpinMatrix:
    """Lift a special orthogonal 4x4 matrix to the spin group.

    The generator is Omega = (1/4) sum_ij A_ij gamma^i gamma^j with A the
    principal real logarithm of the rotation, and U = exp(-Omega).
    """
    R = np.asarray(rotation, dtype=float)
    if R.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {R.shape}")
    ortho_defect = np.max(np.abs(R.T @ R - np.eye(4)))
    if ortho_defect > tol:
        raise ValueError(
            f"matrix is not orthogonal (defect {ortho_defect:.3e})"
        )
    det = np.linalg.det(R)
    if abs(det - 1.0) > tol:
        raise ValueError(f"matrix is not special orthogonal (det {det:.12f})")

    A, flagged = _principal_antisymmetric_log(R, tol=1e-12)
    omega = np.zeros((4, 4), dtype=complex)
    for i in range(4):
        for j in range(4):
            if A[i, j] != 0.0:
                omega += 0.25 * A[i, j] * (GAMMA[i] @ GAMMA[j])
    U = scipy.linalg.expm(-omega)
    return SpinMatrix(matrix=U, generator=omega, flagged=flagged)


def gauge_rotation(theta: float) -> SpinMatrix:
    """exp(sigma34 * theta) = cos(theta) I + sin(theta) sigma34 (unitary)."""
    theta = float(theta)
    U = np.cos(theta) * np.eye(4, dtype=complex) + np.sin(theta) * SIGMA34
    return SpinMatrix(matrix=U, generator=-theta * SIGMA34, flagged=False)


def iota_g(a) -> np.ndarray:
    """Vector-space embedding of 2d Clifford generators: a -> tau_1 (x) a."""
    return np.kron(TAU[0], np.asarray(a, dtype=complex))


def iota_r(a) -> np.ndarray:
    """Ring embedding of 2d Clifford elements: a -> I (x) a."""
    return np.kron(_I2, np.asarray(a, dtype=complex))


def match_sign(U, ref) -> np.ndarray:
    """Pick the sign sheet of U nearest to a reference spin matrix."""
    if np.linalg.norm(U - ref) <= np.linalg.norm(U + ref):
        return U
    return -U
