"""Dense reference constructions, independent of the sector machinery.

Everything here is built literally from 2x2 Pauli factors and Kronecker
products, with no bit tricks and no sector bookkeeping, so it can serve as
an oracle for the optimized implementations.  Dense matrices are 2^N x 2^N;
keep N small (<= 10).

Kronecker ordering matches the package basis convention: bit 0 of the basis
integer is site 1, so site 1 is the *last* factor of every Kronecker chain.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .spin_ops import ChainParams, DisorderRealization

# Pauli matrices in the package's per-site ordering (index 0 = down,
# index 1 = up); sigma_y and sigma_z pick up the corresponding relabeling
# relative to the up-first textbook form.
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Y = np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=np.complex128)
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=np.complex128)
IDENTITY = np.eye(2, dtype=np.complex128)


def site_operator(op: np.ndarray, site: int, N: int) -> np.ndarray:
    """Embed a single-site 2x2 operator at ``site`` (1-based) in N sites."""
    out = np.array([[1.0 + 0.0j]])
    for s in range(N, 0, -1):
        out = np.kron(out, op if s == site else IDENTITY)
    return out


def dense_hamiltonian(params: ChainParams, disorder: DisorderRealization) -> np.ndarray:
    """Term-by-term Kronecker-product construction of H0."""
    N = params.N
    dim = 1 << N
    H = np.zeros((dim, dim), dtype=np.complex128)
    Sx = [site_operator(SIGMA_X / 2.0, i, N) for i in range(1, N + 1)]
    Sy = [site_operator(SIGMA_Y / 2.0, i, N) for i in range(1, N + 1)]
    Sz = [site_operator(SIGMA_Z / 2.0, i, N) for i in range(1, N + 1)]
    for i in range(N - 1):
        H += params.J1 * (Sx[i] @ Sx[i + 1] + Sy[i] @ Sy[i + 1] + Sz[i] @ Sz[i + 1])
    for i in range(N - 2):
        H += params.J2 * (Sx[i] @ Sx[i + 2] + Sy[i] @ Sy[i + 2] + Sz[i] @ Sz[i + 2])
    for i in range(N):
        H -= disorder.fields[i] * Sz[i]
    for i in range(N - 1):
        H += params.D * (Sx[i] @ Sy[i + 1] - Sy[i] @ Sx[i + 1])
    return H


def dense_total_sz(N: int) -> np.ndarray:
    out = np.zeros((1 << N, 1 << N), dtype=np.complex128)
    for i in range(1, N + 1):
        out += site_operator(SIGMA_Z / 2.0, i, N)
    return out


def dense_kick(N: int, phi: float) -> np.ndarray:
    """exp(-i phi sum_i S_i^x) via scipy expm on the dense generator."""
    gen = np.zeros((1 << N, 1 << N), dtype=np.complex128)
    for i in range(1, N + 1):
        gen += site_operator(SIGMA_X / 2.0, i, N)
    return scipy.linalg.expm(-1j * phi * gen)


def entanglement_entropy_rdm(amplitudes: np.ndarray, N: int, cut: int) -> float:
    """Bipartite entropy from the reduced density matrix (bits).

    Second route for the SVD-based implementation: form rho_A of the first
    ``cut`` sites explicitly and take its eigenvalue entropy.
    """
    M = np.asarray(amplitudes).reshape(1 << (N - cut), 1 << cut)
    rho_a = M.conj().T @ M
    evals = np.linalg.eigvalsh(rho_a)
    evals = evals[evals > 1e-300]
    return float(-np.sum(evals * np.log2(evals)))
