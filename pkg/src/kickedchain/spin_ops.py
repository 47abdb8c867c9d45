"""Computational basis, spin-operator kernels, and chain Hamiltonian assembly.

Basis convention (fixed, because bipartitions and the coherence reference
basis depend on it): a basis state is an integer whose bit ``i`` encodes
site ``i + 1``; bit value 1 means spin up.  Spin operators are S = sigma/2,
so single-site magnetization lies in [-1/2, 1/2].  Units: hbar = 1,
energies in units of |J1|, times in units of 1/|J1|.

The static chain Hamiltonian is

    H0 = J1 sum_i S_i.S_{i+1} + J2 sum_i S_i.S_{i+2}
         - sum_i h_i^z S_i^z + D sum_i (S_i x S_{i+1})_z

on an open chain (all bond sums stop at the last full bond).  H0 commutes
with the total S^z, so it is assembled block by block over the sectors of
fixed up-spin count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DimensionError

# Largest chain the dense per-sector solver is meant for: C(14,7) = 3432
# keeps sector matrices and their eigenvector stacks in the low hundreds
# of MB.
MAX_SITES = 14

BOUNDARIES = ("open",)


@dataclass(frozen=True)
class ChainParams:
    """Static couplings and drive settings of the kicked chain.

    Attributes
    ----------
    N : number of sites (>= 2).
    J1 : nearest-neighbor Heisenberg coupling.
    J2 : next-nearest-neighbor Heisenberg coupling.
    D : z-axis Dzyaloshinskii-Moriya coupling on nearest-neighbor bonds.
    h : disorder half-width; random fields are uniform on [-h, h].
    phi : kick rotation angle about the x axis (radians).
    T : drive period.
    boundary : only "open" chains are supported.
    """

    N: int
    J1: float = -1.0
    J2: float = 0.25
    D: float = 0.0
    h: float = 1.0
    phi: float = 3.05
    T: float = 1.0
    boundary: str = "open"

    def __post_init__(self):
        # N = 1 is allowed for the non-interacting sensing benchmark (all
        # bond sums are then empty); interacting physics needs N >= 2
        if self.N < 1:
            raise ValueError(f"need at least 1 site, got N={self.N}")
        if self.T <= 0:
            raise ValueError(f"drive period must be positive, got T={self.T}")
        if self.h < 0:
            raise ValueError(f"disorder half-width must be >= 0, got h={self.h}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"unsupported boundary {self.boundary!r}; choose from {BOUNDARIES}")

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "J1": self.J1,
            "J2": self.J2,
            "D": self.D,
            "h": self.h,
            "phi": self.phi,
            "T": self.T,
            "boundary": self.boundary,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChainParams":
        return cls(**d)


@dataclass(frozen=True)
class DisorderRealization:
    """One draw of the random on-site fields plus its RNG provenance.

    ``fields[i]`` is the field on site ``i + 1``.  Regenerating from the
    same ``(seed, index)`` and half-width reproduces the array bit for bit;
    realizations with different indices come from independent counter-based
    streams, so they can be generated in any order (or in parallel).
    """

    fields: np.ndarray
    seed: int
    index: int

    def __post_init__(self):
        arr = np.asarray(self.fields, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "fields", arr)

    @classmethod
    def draw(cls, h: float, N: int, seed: int, index: int) -> "DisorderRealization":
        """Draw the fields for realization ``index`` of the stream ``seed``.

        The underlying uniforms on [-1, 1) are scaled by ``h``, so the same
        (seed, index) pair gives proportional fields across disorder
        strengths (common random numbers across a sweep's h axis).
        """
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
        rng = np.random.Generator(np.random.Philox(ss))
        fields = h * rng.uniform(-1.0, 1.0, size=N)
        return cls(fields=fields, seed=seed, index=index)


@dataclass(frozen=True)
class BasisIndexing:
    """Sector-ordered computational basis for ``N`` sites.

    ``states_by_sector[k]`` lists (ascending) the basis integers with
    exactly ``k`` up spins.  ``sector_of``/``position_of`` give the inverse
    lookup from a basis integer to its (sector, position-in-sector) pair.
    """

    N: int
    dimension: int
    states_by_sector: tuple = field(repr=False)
    sector_of: np.ndarray = field(repr=False)
    position_of: np.ndarray = field(repr=False)

    def sector_size(self, k: int) -> int:
        return len(self.states_by_sector[k])


def build_basis(N: int) -> BasisIndexing:
    """Enumerate the total-S^z sectors of an ``N``-site chain.

    Raises :class:`CapacityError` outside 1 <= N <= MAX_SITES.
    """
    if not 1 <= N <= MAX_SITES:
        raise CapacityError(
            f"N={N} outside supported range [1, {MAX_SITES}] "
            f"(dense per-sector diagonalization)"
        )
    dim = 1 << N
    states = np.arange(dim, dtype=np.int64)
    ups = popcount(states, N)
    order = np.argsort(ups, kind="stable")  # stable keeps ascending states per sector
    sorted_states = states[order]
    counts = np.bincount(ups, minlength=N + 1)
    splits = np.cumsum(counts)[:-1]
    by_sector = tuple(np.ascontiguousarray(s) for s in np.split(sorted_states, splits))
    sector_of = ups.astype(np.uint8)
    position_of = np.empty(dim, dtype=np.int64)
    for k, sec in enumerate(by_sector):
        position_of[sec] = np.arange(len(sec), dtype=np.int64)
        if len(sec) != math.comb(N, k):
            raise AssertionError(f"sector {k} has {len(sec)} states, expected C({N},{k})")
    return BasisIndexing(
        N=N,
        dimension=dim,
        states_by_sector=by_sector,
        sector_of=sector_of,
        position_of=position_of,
    )


def popcount(states: np.ndarray, N: int) -> np.ndarray:
    """Number of set bits (up spins) of each basis integer."""
    ups = np.zeros(states.shape, dtype=np.int64)
    for i in range(N):
        ups += (states >> i) & 1
    return ups


def sz_total_diagonal(N: int) -> np.ndarray:
    """Eigenvalues of the total S^z = sum_i S_i^z over the full basis."""
    states = np.arange(1 << N, dtype=np.int64)
    return popcount(states, N) - N / 2.0


@dataclass(frozen=True)
class SectorMatrix:
    """H0 restricted to the sector with ``k`` up spins.

    Real symmetric (float64) when D = 0, complex Hermitian otherwise.
    """

    k: int
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)


def _bond_list(params: ChainParams) -> list[tuple[int, int, float, float]]:
    """Open-chain bonds as (site_i, site_j, heisenberg_J, dmi_D), 0-based."""
    bonds = []
    for i in range(params.N - 1):
        bonds.append((i, i + 1, params.J1, params.D))
    for i in range(params.N - 2):
        bonds.append((i, i + 2, params.J2, 0.0))
    return bonds


def build_hamiltonian(
    params: ChainParams,
    disorder: DisorderRealization,
    basis: BasisIndexing,
) -> list[SectorMatrix]:
    """Assemble H0 sector by sector.

    Matrix elements, per bond (i, j) and basis states a (column), b (row):

    * diagonal: J/4 * z_i z_j per bond plus -sum_i h_i z_i / 2, with
      z = +-1 the doubled S^z eigenvalue;
    * spin-flip b = a ^ (bit_i | bit_j) when bits differ: J/2 from the
      transverse Heisenberg part, plus -+ i D/2 from the DMI (minus sign
      when site i is up in the column state a).
    """
    N = params.N
    if len(disorder.fields) != N:
        raise DimensionError(
            f"disorder has {len(disorder.fields)} fields for N={N} sites"
        )
    if basis.N != N:
        raise DimensionError(f"basis built for N={basis.N}, params have N={N}")
    bonds = _bond_list(params)
    dtype = np.float64 if params.D == 0.0 else np.complex128
    out = []
    for k, sec in enumerate(basis.states_by_sector):
        n_k = len(sec)
        A = np.zeros((n_k, n_k), dtype=dtype)
        zbits = np.empty((N, n_k), dtype=np.float64)
        for i in range(N):
            zbits[i] = 2.0 * ((sec >> i) & 1) - 1.0
        diag = np.zeros(n_k, dtype=np.float64)
        for i, j, J, _ in bonds:
            diag += (J / 4.0) * zbits[i] * zbits[j]
        diag -= 0.5 * (disorder.fields @ zbits)
        A[np.diag_indices(n_k)] = diag
        for i, j, J, D in bonds:
            bit_i = (sec >> i) & 1
            bit_j = (sec >> j) & 1
            differ = bit_i != bit_j
            if not differ.any():
                continue
            cols = np.nonzero(differ)[0]
            flipped = sec[cols] ^ ((1 << i) | (1 << j))
            rows = basis.position_of[flipped]
            amp = np.full(len(cols), J / 2.0, dtype=dtype)
            if D != 0.0:
                # column state has site i up -> -iD/2, site i down -> +iD/2
                sign = 1.0 - 2.0 * bit_i[cols]
                amp = amp + 0.5j * D * sign
            A[rows, cols] += amp
        out.append(SectorMatrix(k=k, matrix=A))
    return out


def embed_sectors(sectors: list[SectorMatrix], basis: BasisIndexing) -> np.ndarray:
    """Scatter the sector blocks back into the full 2^N x 2^N matrix."""
    any_complex = any(np.iscomplexobj(s.matrix) for s in sectors)
    dtype = np.complex128 if any_complex else np.float64
    H = np.zeros((basis.dimension, basis.dimension), dtype=dtype)
    for s in sectors:
        sec = basis.states_by_sector[s.k]
        H[np.ix_(sec, sec)] = s.matrix
    return H


def kick_state(amplitudes: np.ndarray, N: int, phi: float) -> np.ndarray:
    """Apply the global kick exp(-i phi sum_i S_i^x) matrix-free.

    Works on a single state of shape (2^N,) or on a stack of columns
    (2^N, M); cost O(N * size).  The kick factorizes into single-site
    x-rotations, applied one site at a time.
    """
    dim = 1 << N
    if amplitudes.shape[0] != dim:
        raise DimensionError(
            f"state has leading dimension {amplitudes.shape[0]}, expected 2^{N}={dim}"
        )
    c = math.cos(phi / 2.0)
    s = -1j * math.sin(phi / 2.0)
    out = np.array(amplitudes, dtype=np.complex128, copy=True)
    for q in range(N):
        view = out.reshape(1 << (N - 1 - q), 2, -1)
        lo = view[:, 0].copy()
        hi = view[:, 1]
        view[:, 0] = c * lo + s * hi
        view[:, 1] = s * lo + c * hi
    return out
