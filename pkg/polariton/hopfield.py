"""
Hopfield-Bogoliubov diagonalization of one cavity mode coupled to N phonons.

Hamiltonian (ħ = 1, frequencies in THz)::

    H = ω_c a†a + Σ_λ ω_λ b_λ†b_λ - i Σ_λ g_λ (b_λ - b_λ†)(a + a†) + D (a + a†)²

with g_λ = (ν_λ/2)·sqrt(ω_λ/ω_c) and the diamagnetic coefficient D = Σ_λ g_λ²/ω_λ.

Derivation of the dynamical matrix
----------------------------------
A polariton annihilation operator p = w a + Σ x_λ b_λ + y a† + Σ z_λ b_λ† must
satisfy [p, H] = Ω p. The single-operator commutators are::

    [a,   H] =  ω_c a  - i Σ g_λ (b_λ - b_λ†) + 2D (a + a†)
    [a†,  H] = -ω_c a† + i Σ g_λ (b_λ - b_λ†) - 2D (a + a†)
    [b_λ, H] =  ω_λ b_λ  + i g_λ (a + a†)
    [b_λ†,H] = -ω_λ b_λ† + i g_λ (a + a†)

Collecting the coefficients of (a, b_λ, a†, b_λ†) in [p, H] gives
Ω v = Mᵀ v for v = (w, x, y, z), where M is the matrix built by
``build_dynamical_matrix`` in the basis order (a, b₁…b_N, a†, b₁†…b_N†)::

    row a   : M[a,a] = ω_c + 2D, M[a,b] = -i g, M[a,a†] = 2D,  M[a,b†] = +i g
    row b   : M[b,a] = +i g,     M[b,b] = ω,    M[b,a†] = +i g
    row a†  : M[a†,a] = -2D,     M[a†,b] = +i g, M[a†,a†] = -(ω_c + 2D), M[a†,b†] = -i g
    row b†  : M[b†,a] = +i g,    M[b†,a†] = +i g, M[b†,b†] = -ω

so the Hopfield coefficients are the left eigenvectors of M (right eigenvectors
of Mᵀ). The spectrum comes in ±Ω pairs; the physical polaritons are the
eigenvectors with Ω > 0 and positive Bogoliubov norm
|w|² + Σ|x|² - |y|² - Σ|z|² (the commutator [p, p†]), scaled to norm 1.

Eliminating the coefficients gives the secular equation
Ω²(1 - Σ ν_λ²/(Ω² - ω_λ²)) = ω_c², which ``polariton.dispersion.secular_roots``
solves independently as an oracle. Without the D term the spectrum turns complex
at large ν (the ``include_diamagnetic=False`` toggle exists to show it).
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.linalg import eig, sqrtm

from polariton.errors import ContractViolation, DomainError, InstabilityError
from polariton.model import Frequency, PhononMode, coupling_strength
from utils.constants import TOLERANCES

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DynamicalMatrix:
    """Bogoliubov dynamical matrix of dimension 2(N+1)."""

    entries: np.ndarray
    omega_c: Frequency
    modes: Tuple[PhononMode, ...]
    include_diamagnetic: bool = True

    @property
    def size(self) -> int:
        return len(self.modes) + 1

    @property
    def scale(self) -> float:
        """Largest bare frequency, used for relative tolerances."""
        return max([self.omega_c] + [m.omega for m in self.modes])

    @property
    def metric(self) -> np.ndarray:
        """Bogoliubov metric diag(1…1, -1…-1)."""
        n = self.size
        return np.concatenate([np.ones(n), -np.ones(n)])


@dataclass(frozen=True)
class PolaritonMode:
    """One polariton eigen-solution with its Hopfield coefficients."""

    omega: Frequency
    w: complex
    x: Tuple[complex, ...]
    y: complex
    z: Tuple[complex, ...]
    photon_fraction: float
    phonon_fractions: Tuple[float, ...]

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.w, *self.x, self.y, *self.z], dtype=complex)

    @property
    def norm(self) -> float:
        """Bosonic norm |w|² + Σ|x|² - |y|² - Σ|z|²."""
        return float(abs(self.w) ** 2 + sum(abs(c) ** 2 for c in self.x)
                     - abs(self.y) ** 2 - sum(abs(c) ** 2 for c in self.z))

    def dominant_component(self, labels: Sequence[str]) -> str:
        """'photon' or the label of the phonon with the largest fraction."""
        weights = [self.photon_fraction, *self.phonon_fractions]
        names = ['photon', *labels]
        return names[int(np.argmax(weights))]


def diamagnetic_coefficient(omega_c: Frequency, modes: Sequence[PhononMode]) -> Frequency:
    """D = Σ_λ g_λ²/ω_λ."""
    total = 0.0
    for mode in modes:
        g = coupling_strength(mode.nu, mode.omega, omega_c)
        total += g * g / mode.omega
    return total


def _check_frequencies(omega_c: Frequency, modes: Sequence[PhononMode]):
    if not omega_c > 0:
        raise DomainError(f"omega_c must be > 0, got {omega_c}")
    for mode in modes:
        if not mode.omega > 0:
            raise DomainError(f"mode {mode.label}: omega must be > 0, got {mode.omega}")


def _fill_matrix(m: np.ndarray, omega_c, omegas: np.ndarray, g: np.ndarray, d):
    """Fill the trailing two axes of m; omega_c and d carry any leading shape, g adds the mode axis."""
    n = len(omegas)
    a, ad = 0, n + 1
    b = np.arange(1, n + 1)
    bd = b + n + 1
    m[..., a, a] = omega_c + 2 * d
    m[..., a, ad] = 2 * d
    m[..., ad, a] = -2 * d
    m[..., ad, ad] = -(omega_c + 2 * d)
    m[..., a, b] = -1j * g
    m[..., a, bd] = 1j * g
    m[..., b, a] = 1j * g
    m[..., b, ad] = 1j * g
    m[..., ad, b] = 1j * g
    m[..., ad, bd] = -1j * g
    m[..., bd, a] = 1j * g
    m[..., bd, ad] = 1j * g
    m[..., b, b] = omegas
    m[..., bd, bd] = -omegas


def build_dynamical_matrix(omega_c: Frequency, modes: Sequence[PhononMode],
                           include_diamagnetic: bool = True) -> DynamicalMatrix:
    """Assemble M for one cavity frequency."""
    modes = tuple(modes)
    _check_frequencies(omega_c, modes)
    n = len(modes)
    omegas = np.array([m.omega for m in modes], dtype=float)
    g = np.array([coupling_strength(m.nu, m.omega, omega_c) for m in modes], dtype=float)
    d = diamagnetic_coefficient(omega_c, modes) if include_diamagnetic else 0.0

    entries = np.zeros((2 * (n + 1), 2 * (n + 1)), dtype=complex)
    _fill_matrix(entries, omega_c, omegas, g, d)
    return DynamicalMatrix(entries=entries, omega_c=float(omega_c), modes=modes,
                           include_diamagnetic=include_diamagnetic)


def build_dynamical_matrices(omega_c_grid: Sequence[float], modes: Sequence[PhononMode],
                             include_diamagnetic: bool = True) -> np.ndarray:
    """Stack of dynamical matrices, one per cavity frequency (shape P × 2(N+1) × 2(N+1))."""
    modes = tuple(modes)
    grid = np.atleast_1d(np.asarray(omega_c_grid, dtype=float))
    if np.any(grid <= 0):
        raise DomainError("omega_c values must be > 0")
    _check_frequencies(1.0, modes)
    n = len(modes)
    omegas = np.array([m.omega for m in modes], dtype=float)
    nus = np.array([m.nu for m in modes], dtype=float)

    g = 0.5 * nus * np.sqrt(omegas / grid[:, None])
    d = np.sum(g * g / omegas, axis=-1) if include_diamagnetic else np.zeros(grid.size)
    stack = np.zeros((grid.size, 2 * (n + 1), 2 * (n + 1)), dtype=complex)
    _fill_matrix(stack, grid, omegas, g, d)
    return stack


def squared_frequency_matrices(omega_c_grid: Sequence[float], omegas: Sequence[float], nus,
                               include_diamagnetic: bool = True) -> np.ndarray:
    """Real symmetric matrices whose eigenvalues are Ω², for whole batches of couplings.

    nus has shape (..., N) and the result (..., P, N+1, N+1). Row 0 is the photon,
    ω_c² (plus Σν² with the diamagnetic term), coupled to phonon λ by ν_λ·ω_λ; its
    characteristic polynomial is the secular equation.
    """
    grid = np.atleast_1d(np.asarray(omega_c_grid, dtype=float))
    omegas = np.asarray(omegas, dtype=float)
    nus = np.asarray(nus, dtype=float)
    n = omegas.size

    stack = np.zeros(nus.shape[:-1] + (grid.size, n + 1, n + 1))
    stack[..., 0, 0] = grid ** 2
    if include_diamagnetic:
        stack[..., 0, 0] += np.asarray(np.sum(nus ** 2, axis=-1))[..., None]
    stack[..., 0, 1:] = (nus * omegas)[..., None, :]
    stack[..., 1:, 0] = stack[..., 0, 1:]
    diagonal = np.arange(1, n + 1)
    stack[..., diagonal, diagonal] = omegas ** 2
    return stack


def branch_frequencies(omega_c_grid: Sequence[float], omegas: Sequence[float], nus,
                       include_diamagnetic: bool = True) -> np.ndarray:
    """Ascending Ω per ω_c for a batch of coupling vectors, shape (..., P, N+1).

    Rows with Ω² ≤ 0 (unstable without the diamagnetic term) come back as NaN.
    """
    squared = np.linalg.eigvalsh(squared_frequency_matrices(omega_c_grid, omegas, nus, include_diamagnetic))
    unstable = np.any(squared <= 0, axis=-1)
    values = np.sqrt(np.clip(squared, 0.0, None))
    values[unstable] = np.nan
    return values


def _raise_if_unstable(eigenvalues: np.ndarray, scale: float, omega_c: float):
    max_imag = float(np.max(np.abs(eigenvalues.imag))) if eigenvalues.size else 0.0
    if max_imag > TOLERANCES['instability_rel'] * scale:
        raise InstabilityError(
            f"complex eigenfrequency at omega_c={omega_c:.6g} THz (|Im| = {max_imag:.3e}); "
            f"parameters are unphysical or the diamagnetic term is disabled",
            omega_c=omega_c, max_imag=max_imag)


def polariton_frequencies(omega_c_grid: Sequence[float], modes: Sequence[PhononMode],
                          include_diamagnetic: bool = True) -> np.ndarray:
    """Eigenfrequencies only, batched over ω_c; returns P × (N+1), ascending per row."""
    modes = tuple(modes)
    grid = np.atleast_1d(np.asarray(omega_c_grid, dtype=float))
    stack = build_dynamical_matrices(grid, modes, include_diamagnetic)
    values = np.linalg.eigvals(stack)
    n = len(modes) + 1
    scale = max([float(grid.max())] + [m.omega for m in modes])

    result = np.empty((grid.size, n))
    for k in range(grid.size):
        _raise_if_unstable(values[k], scale, grid[k])
        positive = np.sort(values[k].real[values[k].real > 0])
        if positive.size != n:
            raise InstabilityError(
                f"expected {n} positive eigenfrequencies at omega_c={grid[k]:.6g} THz, found {positive.size}",
                omega_c=float(grid[k]))
        result[k] = positive
    return result


def _bogoliubov_norms(vectors: np.ndarray, metric: np.ndarray) -> np.ndarray:
    return np.einsum('ik,i,ik->k', vectors.conj(), metric, vectors).real


def _orthonormalize_block(block: np.ndarray, metric: np.ndarray) -> np.ndarray:
    """Orthonormalize degenerate vectors under the metric, photon content first."""
    gram = block.conj().T @ (metric[:, None] * block)
    block = block @ np.linalg.inv(sqrtm(gram))

    # Rotate the block so that the photon amplitude sits in one vector
    photon = block[0, :]
    size = block.shape[1]
    if np.linalg.norm(photon) > TOLERANCES['phase_zero']:
        seed = np.eye(size, dtype=complex)
        seed = np.column_stack([photon.conj() / np.linalg.norm(photon), seed])
        q, _ = np.linalg.qr(seed)
        block = block @ q[:, :size]
    return block


def _fix_phase(vector: np.ndarray) -> np.ndarray:
    """Make w real and non-negative, else the first nonzero coefficient."""
    index = 0
    if abs(vector[0]) <= TOLERANCES['phase_zero']:
        nonzero = np.flatnonzero(np.abs(vector) > TOLERANCES['phase_zero'])
        index = int(nonzero[0]) if nonzero.size else 0
    value = vector[index]
    if abs(value) == 0:
        return vector
    vector = vector * (abs(value) / value)
    vector[index] = abs(value)
    return vector


def _make_mode(omega: float, vector: np.ndarray, n: int) -> PolaritonMode:
    w, x, y, z = vector[0], vector[1:n + 1], vector[n + 1], vector[n + 2:]
    photon = float(abs(w) ** 2 - abs(y) ** 2)
    phonons = tuple(float(v) for v in np.abs(x) ** 2 - np.abs(z) ** 2)
    return PolaritonMode(omega=float(omega), w=complex(w), x=tuple(complex(c) for c in x),
                         y=complex(y), z=tuple(complex(c) for c in z),
                         photon_fraction=photon, phonon_fractions=phonons)


def diagonalize(matrix: DynamicalMatrix) -> List[PolaritonMode]:
    """Polariton modes of M: N+1 positive-frequency, positive-norm solutions, ascending."""
    entries = matrix.entries
    dim = entries.shape[0]
    if entries.ndim != 2 or dim != entries.shape[1] or dim % 2 or dim // 2 != matrix.size:
        raise DomainError(f"malformed dynamical matrix of shape {entries.shape}")

    n_modes = len(matrix.modes)
    metric = matrix.metric
    scale = matrix.scale

    values, vectors = eig(entries.T)
    _raise_if_unstable(values, scale, matrix.omega_c)
    values = values.real
    norms = _bogoliubov_norms(vectors, metric)

    keep = np.flatnonzero((values > 0) & (norms > 0))
    if keep.size != matrix.size:
        raise InstabilityError(
            f"found {keep.size} positive-norm polaritons at omega_c={matrix.omega_c:.6g} THz, "
            f"expected {matrix.size}", omega_c=matrix.omega_c)

    keep = keep[np.argsort(values[keep], kind='stable')]
    omegas = values[keep]
    kept = vectors[:, keep] / np.sqrt(norms[keep])

    # Degenerate blocks get a deterministic basis
    tol = TOLERANCES['degeneracy_rel'] * scale
    start = 0
    while start < len(omegas):
        stop = start + 1
        while stop < len(omegas) and omegas[stop] - omegas[start] < tol:
            stop += 1
        if stop - start > 1:
            logger.debug(f"Degenerate block of size {stop - start} at Ω={omegas[start]:.6g} THz")
            block = _orthonormalize_block(kept[:, start:stop], metric)
            photon = np.abs(block[0, :]) ** 2 - np.abs(block[matrix.size, :]) ** 2
            order = np.argsort(-photon, kind='stable')
            kept[:, start:stop] = block[:, order]
            omegas[start:stop] = omegas[start]
        start = stop

    modes = []
    for k in range(matrix.size):
        modes.append(_make_mode(omegas[k], _fix_phase(kept[:, k].copy()), n_modes))
    return modes


def solve(omega_c: Frequency, modes: Sequence[PhononMode],
          include_diamagnetic: bool = True) -> List[PolaritonMode]:
    """Build and diagonalize in one call."""
    return diagonalize(build_dynamical_matrix(omega_c, modes, include_diamagnetic))


def fractions(mode: PolaritonMode) -> Tuple[float, Tuple[float, ...]]:
    """(F^pt, [F^ph_λ]) under the Bogoliubov metric."""
    norm = mode.norm
    if abs(norm - 1.0) > 1e-8:
        raise ContractViolation(f"polariton mode is not normalized (norm = {norm:.12g})")
    photon = abs(mode.w) ** 2 - abs(mode.y) ** 2
    phonons = tuple(abs(x) ** 2 - abs(z) ** 2 for x, z in zip(mode.x, mode.z))
    return float(photon), tuple(float(p) for p in phonons)


def overlap(first: PolaritonMode, second: PolaritonMode) -> float:
    """|⟨first|η|second⟩| between two coefficient vectors of equal size."""
    u, v = first.vector, second.vector
    if u.size != v.size:
        raise DomainError("cannot overlap polaritons of different mode sets")
    n = u.size // 2
    metric = np.concatenate([np.ones(n), -np.ones(n)])
    return float(abs(np.vdot(u, metric * v)))
