"""
Classical damped transmittance spectra and peak extraction.

The cavity response is |1/D(ω)|² with
D(ω) = ω² + iκω - ω_c² - Σ_λ ν_λ²ω²/(ω² - ω_λ² + iγ_λω),
the damped form of the secular equation: as κ, γ → 0 its peaks converge to the
polariton frequencies. Bare films use a Lorentz dielectric function in the
thin-film transmission formula.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import psutil
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.signal import find_peaks

from polariton.errors import DomainError
from polariton.fit import BranchPoint
from polariton.model import Frequency, MaterialModel, PhononMode, mode_set_at
from utils.constants import SPECTRA_DEFAULTS
from utils.helpers import parabola_vertex

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Spectrum:
    omega_grid: np.ndarray
    transmittance: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class DampingSet:
    """Cavity linewidth κ and phonon linewidths γ_λ (THz)."""

    kappa: Frequency = SPECTRA_DEFAULTS['kappa']
    gammas: Tuple[Frequency, ...] = ()

    def __post_init__(self):
        if self.kappa < 0 or any(g < 0 for g in self.gammas):
            raise DomainError("dampings must be >= 0")

    @classmethod
    def uniform(cls, count: int, kappa: float = SPECTRA_DEFAULTS['kappa'],
                gamma: float = SPECTRA_DEFAULTS['gamma']) -> "DampingSet":
        return cls(kappa=kappa, gammas=(gamma,) * count)

    @classmethod
    def from_modes(cls, modes: Sequence[PhononMode], kappa: float = SPECTRA_DEFAULTS['kappa']) -> "DampingSet":
        return cls(kappa=kappa, gammas=tuple(m.gamma for m in modes))


@dataclass(frozen=True)
class TransmittanceMap:
    """Gridded transmittance: rows follow omega_grid, columns follow the column grid."""

    omega_grid: np.ndarray
    column_grid: np.ndarray
    values: np.ndarray
    column_name: str = 'omega_c'

    def column(self, index: int) -> Spectrum:
        return Spectrum(self.omega_grid, self.values[:, index],
                        {self.column_name: float(self.column_grid[index])})


def _check_omega_grid(omega_grid) -> np.ndarray:
    grid = np.asarray(omega_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise DomainError("frequency grid needs at least three points")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("frequency grid must be positive and strictly increasing")
    return grid


def _normalize(values: np.ndarray) -> np.ndarray:
    peak = values.max()
    if not np.isfinite(peak) or peak <= 0:
        raise DomainError("spectrum has no finite positive maximum")
    return values / peak


def response_denominator(modes: Sequence[PhononMode], omega_c: Frequency, damping: DampingSet,
                         omega_grid: np.ndarray) -> np.ndarray:
    """D(ω) of the damped cavity-phonon response."""
    w = np.asarray(omega_grid, dtype=float)
    denominator = w ** 2 + 1j * damping.kappa * w - omega_c ** 2
    with np.errstate(divide='ignore', invalid='ignore'):
        for mode, gamma in zip(modes, damping.gammas):
            if mode.nu == 0:
                continue
            denominator = denominator - mode.nu ** 2 * w ** 2 / (w ** 2 - mode.omega ** 2 + 1j * gamma * w)
    return denominator


def _check_damping(modes: Sequence[PhononMode], damping: DampingSet):
    if len(damping.gammas) != len(modes):
        raise DomainError(f"{len(damping.gammas)} phonon dampings given for {len(modes)} modes")
    if damping.kappa == 0 and not any(damping.gammas):
        raise DomainError("all dampings are zero; peaks are undefined")


def coupled_transmittance(modes: Sequence[PhononMode], omega_c: Frequency, damping: DampingSet,
                          omega_grid: Sequence[float]) -> Spectrum:
    """Normalized |1/D(ω)|² for one cavity frequency."""
    modes = tuple(modes)
    grid = _check_omega_grid(omega_grid)
    if not omega_c > 0:
        raise DomainError(f"omega_c must be > 0, got {omega_c}")
    _check_damping(modes, damping)
    # Floor keeps an undamped cavity line finite when the grid hits ω_c exactly
    floor = (1e-9 * omega_c ** 2) ** 2
    denominator = response_denominator(modes, omega_c, damping, grid)
    values = np.nan_to_num(1.0 / (np.abs(denominator) ** 2 + floor), nan=0.0, posinf=0.0)
    return Spectrum(grid, _normalize(values),
                    {'omega_c': float(omega_c), 'kappa': damping.kappa, 'gammas': list(damping.gammas)})


def dielectric_function(modes: Sequence[PhononMode], eps_inf: float, omega_grid: Sequence[float]) -> np.ndarray:
    """Lorentz ε(ω) = ε_inf + Σ ν²/(ω_λ² - ω² - iγω)."""
    w = np.asarray(omega_grid, dtype=float)
    eps = np.full(w.shape, eps_inf, dtype=complex)
    for mode in modes:
        eps += mode.nu ** 2 / (mode.omega ** 2 - w ** 2 - 1j * mode.gamma * w)
    return eps


def bare_film_transmittance(modes: Sequence[PhononMode], eps_inf: float = SPECTRA_DEFAULTS['eps_inf'],
                            thickness: float = SPECTRA_DEFAULTS['thickness_um'],
                            substrate_index: float = SPECTRA_DEFAULTS['substrate_index'],
                            omega_grid: Optional[Sequence[float]] = None) -> Spectrum:
    """Thin-film transmittance on a substrate, normalized to its maximum.

    thickness is in µm; uses t = (1 + n_s)/(1 + n_s - i·2π·f·d·(ε - 1)/c).
    """
    grid = _check_omega_grid(omega_grid if omega_grid is not None else default_omega_grid())
    if not (thickness > 0 and substrate_index > 0 and eps_inf > 0):
        raise DomainError("thickness, substrate index and eps_inf must be > 0")

    eps = dielectric_function(modes, eps_inf, grid)
    phase = 2 * np.pi * grid * 1e12 * thickness * 1e-6 / SPEED_OF_LIGHT
    t = (1 + substrate_index) / (1 + substrate_index - 1j * phase * (eps - 1))

    wavelength_min_um = SPEED_OF_LIGHT / (grid.max() * 1e12) * 1e6
    valid = thickness <= SPECTRA_DEFAULTS['thin_film_fraction'] * wavelength_min_um
    if not valid:
        logger.warning(f"Film thickness {thickness} µm exceeds the thin-film limit "
                       f"({SPECTRA_DEFAULTS['thin_film_fraction']} x {wavelength_min_um:.1f} µm)")
    return Spectrum(grid, _normalize(np.abs(t) ** 2),
                    {'eps_inf': eps_inf, 'thickness_um': thickness,
                     'substrate_index': substrate_index, 'thin_film_valid': bool(valid)})


def _worker_count(columns: int) -> int:
    return max(1, min(columns, psutil.cpu_count(logical=True) or 1))


def transmittance_map(modes: Sequence[PhononMode], omega_c_grid: Sequence[float], damping: DampingSet,
                      omega_grid: Sequence[float]) -> TransmittanceMap:
    """One normalized spectrum per cavity frequency, assembled in grid order."""
    modes = tuple(modes)
    grid = _check_omega_grid(omega_grid)
    columns = np.asarray(omega_c_grid, dtype=float)
    if columns.ndim != 1 or columns.size == 0:
        raise DomainError("omega_c grid must be non-empty")

    def column(omega_c):
        return coupled_transmittance(modes, omega_c, damping, grid).transmittance

    with ThreadPoolExecutor(max_workers=_worker_count(columns.size)) as pool:
        spectra = list(pool.map(column, columns))
    logger.info(f"Synthesized transmittance map: {grid.size} x {columns.size}")
    return TransmittanceMap(grid, columns, np.column_stack(spectra), 'omega_c')


def temperature_map(material: MaterialModel, omega_c: Frequency, damping_kappa: float,
                    t_grid: Sequence[float], omega_grid: Sequence[float],
                    gamma: Optional[float] = None) -> TransmittanceMap:
    """Spectra at fixed ω_c across temperature; the mode set switches at tc.

    Phonon linewidths come from the mode definitions unless ``gamma`` overrides them.
    """
    grid = _check_omega_grid(omega_grid)
    temps = np.asarray(t_grid, dtype=float)
    if temps.ndim != 1 or temps.size == 0 or np.any(np.diff(temps) <= 0):
        raise DomainError("temperature grid must be non-empty and increasing")

    spectra = []
    for temperature in temps:
        modes = mode_set_at(material, temperature)
        if gamma is None:
            damping = DampingSet.from_modes(modes, damping_kappa)
        else:
            damping = DampingSet.uniform(len(modes), damping_kappa, gamma)
        spectra.append(coupled_transmittance(modes, omega_c, damping, grid).transmittance)
    return TransmittanceMap(grid, temps, np.column_stack(spectra), 'T')


def extract_peaks(spectrum: Spectrum, min_prominence: float = SPECTRA_DEFAULTS['min_prominence']) -> List[Frequency]:
    """Local maxima with prominence ≥ threshold, refined by three-point parabolic interpolation."""
    if not 0 < min_prominence < 1:
        raise DomainError(f"min_prominence must lie in (0, 1), got {min_prominence}")
    x = np.asarray(spectrum.omega_grid, dtype=float)
    y = np.asarray(spectrum.transmittance, dtype=float)

    indices, _ = find_peaks(y, prominence=min_prominence)
    peaks = []
    for i in indices:
        curvature, vertex = parabola_vertex(x[i - 1:i + 2], y[i - 1:i + 2])
        vertex = vertex if curvature < 0 else x[i]
        peaks.append(float(np.clip(vertex, x[i - 1], x[i + 1])))
    return sorted(peaks)


def extract_map_peaks(transmittance: TransmittanceMap,
                      min_prominence: float = SPECTRA_DEFAULTS['min_prominence']) -> List[BranchPoint]:
    """BranchPoints (one per peak per ω_c column) for the fitting module."""
    if transmittance.column_name != 'omega_c':
        raise DomainError("peak extraction into branch points needs an omega_c map")
    points = []
    for k, omega_c in enumerate(transmittance.column_grid):
        for peak in extract_peaks(transmittance.column(k), min_prominence):
            points.append(BranchPoint(float(omega_c), peak))
    logger.info(f"Extracted {len(points)} peaks from {transmittance.column_grid.size} columns")
    return points


def default_omega_grid() -> np.ndarray:
    """Frequency grid 0.2–3.2 THz in 0.005 THz steps."""
    count = int(round((SPECTRA_DEFAULTS['omega_max'] - SPECTRA_DEFAULTS['omega_min'])
                      / SPECTRA_DEFAULTS['omega_step'])) + 1
    return np.linspace(SPECTRA_DEFAULTS['omega_min'], SPECTRA_DEFAULTS['omega_max'], count)
