"""
Cavity-frequency and temperature sweeps of the polariton spectrum.

``secular_roots`` is an independent oracle: it never touches the dynamical
matrix and solves Ω²(1 - Σ ν_λ²/(Ω² - ω_λ²)) = ω_c² by bracketing between poles.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from polariton import hopfield
from polariton.errors import DomainError, NumericalError, PolaritonError, SweepError
from polariton.model import Frequency, MaterialModel, Phase, PhononMode, mode_set_at
from utils.constants import DISPERSION_DEFAULTS, TOLERANCES
from utils.helpers import branch_names

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DispersionMap:
    """Polariton branches over a cavity-frequency grid.

    ``branches`` is ascending within each grid point; ``labels[p, j]`` is the
    connectivity label of the j-th ascending branch at grid point p.
    """

    omega_c_grid: np.ndarray
    modes: Tuple[PhononMode, ...]
    branches: np.ndarray                 # P × B
    photon_fractions: np.ndarray         # P × B
    phonon_fractions: np.ndarray         # P × B × N
    vectors: np.ndarray                  # P × B × 2B Hopfield coefficient vectors
    labels: np.ndarray                   # P × B
    ambiguous: np.ndarray = field(default=None)  # P booleans

    @property
    def branch_count(self) -> int:
        return self.branches.shape[1]

    @property
    def names(self) -> List[str]:
        return branch_names(self.branch_count)

    def by_label(self) -> Dict[str, np.ndarray]:
        """Frequencies and fractions rearranged so that column k holds label k."""
        order = np.argsort(self.labels, axis=1, kind='stable')
        rows = np.arange(len(self.omega_c_grid))[:, None]
        return {
            'omega': self.branches[rows, order],
            'photon': self.photon_fractions[rows, order],
            'phonon': self.phonon_fractions[rows, order],
        }

    def rows(self) -> List[list]:
        """Long-format rows: omega_c, branch, Omega, F_pt, F_ph per mode."""
        arranged = self.by_label()
        names = self.names
        rows = []
        for p, omega_c in enumerate(self.omega_c_grid):
            for label in range(self.branch_count):
                rows.append([float(omega_c), names[label], float(arranged['omega'][p, label]),
                             float(arranged['photon'][p, label]),
                             *[float(v) for v in arranged['phonon'][p, label]]])
        return rows

    def header(self) -> List[str]:
        return ['omega_c', 'branch', 'Omega', 'F_pt'] + [f"F_ph_{m.label}" for m in self.modes]


@dataclass(frozen=True)
class TemperatureScan:
    """Branch frequencies at fixed ω_c across a temperature grid."""

    t_grid: np.ndarray
    omega_c: Frequency
    branch_table: Tuple[Tuple[float, ...], ...]
    phase_labels: Tuple[Phase, ...]

    @property
    def branch_counts(self) -> List[int]:
        return [len(row) for row in self.branch_table]

    def change_points(self) -> List[float]:
        """First grid temperature showing a new branch count."""
        counts = self.branch_counts
        return [float(self.t_grid[k]) for k in range(1, len(counts)) if counts[k] != counts[k - 1]]


def _check_grid(grid: np.ndarray, name: str):
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError(f"{name} must be a non-empty 1-D grid")
    if np.any(grid <= 0):
        raise DomainError(f"{name} values must be > 0")
    if np.any(np.diff(grid) <= 0):
        raise DomainError(f"{name} must be strictly increasing")


def sweep(modes: Sequence[PhononMode], omega_c_grid: Sequence[float],
          include_diamagnetic: bool = True) -> DispersionMap:
    """Diagonalize at every grid point and attach connectivity labels."""
    modes = tuple(modes)
    grid = np.asarray(omega_c_grid, dtype=float)
    _check_grid(grid, 'omega_c grid')

    n_branch = len(modes) + 1
    branches = np.empty((grid.size, n_branch))
    photon = np.empty((grid.size, n_branch))
    phonon = np.empty((grid.size, n_branch, len(modes)))
    vectors = np.empty((grid.size, n_branch, 2 * n_branch), dtype=complex)

    for p, omega_c in enumerate(grid):
        try:
            solutions = hopfield.solve(omega_c, modes, include_diamagnetic)
        except PolaritonError as e:
            logger.error(f"Diagonalization failed at grid point {p} (omega_c={omega_c:.6g} THz): {e}")
            raise SweepError(f"grid point {p} (omega_c={omega_c:.6g} THz): {e}", p, float(omega_c)) from e
        for j, mode in enumerate(solutions):
            branches[p, j] = mode.omega
            photon[p, j] = mode.photon_fraction
            phonon[p, j] = mode.phonon_fractions
            vectors[p, j] = mode.vector

    labels = np.tile(np.arange(n_branch), (grid.size, 1))
    dispersion = DispersionMap(omega_c_grid=grid, modes=modes, branches=branches,
                               photon_fractions=photon, phonon_fractions=phonon,
                               vectors=vectors, labels=labels,
                               ambiguous=np.zeros(grid.size, dtype=bool))
    logger.info(f"Swept {grid.size} cavity frequencies with {len(modes)} phonon modes")
    return connect_branches(dispersion)


def connect_branches(dispersion: DispersionMap,
                     threshold: float = DISPERSION_DEFAULTS['overlap_threshold']) -> DispersionMap:
    """Label branches across the grid by maximal Bogoliubov overlap of the coefficient vectors."""
    n_points, n_branch = dispersion.branches.shape
    labels = np.empty((n_points, n_branch), dtype=int)
    labels[0] = np.arange(n_branch)
    ambiguous = np.zeros(n_points, dtype=bool)
    metric = np.concatenate([np.ones(n_branch), -np.ones(n_branch)])

    for p in range(1, n_points):
        previous, current = dispersion.vectors[p - 1], dispersion.vectors[p]
        overlaps = np.abs(previous.conj() @ (metric[:, None] * current.T))
        rows, cols = linear_sum_assignment(-overlaps)
        if np.any(overlaps[rows, cols] < threshold):
            ambiguous[p] = True
            distance = np.abs(dispersion.branches[p - 1][:, None] - dispersion.branches[p][None, :])
            rows, cols = linear_sum_assignment(distance)
            logger.warning(f"Ambiguous branch overlap at omega_c={dispersion.omega_c_grid[p]:.6g} THz; "
                           f"matched by frequency")
        labels[p, cols] = labels[p - 1, rows]

    return replace(dispersion, labels=labels, ambiguous=ambiguous)


def _pole_groups(modes: Sequence[PhononMode]) -> Tuple[List[Tuple[float, float]], List[float]]:
    """Merge equal phonon frequencies; returns (pole u, summed ν²) and roots pinned at poles."""
    groups: List[List[float]] = []
    for mode in sorted(modes, key=lambda m: m.omega):
        u = mode.omega ** 2
        if groups and abs(u - groups[-1][0]) <= TOLERANCES['pole_merge_rel'] * u:
            groups[-1][1] += mode.nu ** 2
            groups[-1][2] += 1
        else:
            groups.append([u, mode.nu ** 2, 1])

    poles, pinned = [], []
    for u, nu2, count in groups:
        if nu2 > 0:
            poles.append((u, nu2))
            pinned.extend([u] * (count - 1))
        else:
            pinned.extend([u] * count)
    return poles, pinned


def secular_roots(modes: Sequence[PhononMode], omega_c: Frequency) -> List[Frequency]:
    """The N+1 positive roots of the secular equation, ascending."""
    modes = tuple(modes)
    if not omega_c > 0:
        raise DomainError(f"omega_c must be > 0, got {omega_c}")
    poles, pinned = _pole_groups(modes)
    uc = omega_c ** 2

    def secular(u: float) -> float:
        return u * (1.0 - sum(nu2 / (u - up) for up, nu2 in poles)) - uc

    xtol = TOLERANCES['secular_xtol']
    upper = uc + sum(m.omega ** 2 + m.nu ** 2 for m in modes)
    edges = [0.0] + [up for up, _ in poles] + [upper * (1 + 1e-9) + xtol]
    roots = list(pinned)

    for k in range(len(edges) - 1):
        lo, hi = edges[k], edges[k + 1]
        # Step off the poles; a root closer than the offset sits at the pole
        lo_eps = lo + max(xtol, 1e-13 * lo) if k > 0 else lo
        hi_eps = hi - max(xtol, 1e-13 * hi) if k < len(edges) - 2 else hi
        f_lo, f_hi = secular(lo_eps), secular(hi_eps)
        if f_lo > 0:
            roots.append(lo)
            continue
        if f_hi < 0:
            if k < len(edges) - 2:
                roots.append(hi)
                continue
            raise NumericalError(
                f"no sign change above the last pole at omega_c={omega_c:.6g} THz",
                diagnostics={'bracket': (lo_eps, hi_eps), 'values': (f_lo, f_hi)})
        try:
            roots.append(brentq(secular, lo_eps, hi_eps, xtol=xtol, rtol=4 * np.finfo(float).eps,
                                maxiter=500))
        except (RuntimeError, ValueError) as e:
            raise NumericalError(
                f"root bracketing failed in ({lo_eps:.6g}, {hi_eps:.6g}) THz² at omega_c={omega_c:.6g}: {e}",
                diagnostics={'bracket': (lo_eps, hi_eps), 'values': (f_lo, f_hi)}) from e

    roots = sorted(roots)
    if len(roots) != len(modes) + 1:
        raise NumericalError(f"found {len(roots)} roots, expected {len(modes) + 1}",
                             diagnostics={'roots': roots})
    return [float(np.sqrt(u)) for u in roots]


def scan_temperature(material: MaterialModel, omega_c: Frequency, t_grid: Sequence[float],
                     include_diamagnetic: bool = True) -> TemperatureScan:
    """Branch frequencies per temperature; the mode set switches at tc."""
    temps = np.asarray(t_grid, dtype=float)
    _check_grid(temps, 'temperature grid')

    # Diagonalize once per phase, the mode sets are fixed within a phase
    cache: Dict[Phase, Tuple[float, ...]] = {}
    table, phases = [], []
    for k, temperature in enumerate(temps):
        phase = material.phase_at(temperature)
        if phase not in cache:
            try:
                freqs = hopfield.polariton_frequencies([omega_c], mode_set_at(material, temperature),
                                                       include_diamagnetic)[0]
            except PolaritonError as e:
                raise SweepError(f"temperature point {k} (T={temperature:.6g} K): {e}", k,
                                 float(temperature)) from e
            cache[phase] = tuple(float(v) for v in freqs)
        table.append(cache[phase])
        phases.append(phase)

    scan = TemperatureScan(t_grid=temps, omega_c=float(omega_c), branch_table=tuple(table),
                           phase_labels=tuple(phases))
    logger.info(f"Temperature scan at omega_c={omega_c:.4g} THz: change points {scan.change_points()}")
    return scan
