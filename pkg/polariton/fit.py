"""
Recover effective ionic plasma frequencies ν_λ from measured polariton branch points.

The phonon frequencies ω_λ stay fixed. The objective is the weighted RMS distance
between each measured peak and its assigned model branch; assignment is by
branch hint when given, otherwise by nearest predicted frequency. The objective has
kinks where assignments switch, so the optimizer is derivative-free: a coarse
log-grid over ν/ω followed by coordinate-wise parabolic refinement.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from polariton import hopfield
from polariton.errors import DomainError, InstabilityError
from polariton.model import CavityCalibration, Frequency, PhononMode, cavity_frequency
from utils.constants import FIT_CONSTANTS
from utils.helpers import parabola_vertex
from utils.rng_system import jitter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BranchPoint:
    """One measured polariton peak."""

    omega_c: Frequency
    omega_meas: Frequency
    weight: float = 1.0
    branch: Optional[int] = None

    def __post_init__(self):
        if not (self.omega_c > 0 and self.omega_meas > 0):
            raise DomainError(f"branch point frequencies must be > 0 ({self.omega_c}, {self.omega_meas})")
        if not (np.isfinite(self.weight) and self.weight >= 0):
            raise DomainError(f"branch point weight must be finite and >= 0, got {self.weight}")
        if self.branch is not None and self.branch < 0:
            raise DomainError(f"branch hint must be >= 0, got {self.branch}")


@dataclass(frozen=True)
class FitOptions:
    nu_max: Optional[float] = None
    ratio_min: float = FIT_CONSTANTS['ratio_min']
    ratio_max: float = FIT_CONSTANTS['ratio_max']
    grid_steps: int = FIT_CONSTANTS['grid_steps']
    max_coarse_points: int = FIT_CONSTANTS['max_coarse_points']
    tolerance: float = FIT_CONSTANTS['tolerance']
    max_iterations: int = FIT_CONSTANTS['max_iterations']
    include_diamagnetic: bool = True


@dataclass(frozen=True)
class FitResult:
    labels: Tuple[str, ...]
    omegas: Tuple[float, ...]
    nu: Tuple[float, ...]
    normalized_couplings: Tuple[float, ...]
    rms_residual: float
    per_point_residuals: Tuple[float, ...]
    assignments: Tuple[int, ...]
    ambiguous: Tuple[bool, ...]
    iterations: int
    converged: bool
    history: Tuple[float, ...] = field(default_factory=tuple)

    def modes(self) -> List[PhononMode]:
        return [PhononMode(label, omega, nu) for label, omega, nu in zip(self.labels, self.omegas, self.nu)]

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FitResult":
        try:
            return cls(**{key: tuple(value) if isinstance(value, list) else value
                          for key, value in data.items()})
        except TypeError as e:
            raise DomainError(f"not a fit report: {e}") from e


@dataclass(frozen=True)
class PhaseComparison:
    """Relative coupling changes between a high- and a low-temperature fit."""

    labels: Tuple[str, ...]
    coupling_change: Tuple[float, ...]     # relative change of g/ω at resonance
    nu_change: Tuple[float, ...]           # relative change of ν
    appeared: Tuple[str, ...]
    disappeared: Tuple[str, ...]
    note: str = ("Relative changes are given for both g/ω at resonance and ν. A reported "
                 "'approximately 30%' TO1 decrease does not match 0.36 -> 0.28 (-22%) exactly; "
                 "the discrepancy is reported, not resolved.")

    def lines(self) -> List[str]:
        out = []
        for label, dg, dn in zip(self.labels, self.coupling_change, self.nu_change):
            out.append(f"{label}: g/omega {dg:+.1%}, nu {dn:+.1%}")
        if self.appeared:
            out.append(f"appeared below transition: {', '.join(self.appeared)}")
        if self.disappeared:
            out.append(f"absent below transition: {', '.join(self.disappeared)}")
        out.append(self.note)
        return out


def _prepare(points: Sequence[BranchPoint]):
    if not points:
        raise DomainError("at least one branch point is required")
    omega_c = np.array([p.omega_c for p in points])
    measured = np.array([p.omega_meas for p in points])
    weights = np.array([p.weight for p in points])
    hints = np.array([-1 if p.branch is None else p.branch for p in points])
    if weights.sum() <= 0:
        raise DomainError("branch point weights sum to zero")
    return omega_c, measured, weights, hints


def _assign(predicted: np.ndarray, measured: np.ndarray, hints: np.ndarray):
    """Predicted frequency, assigned branch and ambiguity flag per point.

    predicted may carry leading batch axes in front of (points, branches).
    """
    n_branch = predicted.shape[-1]
    distance = np.abs(predicted - measured[:, None])
    branch = np.where(hints >= 0, hints, np.argmin(distance, axis=-1))
    chosen = np.take_along_axis(predicted, branch[..., None], axis=-1)[..., 0]
    if n_branch > 1:
        ordered = np.sort(distance, axis=-1)
        ambiguous = (hints < 0) & (ordered[..., 1] - ordered[..., 0] < FIT_CONSTANTS['ambiguity_gap'])
    else:
        ambiguous = np.zeros(branch.shape, dtype=bool)
    return chosen, branch, ambiguous


def _check_hints(hints: np.ndarray, n_branch: int):
    if np.any(hints >= n_branch):
        raise DomainError(f"branch hint out of range for {n_branch} branches")


def _batch_mse(candidates: np.ndarray, omegas, omega_c, measured, weights, hints,
               include_diamagnetic: bool = True) -> np.ndarray:
    """Weighted mean-square error for each row of candidates (shape B × N); unstable rows give inf."""
    predicted = hopfield.branch_frequencies(omega_c, omegas, candidates, include_diamagnetic)
    unstable = np.any(np.isnan(predicted), axis=(-2, -1))
    predicted = np.nan_to_num(predicted)
    chosen, _, _ = _assign(predicted, measured, hints)
    mse = np.sum(weights * (chosen - measured) ** 2, axis=-1) / np.sum(weights)
    return np.where(unstable, np.inf, mse)


def _evaluate(nu: Sequence[float], omegas: Sequence[float], omega_c, measured, weights, hints,
              include_diamagnetic: bool = True):
    _check_hints(hints, len(omegas) + 1)
    predicted = hopfield.branch_frequencies(omega_c, omegas, nu, include_diamagnetic)
    if np.any(np.isnan(predicted)):
        raise InstabilityError(f"complex eigenfrequency for nu={np.round(nu, 6).tolist()}; "
                               f"parameters are unphysical or the diamagnetic term is disabled")
    chosen, branch, ambiguous = _assign(predicted, measured, hints)
    errors = chosen - measured
    mse = float(np.sum(weights * errors ** 2) / np.sum(weights))
    return mse, errors, branch, ambiguous


def residual(nu_candidate: Sequence[float], fixed_omegas: Sequence[float],
             points: Sequence[BranchPoint], include_diamagnetic: bool = True) -> float:
    """Weighted RMS frequency error (THz) of the model against the points."""
    if any(v < 0 for v in nu_candidate):
        raise DomainError("candidate nu values must be >= 0")
    if len(nu_candidate) != len(fixed_omegas):
        raise DomainError("one nu per fixed phonon frequency is required")
    omega_c, measured, weights, hints = _prepare(points)
    mse, _, _, _ = _evaluate(nu_candidate, fixed_omegas, omega_c, measured, weights, hints,
                             include_diamagnetic)
    return float(np.sqrt(mse))


def _decimate(count: int, limit: int) -> np.ndarray:
    if count <= limit:
        return np.arange(count)
    return np.unique(np.linspace(0, count - 1, limit).round().astype(int))


def fit_couplings(points: Sequence[BranchPoint], fixed_omegas: Sequence[float],
                  options: FitOptions = FitOptions(),
                  labels: Optional[Sequence[str]] = None) -> FitResult:
    """Minimize the residual over ν ∈ [0, ν_max]^N with the phonon frequencies held fixed."""
    omegas = np.asarray(fixed_omegas, dtype=float)
    n = omegas.size
    labels = tuple(labels) if labels is not None else tuple(f"TO{k + 1}" for k in range(n))
    if len(labels) != n:
        raise DomainError("one label per fixed phonon frequency is required")
    if np.any(omegas <= 0):
        raise DomainError("fixed phonon frequencies must be > 0")
    omega_c, measured, weights, hints = _prepare(points)
    if len(points) < n:
        raise DomainError(f"under-determined fit: {len(points)} points for {n} free couplings")
    _check_hints(hints, n + 1)

    nu_max = options.nu_max if options.nu_max is not None else FIT_CONSTANTS['nu_max_factor'] * float(omegas.max(initial=0))

    def objective(nu, subset=slice(None)):
        return float(_batch_mse(np.asarray(nu)[None], omegas, omega_c[subset], measured[subset],
                                weights[subset], hints[subset], options.include_diamagnetic)[0])

    # Coarse grid over ν/ω on a decimated point set, evaluated in batches of candidates
    nu = np.zeros(n)
    if n:
        subset = _decimate(len(points), options.max_coarse_points)
        if weights[subset].sum() <= 0:
            subset = np.arange(len(points))
        ratios = np.geomspace(options.ratio_min, options.ratio_max, options.grid_steps)
        shape = (ratios.size,) * n
        total = ratios.size ** n
        best = np.inf
        for start in range(0, total, FIT_CONSTANTS['coarse_batch']):
            index = np.arange(start, min(start + FIT_CONSTANTS['coarse_batch'], total))
            candidates = np.minimum(ratios[np.stack(np.unravel_index(index, shape), axis=-1)] * omegas, nu_max)
            values = _batch_mse(candidates, omegas, omega_c[subset], measured[subset], weights[subset],
                                hints[subset], options.include_diamagnetic)
            k = int(np.argmin(values))
            if values[k] < best:
                best, nu = values[k], candidates[k].copy()
        logger.debug(f"Coarse grid start over {total} candidates: nu={np.round(nu, 4).tolist()}")

    # Coordinate-wise parabolic refinement; accepts only improvements
    current = objective(nu)
    history = [float(np.sqrt(current))]
    steps = 0.1 * omegas
    min_steps = FIT_CONSTANTS['min_step_rel'] * omegas
    converged = n == 0
    iterations = 0

    while not converged and iterations < options.max_iterations:
        iterations += 1
        for k in range(n):
            lo, hi = max(nu[k] - steps[k], 0.0), min(nu[k] + steps[k], nu_max)
            trial = nu.copy()
            trial[k] = lo
            f_lo = objective(trial)
            trial[k] = hi
            f_hi = objective(trial)
            candidates = [(f_lo, lo), (f_hi, hi)]
            curvature, vertex = parabola_vertex((lo, nu[k], hi), (f_lo, current, f_hi))
            if curvature > 0 and np.isfinite(vertex):
                vertex = float(np.clip(vertex, lo, hi))
                trial[k] = vertex
                candidates.append((objective(trial), vertex))
            value, position = min(candidates)
            if value < current:
                steps[k] = float(np.clip(2 * abs(position - nu[k]), min_steps[k], 0.1 * omegas[k]))
                nu[k], current = position, value
            else:
                steps[k] *= 0.5

        history.append(float(np.sqrt(current)))
        improvement = history[-2] - history[-1]
        logger.debug(f"Iteration {iterations}: rms={history[-1]:.3e} THz")
        # A sweep that moved nothing only counts once the steps are exhausted
        if improvement < options.tolerance and (improvement > 0 or np.all(steps <= min_steps)):
            converged = True

    mse, errors, branch, ambiguous = _evaluate(nu, omegas, omega_c, measured, weights, hints,
                                               options.include_diamagnetic)
    if not converged:
        logger.warning(f"Fit did not converge after {iterations} iterations; returning best-so-far values")
    result = FitResult(labels=labels, omegas=tuple(float(v) for v in omegas),
                       nu=tuple(float(v) for v in nu),
                       normalized_couplings=tuple(float(v / (2 * w)) for v, w in zip(nu, omegas)),
                       rms_residual=float(np.sqrt(mse)),
                       per_point_residuals=tuple(float(e) for e in errors),
                       assignments=tuple(int(b) for b in branch),
                       ambiguous=tuple(bool(a) for a in ambiguous),
                       iterations=iterations, converged=converged, history=tuple(history))
    logger.info(f"Fit: g/omega={[round(c, 4) for c in result.normalized_couplings]}, "
                f"rms={result.rms_residual:.3e} THz, converged={converged}")
    return result


def compare_phases(fit_high: FitResult, fit_low: FitResult) -> PhaseComparison:
    """Per-label relative change of the couplings on cooling through the transition."""
    for fit in (fit_high, fit_low):
        if not fit.converged:
            raise DomainError("both fits must have converged before comparing phases")
        if len(set(fit.labels)) != len(fit.labels):
            raise DomainError(f"duplicate mode labels in fit: {fit.labels}")
    high = dict(zip(fit_high.labels, zip(fit_high.normalized_couplings, fit_high.nu)))
    low = dict(zip(fit_low.labels, zip(fit_low.normalized_couplings, fit_low.nu)))
    shared = [label for label in fit_high.labels if label in low]
    if not shared:
        raise DomainError("fits share no mode labels; cannot compare phases")

    def change(before: float, after: float) -> float:
        if before == 0:
            return 0.0 if after == 0 else float('inf')
        return (after - before) / before

    return PhaseComparison(
        labels=tuple(shared),
        coupling_change=tuple(change(high[k][0], low[k][0]) for k in shared),
        nu_change=tuple(change(high[k][1], low[k][1]) for k in shared),
        appeared=tuple(label for label in fit_low.labels if label not in high),
        disappeared=tuple(label for label in fit_high.labels if label not in low))


def synthesize_points(modes: Sequence[PhononMode], omega_c_values: Sequence[float],
                      noise_sigma: float = 0.0, rng: Optional[np.random.Generator] = None,
                      with_hints: bool = False) -> List[BranchPoint]:
    """All branch frequencies at the given cavity frequencies, optionally jittered."""
    predicted = hopfield.polariton_frequencies(omega_c_values, modes)
    if noise_sigma > 0:
        if rng is None:
            raise DomainError("a random generator is required for noisy points")
        predicted = jitter(predicted, noise_sigma, rng)
    points = []
    for omega_c, row in zip(np.atleast_1d(omega_c_values), predicted):
        for j, value in enumerate(row):
            points.append(BranchPoint(float(omega_c), float(max(value, 1e-6)),
                                      branch=j if with_hints else None))
    return points


def points_from_lengths(lengths: Sequence[float], omegas_meas: Sequence[float],
                        cal: CavityCalibration = CavityCalibration(),
                        weights: Optional[Sequence[float]] = None) -> List[BranchPoint]:
    """Branch points whose cavity frequency comes from the slot length."""
    if len(lengths) != len(omegas_meas):
        raise DomainError("lengths and measured frequencies must have equal length")
    weights = weights if weights is not None else [1.0] * len(lengths)
    return [BranchPoint(cavity_frequency(length, cal), omega, weight)
            for length, omega, weight in zip(lengths, omegas_meas, weights)]
