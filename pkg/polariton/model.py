"""
Domain types shared by every other module.

Unit convention: every frequency is an ordinary frequency in THz (not angular).
All model equations are homogeneous in frequency (ratios and products), so the
choice never changes a result. Temperatures are in K and slot lengths in µm.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np

from polariton.errors import DomainError
from utils.constants import CAVITY_DEFAULTS, USC_THRESHOLD

logger = logging.getLogger(__name__)

# Frequencies are plain floats in THz
Frequency = float


@dataclass(frozen=True)
class PhononMode:
    """One transverse-optical oscillator."""

    label: str
    omega: Frequency
    nu: Frequency = 0.0
    gamma: Frequency = 0.0

    def __post_init__(self):
        if not self.label:
            raise DomainError("phonon mode label must be non-empty")
        if not self.omega > 0:
            raise DomainError(f"mode {self.label}: omega must be > 0, got {self.omega}")
        if not self.nu >= 0:
            raise DomainError(f"mode {self.label}: nu must be >= 0, got {self.nu}")
        if not self.gamma >= 0:
            raise DomainError(f"mode {self.label}: gamma must be >= 0, got {self.gamma}")

    def with_nu(self, nu: Frequency) -> "PhononMode":
        return replace(self, nu=float(nu))

    @property
    def normalized_coupling(self) -> float:
        """g/ω at resonance (ω_c = ω), i.e. ν/(2ω)."""
        return self.nu / (2.0 * self.omega)


class Phase(Enum):
    TETRAGONAL = "tetragonal"
    ORTHORHOMBIC = "orthorhombic"

    @classmethod
    def parse(cls, name: str) -> "Phase":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise DomainError(f"unknown phase '{name}' (expected tetragonal or orthorhombic)")


def check_mode_set(modes: Sequence[PhononMode]) -> Tuple[PhononMode, ...]:
    """Validate a mode set (unique labels) and return it as a tuple."""
    modes = tuple(modes)
    labels = [m.label for m in modes]
    if len(set(labels)) != len(labels):
        raise DomainError(f"mode labels must be unique, got {labels}")
    return modes


@dataclass(frozen=True)
class MaterialModel:
    """Phase-resolved phonon mode sets plus the transition temperature."""

    name: str
    tc: float
    tetragonal_modes: Tuple[PhononMode, ...]
    orthorhombic_modes: Tuple[PhononMode, ...]
    notes: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.tc > 0:
            raise DomainError(f"tc must be > 0, got {self.tc}")
        object.__setattr__(self, 'tetragonal_modes', check_mode_set(self.tetragonal_modes))
        object.__setattr__(self, 'orthorhombic_modes', check_mode_set(self.orthorhombic_modes))

    def modes_for(self, phase: Phase) -> Tuple[PhononMode, ...]:
        if phase is Phase.TETRAGONAL:
            return self.tetragonal_modes
        return self.orthorhombic_modes

    def phase_at(self, temperature: float) -> Phase:
        if not temperature > 0:
            raise DomainError(f"temperature must be > 0 K, got {temperature}")
        # T = tc belongs to the high-temperature phase
        return Phase.ORTHORHOMBIC if temperature < self.tc else Phase.TETRAGONAL


@dataclass(frozen=True)
class CavityCalibration:
    """ω_c = amplitude / length^exponent."""

    amplitude: float = CAVITY_DEFAULTS['amplitude']
    exponent: float = CAVITY_DEFAULTS['exponent']

    def __post_init__(self):
        if not self.amplitude > 0:
            raise DomainError(f"calibration amplitude must be > 0, got {self.amplitude}")
        if not self.exponent > 0:
            raise DomainError(f"calibration exponent must be > 0, got {self.exponent}")


def coupling_strength(nu: Frequency, omega_mode: Frequency, omega_c: Frequency) -> Frequency:
    """g = (ν/2)·sqrt(ω_λ/ω_c)."""
    if not (omega_mode > 0 and omega_c > 0):
        raise DomainError(f"frequencies must be > 0 (omega_mode={omega_mode}, omega_c={omega_c})")
    if not nu >= 0:
        raise DomainError(f"nu must be >= 0, got {nu}")
    return 0.5 * nu * math.sqrt(omega_mode / omega_c)


def cavity_frequency(length: float, cal: CavityCalibration = CavityCalibration()) -> Frequency:
    """Cavity resonance of a nanoslot of the given length (µm)."""
    if not length > 0:
        raise DomainError(f"slot length must be > 0 µm, got {length}")
    return cal.amplitude / length ** cal.exponent


def slot_length(omega_c: Frequency, cal: CavityCalibration = CavityCalibration()) -> float:
    """Slot length (µm) giving the requested cavity frequency."""
    if not omega_c > 0:
        raise DomainError(f"omega_c must be > 0, got {omega_c}")
    return (cal.amplitude / omega_c) ** (1.0 / cal.exponent)


def calibrate_cavity(lengths_um: Sequence[float], frequencies_thz: Sequence[float]) -> CavityCalibration:
    """Fit A and p of ω_c = A / l^p by linear least squares in log-log space."""
    lengths = np.asarray(lengths_um, dtype=float)
    freqs = np.asarray(frequencies_thz, dtype=float)
    if lengths.shape != freqs.shape or lengths.ndim != 1:
        raise DomainError("lengths and frequencies must be 1-D sequences of equal length")
    if np.any(lengths <= 0) or np.any(freqs <= 0):
        raise DomainError("lengths and frequencies must be > 0")
    if np.unique(lengths).size < 2:
        raise DomainError("calibration needs at least two distinct slot lengths")

    slope, intercept = np.polyfit(np.log(lengths), np.log(freqs), 1)
    cal = CavityCalibration(amplitude=float(np.exp(intercept)), exponent=float(-slope))
    logger.info(f"Cavity calibration: A={cal.amplitude:.4f} THz·µm, p={cal.exponent:.4f}")
    return cal


def mode_set_at(material: MaterialModel, temperature: float) -> Tuple[PhononMode, ...]:
    """Mode set active at temperature T (orthorhombic below tc, tetragonal from tc up)."""
    return material.modes_for(material.phase_at(temperature))


def nu_from_normalized_coupling(g_over_omega: float, omega_mode: Frequency) -> Frequency:
    """Invert g/ω at resonance: ν = 2·(g/ω)·ω."""
    if g_over_omega < 0 or omega_mode < 0:
        raise DomainError("normalized coupling and omega must be >= 0")
    return 2.0 * g_over_omega * omega_mode


def resonance_couplings(modes: Sequence[PhononMode]) -> List[float]:
    """g_λ/ω_λ evaluated at ω_c = ω_λ for every mode."""
    return [m.normalized_coupling for m in modes]


def is_ultrastrong(ratio: float, threshold: float = USC_THRESHOLD) -> bool:
    return ratio > threshold
