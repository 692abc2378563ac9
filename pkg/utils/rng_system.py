import logging
from typing import List, Optional

import numpy as np

from polariton.model import PhononMode

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20251018


def make_rng(seed: Optional[int] = DEFAULT_SEED) -> np.random.Generator:
    """Seeded generator; every random draw in the toolkit goes through one of these."""
    return np.random.default_rng(seed)


def random_mode_set(rng: np.random.Generator, count: int, omega_range=(0.1, 5.0),
                    ratio_range=(0.0, 1.0)) -> List[PhononMode]:
    """Random phonon modes with ω uniform in omega_range and ν/ω uniform in ratio_range."""
    omegas = rng.uniform(*omega_range, size=count)
    ratios = rng.uniform(*ratio_range, size=count)
    return [PhononMode(f"TO{k + 1}", float(w), float(r * w)) for k, (w, r) in enumerate(zip(omegas, ratios))]


def random_cavity_frequency(rng: np.random.Generator, omega_range=(0.1, 5.0)) -> float:
    return float(rng.uniform(*omega_range))


def jitter(values: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add Gaussian noise of standard deviation sigma (THz)."""
    if sigma <= 0:
        return np.asarray(values, dtype=float)
    return np.asarray(values, dtype=float) + rng.normal(0.0, sigma, size=np.shape(values))
