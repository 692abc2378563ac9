import argparse
import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from polariton.errors import ConfigError, DomainError
from polariton.fit import FitOptions
from polariton.model import (CavityCalibration, MaterialModel, Phase, PhononMode, cavity_frequency,
                             check_mode_set)
from polariton.spectra import DampingSet
from utils.constants import (CAVITY_DEFAULTS, DISPERSION_DEFAULTS, FIT_CONSTANTS, SCAN_DEFAULTS,
                             SPECTRA_DEFAULTS)
from utils.helpers import metadata_path, write_json
from utils.presets import load_calibration, load_material

logger = logging.getLogger(__name__)

DEFAULT_PRESET = 'mapbi3'

# Every run setting with its default; config files and flags may only use these keys
DEFAULT_RUN_CONFIG: Dict[str, Any] = {
    'preset': None,
    'modes': None,
    'extra_modes': [],
    'phase': None,
    'temperature': None,
    'include_diamagnetic': True,
    'omega_c_min': DISPERSION_DEFAULTS['omega_c_min'],
    'omega_c_max': DISPERSION_DEFAULTS['omega_c_max'],
    'omega_c_step': DISPERSION_DEFAULTS['omega_c_step'],
    'lengths': None,
    'omega_c': None,
    'kappa': SPECTRA_DEFAULTS['kappa'],
    'gamma': SPECTRA_DEFAULTS['gamma'],
    'eps_inf': SPECTRA_DEFAULTS['eps_inf'],
    'thickness_um': SPECTRA_DEFAULTS['thickness_um'],
    'substrate_index': SPECTRA_DEFAULTS['substrate_index'],
    'omega_min': SPECTRA_DEFAULTS['omega_min'],
    'omega_max': SPECTRA_DEFAULTS['omega_max'],
    'omega_step': SPECTRA_DEFAULTS['omega_step'],
    'min_prominence': SPECTRA_DEFAULTS['min_prominence'],
    't_min': SCAN_DEFAULTS['t_min'],
    't_max': SCAN_DEFAULTS['t_max'],
    't_step': SCAN_DEFAULTS['t_step'],
    'nu_max': None,
    'ratio_min': FIT_CONSTANTS['ratio_min'],
    'ratio_max': FIT_CONSTANTS['ratio_max'],
    'grid_steps': FIT_CONSTANTS['grid_steps'],
    'tolerance': FIT_CONSTANTS['tolerance'],
    'max_iterations': FIT_CONSTANTS['max_iterations'],
    'out': None,
}

# Keys that may not both be set; a flag for one clears the other's file value
EXCLUSIVE_KEYS = (('preset', 'modes'), ('phase', 'temperature'))


def get_output_dir() -> Path:
    """Default directory for output files."""
    return Path(os.getenv('HOPFIELD_OUTPUT_DIR', 'output'))


def get_log_file() -> str:
    """Log file path from the environment."""
    return os.getenv('HOPFIELD_LOG_FILE', 'hopfield.log')


def parse_mode(text: str) -> PhononMode:
    """One mode from 'label:omega:nu[:gamma]'."""
    parts = [p.strip() for p in text.split(':')]
    if len(parts) not in (3, 4) or not parts[0]:
        raise ConfigError(f"mode '{text}' must look like label:omega:nu[:gamma]")
    try:
        values = [float(p) for p in parts[1:]]
    except ValueError as e:
        raise ConfigError(f"mode '{text}' has a non-numeric field: {e}") from e
    try:
        return PhononMode(parts[0], *values)
    except DomainError as e:
        raise ConfigError(f"mode '{text}': {e}") from e


def parse_modes(text: str) -> Tuple[PhononMode, ...]:
    """Comma-separated mode definitions; the empty string is the bare cavity."""
    if not text.strip():
        return ()
    return tuple(parse_mode(item) for item in text.split(','))


def parse_floats(text: str, name: str) -> List[float]:
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError as e:
        raise ConfigError(f"{name} must be comma-separated numbers: {e}") from e


def _grid(start: float, stop: float, step: float, name: str) -> np.ndarray:
    if not (step > 0 and stop >= start):
        raise ConfigError(f"{name} grid needs step > 0 and max >= min (got {start}, {stop}, {step})")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


@dataclass(frozen=True)
class RunConfig:
    """Effective configuration of one command run."""

    preset: Optional[str] = None
    modes: Optional[str] = None
    extra_modes: Tuple[str, ...] = ()
    phase: Optional[str] = None
    temperature: Optional[float] = None
    include_diamagnetic: bool = True
    omega_c_min: float = DISPERSION_DEFAULTS['omega_c_min']
    omega_c_max: float = DISPERSION_DEFAULTS['omega_c_max']
    omega_c_step: float = DISPERSION_DEFAULTS['omega_c_step']
    lengths: Optional[Tuple[float, ...]] = None
    omega_c: Optional[float] = None
    kappa: float = SPECTRA_DEFAULTS['kappa']
    gamma: float = SPECTRA_DEFAULTS['gamma']
    eps_inf: float = SPECTRA_DEFAULTS['eps_inf']
    thickness_um: float = SPECTRA_DEFAULTS['thickness_um']
    substrate_index: float = SPECTRA_DEFAULTS['substrate_index']
    omega_min: float = SPECTRA_DEFAULTS['omega_min']
    omega_max: float = SPECTRA_DEFAULTS['omega_max']
    omega_step: float = SPECTRA_DEFAULTS['omega_step']
    min_prominence: float = SPECTRA_DEFAULTS['min_prominence']
    t_min: float = SCAN_DEFAULTS['t_min']
    t_max: float = SCAN_DEFAULTS['t_max']
    t_step: float = SCAN_DEFAULTS['t_step']
    nu_max: Optional[float] = None
    ratio_min: float = FIT_CONSTANTS['ratio_min']
    ratio_max: float = FIT_CONSTANTS['ratio_max']
    grid_steps: int = FIT_CONSTANTS['grid_steps']
    tolerance: float = FIT_CONSTANTS['tolerance']
    max_iterations: int = FIT_CONSTANTS['max_iterations']
    out: Optional[str] = None
    _material: Optional[MaterialModel] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.preset is not None and self.modes is not None:
            raise ConfigError("give either a preset or inline modes, not both")
        if self.phase is not None and self.temperature is not None:
            raise ConfigError("give either a phase or a temperature, not both")
        if self.phase is not None:
            try:
                Phase.parse(self.phase)
            except DomainError as e:
                raise ConfigError(str(e)) from e
        for name in ('kappa', 'gamma'):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        for name in ('eps_inf', 'thickness_um', 'substrate_index', 'omega_c_min', 'omega_min', 't_min'):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        if self.omega_c is not None and not self.omega_c > 0:
            raise ConfigError("omega_c must be > 0")
        if not 0 < self.min_prominence < 1:
            raise ConfigError("min_prominence must lie in (0, 1)")
        if self.lengths is not None and (not self.lengths or any(v <= 0 for v in self.lengths)):
            raise ConfigError("slot lengths must be a non-empty list of positive values")
        # Unknown presets fail at load time
        if self.modes is None:
            object.__setattr__(self, '_material', load_material(self.preset_name))

    @property
    def preset_name(self) -> str:
        return self.preset if self.preset is not None else DEFAULT_PRESET

    @property
    def material(self) -> Optional[MaterialModel]:
        return self._material

    def selected_phase(self) -> Phase:
        if self.temperature is not None:
            return self._material.phase_at(self.temperature)
        if self.phase is not None:
            return Phase.parse(self.phase)
        return Phase.TETRAGONAL

    def extra_mode_set(self) -> Tuple[PhononMode, ...]:
        return tuple(parse_mode(text) for text in self.extra_modes)

    def mode_set(self) -> Tuple[PhononMode, ...]:
        """Active phonon modes: inline, or the preset's at the selected phase, plus extras."""
        if self.modes is not None:
            base = parse_modes(self.modes)
        else:
            base = self._material.modes_for(self.selected_phase())
        try:
            return check_mode_set(base + self.extra_mode_set())
        except DomainError as e:
            raise ConfigError(str(e)) from e

    def scan_material(self) -> MaterialModel:
        """Preset material for temperature runs; extra modes join the low-temperature set."""
        if self._material is None:
            raise ConfigError("temperature runs need a preset, not inline modes")
        extras = self.extra_mode_set()
        if not extras:
            return self._material
        try:
            return replace(self._material, orthorhombic_modes=self._material.orthorhombic_modes + extras)
        except DomainError as e:
            raise ConfigError(str(e)) from e

    def calibration(self) -> CavityCalibration:
        if self.modes is None:
            stored = load_calibration(self.preset_name)
            if stored is not None:
                return stored
        return CavityCalibration(CAVITY_DEFAULTS['amplitude'], CAVITY_DEFAULTS['exponent'])

    def omega_c_grid(self) -> np.ndarray:
        """Cavity frequencies from slot lengths when given, else the regular grid."""
        if self.lengths is not None:
            cal = self.calibration()
            return np.sort(np.array([cavity_frequency(length, cal) for length in self.lengths]))
        return _grid(self.omega_c_min, self.omega_c_max, self.omega_c_step, 'omega_c')

    def omega_grid(self) -> np.ndarray:
        return _grid(self.omega_min, self.omega_max, self.omega_step, 'omega')

    def t_grid(self) -> np.ndarray:
        return _grid(self.t_min, self.t_max, self.t_step, 'temperature')

    def damped_modes(self, modes: Sequence[PhononMode]) -> Tuple[PhononMode, ...]:
        """Modes without a linewidth get the configured γ."""
        return tuple(m if m.gamma > 0 else replace(m, gamma=self.gamma) for m in modes)

    def damped_material(self) -> MaterialModel:
        """scan_material with the configured γ filled in for both phases."""
        material = self.scan_material()
        return replace(material, tetragonal_modes=self.damped_modes(material.tetragonal_modes),
                       orthorhombic_modes=self.damped_modes(material.orthorhombic_modes))

    def damping(self, modes: Sequence[PhononMode]) -> DampingSet:
        return DampingSet.from_modes(self.damped_modes(modes), self.kappa)

    def fit_options(self) -> FitOptions:
        return FitOptions(nu_max=self.nu_max, ratio_min=self.ratio_min, ratio_max=self.ratio_max,
                          grid_steps=int(self.grid_steps), tolerance=self.tolerance,
                          max_iterations=int(self.max_iterations),
                          include_diamagnetic=self.include_diamagnetic)

    def output_path(self, default_name: str) -> Path:
        return Path(self.out) if self.out else get_output_dir() / default_name

    def write_metadata(self, path: Path, command: str, **extra: Any) -> Path:
        """Echo the effective configuration next to an output file."""
        data = {'command': command, 'config': self.as_dict()}
        data.update(extra)
        return write_json(metadata_path(path), data)

    def as_dict(self) -> Dict[str, Any]:
        data = {key: value for key, value in asdict(self).items() if not key.startswith('_')}
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data


def read_config_file(path: str) -> Dict[str, Any]:
    """Settings from a JSON config file; unknown keys are rejected."""
    try:
        with open(path) as handle:
            data = json.load(handle)
    except FileNotFoundError as e:
        raise ConfigError(f"config file {path} not found") from e
    except json.JSONDecodeError as e:
        logger.error(f"Error reading config file {path}: {e}")
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - set(DEFAULT_RUN_CONFIG))
    if unknown:
        raise ConfigError(f"config file {path} has unknown keys: {', '.join(unknown)}")
    return data


def load_run_config(args: Any) -> RunConfig:
    """Merge defaults <- config file <- command-line flags.

    Flags left at None on the argparse namespace do not override anything.
    """
    config = dict(DEFAULT_RUN_CONFIG)
    config_path = getattr(args, 'config', None)
    if config_path:
        config.update(read_config_file(config_path))

    flagged = set()
    for key in DEFAULT_RUN_CONFIG:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
            flagged.add(key)

    for first, second in EXCLUSIVE_KEYS:
        if first in flagged and second not in flagged:
            config[second] = None
        elif second in flagged and first not in flagged:
            config[first] = None

    extra_modes = config['extra_modes'] or ()
    config['extra_modes'] = (extra_modes,) if isinstance(extra_modes, str) else tuple(extra_modes)
    lengths = config['lengths']
    if isinstance(lengths, str):
        config['lengths'] = tuple(parse_floats(lengths, 'lengths'))
    elif lengths is not None:
        try:
            config['lengths'] = tuple(float(v) for v in lengths)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"lengths must be a list of numbers: {e}") from e
    try:
        run_config = RunConfig(**config)
    except TypeError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
    logger.debug(f"Effective configuration: {run_config.as_dict()}")
    return run_config


def add_material_arguments(parser: argparse.ArgumentParser, with_phase: bool = True):
    """Mode-set selection flags shared by the model commands."""
    group = parser.add_argument_group('material')
    group.add_argument('--config', help='JSON config file; flags override its values')
    group.add_argument('--preset', help=f'material preset (default {DEFAULT_PRESET})')
    group.add_argument('--modes', help="inline modes 'label:omega:nu[:gamma],...' in THz; '' for none")
    group.add_argument('--extra-mode', dest='extra_modes', action='append', metavar='LABEL:OMEGA:NU[:GAMMA]',
                       help='append a phonon mode to the active set (repeatable)')
    if with_phase:
        group.add_argument('--phase', help='tetragonal or orthorhombic')
        group.add_argument('--temperature', type=float, help='select the phase from a temperature in K')
    group.add_argument('--no-diamagnetic', dest='include_diamagnetic', action='store_const', const=False,
                       default=None, help='drop the A² term (may become unstable)')


def add_cavity_grid_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group('cavity grid')
    group.add_argument('--omega-c-min', type=float)
    group.add_argument('--omega-c-max', type=float)
    group.add_argument('--omega-c-step', type=float)
    group.add_argument('--lengths', help='comma-separated slot lengths in µm instead of the grid')


def add_frequency_grid_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group('frequency grid')
    group.add_argument('--omega-min', type=float)
    group.add_argument('--omega-max', type=float)
    group.add_argument('--omega-step', type=float)


def add_temperature_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group('temperature grid')
    group.add_argument('--omega-c', type=float, help='fixed cavity frequency in THz')
    group.add_argument('--t-min', type=float)
    group.add_argument('--t-max', type=float)
    group.add_argument('--t-step', type=float)


def add_damping_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group('damping')
    group.add_argument('--kappa', type=float, help='cavity linewidth in THz')
    group.add_argument('--gamma', type=float, help='phonon linewidth in THz for modes without one')


def add_output_argument(parser: argparse.ArgumentParser, default_name: str):
    parser.add_argument('--out', help=f'output path (default $HOPFIELD_OUTPUT_DIR/{default_name})')
