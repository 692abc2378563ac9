import logging
from pathlib import Path
from typing import List

from config import add_material_arguments, add_output_argument, load_run_config
from polariton import fit
from polariton.errors import ConfigError, DomainError
from polariton.model import CavityCalibration, cavity_frequency, is_ultrastrong
from utils.helpers import branch_index, format_float, read_csv, read_json, write_json

logger = logging.getLogger(__name__)

POINT_COLUMNS = ('length_um', 'omega_c_thz', 'omega_meas_thz', 'weight', 'branch')


def read_branch_points(path: Path, calibration: CavityCalibration, n_branches: int) -> List[fit.BranchPoint]:
    """BranchPoints from a CSV with length_um or omega_c_thz, omega_meas_thz, optional weight and branch.

    The branch column takes a 0-based index or a name as written by `dispersion` (LP, MP1, UP, ...).
    """
    try:
        header, rows = read_csv(path)
    except FileNotFoundError as e:
        raise ConfigError(f"points file {path} not found") from e
    except UnicodeDecodeError as e:
        raise ConfigError(f"points file {path} is not UTF-8 text: {e.reason}") from e
    unknown = [name for name in header if name not in POINT_COLUMNS]
    if unknown:
        raise ConfigError(f"{path}:1: unknown columns {', '.join(unknown)}")
    if 'omega_meas_thz' not in header:
        raise ConfigError(f"{path}:1: column omega_meas_thz is required")
    if ('length_um' in header) == ('omega_c_thz' in header):
        raise ConfigError(f"{path}:1: give exactly one of length_um or omega_c_thz")

    points = []
    for line_number, values in rows:
        if len(values) != len(header):
            raise ConfigError(f"{path}:{line_number}: expected {len(header)} fields, got {len(values)}")
        record = {name: value.strip() for name, value in zip(header, values)}
        try:
            if 'length_um' in record:
                omega_c = cavity_frequency(float(record['length_um']), calibration)
            else:
                omega_c = float(record['omega_c_thz'])
            branch = record.get('branch', '')
            points.append(fit.BranchPoint(omega_c, float(record['omega_meas_thz']),
                                          float(record.get('weight') or 1.0),
                                          branch_index(branch, n_branches) if branch else None))
        except (ValueError, DomainError) as e:
            raise ConfigError(f"{path}:{line_number}: {e}") from e
    logger.info(f"Read {len(points)} branch points from {path}")
    return points


def read_report(path: Path) -> fit.FitResult:
    try:
        data = read_json(path)
    except FileNotFoundError as e:
        raise ConfigError(f"fit report {path} not found") from e
    except ValueError as e:
        raise ConfigError(f"fit report {path} is not valid JSON: {e}") from e
    if 'result' not in data:
        raise ConfigError(f"{path} is not a fit report")
    return fit.FitResult.from_dict(data['result'])


class FittingCog:
    """Coupling fits and phase comparisons."""

    def register(self, subparsers):
        parser = subparsers.add_parser('fit', help='fit plasma frequencies to measured branch points')
        parser.add_argument('points', help='branch point CSV')
        add_material_arguments(parser)
        group = parser.add_argument_group('optimizer')
        group.add_argument('--nu-max', type=float, help='upper bound on every nu in THz')
        group.add_argument('--ratio-min', type=float)
        group.add_argument('--ratio-max', type=float)
        group.add_argument('--grid-steps', type=int)
        group.add_argument('--tolerance', type=float)
        group.add_argument('--max-iterations', type=int)
        add_output_argument(parser, 'fit_report')
        parser.set_defaults(handler=self.fit_command)

        parser = subparsers.add_parser('compare', help='relative coupling changes between two fit reports')
        parser.add_argument('high', help='fit report (.json) above the transition')
        parser.add_argument('low', help='fit report (.json) below the transition')
        parser.set_defaults(handler=self.compare_command)

    def fit_command(self, args) -> int:
        """Fit ν with the active mode set's phonon frequencies held fixed."""
        config = load_run_config(args)
        modes = config.mode_set()
        points = read_branch_points(Path(args.points), config.calibration(), len(modes) + 1)
        result = fit.fit_couplings(points, [m.omega for m in modes], config.fit_options(),
                                   labels=[m.label for m in modes])

        stem = config.output_path('fit_report')
        stem = stem.with_suffix('') if stem.suffix in ('.txt', '.json') else stem
        lines = [f"{label}: omega = {format_float(omega)} THz, nu = {format_float(nu)} THz, "
                 f"g/omega = {coupling:.4f}{' (USC)' if is_ultrastrong(coupling) else ''}"
                 for label, omega, nu, coupling in zip(result.labels, result.omegas, result.nu,
                                                       result.normalized_couplings)]
        lines.append(f"rms residual: {format_float(result.rms_residual)} THz over {len(points)} points")
        lines.append(f"iterations: {result.iterations}, converged: {'yes' if result.converged else 'no'}")
        if any(result.ambiguous):
            lines.append(f"ambiguous assignments: {sum(result.ambiguous)}")

        text_path = stem.with_name(stem.name + '.txt')
        text_path.parent.mkdir(parents=True, exist_ok=True)
        text_path.write_text('\n'.join(lines) + '\n')
        write_json(stem.with_name(stem.name + '.json'),
                   {'command': 'fit', 'config': config.as_dict(), 'points': str(args.points),
                    'result': result.as_dict()})
        for line in lines:
            print(line)
        return 0

    def compare_command(self, args) -> int:
        comparison = fit.compare_phases(read_report(Path(args.high)), read_report(Path(args.low)))
        for line in comparison.lines():
            print(line)
        return 0


def setup(subparsers):
    """Setup function for the cog."""
    FittingCog().register(subparsers)
