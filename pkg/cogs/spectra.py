import logging
from pathlib import Path

import numpy as np

from config import (add_cavity_grid_arguments, add_damping_arguments, add_material_arguments,
                    add_output_argument, add_frequency_grid_arguments, add_temperature_arguments,
                    load_run_config)
from polariton import spectra
from polariton.errors import ConfigError
from utils.helpers import format_float, read_csv, write_csv

logger = logging.getLogger(__name__)

COLUMN_PREFIXES = ('omega_c', 'T')


def map_header(transmittance: spectra.TransmittanceMap) -> list:
    return ['omega_thz'] + [f"{transmittance.column_name}={format_float(v)}"
                            for v in transmittance.column_grid]


def read_map(path: Path) -> spectra.TransmittanceMap:
    """Gridded transmittance CSV as written by synth-map."""
    try:
        header, rows = read_csv(path)
    except FileNotFoundError as e:
        raise ConfigError(f"map file {path} not found") from e
    except UnicodeDecodeError as e:
        raise ConfigError(f"map file {path} is not UTF-8 text: {e.reason}") from e
    if len(header) < 2 or header[0] != 'omega_thz':
        raise ConfigError(f"{path}:1: header must start with omega_thz followed by column values")

    names, columns = set(), []
    for cell in header[1:]:
        name, _, value = cell.partition('=')
        if name not in COLUMN_PREFIXES:
            raise ConfigError(f"{path}:1: column '{cell}' must look like omega_c=<THz> or T=<K>")
        try:
            columns.append(float(value))
        except ValueError as e:
            raise ConfigError(f"{path}:1: column '{cell}': {e}") from e
        names.add(name)
    if len(names) != 1:
        raise ConfigError(f"{path}:1: mixed column kinds {sorted(names)}")

    omega, values = [], []
    for line_number, fields in rows:
        if len(fields) != len(header):
            raise ConfigError(f"{path}:{line_number}: expected {len(header)} fields, got {len(fields)}")
        try:
            numbers = [float(v) for v in fields]
        except ValueError as e:
            raise ConfigError(f"{path}:{line_number}: {e}") from e
        omega.append(numbers[0])
        values.append(numbers[1:])
    if len(omega) < 3 or np.any(np.diff(omega) <= 0):
        raise ConfigError(f"{path}: need at least 3 rows with increasing omega_thz")
    return spectra.TransmittanceMap(np.array(omega), np.array(columns), np.array(values), names.pop())


class SpectraCog:
    """Synthetic transmittance maps, peak extraction and bare-film spectra."""

    def register(self, subparsers):
        parser = subparsers.add_parser('synth-map', help='synthetic normalized transmittance map')
        add_material_arguments(parser)
        add_cavity_grid_arguments(parser)
        add_frequency_grid_arguments(parser)
        add_damping_arguments(parser)
        add_temperature_arguments(parser)
        parser.add_argument('--t-grid', action='store_true',
                            help='columns follow temperature at fixed --omega-c instead of omega_c')
        add_output_argument(parser, 'transmittance_map.csv')
        parser.set_defaults(handler=self.synth_map_command)

        parser = subparsers.add_parser('extract', help='peak positions from a transmittance map')
        parser.add_argument('map', help='gridded transmittance CSV')
        parser.add_argument('--min-prominence', type=float)
        add_output_argument(parser, 'points.csv')
        parser.set_defaults(handler=self.extract_command)

        parser = subparsers.add_parser('film', help='bare-film transmittance without the cavity')
        add_material_arguments(parser)
        add_frequency_grid_arguments(parser)
        film = parser.add_argument_group('film')
        film.add_argument('--gamma', type=float, help='phonon linewidth in THz for modes without one')
        film.add_argument('--eps-inf', type=float)
        film.add_argument('--thickness-um', type=float)
        film.add_argument('--substrate-index', type=float)
        add_output_argument(parser, 'film.csv')
        parser.set_defaults(handler=self.film_command)

    def synth_map_command(self, args) -> int:
        config = load_run_config(args)
        if args.t_grid:
            if config.omega_c is None:
                raise ConfigError("synth-map --t-grid needs --omega-c")
            result = spectra.temperature_map(config.damped_material(), config.omega_c, config.kappa,
                                             config.t_grid(), config.omega_grid())
        else:
            modes = config.mode_set()
            result = spectra.transmittance_map(modes, config.omega_c_grid(), config.damping(modes),
                                               config.omega_grid())

        rows = ([float(w), *(float(v) for v in row)] for w, row in zip(result.omega_grid, result.values))
        path = write_csv(config.output_path('transmittance_map.csv'), map_header(result), rows)
        config.write_metadata(path, 'synth-map', columns=result.column_name,
                              shape=[int(s) for s in result.values.shape])
        print(f"{path}: {result.values.shape[0]} x {result.values.shape[1]} "
              f"transmittance map over {result.column_name}")
        return 0

    def extract_command(self, args) -> int:
        """Write one BranchPoint row per peak; a flat map yields a header-only file."""
        config = load_run_config(args)
        transmittance = read_map(Path(args.map))
        points = spectra.extract_map_peaks(transmittance, config.min_prominence)
        path = write_csv(config.output_path('points.csv'), ['omega_c_thz', 'omega_meas_thz', 'weight'],
                         ([p.omega_c, p.omega_meas, p.weight] for p in points))
        config.write_metadata(path, 'extract', source=str(args.map), peaks=len(points))
        print(f"{path}: {len(points)} peaks from {transmittance.column_grid.size} columns")
        return 0

    def film_command(self, args) -> int:
        config = load_run_config(args)
        modes = config.damped_modes(config.mode_set())
        spectrum = spectra.bare_film_transmittance(modes, config.eps_inf, config.thickness_um,
                                                   config.substrate_index, config.omega_grid())
        eps = spectra.dielectric_function(modes, config.eps_inf, spectrum.omega_grid)
        rows = ([float(w), float(t), float(e.real), float(e.imag)]
                for w, t, e in zip(spectrum.omega_grid, spectrum.transmittance, eps))
        path = write_csv(config.output_path('film.csv'), ['omega_thz', 'transmittance', 'eps_real', 'eps_imag'],
                         rows)
        config.write_metadata(path, 'film', **spectrum.metadata)
        note = '' if spectrum.metadata['thin_film_valid'] else ' (outside the thin-film limit)'
        print(f"{path}: bare-film transmittance with {len(modes)} phonon modes{note}")
        return 0


def setup(subparsers):
    """Setup function for the cog."""
    SpectraCog().register(subparsers)
