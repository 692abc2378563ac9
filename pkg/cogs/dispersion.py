import logging
from pathlib import Path

import numpy as np

from config import (add_cavity_grid_arguments, add_material_arguments, add_output_argument,
                    add_temperature_arguments, load_run_config)
from polariton import dispersion
from polariton.errors import ConfigError
from utils.helpers import format_float, write_csv

logger = logging.getLogger(__name__)


class DispersionCog:
    """Dispersion sweeps over the cavity frequency and temperature scans."""

    def register(self, subparsers):
        parser = subparsers.add_parser('dispersion', help='polariton branches over a cavity-frequency grid')
        add_material_arguments(parser)
        add_cavity_grid_arguments(parser)
        add_output_argument(parser, 'dispersion.csv')
        parser.set_defaults(handler=self.dispersion_command)

        parser = subparsers.add_parser('scan-temperature', help='branch frequencies across temperature at fixed omega_c')
        add_material_arguments(parser, with_phase=False)
        add_temperature_arguments(parser)
        add_output_argument(parser, 'temperature_scan.csv')
        parser.set_defaults(handler=self.scan_temperature_command)

    def dispersion_command(self, args) -> int:
        """Write the long-format dispersion CSV with photon and phonon fractions."""
        config = load_run_config(args)
        modes = config.mode_set()
        result = dispersion.sweep(modes, config.omega_c_grid(), config.include_diamagnetic)

        path = write_csv(config.output_path('dispersion.csv'), result.header(), result.rows())
        ambiguous = int(result.ambiguous.sum())
        config.write_metadata(path, 'dispersion',
                              modes=[[m.label, m.omega, m.nu] for m in modes],
                              branches=result.names, ambiguous_points=ambiguous)
        if ambiguous:
            logger.warning(f"{ambiguous} grid points had ambiguous branch connectivity")
        print(f"{path}: {result.branch_count} branches ({', '.join(result.names)}) "
              f"at {len(result.omega_c_grid)} cavity frequencies")
        return 0

    def scan_temperature_command(self, args) -> int:
        """Branch table per temperature plus the change points in branch count."""
        config = load_run_config(args)
        if config.omega_c is None:
            raise ConfigError("scan-temperature needs --omega-c")
        material = config.scan_material()
        scan = dispersion.scan_temperature(material, config.omega_c, config.t_grid(),
                                           config.include_diamagnetic)

        width = max(scan.branch_counts)
        header = ['T', 'phase', 'n_branches'] + [f"Omega_{k}" for k in range(width)]
        rows = [[float(t), phase.value, len(branches), *branches, *([None] * (width - len(branches)))]
                for t, phase, branches in zip(scan.t_grid, scan.phase_labels, scan.branch_table)]
        path = write_csv(config.output_path('temperature_scan.csv'), header, rows)

        counts = scan.branch_counts
        changes = []
        for temperature in scan.change_points():
            k = int(np.searchsorted(scan.t_grid, temperature))
            changes.append([temperature, counts[k - 1], counts[k]])
        summary = write_csv(Path(path).with_name(f"{Path(path).stem}_changes.csv"),
                            ['T_change', 'branches_before', 'branches_after'], changes)
        config.write_metadata(path, 'scan-temperature', material=material.name, tc=material.tc,
                              change_points=[c[0] for c in changes])

        if not changes:
            print(f"{path}: no change point in branch count")
        for temperature, before, after in changes:
            print(f"change point: {format_float(temperature)} K ({before} -> {after} branches)")
        logger.info(f"Wrote change-point summary to {summary}")
        return 0


def setup(subparsers):
    """Setup function for the cog."""
    DispersionCog().register(subparsers)
