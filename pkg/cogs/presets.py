import json
import logging

from polariton.model import Phase, resonance_couplings
from utils.presets import get_preset_data, list_presets, load_material

logger = logging.getLogger(__name__)


class PresetsCog:
    """Shipped material presets."""

    def register(self, subparsers):
        parser = subparsers.add_parser('presets', help='list material presets or show one')
        parser.add_argument('--show', metavar='NAME', help='print one preset as JSON')
        parser.set_defaults(handler=self.presets_command)

    def presets_command(self, args) -> int:
        if args.show:
            print(json.dumps(get_preset_data(args.show), indent=2, sort_keys=True))
            return 0
        for name in list_presets():
            material = load_material(name)
            summary = []
            for phase in Phase:
                modes = material.modes_for(phase)
                couplings = ', '.join(f"{m.label} {c:.2f}" for m, c in zip(modes, resonance_couplings(modes)))
                summary.append(f"{phase.value}: {couplings or 'no modes'}")
            print(f"{name} (tc = {material.tc:g} K) " + '; '.join(summary))
        return 0


def setup(subparsers):
    """Setup function for the cog."""
    PresetsCog().register(subparsers)
