import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from polariton.errors import ConfigError, DomainError
from polariton.model import CavityCalibration, MaterialModel, PhononMode

logger = logging.getLogger(__name__)

PRESETS_DIR = Path(__file__).resolve().parent.parent / "presets"

REQUIRED_KEYS = ("name", "tc", "phases")


def list_presets(directory: Path = PRESETS_DIR) -> List[str]:
    """Names of the preset files available."""
    return sorted(path.stem for path in Path(directory).glob("*.json"))


def get_preset_data(name: str, directory: Path = PRESETS_DIR) -> Dict[str, Any]:
    """Raw preset data from its JSON file."""
    path = Path(directory) / f"{name}.json"
    if not path.exists():
        raise ConfigError(f"unknown preset '{name}' (available: {', '.join(list_presets(directory)) or 'none'})")
    try:
        with open(path) as handle:
            data = json.load(handle)
    except json.JSONDecodeError as e:
        logger.error(f"Error reading preset {path}: {e}")
        raise ConfigError(f"preset {path} is not valid JSON: {e}") from e

    missing = [key for key in REQUIRED_KEYS if key not in data]
    if missing:
        raise ConfigError(f"preset {path} lacks keys: {', '.join(missing)}")
    return data


def _modes_from(entries: List[Dict[str, Any]], where: str) -> tuple:
    try:
        return tuple(PhononMode(str(entry["label"]), float(entry["omega"]), float(entry.get("nu", 0.0)),
                                float(entry.get("gamma", 0.0)))
                     for entry in entries)
    except (KeyError, TypeError, ValueError, DomainError) as e:
        raise ConfigError(f"invalid mode entry in {where}: {e}") from e


def load_material(name: str, directory: Path = PRESETS_DIR) -> MaterialModel:
    """MaterialModel for a preset name."""
    data = get_preset_data(name, directory)
    phases = data["phases"]
    try:
        material = MaterialModel(
            name=data["name"],
            tc=float(data["tc"]),
            tetragonal_modes=_modes_from(phases["tetragonal"]["modes"], f"{name}/tetragonal"),
            orthorhombic_modes=_modes_from(phases["orthorhombic"]["modes"], f"{name}/orthorhombic"),
            notes=tuple(data.get("notes", ())),
        )
    except KeyError as e:
        raise ConfigError(f"preset {name} lacks phase {e}") from e
    except DomainError as e:
        raise ConfigError(f"preset {name} is invalid: {e}") from e
    logger.debug(f"Loaded preset {name}: tc={material.tc} K")
    return material


def load_calibration(name: str, directory: Path = PRESETS_DIR) -> Optional[CavityCalibration]:
    """Cavity calibration stored with a preset, if any."""
    entry = get_preset_data(name, directory).get("calibration")
    if not entry:
        return None
    return CavityCalibration(float(entry["amplitude"]), float(entry["exponent"]))
