import argparse
import json

import numpy as np
import pytest

from config import (DEFAULT_RUN_CONFIG, RunConfig, get_log_file, get_output_dir, load_run_config, parse_mode,
                    parse_modes)
from polariton.errors import ConfigError
from polariton.model import Phase


def _args(**values):
    return argparse.Namespace(**values)


def test_defaults_select_tetragonal_preset():
    config = load_run_config(_args())
    assert config.preset_name == 'mapbi3'
    assert config.selected_phase() is Phase.TETRAGONAL
    assert [m.label for m in config.mode_set()] == ['TO1', 'TO2']
    grid = config.omega_c_grid()
    assert grid[0] == pytest.approx(0.2) and grid[-1] == pytest.approx(3.2) and grid.size == 301


def test_flags_override_config_file(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'phase': 'orthorhombic', 'kappa': 0.2, 'omega_c_step': 0.1}))
    config = load_run_config(_args(config=str(path), kappa=0.3))
    assert config.kappa == 0.3
    assert config.omega_c_step == 0.1
    assert len(config.mode_set()) == 3


def test_unknown_config_key_is_rejected(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'kapa': 0.2}))
    with pytest.raises(ConfigError, match='kapa'):
        load_run_config(_args(config=str(path)))


def test_invalid_config_json(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text('{not json')
    with pytest.raises(ConfigError):
        load_run_config(_args(config=str(path)))


def test_preset_and_inline_modes_are_exclusive():
    with pytest.raises(ConfigError):
        load_run_config(_args(preset='mapbi3', modes='TO1:1:0.5'))


def test_preset_flag_displaces_file_modes(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'modes': 'A:1.0:0.5'}))
    config = load_run_config(_args(config=str(path), preset='mapbi3'))
    assert config.modes is None
    assert [m.label for m in config.mode_set()] == ['TO1', 'TO2']


def test_modes_flag_displaces_file_preset(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'preset': 'mapbi3'}))
    config = load_run_config(_args(config=str(path), modes='A:1.0:0.5'))
    assert config.preset is None
    assert [m.label for m in config.mode_set()] == ['A']


def test_temperature_flag_displaces_file_phase(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'phase': 'tetragonal'}))
    config = load_run_config(_args(config=str(path), temperature=151.0))
    assert config.phase is None
    assert config.selected_phase() is Phase.ORTHORHOMBIC


def test_phase_flag_displaces_file_temperature(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'temperature': 151.0}))
    config = load_run_config(_args(config=str(path), phase='tetragonal'))
    assert config.temperature is None
    assert config.selected_phase() is Phase.TETRAGONAL


def test_exclusive_keys_in_one_file_still_conflict(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'phase': 'tetragonal', 'temperature': 151.0}))
    with pytest.raises(ConfigError, match='phase or a temperature'):
        load_run_config(_args(config=str(path)))


def test_single_extra_mode_string_in_file(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'extra_modes': 'TO4:1.2:0.3'}))
    config = load_run_config(_args(config=str(path)))
    assert config.extra_modes == ('TO4:1.2:0.3',)
    assert [m.label for m in config.mode_set()] == ['TO1', 'TO2', 'TO4']


def test_damped_material_fills_missing_linewidths():
    config = load_run_config(_args(extra_modes=['TO4:1.2:0.3'], gamma=0.2))
    material = config.damped_material()
    gammas = {m.label: m.gamma for m in material.orthorhombic_modes}
    assert gammas['TO4'] == 0.2
    assert gammas['TO1'] == 0.05
    assert all(m.gamma > 0 for m in material.tetragonal_modes)


def test_unknown_preset():
    with pytest.raises(ConfigError, match='unknown preset'):
        load_run_config(_args(preset='nope'))


def test_inline_modes_and_extra_mode():
    config = load_run_config(_args(modes='A:1.0:0.5:0.02, B:2.0:0.3', extra_modes=['C:3.0:0.1']))
    modes = config.mode_set()
    assert [m.label for m in modes] == ['A', 'B', 'C']
    assert modes[0].gamma == 0.02
    assert config.damping(modes).gammas == (0.02, DEFAULT_RUN_CONFIG['gamma'], DEFAULT_RUN_CONFIG['gamma'])


def test_empty_inline_modes_mean_bare_cavity():
    assert load_run_config(_args(modes='')).mode_set() == ()
    assert parse_modes('  ') == ()


@pytest.mark.parametrize('text', ['TO1', 'TO1:a:0.5', ':1:0.5', 'TO1:-1:0.5', 'TO1:1:0.5:0.1:9'])
def test_bad_mode_definition(text):
    with pytest.raises(ConfigError):
        parse_mode(text)


def test_duplicate_extra_label():
    config = load_run_config(_args(extra_modes=['TO1:0.5:0.1']))
    with pytest.raises(ConfigError):
        config.mode_set()


def test_temperature_selects_phase():
    assert load_run_config(_args(temperature=151.0)).selected_phase() is Phase.ORTHORHOMBIC
    assert load_run_config(_args(temperature=165.0)).selected_phase() is Phase.TETRAGONAL
    with pytest.raises(ConfigError):
        load_run_config(_args(temperature=151.0, phase='tetragonal'))


def test_extra_modes_join_low_temperature_set():
    config = load_run_config(_args(extra_modes=['TO4:1.2:0.2']))
    material = config.scan_material()
    assert [m.label for m in material.orthorhombic_modes] == ['TO1', 'TO2', 'TO3', 'TO4']
    assert len(material.tetragonal_modes) == 2


def test_lengths_replace_the_grid():
    config = load_run_config(_args(lengths='120, 60'))
    np.testing.assert_allclose(config.omega_c_grid(), [0.76, 1.52])


@pytest.mark.parametrize('values', [
    {'kappa': -0.1},
    {'omega_c_step': 0.0},
    {'phase': 'cubic'},
    {'min_prominence': 1.5},
    {'lengths': '60,-1'},
])
def test_invalid_values(values):
    with pytest.raises(ConfigError):
        load_run_config(_args(**values)).omega_c_grid()


def test_as_dict_echoes_effective_configuration():
    data = load_run_config(_args(kappa=0.2)).as_dict()
    assert data['kappa'] == 0.2
    assert set(data) == set(DEFAULT_RUN_CONFIG)
    json.dumps(data)


def test_run_config_is_immutable():
    config = RunConfig()
    with pytest.raises(AttributeError):
        config.kappa = 1.0


def test_environment_getters(monkeypatch, tmp_path):
    monkeypatch.setenv('HOPFIELD_OUTPUT_DIR', str(tmp_path / 'out'))
    monkeypatch.setenv('HOPFIELD_LOG_FILE', str(tmp_path / 'x.log'))
    assert get_output_dir() == tmp_path / 'out'
    assert get_log_file() == str(tmp_path / 'x.log')
    monkeypatch.delenv('HOPFIELD_OUTPUT_DIR')
    assert str(get_output_dir()) == 'output'
