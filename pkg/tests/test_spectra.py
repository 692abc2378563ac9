import numpy as np
import pytest
from scipy.signal import find_peaks

from polariton import dispersion, fit, spectra
from polariton.errors import DomainError
from polariton.model import PhononMode, cavity_frequency
from utils.constants import SAMPLE_SLOT_LENGTHS_UM


def _minima(spectrum):
    indices, _ = find_peaks(-spectrum.transmittance)
    return spectrum.omega_grid[indices]


def test_bare_cavity_peak():
    spectrum = spectra.coupled_transmittance((), 1.52, spectra.DampingSet(0.1), spectra.default_omega_grid())
    assert spectra.extract_peaks(spectrum) == pytest.approx([1.52], abs=0.0025)
    assert spectrum.transmittance.max() == pytest.approx(1.0)


def test_small_damping_peaks_sit_at_polariton_frequencies(tetragonal_modes):
    grid = np.arange(0.2, 3.2, 0.001)
    damping = spectra.DampingSet.uniform(2, kappa=0.02, gamma=0.02)
    spectrum = spectra.coupled_transmittance(tetragonal_modes, 1.52, damping, grid)
    peaks = spectra.extract_peaks(spectrum, min_prominence=0.005)
    roots = dispersion.secular_roots(tetragonal_modes, 1.52)
    assert len(peaks) == 3
    np.testing.assert_allclose(peaks, roots, atol=0.01)


def test_map_column_peaks_match_roots(tetragonal_modes):
    damping = spectra.DampingSet.uniform(2, kappa=0.05, gamma=0.05)
    transmittance = spectra.transmittance_map(tetragonal_modes, [1.52], damping, spectra.default_omega_grid())
    peaks = spectra.extract_peaks(transmittance.column(0))
    assert len(peaks) == 3
    np.testing.assert_allclose(peaks, dispersion.secular_roots(tetragonal_modes, 1.52), atol=0.025)


@pytest.mark.parametrize('omega_c, resolved', [(0.8, 3), (1.2, 4), (1.52, 4)])
def test_orthorhombic_peaks_at_default_damping(orthorhombic_modes, omega_c, resolved):
    # The weak middle branch near 0.82 THz merges into the background at omega_c = 0.8
    damping = spectra.DampingSet.uniform(3, kappa=0.1, gamma=0.05)
    spectrum = spectra.coupled_transmittance(orthorhombic_modes, omega_c, damping, spectra.default_omega_grid())
    peaks = spectra.extract_peaks(spectrum)
    roots = np.asarray(dispersion.secular_roots(orthorhombic_modes, omega_c))
    assert len(peaks) == resolved
    for peak in peaks:
        assert np.min(np.abs(roots - peak)) <= 0.05


def test_orthorhombic_peaks_never_outnumber_branches(orthorhombic_modes):
    damping = spectra.DampingSet.uniform(3, kappa=0.1, gamma=0.05)
    transmittance = spectra.transmittance_map(orthorhombic_modes, [0.8, 1.2, 1.52, 2.2], damping,
                                              spectra.default_omega_grid())
    counts = [len(spectra.extract_peaks(transmittance.column(k))) for k in range(4)]
    assert all(count <= 4 for count in counts)
    assert counts[3] == 3


def test_decoupled_phonon_leaves_cavity_peak():
    modes = (PhononMode('TO1', 1.0, 0.0),)
    spectrum = spectra.coupled_transmittance(modes, 1.5, spectra.DampingSet(0.0, (0.05,)),
                                             spectra.default_omega_grid())
    assert spectra.extract_peaks(spectrum) == pytest.approx([1.5], abs=0.005)


def test_all_zero_damping_is_rejected(single_mode):
    with pytest.raises(DomainError):
        spectra.coupled_transmittance(single_mode, 1.0, spectra.DampingSet(0.0, (0.0,)),
                                      spectra.default_omega_grid())


def test_damping_count_must_match_modes(single_mode):
    with pytest.raises(DomainError):
        spectra.coupled_transmittance(single_mode, 1.0, spectra.DampingSet(0.1, ()), spectra.default_omega_grid())
    with pytest.raises(DomainError):
        spectra.DampingSet(-0.1)


def test_bare_film_dips_at_tetragonal_phonons(tetragonal_modes):
    spectrum = spectra.bare_film_transmittance(tetragonal_modes)
    minima = _minima(spectrum)
    for omega in (0.95, 1.78):
        assert np.min(np.abs(minima - omega)) < 0.03
    assert spectrum.metadata['thin_film_valid']


def test_bare_film_dips_at_orthorhombic_phonons(orthorhombic_modes):
    minima = _minima(spectra.bare_film_transmittance(orthorhombic_modes))
    for omega in (0.77, 0.98):
        assert np.min(np.abs(minima - omega)) < 0.03
    assert np.any((minima > 1.67) & (minima < 1.81))


def test_bare_film_dip_deepens_with_coupling():
    grid = spectra.default_omega_grid()
    at_phonon = int(np.argmin(np.abs(grid - 1.0)))
    depths = []
    for nu in (0.1, 0.3, 0.6, 1.0):
        spectrum = spectra.bare_film_transmittance((PhononMode('TO1', 1.0, nu, 0.05),), omega_grid=grid)
        depths.append(spectrum.transmittance[at_phonon])
    assert all(later < earlier for earlier, later in zip(depths, depths[1:]))
    assert depths[0] > 0.99 and depths[-1] < 0.96


def test_bare_film_without_phonons_is_flat():
    modes = (PhononMode('TO1', 1.0, 0.0, 0.05),)
    spectrum = spectra.bare_film_transmittance(modes, eps_inf=1.0)
    np.testing.assert_allclose(spectrum.transmittance, 1.0, atol=1e-12)


def test_thick_film_is_flagged(tetragonal_modes):
    spectrum = spectra.bare_film_transmittance(tetragonal_modes, thickness=20.0)
    assert not spectrum.metadata['thin_film_valid']


def test_dielectric_function_static_limit(tetragonal_modes):
    eps = spectra.dielectric_function(tetragonal_modes, 5.0, [1e-4])
    expected = 5.0 + sum(m.nu ** 2 / m.omega ** 2 for m in tetragonal_modes)
    assert eps[0].real == pytest.approx(expected, rel=1e-6)


def test_transmittance_map_columns_in_grid_order(tetragonal_modes):
    grid = spectra.default_omega_grid()
    damping = spectra.DampingSet.from_modes(tetragonal_modes)
    columns = [0.8, 1.52, 2.4]
    transmittance = spectra.transmittance_map(tetragonal_modes, columns, damping, grid)
    assert transmittance.values.shape == (grid.size, 3)
    for k, omega_c in enumerate(columns):
        expected = spectra.coupled_transmittance(tetragonal_modes, omega_c, damping, grid).transmittance
        np.testing.assert_array_equal(transmittance.values[:, k], expected)


def test_temperature_map_switches_mode_set(material, tetragonal_modes):
    grid = spectra.default_omega_grid()
    temps = [150.0, 160.0, 165.0, 170.0]
    transmittance = spectra.temperature_map(material, 1.2, 0.1, temps, grid)
    assert transmittance.column_name == 'T'
    expected = spectra.coupled_transmittance(tetragonal_modes, 1.2, spectra.DampingSet.from_modes(tetragonal_modes, 0.1),
                                             grid).transmittance
    np.testing.assert_array_equal(transmittance.values[:, 2], expected)
    np.testing.assert_array_equal(transmittance.values[:, 0], transmittance.values[:, 1])
    low, high = (spectra.extract_peaks(transmittance.column(k), min_prominence=0.005) for k in (0, 3))
    assert len(low) > len(high)
    with pytest.raises(DomainError):
        spectra.extract_map_peaks(transmittance)


def test_orthorhombic_map_has_ridge_near_0_83(orthorhombic_modes):
    columns = np.arange(1.2, 1.8001, 0.1)
    transmittance = spectra.transmittance_map(orthorhombic_modes, columns,
                                              spectra.DampingSet.from_modes(orthorhombic_modes),
                                              spectra.default_omega_grid())
    for k in range(columns.size):
        peaks = np.array(spectra.extract_peaks(transmittance.column(k)))
        assert np.any((peaks > 0.77) & (peaks < 0.98))
    at_1_5 = np.array(spectra.extract_peaks(transmittance.column(3)))
    assert np.any(np.abs(at_1_5 - 0.83) < 0.07)


def test_flat_spectrum_has_no_peaks():
    grid = spectra.default_omega_grid()
    assert spectra.extract_peaks(spectra.Spectrum(grid, np.ones_like(grid))) == []


def test_prominence_must_be_a_fraction():
    grid = spectra.default_omega_grid()
    with pytest.raises(DomainError):
        spectra.extract_peaks(spectra.Spectrum(grid, np.ones_like(grid)), min_prominence=0.0)


def test_omega_grid_validation(single_mode):
    with pytest.raises(DomainError):
        spectra.coupled_transmittance(single_mode, 1.0, spectra.DampingSet.uniform(1), [1.0, 0.5, 2.0])


@pytest.mark.parametrize('phase_modes, expected', [
    ('tetragonal_modes', (0.36, 0.35)),
    ('orthorhombic_modes', (0.28, 0.36, 0.25)),
])
def test_pipeline_closure(request, phase_modes, expected):
    modes = request.getfixturevalue(phase_modes)
    columns = sorted(cavity_frequency(length) for length in SAMPLE_SLOT_LENGTHS_UM)
    transmittance = spectra.transmittance_map(modes, columns, spectra.DampingSet.uniform(len(modes), 0.1, 0.05),
                                              spectra.default_omega_grid())
    points = spectra.extract_map_peaks(transmittance, min_prominence=0.02)
    assert len(points) >= len(modes)
    result = fit.fit_couplings(points, [m.omega for m in modes])
    for found, target in zip(result.normalized_couplings, expected):
        assert found == pytest.approx(target, abs=0.01)
