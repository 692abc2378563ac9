import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polariton import hopfield
from polariton.errors import ContractViolation, DomainError, InstabilityError
from polariton.model import PhononMode, coupling_strength

ROOT_LOW = 0.7807764064044151
ROOT_HIGH = 1.2807764064044151


@st.composite
def mode_sets(draw, max_modes=3):
    count = draw(st.integers(0, max_modes))
    modes = []
    for k in range(count):
        omega = draw(st.floats(0.1, 5.0))
        ratio = draw(st.floats(0.0, 1.0))
        modes.append(PhononMode(f"TO{k + 1}", omega, ratio * omega))
    return tuple(modes)


cavity_frequencies = st.floats(0.1, 5.0)


def test_bare_cavity_matrix():
    matrix = hopfield.build_dynamical_matrix(1.0, ())
    np.testing.assert_allclose(matrix.entries, np.diag([1.0, -1.0]))


def test_decoupled_matrix_is_diagonal():
    matrix = hopfield.build_dynamical_matrix(1.0, (PhononMode('TO1', 2.0, 0.0),))
    np.testing.assert_allclose(matrix.entries, np.diag([1.0, 2.0, -1.0, -2.0]))


def test_single_mode_resonance_eigenvalues(single_mode):
    values = np.sort(np.linalg.eigvals(hopfield.build_dynamical_matrix(1.0, single_mode).entries).real)
    np.testing.assert_allclose(values, [-ROOT_HIGH, -ROOT_LOW, ROOT_LOW, ROOT_HIGH], rtol=1e-12)


def test_build_rejects_non_positive_cavity_frequency(single_mode):
    with pytest.raises(DomainError):
        hopfield.build_dynamical_matrix(0.0, single_mode)


def test_decoupled_diagonalization():
    solutions = hopfield.solve(1.0, (PhononMode('TO1', 2.0, 0.0),))
    assert [m.omega for m in solutions] == pytest.approx([1.0, 2.0], abs=1e-12)
    assert hopfield.fractions(solutions[0]) == pytest.approx((1.0, (0.0,)), abs=1e-12)
    assert hopfield.fractions(solutions[1])[1] == pytest.approx((1.0,), abs=1e-12)


def test_zero_detuning_splitting_equals_nu(single_mode):
    lower, upper = hopfield.solve(1.0, single_mode)
    assert lower.omega == pytest.approx(ROOT_LOW, rel=1e-12)
    assert upper.omega == pytest.approx(ROOT_HIGH, rel=1e-12)
    assert abs(upper.omega - lower.omega - 0.5) < 1e-10


@pytest.mark.parametrize('nu', [0.2, 0.9, 1.7])
def test_zero_detuning_law_holds_for_any_coupling(nu):
    lower, upper = hopfield.solve(1.3, (PhononMode('TO1', 1.3, nu),))
    assert abs(upper.omega - lower.omega - nu) < 1e-10


def test_weak_coupling_at_resonance_mixes_evenly():
    for mode in hopfield.solve(1.0, (PhononMode('TO1', 1.0, 1e-5),)):
        photon, phonons = hopfield.fractions(mode)
        assert photon == pytest.approx(0.5, abs=1e-4)
        assert phonons[0] == pytest.approx(0.5, abs=1e-4)


def test_tetragonal_branch_ordering(tetragonal_modes):
    lp, mp, up = (m.omega for m in hopfield.solve(1.52, tetragonal_modes))
    assert lp < 0.95 < mp < 1.78 < up


def test_diamagnetic_coefficient_examples(tetragonal_modes):
    assert hopfield.diamagnetic_coefficient(1.0, ()) == 0.0
    assert hopfield.diamagnetic_coefficient(1.0, (PhononMode('TO1', 1.0, 1.0),)) == pytest.approx(0.25)
    expected = sum(coupling_strength(m.nu, m.omega, 1.52) ** 2 / m.omega for m in tetragonal_modes)
    assert hopfield.diamagnetic_coefficient(1.52, tetragonal_modes) == pytest.approx(expected, rel=1e-14)
    # g²/ω = ν²/(4ω_c) for every mode
    assert expected == pytest.approx((0.684 ** 2 + 1.246 ** 2) / (4 * 1.52), rel=1e-12)


def test_instability_without_diamagnetic_term():
    modes = (PhononMode('TO1', 1.0, 1.5),)
    with pytest.raises(InstabilityError) as info:
        hopfield.solve(1.0, modes, include_diamagnetic=False)
    assert info.value.omega_c == 1.0
    with pytest.raises(InstabilityError):
        hopfield.polariton_frequencies([1.0], modes, include_diamagnetic=False)
    # The diamagnetic term restores stability for the same coupling
    assert len(hopfield.solve(1.0, modes)) == 2


def test_fractions_reject_unnormalized_mode():
    mode = hopfield.PolaritonMode(omega=1.0, w=2.0, x=(0.0,), y=0.0, z=(0.0,),
                                  photon_fraction=4.0, phonon_fractions=(0.0,))
    with pytest.raises(ContractViolation):
        hopfield.fractions(mode)


def test_degenerate_block_puts_photon_in_first_vector():
    solutions = hopfield.solve(1.0, (PhononMode('TO1', 1.0, 0.0),))
    assert [m.omega for m in solutions] == pytest.approx([1.0, 1.0])
    assert solutions[0].photon_fraction == pytest.approx(1.0, abs=1e-12)
    assert solutions[1].photon_fraction == pytest.approx(0.0, abs=1e-12)
    assert solutions[1].phonon_fractions[0] == pytest.approx(1.0, abs=1e-12)


def test_identical_phonons_are_deterministic():
    modes = (PhononMode('TO1', 1.0, 0.5), PhononMode('TO1b', 1.0, 0.5))
    first = hopfield.solve(1.3, modes)
    second = hopfield.solve(1.3, modes)
    for a, b in zip(first, second):
        np.testing.assert_allclose(a.vector, b.vector, atol=1e-12)
    # The antisymmetric phonon combination stays dark at ω
    dark = [m for m in first if m.photon_fraction < 1e-10]
    assert len(dark) == 1
    assert dark[0].omega == pytest.approx(1.0, rel=1e-10)


def test_phase_convention_makes_photon_amplitude_real(tetragonal_modes):
    for mode in hopfield.solve(1.52, tetragonal_modes):
        assert mode.w.imag == 0.0
        assert mode.w.real >= 0.0


def test_dominant_component_at_large_cavity_frequency(tetragonal_modes):
    solutions = hopfield.solve(30.0, tetragonal_modes)
    labels = [m.label for m in tetragonal_modes]
    assert solutions[-1].dominant_component(labels) == 'photon'
    assert solutions[0].dominant_component(labels) == 'TO1'
    assert solutions[1].dominant_component(labels) == 'TO2'


def test_overlap_of_mode_with_itself(tetragonal_modes):
    solutions = hopfield.solve(1.52, tetragonal_modes)
    assert hopfield.overlap(solutions[1], solutions[1]) == pytest.approx(1.0, abs=1e-10)
    assert hopfield.overlap(solutions[0], solutions[2]) == pytest.approx(0.0, abs=1e-10)


def test_batched_frequencies_match_diagonalization(orthorhombic_modes):
    grid = [0.4, 0.83, 1.5, 2.9]
    batched = hopfield.polariton_frequencies(grid, orthorhombic_modes)
    for row, omega_c in zip(batched, grid):
        expected = [m.omega for m in hopfield.solve(omega_c, orthorhombic_modes)]
        np.testing.assert_allclose(row, expected, rtol=1e-10)


def test_stacked_matrices_match_single_builds(orthorhombic_modes):
    grid = [0.4, 1.52, 2.9]
    stack = hopfield.build_dynamical_matrices(grid, orthorhombic_modes)
    for entries, omega_c in zip(stack, grid):
        np.testing.assert_allclose(entries, hopfield.build_dynamical_matrix(omega_c, orthorhombic_modes).entries)


def test_branch_frequencies_over_a_batch_of_couplings(tetragonal_modes):
    omegas = [m.omega for m in tetragonal_modes]
    nus = np.array([[m.nu for m in tetragonal_modes], [0.3, 0.9], [0.0, 0.0]])
    grid = [0.5, 1.2, 2.4]
    found = hopfield.branch_frequencies(grid, omegas, nus)
    assert found.shape == (3, 3, 3)
    for row, nu in zip(found, nus):
        modes = [PhononMode(f"TO{k}", w, v) for k, (w, v) in enumerate(zip(omegas, nu))]
        np.testing.assert_allclose(row, hopfield.polariton_frequencies(grid, modes), rtol=1e-10)


def test_branch_frequencies_flag_unstable_rows():
    found = hopfield.branch_frequencies([1.0, 3.0], [1.0], [[1.5]], include_diamagnetic=False)
    assert np.all(np.isnan(found[0, 0]))
    assert np.all(np.isfinite(found[0, 1]))


@settings(max_examples=200, deadline=None)
@given(modes=mode_sets(), omega_c=cavity_frequencies)
def test_spectrum_is_real_and_paired(modes, omega_c):
    entries = hopfield.build_dynamical_matrix(omega_c, modes).entries
    values = np.linalg.eigvals(entries)
    scale = max([omega_c] + [m.omega for m in modes])
    assert np.max(np.abs(values.imag)) <= 1e-8 * scale
    real = np.sort(values.real)
    np.testing.assert_allclose(real, -real[::-1], atol=1e-9 * scale)


@settings(max_examples=200, deadline=None)
@given(modes=mode_sets(), omega_c=cavity_frequencies)
def test_modes_are_normalized(modes, omega_c):
    solutions = hopfield.solve(omega_c, modes)
    assert len(solutions) == len(modes) + 1
    for mode in solutions:
        assert mode.omega > 0
        assert abs(mode.norm - 1.0) < 1e-10
        photon, phonons = hopfield.fractions(mode)
        assert abs(photon + sum(phonons) - 1.0) < 1e-10
        assert -1e-10 <= photon <= 1 + 1e-10


@settings(max_examples=200, deadline=None)
@given(modes=mode_sets(), omega_c=cavity_frequencies)
def test_sum_and_product_rules(modes, omega_c):
    squares = np.array([m.omega for m in hopfield.solve(omega_c, modes)]) ** 2
    expected_sum = omega_c ** 2 + sum(m.omega ** 2 + m.nu ** 2 for m in modes)
    expected_product = omega_c ** 2 * np.prod([m.omega ** 2 for m in modes])
    assert squares.sum() == pytest.approx(expected_sum, rel=1e-9)
    assert np.prod(squares) == pytest.approx(expected_product, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(modes=mode_sets(), omega_c=cavity_frequencies)
def test_symmetric_form_agrees_with_dynamical_matrix(modes, omega_c):
    omegas = [m.omega for m in modes]
    nus = [m.nu for m in modes]
    found = hopfield.branch_frequencies([omega_c], omegas, nus)[0]
    np.testing.assert_allclose(found, hopfield.polariton_frequencies([omega_c], modes)[0], rtol=1e-9)


@settings(max_examples=100, deadline=None)
@given(modes=mode_sets(), omega_c=cavity_frequencies, scale=st.floats(0.2, 5.0))
def test_frequencies_scale_with_units(modes, omega_c, scale):
    scaled = tuple(PhononMode(m.label, m.omega * scale, m.nu * scale) for m in modes)
    base = hopfield.polariton_frequencies([omega_c], modes)[0]
    np.testing.assert_allclose(hopfield.polariton_frequencies([omega_c * scale], scaled)[0],
                               base * scale, rtol=1e-9)


@settings(max_examples=100, deadline=None)
@given(modes=mode_sets(), omega_c=cavity_frequencies)
def test_decoupling_recovers_bare_frequencies(modes, omega_c):
    bare = tuple(m.with_nu(0.0) for m in modes)
    found = hopfield.polariton_frequencies([omega_c], bare)[0]
    np.testing.assert_allclose(found, np.sort([omega_c] + [m.omega for m in modes]), rtol=1e-12)
