"""
Constants for the Hopfield polariton toolkit.

All frequencies are ordinary frequencies in THz, temperatures in K and lengths in µm.
"""

# Numerical tolerances
TOLERANCES = {
    'instability_rel': 1e-8,     # max |Im Ω| relative to the largest frequency
    'degeneracy_rel': 1e-9,      # eigenvalues closer than this (x scale) form a block
    'normalization': 1e-10,      # bosonic norm / fraction sum tolerance
    'fraction_slack': 1e-10,     # fractions may leave [0, 1] by this much
    'secular_xtol': 1e-12,       # bisection tolerance in u = Ω² (THz²)
    'pole_merge_rel': 1e-12,     # phonon poles closer than this are merged
    'phase_zero': 1e-12,         # |coefficient| below this counts as zero for phase fixing
}

# Cavity calibration ω_c = A / l^p, anchored on 60 µm <-> 1.52 THz
CAVITY_DEFAULTS = {
    'amplitude': 91.2,           # THz·µm
    'exponent': 1.0,
}

# Slot lengths of the measured samples (µm)
SAMPLE_SLOT_LENGTHS_UM = (30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 120.0, 160.0)

# MAPbI3 reference temperatures (K)
MAPBI3_TC_K = 162.5
TETRAGONAL_MEASUREMENT_K = 165.0
ORTHORHOMBIC_MEASUREMENT_K = 151.0

# Dispersion sweep defaults
DISPERSION_DEFAULTS = {
    'omega_c_min': 0.2,
    'omega_c_max': 3.2,
    'omega_c_step': 0.01,
    'overlap_threshold': 0.5,    # below this, connectivity falls back to frequency matching
}

# Fitting defaults
FIT_CONSTANTS = {
    'ratio_min': 0.05,           # coarse grid over ν/ω
    'ratio_max': 1.0,
    'grid_steps': 20,
    'max_coarse_points': 12,     # decimated point set for the coarse grid
    'tolerance': 1e-6,           # THz, residual change per sweep
    'min_step_rel': 1e-7,        # step size (relative to ω) below which refinement stops
    'max_iterations': 500,
    'coarse_batch': 4096,        # coarse-grid candidates per eigenvalue batch
    'nu_max_factor': 2.0,        # ν_max = factor x max ω_λ
    'ambiguity_gap': 0.02,       # THz; second-nearest branch closer than this flags a point
}

# Normalized couplings above this are in the ultrastrong regime
USC_THRESHOLD = 0.1

# Spectra defaults (no linewidths are reported for the samples)
SPECTRA_DEFAULTS = {
    'kappa': 0.1,                # cavity linewidth, THz
    'gamma': 0.05,               # phonon linewidth, THz
    'eps_inf': 5.0,
    'thickness_um': 0.2,         # 200 nm film
    'substrate_index': 2.1,      # quartz in the THz range
    'omega_min': 0.2,
    'omega_max': 3.2,
    'omega_step': 0.005,
    'min_prominence': 0.02,
    'thin_film_fraction': 0.1,   # thickness must stay below this fraction of λ_min
}

# Temperature scan defaults
SCAN_DEFAULTS = {
    't_min': 140.0,
    't_max': 180.0,
    't_step': 0.5,
}

# CLI exit codes
EXIT_CODES = {
    'ok': 0,
    'unexpected': 1,
    'invalid': 2,
    'numerical': 3,
}
