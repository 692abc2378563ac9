# Polariton model package: Hopfield diagonalization, dispersions, fitting and spectra
