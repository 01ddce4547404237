#pragma once

// Internal unit system: length in Angstrom, energy in eV, time in fs,
// mass in g/mol, temperature in K. Derived conversion factors below.

namespace dpmd {

// Boltzmann constant, eV/K (CODATA exact).
constexpr double K_B = 8.617333262e-5;

// 1 (g/mol) * (A/fs)^2 in eV. 1e7 / (N_A * e) with exact SI constants.
constexpr double MVV_TO_EV = 1.0e7 / (6.02214076e23 * 1.602176634e-19);

// 1 (eV/A) / (g/mol) in A/fs^2. Acceleration conversion, inverse of the above.
constexpr double EVA_PER_MASS_TO_ACC = 1.0 / MVV_TO_EV;

// 1 eV/A^3 in bar.
constexpr double EVA3_TO_BAR = 1.602176634e6;

} // namespace dpmd
