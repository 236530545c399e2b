#pragma once

#include <cstdint>
#include <random>

#include "forcerecon/spectral/field.hpp"

namespace forcerecon {

/// Coefficients with independent uniform phases and amplitudes |k|^{-decay} * U(0, 1),
/// restricted to 0 < |k| <= cutoff (cutoff <= 0 means every mode).
ScalarField random_scalar(const WaveGrid& grid, std::mt19937_64& rng, double decay = 1.0, double cutoff = 0.0);
VectorField random_vector(const WaveGrid& grid, std::mt19937_64& rng, double decay = 1.0, double cutoff = 0.0);
/// Leray-projected random_vector.
VectorField random_solenoidal(const WaveGrid& grid, std::mt19937_64& rng, double decay = 1.0, double cutoff = 0.0);

}  // namespace forcerecon
