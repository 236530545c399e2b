#pragma once

#include <array>
#include <functional>
#include <vector>

#include "forcerecon/spectral/field.hpp"

namespace forcerecon {

/// Samples on the uniform (2K+2)^dim grid x_j = 2*pi*j/(2K+2), row-major, last axis fastest.
using PhysicalField = std::vector<double>;

/// f(x) = sum_k c_k e^{i k.x}
PhysicalField to_physical(const ScalarField& f);
/// Transforms fields two at a time through one complex FFT each.
std::vector<PhysicalField> to_physical(const std::vector<const ScalarField*>& fields);

/// c_k = M^{-dim} sum_x f(x) e^{-i k.x} for |k_i| <= K; the mean and the Nyquist modes are dropped.
ScalarField from_physical(const WaveGrid& grid, const PhysicalField& f);
std::vector<ScalarField> from_physical(const WaveGrid& grid, const std::vector<const PhysicalField*>& fields);

std::array<double, 3> grid_point(const WaveGrid& grid, std::size_t linear_index);

/// Projects a function given pointwise onto the grid (mean removed).
ScalarField sample(const WaveGrid& grid, const std::function<double(const std::array<double, 3>&)>& f);
VectorField sample(const WaveGrid& grid, const std::function<std::array<double, 3>(const std::array<double, 3>&)>& f);

}  // namespace forcerecon
