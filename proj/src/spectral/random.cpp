#include "forcerecon/spectral/random.hpp"

#include <cmath>
#include <numbers>

#include "forcerecon/spectral/operators.hpp"

namespace forcerecon {

ScalarField random_scalar(const WaveGrid& grid, std::mt19937_64& rng, double decay, double cutoff) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ScalarField f(grid);
    const double cut2 = cutoff > 0.0 ? cutoff * cutoff * (1.0 + 1e-14) : 1e300;
    // Walk the upper half of the cube; set_mode fills the partner.
    for (std::size_t i = grid.zero_index() + 1; i < grid.size(); ++i) {
        const double amp = unit(rng);
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        if (grid.k2(i) > cut2) continue;
        f.set_mode_at(i, std::polar(amp * std::pow(grid.k2(i), -0.5 * decay), phase));
    }
    return f;
}

VectorField random_vector(const WaveGrid& grid, std::mt19937_64& rng, double decay, double cutoff) {
    std::vector<ScalarField> comps;
    for (int a = 0; a < grid.dim(); ++a) comps.push_back(random_scalar(grid, rng, decay, cutoff));
    return VectorField(std::move(comps));
}

VectorField random_solenoidal(const WaveGrid& grid, std::mt19937_64& rng, double decay, double cutoff) {
    return leray_project(random_vector(grid, rng, decay, cutoff));
}

}  // namespace forcerecon
