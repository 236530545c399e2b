#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace forcerecon {

/// Least-squares line log(y) = intercept + rate * x. `residual` is 1 - R^2 of that line
/// (0 for an exact exponential); `floor_hit` marks fits cut short at the roundoff floor.
struct FitResult {
    double rate = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    std::size_t used = 0;
    bool floor_hit = false;
};

class FitError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Samples below floor_factor * machine epsilon * (first value in the window), or nonpositive,
/// end the fit: only the prefix before the first such sample is used.
inline constexpr double kFloorFactor = 1e2;

/// Fits over the samples with window.first <= x <= window.second (all samples when empty).
/// Throws FitError when fewer than `min_samples` usable samples remain.
FitResult fit_decay_rate(const std::vector<double>& x, const std::vector<double>& y,
                         std::optional<std::pair<double, double>> window = {}, std::size_t min_samples = 8);

/// Per-stage geometric fit: x is the stage index, and exp(rate) is the per-stage ratio.
inline double geometric_ratio(const FitResult& f) { return std::exp(f.rate); }

}  // namespace forcerecon
