#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "forcerecon/spectral/operators.hpp"

namespace forcerecon {

/// Advecting velocity for the transport-diffusion equation as a function of time.
/// Copies share the field data but keep their own sample cache, so each run owns one.
class VelocityProvider {
public:
    using Function = std::function<VectorField(double t)>;

    /// v = 0.
    explicit VelocityProvider(const WaveGrid& grid);
    static VelocityProvider constant(VectorField v);
    /// `v(t)` must be divergence-free; checked on a few sample times in [0, check_horizon].
    static VelocityProvider analytic(Function v, const WaveGrid& grid, double check_horizon = 1.0);

    const WaveGrid& grid() const { return grid_; }
    bool time_independent() const { return !fn_; }
    bool is_zero() const { return zero_; }

    VectorField field(double t) const;
    /// Dealiased physical samples, cached for the most recent time.
    const PhysicalVelocity& physical(double t) const;

    VelocityProvider(const VelocityProvider& o);
    VelocityProvider& operator=(const VelocityProvider& o);
    VelocityProvider(VelocityProvider&&) noexcept = default;
    VelocityProvider& operator=(VelocityProvider&&) noexcept = default;

private:
    WaveGrid grid_;
    std::shared_ptr<const VectorField> constant_;
    Function fn_;
    bool zero_ = true;
    mutable std::optional<double> cached_t_;
    mutable std::shared_ptr<PhysicalVelocity> cached_;
};

/// max over grid points of |v(x)|.
double sup_norm(const PhysicalVelocity& v);

/// Taylor-Green cell (A sin x cos y, -A cos x sin y) on a 2-D grid.
VectorField taylor_green(const WaveGrid& grid, double amplitude);

}  // namespace forcerecon
