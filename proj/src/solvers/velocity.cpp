#include "forcerecon/solvers/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace forcerecon {

namespace {

void require_solenoidal(const VectorField& v) {
    if (relative_divergence(v) > 1e-12) throw std::invalid_argument("advecting velocity is not divergence-free");
}

}  // namespace

VelocityProvider::VelocityProvider(const WaveGrid& grid) : grid_(grid) {}

VelocityProvider VelocityProvider::constant(VectorField v) {
    require_solenoidal(v);
    VelocityProvider p(v.grid());
    p.zero_ = v.is_zero();
    p.constant_ = std::make_shared<const VectorField>(std::move(v));
    return p;
}

VelocityProvider VelocityProvider::analytic(Function v, const WaveGrid& grid, double check_horizon) {
    VelocityProvider p(grid);
    for (int s = 0; s <= 4; ++s) {
        const VectorField sample = v(check_horizon * s / 4.0);
        require_same_grid(sample.grid(), grid);
        require_solenoidal(sample);
    }
    p.fn_ = std::move(v);
    p.zero_ = false;
    return p;
}

VelocityProvider::VelocityProvider(const VelocityProvider& o)
    : grid_(o.grid_), constant_(o.constant_), fn_(o.fn_), zero_(o.zero_) {}

VelocityProvider& VelocityProvider::operator=(const VelocityProvider& o) {
    if (this != &o) {
        grid_ = o.grid_;
        constant_ = o.constant_;
        fn_ = o.fn_;
        zero_ = o.zero_;
        cached_t_.reset();
        cached_.reset();
    }
    return *this;
}

VectorField VelocityProvider::field(double t) const {
    if (fn_) return fn_(t);
    if (constant_) return *constant_;
    return zero_like(VectorField(grid_));
}

const PhysicalVelocity& VelocityProvider::physical(double t) const {
    if (cached_ && (!fn_ || cached_t_ == t)) return *cached_;
    cached_ = std::make_shared<PhysicalVelocity>(to_physical_velocity(field(t)));
    cached_t_ = t;
    return *cached_;
}

double sup_norm(const PhysicalVelocity& v) {
    double best = 0.0;
    if (v.components.empty()) return 0.0;
    for (std::size_t i = 0; i < v.components[0].size(); ++i) {
        double s = 0.0;
        for (const auto& c : v.components) s += c[i] * c[i];
        best = std::max(best, s);
    }
    return std::sqrt(best);
}

VectorField taylor_green(const WaveGrid& grid, double amplitude) {
    if (grid.dim() != 2) throw std::invalid_argument("taylor_green is two-dimensional");
    VectorField v(grid);
    // sin x cos y = (1/4i)(e^{i(x+y)} + e^{i(x-y)} - c.c.); the second component is its mirror.
    const Complex q = amplitude * Complex(0.0, -0.25);
    v[0].set_mode({1, 1, 0}, q);
    v[0].set_mode({1, -1, 0}, q);
    v[1].set_mode({1, 1, 0}, -q);
    v[1].set_mode({-1, 1, 0}, -q);
    v.mark_divergence_free(true);
    return v;
}

}  // namespace forcerecon
