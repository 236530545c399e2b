#include "forcerecon/solvers/lawson.hpp"

#include <cmath>

namespace forcerecon {

DiagonalOperator::DiagonalOperator(const WaveGrid& grid, const std::function<double(double)>& rate)
    : grid_(grid), rate_(grid.size()), cache_(std::make_shared<Cache>()) {
    for (std::size_t i = 0; i < grid.size(); ++i) rate_[i] = rate(grid.k2(i));
}

const std::vector<double>& DiagonalOperator::factors(double tau) const {
    std::lock_guard lock(cache_->m);
    auto it = cache_->by_tau.find(tau);
    if (it != cache_->by_tau.end()) return it->second;
    std::vector<double> e(rate_.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::exp(tau * rate_[i]);
    // std::map nodes are stable, so the reference survives later insertions.
    return cache_->by_tau.emplace(tau, std::move(e)).first->second;
}

ScalarField DiagonalOperator::apply(const ScalarField& f) const {
    require_same_grid(f.grid(), grid_);
    ScalarField out = f;
    auto c = out.raw();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= rate_[i];
    return out;
}

VectorField DiagonalOperator::apply(const VectorField& f) const {
    std::vector<ScalarField> c;
    for (int a = 0; a < f.dim(); ++a) c.push_back(apply(f[a]));
    VectorField out(std::move(c));
    out.mark_divergence_free(f.divergence_free_flag());
    return out;
}

ScalarField DiagonalOperator::exp(const ScalarField& f, double tau) const {
    require_same_grid(f.grid(), grid_);
    const auto& e = factors(tau);
    ScalarField out = f;
    auto c = out.raw();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= e[i];
    return out;
}

VectorField DiagonalOperator::exp(const VectorField& f, double tau) const {
    std::vector<ScalarField> c;
    for (int a = 0; a < f.dim(); ++a) c.push_back(exp(f[a], tau));
    VectorField out(std::move(c));
    out.mark_divergence_free(f.divergence_free_flag());
    return out;
}

void check_finite(const ScalarField& f, double t, const char* what) {
    for (const Complex& c : f.coeffs()) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw IntegrationError(std::string(what) + ": non-finite coefficient", t);
        if (std::abs(c) > kBlowUpThreshold) throw IntegrationError(std::string(what) + ": state blew up", t);
    }
}

void check_finite(const VectorField& f, double t, const char* what) {
    for (int a = 0; a < f.dim(); ++a) check_finite(f[a], t, what);
}

}  // namespace forcerecon
