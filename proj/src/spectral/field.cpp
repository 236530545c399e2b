#include "forcerecon/spectral/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace forcerecon {

ScalarField::ScalarField(WaveGrid grid) : grid_(std::move(grid)), c_(grid_.size(), Complex(0.0, 0.0)) {}

void ScalarField::set_mode(const Wavevector& k, Complex value) { set_mode_at(grid_.index(k), value); }

void ScalarField::set_mode_at(std::size_t i, Complex value) {
    if (i == grid_.zero_index()) throw std::invalid_argument("the mean mode of a mean-free field cannot be set");
    c_[i] = value;
    c_[grid_.conjugate_index(i)] = std::conj(value);
}

void ScalarField::symmetrize() {
    const std::size_t n = c_.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = n - 1 - i;
        const Complex avg = 0.5 * (c_[i] + std::conj(c_[j]));
        c_[i] = avg;
        c_[j] = std::conj(avg);
    }
    clear_mean();
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
}

ScalarField& ScalarField::axpy(double a, const ScalarField& x) {
    require_same_grid(grid_, x.grid_);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += a * x.c_[i];
    return *this;
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (const auto& v : c_) m = std::max(m, std::abs(v));
    return m;
}

bool ScalarField::is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](const Complex& v) { return v == Complex(0.0, 0.0); });
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator-(ScalarField a) { return a *= -1.0; }

VectorField::VectorField(WaveGrid grid) : grid_(grid) {
    comp_.reserve(static_cast<std::size_t>(grid.dim()));
    for (int a = 0; a < grid.dim(); ++a) comp_.emplace_back(grid);
}

VectorField::VectorField(std::vector<ScalarField> components) : grid_(components.at(0).grid()), comp_(std::move(components)) {
    if (static_cast<int>(comp_.size()) != grid_.dim())
        throw std::invalid_argument("vector field needs one component per axis");
    for (const auto& c : comp_) require_same_grid(grid_, c.grid());
}

VectorField& VectorField::operator+=(const VectorField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t a = 0; a < comp_.size(); ++a) comp_[a] += o.comp_[a];
    solenoidal_ = solenoidal_ && o.solenoidal_;
    return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t a = 0; a < comp_.size(); ++a) comp_[a] -= o.comp_[a];
    solenoidal_ = solenoidal_ && o.solenoidal_;
    return *this;
}

VectorField& VectorField::operator*=(double s) {
    for (auto& c : comp_) c *= s;
    return *this;
}

VectorField& VectorField::axpy(double a, const VectorField& x) {
    require_same_grid(grid_, x.grid_);
    for (std::size_t i = 0; i < comp_.size(); ++i) comp_[i].axpy(a, x.comp_[i]);
    solenoidal_ = solenoidal_ && x.solenoidal_;
    return *this;
}

double VectorField::max_abs() const {
    double m = 0.0;
    for (const auto& c : comp_) m = std::max(m, c.max_abs());
    return m;
}

bool VectorField::is_zero() const {
    return std::all_of(comp_.begin(), comp_.end(), [](const ScalarField& c) { return c.is_zero(); });
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }
VectorField operator-(VectorField a) { return a *= -1.0; }

}  // namespace forcerecon
