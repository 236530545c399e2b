#include "forcerecon/spectral/mode_set.hpp"

#include <stdexcept>

namespace forcerecon {

ModeSet::ModeSet(WaveGrid grid, double N) : grid_(std::move(grid)), N_(N) {
    auto idx = std::make_shared<std::vector<std::size_t>>();
    const double cut = N * N * (1.0 + 1e-14);
    for (std::size_t i = 0; i < grid_.size(); ++i)
        if (grid_.k2(i) > 0.0 && grid_.k2(i) <= cut) idx->push_back(i);
    idx_ = std::move(idx);
}

std::vector<Complex> ModeSet::pack(const ScalarField& f) const {
    require_same_grid(grid_, f.grid());
    std::vector<Complex> out;
    out.reserve(size());
    for (auto i : *idx_) out.push_back(f[i]);
    return out;
}

std::vector<Complex> ModeSet::pack(const VectorField& f) const {
    require_same_grid(grid_, f.grid());
    std::vector<Complex> out;
    out.reserve(size() * static_cast<std::size_t>(f.dim()));
    for (int a = 0; a < f.dim(); ++a)
        for (auto i : *idx_) out.push_back(f[a][i]);
    return out;
}

ScalarField ModeSet::unpack_scalar(const std::vector<Complex>& values) const {
    if (values.size() != size()) throw std::invalid_argument("packed mode count mismatch");
    ScalarField f(grid_);
    auto dst = f.raw();
    for (std::size_t j = 0; j < size(); ++j) dst[(*idx_)[j]] = values[j];
    return f;
}

VectorField ModeSet::unpack_vector(const std::vector<Complex>& values) const {
    const int d = grid_.dim();
    if (values.size() != size() * static_cast<std::size_t>(d)) throw std::invalid_argument("packed mode count mismatch");
    VectorField v(grid_);
    for (int a = 0; a < d; ++a) {
        auto dst = v[a].raw();
        for (std::size_t j = 0; j < size(); ++j) dst[(*idx_)[j]] = values[static_cast<std::size_t>(a) * size() + j];
    }
    return v;
}

}  // namespace forcerecon
