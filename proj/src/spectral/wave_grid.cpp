#include "forcerecon/spectral/wave_grid.hpp"

#include <cmath>
#include <string>

namespace forcerecon {

WaveGrid::WaveGrid(int dim, int max_wavenumber) : dim_(dim), K_(max_wavenumber) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("grid dimension must be 2 or 3, got " + std::to_string(dim));
    if (max_wavenumber < 1) throw std::invalid_argument("max wavenumber must be at least 1");
    const std::size_t s = static_cast<std::size_t>(side());
    size_ = dim == 2 ? s * s : s * s * s;

    auto t = std::make_shared<Table>();
    t->k.resize(size_);
    t->k2.resize(size_);
    t->knorm.resize(size_);
    t->dealiased.resize(size_);
    t->buffer.resize(size_);
    const int m = points();
    const int c = dealias_cutoff();
    for (std::size_t i = 0; i < size_; ++i) {
        Wavevector k{0, 0, 0};
        std::size_t rem = i;
        for (int a = dim - 1; a >= 0; --a) {
            k[a] = static_cast<int>(rem % s) - K_;
            rem /= s;
        }
        double k2 = 0.0;
        bool inside = true;
        for (int a = 0; a < dim; ++a) {
            k2 += double(k[a]) * k[a];
            inside = inside && std::abs(k[a]) <= c;
        }
        t->k[i] = k;
        t->k2[i] = k2;
        t->knorm[i] = std::sqrt(k2);
        t->dealiased[i] = inside ? 1 : 0;
        std::size_t b = 0;
        for (int a = 0; a < dim; ++a) b = b * static_cast<std::size_t>(m) + static_cast<std::size_t>((k[a] + m) % m);
        t->buffer[i] = b;
    }
    table_ = std::move(t);
}

std::size_t WaveGrid::physical_size() const {
    const std::size_t m = static_cast<std::size_t>(points());
    return dim_ == 2 ? m * m : m * m * m;
}

bool WaveGrid::contains(const Wavevector& k) const {
    for (int a = 0; a < dim_; ++a)
        if (k[a] < -K_ || k[a] > K_) return false;
    for (int a = dim_; a < 3; ++a)
        if (k[a] != 0) return false;
    return true;
}

std::size_t WaveGrid::index(const Wavevector& k) const {
    if (!contains(k)) throw std::out_of_range("wavevector outside the grid");
    const std::size_t s = static_cast<std::size_t>(side());
    std::size_t idx = 0;
    for (int a = 0; a < dim_; ++a) idx = idx * s + static_cast<std::size_t>(k[a] + K_);
    return idx;
}

}  // namespace forcerecon
