#include "forcerecon/spectral/transform.hpp"

#include <cmath>
#include <numbers>

#include "forcerecon/kernels/kernels.hpp"

namespace forcerecon {

namespace {

using kernels::active_backend;

void inverse_pair(const ScalarField& a, const ScalarField* b, PhysicalField& pa, PhysicalField* pb) {
    const WaveGrid& g = a.grid();
    if (b) require_same_grid(g, b->grid());
    const auto backend = active_backend();
    std::vector<Complex> buf(g.physical_size());
    kernels::scatter(backend, a.coeffs().data(), b ? b->coeffs().data() : nullptr, g.buffer_map(), g.size(), buf.data(),
                     buf.size());
    kernels::fft(backend, buf.data(), g.dim(), g.points(), +1);
    pa.resize(buf.size());
    if (pb) pb->resize(buf.size());
    kernels::split(backend, buf.data(), buf.size(), pa.data(), pb ? pb->data() : nullptr);
}

void forward_pair(const WaveGrid& g, const PhysicalField& pa, const PhysicalField* pb, ScalarField& a, ScalarField* b) {
    const auto backend = active_backend();
    std::vector<Complex> buf(g.physical_size());
    if (pa.size() != buf.size() || (pb && pb->size() != buf.size()))
        throw std::invalid_argument("physical field size does not match the grid");
    kernels::pack(backend, pa.data(), pb ? pb->data() : nullptr, buf.size(), buf.data());
    kernels::fft(backend, buf.data(), g.dim(), g.points(), -1);
    const double scale = 1.0 / static_cast<double>(buf.size());
    kernels::gather(backend, buf.data(), g.buffer_map(), g.size(), scale, a.raw().data(), b ? b->raw().data() : nullptr);
    a.clear_mean();
    if (b) b->clear_mean();
}

}  // namespace

PhysicalField to_physical(const ScalarField& f) {
    PhysicalField p;
    inverse_pair(f, nullptr, p, nullptr);
    return p;
}

std::vector<PhysicalField> to_physical(const std::vector<const ScalarField*>& fields) {
    std::vector<PhysicalField> out(fields.size());
    for (std::size_t i = 0; i < fields.size(); i += 2) {
        if (i + 1 < fields.size())
            inverse_pair(*fields[i], fields[i + 1], out[i], &out[i + 1]);
        else
            inverse_pair(*fields[i], nullptr, out[i], nullptr);
    }
    return out;
}

ScalarField from_physical(const WaveGrid& grid, const PhysicalField& f) {
    ScalarField a(grid);
    forward_pair(grid, f, nullptr, a, nullptr);
    return a;
}

std::vector<ScalarField> from_physical(const WaveGrid& grid, const std::vector<const PhysicalField*>& fields) {
    std::vector<ScalarField> out(fields.size(), ScalarField(grid));
    for (std::size_t i = 0; i < fields.size(); i += 2) {
        if (i + 1 < fields.size())
            forward_pair(grid, *fields[i], fields[i + 1], out[i], &out[i + 1]);
        else
            forward_pair(grid, *fields[i], nullptr, out[i], nullptr);
    }
    return out;
}

std::array<double, 3> grid_point(const WaveGrid& grid, std::size_t linear_index) {
    const std::size_t m = static_cast<std::size_t>(grid.points());
    const double h = 2.0 * std::numbers::pi / static_cast<double>(m);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = grid.dim() - 1; a >= 0; --a) {
        x[static_cast<std::size_t>(a)] = h * static_cast<double>(linear_index % m);
        linear_index /= m;
    }
    return x;
}

ScalarField sample(const WaveGrid& grid, const std::function<double(const std::array<double, 3>&)>& f) {
    PhysicalField p(grid.physical_size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = f(grid_point(grid, i));
    return from_physical(grid, p);
}

VectorField sample(const WaveGrid& grid, const std::function<std::array<double, 3>(const std::array<double, 3>&)>& f) {
    const int d = grid.dim();
    std::vector<PhysicalField> p(static_cast<std::size_t>(d), PhysicalField(grid.physical_size()));
    for (std::size_t i = 0; i < grid.physical_size(); ++i) {
        const auto v = f(grid_point(grid, i));
        for (int a = 0; a < d; ++a) p[static_cast<std::size_t>(a)][i] = v[static_cast<std::size_t>(a)];
    }
    std::vector<const PhysicalField*> ptrs;
    for (auto& q : p) ptrs.push_back(&q);
    return VectorField(from_physical(grid, ptrs));
}

}  // namespace forcerecon
