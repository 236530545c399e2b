#include "forcerecon/spectral/operators.hpp"

#include <cmath>
#include <numbers>

#include "forcerecon/kernels/kernels.hpp"

namespace forcerecon {

namespace {

double volume(const WaveGrid& g) { return std::pow(2.0 * std::numbers::pi, g.dim()); }

template <class Pred>
ScalarField keep_if(const ScalarField& f, Pred keep) {
    ScalarField out(f.grid());
    auto dst = out.raw();
    const auto src = f.coeffs();
    for (std::size_t i = 0; i < src.size(); ++i)
        if (keep(i)) dst[i] = src[i];
    out.clear_mean();
    return out;
}

template <class Op>
VectorField per_component(const VectorField& v, Op op) {
    std::vector<ScalarField> comps;
    for (int a = 0; a < v.dim(); ++a) comps.push_back(op(v[a]));
    VectorField out(std::move(comps));
    out.mark_divergence_free(v.divergence_free_flag());
    return out;
}

std::vector<const ScalarField*> pointers(const std::vector<ScalarField>& fs) {
    std::vector<const ScalarField*> p;
    for (const auto& f : fs) p.push_back(&f);
    return p;
}

ScalarField derivative(const ScalarField& f, int axis) {
    ScalarField out(f.grid());
    auto dst = out.raw();
    const auto src = f.coeffs();
    const WaveGrid& g = f.grid();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = Complex(0.0, g.wavevector(i)[static_cast<std::size_t>(axis)]) * src[i];
    return out;
}

}  // namespace

ScalarField project(const ScalarField& f, double N, Part part) {
    const WaveGrid& g = f.grid();
    // Tolerate round-off in |k| so that N = |k| keeps k.
    const double cut = N * N * (1.0 + 1e-14);
    if (part == Part::low) return keep_if(f, [&](std::size_t i) { return g.k2(i) <= cut; });
    return keep_if(f, [&](std::size_t i) { return g.k2(i) > cut; });
}

VectorField project(const VectorField& f, double N, Part part) {
    return per_component(f, [&](const ScalarField& c) { return project(c, N, part); });
}

double seminorm(const ScalarField& f, double alpha) {
    const WaveGrid& g = f.grid();
    const auto c = f.coeffs();
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i == g.zero_index()) continue;
        const double w = alpha == 0.0 ? 1.0 : std::pow(g.k2(i), alpha);
        s += w * std::norm(c[i]);
    }
    return std::sqrt(volume(g) * s);
}

double seminorm(const VectorField& f, double alpha) {
    double s = 0.0;
    for (int a = 0; a < f.dim(); ++a) {
        const double n = seminorm(f[a], alpha);
        s += n * n;
    }
    return std::sqrt(s);
}

double inner(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid());
    const auto x = a.coeffs();
    const auto y = b.coeffs();
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] * std::conj(y[i])).real();
    return volume(a.grid()) * s;
}

double inner(const VectorField& a, const VectorField& b) {
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i) s += inner(a[i], b[i]);
    return s;
}

ScalarField apply_multiplier(const ScalarField& f, const std::function<double(std::size_t)>& m) {
    ScalarField out(f.grid());
    auto dst = out.raw();
    const auto src = f.coeffs();
    for (std::size_t i = 0; i < src.size(); ++i)
        if (src[i] != Complex(0.0, 0.0)) dst[i] = m(i) * src[i];
    out.clear_mean();
    return out;
}

VectorField apply_multiplier(const VectorField& f, const std::function<double(std::size_t)>& m) {
    return per_component(f, [&](const ScalarField& c) { return apply_multiplier(c, m); });
}

ScalarField laplacian(const ScalarField& f) {
    const WaveGrid& g = f.grid();
    return apply_multiplier(f, [&](std::size_t i) { return -g.k2(i); });
}

VectorField laplacian(const VectorField& f) {
    return per_component(f, [](const ScalarField& c) { return laplacian(c); });
}

ScalarField inverse_negative_laplacian(const ScalarField& f) {
    const WaveGrid& g = f.grid();
    return apply_multiplier(f, [&](std::size_t i) { return g.k2(i) > 0.0 ? 1.0 / g.k2(i) : 0.0; });
}

VectorField gradient(const ScalarField& f) {
    std::vector<ScalarField> comps;
    for (int a = 0; a < f.grid().dim(); ++a) comps.push_back(derivative(f, a));
    return VectorField(std::move(comps));
}

ScalarField divergence(const VectorField& v) {
    ScalarField out(v.grid());
    for (int a = 0; a < v.dim(); ++a) out += derivative(v[a], a);
    return out;
}

double relative_divergence(const VectorField& v) {
    const WaveGrid& g = v.grid();
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto k = g.wavevector(i);
        Complex dot = 0.0;
        double mag = 0.0;
        for (int a = 0; a < v.dim(); ++a) {
            dot += double(k[static_cast<std::size_t>(a)]) * v[a][i];
            mag += std::norm(v[a][i]);
        }
        num = std::max(num, std::abs(dot));
        den = std::max(den, g.knorm(i) * std::sqrt(mag));
    }
    return den > 0.0 ? num / den : 0.0;
}

ScalarField dealias(const ScalarField& f) {
    const WaveGrid& g = f.grid();
    return keep_if(f, [&](std::size_t i) { return g.in_dealias_box(i); });
}

VectorField dealias(const VectorField& f) {
    return per_component(f, [](const ScalarField& c) { return dealias(c); });
}

VectorField leray_project(const VectorField& v) {
    const WaveGrid& g = v.grid();
    const int d = v.dim();
    VectorField out = v;
    std::vector<std::span<Complex>> dst;
    for (int a = 0; a < d; ++a) dst.push_back(out[a].raw());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double k2 = g.k2(i);
        if (k2 == 0.0) continue;
        const auto k = g.wavevector(i);
        Complex dot = 0.0;
        for (int a = 0; a < d; ++a) dot += double(k[static_cast<std::size_t>(a)]) * v[a][i];
        if (dot == Complex(0.0, 0.0)) continue;
        for (int a = 0; a < d; ++a) dst[static_cast<std::size_t>(a)][i] -= double(k[static_cast<std::size_t>(a)]) * dot / k2;
    }
    out.mark_divergence_free(true);
    return out;
}

PhysicalVelocity to_physical_velocity(const VectorField& v) {
    std::vector<ScalarField> comps;
    for (int a = 0; a < v.dim(); ++a) comps.push_back(dealias(v[a]));
    return PhysicalVelocity{v.grid(), to_physical(pointers(comps))};
}

ScalarField advect(const PhysicalVelocity& v, const ScalarField& phi) {
    require_same_grid(v.grid, phi.grid());
    const WaveGrid& g = phi.grid();
    const ScalarField pc = dealias(phi);
    std::vector<ScalarField> grads;
    for (int a = 0; a < g.dim(); ++a) grads.push_back(derivative(pc, a));
    const auto pg = to_physical(pointers(grads));
    std::vector<const double*> va, ga;
    for (int a = 0; a < g.dim(); ++a) {
        va.push_back(v.components[static_cast<std::size_t>(a)].data());
        ga.push_back(pg[static_cast<std::size_t>(a)].data());
    }
    PhysicalField prod(g.physical_size());
    kernels::dot(kernels::active_backend(), va.data(), ga.data(), g.dim(), prod.size(), prod.data());
    return dealias(from_physical(g, prod));
}

ScalarField advect(const VectorField& v, const ScalarField& phi) {
    require_same_grid(v.grid(), phi.grid());
    return advect(to_physical_velocity(v), phi);
}

VectorField advect(const PhysicalVelocity& u, const VectorField& w) {
    require_same_grid(u.grid, w.grid());
    const WaveGrid& g = w.grid();
    const int d = g.dim();
    std::vector<ScalarField> grads;
    for (int b = 0; b < d; ++b) {
        const ScalarField wc = dealias(w[b]);
        for (int a = 0; a < d; ++a) grads.push_back(derivative(wc, a));
    }
    const auto pg = to_physical(pointers(grads));
    std::vector<PhysicalField> prods(static_cast<std::size_t>(d), PhysicalField(g.physical_size()));
    std::vector<const double*> ua;
    for (int a = 0; a < d; ++a) ua.push_back(u.components[static_cast<std::size_t>(a)].data());
    for (int b = 0; b < d; ++b) {
        std::vector<const double*> ga;
        for (int a = 0; a < d; ++a) ga.push_back(pg[static_cast<std::size_t>(b * d + a)].data());
        kernels::dot(kernels::active_backend(), ua.data(), ga.data(), d, g.physical_size(),
                     prods[static_cast<std::size_t>(b)].data());
    }
    std::vector<const PhysicalField*> pp;
    for (auto& p : prods) pp.push_back(&p);
    auto comps = from_physical(g, pp);
    for (auto& c : comps) c = dealias(c);
    return VectorField(std::move(comps));
}

VectorField advect(const VectorField& u, const VectorField& w) {
    require_same_grid(u.grid(), w.grid());
    return advect(to_physical_velocity(u), w);
}

VectorField nse_bilinear(const VectorField& u, const VectorField& w) { return leray_project(advect(u, w)); }

double trilinear_b(const VectorField& u, const ScalarField& phi, const ScalarField& psi) {
    return inner(advect(u, phi), psi);
}

double trilinear_b(const VectorField& u, const VectorField& v, const VectorField& w) {
    return inner(advect(u, v), w);
}

}  // namespace forcerecon
