#pragma once

#include <functional>
#include <vector>

#include "forcerecon/spectral/field.hpp"
#include "forcerecon/spectral/transform.hpp"

namespace forcerecon {

enum class Part { low, high };

/// low keeps 0 < |k| <= N (Euclidean), high keeps the rest.
ScalarField project(const ScalarField& f, double N, Part part);
VectorField project(const VectorField& f, double N, Part part);
inline ScalarField low(const ScalarField& f, double N) { return project(f, N, Part::low); }
inline VectorField low(const VectorField& f, double N) { return project(f, N, Part::low); }
inline ScalarField high(const ScalarField& f, double N) { return project(f, N, Part::high); }
inline VectorField high(const VectorField& f, double N) { return project(f, N, Part::high); }

/// ((2 pi)^dim sum_k |k|^{2 alpha} |f_k|^2)^{1/2}
double seminorm(const ScalarField& f, double alpha);
double seminorm(const VectorField& f, double alpha);

/// Real L2 pairing (2 pi)^dim sum_k a_k conj(b_k).
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);

/// Applies a real Fourier multiplier m(k) mode by mode.
ScalarField apply_multiplier(const ScalarField& f, const std::function<double(std::size_t index)>& m);
VectorField apply_multiplier(const VectorField& f, const std::function<double(std::size_t index)>& m);

ScalarField laplacian(const ScalarField& f);
VectorField laplacian(const VectorField& f);
/// (-Delta)^{-1} on mean-free fields.
ScalarField inverse_negative_laplacian(const ScalarField& f);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
/// max_k |k . v_k| / max_k |k| |v_k|; zero for the zero field.
double relative_divergence(const VectorField& v);

/// Zeroes every mode with some |k_i| above the 2/3 cutoff.
ScalarField dealias(const ScalarField& f);
VectorField dealias(const VectorField& f);

/// v_k - k (k . v_k)/|k|^2
VectorField leray_project(const VectorField& v);

/// Dealiased velocity samples, reusable across products with a fixed velocity.
struct PhysicalVelocity {
    WaveGrid grid;
    std::vector<PhysicalField> components;
};
PhysicalVelocity to_physical_velocity(const VectorField& v);

/// Dealiased v . grad(phi): inputs and output restricted to the 2/3 box, so the product is
/// computed without aliasing and b(v, ., .) is exactly skew for divergence-free v.
ScalarField advect(const VectorField& v, const ScalarField& phi);
ScalarField advect(const PhysicalVelocity& v, const ScalarField& phi);
/// (u . grad) w, component by component.
VectorField advect(const VectorField& u, const VectorField& w);
VectorField advect(const PhysicalVelocity& u, const VectorField& w);

/// B(u, w) = Leray(u . grad w)
VectorField nse_bilinear(const VectorField& u, const VectorField& w);

/// b(u, phi, psi) = (u . grad phi, psi)
double trilinear_b(const VectorField& u, const ScalarField& phi, const ScalarField& psi);
double trilinear_b(const VectorField& u, const VectorField& v, const VectorField& w);

}  // namespace forcerecon
