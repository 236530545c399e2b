#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "forcerecon/spectral/wave_grid.hpp"

namespace forcerecon {

using Complex = std::complex<double>;

/// Real, mean-free scalar field stored as its Fourier coefficients over the full cube.
class ScalarField {
public:
    explicit ScalarField(WaveGrid grid);

    const WaveGrid& grid() const { return grid_; }
    std::size_t size() const { return c_.size(); }

    Complex operator[](std::size_t i) const { return c_[i]; }
    Complex mode(const Wavevector& k) const { return c_[grid_.index(k)]; }
    /// Sets k and its conjugate partner together; k = 0 is rejected.
    void set_mode(const Wavevector& k, Complex value);
    void set_mode_at(std::size_t index, Complex value);

    std::span<const Complex> coeffs() const { return c_; }
    /// Raw access for kernels; callers restore reality and zero mean themselves.
    std::span<Complex> raw() { return c_; }

    /// Averages each coefficient with the conjugate of its partner and clears the mean.
    void symmetrize();
    void clear_mean() { c_[grid_.zero_index()] = 0.0; }

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);
    /// this += a * x
    ScalarField& axpy(double a, const ScalarField& x);

    double max_abs() const;
    bool is_zero() const;

private:
    WaveGrid grid_;
    std::vector<Complex> c_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator-(ScalarField a);

/// Real, mean-free vector field with one scalar component per spatial axis.
class VectorField {
public:
    explicit VectorField(WaveGrid grid);
    explicit VectorField(std::vector<ScalarField> components);

    const WaveGrid& grid() const { return grid_; }
    int dim() const { return grid_.dim(); }

    const ScalarField& operator[](int a) const { return comp_[static_cast<std::size_t>(a)]; }
    ScalarField& operator[](int a) {
        solenoidal_ = false;
        return comp_[static_cast<std::size_t>(a)];
    }

    /// Set only by operations that guarantee zero divergence (Leray projection and linear
    /// combinations of flagged fields).
    bool divergence_free_flag() const { return solenoidal_; }
    void mark_divergence_free(bool flag) { solenoidal_ = flag; }

    VectorField& operator+=(const VectorField& o);
    VectorField& operator-=(const VectorField& o);
    VectorField& operator*=(double s);
    VectorField& axpy(double a, const VectorField& x);

    double max_abs() const;
    bool is_zero() const;

private:
    WaveGrid grid_;
    std::vector<ScalarField> comp_;
    bool solenoidal_ = false;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);
VectorField operator-(VectorField a);

/// Field-generic helpers used by templated solvers.
inline const WaveGrid& grid_of(const ScalarField& f) { return f.grid(); }
inline const WaveGrid& grid_of(const VectorField& f) { return f.grid(); }
inline ScalarField zero_like(const ScalarField& f) { return ScalarField(f.grid()); }
inline VectorField zero_like(const VectorField& f) {
    VectorField z(f.grid());
    z.mark_divergence_free(true);
    return z;
}

}  // namespace forcerecon
