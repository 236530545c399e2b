#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

namespace forcerecon {

using Wavevector = std::array<int, 3>;

/// Fourier lattice |k_i| <= K on the torus [0, 2*pi]^dim, coefficients stored row-major
/// over the full cube with the last axis fastest.
class WaveGrid {
public:
    WaveGrid(int dim, int max_wavenumber);

    int dim() const { return dim_; }
    int max_wavenumber() const { return K_; }
    int dealias_cutoff() const { return (2 * K_) / 3; }
    int side() const { return 2 * K_ + 1; }
    std::size_t size() const { return size_; }

    /// Physical samples per axis (one more than the coefficient side; the Nyquist mode is unused).
    int points() const { return 2 * K_ + 2; }
    std::size_t physical_size() const;

    Wavevector wavevector(std::size_t index) const { return (*table_).k[index]; }
    double k2(std::size_t index) const { return (*table_).k2[index]; }
    double knorm(std::size_t index) const { return (*table_).knorm[index]; }
    bool in_dealias_box(std::size_t index) const { return (*table_).dealiased[index] != 0; }
    /// Position of coefficient `index` in the (2K+2)^dim transform buffer (negative k wrap around).
    std::size_t buffer_index(std::size_t index) const { return (*table_).buffer[index]; }
    const std::size_t* buffer_map() const { return (*table_).buffer.data(); }
    std::size_t index(const Wavevector& k) const;
    bool contains(const Wavevector& k) const;
    std::size_t zero_index() const { return size_ / 2; }
    std::size_t conjugate_index(std::size_t index) const { return size_ - 1 - index; }

    bool operator==(const WaveGrid& o) const { return dim_ == o.dim_ && K_ == o.K_; }
    bool operator!=(const WaveGrid& o) const { return !(*this == o); }

private:
    struct Table {
        std::vector<Wavevector> k;
        std::vector<double> k2;
        std::vector<double> knorm;
        std::vector<char> dealiased;
        std::vector<std::size_t> buffer;
    };
    int dim_;
    int K_;
    std::size_t size_;
    std::shared_ptr<const Table> table_;
};

class GridMismatch : public std::invalid_argument {
public:
    GridMismatch() : std::invalid_argument("fields live on different wave grids") {}
};

inline void require_same_grid(const WaveGrid& a, const WaveGrid& b) {
    if (a != b) throw GridMismatch();
}

}  // namespace forcerecon
