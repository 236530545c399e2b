#pragma once

#include <memory>
#include <vector>

#include "forcerecon/spectral/field.hpp"

namespace forcerecon {

/// The modes 0 < |k| <= N of a grid; packs low-mode fields densely for long time series.
class ModeSet {
public:
    ModeSet(WaveGrid grid, double N);

    const WaveGrid& grid() const { return grid_; }
    double cutoff() const { return N_; }
    std::size_t size() const { return idx_->size(); }
    const std::vector<std::size_t>& indices() const { return *idx_; }

    std::vector<Complex> pack(const ScalarField& f) const;
    std::vector<Complex> pack(const VectorField& f) const;
    ScalarField unpack_scalar(const std::vector<Complex>& values) const;
    VectorField unpack_vector(const std::vector<Complex>& values) const;

    template <class Field>
    Field unpack(const std::vector<Complex>& values) const;

private:
    WaveGrid grid_;
    double N_;
    std::shared_ptr<const std::vector<std::size_t>> idx_;
};

template <>
inline ScalarField ModeSet::unpack<ScalarField>(const std::vector<Complex>& v) const { return unpack_scalar(v); }
template <>
inline VectorField ModeSet::unpack<VectorField>(const std::vector<Complex>& v) const { return unpack_vector(v); }

}  // namespace forcerecon
