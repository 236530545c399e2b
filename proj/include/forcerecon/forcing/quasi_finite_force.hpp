#pragma once

#include <functional>
#include <optional>
#include <stdexcept>

#include "forcerecon/forcing/enslaving_map.hpp"
#include "forcerecon/spectral/operators.hpp"

namespace forcerecon {

/// A force whose high modes are slaved to its low modes: full = low + F(low).
/// The low part is either fixed or given as a function of time.
template <class Field>
class QuasiFiniteForce {
public:
    using Trajectory = std::function<Field(double)>;

    QuasiFiniteForce(Field low, EnslavingMap map) : low_(std::move(low)), map_(std::move(map)) {
        require_low_support(low_, map_.rank());
    }
    QuasiFiniteForce(Trajectory low_of_t, Field shape, EnslavingMap map)
        : low_(std::move(shape)), trajectory_(std::move(low_of_t)), map_(std::move(map)) {}

    const EnslavingMap& map() const { return map_; }
    bool time_dependent() const { return static_cast<bool>(trajectory_); }

    Field low(double t = 0.0) const {
        if (!trajectory_) return low_;
        Field l = trajectory_(t);
        require_low_support(l, map_.rank());
        return l;
    }
    Field full(double t = 0.0) const { return evaluate_force(low(t), map_); }

private:
    Field low_;
    Trajectory trajectory_;
    EnslavingMap map_;
};

using ScalarForce = QuasiFiniteForce<ScalarField>;
using VectorForce = QuasiFiniteForce<VectorField>;

}  // namespace forcerecon
