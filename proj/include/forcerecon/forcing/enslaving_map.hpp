#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "forcerecon/spectral/field.hpp"

namespace forcerecon {

/// Lipschitz order: F is Lipschitz from the alpha-seminorm of its input to the beta-seminorm
/// of its output.
struct MapOrder {
    double alpha = 0.0;
    double beta = 0.0;
    bool operator==(const MapOrder&) const = default;
};

inline constexpr MapOrder kWeakOrder{-1.0, -1.0};
inline constexpr MapOrder kStrongOrder{0.0, 0.0};

enum class MapKind { zero, power_law_tail, fourierwise, composed_rank_raised };
std::string to_string(MapKind k);

struct PowerLawTail {
    enum class Profile { power, exponential };
    /// power: m^{-s}; exponential: e^{-s (m - 1)}.
    Profile profile = Profile::power;
    double exponent = 2.0;
    /// Weight of a primitive low mode without an override; k and -k share a weight.
    double weight = 1.0;
    std::vector<std::pair<Wavevector, double>> overrides;
    /// Lattice dimension the closed-form constant is taken over; must match evaluation grids.
    int dim = 2;
};

/// F(l)_target = gain * l_source, mirrored onto (-target, -source) with the conjugate gain.
struct LinearEntry {
    Wavevector target;
    Wavevector source;
    Complex gain;
};

/// F(l)_target = value(l), mirrored by conjugation; `lipschitz` bounds |value(a) - value(b)|
/// by lipschitz * seminorm(a - b, alpha) for the map's input order alpha, and value(0) = 0.
struct CustomEntry {
    Wavevector target;
    std::function<Complex(const ScalarField&)> value;
    double lipschitz = 0.0;
};

struct FourierwiseTable {
    std::vector<LinearEntry> linear;
    std::vector<CustomEntry> custom;
    int dim = 2;
};

class SupportViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {
class MapImpl;
}

/// Enslaving map from the modes |k| <= rank to the modes |k| > rank. Immutable value type;
/// copies share the implementation.
class EnslavingMap {
public:
    static EnslavingMap zero(int rank, MapOrder order = kWeakOrder);
    static EnslavingMap power_law_tail(int rank, PowerLawTail params, MapOrder order = kWeakOrder);
    static EnslavingMap fourierwise(int rank, FourierwiseTable table, MapOrder order = kWeakOrder);

    int rank() const { return rank_; }
    MapOrder order() const { return order_; }
    MapKind kind() const;
    std::optional<double> declared_lipschitz() const { return declared_; }
    std::string describe() const;

    /// Output is supported in |k| > rank; throws SupportViolation if the input is not supported in |k| <= rank.
    ScalarField evaluate(const ScalarField& low) const;
    /// Vector inputs map component by component (fourierwise output is Leray-projected).
    VectorField evaluate(const VectorField& low) const;

    /// F_M = Q_M o F o P_N; declared constant copied.
    EnslavingMap raise_rank(int M) const;
    /// Same map, declared constant rescaled by N^{(alpha - a~)_+ - (beta - b~)}.
    EnslavingMap change_order(MapOrder new_order) const;
    /// Uses the closed-form constant in the new order when one exists, else change_order.
    EnslavingMap with_order(MapOrder new_order) const;

    /// Closed-form Lipschitz bound in `order` (exact for power-law tails, the summed per-mode
    /// bound for fourierwise maps), if the kind has one.
    std::optional<double> analytic_lipschitz(MapOrder order) const;
    /// Part of the closed-form constant carried by modes a grid with cutoff K cannot hold.
    double truncation_loss(MapOrder order, int K) const;

    const PowerLawTail* power_law_params() const;
    const FourierwiseTable* fourierwise_table() const;
    /// For rank-raised maps: the map they were raised from.
    const EnslavingMap* base_map() const;

private:
    EnslavingMap(std::shared_ptr<const detail::MapImpl> impl, int rank, MapOrder order, std::optional<double> declared);

    std::shared_ptr<const detail::MapImpl> impl_;
    int rank_;
    MapOrder order_;
    std::optional<double> declared_;
};

/// l + F(l); the low part of the result equals l exactly.
ScalarField evaluate_force(const ScalarField& low, const EnslavingMap& map);
VectorField evaluate_force(const VectorField& low, const EnslavingMap& map);

/// Throws SupportViolation when f has a nonzero coefficient with |k| > N.
void require_low_support(const ScalarField& f, double N);
void require_low_support(const VectorField& f, double N);

struct LipschitzEstimate {
    double empirical = 0.0;
    std::optional<double> analytic;
    int pairs_used = 0;
};

/// Largest observed ratio seminorm(F(a) - F(b), beta) / seminorm(a - b, alpha) over random
/// pairs of radius `radius` plus single-mode probes; a lower bound on the true constant.
LipschitzEstimate estimate_lipschitz(const EnslavingMap& map, MapOrder order, const WaveGrid& grid, int samples,
                                     double radius, std::uint64_t seed);

}  // namespace forcerecon
