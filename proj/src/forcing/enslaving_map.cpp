#include "forcerecon/forcing/enslaving_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "forcerecon/spectral/operators.hpp"

namespace forcerecon {

std::string to_string(MapKind k) {
    switch (k) {
        case MapKind::zero: return "zero";
        case MapKind::power_law_tail: return "power_law_tail";
        case MapKind::fourierwise: return "fourierwise";
        case MapKind::composed_rank_raised: return "composed_rank_raised";
    }
    return "unknown";
}

namespace {

double norm2(const Wavevector& k) { return double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2]; }

bool within(const Wavevector& k, double N) { return norm2(k) <= N * N * (1.0 + 1e-14); }

Wavevector negate(const Wavevector& k) { return {-k[0], -k[1], -k[2]}; }

bool upper_half(const Wavevector& k) {
    for (int v : k)
        if (v != 0) return v > 0;
    return false;
}

bool primitive(const Wavevector& k) {
    return std::gcd(std::gcd(std::abs(k[0]), std::abs(k[1])), std::abs(k[2])) == 1;
}

/// Nonzero primitive lattice vectors with |k| <= N in `dim` dimensions.
std::vector<Wavevector> primitive_low_modes(int dim, int N) {
    std::vector<Wavevector> out;
    const int z = dim == 3 ? N : 0;
    for (int a = -N; a <= N; ++a)
        for (int b = -N; b <= N; ++b)
            for (int c = -z; c <= z; ++c) {
                const Wavevector k{a, b, c};
                if (norm2(k) == 0.0 || !within(k, N) || !primitive(k)) continue;
                out.push_back(k);
            }
    return out;
}

}  // namespace

namespace detail {

class MapImpl {
public:
    virtual ~MapImpl() = default;
    virtual MapKind kind() const = 0;
    virtual ScalarField apply(const ScalarField& low, int rank) const = 0;
    virtual VectorField apply(const VectorField& low, int rank) const = 0;
    virtual std::optional<double> closed_form(MapOrder order, int rank) const = 0;
    virtual double truncation_loss(MapOrder, int, int) const { return 0.0; }
    virtual std::string describe() const = 0;
};

namespace {

class ZeroMap final : public MapImpl {
public:
    MapKind kind() const override { return MapKind::zero; }
    ScalarField apply(const ScalarField& low, int) const override { return ScalarField(low.grid()); }
    VectorField apply(const VectorField& low, int) const override { return zero_like(low); }
    std::optional<double> closed_form(MapOrder, int) const override { return 0.0; }
    std::string describe() const override { return "zero"; }
};

class PowerLawMap final : public MapImpl {
public:
    explicit PowerLawMap(PowerLawTail p) : p_(std::move(p)) {
        if (p_.dim != 2 && p_.dim != 3) throw std::invalid_argument("power-law tail dimension must be 2 or 3");
        if (p_.exponent <= 0.0) throw std::invalid_argument("power-law tail exponent must be positive");
        for (const auto& [k, w] : p_.overrides)
            if (!primitive(k)) throw std::invalid_argument("weight overrides must name primitive wavevectors");
    }

    const PowerLawTail& params() const { return p_; }
    MapKind kind() const override { return MapKind::power_law_tail; }

    double profile(int m) const {
        return p_.profile == PowerLawTail::Profile::power ? std::pow(double(m), -p_.exponent)
                                                          : std::exp(-p_.exponent * (m - 1));
    }

    double weight(const Wavevector& k) const {
        for (const auto& [q, w] : p_.overrides)
            if (q == k || q == negate(k)) return w;
        return p_.weight;
    }

    ScalarField apply(const ScalarField& low, int rank) const override {
        const WaveGrid& g = low.grid();
        if (g.dim() != p_.dim) throw std::invalid_argument("power-law tail built for a different dimension");
        ScalarField out(g);
        auto dst = out.raw();
        // Each primitive k feeds the modes m k with |m k| > rank; distinct (k, m) never collide.
        for (const auto& k : primitive_low_modes(g.dim(), rank)) {
            if (!g.contains(k)) continue;
            const Complex lk = low.mode(k);
            if (lk == Complex(0.0, 0.0)) continue;
            const double w = weight(k);
            for (int m = 2;; ++m) {
                const Wavevector q{m * k[0], m * k[1], m * k[2]};
                if (!g.contains(q)) break;
                if (within(q, rank)) continue;
                dst[g.index(q)] += w * profile(m) * lk;
            }
        }
        return out;
    }

    VectorField apply(const VectorField& low, int rank) const override {
        std::vector<ScalarField> c;
        for (int a = 0; a < low.dim(); ++a) c.push_back(apply(low[a], rank));
        VectorField out(std::move(c));
        out.mark_divergence_free(low.divergence_free_flag());
        return out;
    }

    // sqrt(sum_{m >= 2, |m k| > rank} profile(m)^2 |m k|^{2 beta}), optionally only while m k fits in the cube.
    double tail_norm(const Wavevector& k, double beta, int rank, int K) const {
        const double kn = std::sqrt(norm2(k));
        int kmax = std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
        double s = 0.0;
        int m = 2;
        while (m * kn <= rank * (1.0 + 1e-14)) ++m;
        const bool power = p_.profile == PowerLawTail::Profile::power;
        if (K > 0) {
            for (; m * kmax <= K; ++m) s += std::pow(profile(m), 2) * std::pow(m * kn, 2 * beta);
            return std::sqrt(s);
        }
        if (power) {
            const double p = 2 * p_.exponent - 2 * beta;
            if (p <= 1.0) return std::numeric_limits<double>::infinity();
            const int stop = m + 200000;
            for (; m < stop; ++m) s += std::pow(double(m), -p);
            // Midpoint-rule remainder of sum_{m >= stop} m^{-p}.
            s += std::pow(stop - 0.5, 1.0 - p) / (p - 1.0);
            return std::sqrt(s) * std::pow(kn, beta);
        }
        for (;; ++m) {
            const double term = std::pow(profile(m), 2) * std::pow(m * kn, 2 * beta);
            s += term;
            if (term < 1e-20 * s || m > 100000) break;
        }
        return std::sqrt(s);
    }

    std::optional<double> closed_form(MapOrder order, int rank) const override {
        double best = 0.0;
        for (const auto& k : primitive_low_modes(p_.dim, rank))
            best = std::max(best, std::abs(weight(k)) * tail_norm(k, order.beta, rank, 0) / std::pow(std::sqrt(norm2(k)), order.alpha));
        return best;
    }

    double truncation_loss(MapOrder order, int rank, int K) const override {
        double worst = 0.0;
        for (const auto& k : primitive_low_modes(p_.dim, rank)) {
            const double scale = std::abs(weight(k)) / std::pow(std::sqrt(norm2(k)), order.alpha);
            const double full = tail_norm(k, order.beta, rank, 0);
            const double kept = tail_norm(k, order.beta, rank, K);
            worst = std::max(worst, scale * std::sqrt(std::max(0.0, full * full - kept * kept)));
        }
        return worst;
    }

    std::string describe() const override {
        std::ostringstream s;
        s << "power_law_tail(" << (p_.profile == PowerLawTail::Profile::power ? "power" : "exponential")
          << ", s=" << p_.exponent << ", weight=" << p_.weight << ")";
        return s.str();
    }

private:
    PowerLawTail p_;
};

class FourierwiseMap final : public MapImpl {
public:
    FourierwiseMap(FourierwiseTable t, int rank) : t_(std::move(t)) {
        if (t_.dim != 2 && t_.dim != 3) throw std::invalid_argument("fourierwise table dimension must be 2 or 3");
        // Canonical form: every target in the upper half-lattice; the mirror is implied.
        for (auto& e : t_.linear) {
            if (!within(e.source, rank) || norm2(e.source) == 0.0)
                throw std::invalid_argument("fourierwise source must satisfy 0 < |k| <= rank");
            if (within(e.target, rank)) throw std::invalid_argument("fourierwise target must satisfy |k| > rank");
            if (!upper_half(e.target)) e = LinearEntry{negate(e.target), negate(e.source), std::conj(e.gain)};
        }
        for (auto& e : t_.custom) {
            if (within(e.target, rank)) throw std::invalid_argument("fourierwise target must satisfy |k| > rank");
            if (!e.value) throw std::invalid_argument("custom fourierwise entry needs a value function");
            if (e.lipschitz < 0.0) throw std::invalid_argument("custom fourierwise Lipschitz constant must be nonnegative");
            if (!upper_half(e.target)) {
                auto f = e.value;
                e.target = negate(e.target);
                e.value = [f](const ScalarField& l) { return std::conj(f(l)); };
            }
        }
    }

    const FourierwiseTable& table() const { return t_; }
    MapKind kind() const override { return MapKind::fourierwise; }

    ScalarField apply(const ScalarField& low, int) const override {
        const WaveGrid& g = low.grid();
        if (g.dim() != t_.dim) throw std::invalid_argument("fourierwise table built for a different dimension");
        ScalarField out(g);
        auto dst = out.raw();
        auto add = [&](const Wavevector& target, Complex v) {
            if (!g.contains(target)) return;
            const std::size_t i = g.index(target);
            dst[i] += v;
            dst[g.conjugate_index(i)] += std::conj(v);
        };
        for (const auto& e : t_.linear)
            if (g.contains(e.source)) add(e.target, e.gain * low.mode(e.source));
        for (const auto& e : t_.custom) add(e.target, e.value(low));
        return out;
    }

    VectorField apply(const VectorField& low, int rank) const override {
        std::vector<ScalarField> c;
        for (int a = 0; a < low.dim(); ++a) c.push_back(apply(low[a], rank));
        return leray_project(VectorField(std::move(c)));
    }

    std::optional<double> closed_form(MapOrder order, int) const override {
        const double vol = std::pow(2.0 * std::numbers::pi, t_.dim);
        struct Acc {
            std::map<Wavevector, std::pair<double, double>> pairs;  // canonical source -> (|gain on s|, |gain on -s|)
            double custom = 0.0;
        };
        std::map<Wavevector, Acc> per_target;
        for (const auto& e : t_.linear) {
            auto& acc = per_target[e.target];
            const bool up = upper_half(e.source);
            auto& slot = acc.pairs[up ? e.source : negate(e.source)];
            (up ? slot.first : slot.second) += std::abs(e.gain);
        }
        for (const auto& e : t_.custom) per_target[e.target].custom += e.lipschitz;
        double total = 0.0;
        for (const auto& [target, acc] : per_target) {
            double lin = 0.0;
            for (const auto& [src, g] : acc.pairs)
                lin += std::pow(g.first + g.second, 2) / (2.0 * vol * std::pow(norm2(src), order.alpha));
            const double L = std::sqrt(lin) + acc.custom;
            // Both the target and its mirror carry L.
            total += 2.0 * L * L * std::pow(norm2(target), order.beta);
        }
        return std::sqrt(vol * total);
    }

    std::string describe() const override {
        std::ostringstream s;
        s << "fourierwise(" << t_.linear.size() << " linear, " << t_.custom.size() << " custom entries)";
        return s.str();
    }

private:
    FourierwiseTable t_;
};

class RaisedMap final : public MapImpl {
public:
    explicit RaisedMap(EnslavingMap base) : base_(std::move(base)) {}
    const EnslavingMap& base() const { return base_; }
    MapKind kind() const override { return MapKind::composed_rank_raised; }

    ScalarField apply(const ScalarField& low, int rank) const override {
        return high(base_.evaluate(forcerecon::low(low, base_.rank())), rank);
    }
    VectorField apply(const VectorField& low, int rank) const override {
        return high(base_.evaluate(forcerecon::low(low, base_.rank())), rank);
    }
    std::optional<double> closed_form(MapOrder order, int) const override { return base_.analytic_lipschitz(order); }
    double truncation_loss(MapOrder order, int, int K) const override { return base_.truncation_loss(order, K); }
    std::string describe() const override {
        return "rank_raised(" + base_.describe() + ", from rank " + std::to_string(base_.rank()) + ")";
    }

private:
    EnslavingMap base_;
};

}  // namespace
}  // namespace detail

EnslavingMap::EnslavingMap(std::shared_ptr<const detail::MapImpl> impl, int rank, MapOrder order,
                           std::optional<double> declared)
    : impl_(std::move(impl)), rank_(rank), order_(order), declared_(declared) {
    if (rank_ < 1) throw std::invalid_argument("enslaving map rank must be at least 1");
}

EnslavingMap EnslavingMap::zero(int rank, MapOrder order) {
    return EnslavingMap(std::make_shared<detail::ZeroMap>(), rank, order, 0.0);
}

EnslavingMap EnslavingMap::power_law_tail(int rank, PowerLawTail params, MapOrder order) {
    auto impl = std::make_shared<detail::PowerLawMap>(std::move(params));
    const auto L = impl->closed_form(order, rank);
    return EnslavingMap(impl, rank, order, L);
}

EnslavingMap EnslavingMap::fourierwise(int rank, FourierwiseTable table, MapOrder order) {
    if (rank < 1) throw std::invalid_argument("enslaving map rank must be at least 1");
    auto impl = std::make_shared<detail::FourierwiseMap>(std::move(table), rank);
    const auto L = impl->closed_form(order, rank);
    return EnslavingMap(impl, rank, order, L);
}

MapKind EnslavingMap::kind() const { return impl_->kind(); }

std::string EnslavingMap::describe() const {
    std::ostringstream s;
    s << impl_->describe() << " rank=" << rank_ << " order=(" << order_.alpha << "," << order_.beta << ")";
    if (declared_) s << " lipschitz=" << *declared_;
    return s.str();
}

ScalarField EnslavingMap::evaluate(const ScalarField& low) const {
    require_low_support(low, rank_);
    return impl_->apply(low, rank_);
}

VectorField EnslavingMap::evaluate(const VectorField& low) const {
    require_low_support(low, rank_);
    return impl_->apply(low, rank_);
}

EnslavingMap EnslavingMap::raise_rank(int M) const {
    if (M < rank_) throw std::invalid_argument("cannot lower the rank of an enslaving map");
    if (M == rank_) return *this;
    return EnslavingMap(std::make_shared<detail::RaisedMap>(*this), M, order_, declared_);
}

EnslavingMap EnslavingMap::change_order(MapOrder o) const {
    if (o.beta > order_.beta) throw std::invalid_argument("change_order cannot raise the output order");
    if (!declared_) throw std::invalid_argument("change_order needs a declared Lipschitz constant");
    const double exponent = std::max(order_.alpha - o.alpha, 0.0) - (order_.beta - o.beta);
    return EnslavingMap(impl_, rank_, o, *declared_ * std::pow(double(rank_), exponent));
}

EnslavingMap EnslavingMap::with_order(MapOrder o) const {
    if (o == order_) return *this;
    if (auto L = impl_->closed_form(o, rank_)) return EnslavingMap(impl_, rank_, o, *L);
    return change_order(o);
}

std::optional<double> EnslavingMap::analytic_lipschitz(MapOrder order) const { return impl_->closed_form(order, rank_); }

double EnslavingMap::truncation_loss(MapOrder order, int K) const { return impl_->truncation_loss(order, rank_, K); }

const PowerLawTail* EnslavingMap::power_law_params() const {
    auto* p = dynamic_cast<const detail::PowerLawMap*>(impl_.get());
    return p ? &p->params() : nullptr;
}

const FourierwiseTable* EnslavingMap::fourierwise_table() const {
    auto* p = dynamic_cast<const detail::FourierwiseMap*>(impl_.get());
    return p ? &p->table() : nullptr;
}

const EnslavingMap* EnslavingMap::base_map() const {
    auto* p = dynamic_cast<const detail::RaisedMap*>(impl_.get());
    return p ? &p->base() : nullptr;
}

void require_low_support(const ScalarField& f, double N) {
    const WaveGrid& g = f.grid();
    const double cut = N * N * (1.0 + 1e-14);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.k2(i) > cut && f[i] != Complex(0.0, 0.0))
            throw SupportViolation("low-mode field has a nonzero coefficient beyond |k| = " + std::to_string(N));
}

void require_low_support(const VectorField& f, double N) {
    for (int a = 0; a < f.dim(); ++a) require_low_support(f[a], N);
}

ScalarField evaluate_force(const ScalarField& low, const EnslavingMap& map) { return low + map.evaluate(low); }

VectorField evaluate_force(const VectorField& low, const EnslavingMap& map) { return low + map.evaluate(low); }

LipschitzEstimate estimate_lipschitz(const EnslavingMap& map, MapOrder order, const WaveGrid& grid, int samples,
                                     double radius, std::uint64_t seed) {
    if (samples < 2) throw std::invalid_argument("estimate_lipschitz needs at least two samples");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int N = map.rank();
    auto random_low = [&]() {
        ScalarField f(grid);
        for (std::size_t i = grid.zero_index() + 1; i < grid.size(); ++i) {
            const double r = radius * std::sqrt(unit(rng));
            const double th = 2.0 * std::numbers::pi * unit(rng);
            if (grid.k2(i) <= N * N * (1.0 + 1e-14)) f.set_mode_at(i, std::polar(r, th));
        }
        return f;
    };
    LipschitzEstimate est;
    auto consider = [&](const ScalarField& a, const ScalarField& b) {
        const double den = seminorm(a - b, order.alpha);
        if (den == 0.0) return;
        const double num = seminorm(map.evaluate(a) - map.evaluate(b), order.beta);
        est.empirical = std::max(est.empirical, num / den);
        ++est.pairs_used;
    };
    for (int s = 0; s < samples; ++s) {
        const auto a = random_low();
        const auto b = random_low();
        consider(a, b);
    }
    // Single-mode probes against the origin (F(0) = 0 for every built-in kind).
    const ScalarField origin(grid);
    for (std::size_t i = grid.zero_index() + 1; i < grid.size(); ++i) {
        if (grid.k2(i) > N * N * (1.0 + 1e-14)) continue;
        ScalarField e(grid);
        e.set_mode_at(i, radius);
        consider(e, origin);
    }
    if (est.pairs_used == 0) throw std::invalid_argument("every sampled pair was degenerate");
    est.analytic = map.analytic_lipschitz(order);
    return est;
}

}  // namespace forcerecon
