#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "forcerecon/solvers/systems.hpp"
#include "forcerecon/spectral/mode_set.hpp"

namespace forcerecon {

class ObservationGap : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// P_N of a truth run on a uniform time grid t0 + n dt, optionally with the exact time
/// derivative (from the truth right-hand side) and the values at the intermediate RK stages,
/// which is what lets an assimilator step in lockstep with the truth. Low modes are stored packed.
template <class Field>
class ObservationStream {
public:
    ObservationStream(ModeSet modes, double t0, double dt) : modes_(std::move(modes)), t0_(t0), dt_(dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("observation spacing must be positive");
    }

    const ModeSet& modes() const { return modes_; }
    int rank() const { return static_cast<int>(modes_.cutoff()); }
    const WaveGrid& grid() const { return modes_.grid(); }
    double t0() const { return t0_; }
    double dt() const { return dt_; }
    std::size_t samples() const { return count_; }
    double time(std::size_t n) const { return t0_ + static_cast<double>(n) * dt_; }
    bool has_rhs() const { return count_ > 0 && rhs_.size() == low_.size(); }
    /// True when every step has its three intermediate stage values.
    bool has_stages() const { return count_ > 0 && stage_.size() == 3 * (count_ - 1) * width(); }

    void reserve(std::size_t steps) {
        low_.reserve((steps + 1) * width());
        rhs_.reserve((steps + 1) * width());
        stage_.reserve(3 * steps * width());
        stage_rhs_.reserve(3 * steps * width());
    }

    /// Appends the next grid sample; `rhs` (exact d/dt P_N state) must be given for all or none.
    void push_sample(const Field& low, const Field* rhs) {
        append(low_, low);
        if (rhs) append(rhs_, *rhs);
        ++count_;
    }
    /// Stage value of the step that starts at the latest sample; slots 1, 2, 3 in order.
    void push_stage(const Field& low, const Field* rhs) {
        append(stage_, low);
        if (rhs) append(stage_rhs_, *rhs);
    }

    Field low(std::size_t n) const { return modes_.template unpack<Field>(slice(low_, n)); }
    Field rhs(std::size_t n) const {
        if (!has_rhs()) throw std::logic_error("observation stream carries no derivative record");
        return modes_.template unpack<Field>(slice(rhs_, n));
    }

    /// Value seen at RK stage `slot` of the step from sample n to n + 1. Without recorded stages
    /// this falls back to cubic Hermite interpolation between the two samples.
    Field stage_low(std::size_t n, int slot) const {
        require_step(n);
        if (slot == 0) return low(n);
        if (has_stages()) return modes_.template unpack<Field>(slice(stage_, 3 * n + (slot - 1)));
        if (slot == 3) return low(n + 1);
        Field mid = 0.5 * (low(n) + low(n + 1));
        mid.axpy(dt_ / 8.0, derivative(n) - derivative(n + 1));
        return mid;
    }
    /// d/dt P_N at RK stage `slot`; without a stage record, the derivative of the Hermite cubic.
    Field stage_rhs(std::size_t n, int slot) const {
        require_step(n);
        if (slot == 0) return derivative(n);
        if (has_stage_rhs()) return modes_.template unpack<Field>(slice(stage_rhs_, 3 * n + (slot - 1)));
        if (slot == 3) return derivative(n + 1);
        Field d = (1.5 / dt_) * (low(n + 1) - low(n));
        d.axpy(-0.25, derivative(n) + derivative(n + 1));
        return d;
    }
    bool has_stage_rhs() const { return has_stages() && stage_rhs_.size() == stage_.size(); }

    SlotObservation<Field> slots(std::size_t n) const {
        return [this, n](int slot) { return stage_low(n, slot); };
    }

    /// d/dt P_N at sample n: the recorded value, else fourth-order finite differences.
    Field derivative(std::size_t n) const {
        if (has_rhs()) return rhs(n);
        if (count_ < 5) throw std::invalid_argument("need at least 5 samples to differentiate observations");
        if (n >= count_) throw ObservationGap("observation index past the end of the stream");
        static constexpr double central[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
        static constexpr double forward[5] = {-25.0 / 12, 48.0 / 12, -36.0 / 12, 16.0 / 12, -3.0 / 12};
        static constexpr double forward1[5] = {-3.0 / 12, -10.0 / 12, 18.0 / 12, -6.0 / 12, 1.0 / 12};
        const std::size_t last = count_ - 1;
        std::size_t base;
        const double* w;
        double sign = 1.0;
        bool reversed = false;
        if (n >= 2 && n + 2 <= last) base = n - 2, w = central;
        else if (n == 0) base = 0, w = forward;
        else if (n == 1) base = 0, w = forward1;
        else if (n == last) base = last, w = forward, sign = -1.0, reversed = true;
        else base = last, w = forward1, sign = -1.0, reversed = true;
        std::vector<Complex> acc(width(), Complex(0.0, 0.0));
        for (int i = 0; i < 5; ++i) {
            const auto v = slice(low_, reversed ? base - i : base + i);
            for (std::size_t m = 0; m < acc.size(); ++m) acc[m] += w[i] * v[m];
        }
        for (auto& a : acc) a *= sign / dt_;
        return modes_.template unpack<Field>(acc);
    }

private:
    std::size_t width() const {
        return modes_.size() * (std::is_same_v<Field, VectorField> ? static_cast<std::size_t>(grid().dim()) : 1);
    }
    void append(std::vector<Complex>& store, const Field& f) {
        const auto packed = modes_.pack(f);
        store.insert(store.end(), packed.begin(), packed.end());
    }
    std::vector<Complex> slice(const std::vector<Complex>& store, std::size_t n) const {
        const std::size_t w = width();
        if ((n + 1) * w > store.size()) throw ObservationGap("observation requested outside the recorded window");
        return {store.begin() + static_cast<std::ptrdiff_t>(n * w), store.begin() + static_cast<std::ptrdiff_t>((n + 1) * w)};
    }
    void require_step(std::size_t n) const {
        if (n + 1 >= count_) throw ObservationGap("no observations for the step starting at sample " + std::to_string(n));
    }

    ModeSet modes_;
    double t0_;
    double dt_;
    std::size_t count_ = 0;
    std::vector<Complex> low_, rhs_, stage_, stage_rhs_;
};

}  // namespace forcerecon
