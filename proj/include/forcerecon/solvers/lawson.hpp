#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "forcerecon/spectral/field.hpp"

namespace forcerecon {

/// Two states advanced together (coupled systems, or truth alongside an assimilator).
template <class A, class B>
struct Pair {
    A first;
    B second;

    Pair& operator+=(const Pair& o) {
        first += o.first;
        second += o.second;
        return *this;
    }
    Pair& operator-=(const Pair& o) {
        first -= o.first;
        second -= o.second;
        return *this;
    }
    Pair& operator*=(double s) {
        first *= s;
        second *= s;
        return *this;
    }
};

template <class A, class B>
Pair<A, B> operator+(Pair<A, B> a, const Pair<A, B>& b) {
    return a += b;
}
template <class A, class B>
Pair<A, B> operator-(Pair<A, B> a, const Pair<A, B>& b) {
    return a -= b;
}
template <class A, class B>
Pair<A, B> operator*(double s, Pair<A, B> a) {
    return a *= s;
}

/// Diagonal linear operator L with L e_k = rate(|k|^2) e_k; applies L and e^{tau L}.
/// Exponentials are cached per tau (a run only ever uses h and h/2).
class DiagonalOperator {
public:
    DiagonalOperator(const WaveGrid& grid, const std::function<double(double k2)>& rate);
    static DiagonalOperator zero(const WaveGrid& grid) {
        return DiagonalOperator(grid, [](double) { return 0.0; });
    }

    double rate(std::size_t index) const { return rate_[index]; }

    ScalarField apply(const ScalarField& f) const;
    VectorField apply(const VectorField& f) const;
    ScalarField exp(const ScalarField& f, double tau) const;
    VectorField exp(const VectorField& f, double tau) const;

private:
    const std::vector<double>& factors(double tau) const;

    WaveGrid grid_;
    std::vector<double> rate_;
    struct Cache {
        std::mutex m;
        std::map<double, std::vector<double>> by_tau;
    };
    std::shared_ptr<Cache> cache_;
};

template <class OpA, class OpB>
struct PairOperator {
    OpA first;
    OpB second;

    template <class A, class B>
    Pair<A, B> apply(const Pair<A, B>& x) const {
        return {first.apply(x.first), second.apply(x.second)};
    }
    template <class A, class B>
    Pair<A, B> exp(const Pair<A, B>& x, double tau) const {
        return {first.exp(x.first, tau), second.exp(x.second, tau)};
    }
};

/// Stage index passed to right-hand sides: 0 at t, 1 and 2 at t + h/2, 3 at t + h.
inline double slot_offset(int slot, double h) { return slot == 0 ? 0.0 : (slot == 3 ? h : 0.5 * h); }

/// One integrating-factor (Lawson) RK4 step of u' = L u + R(u), where `full(slot, x)`
/// returns the whole right-hand side L x + R(x). The linear part is integrated exactly.
template <class State, class Op, class Full>
State lawson_rk4_step(const State& u, double h, const Op& L, Full&& full) {
    auto nonlinear = [&](int slot, const State& x) {
        State r = full(slot, x);
        r -= L.apply(x);
        return r;
    };
    const State a = nonlinear(0, u);
    const State Ehalf_u = L.exp(u, 0.5 * h);
    const State b = nonlinear(1, L.exp(u + (0.5 * h) * a, 0.5 * h));
    const State c = nonlinear(2, Ehalf_u + (0.5 * h) * b);
    const State Eu = L.exp(Ehalf_u, 0.5 * h);
    const State d = nonlinear(3, Eu + h * L.exp(c, 0.5 * h));
    State out = L.exp(a, h);
    out += L.exp(2.0 * (b + c), 0.5 * h);
    out += d;
    out *= h / 6.0;
    out += Eu;
    return out;
}

/// Raised when a state turns non-finite or grows past the blow-up threshold.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t)
        : std::runtime_error(what + " at t = " + std::to_string(t)), time_(t) {}
    double time() const { return time_; }

private:
    double time_;
};

inline constexpr double kBlowUpThreshold = 1e12;

void check_finite(const ScalarField& f, double t, const char* what);
void check_finite(const VectorField& f, double t, const char* what);
template <class A, class B>
void check_finite(const Pair<A, B>& p, double t, const char* what) {
    check_finite(p.first, t, what);
    check_finite(p.second, t, what);
}

}  // namespace forcerecon
