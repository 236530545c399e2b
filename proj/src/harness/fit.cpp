#include "forcerecon/harness/fit.hpp"

#include <cmath>
#include <limits>

namespace forcerecon {

FitResult fit_decay_rate(const std::vector<double>& x, const std::vector<double>& y,
                         std::optional<std::pair<double, double>> window, std::size_t min_samples) {
    if (x.size() != y.size()) throw FitError("fit needs equally long x and y");
    std::vector<double> xs, ls;
    FitResult r;
    double floor = -1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (window && (x[i] < window->first || x[i] > window->second)) continue;
        if (std::isnan(y[i])) continue;
        if (floor < 0.0 && y[i] > 0.0) floor = kFloorFactor * std::numeric_limits<double>::epsilon() * y[i];
        if (!(y[i] > floor)) {
            r.floor_hit = true;
            break;
        }
        xs.push_back(x[i]);
        ls.push_back(std::log(y[i]));
    }
    if (xs.size() < std::max<std::size_t>(min_samples, 2))
        throw FitError("only " + std::to_string(xs.size()) + " usable samples in the fit window (need " +
                       std::to_string(std::max<std::size_t>(min_samples, 2)) + ")");
    const double n = double(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ls[i];
    mx /= n, my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ls[i] - my);
        syy += (ls[i] - my) * (ls[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("fit window has no spread in x");
    r.rate = sxy / sxx;
    r.intercept = my - r.rate * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ls[i] - (r.intercept + r.rate * xs[i]);
        sse += e * e;
    }
    r.residual = syy > 0.0 ? sse / syy : 0.0;
    r.used = xs.size();
    return r;
}

}  // namespace forcerecon
