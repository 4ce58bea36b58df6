#include "finitopo/ode.hpp"

#include "finitopo/error.hpp"

#include <algorithm>
#include <cmath>

namespace finitopo {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

OdeStatus DormandPrince::integrate(const Rhs& f, double t0, double t1, Vec& y,
                                   const Observer& observer, const Normalizer& normalize) const {
    accepted_ = 0;
    rejected_ = 0;
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    double t = t0;
    double h = std::min({opts_.h_init, opts_.h_max, std::abs(t1 - t0)});
    Vec k1 = f(t, y);
    // Kahan compensation for the running sums t and y.
    Vec y_comp = Vec::Zero(y.size());
    double t_comp = 0.0;
    long steps = 0;
    while (dir * (t1 - t) > 0.0) {
        if (++steps > opts_.max_steps) return OdeStatus::StepFailed;
        h = std::min(h, std::abs(t1 - t));
        const double hs = dir * h;
        Vec y_new, y_comp_new, k7;
        double err = 0.0;
        try {
            const Vec k2 = f(t + c2 * hs, y + hs * (a21 * k1));
            const Vec k3 = f(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
            const Vec k4 = f(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
            const Vec k5 = f(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const Vec k6 =
                f(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const Vec incr = hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6) - y_comp;
            y_new = y + incr;
            y_comp_new = (y_new - y) - incr;
            k7 = f(t + hs, y_new);
            const Vec e = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
                err = std::max(err, std::abs(e[i]) / sc);
            }
        } catch (const GeometryError&) {
            ++rejected_;
            h *= 0.25;
            if (h < opts_.h_min) throw;
            continue;
        }
        if (!std::isfinite(err)) err = 1e10;
        if (err <= 1.0) {
            const double dt = hs - t_comp;
            const double t_new = t + dt;
            t_comp = (t_new - t) - dt;
            t = t_new;
            y = normalize ? normalize(y_new) : y_new;
            y_comp = y_comp_new;
            k1 = k7;
            ++accepted_;
            if (observer && !observer(t, y)) return OdeStatus::Stopped;
            const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h = std::min(h * fac, opts_.h_max);
        } else {
            ++rejected_;
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            if (h < opts_.h_min) return OdeStatus::StepFailed;
        }
    }
    return OdeStatus::Completed;
}

}  // namespace finitopo
