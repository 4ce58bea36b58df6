#pragma once

#include "finitopo/immersion.hpp"

#include <functional>

namespace finitopo {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 1e-3;
    double h_max = kInf;
    double h_min = 1e-14;
    long max_steps = 2'000'000;
};

enum class OdeStatus { Completed, Stopped, StepFailed };

/// Adaptive Dormand-Prince 5(4) integrator for y' = f(t, y).
///
/// The right-hand side may throw GeometryError for states it cannot evaluate;
/// the trial step is then shrunk, and the error is rethrown once the step
/// falls below h_min. The observer sees every accepted step and returns false
/// to stop the integration.
class DormandPrince {
public:
    using Rhs = std::function<Vec(double, const Vec&)>;
    using Observer = std::function<bool(double, const Vec&)>;
    /// Maps an accepted state back into canonical form (e.g. periodic wrap).
    using Normalizer = std::function<Vec(const Vec&)>;

    explicit DormandPrince(OdeOptions opts = {}) : opts_(opts) {}

    OdeStatus integrate(const Rhs& f, double t0, double t1, Vec& y, const Observer& observer,
                        const Normalizer& normalize = {}) const;

    long accepted_steps() const { return accepted_; }
    long rejected_steps() const { return rejected_; }

private:
    OdeOptions opts_;
    mutable long accepted_ = 0;
    mutable long rejected_ = 0;
};

}  // namespace finitopo
