#include "finitopo/invariants.hpp"

#include "finitopo/error.hpp"
#include "finitopo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace finitopo {

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Converging: return "converging";
        case Verdict::Diverging: return "diverging";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

LimitVerdict classify_limit(const std::vector<double>& seq, SequenceKind kind, const ClassifyOptions& opts) {
    if (seq.size() < 4) throw GeometryError(ErrorCode::TooShort, "classification needs at least four values");
    const std::size_t n = seq.size();
    const double x0 = seq[n - 3], x1 = seq[n - 2], x2 = seq[n - 1];
    LimitVerdict v;
    v.limit = std::numeric_limits<double>::quiet_NaN();
    for (double x : {x0, x1, x2})
        if (!std::isfinite(x)) return v;
    const double band = opts.conv_tol * (1.0 + std::abs(x2));
    if (std::abs(x0 - x1) <= band && std::abs(x0 - x2) <= band && std::abs(x1 - x2) <= band) {
        v.kind = Verdict::Converging;
        v.limit = x2;
        return v;
    }
    const double sgn = kind == SequenceKind::A ? 1.0 : -1.0;
    if (sgn * (x1 - x0) > 0.0 && sgn * (x2 - x1) > 0.0 && std::abs(x2) > opts.div_cap) v.kind = Verdict::Diverging;
    return v;
}

int first_bounded_tail(const std::vector<double>& values) {
    int first = -1;
    double tail_max = -kInf;
    for (int i = static_cast<int>(values.size()) - 1; i >= 0; --i) {
        tail_max = std::max(tail_max, values[static_cast<std::size_t>(i)]);
        if (!(tail_max < 1.0)) break;
        first = i;
    }
    return first;
}

namespace {

NodeSample pointwise(const ImmersionDef& imm, const Vec& u, const Tolerances& tol) {
    NodeSample s;
    try {
        const Jet2 jet = evaluate_jet(imm, u, tol);
        const MetricTensor g = metric(jet, tol);
        const SecondForm sf = second_form(jet, g, tol);
        s.alpha_norm = sf.norm_alpha;
        s.ricci_min = ricci_min(sf, g);
        s.mean_curvature = sf.mean_curvature.norm();
        s.valid = true;
    } catch (const GeometryError&) {
        s.valid = false;
    }
    return s;
}

// Extremum of `value(sample)` over the shell R < ρ ≤ hi, first over the lattice
// nodes, then over a finer sub-lattice around the winning node.
template <typename Value>
std::pair<double, Vec> shell_extremum(const ImmersionDef& imm, const SurfaceSamples& samples, double lo, double hi,
                                      bool maximize, const TailOptions& opts, const Tolerances& tol, Value value,
                                      std::size_t& count) {
    const SampleGrid& grid = *samples.field.grid;
    const double sgn = maximize ? 1.0 : -1.0;
    double best = -kInf;
    std::size_t best_node = 0;
    count = 0;
    for (std::size_t f = 0; f < grid.size(); ++f) {
        const NodeSample& s = samples.nodes[f];
        if (!s.valid || !(s.rho > lo && s.rho <= hi)) continue;
        ++count;
        const double q = sgn * value(s);
        if (q > best) {
            best = q;
            best_node = f;
        }
    }
    if (count == 0) return {std::numeric_limits<double>::quiet_NaN(), Vec()};
    Vec arg = grid.node(best_node);

    const int m = grid.dim();
    const int steps = opts.refine_steps;
    if (steps > 0) {
        const std::vector<int> idx = grid.multi_index(best_node);
        std::vector<int> k(static_cast<std::size_t>(m), -steps);
        for (;;) {
            bool centre = true;
            Vec x(m);
            for (int a = 0; a < m; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                centre = centre && k[ua] == 0;
                x[a] = grid.coordinate(a, idx[ua] + static_cast<double>(k[ua]) / steps);
            }
            x = imm.chart.wrap(x);
            if (!centre && imm.chart.contains(x)) {
                const double rho = samples.field.extend(imm, x, tol);
                if (rho > lo && rho <= hi) {
                    NodeSample s = pointwise(imm, x, tol);
                    s.rho = rho;
                    if (s.valid) {
                        const double q = sgn * value(s);
                        if (q > best) {
                            best = q;
                            arg = x;
                        }
                    }
                }
            }
            std::size_t a = 0;
            while (a < k.size() && k[a] == steps) k[a++] = -steps;
            if (a == k.size()) break;
            ++k[a];
        }
    }
    return {sgn * best, arg};
}

template <typename Estimate, typename Value>
void fill_sequence(const ImmersionDef& imm, const SurfaceSamples& samples, const std::vector<double>& radii,
                   const TailOptions& opts, const Tolerances& tol, bool maximize, Value value,
                   std::vector<double>& values, std::vector<Vec>& args, Estimate& est) {
    if (radii.empty()) throw GeometryError(ErrorCode::BadParams, "no exhaustion radii");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1])) throw GeometryError(ErrorCode::BadParams, "radii must increase");
    est.radii = radii;
    est.refinement_gap = samples.field.refinement_gap;
    est.window_reach = samples.field.window_reach;
    est.window_ok = samples.field.window_reach >= opts.window_factor * radii.back();
    est.sample_count = 0;
    for (const auto& s : samples.nodes)
        if (s.valid && std::isfinite(s.rho)) ++est.sample_count;

    std::size_t beyond = 0;
    for (const auto& s : samples.nodes)
        if (s.valid && s.rho > radii.back()) ++beyond;
    if (beyond == 0) throw GeometryError(ErrorCode::EmptyTail, "no samples beyond the largest radius");

    for (double R : radii) {
        std::size_t count = 0;
        auto [v, arg] = shell_extremum(imm, samples, R, opts.window_factor * R, maximize, opts, tol, value, count);
        values.push_back(v);
        args.push_back(arg);
        est.shell_counts.push_back(count);
    }
}

}  // namespace

SurfaceSamples sample_surface(const ImmersionDef& imm, const Vec& p, const GridSpec& grid, const Tolerances& tol) {
    SurfaceSamples out;
    out.field = compute_distance_field(imm, p, grid, tol);
    const SampleGrid& g = *out.field.grid;
    out.nodes.resize(g.size());
    parallel_for(g.size(), [&](std::size_t f) {
        NodeSample s = pointwise(imm, g.node(f), tol);
        s.rho = out.field.rho[f];
        if (!std::isfinite(s.rho)) s.valid = false;
        out.nodes[f] = s;
    });
    return out;
}

AEstimate a_sequence(const ImmersionDef& imm, const SurfaceSamples& samples, const std::vector<double>& radii,
                     const TailOptions& opts, const Tolerances& tol) {
    AEstimate est;
    fill_sequence(imm, samples, radii, opts, tol, true,
                  [](const NodeSample& s) { return s.rho * s.alpha_norm; }, est.a, est.argmax, est);
    for (std::size_t i = 0; i + 1 < est.a.size(); ++i)
        if (std::isfinite(est.a[i]) && std::isfinite(est.a[i + 1]))
            est.monotone_violation = std::max(est.monotone_violation, est.a[i + 1] - est.a[i]);
    if (est.a.size() >= 4) {
        est.verdict = classify_limit(est.a, SequenceKind::A, opts.classify);
    } else {
        est.verdict.limit = std::numeric_limits<double>::quiet_NaN();
    }
    if (!est.window_ok && est.verdict.kind == Verdict::Converging) {
        est.verdict.kind = Verdict::Indeterminate;
        est.verdict.limit = std::numeric_limits<double>::quiet_NaN();
    }
    return est;
}

AEstimate a_sequence(const ImmersionDef& imm, const Vec& p, const std::vector<double>& radii, const GridSpec& grid,
                     const TailOptions& opts, const Tolerances& tol) {
    return a_sequence(imm, sample_surface(imm, p, grid, tol), radii, opts, tol);
}

BEstimate b_sequence(const ImmersionDef& imm, const SurfaceSamples& samples, const std::vector<double>& radii,
                     const TailOptions& opts, const Tolerances& tol) {
    for (const auto& s : samples.nodes)
        if (s.valid && s.mean_curvature > tol.h_tol)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.3e", s.mean_curvature);
            throw GeometryError(ErrorCode::NotMinimal, imm.label + " has |H| = " + buf + " at a sample");
        }
    BEstimate est;
    fill_sequence(imm, samples, radii, opts, tol, false,
                  [](const NodeSample& s) { return s.rho * s.rho * s.ricci_min; }, est.b, est.argmin, est);
    for (std::size_t i = 0; i + 1 < est.b.size(); ++i)
        if (std::isfinite(est.b[i]) && std::isfinite(est.b[i + 1]))
            est.monotone_violation = std::max(est.monotone_violation, est.b[i] - est.b[i + 1]);
    if (est.b.size() >= 4) {
        est.verdict = classify_limit(est.b, SequenceKind::B, opts.classify);
    } else {
        est.verdict.limit = std::numeric_limits<double>::quiet_NaN();
    }
    if (!est.window_ok && est.verdict.kind == Verdict::Converging) {
        est.verdict.kind = Verdict::Indeterminate;
        est.verdict.limit = std::numeric_limits<double>::quiet_NaN();
    }
    return est;
}

BEstimate b_sequence(const ImmersionDef& imm, const Vec& p, const std::vector<double>& radii, const GridSpec& grid,
                     const TailOptions& opts, const Tolerances& tol) {
    return b_sequence(imm, sample_surface(imm, p, grid, tol), radii, opts, tol);
}

}  // namespace finitopo
