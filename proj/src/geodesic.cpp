#include "finitopo/geodesic.hpp"

#include "finitopo/error.hpp"
#include "finitopo/ode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace finitopo {

std::vector<Mat> christoffels(const Jet2& jet, const MetricTensor& g) {
    const int m = jet.m();
    std::vector<Mat> gamma(static_cast<std::size_t>(m), Mat::Zero(m, m));
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            const Vec lowered = jet.jac.transpose() * jet.d2(i, j);  // ⟨∂²φ_ij, ∂_lφ⟩
            const Vec raised = g.g_inv * lowered;
            for (int k = 0; k < m; ++k) {
                gamma[static_cast<std::size_t>(k)](i, j) = raised[k];
                gamma[static_cast<std::size_t>(k)](j, i) = raised[k];
            }
        }
    }
    return gamma;
}

GeodesicPath shoot_geodesic(const ImmersionDef& imm, const Vec& u0, const Vec& v0, double length,
                            double tol, const Tolerances& tols) {
    const int m = imm.m;
    {
        const MetricTensor g = metric(evaluate_jet(imm, u0, tols), tols);
        if (std::abs(g.inner(v0, v0) - 1.0) > std::max(tols.unit_tol, 10.0 * tol))
            throw GeometryError(ErrorCode::NotUnit, "initial geodesic velocity is not g-unit");
    }
    auto rhs = [&](double, const Vec& y) {
        const Vec u = y.head(m);
        const Vec v = y.tail(m);
        const Jet2 jet = evaluate_jet(imm, u, tols);
        const MetricTensor g = metric(jet, tols);
        const std::vector<Mat> gamma = christoffels(jet, g);
        Vec dy(2 * m);
        dy.head(m) = v;
        for (int k = 0; k < m; ++k) dy[m + k] = -v.dot(gamma[static_cast<std::size_t>(k)] * v);
        return dy;
    };
    auto speed_drift = [&](const Vec& u, const Vec& v) {
        const MetricTensor g = metric(evaluate_jet(imm, u, tols), tols);
        return std::abs(g.norm(v) - 1.0);
    };

    GeodesicPath path;
    Vec y(2 * m);
    y << u0, v0;
    path.samples.push_back({0.0, imm.chart.wrap(u0), v0});
    OdeOptions opts;
    opts.rtol = tol;
    opts.atol = tol;
    opts.h_init = std::min(1e-2, std::max(std::abs(length), 1e-12));
    const DormandPrince integrator(opts);
    auto observer = [&](double s, const Vec& state) {
        path.samples.push_back({s, state.head(m), state.tail(m)});
        path.max_speed_drift = std::max(path.max_speed_drift, speed_drift(state.head(m), state.tail(m)));
        return true;
    };
    auto normalize = [&](const Vec& state) {
        Vec out = state;
        out.head(m) = imm.chart.wrap(state.head(m));
        return out;
    };
    try {
        const OdeStatus st = integrator.integrate(rhs, 0.0, length, y, observer, normalize);
        if (st == OdeStatus::StepFailed)
            throw GeometryError(ErrorCode::LeftChart, "geodesic integration failed to advance");
    } catch (const GeometryError& e) {
        if (e.code() == ErrorCode::OutOfChart || e.code() == ErrorCode::RankDeficient)
            throw GeometryError(ErrorCode::LeftChart, "geodesic left the chart: " + std::string(e.what()));
        throw;
    }
    path.total_length = std::abs(length);
    return path;
}

// ---------------------------------------------------------------------------

GridSpec GridSpec::refined(const Chart& chart) const {
    GridSpec out = *this;
    for (std::size_t k = 0; k < axes.size(); ++k) {
        const bool periodic = k < chart.axes.size() && chart.axes[k].periodic;
        out.axes[k].nodes = periodic ? 2 * axes[k].nodes : 2 * axes[k].nodes - 1;
    }
    return out;
}

namespace {

double to_w(const AxisGrid& a, double x) {
    switch (a.spacing) {
        case Spacing::Uniform: return x;
        case Spacing::Geometric: return std::log(x);
        case Spacing::Sinh: return std::asinh(x / a.sinh_scale);
    }
    return x;
}

double from_w(const AxisGrid& a, double w) {
    switch (a.spacing) {
        case Spacing::Uniform: return w;
        case Spacing::Geometric: return std::exp(w);
        case Spacing::Sinh: return a.sinh_scale * std::sinh(w);
    }
    return w;
}

double dx_dw(const AxisGrid& a, double w) {
    switch (a.spacing) {
        case Spacing::Uniform: return 1.0;
        case Spacing::Geometric: return std::exp(w);
        case Spacing::Sinh: return a.sinh_scale * std::cosh(w);
    }
    return 1.0;
}

}  // namespace

SampleGrid::SampleGrid(const ImmersionDef& imm, const GridSpec& spec) : spec_(spec) {
    const int m = imm.m;
    if (static_cast<int>(spec.axes.size()) != m)
        throw GeometryError(ErrorCode::BadParams, "grid dimension does not match the chart");
    size_ = 1;
    for (int k = 0; k < m; ++k) {
        AxisGrid& a = spec_.axes[static_cast<std::size_t>(k)];
        const ChartAxis& c = imm.chart.axes[static_cast<std::size_t>(k)];
        if (a.nodes < 2) throw GeometryError(ErrorCode::BadParams, "grid axes need at least 2 nodes");
        periodic_.push_back(c.periodic);
        if (c.periodic) {
            a.lo = c.lo;
            a.hi = c.hi;
            a.spacing = Spacing::Uniform;
            truncates_lo_.push_back(false);
            truncates_hi_.push_back(false);
        } else {
            double lo = std::max(a.lo, c.lo);
            double hi = std::min(a.hi, c.hi);
            truncates_lo_.push_back(a.lo > c.lo);
            truncates_hi_.push_back(a.hi < c.hi);
            // The chart box is open: keep nodes strictly inside.
            if (lo <= c.lo) lo = c.lo + 1e-9 * std::max(1.0, std::abs(c.lo));
            if (hi >= c.hi) hi = c.hi - 1e-9 * std::max(1.0, std::abs(c.hi));
            if (!(hi > lo)) throw GeometryError(ErrorCode::BadParams, "empty grid window");
            if (a.spacing == Spacing::Geometric && lo <= 0.0)
                throw GeometryError(ErrorCode::BadParams, "geometric spacing needs a positive window");
            a.lo = lo;
            a.hi = hi;
        }
        w_lo_.push_back(to_w(a, a.lo));
        w_hi_.push_back(to_w(a, a.hi));
        counts_.push_back(a.nodes);
        size_ *= static_cast<std::size_t>(a.nodes);
    }
}

double SampleGrid::coordinate(int axis, double index) const {
    const auto k = static_cast<std::size_t>(axis);
    const AxisGrid& a = spec_.axes[k];
    if (periodic_[k]) return a.lo + index * (a.hi - a.lo) / counts_[k];
    const double w = w_lo_[k] + index * (w_hi_[k] - w_lo_[k]) / (counts_[k] - 1);
    return from_w(a, w);
}

double SampleGrid::coordinate_rate(int axis, double index) const {
    const auto k = static_cast<std::size_t>(axis);
    const AxisGrid& a = spec_.axes[k];
    if (periodic_[k]) return (a.hi - a.lo) / counts_[k];
    const double dw = (w_hi_[k] - w_lo_[k]) / (counts_[k] - 1);
    return dx_dw(a, w_lo_[k] + index * dw) * dw;
}

double SampleGrid::index_of(int axis, double x) const {
    const auto k = static_cast<std::size_t>(axis);
    const AxisGrid& a = spec_.axes[k];
    if (periodic_[k]) return (x - a.lo) / (a.hi - a.lo) * counts_[k];
    return (to_w(a, x) - w_lo_[k]) / (w_hi_[k] - w_lo_[k]) * (counts_[k] - 1);
}

std::vector<int> SampleGrid::multi_index(std::size_t flat) const {
    std::vector<int> idx(counts_.size());
    for (std::size_t k = 0; k < counts_.size(); ++k) {
        idx[k] = static_cast<int>(flat % static_cast<std::size_t>(counts_[k]));
        flat /= static_cast<std::size_t>(counts_[k]);
    }
    return idx;
}

std::int64_t SampleGrid::flat_index(const std::vector<int>& idx) const {
    std::int64_t flat = 0;
    std::int64_t stride = 1;
    for (std::size_t k = 0; k < counts_.size(); ++k) {
        int i = idx[k];
        if (periodic_[k]) {
            i %= counts_[k];
            if (i < 0) i += counts_[k];
        } else if (i < 0 || i >= counts_[k]) {
            return -1;
        }
        flat += stride * i;
        stride *= counts_[k];
    }
    return flat;
}

Vec SampleGrid::node(std::size_t flat) const {
    const std::vector<int> idx = multi_index(flat);
    Vec x(dim());
    for (int k = 0; k < dim(); ++k) x[k] = coordinate(k, idx[static_cast<std::size_t>(k)]);
    return x;
}

bool SampleGrid::on_truncation_face(std::size_t flat) const {
    const std::vector<int> idx = multi_index(flat);
    for (std::size_t k = 0; k < counts_.size(); ++k) {
        if (truncates_lo_[k] && idx[k] == 0) return true;
        if (truncates_hi_[k] && idx[k] == counts_[k] - 1) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------

namespace {

// Primitive integer offsets with max-norm ≤ radius.
std::vector<std::vector<int>> stencil_offsets(int m, int radius) {
    std::vector<std::vector<int>> out;
    std::vector<int> v(static_cast<std::size_t>(m), -radius);
    for (;;) {
        int g = 0;
        for (int x : v) g = std::gcd(g, std::abs(x));
        if (g == 1) out.push_back(v);
        std::size_t k = 0;
        while (k < v.size() && v[k] == radius) v[k++] = -radius;
        if (k == v.size()) break;
        ++v[k];
    }
    return out;
}

double metric_speed(const Mat& g, const Vec& d) { return std::sqrt(std::max(0.0, d.dot(g * d))); }

// Chart metric at u, or empty on failure (blocked point).
bool try_metric(const ImmersionDef& imm, const Vec& u, const Tolerances& tol, Mat& g) {
    try {
        const Jet2 jet = evaluate_jet(imm, u, tol);
        g = jet.jac.transpose() * jet.jac;
        return true;
    } catch (const GeometryError&) {
        return false;
    }
}

// Simpson length of the straight chart segment a → b with direct evaluations.
double simpson_length(const ImmersionDef& imm, const Vec& a, const Vec& b, const Tolerances& tol) {
    const Vec d = b - a;
    if (d.norm() == 0.0) return 0.0;
    Mat ga, gm, gb;
    if (!try_metric(imm, a, tol, ga) || !try_metric(imm, 0.5 * (a + b), tol, gm) ||
        !try_metric(imm, b, tol, gb))
        return kInf;
    return (metric_speed(ga, d) + 4.0 * metric_speed(gm, d) + metric_speed(gb, d)) / 6.0;
}

// Chart coordinates of a lattice multi-index without wrapping periodic axes.
Vec unwrapped_node(const SampleGrid& grid, const std::vector<int>& idx) {
    Vec x(grid.dim());
    for (int k = 0; k < grid.dim(); ++k) x[k] = grid.coordinate(k, idx[static_cast<std::size_t>(k)]);
    return x;
}

// Unwrapped representative of a periodic chart point closest to `near`.
Vec unwrap_near(const Chart& chart, const Vec& x, const Vec& near) {
    return near + chart.displacement(near, x);
}

template <typename Fn>
void for_each_in_box(const SampleGrid& grid, const Vec& fidx, int reach, Fn&& fn) {
    const int m = grid.dim();
    std::vector<int> lo(static_cast<std::size_t>(m)), hi(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        lo[static_cast<std::size_t>(k)] = static_cast<int>(std::floor(fidx[k])) - reach;
        hi[static_cast<std::size_t>(k)] = static_cast<int>(std::ceil(fidx[k])) + reach;
    }
    std::vector<int> idx = lo;
    for (;;) {
        fn(idx);
        std::size_t k = 0;
        while (k < idx.size() && idx[k] == hi[k]) {
            idx[k] = lo[k];
            ++k;
        }
        if (k == idx.size()) break;
        ++idx[k];
    }
}

}  // namespace

double DistanceField::extend(const ImmersionDef& imm, const Vec& x, const Tolerances& tol) const {
    const SampleGrid& g = *grid;
    Vec fidx(g.dim());
    for (int k = 0; k < g.dim(); ++k) fidx[k] = g.index_of(k, x[k]);
    double best = kInf;
    for_each_in_box(g, fidx, g.spec().stencil_radius, [&](const std::vector<int>& idx) {
        const std::int64_t flat = g.flat_index(idx);
        if (flat < 0) return;
        const double r = rho[static_cast<std::size_t>(flat)];
        if (!std::isfinite(r)) return;
        const Vec y = unwrapped_node(g, idx);
        const Vec xu = unwrap_near(imm.chart, x, y);
        best = std::min(best, r + simpson_length(imm, y, xu, tol));
    });
    return best;
}

DistanceField graph_distance_field(const ImmersionDef& imm, const Vec& p, const GridSpec& spec,
                                   const Tolerances& tol) {
    auto grid = std::make_shared<const SampleGrid>(imm, spec);
    const int m = grid->dim();
    const auto mm = static_cast<std::size_t>(m * m);

    // Computational-coordinate metric D g D on the doubled lattice, which holds
    // every node and every stencil-edge midpoint.
    std::vector<int> dcount(static_cast<std::size_t>(m));
    std::size_t dsize = 1;
    for (int k = 0; k < m; ++k) {
        dcount[static_cast<std::size_t>(k)] = grid->periodic(k) ? 2 * grid->count(k) : 2 * grid->count(k) - 1;
        dsize *= static_cast<std::size_t>(dcount[static_cast<std::size_t>(k)]);
    }
    std::vector<double> gcomp(dsize * mm, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t f = 0; f < dsize; ++f) {
        std::size_t rem = f;
        Vec x(m), rate(m);
        for (int k = 0; k < m; ++k) {
            const int dk = dcount[static_cast<std::size_t>(k)];
            const double half = 0.5 * static_cast<double>(rem % static_cast<std::size_t>(dk));
            rem /= static_cast<std::size_t>(dk);
            x[k] = grid->coordinate(k, half);
            rate[k] = grid->coordinate_rate(k, half);
        }
        Mat g;
        if (!try_metric(imm, x, tol, g)) continue;
        const Mat gc = rate.asDiagonal() * g * rate.asDiagonal();
        std::copy(gc.data(), gc.data() + mm, gcomp.begin() + static_cast<std::ptrdiff_t>(f * mm));
    }
    auto dflat = [&](const std::vector<int>& didx) {
        std::size_t flat = 0, stride = 1;
        for (int k = 0; k < m; ++k) {
            int i = didx[static_cast<std::size_t>(k)];
            const int dk = dcount[static_cast<std::size_t>(k)];
            if (grid->periodic(k)) {
                i %= dk;
                if (i < 0) i += dk;
            }
            flat += stride * static_cast<std::size_t>(i);
            stride *= static_cast<std::size_t>(dk);
        }
        return flat;
    };
    auto speed_at = [&](std::size_t f, const Vec& d) {
        const double* gp = gcomp.data() + f * mm;
        if (std::isnan(gp[0])) return kInf;
        double s = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) s += d[i] * gp[i + j * m] * d[j];
        return std::sqrt(std::max(0.0, s));
    };

    DistanceField field;
    field.base = p;
    field.grid = grid;
    field.rho.assign(grid->size(), kInf);

    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;

    // Virtual source edges from p to the surrounding nodes.
    Vec fidx(m);
    for (int k = 0; k < m; ++k) fidx[k] = grid->index_of(k, p[k]);
    for_each_in_box(*grid, fidx, grid->spec().stencil_radius, [&](const std::vector<int>& idx) {
        const std::int64_t flat = grid->flat_index(idx);
        if (flat < 0) return;
        const Vec y = unwrapped_node(*grid, idx);
        const Vec pu = unwrap_near(imm.chart, p, y);
        const double d = segment_length(imm, pu, y, tol);
        auto& r = field.rho[static_cast<std::size_t>(flat)];
        if (d < r) {
            r = d;
            queue.emplace(d, static_cast<std::size_t>(flat));
        }
    });

    const auto offsets = stencil_offsets(m, grid->spec().stencil_radius);
    std::vector<char> settled(grid->size(), 0);
    std::vector<int> nb(static_cast<std::size_t>(m)), didx(static_cast<std::size_t>(m));
    Vec d(m);
    while (!queue.empty()) {
        const auto [dist, a] = queue.top();
        queue.pop();
        if (settled[a]) continue;
        settled[a] = 1;
        const std::vector<int> ia = grid->multi_index(a);
        std::vector<int> da(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) da[static_cast<std::size_t>(k)] = 2 * ia[static_cast<std::size_t>(k)];
        for (const auto& off : offsets) {
            for (int k = 0; k < m; ++k) nb[static_cast<std::size_t>(k)] = ia[static_cast<std::size_t>(k)] + off[static_cast<std::size_t>(k)];
            const std::int64_t b = grid->flat_index(nb);
            if (b < 0 || settled[static_cast<std::size_t>(b)]) continue;
            for (int k = 0; k < m; ++k) {
                d[k] = off[static_cast<std::size_t>(k)];
                didx[static_cast<std::size_t>(k)] = da[static_cast<std::size_t>(k)] + off[static_cast<std::size_t>(k)];
            }
            const double qm = speed_at(dflat(didx), d);
            for (int k = 0; k < m; ++k) didx[static_cast<std::size_t>(k)] += off[static_cast<std::size_t>(k)];
            const double qb = speed_at(dflat(didx), d);
            const double qa = speed_at(dflat(da), d);
            const double w = (qa + 4.0 * qm + qb) / 6.0;
            if (!std::isfinite(w)) continue;
            auto& rb = field.rho[static_cast<std::size_t>(b)];
            if (dist + w < rb) {
                rb = dist + w;
                queue.emplace(rb, static_cast<std::size_t>(b));
            }
        }
    }

    for (std::size_t f = 0; f < grid->size(); ++f)
        if (grid->on_truncation_face(f)) field.window_reach = std::min(field.window_reach, field.rho[f]);
    return field;
}

DistanceField compute_distance_field(const ImmersionDef& imm, const Vec& p, const GridSpec& spec,
                                     const Tolerances& tol) {
    DistanceField field = graph_distance_field(imm, p, spec, tol);
    GridSpec current = spec;
    for (int level = 0; level < spec.max_refinements; ++level) {
        const GridSpec finer_spec = current.refined(imm.chart);
        DistanceField finer = graph_distance_field(imm, p, finer_spec, tol);
        double rho_max = 0.0;
        for (double r : finer.rho)
            if (std::isfinite(r)) rho_max = std::max(rho_max, r);
        double gap = 0.0;
        const SampleGrid& cg = *field.grid;
        std::vector<int> fi(static_cast<std::size_t>(cg.dim()));
        for (std::size_t f = 0; f < cg.size(); ++f) {
            const std::vector<int> ci = cg.multi_index(f);
            for (std::size_t k = 0; k < ci.size(); ++k) fi[k] = 2 * ci[k];
            const std::int64_t ff = finer.grid->flat_index(fi);
            if (ff < 0) continue;
            const double rf = finer.rho[static_cast<std::size_t>(ff)];
            const double rc = field.rho[f];
            if (!std::isfinite(rf) || !std::isfinite(rc)) continue;
            gap = std::max(gap, std::abs(rc - rf) / std::max(rf, 0.01 * rho_max));
        }
        finer.refinement_gap = gap;
        finer.refinements = level + 1;
        field = std::move(finer);
        current = finer_spec;
        if (gap < spec.dist_tol) break;
    }
    return field;
}

double segment_length(const ImmersionDef& imm, const Vec& a, const Vec& b, const Tolerances& tol) {
    static constexpr double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                        0.5384693101056831, 0.9061798459386640};
    static constexpr double weights[5] = {0.2369268850561891, 0.4786286704993665,
                                          0.5688888888888889, 0.4786286704993665,
                                          0.2369268850561891};
    const Vec d = b - a;
    if (d.norm() == 0.0) return 0.0;
    auto composite = [&](int panels) {
        double total = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double t0 = static_cast<double>(p) / panels;
            const double half = 0.5 / panels;
            for (int q = 0; q < 5; ++q) {
                const double t = t0 + half * (1.0 + nodes[q]);
                Mat g;
                if (!try_metric(imm, a + t * d, tol, g)) return kInf;
                total += weights[q] * half * metric_speed(g, d);
            }
        }
        return total;
    };
    double prev = composite(1);
    for (int panels = 2; panels <= 4096; panels *= 2) {
        const double cur = composite(panels);
        if (!std::isfinite(cur)) return kInf;
        if (std::abs(cur - prev) <= 1e-13 * std::max(1.0, cur)) return cur;
        prev = cur;
    }
    return prev;
}

double distance(const ImmersionDef& imm, const Vec& p, const Vec& x, DistanceMethod method,
                const GridSpec* spec, const Tolerances& tol) {
    if (!imm.chart.contains(p) || !imm.chart.contains(x))
        throw GeometryError(ErrorCode::OutOfChart, "distance endpoints must lie in the chart");
    if (method == DistanceMethod::Shoot) {
        const Vec disp = imm.chart.displacement(p, x);
        switch (imm.geodesic_lines) {
            case GeodesicLines::AllStraight: return segment_length(imm, p, p + disp, tol);
            case GeodesicLines::Meridians: {
                for (int k = 0; k < imm.m; ++k) {
                    if (k == imm.meridian_axis) continue;
                    if (std::abs(disp[k]) > 1e-12 * std::max(1.0, std::abs(p[k])))
                        throw GeometryError(ErrorCode::ShootUnsupported,
                                            "points do not lie on a common meridian of " + imm.label);
                }
                Vec end = p;
                end[imm.meridian_axis] += disp[imm.meridian_axis];
                return segment_length(imm, p, end, tol);
            }
            case GeodesicLines::None: break;
        }
        throw GeometryError(ErrorCode::ShootUnsupported,
                            imm.label + " declares no geodesic coordinate lines");
    }
    if (spec == nullptr)
        throw GeometryError(ErrorCode::BadParams, "graph distance needs a lattice specification");
    const DistanceField field = compute_distance_field(imm, p, *spec, tol);
    const double r = field.extend(imm, x, tol);
    if (!std::isfinite(r)) throw GeometryError(ErrorCode::Unreachable, "target not reachable in the window");
    return r;
}

std::vector<double> exhaustion_radii(double r0, int count) {
    if (!(r0 > 0.0) || count < 2)
        throw GeometryError(ErrorCode::BadParams, "exhaustion needs r0 > 0 and count >= 2");
    std::vector<double> radii;
    for (int i = 0; i < count; ++i) radii.push_back(std::ldexp(r0, i));
    return radii;
}

std::vector<double> arithmetic_radii(double r0, int count) {
    if (!(r0 > 0.0) || count < 2)
        throw GeometryError(ErrorCode::BadParams, "exhaustion needs r0 > 0 and count >= 2");
    std::vector<double> radii;
    for (int i = 1; i <= count; ++i) radii.push_back(r0 * i);
    return radii;
}

}  // namespace finitopo
