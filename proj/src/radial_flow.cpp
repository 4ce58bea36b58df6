#include "finitopo/radial_flow.hpp"

#include "finitopo/error.hpp"
#include "finitopo/ode.hpp"
#include "finitopo/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace finitopo {

std::string_view to_string(FlowTermination t) {
    switch (t) {
        case FlowTermination::ReachedTmax: return "reached_tmax";
        case FlowTermination::PsiFloor: return "psi_floor";
        case FlowTermination::LeftChart: return "left_chart";
    }
    return "reached_tmax";
}

RadialField radial_unit_field(const Jet2& jet, const MetricTensor& g, double psi_min) {
    RadialField f;
    f.R = jet.value.norm();
    if (!(f.R > 0.0)) throw GeometryError(ErrorCode::CriticalPoint, "R vanishes (base point)");
    f.eta = jet.value / f.R;
    f.grad = tangent_coordinates(jet, g, f.eta);
    f.psi = g.norm(f.grad);
    if (!(f.psi > psi_min)) throw GeometryError(ErrorCode::CriticalPoint, "psi below the floor");
    f.nu = f.grad / f.psi;
    // |P_T η| ≤ |η| = 1; rounding can push it one ulp past.
    f.psi = std::min(f.psi, 1.0);
    f.eta_normal = f.eta - jet.jac * f.grad;
    f.sin_theta = f.eta_normal.norm();
    return f;
}

RadialField radial_unit_field(const Jet2& jet, double psi_min) {
    return radial_unit_field(jet, metric(jet), psi_min);
}

namespace {

// Unit normal of a hypersurface, oriented by the chart: N_k ∝ (−1)^k det(J
// without row k). Empty for higher codimension.
Vec oriented_normal(const Jet2& jet) {
    const int n = jet.n(), m = jet.m();
    if (n != m + 1) return Vec();
    Vec N(n);
    for (int k = 0; k < n; ++k) {
        Mat minor(m, m);
        for (int i = 0, row = 0; i < n; ++i) {
            if (i == k) continue;
            minor.row(row++) = jet.jac.row(i);
        }
        N[k] = ((k % 2) ? -1.0 : 1.0) * minor.determinant();
    }
    return N / N.norm();
}

Vec second_derivative_along(const Jet2& jet, const Vec& nu) {
    const int m = jet.m();
    Vec out = Vec::Zero(jet.n());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out += (nu[i] * nu[j]) * jet.d2(i, j);
    return out;
}

struct FlowPoint {
    RadialField field;
    double sin_signed = 0.0;
    double q = 0.0;  // ⟨α(ν,ν), ν*⟩ with the signed orientation
    bool below_floor = false;
    double alpha_norm = 0.0;
};

FlowPoint flow_point(const ImmersionDef& imm, const Vec& u, const FlowOptions& opts, const Tolerances& tol,
                     bool want_alpha) {
    FlowPoint fp;
    const Jet2 jet = evaluate_jet(imm, u, tol);
    const MetricTensor g = metric(jet, tol);
    try {
        fp.field = radial_unit_field(jet, g, opts.psi_min);
    } catch (const GeometryError& e) {
        throw GeometryError(ErrorCode::PsiFloor, "psi fell below psi_min");
    }
    const Vec d2 = second_derivative_along(jet, fp.field.nu);
    const Vec N = oriented_normal(jet);
    if (N.size() > 0) {
        fp.sin_signed = fp.field.eta.dot(N);
        fp.q = d2.dot(N);
        fp.below_floor = std::abs(fp.sin_signed) <= opts.nu_star_floor;
    } else {
        fp.sin_signed = fp.field.sin_theta;
        fp.below_floor = fp.field.sin_theta <= opts.nu_star_floor;
        fp.q = fp.below_floor ? 0.0 : d2.dot(fp.field.eta_normal) / fp.field.sin_theta;
    }
    if (want_alpha) fp.alpha_norm = second_form(jet, g, tol).norm_alpha;
    return fp;
}

}  // namespace

// ---------------------------------------------------------------------------

LevelSetSeeds extract_level_set(const ImmersionDef& imm, const Vec& p, double r, int ray_count,
                                const FlowOptions& opts, const Tolerances& tol) {
    if (ray_count < 1) throw GeometryError(ErrorCode::BadParams, "ray_count must be positive");
    const int m = imm.m;
    struct Curve {
        Vec origin;
        Vec dir;
        int ring;
    };
    std::vector<Curve> curves;
    int periodic_axis = -1;
    for (int k = 0; k < m; ++k)
        if (imm.chart.axes[static_cast<std::size_t>(k)].periodic) periodic_axis = k;
    if (m == 2 && periodic_axis >= 0 && imm.geodesic_lines == GeodesicLines::Meridians &&
        imm.meridian_axis != periodic_axis) {
        const ChartAxis& ax = imm.chart.axes[static_cast<std::size_t>(periodic_axis)];
        for (int ring = 0; ring < 2; ++ring) {
            for (int k = 0; k < ray_count; ++k) {
                Vec origin = p;
                origin[periodic_axis] = p[periodic_axis] + ax.period() * k / ray_count;
                Vec dir = Vec::Zero(m);
                dir[imm.meridian_axis] = ring == 0 ? 1.0 : -1.0;
                curves.push_back({imm.chart.wrap(origin), dir, ring});
            }
        }
    } else if (m == 2) {
        for (int k = 0; k < ray_count; ++k) {
            const double a = 2.0 * std::numbers::pi * k / ray_count;
            Vec dir(2);
            dir << std::cos(a), std::sin(a);
            curves.push_back({p, dir, 0});
        }
    } else {
        // Golden-angle spiral directions on the unit sphere of the chart.
        for (int k = 0; k < ray_count; ++k) {
            Vec dir = Vec::Zero(m);
            const double z = 1.0 - 2.0 * (k + 0.5) / ray_count;
            const double phi = k * std::numbers::pi * (3.0 - std::sqrt(5.0));
            dir[0] = std::sqrt(1 - z * z) * std::cos(phi);
            if (m > 1) dir[1] = std::sqrt(1 - z * z) * std::sin(phi);
            if (m > 2) dir[2] = z;
            curves.push_back({p, dir / dir.norm(), 0});
        }
    }

    LevelSetSeeds out;
    out.r = r;
    const double level_tol = opts.level_tol * r;
    auto R_at = [&](const Curve& c, double tau, bool& ok) {
        const Vec x = imm.chart.wrap(c.origin + tau * c.dir);
        ok = imm.chart.contains(x);
        if (!ok) return 0.0;
        try {
            return evaluate_jet(imm, x, tol).value.norm();
        } catch (const GeometryError&) {
            ok = false;
            return 0.0;
        }
    };
    std::size_t hits = 0;
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const Curve& c = curves[ci];
        bool ok = true;
        double tau = 0.0;
        double R = R_at(c, tau, ok);
        if (!ok) continue;
        double lo = -1.0, hi = -1.0;
        for (int step = 0; step < 200000 && tau < 1e6; ++step) {
            const double next = tau + 1e-2 * std::max(1.0, tau);
            bool ok2 = true;
            const double Rn = R_at(c, next, ok2);
            if (!ok2) break;
            if (R < r && Rn >= r) {
                lo = tau;
                hi = next;
                break;
            }
            tau = next;
            R = Rn;
        }
        if (lo < 0.0) continue;
        ++hits;
        // Bisect to the last representable bracket; level_tol only gates acceptance.
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            bool okm = true;
            const double Rm = R_at(c, mid, okm);
            if (Rm == r) {
                lo = hi = mid;
                break;
            }
            (Rm < r ? lo : hi) = mid;
        }
        const double t_hit = 0.5 * (lo + hi);
        LevelSetSeed seed;
        seed.u = imm.chart.wrap(c.origin + t_hit * c.dir);
        seed.ring = c.ring;
        seed.curve = static_cast<int>(ci);
        try {
            const Jet2 jet = evaluate_jet(imm, seed.u, tol);
            if (std::abs(jet.value.norm() - r) > level_tol) {
                ++out.discarded;
                continue;
            }
            seed.psi = radial_unit_field(jet, opts.psi_min).psi;
        } catch (const GeometryError&) {
            ++out.discarded;
            continue;
        }
        out.min_psi0 = std::min(out.min_psi0, seed.psi);
        if (out.ring_sizes.size() <= static_cast<std::size_t>(seed.ring))
            out.ring_sizes.resize(static_cast<std::size_t>(seed.ring) + 1, 0);
        ++out.ring_sizes[static_cast<std::size_t>(seed.ring)];
        out.seeds.push_back(seed);
    }
    if (hits == 0) throw GeometryError(ErrorCode::NoIntersection, "no seed curve reaches the sphere of radius r");
    if (out.seeds.empty()) throw GeometryError(ErrorCode::AllTangential, "every level-set hit is tangential");
    return out;
}

// ---------------------------------------------------------------------------

FlowTrace integrate_flow(const ImmersionDef& imm, const LevelSetSeed& seed, double r, const FlowOptions& opts,
                         const Tolerances& tol) {
    const int m = imm.m;
    FlowTrace trace;
    trace.seed = seed;
    trace.r = r;
    trace.tol = opts.tol;
    trace.t_max = opts.t_max ? *opts.t_max : opts.t_max_factor * r;

    auto record = [&](double t, const Vec& y) {
        const FlowPoint fp = flow_point(imm, y.head(m), opts, tol, true);
        FlowState s;
        s.t = t;
        s.u = y.head(m);
        s.R = fp.field.R;
        s.psi = fp.field.psi;
        s.sin_theta = fp.field.sin_theta;
        s.sin_theta_signed = fp.sin_signed;
        s.integrand = (t + r) * fp.q;
        s.accumulated = y[m];
        s.R_alpha = fp.field.R * fp.alpha_norm;
        s.below_floor = fp.below_floor;
        if (s.below_floor) ++trace.floor_steps;
        trace.states.push_back(std::move(s));
    };
    auto rhs = [&](double t, const Vec& y) {
        const FlowPoint fp = flow_point(imm, y.head(m), opts, tol, false);
        Vec dy(m + 1);
        dy.head(m) = fp.field.grad / (fp.field.psi * fp.field.psi);
        dy[m] = (t + r) * fp.q;
        return dy;
    };

    Vec y(m + 1);
    y.head(m) = seed.u;
    y[m] = 0.0;
    record(0.0, y);

    OdeOptions o;
    o.rtol = opts.tol / 100;
    o.atol = opts.tol / 100;
    o.h_max = opts.h_max_factor * r;
    o.h_init = std::min(1e-2 * r, o.h_max);
    DormandPrince dp(o);
    try {
        const OdeStatus st = dp.integrate(
            rhs, 0.0, trace.t_max, y,
            [&](double t, const Vec& state) {
                record(t, state);
                return true;
            },
            [&](const Vec& state) {
                Vec out = state;
                out.head(m) = imm.chart.wrap(state.head(m));
                return out;
            });
        if (st == OdeStatus::StepFailed) trace.termination = FlowTermination::LeftChart;
    } catch (const GeometryError& e) {
        trace.termination = e.code() == ErrorCode::PsiFloor ? FlowTermination::PsiFloor : FlowTermination::LeftChart;
    }
    trace.accepted_steps = dp.accepted_steps();
    trace.rejected_steps = dp.rejected_steps();
    return trace;
}

double check_R_affine(const FlowTrace& trace) {
    double worst = 0.0;
    for (const auto& s : trace.states) worst = std::max(worst, std::abs(s.R - (s.t + trace.r)));
    return worst;
}

double check_integrated_identity(const FlowTrace& trace) {
    if (trace.states.empty()) return 0.0;
    const double s0 = trace.states.front().sin_theta_signed;
    double worst = 0.0;
    for (const auto& s : trace.states) {
        const double rhs = (trace.r * s0 - s.accumulated) / (s.t + trace.r);
        worst = std::max(worst, std::abs(s.sin_theta_signed - rhs));
    }
    return worst;
}

double conservation_rms(const FlowTrace& trace) {
    const auto& st = trace.states;
    if (st.size() < 2) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < st.size(); ++k) {
        const double dt = st[k + 1].t - st[k].t;
        const double d = ((st[k + 1].t + trace.r) * st[k + 1].sin_theta_signed -
                          (st[k].t + trace.r) * st[k].sin_theta_signed) /
                         dt;
        const double res = d + 0.5 * (st[k].integrand + st[k + 1].integrand);
        sum += res * res;
    }
    return std::sqrt(sum / static_cast<double>(st.size() - 1));
}

double accumulator_consistency(const FlowTrace& trace) {
    const auto& st = trace.states;
    double trap = 0.0, worst = 0.0;
    for (std::size_t k = 1; k < st.size(); ++k) {
        trap += 0.5 * (st[k].t - st[k - 1].t) * (st[k].integrand + st[k - 1].integrand);
        worst = std::max(worst, std::abs(st[k].accumulated - trap) / (1.0 + std::abs(st[k].accumulated)));
    }
    return worst;
}

double angle_envelope(const FlowTrace& trace, double c, double t) {
    const double s0 = trace.states.empty() ? 0.0 : trace.states.front().sin_theta;
    return (c * t + trace.r * s0) / (t + trace.r);
}

AngleBoundResult check_angle_bound(const FlowTrace& trace, double c) {
    AngleBoundResult res;
    for (const auto& s : trace.states) {
        const double margin = angle_envelope(trace, c, s.t) + 1e-8 * (1.0 + s.t) - s.sin_theta;
        res.worst_margin = std::min(res.worst_margin, margin);
        if (margin < 0.0) ++res.violations;
        res.premise_margin = std::min(res.premise_margin, c - s.R_alpha);
    }
    res.premise_passed = !(res.premise_margin < 0.0);
    res.passed = res.violations == 0 && res.premise_passed;
    return res;
}

void write_trace_csv(const FlowTrace& trace, double c, std::ostream& os) {
    const int m = trace.states.empty() ? 0 : static_cast<int>(trace.states.front().u.size());
    os << "t";
    for (int k = 1; k <= m; ++k) os << ",u" << k;
    os << ",R,psi,sin_theta,integrand,envelope\n";
    char buf[64];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        os << buf;
    };
    for (const auto& s : trace.states) {
        put(s.t);
        for (int k = 0; k < m; ++k) {
            os << ',';
            put(s.u[k]);
        }
        for (double x : {s.R, s.psi, s.sin_theta, s.integrand, angle_envelope(trace, c, s.t)}) {
            os << ',';
            put(x);
        }
        os << '\n';
    }
}

void write_plot_data(const FlowTrace& trace, double c, std::ostream& os) {
    os << "# t sin_theta envelope\n";
    char buf[96];
    for (const auto& s : trace.states) {
        std::snprintf(buf, sizeof buf, "%.10g %.10g %.10g\n", s.t, s.sin_theta, angle_envelope(trace, c, s.t));
        os << buf;
    }
}

// ---------------------------------------------------------------------------

namespace {

struct RadialDerivs {
    double R = 0.0;
    Vec dR;
    Mat H;
    MetricTensor g;
    double psi = 0.0;
};

RadialDerivs radial_derivs(const ImmersionDef& imm, const Vec& u, const Tolerances& tol, bool hessian) {
    RadialDerivs d;
    const Jet2 jet = evaluate_jet(imm, u, tol);
    d.g = metric(jet, tol);
    d.R = jet.value.norm();
    const int m = jet.m();
    if (!(d.R > 0.0)) {
        d.dR = Vec::Zero(m);
        return d;
    }
    const Vec eta = jet.value / d.R;
    d.dR = jet.jac.transpose() * eta;
    d.psi = std::sqrt(std::max(0.0, d.dR.dot(d.g.g_inv * d.dR)));
    if (hessian) {
        d.H.resize(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                d.H(i, j) = (d.g.g(i, j) - d.dR[i] * d.dR[j]) / d.R + eta.dot(jet.d2(i, j));
        d.H = 0.5 * (d.H + d.H.transpose());
    }
    return d;
}

// Index-space distance with periodic wrap.
double index_distance(const SampleGrid& grid, const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int k = 0; k < grid.dim(); ++k) {
        double d = b[k] - a[k];
        if (grid.periodic(k)) d = std::remainder(d, static_cast<double>(grid.count(k)));
        s = std::max(s, std::abs(d));
    }
    return s;
}

Vec fractional_index(const SampleGrid& grid, const Vec& u) {
    Vec f(grid.dim());
    for (int k = 0; k < grid.dim(); ++k) f[k] = grid.index_of(k, u[k]);
    return f;
}

struct Candidate {
    Vec u;
    Vec idx;
    double psi;
    double R;
};

}  // namespace

std::vector<CriticalPoint> scan_critical_points(const ImmersionDef& imm, const Vec& p, double rho_max,
                                                const DistanceField& field, const CriticalScanOptions& opts,
                                                const Tolerances& tol) {
    const SampleGrid& grid = *field.grid;
    const int m = grid.dim();
    const std::size_t N = grid.size();

    struct NodeData {
        Vec dR;
        double psi = 0.0;
        bool valid = false;
    };
    std::vector<NodeData> nodes(N);
    parallel_for(N, [&](std::size_t f) {
        if (!(field.rho[f] <= rho_max)) return;
        try {
            const RadialDerivs d = radial_derivs(imm, grid.node(f), tol, false);
            if (!(d.R > 0.0)) return;
            nodes[f].dR = d.dR;
            nodes[f].psi = d.psi;
            nodes[f].valid = true;
        } catch (const GeometryError&) {
        }
    });

    const double scale = 1.0 + evaluate_jet(imm, p, tol).value.norm();
    const bool base_is_critical = evaluate_jet(imm, p, tol).value.norm() <= 1e-12 * scale;
    const Vec p_idx = fractional_index(grid, p);

    // Flag cells.
    const int corners = 1 << m;
    std::vector<std::size_t> flagged;
    std::vector<int> idx(static_cast<std::size_t>(m)), corner(static_cast<std::size_t>(m));
    std::vector<std::int64_t> cflat(static_cast<std::size_t>(corners));
    for (std::size_t f = 0; f < N; ++f) {
        idx = grid.multi_index(f);
        bool ok = true;
        for (int c = 0; c < corners && ok; ++c) {
            for (int k = 0; k < m; ++k) corner[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k)] + ((c >> k) & 1);
            cflat[static_cast<std::size_t>(c)] = grid.flat_index(corner);
            ok = cflat[static_cast<std::size_t>(c)] >= 0 && nodes[static_cast<std::size_t>(cflat[static_cast<std::size_t>(c)])].valid;
        }
        if (!ok) continue;
        bool low_psi = false, all_cross = true;
        for (int k = 0; k < m; ++k) {
            double lo = kInf, hi = -kInf;
            for (int c = 0; c < corners; ++c) {
                const NodeData& nd = nodes[static_cast<std::size_t>(cflat[static_cast<std::size_t>(c)])];
                lo = std::min(lo, nd.dR[k]);
                hi = std::max(hi, nd.dR[k]);
                low_psi = low_psi || nd.psi < opts.crit_tol;
            }
            all_cross = all_cross && lo <= 0.0 && hi >= 0.0;
        }
        if (low_psi || all_cross) flagged.push_back(f);
    }

    // Refine each flagged cell by damped Newton on dR = 0.
    std::vector<std::optional<Candidate>> found(flagged.size());
    parallel_for(flagged.size(), [&](std::size_t k) {
        const std::vector<int> ci = grid.multi_index(flagged[k]);
        Vec u(m);
        for (int a = 0; a < m; ++a) u[a] = grid.coordinate(a, ci[static_cast<std::size_t>(a)] + 0.5);
        u = imm.chart.wrap(u);
        if (base_is_critical && index_distance(grid, fractional_index(grid, u), p_idx) <= 2.0) return;
        try {
            RadialDerivs d = radial_derivs(imm, u, tol, true);
            double lambda = 1e-3;
            for (int it = 0; it < 100 && d.psi > 1e-12; ++it) {
                const Mat JtJ = d.H.transpose() * d.H;
                Mat A = JtJ;
                for (int a = 0; a < m; ++a) A(a, a) += lambda * std::max(JtJ(a, a), 1e-12);
                const Vec delta = A.ldlt().solve(-d.H.transpose() * d.dR);
                const Vec trial = imm.chart.wrap(u + delta);
                bool improved = false;
                if (imm.chart.contains(trial)) {
                    try {
                        RadialDerivs dt = radial_derivs(imm, trial, tol, true);
                        if (dt.R > 0.0 && dt.psi < d.psi) {
                            u = trial;
                            d = std::move(dt);
                            improved = true;
                        }
                    } catch (const GeometryError&) {
                    }
                }
                lambda = improved ? std::max(lambda / 3, 1e-12) : lambda * 4;
                if (lambda > 1e12) break;
            }
            if (!(d.psi < opts.crit_tol) || !(d.R > 0.0)) return;
            if (!(field.extend(imm, u, tol) <= rho_max)) return;
            found[k] = Candidate{u, fractional_index(grid, u), d.psi, d.R};
        } catch (const GeometryError&) {
        }
    });

    std::vector<Candidate> cands;
    for (auto& c : found)
        if (c && !(base_is_critical && index_distance(grid, c->idx, p_idx) <= 2.0)) cands.push_back(*c);

    // Single-linkage clusters in index space.
    std::vector<std::size_t> parent(cands.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (std::size_t a = 0; a < cands.size(); ++a)
        for (std::size_t b = a + 1; b < cands.size(); ++b)
            if (index_distance(grid, cands[a].idx, cands[b].idx) <= 1.5) parent[find(a)] = find(b);

    std::vector<CriticalPoint> out;
    if (base_is_critical) {
        CriticalPoint bp;
        bp.u = p;
        bp.base_point = true;
        bp.rho = 0.0;
        out.push_back(bp);
    }
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<std::size_t> root_slot(cands.size(), SIZE_MAX);
    for (std::size_t a = 0; a < cands.size(); ++a) {
        const std::size_t r = find(a);
        if (root_slot[r] == SIZE_MAX) {
            root_slot[r] = clusters.size();
            clusters.emplace_back();
        }
        clusters[root_slot[r]].push_back(a);
    }
    for (const auto& members : clusters) {
        std::size_t rep = members.front();
        for (std::size_t a : members)
            if (cands[a].psi < cands[rep].psi) rep = a;
        CriticalPoint cp;
        cp.u = cands[rep].u;
        cp.psi = cands[rep].psi;
        cp.R = cands[rep].R;
        cp.members = members.size();
        double extent = 0.0;
        for (std::size_t a : members) {
            extent = std::max(extent, index_distance(grid, cands[a].idx, cands[rep].idx));
            cp.cluster_radius = std::max(cp.cluster_radius,
                                         segment_length(imm, cands[rep].u,
                                                        cands[rep].u + imm.chart.displacement(cands[rep].u, cands[a].u), tol));
        }
        cp.rho = field.extend(imm, cp.u, tol);
        const RadialDerivs d = radial_derivs(imm, cp.u, tol, true);
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(d.H, d.g.g, Eigen::EigenvaluesOnly);
        double min_abs = kInf;
        for (int k = 0; k < m; ++k) {
            cp.hessian_eigenvalues.push_back(es.eigenvalues()[k]);
            min_abs = std::min(min_abs, std::abs(es.eigenvalues()[k]));
        }
        cp.degenerate = extent > opts.max_cluster_cells || min_abs * d.R < opts.degenerate_tol;
        out.push_back(cp);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(const char* pattern, double x) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, x);
    return buf;
}

}  // namespace

TopologyCertificate topology_certificate(const ImmersionDef& imm, const Vec& p, const std::optional<Vec>& center,
                                         const AEstimate& aest, const DistanceField& field, const FlowOptions& opts,
                                         const CriticalScanOptions& scan, const Tolerances& tol) {
    TopologyCertificate cert;
    cert.tol = opts.tol;
    const Vec phi_p = evaluate_jet(imm, p, tol).value;
    cert.center = center ? *center : phi_p;
    const double d0 = (phi_p - cert.center).norm();

    const int i = first_bounded_tail(aest.a);
    if (aest.verdict.kind == Verdict::Diverging || (aest.verdict.kind == Verdict::Converging && !(aest.verdict.limit < 1.0)) ||
        i < 0) {
        cert.applicable = false;
        cert.reason = aest.verdict.kind == Verdict::Diverging ? "not applicable: a_i diverge"
                                                               : "not applicable: no tail with a_i < 1";
        return cert;
    }
    cert.R0 = aest.radii[static_cast<std::size_t>(i)];
    for (std::size_t j = static_cast<std::size_t>(i); j < aest.a.size(); ++j)
        if (std::isfinite(aest.a[j])) cert.c = std::max(cert.c, aest.a[j]);
    cert.r = cert.R0 + d0;
    const ImmersionDef centred = translated(imm, cert.center);

    FlowOptions fo = opts;
    cert.t_max = fo.t_max ? *fo.t_max : fo.t_max_factor * cert.r;

    LevelSetSeeds seeds;
    try {
        seeds = extract_level_set(centred, p, cert.r, fo.ray_count, fo, tol);
    } catch (const GeometryError& e) {
        cert.reason = std::string("level set: ") + e.what();
        return cert;
    }
    cert.seed_count = seeds.seeds.size();
    cert.ring_sizes = seeds.ring_sizes;
    cert.min_psi0 = seeds.min_psi0;

    std::vector<FlowTrace> traces(seeds.seeds.size());
    parallel_for(seeds.seeds.size(),
                 [&](std::size_t k) { traces[k] = integrate_flow(centred, seeds.seeds[k], cert.r, fo, tol); });

    // Every flow sample satisfies R·|α| ≤ ρ·|α| with ρ > R0, so it is also a
    // sample of the tail sup; the lattice value can only underestimate it.
    double flow_c = 0.0;
    for (const auto& tr : traces)
        for (const auto& s : tr.states) flow_c = std::max(flow_c, s.R_alpha);
    if (flow_c > cert.c && flow_c < 1.0) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "c raised from the lattice value %.6g to %.6g by flow samples", cert.c, flow_c);
        cert.caveats.push_back(buf);
        cert.c = flow_c;
    }

    cert.traces.resize(traces.size());
    parallel_for(traces.size(), [&](std::size_t k) {
        const FlowTrace& tr = traces[k];
        TraceCheck& tc = cert.traces[k];
        tc.index = k;
        tc.termination = tr.termination;
        tc.t_end = tr.states.empty() ? 0.0 : tr.states.back().t;
        tc.R_affine = check_R_affine(tr);
        tc.identity = check_integrated_identity(tr);
        tc.conservation = conservation_rms(tr);
        tc.accumulator = accumulator_consistency(tr);
        tc.angle = check_angle_bound(tr, cert.c);
        tc.passed = tr.termination == FlowTermination::ReachedTmax && tc.R_affine <= 10.0 * fo.tol && tc.angle.passed;
    });
    std::size_t failed_traces = 0;
    for (const auto& tc : cert.traces) {
        cert.worst_R_affine = std::max(cert.worst_R_affine, tc.R_affine);
        cert.worst_identity = std::max(cert.worst_identity, tc.identity);
        cert.worst_conservation = std::max(cert.worst_conservation, tc.conservation);
        cert.worst_angle_margin = std::min(cert.worst_angle_margin, tc.angle.worst_margin);
        if (!tc.passed) ++failed_traces;
    }

    double rho_max = 0.0;
    for (double r : field.rho)
        if (std::isfinite(r)) rho_max = std::max(rho_max, r);
    cert.critical_points = scan_critical_points(centred, p, rho_max, field, scan, tol);
    for (auto& cp : cert.critical_points) {
        cp.inside = cp.base_point || cp.R < cert.r;
        if (cp.base_point) ++cert.base_point_clusters;
        (cp.inside ? cert.inside_count : cert.outside_count) += 1;
        if (cp.degenerate) ++cert.degenerate_count;
    }

    if (cert.degenerate_count > 0) {
        cert.reason = "degenerate critical set (base point on symmetry locus)";
        cert.caveats.push_back("R is not a Morse function for this centre; move the base point or centre off the symmetry locus");
    } else if (cert.outside_count > 0) {
        cert.reason = std::to_string(cert.outside_count) + " critical points beyond the certified sphere";
    } else if (failed_traces > 0) {
        cert.reason = std::to_string(failed_traces) + " flow traces failed their checks";
    } else {
        cert.certified = true;
    }
    cert.caveats.push_back("the angle bound is verified along " + std::to_string(cert.seed_count) +
                           " sampled flow lines only");
    cert.flow_traces = std::move(traces);
    cert.caveats.push_back(fmt("critical points are searched on the lattice window up to rho = %.4g", rho_max));
    return cert;
}

FlowTrace single_trace(const ImmersionDef& imm, const Vec& p, const Vec& center, double r, std::size_t seed_index,
                       const FlowOptions& opts, const Tolerances& tol) {
    const ImmersionDef centred = translated(imm, center);
    const LevelSetSeeds seeds = extract_level_set(centred, p, r, opts.ray_count, opts, tol);
    if (seed_index >= seeds.seeds.size())
        throw GeometryError(ErrorCode::BadParams, "seed index " + std::to_string(seed_index) + " out of range (" +
                                                      std::to_string(seeds.seeds.size()) + " seeds)");
    return integrate_flow(centred, seeds.seeds[seed_index], r, opts, tol);
}

}  // namespace finitopo
