#include "finitopo/properness.hpp"

#include "finitopo/error.hpp"
#include "finitopo/geodesic.hpp"
#include "finitopo/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace finitopo {

std::string_view to_string(TailPath path) {
    return path == TailPath::AInvariant ? "a-invariant" : "b-invariant";
}

double hessian_f(const ImmersionDef& imm, const Vec& u, const Vec& nu, const Tolerances& tol) {
    const Jet2 jet = evaluate_jet(imm, u, tol);
    const MetricTensor g = metric(jet, tol);
    if (std::abs(g.inner(nu, nu) - 1.0) > tol.unit_tol)
        throw GeometryError(ErrorCode::NotUnit, "direction is not g-unit");
    const SecondForm sf = second_form(jet, g, tol);
    return 2.0 * (1.0 + jet.value.dot(sf.apply(nu, nu)));
}

double hessian_f_min(const ImmersionDef& imm, const Vec& u, const Tolerances& tol) {
    const Jet2 jet = evaluate_jet(imm, u, tol);
    const MetricTensor g = metric(jet, tol);
    const SecondForm sf = second_form(jet, g, tol);
    const int m = jet.m();
    Mat F(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) F(i, j) = jet.value.dot(sf.at(i, j));
    F = 0.5 * (F + F.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(F, g.g, Eigen::EigenvaluesOnly);
    return 2.0 * (1.0 + es.eigenvalues().minCoeff());
}

double hessian_f_oracle(const ImmersionDef& imm, const Vec& u, const Vec& nu, double h, const Tolerances& tol) {
    auto f_at = [&](double s) {
        if (s == 0.0) return evaluate_jet(imm, u, tol).value.squaredNorm();
        const GeodesicPath path = shoot_geodesic(imm, u, nu, s, 1e-13, tol);
        return evaluate_jet(imm, path.samples.back().u, tol).value.squaredNorm();
    };
    const double fm2 = f_at(-2 * h), fm1 = f_at(-h), f0 = f_at(0), fp1 = f_at(h), fp2 = f_at(2 * h);
    return (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h);
}

namespace {

HessBoundData ball_constants(const ImmersionDef& imm, const Vec& p, const std::vector<double>& radii,
                             const std::vector<double>& tail_values, const LimitVerdict& verdict,
                             const SurfaceSamples& samples, TailPath path, const Tolerances& tol) {
    const char* what = path == TailPath::AInvariant ? "a_i" : "sqrt(-b_i)";
    if (verdict.kind == Verdict::Diverging)
        throw GeometryError(ErrorCode::NotApplicable, std::string(what) + " diverge");
    if (verdict.kind == Verdict::Converging && !(verdict.limit < 1.0 || path == TailPath::BInvariant))
        throw GeometryError(ErrorCode::NotApplicable, "limit of a_i is not below 1");
    const int i = first_bounded_tail(tail_values);
    if (i < 0) throw GeometryError(ErrorCode::NotApplicable, std::string("no tail with ") + what + " < 1");

    HessBoundData hb;
    hb.p = p;
    hb.path = path;
    hb.tail_index = i;
    hb.R0 = radii[static_cast<std::size_t>(i)];
    hb.c = 0.0;
    for (std::size_t j = static_cast<std::size_t>(i); j < tail_values.size(); ++j)
        if (std::isfinite(tail_values[j])) hb.c = std::max(hb.c, tail_values[j]);
    hb.offset = evaluate_jet(imm, p, tol).value;
    const ImmersionDef centred = translated(imm, hb.offset);

    const SampleGrid& grid = *samples.field.grid;
    std::vector<std::size_t> ball;
    for (std::size_t f = 0; f < grid.size(); ++f)
        if (samples.nodes[f].valid && samples.nodes[f].rho <= hb.R0) ball.push_back(f);
    std::vector<double> hmin(ball.size(), kInf);
    parallel_for(ball.size(), [&](std::size_t k) {
        try {
            hmin[k] = hessian_f_min(centred, grid.node(ball[k]), tol);
        } catch (const GeometryError&) {
        }
    });
    hb.b = hessian_f_min(centred, p, tol);
    for (double v : hmin) hb.b = std::min(hb.b, v);
    hb.ball_samples = ball.size() + 1;
    return hb;
}

}  // namespace

HessBoundData tail_constants(const ImmersionDef& imm, const Vec& p, const AEstimate& aest,
                             const SurfaceSamples& samples, const Tolerances& tol) {
    return ball_constants(imm, p, aest.radii, aest.a, aest.verdict, samples, TailPath::AInvariant, tol);
}

HessBoundData tail_constants_minimal(const ImmersionDef& imm, const Vec& p, const BEstimate& best,
                                     const SurfaceSamples& samples, const Tolerances& tol) {
    if (best.verdict.kind == Verdict::Converging && !(best.verdict.limit > -1.0))
        throw GeometryError(ErrorCode::NotApplicable, "limit of b_i is not above -1");
    std::vector<double> c(best.b.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = std::isfinite(best.b[i]) ? std::sqrt(std::max(0.0, -best.b[i])) : best.b[i];
    return ball_constants(imm, p, best.radii, c, best.verdict, samples, TailPath::BInvariant, tol);
}

// ---------------------------------------------------------------------------

GProfile::GProfile(double f0, double grad0, std::vector<Piece> pieces)
    : f0_(f0), grad0_(grad0), pieces_(std::move(pieces)) {
    if (pieces_.empty() || pieces_.front().start != 0.0)
        throw GeometryError(ErrorCode::BadParams, "profile must start at t = 0");
    for (std::size_t k = 1; k < pieces_.size(); ++k)
        if (!(pieces_[k].start > pieces_[k - 1].start))
            throw GeometryError(ErrorCode::BadParams, "profile breakpoints must increase");
    if (pieces_.back().slope != 0.0)
        throw GeometryError(ErrorCode::BadParams, "the unbounded last piece must be constant");
    double G = f0_, D = -grad0_;
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
        G_start_.push_back(G);
        dG_start_.push_back(D);
        if (k + 1 < pieces_.size()) {
            const Piece& pc = pieces_[k];
            const double tau = pieces_[k + 1].start - pc.start;
            G += D * tau + pc.value * tau * tau / 2 + pc.slope * tau * tau * tau / 6;
            D += pc.value * tau + pc.slope * tau * tau / 2;
        }
    }
}

GProfile GProfile::two_piece(double f0, double grad0, double b, double R0, double c) {
    return GProfile(f0, grad0, {Piece{0.0, b, 0.0}, Piece{R0, 2.0 * (1.0 - c), 0.0}});
}

std::size_t GProfile::piece_of(double t) const {
    std::size_t k = 0;
    while (k + 1 < pieces_.size() && t >= pieces_[k + 1].start) ++k;
    return k;
}

double GProfile::g(double t) const {
    const Piece& pc = pieces_[piece_of(t)];
    return pc.value + pc.slope * (t - pc.start);
}

double GProfile::G(double t) const {
    const std::size_t k = piece_of(t);
    const Piece& pc = pieces_[k];
    const double tau = t - pc.start;
    return G_start_[k] + dG_start_[k] * tau + pc.value * tau * tau / 2 + pc.slope * tau * tau * tau / 6;
}

double GProfile::dG(double t) const {
    const std::size_t k = piece_of(t);
    const Piece& pc = pieces_[k];
    const double tau = t - pc.start;
    return dG_start_[k] + pc.value * tau + pc.slope * tau * tau / 2;
}

PropositionResult proposition_check(const GProfile& gp) {
    PropositionResult res;
    const auto& pieces = gp.pieces();
    const GProfile::Piece& last = pieces.back();
    const double D_last = gp.dG(last.start);
    if (last.value > 0.0) {
        res.proper = res.bounded_below = true;
    } else if (last.value == 0.0) {
        res.proper = D_last > 0.0;
        res.bounded_below = D_last >= 0.0;
    }
    if (!res.bounded_below) {
        res.inf_G = -kInf;
        res.argmin_t = kInf;
        return res;
    }
    // Candidates: breakpoints and interior stationary points of each piece.
    std::vector<double> cand{0.0};
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        const GProfile::Piece& pc = pieces[k];
        const double hi = k + 1 < pieces.size() ? pieces[k + 1].start : kInf;
        if (std::isfinite(hi)) cand.push_back(hi);
        const double D = gp.dG(pc.start);
        const double a2 = pc.slope / 2, a1 = pc.value;
        std::vector<double> roots;
        if (a2 == 0.0) {
            if (a1 != 0.0) roots.push_back(-D / a1);
        } else {
            const double disc = a1 * a1 - 4 * a2 * D;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                roots.push_back((-a1 + sq) / (2 * a2));
                roots.push_back((-a1 - sq) / (2 * a2));
            }
        }
        for (double tau : roots)
            if (tau > 0.0 && pc.start + tau < hi) cand.push_back(pc.start + tau);
    }
    res.inf_G = kInf;
    for (double t : cand) {
        const double v = gp.G(t);
        if (v < res.inf_G) {
            res.inf_G = v;
            res.argmin_t = t;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------

Eq3Report eq3_check(const ImmersionDef& imm, const HessBoundData& hb, const SurfaceSamples& samples,
                    const Tolerances& tol) {
    Eq3Report rep;
    rep.b_effective = std::min(hb.b, 1.0 - hb.c);
    const GProfile sharp = GProfile::two_piece(0.0, 0.0, hb.b, hb.R0, hb.c);
    const SampleGrid& grid = *samples.field.grid;
    std::vector<double> f(grid.size(), std::numeric_limits<double>::quiet_NaN());
    parallel_for(grid.size(), [&](std::size_t k) {
        const NodeSample& s = samples.nodes[k];
        if (!s.valid || !(s.rho > hb.R0)) return;
        try {
            f[k] = (evaluate_jet(imm, grid.node(k), tol).value - hb.offset).squaredNorm();
        } catch (const GeometryError&) {
        }
    });
    auto bound = [&](double b, double rho) {
        return b * hb.R0 * rho + (1.0 - hb.c) * (rho * rho / 2 - hb.R0 * rho);
    };
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (std::isnan(f[k])) continue;
        const double rho = samples.nodes[k].rho;
        const double slack = 1e-6 * (1.0 + rho * rho);
        ++rep.samples;
        const double margin = f[k] - bound(rep.b_effective, rho);
        if (margin < -slack) ++rep.violations;
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_rho = rho;
            rep.worst_u = grid.node(k);
        }
        if (f[k] - bound(hb.b, rho) < -slack) ++rep.literal_violations;
        if (f[k] - sharp.G(rho) < -slack) ++rep.sharp_violations;
    }
    return rep;
}

namespace {

std::string fmt(const char* pattern, double x) {
    char buf[128];
    std::snprintf(buf, sizeof buf, pattern, x);
    return buf;
}

PropernessCertificate finish(const ImmersionDef& imm, HessBoundData hb, const SurfaceSamples& samples,
                             const LimitVerdict& verdict, const Tolerances& tol) {
    PropernessCertificate cert;
    cert.refinement_gap = samples.field.refinement_gap;
    cert.constants = hb;
    cert.proposition = proposition_check(GProfile::two_piece(0.0, 0.0, hb.b, hb.R0, hb.c));
    cert.eq3 = eq3_check(imm, hb, samples, tol);
    if (!(hb.c < 1.0)) {
        cert.reason = "tail constant c is not below 1";
    } else if (!cert.proposition.holds()) {
        cert.reason = "comparison profile G is not proper and bounded below";
    } else if (cert.eq3.samples == 0) {
        cert.reason = "no samples beyond R0";
    } else if (cert.eq3.violations > 0) {
        cert.reason = std::to_string(cert.eq3.violations) + " samples violate the integrated bound";
    } else {
        cert.certified = true;
    }
    cert.caveats.push_back("numerical evidence: b sampled at " + std::to_string(hb.ball_samples) +
                           " lattice points of the ball");
    cert.caveats.push_back(fmt("distances are lattice upper bounds (refinement gap %.2e)", cert.refinement_gap));
    if (verdict.kind == Verdict::Indeterminate)
        cert.caveats.push_back("tail sequence has no converged limit; c is the sampled tail maximum");
    return cert;
}

PropernessCertificate not_applicable(const Vec& p, TailPath path, const std::string& why, double gap) {
    PropernessCertificate cert;
    cert.applicable = false;
    cert.reason = "not applicable: " + why;
    cert.constants.p = p;
    cert.constants.path = path;
    cert.refinement_gap = gap;
    return cert;
}

std::string strip_code(const GeometryError& e) {
    const std::string what = e.what();
    const auto pos = what.find(": ");
    return pos == std::string::npos ? what : what.substr(pos + 2);
}

}  // namespace

PropernessCertificate certify_properness(const ImmersionDef& imm, const Vec& p, const AEstimate& aest,
                                         const SurfaceSamples& samples, const Tolerances& tol) {
    HessBoundData hb;
    try {
        hb = tail_constants(imm, p, aest, samples, tol);
    } catch (const GeometryError& e) {
        if (e.code() != ErrorCode::NotApplicable) throw;
        return not_applicable(p, TailPath::AInvariant, strip_code(e), samples.field.refinement_gap);
    }
    return finish(imm, hb, samples, aest.verdict, tol);
}

PropernessCertificate certify_properness_minimal(const ImmersionDef& imm, const Vec& p, const BEstimate& best,
                                                 const SurfaceSamples& samples, const Tolerances& tol) {
    for (const auto& s : samples.nodes)
        if (s.valid && s.mean_curvature > tol.h_tol)
            throw GeometryError(ErrorCode::NotMinimal, imm.label + " is not minimal on the sampled window");
    HessBoundData hb;
    try {
        hb = tail_constants_minimal(imm, p, best, samples, tol);
    } catch (const GeometryError& e) {
        if (e.code() != ErrorCode::NotApplicable) throw;
        return not_applicable(p, TailPath::BInvariant, strip_code(e), samples.field.refinement_gap);
    }
    return finish(imm, hb, samples, best.verdict, tol);
}

}  // namespace finitopo
