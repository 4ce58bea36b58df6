#include "finitopo/immersion.hpp"

#include "finitopo/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace finitopo {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::OutOfChart: return "OutOfChart";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::NotUnit: return "NotUnit";
        case ErrorCode::StepTooLarge: return "StepTooLarge";
        case ErrorCode::LeftChart: return "LeftChart";
        case ErrorCode::Unreachable: return "Unreachable";
        case ErrorCode::ShootUnsupported: return "ShootUnsupported";
        case ErrorCode::EmptyTail: return "EmptyTail";
        case ErrorCode::NotMinimal: return "NotMinimal";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::NotApplicable: return "NotApplicable";
        case ErrorCode::NoIntersection: return "NoIntersection";
        case ErrorCode::AllTangential: return "AllTangential";
        case ErrorCode::CriticalPoint: return "CriticalPoint";
        case ErrorCode::PsiFloor: return "PsiFloor";
        case ErrorCode::UnknownSurface: return "UnknownSurface";
        case ErrorCode::BadParams: return "BadParams";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Vec Chart::wrap(const Vec& u) const {
    Vec w = u;
    for (int k = 0; k < dim(); ++k) {
        const ChartAxis& ax = axes[static_cast<std::size_t>(k)];
        if (!ax.periodic) continue;
        const double p = ax.period();
        double x = std::fmod(w[k] - ax.lo, p);
        if (x < 0.0) x += p;
        if (x >= p) x -= p;
        w[k] = ax.lo + x;
    }
    return w;
}

bool Chart::contains(const Vec& u) const {
    if (u.size() != dim()) return false;
    for (int k = 0; k < dim(); ++k) {
        const ChartAxis& ax = axes[static_cast<std::size_t>(k)];
        if (!std::isfinite(u[k])) return false;
        if (ax.periodic) continue;
        if (!(u[k] > ax.lo && u[k] < ax.hi)) return false;
    }
    return true;
}

Vec Chart::displacement(const Vec& a, const Vec& b) const {
    Vec d = b - a;
    for (int k = 0; k < dim(); ++k) {
        const ChartAxis& ax = axes[static_cast<std::size_t>(k)];
        if (!ax.periodic) continue;
        const double p = ax.period();
        d[k] = std::remainder(d[k], p);
    }
    return d;
}

Vec SecondForm::apply(const Vec& x, const Vec& y) const {
    Vec out = Vec::Zero(alpha.front().size());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out += (x[i] * y[j]) * at(i, j);
    return out;
}

Jet2 evaluate_jet(const ImmersionDef& imm, const Vec& u, const Tolerances& tol) {
    if (!imm.chart.contains(u)) {
        std::ostringstream os;
        os << "chart point (" << u.transpose() << ") outside the chart of " << imm.label;
        throw GeometryError(ErrorCode::OutOfChart, os.str());
    }
    Jet2 jet = imm.evaluator(imm.chart.wrap(u));
    const int m = imm.m;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const Vec avg = 0.5 * (jet.d2(i, j) + jet.d2(j, i));
            jet.d2(i, j) = avg;
            jet.d2(j, i) = avg;
        }
    }
    const Mat g = jet.jac.transpose() * jet.jac;
    const double lambda_min = Eigen::SelfAdjointEigenSolver<Mat>(g, Eigen::EigenvaluesOnly)
                                  .eigenvalues()
                                  .minCoeff();
    if (!(lambda_min > tol.rank_tol * tol.rank_tol)) {
        std::ostringstream os;
        os << "Jacobian of " << imm.label << " loses rank at (" << u.transpose() << ")";
        throw GeometryError(ErrorCode::RankDeficient, os.str());
    }
    return jet;
}

MetricTensor metric(const Jet2& jet, const Tolerances& tol) {
    MetricTensor mt;
    mt.g = jet.jac.transpose() * jet.jac;
    const int m = jet.m();
    mt.det_g = mt.g.determinant();
    if (!(mt.det_g >= std::pow(tol.rank_tol, 2 * m)))
        throw GeometryError(ErrorCode::RankDeficient, "metric determinant below rank tolerance");
    mt.g_inv = mt.g.ldlt().solve(Mat::Identity(m, m));
    return mt;
}

Vec tangent_coordinates(const Jet2& jet, const MetricTensor& g, const Vec& ambient) {
    return g.g_inv * (jet.jac.transpose() * ambient);
}

namespace {

// sup over g-unit X of |α(X,X)|, by fixed-point ascent from several starts in
// an orthonormal frame.
double operator_norm(const SecondForm& sf, const MetricTensor& g) {
    const int m = sf.m;
    const Mat frame = orthonormal_frame(g, Vec::Unit(m, 0) / std::sqrt(g.g(0, 0)));
    std::vector<Vec> a(static_cast<std::size_t>(m * m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a[static_cast<std::size_t>(i * m + j)] =
            sf.apply(frame.col(i), frame.col(j));
    auto form = [&](const Vec& x) {
        Vec out = Vec::Zero(a.front().size());
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) out += x[i] * x[j] * a[static_cast<std::size_t>(i * m + j)];
        return out;
    };
    std::vector<Vec> starts;
    for (int i = 0; i < m; ++i) {
        starts.push_back(Vec::Unit(m, i));
        for (int j = i + 1; j < m; ++j) {
            starts.push_back((Vec::Unit(m, i) + Vec::Unit(m, j)).normalized());
            starts.push_back((Vec::Unit(m, i) - Vec::Unit(m, j)).normalized());
        }
    }
    double best = 0.0;
    for (Vec x : starts) {
        for (int it = 0; it < 200; ++it) {
            const Vec ax = form(x);
            Vec grad = Vec::Zero(m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) grad[i] += ax.dot(a[static_cast<std::size_t>(i * m + j)]) * x[j];
            if (grad.norm() == 0.0) break;
            const Vec next = grad.normalized();
            const bool done = (next - x).norm() < 1e-14;
            x = next;
            if (done) break;
        }
        best = std::max(best, form(x).norm());
    }
    return best;
}

}  // namespace

SecondForm second_form(const Jet2& jet, const MetricTensor& g, const Tolerances& tol) {
    const int m = jet.m();
    const int n = jet.n();
    SecondForm sf;
    sf.m = m;
    const Eigen::HouseholderQR<Mat> qr(jet.jac);
    const Mat q = qr.householderQ() * Mat::Identity(n, m);
    sf.alpha.resize(static_cast<std::size_t>(m * m));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const Vec h = jet.d2(i, j);
            sf.alpha[static_cast<std::size_t>(i * m + j)] = h - q * (q.transpose() * h);
        }
    }
    double hs2 = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l)
                    hs2 += g.g_inv(i, k) * g.g_inv(j, l) * sf.at(i, j).dot(sf.at(k, l));
    sf.mean_curvature = Vec::Zero(n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) sf.mean_curvature += g.g_inv(i, j) * sf.at(i, j);
    sf.mean_curvature /= m;
    sf.norm_alpha = tol.alpha_norm == AlphaNorm::HilbertSchmidt ? std::sqrt(std::max(hs2, 0.0))
                                                                : operator_norm(sf, g);
    return sf;
}

Mat orthonormal_frame(const MetricTensor& g, const Vec& first, const Mat& completion) {
    const int m = static_cast<int>(first.size());
    Mat frame(m, m);
    frame.col(0) = first / g.norm(first);
    int filled = 1;
    auto try_add = [&](Vec v) {
        for (int k = 0; k < filled; ++k) v -= g.inner(frame.col(k), v) * frame.col(k);
        const double len = g.norm(v);
        if (len < 1e-8) return;
        frame.col(filled++) = v / len;
    };
    for (int c = 0; c < completion.cols() && filled < m; ++c) try_add(completion.col(c));
    for (int k = 0; k < m && filled < m; ++k) try_add(Vec::Unit(m, k));
    return frame;
}

double ricci_in_frame(const SecondForm& sf, const Mat& frame) {
    const Vec nu = frame.col(0);
    const Vec a_nn = sf.apply(nu, nu);
    double ric = (sf.m * sf.mean_curvature).dot(a_nn);
    for (int i = 0; i < frame.cols(); ++i) ric -= sf.apply(frame.col(i), nu).squaredNorm();
    return ric;
}

double ricci_extrinsic(const SecondForm& sf, const MetricTensor& g, const Vec& nu,
                       const Tolerances& tol) {
    const double len2 = g.inner(nu, nu);
    if (std::abs(len2 - 1.0) > tol.unit_tol) {
        std::ostringstream os;
        os << "|nu|_g^2 = " << len2;
        throw GeometryError(ErrorCode::NotUnit, os.str());
    }
    return ricci_in_frame(sf, orthonormal_frame(g, nu));
}

Mat ricci_form(const SecondForm& sf, const MetricTensor& g) {
    const int m = sf.m;
    const Vec mh = m * sf.mean_curvature;
    Mat ric(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            double v = mh.dot(sf.at(i, j));
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) v -= g.g_inv(k, l) * sf.at(k, i).dot(sf.at(l, j));
            ric(i, j) = v;
        }
    }
    return 0.5 * (ric + ric.transpose());
}

double ricci_min(const SecondForm& sf, const MetricTensor& g) {
    const Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(ricci_form(sf, g), g.g,
                                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

namespace {

using Tensor3 = std::vector<Mat>;  // t[a](b, c)

Mat metric_only(const ImmersionDef& imm, const Vec& u) {
    const Jet2 jet = imm.evaluator(imm.chart.wrap(u));
    return jet.jac.transpose() * jet.jac;
}

}  // namespace

double ricci_intrinsic(const ImmersionDef& imm, const Vec& u, const Vec& nu, const Tolerances& tol) {
    const int m = imm.m;
    Vec h(m);
    for (int k = 0; k < m; ++k) h[k] = tol.fd_step * std::max(1.0, std::abs(u[k]));
    for (int k = 0; k < m; ++k) {
        for (double sgn : {-2.0, 2.0}) {
            Vec x = u;
            x[k] += sgn * h[k];
            if (!imm.chart.contains(x))
                throw GeometryError(ErrorCode::StepTooLarge, "difference stencil leaves the chart");
        }
    }
    {
        const MetricTensor g = metric(evaluate_jet(imm, u, tol), tol);
        if (std::abs(g.inner(nu, nu) - 1.0) > tol.unit_tol)
            throw GeometryError(ErrorCode::NotUnit, "direction is not g-unit");
    }

    // Christoffel symbols Γ^a_bc at x from centred differences of g.
    auto christoffel_at = [&](const Vec& x) {
        const Mat g = metric_only(imm, x);
        const Mat g_inv = g.inverse();
        std::vector<Mat> dg(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) {
            Vec xp = x, xm = x;
            xp[k] += h[k];
            xm[k] -= h[k];
            dg[static_cast<std::size_t>(k)] = (metric_only(imm, xp) - metric_only(imm, xm)) / (2.0 * h[k]);
        }
        Tensor3 gamma(static_cast<std::size_t>(m), Mat::Zero(m, m));
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                for (int c = 0; c < m; ++c) {
                    double s = 0.0;
                    for (int l = 0; l < m; ++l)
                        s += g_inv(a, l) * (dg[static_cast<std::size_t>(b)](c, l) +
                                            dg[static_cast<std::size_t>(c)](b, l) -
                                            dg[static_cast<std::size_t>(l)](b, c));
                    gamma[static_cast<std::size_t>(a)](b, c) = 0.5 * s;
                }
        return gamma;
    };

    const Tensor3 gamma = christoffel_at(u);
    std::vector<Tensor3> dgamma(static_cast<std::size_t>(m));  // dgamma[d][a](b,c) = ∂_d Γ^a_bc
    for (int d = 0; d < m; ++d) {
        Vec xp = u, xm = u;
        xp[d] += h[d];
        xm[d] -= h[d];
        const Tensor3 gp = christoffel_at(xp), gm = christoffel_at(xm);
        Tensor3 diff(static_cast<std::size_t>(m));
        for (int a = 0; a < m; ++a)
            diff[static_cast<std::size_t>(a)] =
                (gp[static_cast<std::size_t>(a)] - gm[static_cast<std::size_t>(a)]) / (2.0 * h[d]);
        dgamma[static_cast<std::size_t>(d)] = diff;
    }
    auto G = [&](int a, int b, int c) { return gamma[static_cast<std::size_t>(a)](b, c); };
    auto dG = [&](int d, int a, int b, int c) {
        return dgamma[static_cast<std::size_t>(d)][static_cast<std::size_t>(a)](b, c);
    };
    // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb};
    // Ric_{bd} = R^a_{bad}.
    Mat ric = Mat::Zero(m, m);
    for (int b = 0; b < m; ++b)
        for (int d = 0; d < m; ++d) {
            double s = 0.0;
            for (int a = 0; a < m; ++a) {
                s += dG(a, a, d, b) - dG(d, a, a, b);
                for (int e = 0; e < m; ++e) s += G(a, a, e) * G(e, d, b) - G(a, d, e) * G(e, a, b);
            }
            ric(b, d) = s;
        }
    return nu.dot(ric * nu);
}

ImmersionDef translated(const ImmersionDef& imm, const Vec& offset) {
    ImmersionDef out = imm;
    out.evaluator = [inner = imm.evaluator, offset](const Vec& u) {
        Jet2 j = inner(u);
        j.value -= offset;
        return j;
    };
    return out;
}

ImmersionDef scaled(const ImmersionDef& imm, double lambda) {
    ImmersionDef out = imm;
    out.label = imm.label + " (scaled)";
    out.evaluator = [inner = imm.evaluator, lambda](const Vec& u) {
        Jet2 j = inner(u);
        j.value *= lambda;
        j.jac *= lambda;
        j.hess *= lambda;
        return j;
    };
    return out;
}

}  // namespace finitopo
