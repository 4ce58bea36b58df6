#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace finitopo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// One coordinate of the chart box. Bounds may be infinite; periodic axes
/// identify lo with hi and wrap all chart arithmetic.
struct ChartAxis {
    double lo = -kInf;
    double hi = kInf;
    bool periodic = false;

    double period() const { return hi - lo; }
};

struct Chart {
    std::vector<ChartAxis> axes;

    int dim() const { return static_cast<int>(axes.size()); }
    /// Wraps periodic coordinates into [lo, hi).
    Vec wrap(const Vec& u) const;
    /// True when u lies in the open box (periodic axes always contain u).
    bool contains(const Vec& u) const;
    /// Chart displacement from a to b, taking the short way round periodic axes.
    Vec displacement(const Vec& a, const Vec& b) const;
};

/// Position, Jacobian and second-derivative tensor of an immersion at a chart
/// point. hess stores ∂²φ/∂u_i∂u_j in column i*m + j.
struct Jet2 {
    Vec value;
    Mat jac;
    Mat hess;

    int n() const { return static_cast<int>(value.size()); }
    int m() const { return static_cast<int>(jac.cols()); }
    auto d2(int i, int j) const { return hess.col(i * m() + j); }
    auto d2(int i, int j) { return hess.col(i * m() + j); }

    static Jet2 zero(int n, int m) {
        return Jet2{Vec::Zero(n), Mat::Zero(n, m), Mat::Zero(n, m * m)};
    }
};

using JetEvaluator = std::function<Jet2(const Vec&)>;

/// Coordinate lines known to be minimizing geodesics, used by the exact
/// distance method.
enum class GeodesicLines {
    None,
    /// Every straight chart segment is a minimizing geodesic (flat charts).
    AllStraight,
    /// Lines along `meridian_axis` with the other coordinates fixed.
    Meridians,
};

struct ImmersionDef {
    int m = 0;
    int n = 0;
    Chart chart;
    JetEvaluator evaluator;
    std::string label;
    bool numeric_only = false;
    GeodesicLines geodesic_lines = GeodesicLines::None;
    int meridian_axis = -1;
};

enum class AlphaNorm { HilbertSchmidt, Operator };

struct Tolerances {
    double rank_tol = 1e-8;
    double sym_tol = 1e-10;
    double proj_tol = 1e-8;
    double h_tol = 1e-8;
    double unit_tol = 1e-10;
    double inv_tol = 1e-8;
    /// Relative step for the finite-difference curvature oracle.
    double fd_step = 1e-4;
    AlphaNorm alpha_norm = AlphaNorm::HilbertSchmidt;
};

struct MetricTensor {
    Mat g;
    Mat g_inv;
    double det_g = 0.0;

    /// g-inner product of two chart vectors.
    double inner(const Vec& a, const Vec& b) const { return a.dot(g * b); }
    double norm(const Vec& a) const { return std::sqrt(inner(a, a)); }
};

struct SecondForm {
    /// alpha[i*m + j] = normal component of ∂²φ_ij.
    std::vector<Vec> alpha;
    double norm_alpha = 0.0;
    Vec mean_curvature;
    int m = 0;

    const Vec& at(int i, int j) const { return alpha[static_cast<std::size_t>(i * m + j)]; }
    /// α(X, Y) for chart vectors X, Y.
    Vec apply(const Vec& x, const Vec& y) const;
};

Jet2 evaluate_jet(const ImmersionDef& imm, const Vec& u, const Tolerances& tol = {});
MetricTensor metric(const Jet2& jet, const Tolerances& tol = {});
SecondForm second_form(const Jet2& jet, const MetricTensor& g, const Tolerances& tol = {});

/// Chart representation g⁻¹ Jᵀ w of the tangential part of an ambient vector.
Vec tangent_coordinates(const Jet2& jet, const MetricTensor& g, const Vec& ambient);

/// g-orthonormal frame (columns) whose first vector is `first` (unit). The
/// remaining vectors come from Gram-Schmidt on `completion` columns, falling
/// back to the coordinate basis.
Mat orthonormal_frame(const MetricTensor& g, const Vec& first, const Mat& completion = Mat());

/// Ric(ν) = ⟨mH, α(ν,ν)⟩ − Σ_i |α(e_i, ν)|² over the frame whose first column is ν.
double ricci_in_frame(const SecondForm& sf, const Mat& frame);
/// Ricci curvature in direction ν through the Gauss equation. Throws NotUnit.
double ricci_extrinsic(const SecondForm& sf, const MetricTensor& g, const Vec& nu,
                       const Tolerances& tol = {});
/// Coordinate matrix of the Ricci form, Ric_ij = ⟨mH, α_ij⟩ − g^{kl}⟨α_ki, α_lj⟩.
Mat ricci_form(const SecondForm& sf, const MetricTensor& g);
/// Smallest value of Ric(ν, ν) over g-unit ν.
double ricci_min(const SecondForm& sf, const MetricTensor& g);

/// Independent Ricci oracle: curvature tensor of the induced metric from
/// central differences of the metric coefficients only. Throws StepTooLarge
/// when the stencil leaves a bounded chart.
double ricci_intrinsic(const ImmersionDef& imm, const Vec& u, const Vec& nu,
                       const Tolerances& tol = {});

/// φ − offset.
ImmersionDef translated(const ImmersionDef& imm, const Vec& offset);
/// λ·φ.
ImmersionDef scaled(const ImmersionDef& imm, double lambda);

}  // namespace finitopo
