#pragma once

#include "finitopo/immersion.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace finitopo {

/// Christoffel symbols of the induced metric: gamma[k](i, j) = Γ^k_ij =
/// g^{kl}⟨∂²φ_ij, ∂_lφ⟩.
std::vector<Mat> christoffels(const Jet2& jet, const MetricTensor& g);

struct GeodesicSample {
    double s = 0.0;
    Vec u;
    Vec velocity;
};

struct GeodesicPath {
    std::vector<GeodesicSample> samples;
    double total_length = 0.0;
    /// max | |u'|_g − 1 | over the samples.
    double max_speed_drift = 0.0;
};

/// Integrates u'' + Γ(u', u') = 0 by arc length from (u0, v0) over [0, length]
/// (length may be negative to run backwards). Throws NotUnit, LeftChart.
GeodesicPath shoot_geodesic(const ImmersionDef& imm, const Vec& u0, const Vec& v0, double length,
                            double tol = 1e-10, const Tolerances& tols = {});

// ---------------------------------------------------------------------------
// Sampling lattices and graph distances

enum class Spacing { Uniform, Geometric, Sinh };

struct AxisGrid {
    double lo = 0.0;
    double hi = 1.0;
    int nodes = 2;
    Spacing spacing = Spacing::Uniform;
    /// Scale a of the x = a·sinh(w) map.
    double sinh_scale = 1.0;
};

struct GridSpec {
    std::vector<AxisGrid> axes;
    /// Stencil connects each node to the primitive lattice offsets with max-norm
    /// ≤ stencil_radius (1 → 8 neighbours, 2 → 16, 4 → 48 in two dimensions).
    int stencil_radius = 4;
    int max_refinements = 1;
    double dist_tol = 1e-3;

    /// Same window with every cell halved.
    GridSpec refined(const Chart& chart) const;
};

/// Tensor-product lattice of chart points over a window of the chart.
/// Periodic chart axes span a full period and wrap.
class SampleGrid {
public:
    SampleGrid(const ImmersionDef& imm, const GridSpec& spec);

    int dim() const { return static_cast<int>(counts_.size()); }
    std::size_t size() const { return size_; }
    int count(int axis) const { return counts_[static_cast<std::size_t>(axis)]; }
    bool periodic(int axis) const { return periodic_[static_cast<std::size_t>(axis)]; }
    const GridSpec& spec() const { return spec_; }

    /// Chart coordinate at a (possibly fractional) lattice index.
    double coordinate(int axis, double index) const;
    /// d coordinate / d index.
    double coordinate_rate(int axis, double index) const;
    /// Fractional lattice index of a chart coordinate (inverse of coordinate()).
    double index_of(int axis, double x) const;

    std::vector<int> multi_index(std::size_t flat) const;
    /// Flat index of a multi-index, wrapping periodic axes; -1 if outside.
    std::int64_t flat_index(const std::vector<int>& idx) const;
    Vec node(std::size_t flat) const;

    /// True if the node lies on an outer face of the window that truncates the
    /// chart (as opposed to a face that is the chart's own boundary).
    bool on_truncation_face(std::size_t flat) const;

private:
    GridSpec spec_;
    std::vector<int> counts_;
    std::vector<bool> periodic_;
    std::vector<bool> truncates_lo_, truncates_hi_;
    std::vector<double> w_lo_, w_hi_;
    std::size_t size_ = 0;
};

enum class DistanceMethod { Graph, Shoot };

/// Intrinsic distance ρ from a base point, sampled on a lattice.
struct DistanceField {
    Vec base;
    std::shared_ptr<const SampleGrid> grid;
    std::vector<double> rho;
    DistanceMethod method = DistanceMethod::Graph;
    /// Max relative change of ρ between the last two refinement levels.
    double refinement_gap = 0.0;
    int refinements = 0;
    /// Smallest ρ on the window faces that truncate the chart (kInf if none).
    double window_reach = kInf;

    /// ρ at an arbitrary chart point by one straight segment from the best
    /// nearby node (an upper bound consistent with the graph).
    double extend(const ImmersionDef& imm, const Vec& x, const Tolerances& tol = {}) const;
};

/// Graph distance field: Dijkstra on the lattice stencil, edge weight = metric
/// length of the straight segment by Simpson quadrature; refined by halving the
/// cells up to spec.max_refinements times while the change exceeds dist_tol.
DistanceField compute_distance_field(const ImmersionDef& imm, const Vec& p, const GridSpec& spec,
                                     const Tolerances& tol = {});

/// Graph field on a single lattice, without refinement.
DistanceField graph_distance_field(const ImmersionDef& imm, const Vec& p, const GridSpec& spec,
                                   const Tolerances& tol = {});

/// Metric length of the straight chart segment a → b (adaptive Gauss-Legendre).
double segment_length(const ImmersionDef& imm, const Vec& a, const Vec& b,
                      const Tolerances& tol = {});

/// ρ(p, x). Graph requires a lattice spec; Shoot integrates along a declared
/// geodesic coordinate line and throws ShootUnsupported otherwise.
double distance(const ImmersionDef& imm, const Vec& p, const Vec& x, DistanceMethod method,
                const GridSpec* spec = nullptr, const Tolerances& tol = {});

/// Geodesic-ball radii R_i = r0·2^(i−1), i = 1..count.
std::vector<double> exhaustion_radii(double r0, int count);
/// R_i = r0·i, the alternative exhaustion used to test exhaustion independence.
std::vector<double> arithmetic_radii(double r0, int count);

}  // namespace finitopo
