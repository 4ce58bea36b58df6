#pragma once

#include "finitopo/geodesic.hpp"
#include "finitopo/immersion.hpp"

#include <string>
#include <vector>

namespace finitopo {

enum class Verdict { Converging, Diverging, Indeterminate };
std::string_view to_string(Verdict v);

enum class SequenceKind { A, B };

struct LimitVerdict {
    Verdict kind = Verdict::Indeterminate;
    /// Last value when converging, NaN otherwise.
    double limit = 0.0;
};

struct ClassifyOptions {
    double conv_tol = 0.02;
    double div_cap = 10.0;
    double noise_tol = 0.01;
};

/// Converging when the last three values agree pairwise within
/// conv_tol·(1 + |last|); diverging when the last three move strictly away
/// from the bound (up for a, down for b) and |last| > div_cap. Throws TooShort
/// for fewer than four values.
LimitVerdict classify_limit(const std::vector<double>& seq, SequenceKind kind, const ClassifyOptions& opts = {});

/// Pointwise data on the nodes of a distance lattice.
struct NodeSample {
    double rho = kInf;
    double alpha_norm = 0.0;
    /// Smallest Ricci curvature over unit directions.
    double ricci_min = 0.0;
    double mean_curvature = 0.0;
    bool valid = false;
};

struct SurfaceSamples {
    DistanceField field;
    std::vector<NodeSample> nodes;
};

/// Distance field from p plus curvature data at every lattice node.
SurfaceSamples sample_surface(const ImmersionDef& imm, const Vec& p, const GridSpec& grid,
                              const Tolerances& tol = {});

struct TailOptions {
    ClassifyOptions classify;
    /// Each a_i (b_i) is taken over the shell R_i < ρ ≤ window_factor·R_i, and
    /// the lattice must reach ρ = window_factor·R_last.
    double window_factor = 4.0;
    /// Sub-lattice steps per cell used when refining around the extremum.
    int refine_steps = 4;
};

struct AEstimate {
    std::vector<double> radii;
    std::vector<double> a;
    /// Chart point attaining each a_i.
    std::vector<Vec> argmax;
    std::vector<std::size_t> shell_counts;
    LimitVerdict verdict;
    std::size_t sample_count = 0;
    double refinement_gap = 0.0;
    double window_reach = kInf;
    bool window_ok = true;
    /// Largest increase a_{i+1} − a_i (should stay below noise_tol).
    double monotone_violation = 0.0;
};

struct BEstimate {
    std::vector<double> radii;
    std::vector<double> b;
    std::vector<Vec> argmin;
    std::vector<std::size_t> shell_counts;
    LimitVerdict verdict;
    std::size_t sample_count = 0;
    double refinement_gap = 0.0;
    double window_reach = kInf;
    bool window_ok = true;
    double monotone_violation = 0.0;
};

/// a_i = sup ρ·|α| over the i-th tail shell. Throws EmptyTail when the
/// lattice has no node beyond the largest radius.
AEstimate a_sequence(const ImmersionDef& imm, const SurfaceSamples& samples, const std::vector<double>& radii,
                     const TailOptions& opts = {}, const Tolerances& tol = {});
AEstimate a_sequence(const ImmersionDef& imm, const Vec& p, const std::vector<double>& radii,
                     const GridSpec& grid, const TailOptions& opts = {}, const Tolerances& tol = {});

/// b_i = inf ρ²·Ric_min over the i-th tail shell. Throws NotMinimal when
/// |H| > h_tol at a sample, EmptyTail as above.
BEstimate b_sequence(const ImmersionDef& imm, const SurfaceSamples& samples, const std::vector<double>& radii,
                     const TailOptions& opts = {}, const Tolerances& tol = {});
BEstimate b_sequence(const ImmersionDef& imm, const Vec& p, const std::vector<double>& radii,
                     const GridSpec& grid, const TailOptions& opts = {}, const Tolerances& tol = {});

/// Tail on which a certificate may rest: the first index i with
/// max_{j≥i} values[j] < 1, or −1 when there is none.
int first_bounded_tail(const std::vector<double>& values);

}  // namespace finitopo
