#pragma once

#include "finitopo/geodesic.hpp"
#include "finitopo/immersion.hpp"
#include "finitopo/invariants.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace finitopo {

/// Everything below measures R = |φ|, so callers centre the immersion first
/// (translated(imm, o)) to use another ambient centre o.

struct FlowOptions {
    double psi_min = 1e-3;
    /// Bisection tolerance for level-set seeds, relative to r.
    double level_tol = 1e-10;
    double nu_star_floor = 1e-12;
    /// Integrator tolerance; the local error target is tol/100.
    double tol = 1e-8;
    /// t_max = t_max_factor·r unless t_max is set.
    double t_max_factor = 50.0;
    std::optional<double> t_max;
    /// Largest flow step as a fraction of r.
    double h_max_factor = 1.0 / 32;
    int ray_count = 64;
};

struct RadialField {
    double R = 0.0;
    Vec eta;
    /// Chart components of grad R (= ψ·ν).
    Vec grad;
    /// Unit tangent ν in chart components.
    Vec nu;
    double psi = 0.0;
    /// Normal part η − ψν of η (ambient).
    Vec eta_normal;
    double sin_theta = 0.0;
};

/// η = φ/|φ|, ν = P_T η/|P_T η|, ψ = |P_T η|. Throws CriticalPoint when
/// ψ ≤ psi_min.
RadialField radial_unit_field(const Jet2& jet, const MetricTensor& g, double psi_min = 1e-3);
RadialField radial_unit_field(const Jet2& jet, double psi_min = 1e-3);

struct LevelSetSeed {
    Vec u;
    double psi = 0.0;
    /// Ring index: the direction along which the seed curve was traced.
    int ring = 0;
    int curve = 0;
};

struct LevelSetSeeds {
    double r = 0.0;
    std::vector<LevelSetSeed> seeds;
    double min_psi0 = kInf;
    std::size_t discarded = 0;
    std::vector<std::size_t> ring_sizes;
};

/// Seeds on Γ_r along chart curves from p: meridians in both directions for
/// charts with a periodic axis and declared meridians, coordinate rays
/// otherwise. Throws NoIntersection, AllTangential.
LevelSetSeeds extract_level_set(const ImmersionDef& imm, const Vec& p, double r, int ray_count,
                                const FlowOptions& opts = {}, const Tolerances& tol = {});

struct FlowState {
    double t = 0.0;
    Vec u;
    double R = 0.0;
    double psi = 0.0;
    double sin_theta = 0.0;
    /// Signed sinθ: in codimension one the normal side is fixed by the
    /// oriented unit normal, so it stays smooth when η turns tangent.
    double sin_theta_signed = 0.0;
    /// (t + r)·⟨α(ν, ν), ν*⟩ with the same orientation as sin_theta_signed.
    double integrand = 0.0;
    /// ∫₀ᵗ integrand, carried in the integrator state.
    double accumulated = 0.0;
    /// R·|α|.
    double R_alpha = 0.0;
    bool below_floor = false;
};

enum class FlowTermination { ReachedTmax, PsiFloor, LeftChart };
std::string_view to_string(FlowTermination t);

struct FlowTrace {
    LevelSetSeed seed;
    double r = 0.0;
    double t_max = 0.0;
    double tol = 0.0;
    std::vector<FlowState> states;
    FlowTermination termination = FlowTermination::ReachedTmax;
    /// Steps where sinθ fell below nu_star_floor and the integrand was zeroed.
    std::size_t floor_steps = 0;
    long accepted_steps = 0;
    long rejected_steps = 0;
};

/// Integrates ξ' = ν/ψ from the seed to t_max in chart coordinates.
FlowTrace integrate_flow(const ImmersionDef& imm, const LevelSetSeed& seed, double r, const FlowOptions& opts = {},
                         const Tolerances& tol = {});

/// max |R(t) − (t + r)|.
double check_R_affine(const FlowTrace& trace);
/// max |sinθ(t) − (r·sinθ₀ − A(t))/(t + r)|.
double check_integrated_identity(const FlowTrace& trace);
/// RMS over steps of Δ[(t + r) sinθ]/Δt + mean integrand.
double conservation_rms(const FlowTrace& trace);
/// max |A(t) − trapezoidal sum of the stored integrand| / (1 + |A|).
double accumulator_consistency(const FlowTrace& trace);

struct AngleBoundResult {
    bool passed = true;
    bool premise_passed = true;
    /// min over states of envelope + slack − sinθ.
    double worst_margin = kInf;
    /// min over states of c − R·|α|.
    double premise_margin = kInf;
    std::size_t violations = 0;
};

/// sinθ(t) ≤ (c·t + r·sinθ₀)/(t + r) + 1e-8·(1 + t) at every state, with the
/// premise R·|α| ≤ c checked at every state.
AngleBoundResult check_angle_bound(const FlowTrace& trace, double c);

double angle_envelope(const FlowTrace& trace, double c, double t);

/// CSV columns t, u1..um, R, psi, sin_theta, integrand, envelope.
void write_trace_csv(const FlowTrace& trace, double c, std::ostream& os);
/// Whitespace-separated t, sin_theta, envelope for plotting.
void write_plot_data(const FlowTrace& trace, double c, std::ostream& os);

struct CriticalPoint {
    Vec u;
    double psi = 0.0;
    double R = 0.0;
    double rho = kInf;
    /// Largest metric distance from the first member to the others.
    double cluster_radius = 0.0;
    std::size_t members = 1;
    bool degenerate = false;
    bool base_point = false;
    /// R < r for the certified radius r (set by the certificate).
    bool inside = true;
    /// Eigenvalues of Hess R in a g-orthonormal frame (empty for the base point).
    std::vector<double> hessian_eigenvalues;
};

struct CriticalScanOptions {
    double crit_tol = 1e-4;
    /// Relative size of the smallest Hessian eigenvalue (times R) below which
    /// a critical point counts as degenerate.
    double degenerate_tol = 1e-6;
    /// Clusters spanning more lattice cells than this are critical sets.
    double max_cluster_cells = 3.0;
};

/// Critical points of R = |φ| on the lattice cells with ρ ≤ rho_max. Cells are
/// flagged where ψ < crit_tol at a corner or every component of dR changes
/// sign, refined by damped Newton on dR, and clustered.
std::vector<CriticalPoint> scan_critical_points(const ImmersionDef& imm, const Vec& p, double rho_max,
                                                const DistanceField& field, const CriticalScanOptions& opts = {},
                                                const Tolerances& tol = {});

struct TraceCheck {
    std::size_t index = 0;
    FlowTermination termination = FlowTermination::ReachedTmax;
    double t_end = 0.0;
    double R_affine = 0.0;
    double identity = 0.0;
    double conservation = 0.0;
    double accumulator = 0.0;
    AngleBoundResult angle;
    bool passed = false;
};

struct TopologyCertificate {
    bool certified = false;
    bool applicable = true;
    std::string reason;
    Vec center;
    /// Radius of the certified sphere and the a-tail it rests on.
    double r = 0.0;
    double R0 = 0.0;
    double c = 0.0;
    double t_max = 0.0;
    double tol = 0.0;
    std::size_t seed_count = 0;
    std::vector<std::size_t> ring_sizes;
    double min_psi0 = 0.0;
    std::vector<TraceCheck> traces;
    std::vector<CriticalPoint> critical_points;
    std::size_t inside_count = 0;
    std::size_t outside_count = 0;
    std::size_t degenerate_count = 0;
    std::size_t base_point_clusters = 0;
    double worst_R_affine = 0.0;
    double worst_identity = 0.0;
    double worst_conservation = 0.0;
    double worst_angle_margin = kInf;
    std::vector<std::string> caveats;
    /// The integrated flow lines, in seed order (not part of the report).
    std::vector<FlowTrace> flow_traces;
};

/// Flow certificate for finite topology. center defaults to φ(p).
TopologyCertificate topology_certificate(const ImmersionDef& imm, const Vec& p, const std::optional<Vec>& center,
                                         const AEstimate& aest, const DistanceField& field,
                                         const FlowOptions& opts = {}, const CriticalScanOptions& scan = {},
                                         const Tolerances& tol = {});

/// Re-runs the certificate's seeding and returns one trace (for debugging).
FlowTrace single_trace(const ImmersionDef& imm, const Vec& p, const Vec& center, double r, std::size_t seed_index,
                       const FlowOptions& opts = {}, const Tolerances& tol = {});

}  // namespace finitopo
