#pragma once

#include "finitopo/immersion.hpp"
#include "finitopo/invariants.hpp"

#include <string>
#include <vector>

namespace finitopo {

/// Hess f(ν, ν) for f = |φ|², computed as 2(1 + ⟨φ, α(ν, ν)⟩). Throws NotUnit.
double hessian_f(const ImmersionDef& imm, const Vec& u, const Vec& nu, const Tolerances& tol = {});

/// Smallest Hess f(ν, ν) over g-unit ν at u.
double hessian_f_min(const ImmersionDef& imm, const Vec& u, const Tolerances& tol = {});

/// Independent value of Hess f(ν, ν): second arc-length derivative of f along
/// the geodesic through u with velocity ν, by a 5-point central difference
/// with step h. Throws LeftChart.
double hessian_f_oracle(const ImmersionDef& imm, const Vec& u, const Vec& nu, double h = 1e-2,
                        const Tolerances& tol = {});

enum class TailPath { AInvariant, BInvariant };
std::string_view to_string(TailPath path);

struct HessBoundData {
    Vec p;
    /// φ(p); the certified immersion is φ − offset.
    Vec offset;
    double R0 = 0.0;
    double c = 0.0;
    /// Lower bound of Hess f over sampled unit vectors in the ball B(p, R0).
    double b = 0.0;
    int tail_index = -1;
    std::size_t ball_samples = 0;
    TailPath path = TailPath::AInvariant;
};

/// R0 = first radius whose tail stays below 1, c = the largest tail value
/// from there on, b = sampled inf of Hess f over the ball. Throws NotApplicable
/// when the sequence diverges, converges to a value ≥ 1, or never drops below 1.
HessBoundData tail_constants(const ImmersionDef& imm, const Vec& p, const AEstimate& aest,
                             const SurfaceSamples& samples, const Tolerances& tol = {});

/// Same with c_i = √(−b_i) from the Ricci sequence (minimal submanifolds).
HessBoundData tail_constants_minimal(const ImmersionDef& imm, const Vec& p, const BEstimate& best,
                                     const SurfaceSamples& samples, const Tolerances& tol = {});

/// G(t) = f0 − grad0·t + ∫₀ᵗ∫₀ˢ g for piecewise-linear g; the last piece
/// extends to infinity and must be constant.
class GProfile {
public:
    struct Piece {
        double start = 0.0;
        double value = 0.0;
        double slope = 0.0;
    };

    GProfile(double f0, double grad0, std::vector<Piece> pieces);

    /// The two-piece profile g = b on [0, R0], 2(1 − c) beyond.
    static GProfile two_piece(double f0, double grad0, double b, double R0, double c);

    double g(double t) const;
    double G(double t) const;
    double dG(double t) const;

    double f0() const { return f0_; }
    double grad0() const { return grad0_; }
    const std::vector<Piece>& pieces() const { return pieces_; }

private:
    std::size_t piece_of(double t) const;

    double f0_;
    double grad0_;
    std::vector<Piece> pieces_;
    std::vector<double> G_start_, dG_start_;
};

struct PropositionResult {
    bool proper = false;
    bool bounded_below = false;
    double inf_G = 0.0;
    double argmin_t = 0.0;

    bool holds() const { return proper && bounded_below; }
};

PropositionResult proposition_check(const GProfile& gp);

struct Eq3Report {
    std::size_t samples = 0;
    std::size_t violations = 0;
    /// Smallest f − bound over the samples beyond R0.
    double worst_margin = kInf;
    double worst_rho = 0.0;
    Vec worst_u;
    /// min(b, 1 − c): the integrated bound drops the constant term
    /// R0²(1 − c − b)/2, which is only safe when b ≤ 1 − c.
    double b_effective = 0.0;
    /// Violations of the bound with the unclamped b (informational).
    std::size_t literal_violations = 0;
    /// Violations of f ≥ G(ρ) with the two-piece profile (informational; the
    /// lattice ρ overestimates the true distance).
    std::size_t sharp_violations = 0;
};

/// f(x) ≥ b·R0·ρ + (1 − c)(ρ²/2 − R0·ρ) − slack for every sample with ρ > R0,
/// slack = 1e-6·(1 + ρ²).
Eq3Report eq3_check(const ImmersionDef& imm, const HessBoundData& hb, const SurfaceSamples& samples,
                    const Tolerances& tol = {});

struct PropernessCertificate {
    bool certified = false;
    /// False when the tail hypothesis fails (diverging or ≥ 1); a verdict,
    /// not an error.
    bool applicable = true;
    /// Empty when certified.
    std::string reason;
    HessBoundData constants;
    PropositionResult proposition;
    Eq3Report eq3;
    double refinement_gap = 0.0;
    std::vector<std::string> caveats;
};

PropernessCertificate certify_properness(const ImmersionDef& imm, const Vec& p, const AEstimate& aest,
                                         const SurfaceSamples& samples, const Tolerances& tol = {});

/// Minimal-submanifold path through the Ricci bound. Throws NotMinimal.
PropernessCertificate certify_properness_minimal(const ImmersionDef& imm, const Vec& p, const BEstimate& best,
                                                 const SurfaceSamples& samples, const Tolerances& tol = {});

}  // namespace finitopo
