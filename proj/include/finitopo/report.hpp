#pragma once

#include "finitopo/config.hpp"
#include "finitopo/invariants.hpp"
#include "finitopo/properness.hpp"
#include "finitopo/radial_flow.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace finitopo {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolkitVersion = "0.1.0";

/// Ok and NotApplicable are successful outcomes; Error is a computational
/// failure; Skipped means an upstream stage failed.
enum class StageStatus { NotRequested, Ok, NotApplicable, Error, Skipped };
std::string_view to_string(StageStatus s);

struct StageResult {
    StageStatus status = StageStatus::NotRequested;
    std::string message;
};

/// Random (point, direction) spot checks of the curvature identities.
struct SpotChecks {
    std::size_t gauss_samples = 0;
    /// max |Ric via the Gauss equation − Ric from the metric alone|.
    double gauss_max_residual = 0.0;
    std::size_t hessian_samples = 0;
    /// max |Hess f from α − second derivative along geodesics|.
    double hessian_max_residual = 0.0;
    std::size_t skipped = 0;
};

struct Report {
    int schema_version = kSchemaVersion;
    std::string toolkit_version = kToolkitVersion;
    AnalysisConfig config;
    std::string surface_label;
    int dimension = 0;
    int ambient_dimension = 0;

    StageResult checks_stage;
    SpotChecks checks;
    StageResult a_stage;
    std::optional<AEstimate> a;
    StageResult b_stage;
    std::optional<BEstimate> b;
    StageResult properness_stage;
    std::optional<PropernessCertificate> properness;
    StageResult minimal_stage;
    std::optional<PropernessCertificate> properness_minimal;
    StageResult topology_stage;
    std::optional<TopologyCertificate> topology;

    /// Seconds per stage; only serialized when requested, since they differ
    /// from run to run.
    std::map<std::string, double> timings;
    bool include_timings = false;

    bool has_errors() const;
};

/// Runs the stages the mode asks for in dependency order (invariants →
/// properness → topology). Stage failures are recorded, never thrown.
Report run_analysis(const AnalysisConfig& config, bool include_timings = false);

/// Machine report (JSON, versioned by schema_version).
std::string report_json(const Report& report);
/// Inverse of report_json. Throws ParseError.
Report parse_report(const std::string& text);
Report load_report(const std::string& path);

/// Plain-text summary table.
std::string summary_text(const Report& report);

/// Writes report.json, summary.txt and traces/trace_NNN.{csv,dat} into dir.
/// Throws IoError.
void emit(const Report& report, const std::string& dir);

}  // namespace finitopo
