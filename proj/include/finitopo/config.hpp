#pragma once

#include "finitopo/geodesic.hpp"
#include "finitopo/immersion.hpp"
#include "finitopo/invariants.hpp"
#include "finitopo/radial_flow.hpp"
#include "finitopo/surfaces.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace finitopo {

enum class Mode { AInvariant, BInvariant, Properness, Topology, Full };
std::string_view to_string(Mode mode);
/// Accepts the names printed by to_string. Throws ValidationError.
Mode parse_mode(const std::string& text);

enum class ExhaustionScheme { Geometric, Arithmetic };
std::string_view to_string(ExhaustionScheme s);

struct ExhaustionConfig {
    double r0 = 1.0;
    int count = 6;
    ExhaustionScheme scheme = ExhaustionScheme::Geometric;

    std::vector<double> radii() const;
};

struct AnalysisConfig {
    SurfaceSpec surface;
    Vec base_point;
    /// Centre of R = |φ − o|; unset means φ(base point).
    std::optional<Vec> center;
    GridSpec grid;
    ExhaustionConfig exhaustion;
    TailOptions tail;
    FlowOptions flow;
    CriticalScanOptions critical;
    Tolerances tolerances;
    Mode mode = Mode::Full;
    /// Seeds the random spot checks recorded in the report.
    std::uint64_t seed = 1;
    /// Number of (point, direction) pairs in each spot check.
    int spot_checks = 16;
    std::string output_dir = "out";
    /// At most this many flow traces are written as CSV and plot files.
    int trace_files = 8;

    bool operator==(const AnalysisConfig& other) const;
};

/// Config with every field at the surface's defaults.
AnalysisConfig default_config(const SurfaceSpec& surface);

/// Parses and validates a YAML manifest; missing fields take the surface
/// defaults. Throws ParseError (with line numbers), ValidationError (all
/// violations at once), IoError.
AnalysisConfig load_manifest(const std::string& path);
AnalysisConfig parse_manifest(const std::string& text);

/// Full manifest with every field spelled out; parse_manifest inverts it.
std::string emit_manifest(const AnalysisConfig& config);

/// Every violated rule, empty when the config is valid.
std::vector<std::string> validate(const AnalysisConfig& config);

}  // namespace finitopo
