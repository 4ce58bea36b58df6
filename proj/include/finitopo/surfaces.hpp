#pragma once

#include "finitopo/geodesic.hpp"
#include "finitopo/immersion.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace finitopo {

/// A surface request: a gallery name with numeric parameters, or a generic
/// immersion given by component expressions over chart variables.
struct SurfaceSpec {
    std::string name = "plane";
    std::map<std::string, double> params;
    /// Height function for the "graph" surface, z = f(u, v).
    std::string function;

    // Generic immersions (name == "expression").
    std::vector<std::string> components;
    std::vector<std::string> variables;
    std::vector<ChartAxis> chart;
};

/// Sampling choices that suit a surface: base point, ambient centre for the
/// radial function, lattice window and exhaustion radii.
struct SurfaceDefaults {
    Vec base_point;
    /// Centre o of R = |φ − o|; unset means φ(base point).
    std::optional<Vec> center;
    GridSpec grid;
    double r0 = 1.0;
    int count = 6;
};

struct GalleryEntry {
    std::string name;
    std::string summary;
    std::vector<std::string> params;
};

const std::vector<GalleryEntry>& gallery();

/// Builds a gallery surface with closed-form jets, or a generic expression
/// surface differentiated in forward mode. Throws UnknownSurface, BadParams.
ImmersionDef builtin_surface(const SurfaceSpec& spec);
ImmersionDef builtin_surface(const std::string& name, const std::map<std::string, double>& params = {});

SurfaceDefaults surface_defaults(const SurfaceSpec& spec);

}  // namespace finitopo
