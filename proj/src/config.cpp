#include "finitopo/config.hpp"

#include "finitopo/error.hpp"
#include "finitopo/expression.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace finitopo {

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::AInvariant: return "a-invariant";
        case Mode::BInvariant: return "b-invariant";
        case Mode::Properness: return "properness";
        case Mode::Topology: return "topology";
        case Mode::Full: return "full";
    }
    return "full";
}

Mode parse_mode(const std::string& text) {
    for (Mode m : {Mode::AInvariant, Mode::BInvariant, Mode::Properness, Mode::Topology, Mode::Full})
        if (text == to_string(m)) return m;
    throw GeometryError(ErrorCode::ValidationError,
                        "mode '" + text + "' is not one of a-invariant, b-invariant, properness, topology, full");
}

std::string_view to_string(ExhaustionScheme s) { return s == ExhaustionScheme::Geometric ? "geometric" : "arithmetic"; }

std::vector<double> ExhaustionConfig::radii() const {
    return scheme == ExhaustionScheme::Geometric ? exhaustion_radii(r0, count) : arithmetic_radii(r0, count);
}

namespace {

std::string_view spacing_name(Spacing s) {
    switch (s) {
        case Spacing::Uniform: return "uniform";
        case Spacing::Geometric: return "geometric";
        case Spacing::Sinh: return "sinh";
    }
    return "uniform";
}

std::string where(const YAML::Node& n) {
    const YAML::Mark m = n.Mark();
    if (m.is_null()) return "";
    return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

[[noreturn]] void parse_fail(const YAML::Node& n, const std::string& what) {
    throw GeometryError(ErrorCode::ParseError, what + where(n));
}

class Reader {
public:
    std::vector<std::string> violations;

    void keys(const YAML::Node& n, const std::string& section, std::initializer_list<const char*> allowed) {
        if (!n.IsMap()) parse_fail(n, "'" + section + "' must be a mapping");
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& kv : n) {
            const std::string key = kv.first.as<std::string>();
            if (!ok.count(key)) violations.push_back("unknown key '" + key + "' in " + section + where(kv.first));
        }
    }

    // Numbers, or constant expressions such as "pi/3".
    static double number(const YAML::Node& n, const std::string& name) {
        if (!n.IsScalar()) parse_fail(n, "'" + name + "' must be a number");
        try {
            return n.as<double>();
        } catch (const YAML::BadConversion&) {
        }
        try {
            return Expression(n.Scalar(), {}).evaluate(std::span<const double>());
        } catch (const GeometryError&) {
            parse_fail(n, "'" + name + "' is not a number: '" + n.Scalar() + "'");
        }
    }

    static long integer(const YAML::Node& n, const std::string& name) {
        try {
            return n.as<long>();
        } catch (const YAML::BadConversion&) {
            parse_fail(n, "'" + name + "' must be an integer");
        }
    }

    static bool boolean(const YAML::Node& n, const std::string& name) {
        try {
            return n.as<bool>();
        } catch (const YAML::BadConversion&) {
            parse_fail(n, "'" + name + "' must be true or false");
        }
    }

    static std::string text(const YAML::Node& n, const std::string& name) {
        if (!n.IsScalar()) parse_fail(n, "'" + name + "' must be a string");
        return n.Scalar();
    }

    static Vec vector(const YAML::Node& n, const std::string& name) {
        if (!n.IsSequence()) parse_fail(n, "'" + name + "' must be a list of numbers");
        Vec v(static_cast<Eigen::Index>(n.size()));
        for (std::size_t k = 0; k < n.size(); ++k) v[static_cast<Eigen::Index>(k)] = number(n[k], name);
        return v;
    }

    void set(const YAML::Node& parent, const char* key, double& out, const std::string& section) {
        if (const YAML::Node n = parent[key]) out = number(n, section + "." + key);
    }
    void set(const YAML::Node& parent, const char* key, int& out, const std::string& section) {
        if (const YAML::Node n = parent[key]) out = static_cast<int>(integer(n, section + "." + key));
    }

    ChartAxis chart_axis(const YAML::Node& n) {
        keys(n, "surface.chart", {"lo", "hi", "periodic"});
        ChartAxis ax;
        set(n, "lo", ax.lo, "surface.chart");
        set(n, "hi", ax.hi, "surface.chart");
        if (const YAML::Node p = n["periodic"]) ax.periodic = boolean(p, "surface.chart.periodic");
        return ax;
    }

    SurfaceSpec surface(const YAML::Node& n) {
        SurfaceSpec s;
        if (n.IsScalar()) {
            s.name = n.Scalar();
            return s;
        }
        keys(n, "surface", {"name", "params", "function", "components", "variables", "chart"});
        if (const YAML::Node v = n["name"]) s.name = text(v, "surface.name");
        if (const YAML::Node p = n["params"]) {
            if (!p.IsMap()) parse_fail(p, "'surface.params' must be a mapping");
            for (const auto& kv : p) {
                const std::string key = kv.first.as<std::string>();
                s.params[key] = number(kv.second, "surface.params." + key);
            }
        }
        if (const YAML::Node f = n["function"]) s.function = text(f, "surface.function");
        if (const YAML::Node c = n["components"]) {
            if (!c.IsSequence()) parse_fail(c, "'surface.components' must be a list");
            for (const auto& e : c) s.components.push_back(text(e, "surface.components"));
        }
        if (const YAML::Node c = n["variables"]) {
            if (!c.IsSequence()) parse_fail(c, "'surface.variables' must be a list");
            for (const auto& e : c) s.variables.push_back(text(e, "surface.variables"));
        }
        if (const YAML::Node c = n["chart"]) {
            if (!c.IsSequence()) parse_fail(c, "'surface.chart' must be a list");
            for (const auto& e : c) s.chart.push_back(chart_axis(e));
        }
        return s;
    }

    void grid(const YAML::Node& n, GridSpec& g) {
        keys(n, "grid", {"axes", "stencil_radius", "max_refinements", "dist_tol"});
        set(n, "stencil_radius", g.stencil_radius, "grid");
        set(n, "max_refinements", g.max_refinements, "grid");
        set(n, "dist_tol", g.dist_tol, "grid");
        if (const YAML::Node axes = n["axes"]) {
            if (!axes.IsSequence()) parse_fail(axes, "'grid.axes' must be a list");
            g.axes.clear();
            for (const auto& a : axes) {
                keys(a, "grid.axes", {"lo", "hi", "nodes", "spacing", "sinh_scale"});
                AxisGrid ax;
                set(a, "lo", ax.lo, "grid.axes");
                set(a, "hi", ax.hi, "grid.axes");
                set(a, "nodes", ax.nodes, "grid.axes");
                set(a, "sinh_scale", ax.sinh_scale, "grid.axes");
                if (const YAML::Node sp = a["spacing"]) {
                    const std::string name = text(sp, "grid.axes.spacing");
                    bool known = false;
                    for (Spacing s : {Spacing::Uniform, Spacing::Geometric, Spacing::Sinh})
                        if (name == spacing_name(s)) {
                            ax.spacing = s;
                            known = true;
                        }
                    if (!known) violations.push_back("unknown spacing '" + name + "'" + where(sp));
                }
                g.axes.push_back(ax);
            }
        }
    }
};

}  // namespace

AnalysisConfig default_config(const SurfaceSpec& surface) {
    AnalysisConfig c;
    c.surface = surface;
    const SurfaceDefaults d = surface_defaults(surface);
    c.base_point = d.base_point;
    c.center = d.center;
    c.grid = d.grid;
    c.exhaustion.r0 = d.r0;
    c.exhaustion.count = d.count;
    return c;
}

std::vector<std::string> validate(const AnalysisConfig& c) {
    std::vector<std::string> v;
    std::optional<ImmersionDef> imm;
    try {
        imm = builtin_surface(c.surface);
    } catch (const GeometryError& e) {
        v.push_back(e.what());
    }
    auto positive = [&](double x, const char* name) {
        if (!(x > 0.0)) v.push_back(std::string(name) + " must be positive");
    };
    positive(c.grid.dist_tol, "grid.dist_tol");
    positive(c.exhaustion.r0, "exhaustion.r0");
    positive(c.tail.classify.conv_tol, "tail.conv_tol");
    positive(c.tail.classify.div_cap, "tail.div_cap");
    positive(c.tail.classify.noise_tol, "tail.noise_tol");
    positive(c.tail.window_factor, "tail.window_factor");
    positive(c.flow.psi_min, "flow.psi_min");
    positive(c.flow.level_tol, "flow.level_tol");
    positive(c.flow.nu_star_floor, "flow.nu_star_floor");
    positive(c.flow.tol, "flow.tol");
    positive(c.flow.t_max_factor, "flow.t_max_factor");
    positive(c.flow.h_max_factor, "flow.h_max_factor");
    if (c.flow.t_max) positive(*c.flow.t_max, "flow.t_max");
    positive(c.critical.crit_tol, "critical.crit_tol");
    positive(c.critical.degenerate_tol, "critical.degenerate_tol");
    positive(c.critical.max_cluster_cells, "critical.max_cluster_cells");
    const Tolerances& t = c.tolerances;
    for (auto [x, name] : {std::pair{t.rank_tol, "tolerances.rank_tol"}, {t.sym_tol, "tolerances.sym_tol"},
                           {t.proj_tol, "tolerances.proj_tol"}, {t.h_tol, "tolerances.h_tol"},
                           {t.unit_tol, "tolerances.unit_tol"}, {t.inv_tol, "tolerances.inv_tol"},
                           {t.fd_step, "tolerances.fd_step"}})
        positive(x, name);
    if (c.exhaustion.count < 4) v.push_back("exhaustion.count must be at least 4 to classify the tail");
    if (c.tail.refine_steps < 0) v.push_back("tail.refine_steps must be non-negative");
    if (c.flow.ray_count < 1) v.push_back("flow.ray_count must be positive");
    if (c.spot_checks < 0) v.push_back("spot_checks must be non-negative");
    if (c.trace_files < 0) v.push_back("output.trace_files must be non-negative");
    if (c.grid.stencil_radius < 1) v.push_back("grid.stencil_radius must be at least 1");
    if (c.grid.max_refinements < 0) v.push_back("grid.max_refinements must be non-negative");
    if (c.output_dir.empty()) v.push_back("output.dir must not be empty");

    if (imm) {
        const int m = imm->m;
        if (c.base_point.size() != m) {
            v.push_back("base_point needs " + std::to_string(m) + " coordinates");
        } else if (!imm->chart.contains(c.base_point)) {
            v.push_back("base_point lies outside the chart");
        }
        if (c.center && c.center->size() != imm->n)
            v.push_back("center needs " + std::to_string(imm->n) + " coordinates");
        if (static_cast<int>(c.grid.axes.size()) != m) {
            v.push_back("grid needs " + std::to_string(m) + " axes");
        } else {
            for (int k = 0; k < m; ++k) {
                const AxisGrid& ax = c.grid.axes[static_cast<std::size_t>(k)];
                const std::string name = "grid.axes[" + std::to_string(k) + "]";
                if (ax.nodes < 2) v.push_back(name + " needs at least 2 nodes");
                if (!(std::isfinite(ax.lo) && std::isfinite(ax.hi) && ax.hi > ax.lo))
                    v.push_back(name + " needs finite bounds with hi > lo");
                if (ax.spacing == Spacing::Geometric && !(ax.lo > 0.0))
                    v.push_back(name + " with geometric spacing needs lo > 0");
                if (ax.spacing == Spacing::Sinh && !(ax.sinh_scale > 0.0))
                    v.push_back(name + " needs a positive sinh_scale");
                const ChartAxis& ca = imm->chart.axes[static_cast<std::size_t>(k)];
                if (!ca.periodic && c.base_point.size() == m &&
                    !(c.base_point[k] >= ax.lo && c.base_point[k] <= ax.hi))
                    v.push_back(name + " window does not contain the base point");
            }
        }
    }
    return v;
}

AnalysisConfig parse_manifest(const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(source);
    } catch (const YAML::ParserException& e) {
        throw GeometryError(ErrorCode::ParseError, "line " + std::to_string(e.mark.line + 1) + ", column " +
                                                       std::to_string(e.mark.column + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) throw GeometryError(ErrorCode::ParseError, "manifest must be a mapping" + where(root));

    Reader rd;
    rd.keys(root, "manifest",
            {"surface", "base_point", "center", "grid", "exhaustion", "tail", "flow", "critical", "tolerances", "mode",
             "seed", "spot_checks", "output"});
    if (!root["surface"]) throw GeometryError(ErrorCode::ValidationError, "manifest needs a 'surface' entry");
    const SurfaceSpec spec = rd.surface(root["surface"]);

    AnalysisConfig c;
    try {
        c = default_config(spec);
    } catch (const GeometryError&) {
        c.surface = spec;  // validate() reports the surface error
    }

    if (const YAML::Node n = root["base_point"]) c.base_point = Reader::vector(n, "base_point");
    if (const YAML::Node n = root["center"]) {
        if (n.IsNull() || (n.IsScalar() && n.Scalar() == "base")) {
            c.center.reset();
        } else {
            c.center = Reader::vector(n, "center");
        }
    }
    if (const YAML::Node n = root["grid"]) rd.grid(n, c.grid);
    if (const YAML::Node n = root["exhaustion"]) {
        rd.keys(n, "exhaustion", {"r0", "count", "scheme"});
        rd.set(n, "r0", c.exhaustion.r0, "exhaustion");
        rd.set(n, "count", c.exhaustion.count, "exhaustion");
        if (const YAML::Node s = n["scheme"]) {
            const std::string name = Reader::text(s, "exhaustion.scheme");
            if (name == "geometric") {
                c.exhaustion.scheme = ExhaustionScheme::Geometric;
            } else if (name == "arithmetic") {
                c.exhaustion.scheme = ExhaustionScheme::Arithmetic;
            } else {
                rd.violations.push_back("exhaustion.scheme must be geometric or arithmetic" + where(s));
            }
        }
    }
    if (const YAML::Node n = root["tail"]) {
        rd.keys(n, "tail", {"conv_tol", "div_cap", "noise_tol", "window_factor", "refine_steps"});
        rd.set(n, "conv_tol", c.tail.classify.conv_tol, "tail");
        rd.set(n, "div_cap", c.tail.classify.div_cap, "tail");
        rd.set(n, "noise_tol", c.tail.classify.noise_tol, "tail");
        rd.set(n, "window_factor", c.tail.window_factor, "tail");
        rd.set(n, "refine_steps", c.tail.refine_steps, "tail");
    }
    if (const YAML::Node n = root["flow"]) {
        rd.keys(n, "flow",
                {"ray_count", "tol", "t_max", "t_max_factor", "psi_min", "level_tol", "nu_star_floor", "h_max_factor"});
        rd.set(n, "ray_count", c.flow.ray_count, "flow");
        rd.set(n, "tol", c.flow.tol, "flow");
        rd.set(n, "t_max_factor", c.flow.t_max_factor, "flow");
        rd.set(n, "psi_min", c.flow.psi_min, "flow");
        rd.set(n, "level_tol", c.flow.level_tol, "flow");
        rd.set(n, "nu_star_floor", c.flow.nu_star_floor, "flow");
        rd.set(n, "h_max_factor", c.flow.h_max_factor, "flow");
        if (const YAML::Node t = n["t_max"]) {
            if (t.IsNull()) {
                c.flow.t_max.reset();
            } else {
                c.flow.t_max = Reader::number(t, "flow.t_max");
            }
        }
    }
    if (const YAML::Node n = root["critical"]) {
        rd.keys(n, "critical", {"crit_tol", "degenerate_tol", "max_cluster_cells"});
        rd.set(n, "crit_tol", c.critical.crit_tol, "critical");
        rd.set(n, "degenerate_tol", c.critical.degenerate_tol, "critical");
        rd.set(n, "max_cluster_cells", c.critical.max_cluster_cells, "critical");
    }
    if (const YAML::Node n = root["tolerances"]) {
        rd.keys(n, "tolerances",
                {"rank_tol", "sym_tol", "proj_tol", "h_tol", "unit_tol", "inv_tol", "fd_step", "alpha_norm"});
        Tolerances& t = c.tolerances;
        rd.set(n, "rank_tol", t.rank_tol, "tolerances");
        rd.set(n, "sym_tol", t.sym_tol, "tolerances");
        rd.set(n, "proj_tol", t.proj_tol, "tolerances");
        rd.set(n, "h_tol", t.h_tol, "tolerances");
        rd.set(n, "unit_tol", t.unit_tol, "tolerances");
        rd.set(n, "inv_tol", t.inv_tol, "tolerances");
        rd.set(n, "fd_step", t.fd_step, "tolerances");
        if (const YAML::Node a = n["alpha_norm"]) {
            const std::string name = Reader::text(a, "tolerances.alpha_norm");
            if (name == "hilbert-schmidt") {
                t.alpha_norm = AlphaNorm::HilbertSchmidt;
            } else if (name == "operator") {
                t.alpha_norm = AlphaNorm::Operator;
            } else {
                rd.violations.push_back("tolerances.alpha_norm must be hilbert-schmidt or operator" + where(a));
            }
        }
    }
    if (const YAML::Node n = root["mode"]) {
        try {
            c.mode = parse_mode(Reader::text(n, "mode"));
        } catch (const GeometryError&) {
            rd.violations.push_back("mode '" + n.Scalar() + "' is not one of a-invariant, b-invariant, properness, "
                                    "topology, full" + where(n));
        }
    }
    if (const YAML::Node n = root["seed"]) {
        const long s = Reader::integer(n, "seed");
        if (s < 0) rd.violations.push_back("seed must be non-negative" + where(n));
        c.seed = static_cast<std::uint64_t>(s);
    }
    rd.set(root, "spot_checks", c.spot_checks, "manifest");
    if (const YAML::Node n = root["output"]) {
        rd.keys(n, "output", {"dir", "trace_files"});
        if (const YAML::Node d = n["dir"]) c.output_dir = Reader::text(d, "output.dir");
        rd.set(n, "trace_files", c.trace_files, "output");
    }

    for (auto& s : validate(c)) rd.violations.push_back(std::move(s));
    if (!rd.violations.empty()) {
        std::string msg = std::to_string(rd.violations.size()) + " violation(s)";
        for (const auto& s : rd.violations) msg += "\n  - " + s;
        throw GeometryError(ErrorCode::ValidationError, msg);
    }
    return c;
}

AnalysisConfig load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GeometryError(ErrorCode::IoError, "cannot read manifest '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

namespace {

void emit_vec(YAML::Emitter& e, const Vec& v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index k = 0; k < v.size(); ++k) e << v[k];
    e << YAML::EndSeq;
}

}  // namespace

std::string emit_manifest(const AnalysisConfig& c) {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;

    e << YAML::Key << "surface" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << c.surface.name;
    if (!c.surface.params.empty()) {
        e << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, x] : c.surface.params) e << YAML::Key << k << YAML::Value << x;
        e << YAML::EndMap;
    }
    if (!c.surface.function.empty()) e << YAML::Key << "function" << YAML::Value << c.surface.function;
    if (!c.surface.components.empty()) {
        e << YAML::Key << "components" << YAML::Value << YAML::Flow << c.surface.components;
        e << YAML::Key << "variables" << YAML::Value << YAML::Flow << c.surface.variables;
    }
    if (!c.surface.chart.empty()) {
        e << YAML::Key << "chart" << YAML::Value << YAML::BeginSeq;
        for (const auto& ax : c.surface.chart)
            e << YAML::Flow << YAML::BeginMap << YAML::Key << "lo" << YAML::Value << ax.lo << YAML::Key << "hi"
              << YAML::Value << ax.hi << YAML::Key << "periodic" << YAML::Value << ax.periodic << YAML::EndMap;
        e << YAML::EndSeq;
    }
    e << YAML::EndMap;

    e << YAML::Key << "base_point" << YAML::Value;
    emit_vec(e, c.base_point);
    e << YAML::Key << "center" << YAML::Value;
    if (c.center) {
        emit_vec(e, *c.center);
    } else {
        e << "base";
    }

    e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "axes" << YAML::Value << YAML::BeginSeq;
    for (const auto& ax : c.grid.axes)
        e << YAML::Flow << YAML::BeginMap << YAML::Key << "lo" << YAML::Value << ax.lo << YAML::Key << "hi"
          << YAML::Value << ax.hi << YAML::Key << "nodes" << YAML::Value << ax.nodes << YAML::Key << "spacing"
          << YAML::Value << std::string(spacing_name(ax.spacing)) << YAML::Key << "sinh_scale" << YAML::Value
          << ax.sinh_scale << YAML::EndMap;
    e << YAML::EndSeq;
    e << YAML::Key << "stencil_radius" << YAML::Value << c.grid.stencil_radius;
    e << YAML::Key << "max_refinements" << YAML::Value << c.grid.max_refinements;
    e << YAML::Key << "dist_tol" << YAML::Value << c.grid.dist_tol;
    e << YAML::EndMap;

    e << YAML::Key << "exhaustion" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "r0" << YAML::Value << c.exhaustion.r0;
    e << YAML::Key << "count" << YAML::Value << c.exhaustion.count;
    e << YAML::Key << "scheme" << YAML::Value << std::string(to_string(c.exhaustion.scheme));
    e << YAML::EndMap;

    e << YAML::Key << "tail" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "conv_tol" << YAML::Value << c.tail.classify.conv_tol;
    e << YAML::Key << "div_cap" << YAML::Value << c.tail.classify.div_cap;
    e << YAML::Key << "noise_tol" << YAML::Value << c.tail.classify.noise_tol;
    e << YAML::Key << "window_factor" << YAML::Value << c.tail.window_factor;
    e << YAML::Key << "refine_steps" << YAML::Value << c.tail.refine_steps;
    e << YAML::EndMap;

    e << YAML::Key << "flow" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "ray_count" << YAML::Value << c.flow.ray_count;
    e << YAML::Key << "tol" << YAML::Value << c.flow.tol;
    e << YAML::Key << "t_max" << YAML::Value;
    if (c.flow.t_max) {
        e << *c.flow.t_max;
    } else {
        e << YAML::Null;
    }
    e << YAML::Key << "t_max_factor" << YAML::Value << c.flow.t_max_factor;
    e << YAML::Key << "psi_min" << YAML::Value << c.flow.psi_min;
    e << YAML::Key << "level_tol" << YAML::Value << c.flow.level_tol;
    e << YAML::Key << "nu_star_floor" << YAML::Value << c.flow.nu_star_floor;
    e << YAML::Key << "h_max_factor" << YAML::Value << c.flow.h_max_factor;
    e << YAML::EndMap;

    e << YAML::Key << "critical" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "crit_tol" << YAML::Value << c.critical.crit_tol;
    e << YAML::Key << "degenerate_tol" << YAML::Value << c.critical.degenerate_tol;
    e << YAML::Key << "max_cluster_cells" << YAML::Value << c.critical.max_cluster_cells;
    e << YAML::EndMap;

    const Tolerances& t = c.tolerances;
    e << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "rank_tol" << YAML::Value << t.rank_tol;
    e << YAML::Key << "sym_tol" << YAML::Value << t.sym_tol;
    e << YAML::Key << "proj_tol" << YAML::Value << t.proj_tol;
    e << YAML::Key << "h_tol" << YAML::Value << t.h_tol;
    e << YAML::Key << "unit_tol" << YAML::Value << t.unit_tol;
    e << YAML::Key << "inv_tol" << YAML::Value << t.inv_tol;
    e << YAML::Key << "fd_step" << YAML::Value << t.fd_step;
    e << YAML::Key << "alpha_norm" << YAML::Value
      << (t.alpha_norm == AlphaNorm::HilbertSchmidt ? "hilbert-schmidt" : "operator");
    e << YAML::EndMap;

    e << YAML::Key << "mode" << YAML::Value << std::string(to_string(c.mode));
    e << YAML::Key << "seed" << YAML::Value << static_cast<unsigned long long>(c.seed);
    e << YAML::Key << "spot_checks" << YAML::Value << c.spot_checks;
    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dir" << YAML::Value << c.output_dir;
    e << YAML::Key << "trace_files" << YAML::Value << c.trace_files;
    e << YAML::EndMap;

    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

bool AnalysisConfig::operator==(const AnalysisConfig& other) const { return emit_manifest(*this) == emit_manifest(other); }

}  // namespace finitopo
