#include "finitopo/surfaces.hpp"

#include "finitopo/error.hpp"
#include "finitopo/expression.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace finitopo {

namespace {

constexpr double kPi = std::numbers::pi;

double param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void check_keys(const std::string& name, const std::map<std::string, double>& params,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : params) {
        if (!allowed.count(key))
            throw GeometryError(ErrorCode::BadParams, "surface '" + name + "' has no parameter '" + key + "'");
        if (!std::isfinite(value) && key != "height")
            throw GeometryError(ErrorCode::BadParams, "parameter '" + key + "' must be finite");
    }
}

void set_col(Mat& m, int c, double x, double y, double z) { m.col(c) << x, y, z; }

ImmersionDef plane() {
    ImmersionDef imm;
    imm.m = 2;
    imm.n = 3;
    imm.label = "plane";
    imm.chart.axes = {ChartAxis{}, ChartAxis{}};
    imm.geodesic_lines = GeodesicLines::AllStraight;
    imm.evaluator = [](const Vec& u) {
        Jet2 j = Jet2::zero(3, 2);
        j.value << u[0], u[1], 0.0;
        j.jac(0, 0) = 1.0;
        j.jac(1, 1) = 1.0;
        return j;
    };
    return imm;
}

ImmersionDef cone(double beta, double s0) {
    if (!(beta > 0.0 && beta < kPi / 2))
        throw GeometryError(ErrorCode::BadParams, "cone beta must lie in (0, pi/2)");
    if (!(s0 > 0.0)) throw GeometryError(ErrorCode::BadParams, "cone s0 must be positive");
    ImmersionDef imm;
    imm.m = 2;
    imm.n = 3;
    imm.label = "cone";
    imm.chart.axes = {ChartAxis{s0, kInf, false}, ChartAxis{-kPi, kPi, true}};
    imm.geodesic_lines = GeodesicLines::Meridians;
    imm.meridian_axis = 0;
    const double sb = std::sin(beta), cb = std::cos(beta);
    imm.evaluator = [sb, cb](const Vec& u) {
        const double s = u[0], c = std::cos(u[1]), n = std::sin(u[1]);
        Jet2 j = Jet2::zero(3, 2);
        j.value << s * sb * c, s * sb * n, s * cb;
        set_col(j.jac, 0, sb * c, sb * n, cb);
        set_col(j.jac, 1, -s * sb * n, s * sb * c, 0.0);
        set_col(j.hess, 1, -sb * n, sb * c, 0.0);
        set_col(j.hess, 2, -sb * n, sb * c, 0.0);
        set_col(j.hess, 3, -s * sb * c, -s * sb * n, 0.0);
        return j;
    };
    return imm;
}

ImmersionDef catenoid(double a) {
    if (!(a > 0.0)) throw GeometryError(ErrorCode::BadParams, "catenoid scale must be positive");
    ImmersionDef imm;
    imm.m = 2;
    imm.n = 3;
    imm.label = "catenoid";
    imm.chart.axes = {ChartAxis{-kPi, kPi, true}, ChartAxis{}};
    imm.geodesic_lines = GeodesicLines::Meridians;
    imm.meridian_axis = 1;
    imm.evaluator = [a](const Vec& u) {
        const double c = std::cos(u[0]), s = std::sin(u[0]);
        const double ch = std::cosh(u[1]), sh = std::sinh(u[1]);
        Jet2 j = Jet2::zero(3, 2);
        j.value << a * ch * c, a * ch * s, a * u[1];
        set_col(j.jac, 0, -a * ch * s, a * ch * c, 0.0);
        set_col(j.jac, 1, a * sh * c, a * sh * s, a);
        set_col(j.hess, 0, -a * ch * c, -a * ch * s, 0.0);
        set_col(j.hess, 1, -a * sh * s, a * sh * c, 0.0);
        set_col(j.hess, 2, -a * sh * s, a * sh * c, 0.0);
        set_col(j.hess, 3, a * ch * c, a * ch * s, 0.0);
        return j;
    };
    return imm;
}

ImmersionDef helicoid(double height) {
    if (!(height > 0.0)) throw GeometryError(ErrorCode::BadParams, "helicoid height must be positive");
    ImmersionDef imm;
    imm.m = 2;
    imm.n = 3;
    imm.label = std::isfinite(height) ? "helicoid strip" : "helicoid";
    imm.chart.axes = {ChartAxis{-height, height, false}, ChartAxis{}};
    imm.geodesic_lines = GeodesicLines::Meridians;
    imm.meridian_axis = 1;
    imm.evaluator = [](const Vec& u) {
        const double c = std::cos(u[0]), s = std::sin(u[0]), v = u[1];
        Jet2 j = Jet2::zero(3, 2);
        j.value << v * c, v * s, u[0];
        set_col(j.jac, 0, -v * s, v * c, 1.0);
        set_col(j.jac, 1, c, s, 0.0);
        set_col(j.hess, 0, -v * c, -v * s, 0.0);
        set_col(j.hess, 1, -s, c, 0.0);
        set_col(j.hess, 2, -s, c, 0.0);
        return j;
    };
    return imm;
}

ImmersionDef paraboloid(double k) {
    if (!(k > 0.0)) throw GeometryError(ErrorCode::BadParams, "paraboloid curvature must be positive");
    ImmersionDef imm;
    imm.m = 2;
    imm.n = 3;
    imm.label = "paraboloid";
    imm.chart.axes = {ChartAxis{}, ChartAxis{}};
    imm.evaluator = [k](const Vec& u) {
        Jet2 j = Jet2::zero(3, 2);
        j.value << u[0], u[1], 0.5 * k * (u[0] * u[0] + u[1] * u[1]);
        set_col(j.jac, 0, 1.0, 0.0, k * u[0]);
        set_col(j.jac, 1, 0.0, 1.0, k * u[1]);
        j.hess(2, 0) = k;
        j.hess(2, 3) = k;
        return j;
    };
    return imm;
}

ImmersionDef enneper() {
    ImmersionDef imm;
    imm.m = 2;
    imm.n = 3;
    imm.label = "enneper";
    imm.chart.axes = {ChartAxis{}, ChartAxis{}};
    imm.evaluator = [](const Vec& x) {
        const double u = x[0], v = x[1];
        Jet2 j = Jet2::zero(3, 2);
        j.value << u - u * u * u / 3 + u * v * v, v - v * v * v / 3 + v * u * u, u * u - v * v;
        set_col(j.jac, 0, 1 - u * u + v * v, 2 * u * v, 2 * u);
        set_col(j.jac, 1, 2 * u * v, 1 - v * v + u * u, -2 * v);
        set_col(j.hess, 0, -2 * u, 2 * v, 2.0);
        set_col(j.hess, 1, 2 * v, 2 * u, 0.0);
        set_col(j.hess, 2, 2 * v, 2 * u, 0.0);
        set_col(j.hess, 3, 2 * u, -2 * v, -2.0);
        return j;
    };
    return imm;
}

// Component expressions differentiated in forward mode.
JetEvaluator expression_evaluator(std::vector<Expression> comps, int m) {
    return [comps = std::move(comps), m](const Vec& u) {
        std::vector<Taylor2> vars;
        for (int k = 0; k < m; ++k) vars.push_back(Taylor2::variable(u[k], static_cast<std::size_t>(k)));
        const int n = static_cast<int>(comps.size());
        Jet2 j = Jet2::zero(n, m);
        for (int a = 0; a < n; ++a) {
            const Taylor2 t = comps[static_cast<std::size_t>(a)].evaluate(vars);
            if (!std::isfinite(t.value()))
                throw GeometryError(ErrorCode::OutOfChart, "expression is not finite at this point");
            j.value[a] = t.value();
            for (int i = 0; i < m; ++i) {
                j.jac(a, i) = t.grad(static_cast<std::size_t>(i));
                for (int k = 0; k < m; ++k)
                    j.hess(a, i * m + k) = t.hess(static_cast<std::size_t>(i), static_cast<std::size_t>(k));
            }
        }
        return j;
    };
}

ImmersionDef graph_surface(const std::string& function, const std::map<std::string, double>& params) {
    const std::string f = function.empty() ? "log(1 + u^2 + v^2)" : function;
    std::vector<Expression> comps{Expression("u", {"u", "v"}), Expression("v", {"u", "v"}),
                                  Expression(f, {"u", "v"}, params)};
    ImmersionDef imm;
    imm.m = 2;
    imm.n = 3;
    imm.label = "graph z = " + f;
    imm.chart.axes = {ChartAxis{}, ChartAxis{}};
    imm.evaluator = expression_evaluator(std::move(comps), 2);
    return imm;
}

ImmersionDef expression_surface(const SurfaceSpec& spec) {
    const int m = static_cast<int>(spec.variables.size());
    const int n = static_cast<int>(spec.components.size());
    if (m < 1 || m > static_cast<int>(Taylor2::kMaxVars))
        throw GeometryError(ErrorCode::BadParams, "expression surfaces need 1 to 4 chart variables");
    if (n <= m) throw GeometryError(ErrorCode::BadParams, "ambient dimension must exceed the chart dimension");
    std::vector<Expression> comps;
    for (const auto& c : spec.components) comps.emplace_back(c, spec.variables, spec.params);
    ImmersionDef imm;
    imm.m = m;
    imm.n = n;
    imm.label = "expression";
    if (spec.chart.empty()) {
        imm.chart.axes.assign(static_cast<std::size_t>(m), ChartAxis{});
    } else {
        if (static_cast<int>(spec.chart.size()) != m)
            throw GeometryError(ErrorCode::BadParams, "chart needs one axis per variable");
        imm.chart.axes = spec.chart;
        for (const auto& ax : imm.chart.axes) {
            if (!(ax.hi > ax.lo)) throw GeometryError(ErrorCode::BadParams, "chart axis with hi <= lo");
            if (ax.periodic && !std::isfinite(ax.period()))
                throw GeometryError(ErrorCode::BadParams, "periodic axes need finite bounds");
        }
    }
    imm.evaluator = expression_evaluator(std::move(comps), m);
    return imm;
}

AxisGrid uniform(double lo, double hi, int nodes) { return AxisGrid{lo, hi, nodes, Spacing::Uniform, 1.0}; }

}  // namespace

const std::vector<GalleryEntry>& gallery() {
    static const std::vector<GalleryEntry> entries = {
        {"plane", "flat plane z = 0", {}},
        {"cone", "cone of half-angle beta truncated at slant s0", {"beta", "s0"}},
        {"catenoid", "catenoid of neck radius a", {"a"}},
        {"helicoid", "helicoid; finite height gives the strip |u| < height", {"height"}},
        {"paraboloid", "paraboloid z = k(u^2 + v^2)/2", {"k"}},
        {"enneper", "Enneper's minimal surface", {}},
        {"graph", "graph z = f(u, v) of an expression (default log(1 + u^2 + v^2))", {"<constants>"}},
    };
    return entries;
}

ImmersionDef builtin_surface(const SurfaceSpec& spec) {
    const auto& p = spec.params;
    const std::string& name = spec.name;
    if (name == "plane") {
        check_keys(name, p, {});
        return plane();
    }
    if (name == "cone") {
        check_keys(name, p, {"beta", "s0"});
        return cone(param(p, "beta", kPi / 3), param(p, "s0", 0.5));
    }
    if (name == "catenoid") {
        check_keys(name, p, {"a"});
        return catenoid(param(p, "a", 1.0));
    }
    if (name == "helicoid") {
        check_keys(name, p, {"height"});
        return helicoid(param(p, "height", kInf));
    }
    if (name == "paraboloid") {
        check_keys(name, p, {"k"});
        return paraboloid(param(p, "k", 1.0));
    }
    if (name == "enneper") {
        check_keys(name, p, {});
        return enneper();
    }
    if (name == "graph") return graph_surface(spec.function, p);
    if (name == "expression") return expression_surface(spec);
    throw GeometryError(ErrorCode::UnknownSurface, "no surface named '" + name + "'");
}

ImmersionDef builtin_surface(const std::string& name, const std::map<std::string, double>& params) {
    SurfaceSpec spec;
    spec.name = name;
    spec.params = params;
    return builtin_surface(spec);
}

SurfaceDefaults surface_defaults(const SurfaceSpec& spec) {
    SurfaceDefaults d;
    const std::string& name = spec.name;
    if (name == "plane") {
        d.base_point = Vec::Zero(2);
        d.grid.axes = {uniform(-33, 33, 133), uniform(-33, 33, 133)};
        d.r0 = 1.0;
        d.count = 4;
    } else if (name == "cone") {
        const double s0 = param(spec.params, "s0", 0.5);
        const double beta = param(spec.params, "beta", kPi / 3);
        d.base_point = Vec(2);
        d.base_point << std::max(1.0, 2.0 * s0), 0.0;
        // Log spacing in s keeps the cells close to square in the flat metric.
        const double s_hi = 520.0 * std::max(1.0, 2.0 * s0);
        const int theta_nodes = 128;
        const double dw = 2.0 * kPi / theta_nodes * std::sin(beta);
        const int s_nodes = static_cast<int>(std::ceil(std::log(s_hi / s0) / dw)) + 1;
        d.grid.axes = {AxisGrid{s0, s_hi, s_nodes, Spacing::Geometric, 1.0},
                       uniform(-kPi, kPi, theta_nodes)};
        d.r0 = 4.0 * std::max(1.0, 2.0 * s0);
        d.count = 6;
    } else if (name == "catenoid") {
        const double a = param(spec.params, "a", 1.0);
        (void)a;
        d.base_point = Vec::Zero(2);
        d.grid.axes = {uniform(-kPi, kPi, 128), uniform(-7.7, 7.7, 315)};
        d.r0 = a;
        d.count = 9;
    } else if (name == "helicoid") {
        const double h = param(spec.params, "height", kInf);
        const double uw = std::min(64.0, h);
        d.base_point = Vec::Zero(2);
        const int u_nodes = static_cast<int>(std::ceil(2.0 * uw / 0.25)) + 1;
        d.grid.axes = {uniform(-uw, uw, u_nodes), AxisGrid{-64, 64, 39, Spacing::Sinh, 1.0}};
        d.r0 = 1.0;
        d.count = 5;
    } else if (name == "paraboloid") {
        d.base_point = Vec::Zero(2);
        const AxisGrid ax{-33, 33, 121, Spacing::Sinh, 4.0};
        d.grid.axes = {ax, ax};
        d.r0 = 1.0;
        d.count = 8;
    } else if (name == "enneper") {
        d.base_point = Vec::Zero(2);
        d.grid.axes = {uniform(-8, 8, 161), uniform(-8, 8, 161)};
        d.r0 = 1.0;
        d.count = 6;
    } else if (name == "graph") {
        d.base_point = Vec::Zero(2);
        const AxisGrid ax{-66, 66, 169, Spacing::Sinh, 2.0};
        d.grid.axes = {ax, ax};
        d.r0 = 1.0;
        d.count = 5;
    } else {
        const int m = static_cast<int>(spec.variables.size());
        d.base_point = Vec::Zero(m);
        for (int k = 0; k < m; ++k) {
            ChartAxis ax = k < static_cast<int>(spec.chart.size()) ? spec.chart[static_cast<std::size_t>(k)]
                                                                    : ChartAxis{};
            const double lo = std::isfinite(ax.lo) ? ax.lo : -10.0;
            const double hi = std::isfinite(ax.hi) ? ax.hi : 10.0;
            d.base_point[k] = 0.5 * (lo + hi);
            d.grid.axes.push_back(uniform(lo, hi, m <= 2 ? 101 : 21));
        }
        d.r0 = 1.0;
        d.count = 4;
    }
    return d;
}

}  // namespace finitopo
