#include "finitopo/report.hpp"

#include "finitopo/error.hpp"
#include "finitopo/surfaces.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

namespace finitopo {

using json = nlohmann::json;

std::string_view to_string(StageStatus s) {
    switch (s) {
        case StageStatus::NotRequested: return "not_requested";
        case StageStatus::Ok: return "ok";
        case StageStatus::NotApplicable: return "not_applicable";
        case StageStatus::Error: return "error";
        case StageStatus::Skipped: return "skipped";
    }
    return "not_requested";
}

bool Report::has_errors() const {
    for (const StageResult* s : {&checks_stage, &a_stage, &b_stage, &properness_stage, &minimal_stage, &topology_stage})
        if (s->status == StageStatus::Error) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Analysis

namespace {

SpotChecks spot_checks(const ImmersionDef& imm, const AnalysisConfig& c) {
    SpotChecks out;
    std::mt19937_64 rng(c.seed);
    const int m = imm.m;
    const std::size_t count = static_cast<std::size_t>(c.spot_checks);
    // Sample the inner quarter of the window, where the oracles' stencils fit.
    auto draw_point = [&]() {
        Vec u(m);
        for (int k = 0; k < m; ++k) {
            const AxisGrid& ax = c.grid.axes[static_cast<std::size_t>(k)];
            const double mid = 0.5 * (ax.lo + ax.hi), half = 0.125 * (ax.hi - ax.lo);
            std::uniform_real_distribution<double> d(mid - half, mid + half);
            u[k] = d(rng);
        }
        return imm.chart.wrap(u);
    };
    std::normal_distribution<double> normal;
    for (std::size_t s = 0; s < 2 * count; ++s) {
        const Vec u = draw_point();
        Vec dir(m);
        for (int k = 0; k < m; ++k) dir[k] = normal(rng);
        try {
            const Jet2 jet = evaluate_jet(imm, u, c.tolerances);
            const MetricTensor g = metric(jet, c.tolerances);
            const Vec nu = dir / g.norm(dir);
            if (s < count) {
                const SecondForm sf = second_form(jet, g, c.tolerances);
                const double r = std::abs(ricci_extrinsic(sf, g, nu, c.tolerances) -
                                          ricci_intrinsic(imm, u, nu, c.tolerances));
                out.gauss_max_residual = std::max(out.gauss_max_residual, r);
                ++out.gauss_samples;
            } else {
                const double r = std::abs(hessian_f(imm, u, nu, c.tolerances) -
                                          hessian_f_oracle(imm, u, nu, 1e-2, c.tolerances));
                out.hessian_max_residual = std::max(out.hessian_max_residual, r);
                ++out.hessian_samples;
            }
        } catch (const GeometryError&) {
            ++out.skipped;
        }
    }
    return out;
}

template <typename F>
void run_stage(StageResult& stage, F&& body) {
    try {
        body();
        if (stage.status == StageStatus::NotRequested) stage.status = StageStatus::Ok;
    } catch (const GeometryError& e) {
        const bool verdict = e.code() == ErrorCode::NotMinimal || e.code() == ErrorCode::NotApplicable;
        stage.status = verdict ? StageStatus::NotApplicable : StageStatus::Error;
        stage.message = e.what();
    } catch (const std::exception& e) {
        stage.status = StageStatus::Error;
        stage.message = e.what();
    }
}

void skip(StageResult& stage, const char* upstream) {
    stage.status = StageStatus::Skipped;
    stage.message = std::string("needs the ") + upstream + " stage";
}

}  // namespace

Report run_analysis(const AnalysisConfig& c, bool include_timings) {
    Report rep;
    rep.config = c;
    rep.include_timings = include_timings;
    const Mode mode = c.mode;
    const bool want_a = mode != Mode::BInvariant;
    const bool want_b = mode == Mode::BInvariant || mode == Mode::Properness || mode == Mode::Full;
    const bool want_prop = mode == Mode::Properness || mode == Mode::Full;
    const bool want_topo = mode == Mode::Topology || mode == Mode::Full;
    const Tolerances& tol = c.tolerances;

    using Clock = std::chrono::steady_clock;
    auto timed = [&](const char* name, auto&& body) {
        const auto t0 = Clock::now();
        body();
        rep.timings[name] = std::chrono::duration<double>(Clock::now() - t0).count();
    };

    std::optional<ImmersionDef> imm;
    run_stage(rep.checks_stage, [&] {
        imm = builtin_surface(c.surface);
        rep.surface_label = imm->label;
        rep.dimension = imm->m;
        rep.ambient_dimension = imm->n;
        timed("checks", [&] { rep.checks = spot_checks(*imm, c); });
    });
    if (!imm) {
        for (StageResult* s : {&rep.a_stage, &rep.b_stage, &rep.properness_stage, &rep.minimal_stage,
                               &rep.topology_stage})
            skip(*s, "surface");
        return rep;
    }

    std::optional<SurfaceSamples> samples;
    std::string sampling_error;
    try {
        timed("sampling", [&] { samples = sample_surface(*imm, c.base_point, c.grid, tol); });
    } catch (const std::exception& e) {
        sampling_error = e.what();
    }
    const std::vector<double> radii = c.exhaustion.radii();

    if (want_a) {
        if (samples) {
            run_stage(rep.a_stage, [&] { timed("a_invariant", [&] { rep.a = a_sequence(*imm, *samples, radii, c.tail, tol); }); });
        } else {
            rep.a_stage = {StageStatus::Error, sampling_error};
        }
    }
    if (want_b) {
        if (samples) {
            run_stage(rep.b_stage, [&] { timed("b_invariant", [&] { rep.b = b_sequence(*imm, *samples, radii, c.tail, tol); }); });
        } else {
            rep.b_stage = {StageStatus::Error, sampling_error};
        }
    }
    if (want_prop) {
        if (rep.a) {
            run_stage(rep.properness_stage, [&] {
                timed("properness", [&] { rep.properness = certify_properness(*imm, c.base_point, *rep.a, *samples, tol); });
                if (!rep.properness->applicable) {
                    rep.properness_stage.status = StageStatus::NotApplicable;
                    rep.properness_stage.message = rep.properness->reason;
                }
            });
        } else {
            skip(rep.properness_stage, "a-invariant");
        }
        if (rep.b) {
            run_stage(rep.minimal_stage, [&] {
                timed("properness_minimal", [&] {
                    rep.properness_minimal = certify_properness_minimal(*imm, c.base_point, *rep.b, *samples, tol);
                });
                if (!rep.properness_minimal->applicable) {
                    rep.minimal_stage.status = StageStatus::NotApplicable;
                    rep.minimal_stage.message = rep.properness_minimal->reason;
                }
            });
        } else if (rep.b_stage.status == StageStatus::NotApplicable) {
            rep.minimal_stage = {StageStatus::NotApplicable, rep.b_stage.message};
        } else {
            skip(rep.minimal_stage, "b-invariant");
        }
    }
    if (want_topo) {
        if (rep.a) {
            run_stage(rep.topology_stage, [&] {
                timed("topology", [&] {
                    rep.topology = topology_certificate(*imm, c.base_point, c.center, *rep.a, samples->field, c.flow,
                                                        c.critical, tol);
                });
                if (!rep.topology->applicable) {
                    rep.topology_stage.status = StageStatus::NotApplicable;
                    rep.topology_stage.message = rep.topology->reason;
                }
            });
        } else {
            skip(rep.topology_stage, "a-invariant");
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double num(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw GeometryError(ErrorCode::ParseError, "expected a number, got " + j.dump());
}

json nums(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

std::vector<double> nums(const json& j) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(num(x));
    return v;
}

json vec(const Vec& v) {
    json a = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(num(v[k]));
    return a;
}

Vec vec(const json& j) {
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = num(j[k]);
    return v;
}

json vecs(const std::vector<Vec>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(vec(x));
    return a;
}

std::vector<Vec> vecs(const json& j) {
    std::vector<Vec> v;
    for (const auto& x : j) v.push_back(vec(x));
    return v;
}

template <typename E>
E enum_from(const json& j, std::initializer_list<E> options) {
    const std::string s = j.get<std::string>();
    for (E e : options)
        if (s == to_string(e)) return e;
    throw GeometryError(ErrorCode::ParseError, "unknown value '" + s + "'");
}

// Config echo: the canonical manifest, carried as a JSON object.
json yaml_to_json(const YAML::Node& n) {
    if (n.IsMap()) {
        json o = json::object();
        for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
        return o;
    }
    if (n.IsSequence()) {
        json a = json::array();
        for (const auto& e : n) a.push_back(yaml_to_json(e));
        return a;
    }
    if (n.IsNull()) return nullptr;
    const std::string& s = n.Scalar();
    static const std::regex integer(R"([-+]?[0-9]+)");
    if (std::regex_match(s, integer)) return n.as<long long>();
    if (s == "true" || s == "false") return s == "true";
    try {
        return num(n.as<double>());
    } catch (const YAML::BadConversion&) {
    }
    return s;
}

void json_to_yaml(YAML::Emitter& e, const json& j) {
    if (j.is_object()) {
        e << YAML::BeginMap;
        for (auto it = j.begin(); it != j.end(); ++it) {
            e << YAML::Key << it.key() << YAML::Value;
            json_to_yaml(e, it.value());
        }
        e << YAML::EndMap;
    } else if (j.is_array()) {
        e << YAML::BeginSeq;
        for (const auto& x : j) json_to_yaml(e, x);
        e << YAML::EndSeq;
    } else if (j.is_null()) {
        e << YAML::Null;
    } else if (j.is_boolean()) {
        e << j.get<bool>();
    } else if (j.is_number_integer()) {
        e << j.get<long long>();
    } else if (j.is_number()) {
        e << j.get<double>();
    } else {
        const std::string s = j.get<std::string>();
        if (s == "inf") {
            e << ".inf";
        } else if (s == "-inf") {
            e << "-.inf";
        } else {
            e << s;
        }
    }
}

json config_json(const AnalysisConfig& c) { return yaml_to_json(YAML::Load(emit_manifest(c))); }

AnalysisConfig config_from(const json& j) {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    json_to_yaml(e, j);
    return parse_manifest(e.c_str());
}

json stage_json(const StageResult& s) { return {{"status", std::string(to_string(s.status))}, {"message", s.message}}; }

StageResult stage_from(const json& j) {
    return {enum_from(j.at("status"), {StageStatus::NotRequested, StageStatus::Ok, StageStatus::NotApplicable,
                                       StageStatus::Error, StageStatus::Skipped}),
            j.at("message").get<std::string>()};
}

json verdict_json(const LimitVerdict& v) {
    return {{"kind", std::string(to_string(v.kind))}, {"limit", num(v.limit)}};
}

LimitVerdict verdict_from(const json& j) {
    return {enum_from(j.at("kind"), {Verdict::Converging, Verdict::Diverging, Verdict::Indeterminate}),
            num(j.at("limit"))};
}

template <typename Est>
json estimate_common(const Est& e) {
    return {{"radii", nums(e.radii)},
            {"shell_counts", e.shell_counts},
            {"verdict", verdict_json(e.verdict)},
            {"sample_count", e.sample_count},
            {"refinement_gap", num(e.refinement_gap)},
            {"window_reach", num(e.window_reach)},
            {"window_ok", e.window_ok},
            {"monotone_violation", num(e.monotone_violation)}};
}

template <typename Est>
void estimate_common_from(const json& j, Est& e) {
    e.radii = nums(j.at("radii"));
    e.shell_counts = j.at("shell_counts").get<std::vector<std::size_t>>();
    e.verdict = verdict_from(j.at("verdict"));
    e.sample_count = j.at("sample_count").get<std::size_t>();
    e.refinement_gap = num(j.at("refinement_gap"));
    e.window_reach = num(j.at("window_reach"));
    e.window_ok = j.at("window_ok").get<bool>();
    e.monotone_violation = num(j.at("monotone_violation"));
}

json a_json(const AEstimate& e) {
    json j = estimate_common(e);
    j["a"] = nums(e.a);
    j["argmax"] = vecs(e.argmax);
    return j;
}

AEstimate a_from(const json& j) {
    AEstimate e;
    estimate_common_from(j, e);
    e.a = nums(j.at("a"));
    e.argmax = vecs(j.at("argmax"));
    return e;
}

json b_json(const BEstimate& e) {
    json j = estimate_common(e);
    j["b"] = nums(e.b);
    j["argmin"] = vecs(e.argmin);
    return j;
}

BEstimate b_from(const json& j) {
    BEstimate e;
    estimate_common_from(j, e);
    e.b = nums(j.at("b"));
    e.argmin = vecs(j.at("argmin"));
    return e;
}

json properness_json(const PropernessCertificate& p) {
    const HessBoundData& h = p.constants;
    return {{"certified", p.certified},
            {"applicable", p.applicable},
            {"reason", p.reason},
            {"constants",
             {{"p", vec(h.p)},
              {"offset", vec(h.offset)},
              {"R0", num(h.R0)},
              {"c", num(h.c)},
              {"b", num(h.b)},
              {"tail_index", h.tail_index},
              {"ball_samples", h.ball_samples},
              {"path", std::string(to_string(h.path))}}},
            {"proposition",
             {{"proper", p.proposition.proper},
              {"bounded_below", p.proposition.bounded_below},
              {"inf_G", num(p.proposition.inf_G)},
              {"argmin_t", num(p.proposition.argmin_t)}}},
            {"eq3",
             {{"samples", p.eq3.samples},
              {"violations", p.eq3.violations},
              {"worst_margin", num(p.eq3.worst_margin)},
              {"worst_rho", num(p.eq3.worst_rho)},
              {"worst_u", vec(p.eq3.worst_u)},
              {"b_effective", num(p.eq3.b_effective)},
              {"literal_violations", p.eq3.literal_violations},
              {"sharp_violations", p.eq3.sharp_violations}}},
            {"refinement_gap", num(p.refinement_gap)},
            {"caveats", p.caveats}};
}

PropernessCertificate properness_from(const json& j) {
    PropernessCertificate p;
    p.certified = j.at("certified").get<bool>();
    p.applicable = j.at("applicable").get<bool>();
    p.reason = j.at("reason").get<std::string>();
    const json& h = j.at("constants");
    p.constants.p = vec(h.at("p"));
    p.constants.offset = vec(h.at("offset"));
    p.constants.R0 = num(h.at("R0"));
    p.constants.c = num(h.at("c"));
    p.constants.b = num(h.at("b"));
    p.constants.tail_index = h.at("tail_index").get<int>();
    p.constants.ball_samples = h.at("ball_samples").get<std::size_t>();
    p.constants.path = enum_from(h.at("path"), {TailPath::AInvariant, TailPath::BInvariant});
    const json& pr = j.at("proposition");
    p.proposition.proper = pr.at("proper").get<bool>();
    p.proposition.bounded_below = pr.at("bounded_below").get<bool>();
    p.proposition.inf_G = num(pr.at("inf_G"));
    p.proposition.argmin_t = num(pr.at("argmin_t"));
    const json& e = j.at("eq3");
    p.eq3.samples = e.at("samples").get<std::size_t>();
    p.eq3.violations = e.at("violations").get<std::size_t>();
    p.eq3.worst_margin = num(e.at("worst_margin"));
    p.eq3.worst_rho = num(e.at("worst_rho"));
    p.eq3.worst_u = vec(e.at("worst_u"));
    p.eq3.b_effective = num(e.at("b_effective"));
    p.eq3.literal_violations = e.at("literal_violations").get<std::size_t>();
    p.eq3.sharp_violations = e.at("sharp_violations").get<std::size_t>();
    p.refinement_gap = num(j.at("refinement_gap"));
    p.caveats = j.at("caveats").get<std::vector<std::string>>();
    return p;
}

json topology_json(const TopologyCertificate& t) {
    json traces = json::array();
    for (const auto& tc : t.traces)
        traces.push_back({{"index", tc.index},
                          {"termination", std::string(to_string(tc.termination))},
                          {"t_end", num(tc.t_end)},
                          {"R_affine", num(tc.R_affine)},
                          {"identity", num(tc.identity)},
                          {"conservation", num(tc.conservation)},
                          {"accumulator", num(tc.accumulator)},
                          {"angle",
                           {{"passed", tc.angle.passed},
                            {"premise_passed", tc.angle.premise_passed},
                            {"worst_margin", num(tc.angle.worst_margin)},
                            {"premise_margin", num(tc.angle.premise_margin)},
                            {"violations", tc.angle.violations}}},
                          {"passed", tc.passed}});
    json cps = json::array();
    for (const auto& cp : t.critical_points)
        cps.push_back({{"u", vec(cp.u)},
                       {"psi", num(cp.psi)},
                       {"R", num(cp.R)},
                       {"rho", num(cp.rho)},
                       {"cluster_radius", num(cp.cluster_radius)},
                       {"members", cp.members},
                       {"degenerate", cp.degenerate},
                       {"base_point", cp.base_point},
                       {"inside", cp.inside},
                       {"hessian_eigenvalues", nums(cp.hessian_eigenvalues)}});
    return {{"certified", t.certified},
            {"applicable", t.applicable},
            {"reason", t.reason},
            {"center", vec(t.center)},
            {"r", num(t.r)},
            {"R0", num(t.R0)},
            {"c", num(t.c)},
            {"t_max", num(t.t_max)},
            {"tol", num(t.tol)},
            {"seed_count", t.seed_count},
            {"ring_sizes", t.ring_sizes},
            {"min_psi0", num(t.min_psi0)},
            {"traces", traces},
            {"critical_points", cps},
            {"inside_count", t.inside_count},
            {"outside_count", t.outside_count},
            {"degenerate_count", t.degenerate_count},
            {"base_point_clusters", t.base_point_clusters},
            {"worst_R_affine", num(t.worst_R_affine)},
            {"worst_identity", num(t.worst_identity)},
            {"worst_conservation", num(t.worst_conservation)},
            {"worst_angle_margin", num(t.worst_angle_margin)},
            {"caveats", t.caveats}};
}

TopologyCertificate topology_from(const json& j) {
    TopologyCertificate t;
    t.certified = j.at("certified").get<bool>();
    t.applicable = j.at("applicable").get<bool>();
    t.reason = j.at("reason").get<std::string>();
    t.center = vec(j.at("center"));
    t.r = num(j.at("r"));
    t.R0 = num(j.at("R0"));
    t.c = num(j.at("c"));
    t.t_max = num(j.at("t_max"));
    t.tol = num(j.at("tol"));
    t.seed_count = j.at("seed_count").get<std::size_t>();
    t.ring_sizes = j.at("ring_sizes").get<std::vector<std::size_t>>();
    t.min_psi0 = num(j.at("min_psi0"));
    for (const auto& x : j.at("traces")) {
        TraceCheck tc;
        tc.index = x.at("index").get<std::size_t>();
        tc.termination = enum_from(x.at("termination"), {FlowTermination::ReachedTmax, FlowTermination::PsiFloor,
                                                         FlowTermination::LeftChart});
        tc.t_end = num(x.at("t_end"));
        tc.R_affine = num(x.at("R_affine"));
        tc.identity = num(x.at("identity"));
        tc.conservation = num(x.at("conservation"));
        tc.accumulator = num(x.at("accumulator"));
        const json& a = x.at("angle");
        tc.angle.passed = a.at("passed").get<bool>();
        tc.angle.premise_passed = a.at("premise_passed").get<bool>();
        tc.angle.worst_margin = num(a.at("worst_margin"));
        tc.angle.premise_margin = num(a.at("premise_margin"));
        tc.angle.violations = a.at("violations").get<std::size_t>();
        tc.passed = x.at("passed").get<bool>();
        t.traces.push_back(tc);
    }
    for (const auto& x : j.at("critical_points")) {
        CriticalPoint cp;
        cp.u = vec(x.at("u"));
        cp.psi = num(x.at("psi"));
        cp.R = num(x.at("R"));
        cp.rho = num(x.at("rho"));
        cp.cluster_radius = num(x.at("cluster_radius"));
        cp.members = x.at("members").get<std::size_t>();
        cp.degenerate = x.at("degenerate").get<bool>();
        cp.base_point = x.at("base_point").get<bool>();
        cp.inside = x.at("inside").get<bool>();
        cp.hessian_eigenvalues = nums(x.at("hessian_eigenvalues"));
        t.critical_points.push_back(cp);
    }
    t.inside_count = j.at("inside_count").get<std::size_t>();
    t.outside_count = j.at("outside_count").get<std::size_t>();
    t.degenerate_count = j.at("degenerate_count").get<std::size_t>();
    t.base_point_clusters = j.at("base_point_clusters").get<std::size_t>();
    t.worst_R_affine = num(j.at("worst_R_affine"));
    t.worst_identity = num(j.at("worst_identity"));
    t.worst_conservation = num(j.at("worst_conservation"));
    t.worst_angle_margin = num(j.at("worst_angle_margin"));
    t.caveats = j.at("caveats").get<std::vector<std::string>>();
    return t;
}

template <typename T, typename F>
json optional_json(const std::optional<T>& x, F&& f) {
    return x ? f(*x) : json(nullptr);
}

}  // namespace

std::string report_json(const Report& r) {
    json j;
    j["schema_version"] = r.schema_version;
    j["toolkit_version"] = r.toolkit_version;
    j["config"] = config_json(r.config);
    j["surface"] = {{"label", r.surface_label}, {"dimension", r.dimension}, {"ambient_dimension", r.ambient_dimension}};
    j["stages"] = {{"checks", stage_json(r.checks_stage)},       {"a_invariant", stage_json(r.a_stage)},
                   {"b_invariant", stage_json(r.b_stage)},       {"properness", stage_json(r.properness_stage)},
                   {"properness_minimal", stage_json(r.minimal_stage)}, {"topology", stage_json(r.topology_stage)}};
    j["checks"] = {{"gauss_samples", r.checks.gauss_samples},
                   {"gauss_max_residual", num(r.checks.gauss_max_residual)},
                   {"hessian_samples", r.checks.hessian_samples},
                   {"hessian_max_residual", num(r.checks.hessian_max_residual)},
                   {"skipped", r.checks.skipped}};
    j["a_invariant"] = optional_json(r.a, a_json);
    j["b_invariant"] = optional_json(r.b, b_json);
    j["properness"] = optional_json(r.properness, properness_json);
    j["properness_minimal"] = optional_json(r.properness_minimal, properness_json);
    j["topology"] = optional_json(r.topology, topology_json);
    if (r.include_timings) {
        json t = json::object();
        for (const auto& [k, v] : r.timings) t[k] = num(v);
        j["timings"] = t;
    }
    return j.dump(2) + "\n";
}

Report parse_report(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw GeometryError(ErrorCode::ParseError, std::string("report: ") + e.what());
    }
    try {
        Report r;
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kSchemaVersion)
            throw GeometryError(ErrorCode::ParseError,
                                "report schema_version " + std::to_string(r.schema_version) + " is not supported");
        r.toolkit_version = j.at("toolkit_version").get<std::string>();
        r.config = config_from(j.at("config"));
        const json& s = j.at("surface");
        r.surface_label = s.at("label").get<std::string>();
        r.dimension = s.at("dimension").get<int>();
        r.ambient_dimension = s.at("ambient_dimension").get<int>();
        const json& st = j.at("stages");
        r.checks_stage = stage_from(st.at("checks"));
        r.a_stage = stage_from(st.at("a_invariant"));
        r.b_stage = stage_from(st.at("b_invariant"));
        r.properness_stage = stage_from(st.at("properness"));
        r.minimal_stage = stage_from(st.at("properness_minimal"));
        r.topology_stage = stage_from(st.at("topology"));
        const json& c = j.at("checks");
        r.checks.gauss_samples = c.at("gauss_samples").get<std::size_t>();
        r.checks.gauss_max_residual = num(c.at("gauss_max_residual"));
        r.checks.hessian_samples = c.at("hessian_samples").get<std::size_t>();
        r.checks.hessian_max_residual = num(c.at("hessian_max_residual"));
        r.checks.skipped = c.at("skipped").get<std::size_t>();
        if (!j.at("a_invariant").is_null()) r.a = a_from(j["a_invariant"]);
        if (!j.at("b_invariant").is_null()) r.b = b_from(j["b_invariant"]);
        if (!j.at("properness").is_null()) r.properness = properness_from(j["properness"]);
        if (!j.at("properness_minimal").is_null()) r.properness_minimal = properness_from(j["properness_minimal"]);
        if (!j.at("topology").is_null()) r.topology = topology_from(j["topology"]);
        if (j.contains("timings")) {
            r.include_timings = true;
            for (auto it = j["timings"].begin(); it != j["timings"].end(); ++it) r.timings[it.key()] = num(it.value());
        }
        return r;
    } catch (const json::exception& e) {
        throw GeometryError(ErrorCode::ParseError, std::string("report: ") + e.what());
    }
}

Report load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GeometryError(ErrorCode::IoError, "cannot read report '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_report(ss.str());
}

// ---------------------------------------------------------------------------
// Summary and files

namespace {

std::string printf_str(const char* fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

std::string limit_line(const char* name, const LimitVerdict& v, const std::vector<double>& seq) {
    double shown = v.limit;
    std::string note;
    if (!std::isfinite(shown)) {
        shown = seq.empty() ? std::numeric_limits<double>::quiet_NaN() : seq.back();
        note = ", last value";
    }
    const std::string value = std::isfinite(shown) ? printf_str("%.3f", shown) : "n/a";
    return std::string(name) + ": " + value + " (" + std::string(to_string(v.kind)) + note + ")";
}

std::string sequence_line(const char* name, const std::vector<double>& radii, const std::vector<double>& seq) {
    std::string s = std::string("  ") + name + ":";
    for (std::size_t i = 0; i < seq.size(); ++i) s += printf_str(" %.4g@%g", seq[i], radii[i]);
    return s;
}

std::string stage_line(const char* name, const StageResult& s) {
    std::string line = printf_str("%-24s %s", name, std::string(to_string(s.status)).c_str());
    if (!s.message.empty()) line += "  " + s.message;
    return line;
}

void properness_lines(std::ostringstream& os, const char* name, const PropernessCertificate& p) {
    os << name << ": " << (p.certified ? "certified" : p.applicable ? "not certified" : "not applicable");
    if (p.applicable)
        os << printf_str(" (R0 = %g, c = %.4f, b = %.4g)", p.constants.R0, p.constants.c, p.constants.b);
    os << "\n";
    if (!p.reason.empty()) os << "  reason: " << p.reason << "\n";
    if (p.applicable)
        os << printf_str("  bound check: %zu samples, %zu violations, worst margin %.4g\n", p.eq3.samples,
                         p.eq3.violations, p.eq3.worst_margin);
}

}  // namespace

std::string summary_text(const Report& r) {
    std::ostringstream os;
    os << "finitopo " << r.toolkit_version << " (report schema " << r.schema_version << ")\n";
    os << "surface: " << r.surface_label << " (m = " << r.dimension << ", n = " << r.ambient_dimension << ")\n";
    os << "mode: " << to_string(r.config.mode) << "\n\n";

    os << "stages\n";
    os << "  " << stage_line("checks", r.checks_stage) << "\n";
    os << "  " << stage_line("a-invariant", r.a_stage) << "\n";
    os << "  " << stage_line("b-invariant", r.b_stage) << "\n";
    os << "  " << stage_line("properness", r.properness_stage) << "\n";
    os << "  " << stage_line("properness (Ricci)", r.minimal_stage) << "\n";
    os << "  " << stage_line("topology", r.topology_stage) << "\n\n";

    os << printf_str("spot checks: Gauss residual %.3g over %zu, Hessian residual %.3g over %zu\n",
                     r.checks.gauss_max_residual, r.checks.gauss_samples, r.checks.hessian_max_residual,
                     r.checks.hessian_samples);
    if (r.a) {
        os << limit_line("a(M)", r.a->verdict, r.a->a) << "\n" << sequence_line("a_i", r.a->radii, r.a->a) << "\n";
        os << printf_str("  lattice gap %.3g, window reach %.4g\n", r.a->refinement_gap, r.a->window_reach);
    }
    if (r.b) os << limit_line("b(M)", r.b->verdict, r.b->b) << "\n" << sequence_line("b_i", r.b->radii, r.b->b) << "\n";
    if (r.properness) properness_lines(os, "properness", *r.properness);
    if (r.properness_minimal) properness_lines(os, "properness (Ricci)", *r.properness_minimal);
    if (r.topology) {
        const TopologyCertificate& t = *r.topology;
        os << "topology: " << (t.certified ? "certified" : t.applicable ? "not certified" : "not applicable");
        if (t.applicable) os << printf_str(" (r = %g, c = %.4f, %zu flow lines)", t.r, t.c, t.seed_count);
        os << "\n";
        if (!t.reason.empty()) os << "  reason: " << t.reason << "\n";
        if (t.applicable) {
            os << printf_str("  critical clusters: %zu inside, %zu outside, %zu degenerate\n", t.inside_count,
                             t.outside_count, t.degenerate_count);
            os << printf_str("  residuals: R affine %.3g, identity %.3g, conservation %.3g, angle margin %.3g\n",
                             t.worst_R_affine, t.worst_identity, t.worst_conservation, t.worst_angle_margin);
        }
        for (const auto& c : t.caveats) os << "  note: " << c << "\n";
    }
    if (r.include_timings) {
        os << "\ntimings\n";
        for (const auto& [k, v] : r.timings) os << printf_str("  %-20s %.3f s\n", k.c_str(), v);
    }
    return os.str();
}

void emit(const Report& r, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw GeometryError(ErrorCode::IoError, "cannot create '" + dir + "': " + ec.message());
    auto write = [&](const fs::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        out << text;
        if (!out) throw GeometryError(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    };
    write(fs::path(dir) / "report.json", report_json(r));
    write(fs::path(dir) / "summary.txt", summary_text(r));

    if (!r.topology || r.topology->flow_traces.empty() || r.config.trace_files == 0) return;
    const auto& traces = r.topology->flow_traces;
    const fs::path tdir = fs::path(dir) / "traces";
    fs::create_directories(tdir, ec);
    if (ec) throw GeometryError(ErrorCode::IoError, "cannot create '" + tdir.string() + "': " + ec.message());
    const std::size_t files = std::min(traces.size(), static_cast<std::size_t>(r.config.trace_files));
    for (std::size_t k = 0; k < files; ++k) {
        const std::size_t idx = k * traces.size() / files;
        const std::string stem = printf_str("trace_%03zu", idx);
        std::ostringstream csv, dat;
        write_trace_csv(traces[idx], r.topology->c, csv);
        write_plot_data(traces[idx], r.topology->c, dat);
        write(tdir / (stem + ".csv"), csv.str());
        write(tdir / (stem + ".dat"), dat.str());
    }
}

}  // namespace finitopo
