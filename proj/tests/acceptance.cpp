// Acceptance suite: one PASS/FAIL line per criterion. Run with criterion
// numbers as arguments to select a subset.

#include "finitopo/config.hpp"
#include "finitopo/error.hpp"
#include "finitopo/invariants.hpp"
#include "finitopo/properness.hpp"
#include "finitopo/radial_flow.hpp"
#include "finitopo/report.hpp"
#include "finitopo/surfaces.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace finitopo;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back((ok ? "ok    " : "FAIL  ") + what);
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec random_unit(std::mt19937_64& rng, const MetricTensor& g) {
    std::normal_distribution<double> n;
    Vec v(g.g.rows());
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = n(rng);
    return v / g.norm(v);
}

struct Box {
    const char* name;
    double lo0, hi0, lo1, hi1;

    Vec sample(std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> a(lo0, hi0), b(lo1, hi1);
        const double x = a(rng);
        return vec2(x, b(rng));
    }
};

// Sampled surface with its a-sequence, built once per surface.
struct Pipeline {
    SurfaceSpec spec;
    ImmersionDef imm;
    SurfaceDefaults d;
    SurfaceSamples samples;
    AEstimate a;
};

const Pipeline& pipeline(const std::string& name) {
    static std::map<std::string, std::unique_ptr<Pipeline>> cache;
    auto& slot = cache[name];
    if (!slot) {
        auto p = std::make_unique<Pipeline>();
        p->spec.name = name;
        p->imm = builtin_surface(p->spec);
        p->d = surface_defaults(p->spec);
        p->samples = sample_surface(p->imm, p->d.base_point, p->d.grid);
        p->a = a_sequence(p->imm, p->samples, exhaustion_radii(p->d.r0, p->d.count));
        slot = std::move(p);
    }
    return *slot;
}

std::string seq(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += fmt(i ? ", %.4g" : "%.4g", v[i]);
    return s + "]";
}

// 1. Gauss equation against the intrinsic curvature oracle.
Outcome gauss_suite() {
    Outcome o;
    std::mt19937_64 rng(101);
    const Box boxes[] = {{"catenoid", -kPi, kPi, -2, 2}, {"helicoid", -2, 2, -3, 3}, {"cone", 1, 8, -kPi, kPi},
                         {"plane", -5, 5, -5, 5}};
    for (const Box& b : boxes) {
        const ImmersionDef imm = builtin_surface(b.name);
        double worst = 0.0;
        int bad = 0;
        const int n = 150;
        for (int k = 0; k < n; ++k) {
            const Vec u = b.sample(rng);
            const Jet2 jet = evaluate_jet(imm, u);
            const MetricTensor g = metric(jet);
            const Vec nu = random_unit(rng, g);
            const double ext = ricci_extrinsic(second_form(jet, g), g, nu);
            const double in = ricci_intrinsic(imm, u, nu);
            const double tol = std::max(1e-4, 1e-3 * std::abs(ext));
            worst = std::max(worst, std::abs(ext - in) / tol);
            bad += std::abs(ext - in) > tol;
        }
        o.require(bad == 0, fmt("%-9s %d pairs, worst residual %.3g of tolerance", b.name, n, worst));
    }
    return o;
}

// 2. Hessian identity against second differences along geodesics.
Outcome hessian_identity() {
    Outcome o;
    std::mt19937_64 rng(103);
    const Box boxes[] = {{"plane", -5, 5, -5, 5},     {"cone", 1, 6, -kPi, kPi},     {"catenoid", -kPi, kPi, -1.5, 1.5},
                         {"helicoid", -1.5, 1.5, -2, 2}, {"paraboloid", -1, 1, -1, 1}, {"enneper", -1, 1, -1, 1},
                         {"graph", -2, 2, -2, 2}};
    int total = 0, bad = 0;
    double worst = 0.0;
    for (const Box& b : boxes) {
        const ImmersionDef imm = builtin_surface(b.name);
        for (int k = 0; k < 40; ++k, ++total) {
            const Vec u = b.sample(rng);
            const Vec nu = random_unit(rng, metric(evaluate_jet(imm, u)));
            const double d = std::abs(hessian_f(imm, u, nu) - hessian_f_oracle(imm, u, nu));
            worst = std::max(worst, d);
            bad += d > 1e-4;
        }
    }
    o.require(total >= 200 && bad == 0, fmt("%d triples over 7 surfaces, max |difference| %.3g (limit 1e-4)", total, worst));
    return o;
}

// 3. a(M) oracle values.
Outcome a_values() {
    Outcome o;
    {
        const AEstimate& a = pipeline("plane").a;
        double m = 0.0;
        for (double v : a.a) m = std::max(m, std::abs(v));
        o.require(m <= 1e-12 && a.verdict.kind == Verdict::Converging,
                  fmt("plane      a_i max %.3g, %s", m, std::string(to_string(a.verdict.kind)).c_str()));
    }
    for (const char* name : {"catenoid", "helicoid"}) {
        const AEstimate& a = pipeline(name).a;
        const bool ok = a.verdict.kind == Verdict::Converging && a.verdict.limit <= 0.05;
        o.require(ok, fmt("%-10s %s, a_i = %s (need converging, limit <= 0.05)", name,
                          std::string(to_string(a.verdict.kind)).c_str(), seq(a.a).c_str()));
    }
    {
        const AEstimate& a = pipeline("cone").a;
        const double cot = 1 / std::tan(kPi / 3);
        const double rel = std::abs(a.verdict.limit - cot) / cot;
        o.require(a.verdict.kind == Verdict::Converging && rel <= 0.02,
                  fmt("cone       limit %.5f vs cot(pi/3) = %.5f, relative error %.3g", a.verdict.limit, cot, rel));
    }
    {
        const AEstimate& a = pipeline("paraboloid").a;
        o.require(a.verdict.kind == Verdict::Diverging,
                  fmt("paraboloid %s, a_i = %s", std::string(to_string(a.verdict.kind)).c_str(), seq(a.a).c_str()));
    }
    return o;
}

// 4. b(M) and the minimal-surface certificate.
Outcome b_values() {
    Outcome o;
    for (const char* name : {"catenoid", "helicoid"}) {
        const Pipeline& p = pipeline(name);
        try {
            const BEstimate b = b_sequence(p.imm, p.samples, p.a.radii);
            const bool conv = b.verdict.kind == Verdict::Converging && std::abs(b.verdict.limit) <= 0.05;
            o.require(conv, fmt("%-9s %s, b_i = %s (need converging to 0 within 0.05)", name,
                                std::string(to_string(b.verdict.kind)).c_str(), seq(b.b).c_str()));
            const PropernessCertificate cert = certify_properness_minimal(p.imm, p.d.base_point, b, p.samples);
            o.require(cert.certified, fmt("%-9s minimal-path certificate %s%s", name,
                                          cert.certified ? "issued" : "not issued: ", cert.reason.c_str()));
        } catch (const GeometryError& e) {
            o.require(false, fmt("%-9s %s", name, e.what()));
        }
    }
    return o;
}

// 5. Flow invariants on every surface whose a-sequence has a tail below 1.
Outcome flow_invariants() {
    Outcome o;
    for (const auto& g : gallery()) {
        const Pipeline& p = pipeline(g.name);
        if (first_bounded_tail(p.a.a) < 0 || p.a.verdict.kind == Verdict::Diverging) {
            o.notes.push_back(fmt("skip  %-10s no a_i < 1 tail", g.name.c_str()));
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        const TopologyCertificate tc = topology_certificate(p.imm, p.d.base_point, p.d.center, p.a, p.samples.field);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::size_t bad = 0;
        double w_aff = 0, w_rms = 0, w_id = 0, w_margin = kInf;
        for (const TraceCheck& t : tc.traces) {
            const bool ok = t.termination == FlowTermination::ReachedTmax && t.R_affine <= 10 * tc.tol &&
                            t.conservation <= 1e-4 && t.identity <= 1e-5 && t.angle.passed;
            bad += !ok;
            w_aff = std::max(w_aff, t.R_affine);
            w_rms = std::max(w_rms, t.conservation);
            w_id = std::max(w_id, t.identity);
            w_margin = std::min(w_margin, t.angle.worst_margin);
        }
        std::size_t min_ring = SIZE_MAX;
        for (std::size_t n : tc.ring_sizes)
            if (n > 0) min_ring = std::min(min_ring, n);
        const bool ok = !tc.traces.empty() && bad == 0 && min_ring >= 64 && tc.t_max >= 50 * tc.r * (1 - 1e-12) &&
                        secs <= 120;
        o.require(ok, fmt("%-10s %zu traces (min ring %zu) to t = %.4g: R-affine %.2g, Eq7 rms %.2g, Eq8 %.2g, "
                          "envelope margin %.2g, %zu failed, %.1f s",
                          g.name.c_str(), tc.traces.size(), min_ring, tc.t_max, w_aff, w_rms, w_id, w_margin, bad,
                          secs));
    }
    return o;
}

// 6. Pointwise Eq. 3 bound on certified surfaces.
Outcome eq3_bound() {
    Outcome o;
    for (const auto& g : gallery()) {
        const Pipeline& p = pipeline(g.name);
        const PropernessCertificate cert = certify_properness(p.imm, p.d.base_point, p.a, p.samples);
        if (!cert.applicable) {
            o.notes.push_back(fmt("skip  %-10s %s", g.name.c_str(), cert.reason.c_str()));
            continue;
        }
        o.require(cert.certified && cert.eq3.violations == 0 && cert.eq3.samples >= 10000,
                  fmt("%-10s %zu samples, %zu violations, worst margin %.4g", g.name.c_str(), cert.eq3.samples,
                      cert.eq3.violations, cert.eq3.worst_margin));
    }
    return o;
}

// 7. Topology certificates and critical structure.
Outcome topology() {
    Outcome o;
    auto non_base = [](const TopologyCertificate& tc) {
        std::size_t n = 0;
        for (const auto& c : tc.critical_points) n += !c.base_point;
        return n;
    };
    for (const char* name : {"plane", "cone"}) {
        const Pipeline& p = pipeline(name);
        const TopologyCertificate tc = topology_certificate(p.imm, p.d.base_point, std::nullopt, p.a, p.samples.field);
        o.require(tc.certified && tc.base_point_clusters == 1 && non_base(tc) == 0 && tc.outside_count == 0,
                  fmt("%-21s certified=%d, base-point clusters %zu, other critical points %zu, outside %zu", name,
                      tc.certified, tc.base_point_clusters, non_base(tc), tc.outside_count));
    }
    const Pipeline& cat = pipeline("catenoid");
    {
        Vec o3(3);
        o3 << 0.3, 0, 0;
        const TopologyCertificate tc = topology_certificate(cat.imm, cat.d.base_point, o3, cat.a, cat.samples.field);
        o.require(tc.certified && tc.degenerate_count == 0 && non_base(tc) > 0 && tc.outside_count == 0,
                  fmt("catenoid, offset 0.3   certified=%d, %zu isolated critical points, %zu degenerate", tc.certified,
                      non_base(tc), tc.degenerate_count));
    }
    {
        const TopologyCertificate tc =
            topology_certificate(cat.imm, cat.d.base_point, Vec(Vec::Zero(3)), cat.a, cat.samples.field);
        o.require(!tc.certified && tc.degenerate_count >= 1,
                  fmt("catenoid, symmetric    certified=%d, %zu degenerate set(s): %s", tc.certified,
                      tc.degenerate_count, tc.reason.c_str()));
    }
    return o;
}

// 8. Scale invariance of the a-sequence.
Outcome scale_invariance() {
    Outcome o;
    for (const char* name : {"plane", "cone", "catenoid", "enneper"}) {
        const Pipeline& p = pipeline(name);
        double worst = 0.0;
        for (double lambda : {0.5, 3.0}) {
            std::vector<double> radii;
            for (double R : p.a.radii) radii.push_back(lambda * R);
            const AEstimate a = a_sequence(scaled(p.imm, lambda), p.d.base_point, radii, p.d.grid);
            for (std::size_t i = 0; i < a.a.size(); ++i) worst = std::max(worst, std::abs(a.a[i] - p.a.a[i]));
        }
        o.require(worst <= 1e-6, fmt("%-9s lambda in {0.5, 3}: max |a_i(lambda phi) - a_i(phi)| = %.3g", name, worst));
    }
    return o;
}

// 9. Determinism of the full pipeline.
Outcome determinism() {
    Outcome o;
    const auto dir = std::filesystem::temp_directory_path() / "finitopo_acceptance";
    std::filesystem::create_directories(dir);
    const auto manifest = dir / "catenoid.yaml";
    std::ofstream(manifest) << "surface: catenoid\ncenter: [0.3, 0, 0]\nmode: full\nseed: 11\n";
    std::string first;
    for (int run = 0; run < 2; ++run) {
        const AnalysisConfig c = load_manifest(manifest.string());
        const std::string json = report_json(run_analysis(c));
        if (run == 0) {
            first = json;
        } else {
            o.require(json == first, fmt("catenoid full pipeline, two runs: %zu bytes, %s", json.size(),
                                         json == first ? "identical" : "different"));
        }
    }
    std::filesystem::remove_all(dir);
    return o;
}

struct Criterion {
    int id;
    const char* title;
    double budget;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "Gauss-equation suite", 10, gauss_suite},
        {2, "Hessian identity", 30, hessian_identity},
        {3, "a(M) oracle values", 120, a_values},
        {4, "b(M) and minimal-path certificate", 60, b_values},
        {5, "flow invariants", 600, flow_invariants},
        {6, "pointwise bound on f", 0, eq3_bound},
        {7, "topology certificates", 180, topology},
        {8, "scale invariance", 0, scale_invariance},
        {9, "determinism", 0, determinism},
    };
    std::set<int> wanted;
    for (int k = 1; k < argc; ++k) wanted.insert(std::atoi(argv[k]));

    int failed = 0;
    for (const Criterion& c : criteria) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget > 0 && secs > c.budget) o.require(false, fmt("runtime %.1f s exceeds %.0f s", secs, c.budget));
        failed += !o.pass;
        std::printf("%s  %d  %s  (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, secs);
        for (const auto& n : o.notes) std::printf("        %s\n", n.c_str());
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
