#include "finitopo/error.hpp"
#include "finitopo/properness.hpp"
#include "finitopo/surfaces.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace finitopo;
using namespace testing_support;

namespace {

struct Pipeline {
    ImmersionDef imm;
    SurfaceDefaults d;
    SurfaceSamples samples;
    AEstimate a;
};

Pipeline run(const std::string& name, const std::map<std::string, double>& params = {}) {
    SurfaceSpec spec{name};
    spec.params = params;
    Pipeline p{builtin_surface(spec), surface_defaults(spec), {}, {}};
    p.samples = sample_surface(p.imm, p.d.base_point, p.d.grid);
    p.a = a_sequence(p.imm, p.samples, exhaustion_radii(p.d.r0, p.d.count));
    return p;
}

// f along a geodesic, by definition.
double f_at(const ImmersionDef& imm, const Vec& u) { return evaluate_jet(imm, u).value.squaredNorm(); }

}  // namespace

TEST_SUITE("properness") {

TEST_CASE("hessian_f examples") {
    std::mt19937_64 rng(31);
    const auto plane = builtin_surface("plane");
    for (int k = 0; k < 10; ++k) {
        const Vec u = random_point(rng, -5, 5, -5, 5);
        const Vec nu = random_unit(rng, metric(evaluate_jet(plane, u)));
        CHECK(hessian_f(plane, u, nu) == 2.0);
        CHECK(std::abs(hessian_f_oracle(plane, u, nu) - 2.0) <= 1e-8);
    }
    // Neck of the catenoid: the meridian bends away from the axis with
    // α(ν, ν) = φ, the neck circle is a geodesic with f ≡ 1.
    const auto cat = builtin_surface("catenoid");
    CHECK(hessian_f(cat, vec2(0, 0), vec2(0, 1)) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(hessian_f_oracle(cat, vec2(0, 0), vec2(0, 1)) == doctest::Approx(4.0).epsilon(1e-5));
    CHECK(std::abs(hessian_f(cat, vec2(0, 0), vec2(1, 0))) < 1e-12);
    CHECK(std::abs(hessian_f_oracle(cat, vec2(0, 0), vec2(1, 0))) < 1e-5);
    // The cone through the origin has φ tangent everywhere, so Hess f ≡ 2.
    const auto cone = builtin_surface("cone", {{"beta", pi / 3}});
    for (int k = 0; k < 10; ++k) {
        const Vec u = random_point(rng, 1, 5, -pi, pi);
        const Vec nu = random_unit(rng, metric(evaluate_jet(cone, u)));
        CHECK(hessian_f(cone, u, nu) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(hessian_f_oracle(cone, u, nu) == doctest::Approx(2.0).epsilon(1e-6));
    }
    CHECK_THROWS_WITH_AS(hessian_f(plane, vec2(0, 0), vec2(1, 1)), doctest::Contains("NotUnit"), GeometryError);
}

TEST_CASE("hessian identity on random triples") {
    std::mt19937_64 rng(37);
    struct Case {
        const char* name;
        double lo0, hi0, lo1, hi1;
    };
    const Case cases[] = {{"catenoid", -pi, pi, -1.5, 1.5}, {"helicoid", -1.5, 1.5, -2, 2},
                          {"cone", 1, 4, -pi, pi},        {"enneper", -1, 1, -1, 1},
                          {"paraboloid", -1, 1, -1, 1},   {"graph", -2, 2, -2, 2}};
    int count = 0;
    for (const Case& c : cases) {
        const auto imm = builtin_surface(c.name);
        for (int k = 0; k < 40; ++k, ++count) {
            const Vec u = random_point(rng, c.lo0, c.hi0, c.lo1, c.hi1);
            const Vec nu = random_unit(rng, metric(evaluate_jet(imm, u)));
            CAPTURE(c.name);
            CHECK(std::abs(hessian_f(imm, u, nu) - hessian_f_oracle(imm, u, nu)) <= 1e-4);
        }
    }
    CHECK(count >= 200);
}

TEST_CASE("hessian_f_min is the smallest direction") {
    std::mt19937_64 rng(41);
    for (const char* name : {"catenoid", "enneper", "helicoid"}) {
        const auto imm = builtin_surface(name);
        for (int k = 0; k < 10; ++k) {
            const Vec u = random_point(rng, -1, 1, -1, 1);
            const double lo = hessian_f_min(imm, u);
            const MetricTensor g = metric(evaluate_jet(imm, u));
            double best = kInf;
            for (int j = 0; j < 720; ++j) {
                const double t = pi * j / 720;
                Vec w = vec2(std::cos(t), std::sin(t));
                w /= g.norm(w);
                const double h = hessian_f(imm, u, w);
                CHECK(h >= lo - 1e-10);
                best = std::min(best, h);
            }
            CHECK(best - lo <= 1e-4 * (1 + std::abs(lo)));
        }
    }
}

TEST_CASE("G profile examples") {
    {
        const GProfile gp(0, 0, {{0, 2, 0}});
        const auto r = proposition_check(gp);
        CHECK(r.proper);
        CHECK(r.bounded_below);
        CHECK(r.inf_G == 0.0);
        CHECK(gp.G(3) == doctest::Approx(9.0));
    }
    {
        // −2t² on [0, 1]; then −2 − 4(t − 1) + (t − 1)²/2, minimal at t = 5.
        const GProfile gp = GProfile::two_piece(0, 0, -4, 1, 0.5);
        CHECK(gp.G(0) == 0.0);
        CHECK(gp.G(1) == doctest::Approx(-2.0));
        CHECK(gp.dG(1) == doctest::Approx(-4.0));
        const auto r = proposition_check(gp);
        CHECK(r.holds());
        CHECK(r.inf_G == doctest::Approx(-10.0));
        CHECK(r.argmin_t == doctest::Approx(5.0));
    }
    {
        const GProfile gp(3, 1, {{0, 0, 0}});
        const auto r = proposition_check(gp);
        CHECK_FALSE(r.bounded_below);
        CHECK_FALSE(r.holds());
        CHECK(gp.G(10) == doctest::Approx(-7.0));
    }
    {
        // Piecewise-linear g against a trapezoid double quadrature.
        const GProfile gp(1, 0.5, {{0, -1, 2}, {2, 3, 0}});
        double G = 1, dG = -0.5;
        const double h = 1e-4;
        for (double t = 0; t < 4 - 1e-12; t += h) {
            const double g0 = gp.g(t), g1 = gp.g(t + h);
            G += dG * h + h * h * (2 * g0 + g1) / 6;
            dG += 0.5 * h * (g0 + g1);
        }
        CHECK(gp.G(4) == doctest::Approx(G).epsilon(1e-8));
        CHECK(gp.dG(4) == doctest::Approx(dG).epsilon(1e-8));
    }
    CHECK_THROWS_AS(GProfile(0, 0, {{0, 1, 1}}), GeometryError);
}

TEST_CASE("tail constants") {
    const Pipeline plane = run("plane");
    const HessBoundData hb = tail_constants(plane.imm, plane.d.base_point, plane.a, plane.samples);
    CHECK(hb.c == 0.0);
    CHECK(hb.b == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(hb.R0 > 0.0);
    CHECK(hb.ball_samples > 1);

    const Pipeline para = run("paraboloid");
    CHECK_THROWS_WITH_AS(tail_constants(para.imm, para.d.base_point, para.a, para.samples),
                         doctest::Contains("NotApplicable"), GeometryError);
    const PropernessCertificate cert = certify_properness(para.imm, para.d.base_point, para.a, para.samples);
    CHECK_FALSE(cert.applicable);
    CHECK_FALSE(cert.certified);
}

TEST_CASE("pointwise bound on certified surfaces") {
    for (const char* name : {"plane", "cone", "catenoid", "enneper", "graph"}) {
        CAPTURE(name);
        const Pipeline p = run(name);
        const PropernessCertificate cert = certify_properness(p.imm, p.d.base_point, p.a, p.samples);
        CHECK(cert.certified);
        CHECK(cert.eq3.samples >= 10000);
        CHECK(cert.eq3.violations == 0);
        CHECK(cert.constants.c < 1.0);
        CHECK(cert.proposition.holds());
    }
    // On the plane f = ρ² exactly and the bound reads ρ²/2 + R0·ρ.
    const Pipeline plane = run("plane");
    const HessBoundData hb = tail_constants(plane.imm, plane.d.base_point, plane.a, plane.samples);
    const Eq3Report r = eq3_check(plane.imm, hb, plane.samples);
    for (double rho : {2 * hb.R0, 5 * hb.R0}) CHECK(rho * rho >= rho * rho / 2 + hb.R0 * rho);
    CHECK(r.worst_margin >= 0.0);
}

TEST_CASE("integrated bound along minimizing geodesics") {
    // (f∘σ)′(s) ≥ b·R0 + (1 − c)(s − R0) beyond R0.
    auto check_path = [](const ImmersionDef& centred, const HessBoundData& hb, const Vec& v0, double L) {
        const GeodesicPath path = shoot_geodesic(centred, hb.p, v0, L);
        std::size_t checked = 0;
        for (std::size_t k = 0; k + 1 < path.samples.size(); ++k) {
            const double s0 = path.samples[k].s, s1 = path.samples[k + 1].s;
            if (s0 <= hb.R0) continue;
            const double slope = (f_at(centred, path.samples[k + 1].u) - f_at(centred, path.samples[k].u)) / (s1 - s0);
            CHECK(slope >= hb.b * hb.R0 + (1 - hb.c) * (s0 - hb.R0) - 1e-6 * (1 + s0 * s0));
            ++checked;
        }
        CHECK(checked > 0);
    };
    {
        const Pipeline cat = run("catenoid");
        const HessBoundData hb = tail_constants(cat.imm, cat.d.base_point, cat.a, cat.samples);
        const ImmersionDef centred = translated(cat.imm, hb.offset);
        check_path(centred, hb, vec2(0, 1), 200);
        check_path(centred, hb, vec2(0, -1), 200);
    }
    {
        const Pipeline cone = run("cone");
        const HessBoundData hb = tail_constants(cone.imm, cone.d.base_point, cone.a, cone.samples);
        check_path(translated(cone.imm, hb.offset), hb, vec2(1, 0), 300);
    }
    {
        const Pipeline plane = run("plane");
        const HessBoundData hb = tail_constants(plane.imm, plane.d.base_point, plane.a, plane.samples);
        std::mt19937_64 rng(43);
        for (int k = 0; k < 8; ++k)
            check_path(plane.imm, hb, random_unit(rng, metric(evaluate_jet(plane.imm, hb.p))), 30);
    }
}

TEST_CASE("Ricci chain on minimal surfaces") {
    // |⟨φ, α(ν, ν)⟩| ≤ |φ|·|α(ν, ν)| ≤ |φ|·√(−Ric(ν)) with φ(p) = 0.
    std::mt19937_64 rng(47);
    for (const char* name : {"catenoid", "enneper", "helicoid"}) {
        const auto imm = builtin_surface(name);
        const Vec p = random_point(rng, -0.5, 0.5, -0.5, 0.5);
        const ImmersionDef centred = translated(imm, evaluate_jet(imm, p).value);
        for (int k = 0; k < 50; ++k) {
            const Vec u = random_point(rng, -2, 2, -2, 2);
            const Jet2 jet = evaluate_jet(centred, u);
            const MetricTensor g = metric(jet);
            const SecondForm sf = second_form(jet, g);
            const Vec nu = random_unit(rng, g);
            const double ric = ricci_extrinsic(sf, g, nu);
            CHECK(ric <= 1e-12);
            CHECK(sf.apply(nu, nu).squaredNorm() <= -ric + 1e-10);
            const double lhs = 1 - jet.value.norm() * std::sqrt(std::max(0.0, -ric));
            CHECK(lhs <= 1 + jet.value.dot(sf.apply(nu, nu)) + 1e-10);
            CHECK(lhs <= 0.5 * hessian_f(centred, u, nu) + 1e-10);
        }
    }
}

TEST_CASE("minimal path certificates") {
    for (const char* name : {"plane", "catenoid"}) {
        CAPTURE(name);
        const Pipeline p = run(name);
        const BEstimate b = b_sequence(p.imm, p.samples, p.a.radii);
        const PropernessCertificate cert = certify_properness_minimal(p.imm, p.d.base_point, b, p.samples);
        CHECK(cert.certified);
        CHECK(cert.constants.path == TailPath::BInvariant);
        CHECK(cert.eq3.violations == 0);
        if (std::string(name) == "plane") CHECK(cert.constants.c == 0.0);
    }
    const Pipeline cone = run("cone");
    BEstimate fake;
    fake.radii = cone.a.radii;
    fake.b.assign(fake.radii.size(), 0.0);
    fake.verdict = {Verdict::Converging, 0.0};
    CHECK_THROWS_WITH_AS(certify_properness_minimal(cone.imm, cone.d.base_point, fake, cone.samples),
                         doctest::Contains("NotMinimal"), GeometryError);
}

}
