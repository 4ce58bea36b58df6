#include "finitopo/error.hpp"
#include "finitopo/immersion.hpp"
#include "finitopo/surfaces.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace finitopo;
using namespace testing_support;

TEST_SUITE("immersion") {

TEST_CASE("plane jet is affine") {
    const auto imm = builtin_surface("plane");
    const Jet2 jet = evaluate_jet(imm, vec2(1, 2));
    CHECK((jet.value - vec3(1, 2, 0)).norm() == 0.0);
    CHECK(jet.hess.norm() == 0.0);
    const MetricTensor g = metric(jet);
    CHECK((g.g - Mat::Identity(2, 2)).norm() == 0.0);
    const SecondForm sf = second_form(jet, g);
    CHECK(sf.norm_alpha == 0.0);
    CHECK(sf.mean_curvature.norm() == 0.0);
}

TEST_CASE("catenoid jet at the neck") {
    const auto imm = builtin_surface("catenoid");
    const Jet2 jet = evaluate_jet(imm, vec2(0, 0));
    CHECK((jet.value - vec3(1, 0, 0)).norm() < 1e-15);
    CHECK((jet.jac.col(0) - vec3(0, 1, 0)).norm() < 1e-15);
    CHECK((jet.jac.col(1) - vec3(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("cone jet matches the closed form") {
    const auto imm = builtin_surface("cone", {{"beta", pi / 3}, {"s0", 0.5}});
    const Jet2 jet = evaluate_jet(imm, vec2(2, 0));
    CHECK((jet.value - vec3(std::sqrt(3.0), 0, 1)).norm() < 1e-14);
}

TEST_CASE("metrics of the catenoid and helicoid") {
    const auto cat = builtin_surface("catenoid");
    for (double v : {-1.5, 0.0, 0.7}) {
        const MetricTensor g = metric(evaluate_jet(cat, vec2(0.3, v)));
        const double c2 = std::cosh(v) * std::cosh(v);
        CHECK(g.g(0, 0) == doctest::Approx(c2).epsilon(1e-14));
        CHECK(g.g(1, 1) == doctest::Approx(c2).epsilon(1e-14));
        CHECK(std::abs(g.g(0, 1)) < 1e-14);
        CHECK((g.g * g.g_inv - Mat::Identity(2, 2)).norm() < 1e-12);
    }
    const MetricTensor h = metric(evaluate_jet(builtin_surface("helicoid"), vec2(0, 1)));
    CHECK(h.g(0, 0) == doctest::Approx(2.0));
    CHECK(h.g(1, 1) == doctest::Approx(1.0));
    CHECK(std::abs(h.g(0, 1)) < 1e-15);
}

TEST_CASE("second fundamental form oracles") {
    const auto cat = builtin_surface("catenoid");
    for (double v : {-2.0, -0.4, 0.0, 1.3}) {
        const Jet2 jet = evaluate_jet(cat, vec2(1.1, v));
        const MetricTensor g = metric(jet);
        const SecondForm sf = second_form(jet, g);
        const double c2 = std::cosh(v) * std::cosh(v);
        CHECK(sf.norm_alpha == doctest::Approx(std::sqrt(2.0) / c2).epsilon(1e-12));
        CHECK(sf.mean_curvature.norm() <= 1e-10);
    }
    const double beta = pi / 3;
    const auto cone = builtin_surface("cone", {{"beta", beta}, {"s0", 0.5}});
    for (double s : {0.8, 2.0, 17.0}) {
        const Jet2 jet = evaluate_jet(cone, vec2(s, 0.4));
        const SecondForm sf = second_form(jet, metric(jet));
        CHECK(sf.norm_alpha == doctest::Approx(1.0 / std::tan(beta) / s).epsilon(1e-12));
    }
}

TEST_CASE("alpha is normal and symmetric") {
    std::mt19937_64 rng(7);
    for (const char* name : {"catenoid", "helicoid", "enneper", "paraboloid"}) {
        const auto imm = builtin_surface(name);
        for (int k = 0; k < 20; ++k) {
            const Jet2 jet = evaluate_jet(imm, random_point(rng, -2, 2, -2, 2));
            const SecondForm sf = second_form(jet, metric(jet));
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    CHECK((sf.at(i, j) - sf.at(j, i)).norm() == 0.0);
                    for (int c = 0; c < 2; ++c)
                        CHECK(std::abs(sf.at(i, j).dot(jet.jac.col(c))) <= 1e-8 * (1 + jet.jac.col(c).norm()));
                }
        }
    }
}

TEST_CASE("Ricci curvature through the Gauss equation") {
    const auto plane = builtin_surface("plane");
    {
        const Jet2 jet = evaluate_jet(plane, vec2(0.5, 0.5));
        const MetricTensor g = metric(jet);
        CHECK(ricci_extrinsic(second_form(jet, g), g, vec2(0.6, 0.8)) == 0.0);
        CHECK(std::abs(ricci_intrinsic(plane, vec2(0.5, 0.5), vec2(0.6, 0.8))) < 1e-9);
    }
    const auto cat = builtin_surface("catenoid");
    std::mt19937_64 rng(3);
    for (double v : {-1.0, 0.0, 0.5, 2.0}) {
        const Vec u = vec2(0.2, v);
        const Jet2 jet = evaluate_jet(cat, u);
        const MetricTensor g = metric(jet);
        const SecondForm sf = second_form(jet, g);
        const double K = -1.0 / std::pow(std::cosh(v), 4);
        for (int k = 0; k < 3; ++k) CHECK(ricci_extrinsic(sf, g, random_unit(rng, g)) == doctest::Approx(K).epsilon(1e-10));
    }
    {
        const Jet2 jet = evaluate_jet(cat, vec2(0, 1));
        const MetricTensor g = metric(jet);
        const Vec nu = vec2(1, 1) / g.norm(vec2(1, 1));
        CHECK(ricci_intrinsic(cat, vec2(0, 1), nu) == doctest::Approx(-1.0 / std::pow(std::cosh(1.0), 4)).epsilon(1e-5));
        CHECK(-1.0 / std::pow(std::cosh(1.0), 4) == doctest::Approx(-0.1761).epsilon(1e-3));
    }
    {
        const auto hel = builtin_surface("helicoid");
        const Jet2 jet = evaluate_jet(hel, vec2(0, 0));
        const MetricTensor g = metric(jet);
        const SecondForm sf = second_form(jet, g);
        for (int k = 0; k < 3; ++k) CHECK(ricci_extrinsic(sf, g, random_unit(rng, g)) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    {
        const auto cone = builtin_surface("cone");
        const Jet2 jet = evaluate_jet(cone, vec2(3, 1));
        const MetricTensor g = metric(jet);
        CHECK(std::abs(ricci_intrinsic(cone, vec2(3, 1), random_unit(rng, g))) < 1e-7);
    }
}

TEST_CASE("Gauss equation agrees with the intrinsic oracle on random samples") {
    std::mt19937_64 rng(11);
    struct Box {
        const char* name;
        double lo0, hi0, lo1, hi1;
    };
    for (const Box& b : {Box{"catenoid", -pi, pi, -2, 2}, Box{"helicoid", -3, 3, -2, 2}, Box{"cone", 1, 10, -pi, pi},
                         Box{"plane", -5, 5, -5, 5}}) {
        const auto imm = builtin_surface(b.name);
        for (int k = 0; k < 100; ++k) {
            const Vec u = random_point(rng, b.lo0, b.hi0, b.lo1, b.hi1);
            const Jet2 jet = evaluate_jet(imm, u);
            const MetricTensor g = metric(jet);
            const Vec nu = random_unit(rng, g);
            const double ext = ricci_extrinsic(second_form(jet, g), g, nu);
            const double in = ricci_intrinsic(imm, u, nu);
            CHECK(std::abs(ext - in) <= std::max(1e-4, 1e-3 * std::abs(ext)));
        }
    }
}

TEST_CASE("frame independence of |alpha| and Ric") {
    std::mt19937_64 rng(5);
    const auto imm = builtin_surface("enneper");
    for (int k = 0; k < 20; ++k) {
        const Jet2 jet = evaluate_jet(imm, random_point(rng, -1.5, 1.5, -1.5, 1.5));
        const MetricTensor g = metric(jet);
        const SecondForm sf = second_form(jet, g);
        const Vec nu = random_unit(rng, g);
        const Mat f1 = orthonormal_frame(g, nu);
        Mat completion(2, 1);
        completion << std::normal_distribution<double>()(rng), std::normal_distribution<double>()(rng);
        const Mat f2 = orthonormal_frame(g, nu, completion);
        CHECK(std::abs(ricci_in_frame(sf, f1) - ricci_in_frame(sf, f2)) <= 1e-10);

        const Vec w = random_unit(rng, g);
        auto hs = [&](const Mat& f) {
            double s = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) s += sf.apply(f.col(a), f.col(b)).squaredNorm();
            return std::sqrt(s);
        };
        CHECK(std::abs(hs(f1) - sf.norm_alpha) <= 1e-10);
        CHECK(std::abs(hs(orthonormal_frame(g, w)) - sf.norm_alpha) <= 1e-10);
    }
}

TEST_CASE("scaling covariance") {
    std::mt19937_64 rng(9);
    const auto imm = builtin_surface("catenoid");
    for (double lambda : {0.5, 2.0, 10.0}) {
        const auto big = scaled(imm, lambda);
        for (int k = 0; k < 10; ++k) {
            const Vec u = random_point(rng, -pi, pi, -2, 2);
            const Jet2 j1 = evaluate_jet(imm, u), j2 = evaluate_jet(big, u);
            const MetricTensor g1 = metric(j1), g2 = metric(j2);
            const SecondForm s1 = second_form(j1, g1), s2 = second_form(j2, g2);
            CHECK(s2.norm_alpha * lambda == doctest::Approx(s1.norm_alpha).epsilon(1e-8));
            const Vec nu = random_unit(rng, g1);
            CHECK(ricci_extrinsic(s2, g2, nu / lambda) * lambda * lambda ==
                  doctest::Approx(ricci_extrinsic(s1, g1, nu)).epsilon(1e-8));
        }
    }
}

TEST_CASE("minimal surfaces have vanishing mean curvature") {
    std::mt19937_64 rng(13);
    for (const char* name : {"catenoid", "helicoid", "enneper"}) {
        const auto imm = builtin_surface(name);
        for (int k = 0; k < 200; ++k) {
            const Jet2 jet = evaluate_jet(imm, random_point(rng, -3, 3, -3, 3));
            CHECK(second_form(jet, metric(jet)).mean_curvature.norm() <= 1e-8);
        }
    }
}

TEST_CASE("operator norm option") {
    const auto imm = builtin_surface("catenoid");
    const Jet2 jet = evaluate_jet(imm, vec2(0, 0.5));
    Tolerances tol;
    tol.alpha_norm = AlphaNorm::Operator;
    const double op = second_form(jet, metric(jet), tol).norm_alpha;
    CHECK(op == doctest::Approx(1.0 / std::pow(std::cosh(0.5), 2)).epsilon(1e-12));
}

TEST_CASE("expression surfaces reproduce the closed-form jets") {
    SurfaceSpec spec;
    spec.name = "expression";
    spec.variables = {"u", "v"};
    spec.components = {"cosh(v)*cos(u)", "cosh(v)*sin(u)", "v"};
    spec.chart = {ChartAxis{-pi, pi, true}, ChartAxis{}};
    const auto expr = builtin_surface(spec);
    const auto cat = builtin_surface("catenoid");
    std::mt19937_64 rng(17);
    for (int k = 0; k < 20; ++k) {
        const Vec u = random_point(rng, -pi, pi, -2, 2);
        const Jet2 a = evaluate_jet(expr, u), b = evaluate_jet(cat, u);
        CHECK((a.value - b.value).norm() < 1e-13);
        CHECK((a.jac - b.jac).norm() < 1e-13);
        CHECK((a.hess - b.hess).norm() < 1e-12);
    }
}

TEST_CASE("errors") {
    const auto cone = builtin_surface("cone");
    CHECK_THROWS_WITH_AS(evaluate_jet(cone, vec2(0.1, 0)), doctest::Contains("OutOfChart"), GeometryError);

    SurfaceSpec spec;
    spec.name = "expression";
    spec.variables = {"u", "v"};
    spec.components = {"u^3", "v", "0"};
    const auto cusp = builtin_surface(spec);
    CHECK_THROWS_WITH_AS(evaluate_jet(cusp, vec2(0, 0)), doctest::Contains("RankDeficient"), GeometryError);

    const Jet2 jet = evaluate_jet(builtin_surface("plane"), vec2(0, 0));
    const MetricTensor g = metric(jet);
    CHECK_THROWS_WITH_AS(ricci_extrinsic(second_form(jet, g), g, vec2(1, 1)), doctest::Contains("NotUnit"), GeometryError);

    CHECK_THROWS_WITH_AS(builtin_surface("torus"), doctest::Contains("UnknownSurface"), GeometryError);
    CHECK_THROWS_WITH_AS(builtin_surface("cone", {{"beta", 2.0}}), doctest::Contains("BadParams"), GeometryError);
    CHECK_THROWS_WITH_AS(builtin_surface("plane", {{"k", 1.0}}), doctest::Contains("BadParams"), GeometryError);
}

TEST_CASE("translation moves the value only") {
    const auto imm = builtin_surface("enneper");
    const auto moved = translated(imm, vec3(1, -2, 3));
    const Jet2 a = evaluate_jet(imm, vec2(0.3, 0.2)), b = evaluate_jet(moved, vec2(0.3, 0.2));
    CHECK((a.value - b.value - vec3(1, -2, 3)).norm() < 1e-15);
    CHECK((a.jac - b.jac).norm() == 0.0);
    CHECK((a.hess - b.hess).norm() == 0.0);
}

}
