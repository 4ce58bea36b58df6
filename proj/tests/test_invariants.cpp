#include "finitopo/error.hpp"
#include "finitopo/invariants.hpp"
#include "finitopo/surfaces.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace finitopo;
using namespace testing_support;

namespace {

struct Setup {
    ImmersionDef imm;
    SurfaceDefaults d;
    std::vector<double> radii;
};

Setup setup(const std::string& name, const std::map<std::string, double>& params = {}) {
    SurfaceSpec spec{name};
    spec.params = params;
    Setup s{builtin_surface(spec), surface_defaults(spec), {}};
    s.radii = exhaustion_radii(s.d.r0, s.d.count);
    return s;
}

}  // namespace

TEST_SUITE("invariants") {

TEST_CASE("classify_limit examples") {
    const auto c = classify_limit({0.9, 0.7, 0.6, 0.58, 0.578}, SequenceKind::A);
    CHECK(c.kind == Verdict::Converging);
    CHECK(c.limit == 0.578);
    CHECK(classify_limit({1, 2, 4, 8, 16}, SequenceKind::A).kind == Verdict::Diverging);
    const auto ind = classify_limit({0.5, 0.4, 0.45, 0.3}, SequenceKind::A);
    CHECK(ind.kind == Verdict::Indeterminate);
    CHECK(std::isnan(ind.limit));
    CHECK(classify_limit({-1, -2, -4, -8, -16}, SequenceKind::B).kind == Verdict::Diverging);
    // Growth below the cap is not enough.
    CHECK(classify_limit({1, 2, 3, 4}, SequenceKind::A).kind == Verdict::Indeterminate);
    // A decreasing a-sequence moves toward its bound, never diverges.
    CHECK(classify_limit({-1, -2, -4, -8, -16}, SequenceKind::A).kind != Verdict::Diverging);
    CHECK_THROWS_WITH_AS(classify_limit({1, 2, 3}, SequenceKind::A), doctest::Contains("TooShort"), GeometryError);
}

TEST_CASE("first bounded tail") {
    CHECK(first_bounded_tail({2, 1.5, 0.9, 0.8}) == 2);
    CHECK(first_bounded_tail({0.5, 1.2, 0.9, 0.8}) == 2);
    CHECK(first_bounded_tail({0.1, 0.1}) == 0);
    CHECK(first_bounded_tail({0.5, 0.9, 1.0}) == -1);
    CHECK(first_bounded_tail({}) == -1);
}

TEST_CASE("a(M) of the plane is zero") {
    const Setup s = setup("plane");
    const AEstimate a = a_sequence(s.imm, s.d.base_point, s.radii, s.d.grid);
    for (double v : a.a) CHECK(v == 0.0);
    CHECK(a.verdict.kind == Verdict::Converging);
    CHECK(a.verdict.limit == 0.0);
    CHECK(a.window_ok);
    const BEstimate b = b_sequence(s.imm, s.d.base_point, s.radii, s.d.grid);
    for (double v : b.b) CHECK(v == 0.0);
    CHECK(b.verdict.kind == Verdict::Converging);
}

TEST_CASE("a(M) of the cone is cot beta") {
    const Setup s = setup("cone", {{"beta", pi / 3}, {"s0", 0.5}});
    const AEstimate a = a_sequence(s.imm, s.d.base_point, s.radii, s.d.grid);
    REQUIRE(a.verdict.kind == Verdict::Converging);
    const double cot = 1.0 / std::tan(pi / 3);
    CHECK(std::abs(a.verdict.limit - cot) <= 0.02 * cot);
    // Unrolled cone: (s, θ) ↦ polar (s, θ·sinβ), so from (1, 0) the distance
    // is the planar chord; |α| = cotβ/s.
    const double sb = std::sin(pi / 3);
    const double s_hi = s.d.grid.axes[0].hi;
    for (std::size_t i = 0; i < a.a.size(); ++i) {
        const double R = a.radii[i];
        double sup = 0.0;
        for (double sv = 0.5; sv <= s_hi; sv *= 1.001)
            for (double th = 0.0; th <= pi; th += pi / 256) {
                const double rho = std::sqrt(sv * sv + 1 - 2 * sv * std::cos(th * sb));
                if (rho > R && rho <= 4 * R) sup = std::max(sup, rho * cot / sv);
            }
        CAPTURE(i);
        CHECK(a.a[i] == doctest::Approx(sup).epsilon(2e-2));
    }
    CHECK_THROWS_WITH_AS(b_sequence(s.imm, s.d.base_point, s.radii, s.d.grid), doctest::Contains("NotMinimal"),
                         GeometryError);
}

TEST_CASE("a(M) of the paraboloid diverges") {
    const Setup s = setup("paraboloid");
    const AEstimate a = a_sequence(s.imm, s.d.base_point, s.radii, s.d.grid);
    CHECK(a.verdict.kind == Verdict::Diverging);
    for (std::size_t i = 1; i < a.a.size(); ++i) CHECK(a.a[i] > a.a[i - 1]);
}

TEST_CASE("catenoid invariants vanish") {
    const Setup s = setup("catenoid");
    const SurfaceSamples samples = sample_surface(s.imm, s.d.base_point, s.d.grid);
    const AEstimate a = a_sequence(s.imm, samples, s.radii);
    REQUIRE(a.verdict.kind == Verdict::Converging);
    CHECK(a.verdict.limit <= 0.05);
    const BEstimate b = b_sequence(s.imm, samples, s.radii);
    REQUIRE(b.verdict.kind == Verdict::Converging);
    CHECK(std::abs(b.verdict.limit) <= 0.05);
    for (double v : b.b) CHECK(v <= 0.0);

    // Meridian points have ρ = sinh|v| exactly and ρ²K = −sinh²v/cosh⁴v, so
    // each b_i lies below the meridian values in its shell. The far side of
    // the neck sits at ρ = π with K = −1.
    for (std::size_t i = 0; i < b.b.size(); ++i) {
        const double R = b.radii[i];
        double worst = 0.0;
        for (double v = std::asinh(R) + 1e-9; std::sinh(v) <= 4 * R && v < 7.7; v += 1e-3) {
            const double sh = std::sinh(v), ch = std::cosh(v);
            worst = std::min(worst, -sh * sh / (ch * ch * ch * ch));
        }
        if (R < pi && pi <= 4 * R) worst = std::min(worst, -pi * pi);
        CAPTURE(i);
        CHECK(b.b[i] <= worst * (1 - 1e-3) + 1e-12);
        CHECK(b.b[i] >= -16 * R * R);
    }
}

TEST_CASE("helicoid curvature does not decay along the axis") {
    // On the axis v = 0: |α| = √2, K = −1 and ρ = |u|, so the shell
    // R < ρ ≤ 4R gives a_i = 4√2·R and b_i = −16·R².
    const Setup s = setup("helicoid");
    const SurfaceSamples samples = sample_surface(s.imm, s.d.base_point, s.d.grid);
    const AEstimate a = a_sequence(s.imm, samples, s.radii);
    const BEstimate b = b_sequence(s.imm, samples, s.radii);
    for (std::size_t i = 0; i < s.radii.size(); ++i) {
        CHECK(a.a[i] == doctest::Approx(4 * std::sqrt(2.0) * s.radii[i]).epsilon(1e-3));
        CHECK(b.b[i] == doctest::Approx(-16 * s.radii[i] * s.radii[i]).epsilon(2e-3));
    }
    CHECK(a.verdict.kind == Verdict::Diverging);
    CHECK(b.verdict.kind == Verdict::Diverging);
}

TEST_CASE("tail sequences are monotone up to noise") {
    for (const char* name : {"catenoid", "cone", "enneper", "graph"}) {
        CAPTURE(name);
        const Setup s = setup(name);
        const SurfaceSamples samples = sample_surface(s.imm, s.d.base_point, s.d.grid);
        const AEstimate a = a_sequence(s.imm, samples, s.radii);
        for (std::size_t i = 0; i < a.a.size(); ++i) {
            CHECK(a.a[i] >= 0.0);
            if (i > 0) CHECK(a.a[i] <= a.a[i - 1] + 0.01);
        }
        CHECK(a.monotone_violation <= 0.01);
        if (std::string(name) == "catenoid" || std::string(name) == "enneper") {
            const BEstimate b = b_sequence(s.imm, samples, s.radii);
            for (std::size_t i = 1; i < b.b.size(); ++i) CHECK(b.b[i] >= b.b[i - 1] - 0.01);
        }
    }
}

TEST_CASE("a_sequence is scale invariant") {
    for (const char* name : {"cone", "catenoid", "enneper"}) {
        CAPTURE(name);
        const Setup s = setup(name);
        const AEstimate ref = a_sequence(s.imm, s.d.base_point, s.radii, s.d.grid);
        for (double lambda : {0.5, 3.0}) {
            CAPTURE(lambda);
            std::vector<double> radii;
            for (double R : s.radii) radii.push_back(lambda * R);
            const AEstimate a = a_sequence(scaled(s.imm, lambda), s.d.base_point, radii, s.d.grid);
            REQUIRE(a.a.size() == ref.a.size());
            for (std::size_t i = 0; i < a.a.size(); ++i) CHECK(std::abs(a.a[i] - ref.a[i]) <= 1e-6);
            CHECK(a.verdict.kind == ref.verdict.kind);
        }
    }
}

TEST_CASE("the limit does not depend on the base point") {
    const Setup s = setup("cone", {{"beta", pi / 3}, {"s0", 0.5}});
    const AEstimate a1 = a_sequence(s.imm, vec2(1, 0), s.radii, s.d.grid);
    const AEstimate a2 = a_sequence(s.imm, vec2(2, 1), s.radii, s.d.grid);
    REQUIRE(a1.verdict.kind == Verdict::Converging);
    REQUIRE(a2.verdict.kind == Verdict::Converging);
    CHECK(std::abs(a1.verdict.limit - a2.verdict.limit) <= 3 * 0.02);

    const Setup c = setup("catenoid");
    const AEstimate c1 = a_sequence(c.imm, vec2(0, 0), c.radii, c.d.grid);
    const AEstimate c2 = a_sequence(c.imm, vec2(1, 0.5), c.radii, c.d.grid);
    REQUIRE(c1.verdict.kind == Verdict::Converging);
    REQUIRE(c2.verdict.kind == Verdict::Converging);
    CHECK(std::abs(c1.verdict.limit - c2.verdict.limit) <= 3 * 0.02);
}

TEST_CASE("the limit does not depend on the exhaustion") {
    const Setup s = setup("cone", {{"beta", pi / 3}, {"s0", 0.5}});
    const SurfaceSamples samples = sample_surface(s.imm, s.d.base_point, s.d.grid);
    const AEstimate geo = a_sequence(s.imm, samples, s.radii);
    const double last = s.radii.back();
    const AEstimate ari = a_sequence(s.imm, samples, arithmetic_radii(last / 6, 6));
    REQUIRE(geo.verdict.kind == Verdict::Converging);
    REQUIRE(ari.verdict.kind == Verdict::Converging);
    CHECK(std::abs(geo.verdict.limit - ari.verdict.limit) <= 3 * 0.02);
}

TEST_CASE("tail errors") {
    const Setup s = setup("plane");
    CHECK_THROWS_WITH_AS(a_sequence(s.imm, s.d.base_point, {1, 2, 4, 100}, s.d.grid), doctest::Contains("EmptyTail"),
                         GeometryError);
    CHECK_THROWS_WITH_AS(b_sequence(s.imm, s.d.base_point, {1, 2, 4, 100}, s.d.grid), doctest::Contains("EmptyTail"),
                         GeometryError);
    // Short windows downgrade the verdict rather than failing.
    const AEstimate a = a_sequence(s.imm, s.d.base_point, {2, 4, 8, 16}, s.d.grid);
    CHECK_FALSE(a.window_ok);
    CHECK(a.verdict.kind == Verdict::Indeterminate);
}

}
