#include "doctest.h"

#include "nnext/patch.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace nnext;

namespace {
Config cfg() { return Config::desk_profile(); }
}

TEST_CASE("zero data gives the zero interpolant") {
    std::mt19937_64 rng(139);
    const auto pts = testutil::random_points(rng, 6, 0.0, 1.0);
    const Interpolant it = Interpolant::build(pts, std::vector<double>(6, 0.0), 1.0, cfg());
    for (int t = 0; t < 100; ++t) {
        const Point2 x{std::uniform_real_distribution<double>(-2.0, 3.0)(rng),
                       std::uniform_real_distribution<double>(-2.0, 3.0)(rng)};
        const EvalResult r = it.query(x);
        CHECK(r.value == 0.0);
        CHECK(r.dx == 0.0);
        CHECK(r.dxx == 0.0);
    }
}

TEST_CASE("single point reproduces its value") {
    const Interpolant it = Interpolant::build({{0.5, 0.5}}, {1.0}, 2.0, cfg());
    const EvalResult r = it.query({0.5, 0.5});
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.depth.size() == 1);
    // far away the interpolant vanishes
    CHECK(it.query({3.4, -2.2}).value == 0.0);
    CHECK(it.query({3.4, -2.2}).depth.size() == 0);
}

TEST_CASE("interpolation and nonnegativity on random data") {
    std::mt19937_64 rng(149);
    for (std::size_t n : {5, 40}) {
        const auto pts = testutil::random_points(rng, n, 0.0, 1.0);
        const auto vals = testutil::random_values(rng, n);
        const double m = 40.0;
        const Interpolant it = Interpolant::build(pts, vals, m, cfg());
        for (std::size_t i = 0; i < n; ++i) {
            const EvalResult r = it.query(pts[i]);
            CHECK(r.value == doctest::Approx(vals[i]).epsilon(1e-9).scale(1.0));
        }
        const Box2 dom = it.decomposition().domain();
        for (int a = 0; a <= 60; ++a)
            for (int b = 0; b <= 60; ++b) {
                const Point2 x{dom.lo1 + (dom.hi1 - dom.lo1) * a / 60.0,
                               dom.lo2 + (dom.hi2 - dom.lo2) * b / 60.0};
                CHECK(it.query(x).value >= -1e-9 * (1.0 + m));
            }
    }
}

TEST_CASE("partition weights sum to one") {
    // probing indirectly: interpolating constant-one data of a feasible
    // budget reproduces one wherever local pieces are the constant
    std::mt19937_64 rng(151);
    const auto pts = testutil::random_points(rng, 12, 0.0, 1.0);
    const std::vector<double> vals(12, 1.0);
    const Interpolant it = Interpolant::build(pts, vals, 30.0, cfg());
    for (std::size_t i = 0; i < pts.size(); ++i)
        CHECK(it.query(pts[i]).value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("query derivatives match finite differences") {
    std::mt19937_64 rng(157);
    const auto pts = testutil::random_points(rng, 25, 0.0, 1.0);
    const auto vals = testutil::random_values(rng, 25);
    const Interpolant it = Interpolant::build(pts, vals, 30.0, cfg());
    const double h = 1e-5;
    int checked = 0;
    for (int t = 0; t < 100; ++t) {
        const Point2 x{std::uniform_real_distribution<double>(-0.2, 1.2)(rng),
                       std::uniform_real_distribution<double>(-0.2, 1.2)(rng)};
        const EvalResult e = it.query(x);
        auto val = [&](double a, double b) { return it.query({a, b}).value; };
        const double fdx = (val(x.x1 + h, x.x2) - val(x.x1 - h, x.x2)) / (2 * h);
        const double fdy = (val(x.x1, x.x2 + h) - val(x.x1, x.x2 - h)) / (2 * h);
        const double sc = 1.0 + std::abs(e.value) + std::abs(e.dx) + std::abs(e.dy);
        CHECK(e.dx == doctest::Approx(fdx).epsilon(1e-4).scale(sc));
        CHECK(e.dy == doctest::Approx(fdy).epsilon(1e-4).scale(sc));
        const double fdxx = (val(x.x1 + h, x.x2) - 2 * e.value + val(x.x1 - h, x.x2)) / (h * h);
        const double fdyy = (val(x.x1, x.x2 + h) - 2 * e.value + val(x.x1, x.x2 - h)) / (h * h);
        const double sc2 = 100.0 + std::abs(e.dxx) + std::abs(e.dyy);
        CHECK(e.dxx == doctest::Approx(fdxx).epsilon(1e-3).scale(sc2));
        CHECK(e.dyy == doctest::Approx(fdyy).epsilon(1e-3).scale(sc2));
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("rebuilds on the shared decomposition are bit-stable") {
    std::mt19937_64 rng(163);
    const auto pts = testutil::random_points(rng, 20, 0.0, 1.0);
    const auto vals = testutil::random_values(rng, 20);
    const Interpolant base = Interpolant::build(pts, vals, 25.0, cfg());
    const Interpolant a =
        Interpolant::build_with(base.decomposition_ptr(), vals, 25.0, &base.warm_store());
    const Interpolant b =
        Interpolant::build_with(base.decomposition_ptr(), vals, 25.0, &base.warm_store());
    for (int t = 0; t < 60; ++t) {
        const Point2 x{std::uniform_real_distribution<double>(-0.4, 1.4)(rng),
                       std::uniform_real_distribution<double>(-0.4, 1.4)(rng)};
        CHECK(a.query(x).same_bits(b.query(x)));
    }
}

TEST_CASE("depth audit finds no leaks") {
    std::mt19937_64 rng(167);
    const auto pts = testutil::random_points(rng, 230, 0.0, 1.0);
    const auto vals = testutil::random_values(rng, 230);
    const Interpolant it = Interpolant::build(pts, vals, 60.0, cfg());

    int real_trials = 0;
    for (int q = 0; q < 6; ++q) {
        const Point2 x{0.15 + 0.14 * q, 0.83 - 0.11 * q};
        const DepthAuditReport rep = depth_audit(it, x, 4, 1000 + std::uint64_t(q));
        CHECK(rep.leaks == 0);
        real_trials += rep.trials - rep.vacuous;
        CHECK(rep.depth_size <= 12 * (48 * std::size_t(cfg().k0) + 5));
    }
    CHECK(real_trials > 0); // at this size the depth sets leave free indices
}

TEST_CASE("single-point audit is trivially leak free") {
    const Interpolant it = Interpolant::build({{0.4, 0.6}}, {0.7}, 1.0, cfg());
    const DepthAuditReport rep = depth_audit(it, {0.4, 0.6}, 10, 7);
    CHECK(rep.leaks == 0);
    CHECK(rep.vacuous == 10);
}

TEST_CASE("value bound errors") {
    CHECK_THROWS_AS(Interpolant::build({{0, 0}}, {-0.5}, 1.0, cfg()), input_error);
    CHECK_THROWS_AS(Interpolant::build({{0, 0}}, {0.5}, -1.0, cfg()), input_error);
}
