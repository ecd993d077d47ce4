#include "doctest.h"

#include "nnext/decomp.hpp"
#include "test_util.hpp"

#include <cmath>
#include <set>

using namespace nnext;

namespace {

Config cfg() { return Config::desk_profile(); }

void check_invariants(const Decomposition& dec) {
    const auto& squares = dec.squares();
    REQUIRE(!squares.empty());

    // good geometry: touching leaves within a factor 4, symmetric lists
    for (std::size_t i = 0; i < squares.size(); ++i) {
        for (int nb : squares[i].neighbors) {
            const double r = squares[i].sq.side() / squares[std::size_t(nb)].sq.side();
            CHECK(r >= 0.25 - 1e-12);
            CHECK(r <= 4.0 + 1e-12);
            const auto& back = squares[std::size_t(nb)].neighbors;
            CHECK(std::find(back.begin(), back.end(), int(i)) != back.end());
        }
    }

    // tiling: probe a grid, exactly one containing leaf each
    const Box2 dom = dec.domain();
    for (int a = 0; a < 23; ++a) {
        for (int b = 0; b < 23; ++b) {
            const Point2 x{dom.lo1 + (dom.hi1 - dom.lo1) * (a + 0.37) / 23.0,
                           dom.lo2 + (dom.hi2 - dom.lo2) * (b + 0.61) / 23.0};
            int found = -1, count = 0;
            for (std::size_t i = 0; i < squares.size(); ++i) {
                if (squares[i].sq.contains(x)) {
                    found = int(i);
                    ++count;
                }
            }
            CHECK(count == 1);
            CHECK(dec.locate(x) == found);
        }
    }

    // stopping soundness on data squares
    const double c0 = dec.config().C0;
    for (const DecompSquare& s : squares) {
        if (s.kind != SquareKind::Data) continue;
        const double threshold = c0 * s.sq.side();
        const Box2 b2 = s.sq.dilated(2.0);
        for (const Point2 p : {Point2{b2.lo1, b2.lo2}, Point2{b2.hi1, b2.lo2}, Point2{b2.lo1, b2.hi2},
                               Point2{b2.hi1, b2.hi2},
                               Point2{0.5 * (b2.lo1 + b2.hi1), 0.5 * (b2.lo2 + b2.hi2)}}) {
            CHECK(local_jet_diameter(p, dec.tree(), dec.config().k0, dec.config()) >=
                  threshold * (1.0 - 1e-9));
        }
        if (s.parent_diam_split) {
            CHECK(local_jet_diameter(s.parent_witness, dec.tree(), dec.config().k0, dec.config()) <
                  2.0 * threshold);
        }
        // representative point set apart from the data
        CHECK(s.rep_distance >= s.sq.side() / 8.0);
        CHECK(s.sq.contains(s.rep));
    }

    // relay targets nearby: data in the doubled parent, hence inside 5Q
    for (std::size_t i = 0; i < squares.size(); ++i) {
        const DecompSquare& s = squares[i];
        if (s.kind != SquareKind::Relay) continue;
        const int target = dec.relay_target(int(i));
        REQUIRE(target >= 0);
        CHECK(dec.square(target).kind == SquareKind::Data);
        const Box2 five = s.sq.dilated(5.0);
        const Box2 tb = dec.square(target).sq.box();
        const bool overlap = five.lo1 <= tb.hi1 && tb.lo1 <= five.hi1 && five.lo2 <= tb.hi2 &&
                             tb.lo2 <= five.hi2;
        CHECK(overlap);
        CHECK(dec.square(target).sq.side() <= 16.0 * s.sq.side() + 1e-12);
    }

    // graph property of the straightenings
    for (std::size_t i = 0; i < squares.size(); ++i) {
        if (squares[i].kind != SquareKind::Data) continue;
        const Straightening& st = dec.straightening(int(i));
        for (int idx : squares[i].data_2q) {
            const Point2 local = st.to_local(dec.points()[std::size_t(idx)]);
            CHECK(std::abs(local.x2) <=
                  dec.config().grid_eps * std::max(1.0, squares[i].sq.side()) * 4.0);
        }
    }
}

} // namespace

TEST_CASE("empty data set tiles at unit scale") {
    const Decomposition dec = Decomposition::build({}, cfg());
    CHECK(dec.squares().size() == 64); // 8 x 8 padded roots
    for (const DecompSquare& s : dec.squares()) {
        CHECK(s.kind == SquareKind::Far);
        CHECK(s.sq.side() == 1.0);
    }
}

TEST_CASE("single point decomposition") {
    const Decomposition dec = Decomposition::build({{0.5, 0.5}}, cfg());
    check_invariants(dec);
    const DecompStats st = dec.stats();
    CHECK(st.data_squares > 0);
    // snapshot of the structure (regression pin)
    CHECK(dec.squares().size() == 76);
    CHECK(st.data_squares == 4);
    CHECK(st.relay_squares == 32);
    CHECK(st.min_side == 0.5);
}

TEST_CASE("single point at a lattice corner") {
    const Decomposition dec = Decomposition::build({{0.0, 0.0}}, cfg());
    check_invariants(dec);
}

TEST_CASE("random data invariants and linear square count") {
    std::mt19937_64 rng(103);
    for (std::size_t n : {10, 60}) {
        const auto pts = testutil::random_points(rng, n, 0.0, 1.0);
        const Decomposition dec = Decomposition::build(pts, cfg());
        check_invariants(dec);
        const DecompStats st = dec.stats();
        CHECK(st.data_squares <= 24 * n); // recorded linear bound
    }
}

TEST_CASE("clustered data refines locally") {
    std::vector<Point2> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({0.5 + 0.002 * i, 0.5 + 0.0013 * (i % 3)});
    const Decomposition dec = Decomposition::build(pts, cfg());
    check_invariants(dec);
    CHECK(dec.stats().min_side < 0.01);
}

TEST_CASE("structure depends only on the points") {
    std::mt19937_64 rng(107);
    const auto pts = testutil::random_points(rng, 25, 0.0, 1.0);
    const Decomposition a = Decomposition::build(pts, cfg());
    const Decomposition b = Decomposition::build(pts, cfg());
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("duplicate and non-finite points are rejected") {
    CHECK_THROWS_AS(Decomposition::build({{0, 0}, {0, 0}}, cfg()), input_error);
    CHECK_THROWS_AS(Decomposition::build({{kInf, 0}}, cfg()), input_error);
}

TEST_CASE("cover and neighbors") {
    std::mt19937_64 rng(109);
    const auto pts = testutil::random_points(rng, 30, 0.0, 1.0);
    const Decomposition dec = Decomposition::build(pts, cfg());

    SUBCASE("interior center far from the data sees one square") {
        for (const DecompSquare& s : dec.squares()) {
            if (s.kind != SquareKind::Far) continue;
            if (dec.locate(s.sq.center()) < 0) continue;
            CHECK(dec.cover(s.sq.center()).size() == 1);
            break;
        }
    }
    SUBCASE("edge points see at least two squares") {
        const DecompSquare& s = dec.square(0);
        const Point2 c = s.sq.corner();
        const Point2 edge{c.x1, c.x2 + 0.5 * s.sq.side()};
        if (dec.locate(edge) >= 0 && edge.x1 > dec.domain().lo1) {
            CHECK(dec.cover(edge).size() >= 2);
        }
    }
    SUBCASE("cover matches a brute-force dilation scan; count bounded") {
        std::size_t worst = 0;
        for (int t = 0; t < 300; ++t) {
            const Point2 x{std::uniform_real_distribution<double>(-0.4, 1.4)(rng),
                           std::uniform_real_distribution<double>(-0.4, 1.4)(rng)};
            std::vector<int> brute;
            for (std::size_t i = 0; i < dec.squares().size(); ++i)
                if (dec.square(int(i)).sq.dilated(9.0 / 8.0).contains(x) && dec.locate(x) >= 0)
                    brute.push_back(int(i));
            const auto got = dec.cover(x);
            CHECK(got == brute);
            worst = std::max(worst, got.size());
        }
        CHECK(worst <= 12); // recorded bound under factor-4 geometry
    }
}

TEST_CASE("straightening of collinear data is affine") {
    std::vector<Point2> pts;
    for (int i = 0; i < 6; ++i) pts.push_back({0.1 + 0.12 * i, 0.4});
    const Decomposition dec = Decomposition::build(pts, cfg());
    check_invariants(dec);
    for (std::size_t i = 0; i < dec.squares().size(); ++i) {
        if (dec.square(int(i)).kind != SquareKind::Data) continue;
        const Straightening& st = dec.straightening(int(i));
        CHECK(st.max_slope <= 1e-9);
        CHECK(st.max_curvature <= 1e-9);
    }
}

TEST_CASE("shallow parabola keeps bounded curve estimates") {
    std::vector<Point2> pts;
    for (int i = 0; i < 9; ++i) {
        const double t = 0.1 + 0.1 * i;
        pts.push_back({t, 0.5 + 0.05 * (t - 0.5) * (t - 0.5)});
    }
    const Decomposition dec = Decomposition::build(pts, cfg());
    check_invariants(dec);
    double worst_slope = 0.0, worst_curv_scaled = 0.0;
    for (std::size_t i = 0; i < dec.squares().size(); ++i) {
        if (dec.square(int(i)).kind != SquareKind::Data) continue;
        const Straightening& st = dec.straightening(int(i));
        worst_slope = std::max(worst_slope, st.max_slope);
        worst_curv_scaled =
            std::max(worst_curv_scaled, st.max_curvature * dec.square(int(i)).sq.side());
    }
    // recorded stability snapshot for this fixture
    CHECK(worst_slope <= 1.0);
    CHECK(worst_curv_scaled <= 8.0);
}
