#include "doctest.h"

#include "nnext/extension.hpp"
#include "test_util.hpp"

#include <cmath>
#include <functional>
#include <memory>

using namespace nnext;

namespace {

Config cfg() { return Config::desk_profile(); }

// central finite differences of an Eval2-valued map; second derivatives are
// accepted when the residual shrinks under h-refinement (piecewise forms
// have third-derivative jumps at their seams)
void check_derivatives(const std::function<Eval2(Point2)>& f, Point2 x, double h, double tol) {
    const Eval2 e = f(x);
    const double sc = 1.0 + std::abs(e.v);
    auto fd = [&](double hh, double out[5]) {
        const Eval2 xp = f({x.x1 + hh, x.x2}), xm = f({x.x1 - hh, x.x2});
        const Eval2 yp = f({x.x1, x.x2 + hh}), ym = f({x.x1, x.x2 - hh});
        const Eval2 pp = f({x.x1 + hh, x.x2 + hh}), pm = f({x.x1 + hh, x.x2 - hh});
        const Eval2 mp = f({x.x1 - hh, x.x2 + hh}), mm = f({x.x1 - hh, x.x2 - hh});
        out[0] = (xp.v - xm.v) / (2 * hh);
        out[1] = (yp.v - ym.v) / (2 * hh);
        out[2] = (xp.v - 2 * e.v + xm.v) / (hh * hh);
        out[3] = (yp.v - 2 * e.v + ym.v) / (hh * hh);
        out[4] = (pp.v - pm.v - mp.v + mm.v) / (4 * hh * hh);
    };
    double d1[5], d2[5];
    fd(h, d1);
    fd(h / 2, d2);
    CHECK(e.dx == doctest::Approx(d1[0]).epsilon(tol).scale(sc));
    CHECK(e.dy == doctest::Approx(d1[1]).epsilon(tol).scale(sc));
    const double want[3] = {e.dxx, e.dyy, e.dxy};
    for (int t = 0; t < 3; ++t) {
        const double m1 = std::abs(want[t] - d1[2 + t]);
        const double m2 = std::abs(want[t] - d2[2 + t]);
        const bool direct = m1 <= tol * 40 * (sc + std::abs(want[t]));
        const bool converging = m2 <= 0.6 * m1 + tol * 40 * (sc + std::abs(want[t]));
        CHECK((direct || converging));
    }
}

} // namespace

TEST_CASE("radial cutoff profile") {
    const CutoffSpec psi{{0.3, -0.2}, 0.4, 1.0};
    CHECK(psi.eval({0.3, -0.2}).v == 1.0);
    CHECK(psi.eval({0.5, -0.2}).v == 1.0);
    CHECK(psi.eval({1.31, -0.2}).v == 0.0);
    const Eval2 mid = psi.eval({0.9, 0.1});
    CHECK(mid.v > 0.0);
    CHECK(mid.v < 1.0);
    // probes clear of the two profile seams
    for (const Point2 x : {Point2{0.85, -0.2}, Point2{0.9, 0.1}, Point2{0.0, 0.35}, Point2{1.0, -0.5}})
        check_derivatives([&](Point2 p) { return psi.eval(p); }, x, 1e-5, 1e-5);
    // scaled derivative bounds on a sample sweep
    for (int t = 0; t < 200; ++t) {
        const double ang = t * 0.097, r = 0.2 + t * 0.006;
        const Eval2 e = psi.eval({0.3 + r * std::cos(ang), -0.2 + r * std::sin(ang)});
        CHECK(std::abs(e.dx) <= 4.0 / 1.0);
        CHECK(std::abs(e.dxx) <= 30.0 / 1.0);
    }
}

TEST_CASE("single-jet extension") {
    SUBCASE("zero jet extends to zero") {
        const JetExtension f = extend_single_jet(Jet::zero({1, 2}));
        for (double t = -3; t <= 3; t += 0.21) CHECK(f.eval({1 + t, 2 - t}).v == 0.0);
    }
    SUBCASE("flat jet keeps value and gradient at the base") {
        const JetExtension f = extend_single_jet(Jet{{0.5, 0.5}, 1.0, {0, 0}});
        const Eval2 e = f.eval({0.5, 0.5});
        CHECK(e.v == doctest::Approx(1.0));
        CHECK(e.dx == doctest::Approx(0.0).scale(1.0));
        CHECK(e.dy == doctest::Approx(0.0).scale(1.0));
        for (double a = -1.5; a <= 1.5; a += 0.1)
            for (double b = -1.5; b <= 1.5; b += 0.1)
                CHECK(f.eval({0.5 + a, 0.5 + b}).v >= -1e-12);
    }
    SUBCASE("sloped jet stays nonnegative via its cushion") {
        const Jet p{{0, 0}, 1.0, {2.0, 0.0}};
        const JetExtension f = extend_single_jet(p);
        CHECK(f.cushion == doctest::Approx(1.0));
        for (double a = -3; a <= 3; a += 0.05)
            for (double b = -3; b <= 3; b += 0.05) CHECK(f.eval({a, b}).v >= -1e-12);
        const Eval2 e = f.eval({0, 0});
        CHECK(e.v == doctest::Approx(1.0));
        CHECK(e.dx == doctest::Approx(2.0));
        CHECK(e.dy == doctest::Approx(0.0).scale(1.0));
        for (const Point2 x : {Point2{0.1, 0.2}, Point2{-0.41, 0.3}, Point2{0.8, -0.6}})
            check_derivatives([&](Point2 q) { return f.eval(q); }, x, 1e-5, 1e-5);
    }
    SUBCASE("infinite cushion is rejected") {
        CHECK_THROWS_AS(extend_single_jet(Jet{{0, 0}, 0.0, {1.0, 0.0}}), input_error);
    }
}

TEST_CASE("field extension") {
    SUBCASE("zero field extends to zero") {
        const FieldExtension f(WhitneyField({Jet::zero({0, 0}), Jet::zero({1, 0})}));
        for (double t = -2; t <= 3; t += 0.17) CHECK(f.eval({t, 0.3 * t}).v == 0.0);
    }
    SUBCASE("singleton agrees with the single-jet operator bitwise") {
        const Jet p{{0.4, -0.1}, 0.7, {0.3, -0.2}};
        const FieldExtension field(WhitneyField({p}));
        const JetExtension single = extend_single_jet(p);
        for (double a = -2; a <= 2; a += 0.13) {
            const Point2 x{0.4 + a, -0.1 + 0.7 * a};
            const Eval2 l = field.eval(x), r = single.eval(x);
            CHECK(l.v == r.v);
            CHECK(l.dx == r.dx);
            CHECK(l.dyy == r.dyy);
        }
    }
    SUBCASE("two-point field interpolates its jets") {
        std::mt19937_64 rng(113);
        const Jet a{{0, 0}, 0.8, {0.2, -0.1}};
        const Jet b{{1, 0}, 0.5, {0.0, 0.3}};
        const FieldExtension f(WhitneyField({a, b}));
        const double h = 1e-6;
        for (const Jet& j : {a, b}) {
            const Eval2 e = f.eval(j.base);
            CHECK(e.v == doctest::Approx(j.value).epsilon(1e-10));
            const double dx = (f.eval({j.base.x1 + h, j.base.x2}).v -
                               f.eval({j.base.x1 - h, j.base.x2}).v) /
                              (2 * h);
            const double dy = (f.eval({j.base.x1, j.base.x2 + h}).v -
                               f.eval({j.base.x1, j.base.x2 - h}).v) /
                              (2 * h);
            CHECK(dx == doctest::Approx(j.grad.x1).epsilon(1e-5));
            CHECK(dy == doctest::Approx(j.grad.x2).epsilon(1e-5));
        }
        for (int t = 0; t < 500; ++t) {
            const Point2 x{std::uniform_real_distribution<double>(-2, 3)(rng),
                           std::uniform_real_distribution<double>(-2, 2)(rng)};
            CHECK(f.eval(x).v >= 0.0);
        }
    }
    SUBCASE("infinite norm is rejected") {
        CHECK_THROWS_AS(FieldExtension(WhitneyField({Jet{{0, 0}, 0.0, {1, 0}}})), input_error);
    }
}

TEST_CASE("anchor flag") {
    CHECK(delta_flag(Jet::zero({0, 0})) == 0);
    CHECK(delta_flag(Jet{{0, 0}, 1e-30, {0, 0}}) == 1);
    const AnchorJetResult r = anchor_jet([] {
        JetProgram p;
        p.x0 = {0.5, 0.5};
        p.constrained_points = {{0, 0}, {1, 1}};
        p.constrained_values = {0.0, 0.0};
        p.budget_m = 1.0;
        return p;
    }());
    CHECK(delta_flag(r.jet) == 0);
}

namespace {

struct PieceFixture {
    std::shared_ptr<Decomposition> dec;
    std::vector<double> values;
    double m;
    std::vector<AnchorSolve> anchors;
    std::vector<LocalPiece> pieces;

    PieceFixture(std::vector<Point2> pts, std::vector<double> vals, double m_) : values(vals), m(m_) {
        dec = std::make_shared<Decomposition>(Decomposition::build(pts, cfg()));
        anchors.resize(dec->squares().size());
        for (std::size_t i = 0; i < dec->squares().size(); ++i) {
            if (dec->square(int(i)).kind != SquareKind::Data) continue;
            const DepthSet ds = depth_set(dec->square(int(i)).rep, dec->tree(), cfg());
            std::vector<Point2> spts;
            std::vector<double> svals;
            for (int idx : ds.indices) {
                spts.push_back(dec->points()[std::size_t(idx)]);
                svals.push_back(values[std::size_t(idx)]);
            }
            anchors[i] = solve_anchor(spts, svals, dec->square(int(i)).rep, m, cfg(), nullptr);
        }
        for (std::size_t i = 0; i < dec->squares().size(); ++i)
            pieces.push_back(assign_operator(*dec, int(i), values, m, anchors, cfg()));
    }
};

} // namespace

TEST_CASE("local pieces") {
    std::mt19937_64 rng(127);
    const auto pts = testutil::random_points(rng, 14, 0.0, 1.0);
    auto vals = testutil::random_values(rng, 14);
    PieceFixture fix(pts, vals, 3.0);
    const Decomposition& dec = *fix.dec;

    int checked_data = 0, checked_relay = 0;
    for (std::size_t i = 0; i < dec.squares().size(); ++i) {
        const DecompSquare& s = dec.square(int(i));
        const LocalPiece& piece = fix.pieces[i];
        if (s.kind == SquareKind::Far) {
            CHECK(piece.eval(s.sq.center()).v == 0.0);
            continue;
        }
        if (s.kind == SquareKind::Relay) {
            ++checked_relay;
            // jet at the relayed representative point matches the anchor
            const int target = dec.relay_target(int(i));
            const Point2 rep = dec.square(target).sq.contains(dec.square(target).rep)
                                   ? dec.square(target).rep
                                   : dec.square(target).sq.center();
            const Eval2 e = piece.eval(rep);
            const Jet t = fix.anchors[std::size_t(target)].jet;
            CHECK(e.v == doctest::Approx(t.eval(rep)).epsilon(1e-12));
            continue;
        }
        ++checked_data;

        // prescribed jet at the representative point, exactly
        const Jet t = fix.anchors[i].jet;
        const Eval2 e = piece.eval(s.rep);
        CHECK(e.v == doctest::Approx(t.value).epsilon(1e-12).scale(1.0 + std::abs(t.value)));
        CHECK(e.dx == doctest::Approx(t.grad.x1).epsilon(1e-12).scale(1.0 + std::abs(t.grad.x1)));
        CHECK(e.dy == doctest::Approx(t.grad.x2).epsilon(1e-12).scale(1.0 + std::abs(t.grad.x2)));

        // interpolation on the local data
        for (int idx : s.data_2q) {
            const Point2 x = dec.points()[std::size_t(idx)];
            CHECK(piece.eval(x).v ==
                  doctest::Approx(fix.values[std::size_t(idx)]).epsilon(1e-10).scale(1.0));
        }

        // nonnegativity over the doubled square
        const Box2 b2 = s.sq.dilated(2.0);
        for (int a = 0; a <= 20; ++a)
            for (int b = 0; b <= 20; ++b) {
                const Point2 x{b2.lo1 + (b2.hi1 - b2.lo1) * a / 20.0,
                               b2.lo2 + (b2.hi2 - b2.lo2) * b / 20.0};
                CHECK(piece.eval(x).v >= -1e-10 * (1.0 + fix.m));
            }

        // chain rule through the straightening
        const double h = 1e-5 * s.sq.side();
        for (int probe = 0; probe < 4; ++probe) {
            const Point2 x{s.sq.corner().x1 + s.sq.side() * (0.2 + 0.2 * probe),
                           s.sq.corner().x2 + s.sq.side() * (0.83 - 0.17 * probe)};
            check_derivatives([&](Point2 q) { return piece.eval(q); }, x, h, 1e-4);
        }
    }
    CHECK(checked_data > 0);
    CHECK(checked_relay > 0);
}

TEST_CASE("zero data gives zero pieces everywhere") {
    std::mt19937_64 rng(131);
    const auto pts = testutil::random_points(rng, 8, 0.0, 1.0);
    PieceFixture fix(pts, std::vector<double>(8, 0.0), 1.0);
    for (std::size_t i = 0; i < fix.dec->squares().size(); ++i) {
        const Box2 b = fix.dec->square(int(i)).sq.dilated(9.0 / 8.0);
        for (int a = 0; a <= 6; ++a)
            for (int c = 0; c <= 6; ++c) {
                const Point2 x{b.lo1 + (b.hi1 - b.lo1) * a / 6.0, b.lo2 + (b.hi2 - b.lo2) * c / 6.0};
                CHECK(fix.pieces[i].eval(x).v == 0.0);
            }
    }
}

TEST_CASE("piece evaluation reads only the declared data") {
    std::mt19937_64 rng(137);
    const auto pts = testutil::random_points(rng, 260, 0.0, 1.0);
    auto vals = testutil::random_values(rng, 260);
    const Config c = cfg();
    auto dec = std::make_shared<Decomposition>(Decomposition::build(pts, c));

    // pick one data square and one probe
    int target = -1;
    for (std::size_t i = 0; i < dec->squares().size(); ++i)
        if (dec->square(int(i)).kind == SquareKind::Data) target = int(i);
    REQUIRE(target >= 0);
    const Point2 probe = dec->square(target).sq.center();

    auto build_piece = [&](const std::vector<double>& values) {
        const DepthSet ds = depth_set(dec->square(target).rep, dec->tree(), c);
        std::vector<Point2> spts;
        std::vector<double> svals;
        for (int idx : ds.indices) {
            spts.push_back(dec->points()[std::size_t(idx)]);
            svals.push_back(values[std::size_t(idx)]);
        }
        const AnchorSolve a = solve_anchor(spts, svals, dec->square(target).rep, 5.0, c, nullptr);
        return local_extend(*dec, target, values, 5.0, a, c);
    };

    const LocalPiece base = build_piece(vals);
    const DepthSet claimed = base.depth_at(probe);
    REQUIRE(claimed.size() < pts.size());

    auto perturbed = vals;
    int touched = 0;
    for (std::size_t i = 0; i < perturbed.size(); ++i) {
        if (claimed.contains(int(i))) continue;
        perturbed[i] = perturbed[i] + 0.21 + 0.001 * double(i);
        ++touched;
    }
    REQUIRE(touched > 0);
    const LocalPiece moved = build_piece(perturbed);
    const Eval2 want = base.eval(probe), got = moved.eval(probe);
    CHECK(want.v == got.v);
    CHECK(want.dx == got.dx);
    CHECK(want.dy == got.dy);
    CHECK(want.dxx == got.dxx);
    CHECK(want.dxy == got.dxy);
    CHECK(want.dyy == got.dyy);
}
