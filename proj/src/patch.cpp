#include "nnext/patch.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <thread>

namespace nnext {

namespace {

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

/// Product of two axis plateau bumps: 1 on the square, 0 outside 9/8 Q.
Eval2 box_bump(const Square& sq, Point2 x) {
    const Point2 c = sq.center();
    const double r_in = 0.5 * sq.side();
    const double r_out = (9.0 / 16.0) * sq.side();
    const double u1 = x.x1 - c.x1, u2 = x.x2 - c.x2;
    const PlateauEval b1 = plateau(std::abs(u1), r_in, r_out);
    const PlateauEval b2 = plateau(std::abs(u2), r_in, r_out);
    const double s1 = u1 >= 0.0 ? 1.0 : -1.0, s2 = u2 >= 0.0 ? 1.0 : -1.0;
    Eval2 out;
    out.v = b1.v * b2.v;
    out.dx = b1.d1 * s1 * b2.v;
    out.dy = b1.v * b2.d1 * s2;
    out.dxx = b1.d2 * b2.v;
    out.dyy = b1.v * b2.d2;
    out.dxy = b1.d1 * s1 * b2.d1 * s2;
    return out;
}

Eval2 inverse(const Eval2& s) {
    Eval2 out;
    const double iv = 1.0 / s.v;
    out.v = iv;
    out.dx = -s.dx * iv * iv;
    out.dy = -s.dy * iv * iv;
    out.dxx = (2.0 * s.dx * s.dx * iv - s.dxx) * iv * iv;
    out.dyy = (2.0 * s.dy * s.dy * iv - s.dyy) * iv * iv;
    out.dxy = (2.0 * s.dx * s.dy * iv - s.dxy) * iv * iv;
    return out;
}

} // namespace

bool EvalResult::same_bits(const EvalResult& o) const {
    return bits_equal(value, o.value) && bits_equal(dx, o.dx) && bits_equal(dy, o.dy) &&
           bits_equal(dxx, o.dxx) && bits_equal(dxy, o.dxy) && bits_equal(dyy, o.dyy);
}

Interpolant Interpolant::build(const std::vector<Point2>& points, const std::vector<double>& values,
                               double m, const Config& cfg) {
    auto dec = std::make_shared<Decomposition>(Decomposition::build(points, cfg));
    return build_with(std::move(dec), values, m, nullptr);
}

Interpolant Interpolant::build_with(std::shared_ptr<const Decomposition> dec,
                                    const std::vector<double>& values, double m,
                                    const std::vector<AnchorSolve>* warm) {
    const Decomposition& d = *dec;
    if (values.size() != d.points().size()) throw input_error("interpolant: value count mismatch");
    for (double v : values) {
        if (!is_finite(v)) throw input_error("interpolant: non-finite value");
        if (v < 0.0) throw input_error("interpolant: negative value");
    }
    if (!(m >= 0.0)) throw input_error("interpolant: M must be >= 0");

    Interpolant out;
    out.dec_ = std::move(dec);
    out.values_ = values;
    out.m_ = m;

    const Config& cfg = d.config();
    const std::size_t n = d.squares().size();
    std::vector<AnchorSolve> anchors(n);
    out.warm_.resize(n);

    // anchor solves for all data squares (independent; split across threads)
    std::vector<int> data_squares;
    for (std::size_t i = 0; i < n; ++i)
        if (d.square(int(i)).kind == SquareKind::Data) data_squares.push_back(int(i));

    auto solve_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t t = lo; t < hi; ++t) {
            const int sq = data_squares[t];
            const DepthSet ds = depth_set(d.square(sq).rep, d.tree(), cfg);
            std::vector<Point2> pts;
            std::vector<double> vals;
            pts.reserve(ds.indices.size());
            vals.reserve(ds.indices.size());
            for (int idx : ds.indices) {
                pts.push_back(d.points()[std::size_t(idx)]);
                vals.push_back(values[std::size_t(idx)]);
            }
            const AnchorSolve* w =
                warm && std::size_t(sq) < warm->size() && !(*warm)[std::size_t(sq)].coeffs.empty()
                    ? &(*warm)[std::size_t(sq)]
                    : nullptr;
            anchors[std::size_t(sq)] = solve_anchor(pts, vals, d.square(sq).rep, m, cfg, w);
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (hw >= 2 && data_squares.size() >= 8) {
        const std::size_t mid = data_squares.size() / 2;
        std::thread worker(solve_range, mid, data_squares.size());
        solve_range(0, mid);
        worker.join();
    } else {
        solve_range(0, data_squares.size());
    }

    out.pieces_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.pieces_.push_back(assign_operator(d, int(i), values, m, anchors, cfg));
        if (out.pieces_.back().relay_grad_clamped) ++out.relay_clamps_;
    }
    out.warm_ = std::move(anchors);

    std::uint64_t h = 1469598103934665603ull;
    for (const Point2& p : d.points()) {
        h = hash_double(p.x1, h);
        h = hash_double(p.x2, h);
    }
    for (double v : values) h = hash_double(v, h);
    out.fingerprint_ = h;
    return out;
}

EvalResult Interpolant::query(Point2 x) const {
    EvalResult res;
    const std::vector<int> cands = dec_->cover(x);
    if (cands.empty()) return res;

    Eval2 total{};  // sum of bump * piece
    Eval2 weight{}; // sum of bumps
    for (int c : cands) {
        const Eval2 b = box_bump(dec_->square(c).sq, x);
        const Eval2 p = pieces_[std::size_t(c)].eval(x);
        total += Eval2::product(b, p);
        weight += b;
        res.depth = DepthSet::union_of(res.depth, pieces_[std::size_t(c)].depth_at(x));
    }
    const Eval2 e = Eval2::product(total, inverse(weight));
    res.value = e.v;
    res.dx = e.dx;
    res.dy = e.dy;
    res.dxx = e.dxx;
    res.dxy = e.dxy;
    res.dyy = e.dyy;
    return res;
}

DepthAuditReport depth_audit(const Interpolant& base, Point2 x, int trials, std::uint64_t seed) {
    DepthAuditReport rep;
    auto dec = base.decomposition_ptr();
    const std::vector<double>& f = base.values();
    const double m = base.bound_m();
    const auto& warm = base.warm_store();

    const Interpolant reference = Interpolant::build_with(dec, f, m, &warm);
    const EvalResult want = reference.query(x);
    rep.depth_size = want.depth.size();

    std::vector<int> off;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!want.depth.contains(int(i))) off.push_back(int(i));

    double fmax = 0.0;
    for (double v : f) fmax = std::max(fmax, v);
    if (fmax == 0.0) fmax = 1.0;

    std::mt19937_64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        ++rep.trials;
        if (off.empty()) {
            ++rep.vacuous;
            continue;
        }
        std::vector<double> g = f;
        const int count = 1 + int(rng() % 3);
        int touched = -1;
        for (int c = 0; c < count; ++c) {
            const int idx = off[rng() % off.size()];
            g[std::size_t(idx)] = fmax * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            touched = idx;
        }
        const Interpolant rebuilt = Interpolant::build_with(dec, g, m, &warm);
        const EvalResult got = rebuilt.query(x);
        if (!got.same_bits(want)) {
            ++rep.leaks;
            if (rep.first_leak_index < 0) rep.first_leak_index = touched;
        }
    }
    return rep;
}

} // namespace nnext
