#include "nnext/convex.hpp"

#include "nnext/lp.hpp"

#include <algorithm>
#include <cmath>

namespace nnext {

bool DepthSet::contains(int i) const {
    return std::binary_search(indices.begin(), indices.end(), i);
}

DepthSet DepthSet::union_of(const DepthSet& a, const DepthSet& b) {
    DepthSet out;
    out.indices.reserve(a.indices.size() + b.indices.size());
    std::set_union(a.indices.begin(), a.indices.end(), b.indices.begin(), b.indices.end(),
                   std::back_inserter(out.indices));
    return out;
}

bool SigmaBody::contains(const Jet& p, double slack) const {
    const Jet q = p.rebased(center);
    if (value_pinned) {
        if (std::abs(q.value) > slack) return false;
    } else if (std::abs(q.value) > value_cap + slack) {
        return false;
    }
    if (norm2(q.grad) > grad_cap + slack) return false;
    for (const PointConstraint& c : constraints)
        if (std::abs(q.eval(c.point)) > c.value_bound + slack) return false;
    return true;
}

SigmaBody sigma_body(Point2 x, const std::vector<Point2>& s, const Config& cfg) {
    SigmaBody body;
    body.center = x;
    body.value_cap = cfg.norm_cap;
    body.grad_cap = cfg.norm_cap;
    for (const Point2& y : s) {
        const double d = dist2(x, y);
        if (d == 0.0) {
            body.value_pinned = true;
            continue;
        }
        body.constraints.push_back({y, d * d});
    }
    return body;
}

namespace {

// slab cutoff: |P(y)| <= d^2 is implied by the caps once
// cap (1 + d) <= d^2, i.e. d beyond the golden-ratio multiple of the cap
double slab_cutoff(double cap) {
    return 1.05 * 0.5 * (cap + std::sqrt(cap * cap + 4.0 * cap));
}

std::vector<LpRow> body_rows(const SigmaBody& body, Point2 grad_dir, int polygon) {
    std::vector<LpRow> rows;
    rows.reserve(2 * body.constraints.size() + polygon + 4);
    const bool pinned = body.value_pinned;
    // variable order: (v, g1, g2) or (g1, g2) when the value is pinned
    const int gi = pinned ? 0 : 1;

    if (!pinned) {
        rows.push_back({{1.0, 0.0, 0.0}, body.value_cap});
        rows.push_back({{-1.0, 0.0, 0.0}, body.value_cap});
    }
    for (int m = 0; m < polygon; ++m) {
        const double th = 2.0 * M_PI * (double(m) + 0.5) / double(polygon);
        LpRow r;
        r.a[gi] = std::cos(th);
        r.a[gi + 1] = std::sin(th);
        r.b = body.grad_cap;
        rows.push_back(r);
    }
    const double gn = norm2(grad_dir);
    if (gn > 0.0) {
        LpRow r;
        r.a[gi] = grad_dir.x1 / gn;
        r.a[gi + 1] = grad_dir.x2 / gn;
        r.b = body.grad_cap;
        rows.push_back(r);
        LpRow rn = r;
        rn.a[gi] = -rn.a[gi];
        rn.a[gi + 1] = -rn.a[gi + 1];
        rows.push_back(rn);
    }
    for (const SigmaBody::PointConstraint& c : body.constraints) {
        const Point2 u = c.point - body.center;
        LpRow r;
        if (!pinned) r.a[0] = 1.0;
        r.a[gi] = u.x1;
        r.a[gi + 1] = u.x2;
        r.b = c.value_bound;
        rows.push_back(r);
        LpRow rn;
        if (!pinned) rn.a[0] = -1.0;
        rn.a[gi] = -u.x1;
        rn.a[gi + 1] = -u.x2;
        rn.b = c.value_bound;
        rows.push_back(rn);
    }
    return rows;
}

// Support value of the body in jet direction (w0, wg); also the maximizer.
double support(const SigmaBody& body, double w0, Point2 wg, Jet* arg) {
    const bool pinned = body.value_pinned;
    const std::vector<LpRow> rows = body_rows(body, wg, 48);
    std::array<double, 3> c{};
    int dim;
    if (pinned) {
        c = {wg.x1, wg.x2, 0.0};
        dim = 2;
    } else {
        c = {w0, wg.x1, wg.x2};
        dim = 3;
    }
    const LpResult res = lp_maximize(rows, c, dim, 1.25 * std::max(body.value_cap, body.grad_cap));
    if (!res.feasible) {
        if (arg) *arg = Jet::zero(body.center);
        return 0.0; // body always contains the zero jet
    }
    if (arg) {
        if (pinned)
            *arg = Jet{body.center, 0.0, {res.x[0], res.x[1]}};
        else
            *arg = Jet{body.center, res.x[0], {res.x[1], res.x[2]}};
    }
    return res.value;
}

// golden-angle spiral on the unit sphere in jet-coefficient space
std::array<double, 3> fib_direction(int m, int n) {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    const double z = 1.0 - (2.0 * m + 1.0) / double(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double th = 2.0 * M_PI * double(m) / golden;
    return {z, r * std::cos(th), r * std::sin(th)};
}

const std::array<std::array<double, 3>, 7> kSeedDirections = {{{1.0, 0.0, 0.0},
                                                               {0.0, 1.0, 0.0},
                                                               {0.0, 0.0, 1.0},
                                                               {0.57735026918962576, 0.57735026918962576, 0.57735026918962576},
                                                               {0.57735026918962576, -0.57735026918962576, 0.57735026918962576},
                                                               {0.57735026918962576, 0.57735026918962576, -0.57735026918962576},
                                                               {0.70710678118654752, 0.70710678118654752, 0.0}}};

// Sound enclosing-ball radius from the caps, the slabs, and slab pairs.
double radius_upper_bound(const SigmaBody& body) {
    double gb = body.grad_cap;
    const std::size_t n = std::min<std::size_t>(body.constraints.size(), 6);
    double best_pair = kInf;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const Point2 ua = body.constraints[a].point - body.center;
            const Point2 ub = body.constraints[b].point - body.center;
            const Point2 e = ua - ub;
            const double len = norm2(e);
            if (len == 0.0) continue;
            const double ca = (body.constraints[a].value_bound + body.constraints[b].value_bound) / len;
            // second direction: combine with a third slab if available, else skip
            for (std::size_t c2 = b + 1; c2 < n; ++c2) {
                const Point2 uc = body.constraints[c2].point - body.center;
                const Point2 e2 = ua - uc;
                const double len2 = norm2(e2);
                if (len2 == 0.0) continue;
                const double cb = (body.constraints[a].value_bound + body.constraints[c2].value_bound) / len2;
                const double sin_t = std::abs(e.x1 * e2.x2 - e.x2 * e2.x1) / (len * len2);
                if (sin_t < 0.05) continue;
                best_pair = std::min(best_pair, (ca + cb) / sin_t);
            }
        }
    }
    gb = std::min(gb, best_pair);
    double vb = body.value_pinned ? 0.0 : body.value_cap;
    for (const SigmaBody::PointConstraint& c : body.constraints) {
        const double d = std::sqrt(c.value_bound);
        vb = std::min(vb, c.value_bound + gb * d);
    }
    return std::sqrt(vb * vb + gb * gb);
}

SigmaBody local_body(Point2 x, const KdTree2& data, const Config& cfg) {
    const double rc = slab_cutoff(cfg.norm_cap);
    std::vector<int> near = data.nearest(x, std::size_t(cfg.body_point_cap));
    std::vector<Point2> pts;
    pts.reserve(near.size());
    for (int idx : near) {
        const Point2 y = data.points()[idx];
        if (dist2(x, y) <= rc) pts.push_back(y);
    }
    return sigma_body(x, pts, cfg);
}

} // namespace

DiameterResult body_diameter(const SigmaBody& body, const Config& cfg) {
    DiameterResult out;
    out.achieving = Jet::zero(body.center);
    const int n = cfg.direction_samples;
    auto probe = [&](const std::array<double, 3>& w) {
        Jet arg;
        const double h = support(body, w[0], {w[1], w[2]}, &arg);
        if (2.0 * h > out.diameter) {
            out.diameter = 2.0 * h;
            out.achieving = arg;
            out.direction = w;
        }
    };
    for (const auto& w : kSeedDirections) probe(w);
    for (int m = 0; m < n; ++m) probe(fib_direction(m, n));
    return out;
}

double local_jet_diameter(Point2 x, const KdTree2& data, int k, const Config& cfg) {
    if (k < 1) throw input_error("local_jet_diameter: k must be >= 1");
    if (cfg.direction_samples < 6) throw input_error("local_jet_diameter: direction_samples < 6");
    return body_diameter(local_body(x, data, cfg), cfg).diameter;
}

DiameterResult local_jet_diameter_full(Point2 x, const KdTree2& data, const Config& cfg) {
    return body_diameter(local_body(x, data, cfg), cfg);
}

bool diameter_at_least(Point2 x, const KdTree2& data, const Config& cfg, double threshold) {
    const SigmaBody body = local_body(x, data, cfg);
    if (2.0 * radius_upper_bound(body) < threshold) return false;
    const int n = cfg.direction_samples;
    double best = 0.0;
    auto probe = [&](const std::array<double, 3>& w) {
        const double h = support(body, w[0], {w[1], w[2]}, nullptr);
        best = std::max(best, 2.0 * h);
        return best >= threshold;
    };
    for (const auto& w : kSeedDirections)
        if (probe(w)) return true;
    for (int m = 0; m < n; ++m)
        if (probe(fib_direction(m, n))) return true;
    return false;
}

DepthSet depth_set(Point2 x0, const KdTree2& data, const Config& cfg) {
    DepthSet out;
    out.indices = data.nearest(x0, std::size_t(48) * std::size_t(cfg.k0));
    std::sort(out.indices.begin(), out.indices.end());
    return out;
}

} // namespace nnext
