#include "nnext/tracenorm.hpp"

#include "nnext/lbfgs.hpp"

#include <algorithm>
#include <cmath>

namespace nnext {

NormEstimate estimate_norm(const Decomposition& dec, const std::vector<double>& values) {
    if (values.size() != dec.points().size()) throw input_error("estimate_norm: value count mismatch");
    for (double v : values)
        if (v < 0.0 || !is_finite(v)) throw input_error("estimate_norm: values must be finite and >= 0");

    NormEstimate out;
    const Config& cfg = dec.config();
    for (std::size_t i = 0; i < dec.squares().size(); ++i) {
        if (dec.square(int(i)).kind != SquareKind::Data) continue;
        const DepthSet ds = depth_set(dec.square(int(i)).rep, dec.tree(), cfg);
        std::vector<Point2> pts;
        std::vector<double> vals;
        for (int idx : ds.indices) {
            pts.push_back(dec.points()[std::size_t(idx)]);
            vals.push_back(values[std::size_t(idx)]);
        }
        const double local = min_energy_field(pts, vals, cfg).second;
        out.per_square.emplace_back(int(i), local);
        if (local > out.m_hat) {
            out.m_hat = local;
            out.witness_square = int(i);
        }
    }
    return out;
}

NormEstimate estimate_norm(const std::vector<Point2>& points, const std::vector<double>& values,
                           const Config& cfg) {
    const Decomposition dec = Decomposition::build(points, cfg);
    return estimate_norm(dec, values);
}

namespace {

// smoothed maximum: max + log(sum exp(beta (a - max))) / beta
struct SoftMax {
    double beta;
    double m = -kInf;
    double s = 0.0;
    std::vector<double> terms;

    void add(double t) {
        terms.push_back(t);
        m = std::max(m, t);
    }
    double value() {
        s = 0.0;
        for (double t : terms) s += std::exp(beta * (t - m));
        return m + std::log(s) / beta;
    }
    double weight(std::size_t i) const { return std::exp(beta * (terms[i] - m)) / s; }
};

} // namespace

double oracle_norm(const std::vector<Point2>& points, const std::vector<double>& values,
                   const Config& cfg) {
    const std::size_t n = points.size();
    if (n > 8) throw input_error("oracle_norm: instance larger than 8 points");
    if (n != values.size()) throw input_error("oracle_norm: size mismatch");
    if (n == 0) return 0.0;
    double scale = 0.0;
    for (double v : values) {
        if (v < 0.0 || !is_finite(v)) throw input_error("oracle_norm: values must be finite and >= 0");
        scale = std::max(scale, v);
    }
    if (scale == 0.0) return 0.0;

    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = values[i] / scale;

    // variables: gradients at points with positive value (zero values pin g)
    std::vector<int> slot(n, -1);
    int nv = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (f[i] > 0.0) slot[i] = 2 * nv++;

    struct PairGeom {
        int a, b;
        Point2 u; // x_a - x_b
        double d, d2;
    };
    std::vector<PairGeom> pairs;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const Point2 u = points[a] - points[b];
            const double d = norm2(u);
            if (d == 0.0) throw input_error("oracle_norm: duplicate points");
            pairs.push_back({int(a), int(b), u, d, d * d});
        }

    auto objective = [&](const std::vector<double>& z, std::vector<double>* grad, double beta) {
        auto g_of = [&](int i) -> Point2 {
            return slot[i] < 0 ? Point2{0.0, 0.0} : Point2{z[std::size_t(slot[i])], z[std::size_t(slot[i]) + 1]};
        };
        // groups: scaled pairwise terms, cushions, jet norms
        SoftMax semi{beta}, cush{beta}, ring{beta};
        for (const PairGeom& p : pairs) {
            const Point2 ga = g_of(p.a), gb = g_of(p.b);
            const double sv = (f[std::size_t(p.a)] - f[std::size_t(p.b)] - dot(gb, p.u)) / p.d2;
            semi.add(sv);
            semi.add(-sv);
            semi.add((ga.x1 - gb.x1) / p.d);
            semi.add(-(ga.x1 - gb.x1) / p.d);
            semi.add((ga.x2 - gb.x2) / p.d);
            semi.add(-(ga.x2 - gb.x2) / p.d);
        }
        semi.add(0.0);
        cush.add(0.0);
        ring.add(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 g = g_of(int(i));
            if (f[i] > 0.0) cush.add(dot(g, g) / (4.0 * f[i]));
            ring.add(std::sqrt(f[i] * f[i] + dot(g, g)));
        }
        const double val = semi.value() + cush.value() + ring.value();
        if (!grad) return val;

        std::fill(grad->begin(), grad->end(), 0.0);
        auto add_g = [&](int i, Point2 dg) {
            if (slot[i] < 0) return;
            (*grad)[std::size_t(slot[i])] += dg.x1;
            (*grad)[std::size_t(slot[i]) + 1] += dg.x2;
        };
        std::size_t t = 0;
        for (const PairGeom& p : pairs) {
            for (int sgn : {1, -1}) {
                const double w = semi.weight(t++) * sgn;
                add_g(p.b, (-w / p.d2) * p.u);
            }
            for (int sgn : {1, -1}) {
                const double w = semi.weight(t++) * sgn;
                add_g(p.a, {w / p.d, 0.0});
                add_g(p.b, {-w / p.d, 0.0});
            }
            for (int sgn : {1, -1}) {
                const double w = semi.weight(t++) * sgn;
                add_g(p.a, {0.0, w / p.d});
                add_g(p.b, {0.0, -w / p.d});
            }
        }
        std::size_t ci = 1, ri = 1;
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 g = g_of(int(i));
            if (f[i] > 0.0) {
                const double w = cush.weight(ci++);
                add_g(int(i), (w / (2.0 * f[i])) * g);
            }
            const double rv = std::sqrt(f[i] * f[i] + dot(g, g));
            const double w = ring.weight(ri++);
            if (rv > 0.0) add_g(int(i), (w / rv) * g);
        }
        return val;
    };

    auto run = [&](std::vector<double> z0) {
        for (int round = 0; round < 7; ++round) {
            const double beta = 16.0 * std::pow(2.0, round);
            LbfgsOptions opt;
            opt.max_iters = 120;
            opt.grad_tol = 1e-10;
            opt.scale = 1.0;
            auto fg = [&](const std::vector<double>& z, std::vector<double>& g) {
                g.assign(z.size(), 0.0);
                return objective(z, &g, beta);
            };
            lbfgs_minimize(fg, z0, opt);
        }
        // exact (unsmoothed) value at the final point
        auto g_of = [&](int i) -> Point2 {
            return slot[i] < 0 ? Point2{0.0, 0.0}
                               : Point2{z0[std::size_t(slot[i])], z0[std::size_t(slot[i]) + 1]};
        };
        double semi = 0.0, cushion = 0.0, ringv = 0.0;
        for (const PairGeom& p : pairs) {
            const Point2 ga = g_of(p.a), gb = g_of(p.b);
            semi = std::max(semi,
                            std::abs(f[std::size_t(p.a)] - f[std::size_t(p.b)] - dot(gb, p.u)) / p.d2);
            semi = std::max(semi, std::abs(ga.x1 - gb.x1) / p.d);
            semi = std::max(semi, std::abs(ga.x2 - gb.x2) / p.d);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 g = g_of(int(i));
            if (f[i] > 0.0) cushion = std::max(cushion, dot(g, g) / (4.0 * f[i]));
            ringv = std::max(ringv, std::sqrt(f[i] * f[i] + dot(g, g)));
        }
        return semi + cushion + ringv;
    };

    // two deterministic starts: zero gradients, and the energy minimizer's
    double best;
    {
        std::vector<double> z0(std::size_t(2 * nv), 0.0);
        best = run(z0);
    }
    {
        std::vector<double> fl(f.begin(), f.end());
        const WhitneyField mf = min_energy_field(points, fl, cfg).first;
        std::vector<double> z0(std::size_t(2 * nv), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if (slot[i] >= 0) {
                z0[std::size_t(slot[i])] = mf[i].grad.x1;
                z0[std::size_t(slot[i]) + 1] = mf[i].grad.x2;
            }
        best = std::min(best, run(z0));
    }
    return scale * best;
}

} // namespace nnext
