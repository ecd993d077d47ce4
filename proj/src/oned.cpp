#include "nnext/oned.hpp"

#include <algorithm>
#include <cmath>

namespace nnext {

namespace {

void check_data(const OneDData& d) {
    if (d.knots.empty()) throw input_error("1d data: empty knots");
    if (d.knots.size() != d.values.size()) throw input_error("1d data: size mismatch");
    for (std::size_t i = 1; i < d.knots.size(); ++i)
        if (!(d.knots[i - 1] < d.knots[i])) throw input_error("1d data: knots not strictly increasing");
}

// slope and half-curvature of the parabola through three samples, at x_b
struct ParabolaJet {
    double slope, quad;
};

ParabolaJet parabola_at(double xa, double fa, double xb, double fb, double xc, double fc) {
    const double d1 = (fb - fa) / (xb - xa);
    const double d2 = (fc - fb) / (xc - xb);
    const double dd = (d2 - d1) / (xc - xa);
    // p(t) = fa + d1 (t - xa) + dd (t - xa)(t - xb); p'(xb) = d1 + dd (xb - xa)
    return {d1 + dd * (xb - xa), dd};
}

} // namespace

std::vector<int> stencil(double t, const std::vector<double>& knots) {
    if (knots.empty()) throw input_error("stencil: empty knots");
    const int n = int(knots.size());
    std::vector<int> out;
    if (n <= 3) {
        for (int i = 0; i < n; ++i) out.push_back(i);
        return out;
    }
    if (t <= knots[1]) return {0, 1, 2};
    if (t >= knots[n - 2]) return {n - 3, n - 2, n - 1};
    const int i = int(std::upper_bound(knots.begin(), knots.end(), t) - knots.begin()) - 1;
    return {i - 1, i, i + 1, i + 2};
}

OneDFunction extend_linear(const OneDData& data) {
    check_data(data);
    OneDFunction f;
    f.mode_ = OneDFunction::Mode::Linear;
    f.knots_ = data.knots;
    const int n = int(data.knots.size());
    f.pieces_.resize(n);
    const auto& k = data.knots;
    const auto& v = data.values;
    for (int i = 0; i < n; ++i) {
        OneDFunction::KnotPiece p;
        p.f = v[i];
        if (n == 1) {
            p.m = 0.0;
            p.c = 0.0;
        } else if (n == 2) {
            p.m = (v[1] - v[0]) / (k[1] - k[0]);
            p.c = 0.0;
        } else {
            const int b = std::clamp(i, 1, n - 2);
            const ParabolaJet pj =
                parabola_at(k[b - 1], v[b - 1], k[b], v[b], k[b + 1], v[b + 1]);
            // the knot parabola is the stencil parabola re-anchored at k[i]
            p.m = pj.slope + 2.0 * pj.quad * (k[i] - k[b]);
            p.c = pj.quad;
        }
        f.pieces_[i] = p;
    }
    return f;
}

OneDFunction extend_nonneg(const OneDData& data, double m) {
    check_data(data);
    if (m < 0.0) throw input_error("extend_nonneg: M must be >= 0");
    for (double v : data.values)
        if (v < 0.0) throw input_error("extend_nonneg: negative value");

    OneDFunction lin = extend_linear(data);
    OneDFunction f;
    f.mode_ = OneDFunction::Mode::Nonneg;
    f.knots_ = data.knots;
    f.pieces_.resize(data.knots.size());
    for (std::size_t i = 0; i < data.knots.size(); ++i) {
        OneDFunction::KnotPiece p;
        p.f = data.values[i];
        const double cap = 2.0 * std::sqrt(m * p.f);
        p.m = std::clamp(lin.pieces_[i].m, -cap, cap);
        // cushion of the capped jet keeps the parabola a perfect square
        p.c = p.f > 0.0 ? (p.m * p.m) / (4.0 * p.f) : 0.0;
        f.pieces_[i] = p;
    }
    return f;
}

OneDEval OneDFunction::eval(double t) const {
    const int n = int(knots_.size());
    const auto& k = knots_;

    if (n == 1) {
        const double s = std::abs(t - k[0]) / tail_len_;
        if (s >= 1.0) return {0.0, 0.0, 0.0};
        const SmoothStep w = smooth_step(s);
        const double sgn = t >= k[0] ? 1.0 : -1.0;
        const double f0 = pieces_[0].f;
        return {f0 * (1.0 - w.w), -f0 * w.dw * sgn / tail_len_, -f0 * w.ddw / (tail_len_ * tail_len_)};
    }

    if (t < k[0] || t > k[n - 1]) {
        const bool right = t > k[n - 1];
        const int i = right ? n - 1 : 0;
        const double dist = right ? t - k[n - 1] : k[0] - t;
        if (dist >= tail_len_) return {0.0, 0.0, 0.0};
        const double sgn = right ? 1.0 : -1.0;
        const SmoothStep w = smooth_step(dist / tail_len_);
        const KnotPiece& p = pieces_[i];
        const double u = t - k[i];
        const double pv = p.at(u), p1 = p.d1(u), p2 = p.d2();
        const double dv = 1.0 - w.w;
        const double d1v = -w.dw * sgn / tail_len_;
        const double d2v = -w.ddw / (tail_len_ * tail_len_);
        return {pv * dv, p1 * dv + pv * d1v, p2 * dv + 2.0 * p1 * d1v + pv * d2v};
    }

    int i = int(std::upper_bound(k.begin(), k.end(), t) - k.begin()) - 1;
    i = std::clamp(i, 0, n - 2);
    const double h = k[i + 1] - k[i];
    const double s = (t - k[i]) / h;
    const SmoothStep w = smooth_step(s);
    const KnotPiece& a = pieces_[i];
    const KnotPiece& b = pieces_[i + 1];
    const double ua = t - k[i], ub = t - k[i + 1];
    const double av = a.at(ua), a1 = a.d1(ua), a2 = a.d2();
    const double bv = b.at(ub), b1 = b.d1(ub), b2 = b.d2();
    const double wh = w.dw / h, whh = w.ddw / (h * h);
    OneDEval out;
    out.value = (1.0 - w.w) * av + w.w * bv;
    out.d1 = (1.0 - w.w) * a1 + w.w * b1 + wh * (bv - av);
    out.d2 = (1.0 - w.w) * a2 + w.w * b2 + 2.0 * wh * (b1 - a1) + whh * (bv - av);
    return out;
}

DepthSet OneDFunction::stencil_of(double t) const {
    DepthSet out;
    out.indices = stencil(t, knots_);
    return out;
}

} // namespace nnext
