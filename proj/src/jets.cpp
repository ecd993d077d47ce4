#include "nnext/jets.hpp"

#include <algorithm>
#include <cmath>

namespace nnext {

double jet_evaluate(const Jet& p, Point2 y) { return p.eval(y); }

double ring_norm(const Jet& p) {
    return std::sqrt(p.value * p.value + p.grad.x1 * p.grad.x1 + p.grad.x2 * p.grad.x2);
}

double nonneg_cushion(const Jet& p) {
    const double g2 = dot(p.grad, p.grad);
    if (p.value > 0.0) return g2 / (4.0 * p.value);
    if (p.value == 0.0) return g2 == 0.0 ? 0.0 : kInf;
    return kInf;
}

WhitneyField::WhitneyField(std::vector<Jet> jets) : jets_(std::move(jets)) {
    for (std::size_t i = 0; i < jets_.size(); ++i) {
        for (std::size_t j = i + 1; j < jets_.size(); ++j) {
            if (jets_[i].base == jets_[j].base)
                throw input_error("whitney field: duplicate base point");
        }
    }
}

double whitney_seminorm(const WhitneyField& f) {
    double worst = 0.0;
    const auto& js = f.jets();
    for (std::size_t a = 0; a < js.size(); ++a) {
        for (std::size_t b = 0; b < js.size(); ++b) {
            if (a == b) continue;
            const Point2 x = js[a].base;
            const double d = dist2(x, js[b].base);
            if (d == 0.0) throw input_error("whitney seminorm: zero distance");
            const double v = std::abs(js[a].value - js[b].eval(x)) / (d * d);
            const Point2 dg = js[a].grad - js[b].grad;
            worst = std::max({worst, v, std::abs(dg.x1) / d, std::abs(dg.x2) / d});
        }
    }
    return worst;
}

double wplus_norm(const WhitneyField& f) {
    double cushion = 0.0;
    for (const Jet& j : f.jets()) cushion = std::max(cushion, nonneg_cushion(j));
    if (cushion == kInf) return kInf;
    return whitney_seminorm(f) + cushion;
}

double compat_energy(const WhitneyField& f) {
    double total = 0.0;
    const auto& js = f.jets();
    for (const Jet& j : js)
        total += j.value * j.value + j.grad.x1 * j.grad.x1 + j.grad.x2 * j.grad.x2;
    for (std::size_t a = 0; a < js.size(); ++a) {
        for (std::size_t b = 0; b < js.size(); ++b) {
            if (a == b) continue;
            const Point2 x = js[a].base;
            const double d = dist2(x, js[b].base);
            if (d == 0.0) throw input_error("compat energy: zero distance");
            const double v = (js[a].value - js[b].eval(x)) / (d * d);
            const Point2 dg = js[a].grad - js[b].grad;
            total += v * v + (dg.x1 * dg.x1 + dg.x2 * dg.x2) / (d * d);
        }
    }
    return total;
}

double cushion_energy(const WhitneyField& f) {
    double total = 0.0;
    for (const Jet& j : f.jets()) {
        const double g2 = dot(j.grad, j.grad);
        if (j.value < 0.0) return kInf;
        if (j.value == 0.0) {
            if (g2 != 0.0) return kInf;
            continue; // 0/0 convention
        }
        total += g2 * g2 / (j.value * j.value);
    }
    return total;
}

bool ball_membership(const Jet& p, Point2 x, double delta, double scale) {
    if (delta <= 0.0 || scale <= 0.0) throw input_error("ball membership: delta and scale must be > 0");
    const Jet q = p.rebased(x);
    return std::abs(q.value) <= scale * delta * delta && norm2(q.grad) <= scale * delta;
}

} // namespace nnext
