#include "nnext/extension.hpp"

#include <algorithm>
#include <cmath>

namespace nnext {

Eval2 eval_jet(const Jet& j, Point2 x) {
    Eval2 e;
    e.v = j.eval(x);
    e.dx = j.grad.x1;
    e.dy = j.grad.x2;
    return e;
}

Eval2 CutoffSpec::eval(Point2 x) const {
    const Point2 u = x - center;
    const double r2 = dot(u, u);
    Eval2 out;
    if (r2 <= inner_radius * inner_radius) {
        out.v = 1.0;
        return out;
    }
    if (r2 >= outer_radius * outer_radius) return out;
    const double r = std::sqrt(r2);
    const PlateauEval p = plateau(r, inner_radius, outer_radius);
    out.v = p.v;
    const double ux = u.x1 / r, uy = u.x2 / r;
    out.dx = p.d1 * ux;
    out.dy = p.d1 * uy;
    const double a = p.d2 - p.d1 / r;
    out.dxx = a * ux * ux + p.d1 / r;
    out.dyy = a * uy * uy + p.d1 / r;
    out.dxy = a * ux * uy;
    return out;
}

Eval2 JetExtension::eval(Point2 x) const {
    const Eval2 cut = chi.eval(x);
    if (cut.v == 0.0 && cut.dx == 0.0 && cut.dy == 0.0 && cut.dxx == 0.0 && cut.dxy == 0.0 &&
        cut.dyy == 0.0)
        return Eval2{};
    const Point2 u = x - jet.base;
    Eval2 body = eval_jet(jet, x);
    body.v += cushion * dot(u, u);
    body.dx += 2.0 * cushion * u.x1;
    body.dy += 2.0 * cushion * u.x2;
    body.dxx += 2.0 * cushion;
    body.dyy += 2.0 * cushion;
    return Eval2::product(cut, body);
}

JetExtension extend_single_jet(const Jet& p) {
    const double c = nonneg_cushion(p);
    if (!is_finite(c)) throw input_error("extend_single_jet: infinite cushion");
    JetExtension e;
    e.jet = p;
    e.cushion = c;
    e.chi = CutoffSpec{p.base, 0.5, 1.0};
    return e;
}

FieldExtension::FieldExtension(const WhitneyField& field) {
    if (!is_finite(wplus_norm(field))) throw input_error("extend_field: infinite field norm");
    const auto& jets = field.jets();
    for (std::size_t i = 0; i < jets.size(); ++i) {
        double nearest = kInf;
        for (std::size_t j = 0; j < jets.size(); ++j)
            if (j != i) nearest = std::min(nearest, dist2(jets[i].base, jets[j].base));
        const double radius = std::min(1.0, 0.5 * nearest);
        JetExtension piece;
        piece.jet = jets[i];
        piece.cushion = nonneg_cushion(jets[i]);
        piece.chi = CutoffSpec{jets[i].base, 0.5 * radius, radius};
        pieces_.push_back(piece);
    }
}

Eval2 FieldExtension::eval(Point2 x) const {
    Eval2 out;
    for (const JetExtension& p : pieces_) out += p.eval(x);
    return out;
}

int delta_flag(const Jet& t) { return ring_norm(t) > 0.0 ? 1 : 0; }

LocalPiece local_extend(const Decomposition& dec, int square, const std::vector<double>& values,
                        double m, const AnchorSolve& anchor, const Config& cfg) {
    const DecompSquare& s = dec.square(square);
    if (s.kind != SquareKind::Data) throw input_error("local_extend: not a data square");

    LocalPiece piece;
    piece.kind = SquareKind::Data;
    piece.anchor = anchor.jet;
    piece.anchored = delta_flag(anchor.jet) == 1;
    piece.side = s.sq.side();
    piece.chart = dec.straightening(square);
    piece.anchor_depth = depth_set(s.rep, dec.tree(), cfg);

    const double r_psi = 0.95 * s.rep_distance;
    piece.psi = CutoffSpec{s.rep, 0.5 * r_psi, r_psi};

    // residual data along the straightened first coordinate
    struct KnotRow {
        double t;
        int idx;
    };
    std::vector<KnotRow> rows;
    rows.reserve(s.data_2q.size());
    for (int idx : s.data_2q) rows.push_back({piece.chart.t_of(dec.points()[idx]), idx});
    std::sort(rows.begin(), rows.end(), [](const KnotRow& a, const KnotRow& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.idx < b.idx;
    });
    OneDData data;
    data.knots.reserve(rows.size());
    data.values.reserve(rows.size());
    for (const KnotRow& r : rows) {
        if (!data.knots.empty() && r.t - piece.chart.t_center == data.knots.back())
            throw decomposition_error("local_extend: straightened knots collide");
        data.knots.push_back(r.t - piece.chart.t_center);
        data.values.push_back(values[std::size_t(r.idx)] - anchor.jet.eval(dec.points()[r.idx]));
        piece.knot_data.push_back(r.idx);
    }
    piece.profile = piece.anchored ? extend_linear(data) : extend_nonneg(data, m);
    return piece;
}

Eval2 LocalPiece::eval(Point2 x) const {
    if (kind == SquareKind::Far) return Eval2{};
    if (kind == SquareKind::Relay) return relay_ext.eval(x);

    // profile along the straightened first coordinate
    const Point2 u = chart.rotation.apply(x);
    const OneDEval h = profile.eval(u.x1 - chart.t_center);
    Eval2 g;
    {
        // gradient/hessian of t -> h(t) pulled back through the rotation
        const double r11 = chart.rotation.r11, r12 = chart.rotation.r12;
        g.v = h.value;
        g.dx = h.d1 * r11;
        g.dy = h.d1 * r12;
        g.dxx = h.d2 * r11 * r11;
        g.dxy = h.d2 * r11 * r12;
        g.dyy = h.d2 * r12 * r12;
    }

    // transverse damper, identity within |s| <= 2 side (all consumed points)
    const double r_in = 2.0 * side, r_out = 4.0 * side;
    const OneDEval curve = chart.curve.eval(u.x1 - chart.t_center);
    const double sv = u.x2 - chart.s_center - curve.value;
    if (std::abs(sv) >= r_in) {
        if (std::abs(sv) >= r_out) {
            g = Eval2{};
        } else {
            const PlateauEval d = plateau(std::abs(sv), r_in, r_out);
            const double sgn = sv >= 0.0 ? 1.0 : -1.0;
            // s(x) = (R x)_2 - s_center - curve((R x)_1): chain rule
            const double r11 = chart.rotation.r11, r12 = chart.rotation.r12;
            const double r21 = chart.rotation.r21, r22 = chart.rotation.r22;
            const double sx = r21 - curve.d1 * r11;
            const double sy = r22 - curve.d1 * r12;
            Eval2 damp;
            damp.v = d.v;
            damp.dx = d.d1 * sgn * sx;
            damp.dy = d.d1 * sgn * sy;
            damp.dxx = d.d2 * sx * sx - d.d1 * sgn * curve.d2 * r11 * r11;
            damp.dyy = d.d2 * sy * sy - d.d1 * sgn * curve.d2 * r12 * r12;
            damp.dxy = d.d2 * sx * sy - d.d1 * sgn * curve.d2 * r11 * r12;
            g = Eval2::product(damp, g);
        }
    }

    Eval2 cut = psi.eval(x);
    cut.v = 1.0 - cut.v;
    cut.dx = -cut.dx;
    cut.dy = -cut.dy;
    cut.dxx = -cut.dxx;
    cut.dxy = -cut.dxy;
    cut.dyy = -cut.dyy;

    Eval2 out = eval_jet(anchor, x);
    out += Eval2::product(cut, g);
    return out;
}

DepthSet LocalPiece::depth_at(Point2 x) const {
    if (kind == SquareKind::Far) return DepthSet{};
    if (kind == SquareKind::Relay) return anchor_depth;
    DepthSet out = anchor_depth;
    const double t = chart.t_of(x) - chart.t_center;
    DepthSet knots;
    for (int i : profile.stencil_of(t).indices) knots.indices.push_back(knot_data[std::size_t(i)]);
    std::sort(knots.indices.begin(), knots.indices.end());
    return DepthSet::union_of(out, knots);
}

LocalPiece assign_operator(const Decomposition& dec, int square, const std::vector<double>& values,
                           double m, const std::vector<AnchorSolve>& anchors, const Config& cfg) {
    const DecompSquare& s = dec.square(square);
    switch (s.kind) {
        case SquareKind::Far: {
            LocalPiece p;
            p.kind = SquareKind::Far;
            return p;
        }
        case SquareKind::Data:
            return local_extend(dec, square, values, m, anchors[std::size_t(square)], cfg);
        case SquareKind::Relay: {
            const int target = dec.relay_target(square);
            LocalPiece p;
            p.kind = SquareKind::Relay;
            Jet t = anchors[std::size_t(target)].jet;
            if (t.value == 0.0 && (t.grad.x1 != 0.0 || t.grad.x2 != 0.0)) {
                t.grad = {0.0, 0.0}; // infinite cushion can only be solver slop
                p.relay_grad_clamped = true;
            }
            p.relay_ext = extend_single_jet(t);
            p.anchor_depth = depth_set(dec.square(target).rep, dec.tree(), cfg);
            return p;
        }
    }
    throw input_error("assign_operator: unknown square kind");
}

} // namespace nnext
