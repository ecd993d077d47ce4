#pragma once

#include "nnext/decomp.hpp"
#include "nnext/fieldprog.hpp"

#include <vector>

namespace nnext {

/// Scalar value with first and second derivatives in the plane.
struct Eval2 {
    double v = 0.0;
    double dx = 0.0, dy = 0.0;
    double dxx = 0.0, dxy = 0.0, dyy = 0.0;

    Eval2& operator+=(const Eval2& o) {
        v += o.v;
        dx += o.dx;
        dy += o.dy;
        dxx += o.dxx;
        dxy += o.dxy;
        dyy += o.dyy;
        return *this;
    }
    friend Eval2 operator*(double s, Eval2 e) {
        e.v *= s;
        e.dx *= s;
        e.dy *= s;
        e.dxx *= s;
        e.dxy *= s;
        e.dyy *= s;
        return e;
    }
    /// product rule for two evaluated factors
    static Eval2 product(const Eval2& a, const Eval2& b) {
        Eval2 out;
        out.v = a.v * b.v;
        out.dx = a.dx * b.v + a.v * b.dx;
        out.dy = a.dy * b.v + a.v * b.dy;
        out.dxx = a.dxx * b.v + 2.0 * a.dx * b.dx + a.v * b.dxx;
        out.dyy = a.dyy * b.v + 2.0 * a.dy * b.dy + a.v * b.dyy;
        out.dxy = a.dxy * b.v + a.dx * b.dy + a.dy * b.dx + a.v * b.dxy;
        return out;
    }
};

Eval2 eval_jet(const Jet& j, Point2 x);

/// C^2 radial cutoff: 1 inside inner_radius, 0 outside outer_radius,
/// quintic in between. Scaled derivative bounds follow from the profile.
struct CutoffSpec {
    Point2 center;
    double inner_radius = 0.5;
    double outer_radius = 1.0;

    Eval2 eval(Point2 x) const;
};

/// Nonnegative extension of a single jet: chi(x) (P(x) + cushion |x-base|^2)
/// with a radius-1 cutoff; the jet at the base is exactly P.
struct JetExtension {
    Jet jet;
    double cushion = 0.0;
    CutoffSpec chi;

    Eval2 eval(Point2 x) const;
};

/// Throws input_error when the jet has no finite cushion.
JetExtension extend_single_jet(const Jet& p);

/// Nonnegative extension of a whole field: disjoint plateau bumps around
/// each key (radius half the nearest-key distance, capped at 1), each
/// carrying the cushioned jet; jets at the keys are reproduced exactly.
class FieldExtension {
  public:
    explicit FieldExtension(const WhitneyField& field);
    Eval2 eval(Point2 x) const;

  private:
    std::vector<JetExtension> pieces_;
};

/// 1 iff the anchor jet is not exactly the zero polynomial.
int delta_flag(const Jet& t);

/// Per-square local operator.
///  Data:  anchor jet + (1-psi) * (1-d extension of the residuals, read off
///         along the straightened first coordinate, vertically constant with
///         a far transverse damper).
///  Relay: single-jet extension of the relayed anchor.
///  Far:   zero.
struct LocalPiece {
    SquareKind kind = SquareKind::Far;

    // Data payload
    Jet anchor;
    bool anchored = false;
    CutoffSpec psi;
    Straightening chart; // owned copy
    OneDFunction profile;
    std::vector<int> knot_data; // data index per knot, in knot order
    DepthSet anchor_depth;      // data indices the anchor jet reads
    double side = 0.0;

    // Relay payload
    JetExtension relay_ext;
    bool relay_grad_clamped = false;

    Eval2 eval(Point2 x) const;

    /// Data indices the evaluation at x reads.
    DepthSet depth_at(Point2 x) const;
};

/// Build the Data-square operator (lemma-style local extension).
LocalPiece local_extend(const Decomposition& dec, int square, const std::vector<double>& values,
                        double m, const AnchorSolve& anchor, const Config& cfg);

/// Dispatch on the square kind. `anchors` maps Data squares to their solves;
/// a Relay square reuses its target's anchor.
LocalPiece assign_operator(const Decomposition& dec, int square, const std::vector<double>& values,
                           double m, const std::vector<AnchorSolve>& anchors, const Config& cfg);

} // namespace nnext
