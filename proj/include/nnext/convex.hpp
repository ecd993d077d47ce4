#pragma once

#include "nnext/config.hpp"
#include "nnext/jets.hpp"

#include <optional>
#include <vector>

namespace nnext {

/// Sorted list of data-point indices a computed quantity is certified to
/// depend on.
struct DepthSet {
    std::vector<int> indices; // ascending, no duplicates

    std::size_t size() const { return indices.size(); }
    bool contains(int i) const;
    static DepthSet union_of(const DepthSet& a, const DepthSet& b);
};

/// Symmetric convex body of admissible jets at `center`, given that the
/// candidate function vanishes on a constraint set S:
///   |P(center)| <= value_cap, |grad P| <= grad_cap,
///   |P(y)| <= value_bound(y) for each constraint point (Taylor slab), and
///   P(center) = 0 when center itself lies in S.
struct SigmaBody {
    struct PointConstraint {
        Point2 point;
        double value_bound; // |center - point|^2
    };

    Point2 center;
    double value_cap = 1.0;
    double grad_cap = 1.0;
    bool value_pinned = false;
    std::vector<PointConstraint> constraints;

    bool contains(const Jet& p, double slack = 0.0) const;
};

SigmaBody sigma_body(Point2 x, const std::vector<Point2>& s, const Config& cfg);

/// Diameter of the body in the jet-coefficient norm, plus the jet achieving
/// the farthest support and the direction it was found in.
struct DiameterResult {
    double diameter = 0.0;
    Jet achieving;
    std::array<double, 3> direction{0.0, 0.0, 0.0};
};

DiameterResult body_diameter(const SigmaBody& body, const Config& cfg);

/// Diameter of the admissible-jet body at x cut by the data set. Because the
/// body's constraints are per point, the intersection over all subsets of
/// size <= k equals the body of the full set, so k only gates the call
/// (k >= 1). Constraint points are the nearest `body_point_cap` data points
/// within the slack cutoff; farther slabs are implied by the caps.
double local_jet_diameter(Point2 x, const KdTree2& data, int k, const Config& cfg);

/// Same, but with the achieving jet (used to orient straightenings).
DiameterResult local_jet_diameter_full(Point2 x, const KdTree2& data, const Config& cfg);

/// Decision form for the quadtree stopping test: is diameter >= threshold?
/// Uses a cheap enclosing-ball bound to refuse early and stops the direction
/// sweep as soon as the threshold is certified.
bool diameter_at_least(Point2 x, const KdTree2& data, const Config& cfg, double threshold);

/// Indices of the (at most 48 k0) data points nearest to x0, ties broken by
/// index; ascending order.
DepthSet depth_set(Point2 x0, const KdTree2& data, const Config& cfg);

} // namespace nnext
