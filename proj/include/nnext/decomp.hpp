#pragma once

#include "nnext/config.hpp"
#include "nnext/convex.hpp"
#include "nnext/oned.hpp"

#include <map>
#include <string>
#include <vector>

namespace nnext {

/// Leaf labels: Data squares see data in their doubled square, Relay squares
/// are small data-free squares whose doubled parent sees data (they relay a
/// nearby anchor jet), Far squares carry the zero operator.
enum class SquareKind { Data, Relay, Far };

/// Square-local change of coordinates u = R x, followed by flattening the
/// data curve: Phi(x) = (t, s - curve(t)) with (t, s) = R x. The curve is
/// anchored so that a single data point yields a constant curve.
struct Straightening {
    Rot2 rotation;
    OneDFunction curve; // in centered coordinates
    double t_center = 0.0;
    double s_center = 0.0;
    double max_slope = 0.0;     // observed |curve'| on the 2Q window
    double max_curvature = 0.0; // observed |curve''| on the 2Q window

    double t_of(Point2 x) const { return rotation.apply(x).x1; }
    double curve_at(double t) const { return s_center + curve.eval(t - t_center).value; }
    /// Straightened coordinates (t, transverse offset from the curve).
    Point2 to_local(Point2 x) const {
        const Point2 u = rotation.apply(x);
        return {u.x1, u.x2 - curve_at(u.x1)};
    }
};

struct DecompSquare {
    Square sq;
    SquareKind kind = SquareKind::Far;
    Point2 rep;             // representative point, well separated from the data
    double rep_distance = 0.0;
    int relay = -1;         // Relay squares: index of the Data square relayed to
    std::vector<int> data_2q;    // data indices in the closed doubled square
    std::vector<int> neighbors;  // touching leaves
    bool parent_diam_split = false;
    Point2 parent_witness;  // probe of the doubled parent failing the test
};

struct DecompStats {
    std::size_t data_squares = 0;
    std::size_t relay_squares = 0;
    std::size_t far_squares = 0;
    double min_side = 0.0;
    double max_side = 0.0;
    double worst_neighbor_ratio = 1.0; // max side ratio over touching pairs
    std::size_t max_neighbor_count = 0;
    double c0_achieved = 0.0; // min over Data squares of rep_distance / side
};

/// Stopping-time quadtree over the padded bounding box of the data. Depends
/// only on the point set, never on the values.
class Decomposition {
  public:
    static Decomposition build(const std::vector<Point2>& points, const Config& cfg);

    const std::vector<DecompSquare>& squares() const { return squares_; }
    const DecompSquare& square(int i) const { return squares_[std::size_t(i)]; }
    const std::vector<Point2>& points() const { return tree_.points(); }
    const KdTree2& tree() const { return tree_; }
    const Config& config() const { return cfg_; }
    Box2 domain() const { return domain_; }

    /// Leaf containing x (half-open boxes), or -1 outside the domain.
    int locate(Point2 x) const;

    /// Leaves whose closed 9/8-dilation contains x.
    std::vector<int> cover(Point2 x) const;

    /// Straightening of a Data square (throws for other kinds).
    const Straightening& straightening(int i) const;

    /// Relay target of a Relay square (throws otherwise).
    int relay_target(int i) const;

    DecompStats stats() const;
    std::string to_json() const;

  private:
    struct TreeNode {
        SquareKey key;
        int children[4] = {-1, -1, -1, -1}; // tree-node indices
        int leaf = -1;                      // index into squares_ when a leaf
    };

    int locate_node(Point2 x) const;
    void collect_touching(int node, const Box2& box, std::vector<int>& out) const;

    Config cfg_;
    KdTree2 tree_;
    Box2 domain_;
    std::vector<DecompSquare> squares_;
    std::vector<TreeNode> nodes_;
    std::map<std::pair<std::int64_t, std::int64_t>, int> roots_;
    std::vector<Straightening> straightenings_; // parallel to squares_, Data only
};

} // namespace nnext
