#pragma once

#include "nnext/common.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace nnext {

struct Point2 {
    double x1 = 0.0;
    double x2 = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x1, s * a.x2}; }
    friend bool operator==(Point2 a, Point2 b) { return a.x1 == b.x1 && a.x2 == b.x2; }
};

inline double dot(Point2 a, Point2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double norm2(Point2 a) { return std::sqrt(dot(a, a)); }
inline double dist2(Point2 a, Point2 b) { return norm2(a - b); }
inline bool finite(Point2 a) { return is_finite(a.x1) && is_finite(a.x2); }

/// 2x2 rotation, stored row major. Maps x to local coordinates u = R x.
struct Rot2 {
    double r11 = 1.0, r12 = 0.0;
    double r21 = 0.0, r22 = 1.0;

    Point2 apply(Point2 p) const { return {r11 * p.x1 + r12 * p.x2, r21 * p.x1 + r22 * p.x2}; }
    Point2 apply_inverse(Point2 u) const { return {r11 * u.x1 + r21 * u.x2, r12 * u.x1 + r22 * u.x2}; }

    /// Rotation whose second row is the unit vector along `axis2`.
    static Rot2 with_second_axis(Point2 axis2) {
        const double n = norm2(axis2);
        if (n == 0.0) return Rot2{};
        const double a = axis2.x1 / n, b = axis2.x2 / n;
        // first row = (b, -a) so the matrix is a proper rotation
        return Rot2{b, -a, a, b};
    }
};

/// Axis-aligned closed box.
struct Box2 {
    double lo1 = 0.0, lo2 = 0.0, hi1 = 0.0, hi2 = 0.0;

    bool contains(Point2 p) const { return p.x1 >= lo1 && p.x1 <= hi1 && p.x2 >= lo2 && p.x2 <= hi2; }
    double width() const { return hi1 - lo1; }
    double height() const { return hi2 - lo2; }
};

/// Dyadic square [2^k i, 2^k (i+1)) x [2^k j, 2^k (j+1)) scaled by unit_scale.
struct SquareKey {
    std::int64_t i = 0;
    std::int64_t j = 0;
    int k = 0;

    friend bool operator==(const SquareKey&, const SquareKey&) = default;
    friend bool operator<(const SquareKey& a, const SquareKey& b) {
        if (a.k != b.k) return a.k < b.k;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    }

    SquareKey parent() const {
        auto half = [](std::int64_t v) { return v >= 0 ? v / 2 : (v - 1) / 2; };
        return {half(i), half(j), k + 1};
    }
    std::array<SquareKey, 4> children() const {
        return {SquareKey{2 * i, 2 * j, k - 1}, SquareKey{2 * i + 1, 2 * j, k - 1},
                SquareKey{2 * i, 2 * j + 1, k - 1}, SquareKey{2 * i + 1, 2 * j + 1, k - 1}};
    }
};

struct Square {
    SquareKey key;
    double unit_scale = 1.0;

    double side() const { return std::ldexp(unit_scale, key.k); }
    Point2 corner() const { return {double(key.i) * side(), double(key.j) * side()}; }
    Point2 center() const {
        const double d = side();
        return {(double(key.i) + 0.5) * d, (double(key.j) + 0.5) * d};
    }
    /// Closed box of the lambda-dilate (same center, side lambda * side()).
    Box2 dilated(double lambda) const {
        const Point2 c = center();
        const double h = 0.5 * lambda * side();
        return {c.x1 - h, c.x2 - h, c.x1 + h, c.x2 + h};
    }
    Box2 box() const { return dilated(1.0); }
    bool contains(Point2 p) const {
        const Point2 c = corner();
        const double d = side();
        return p.x1 >= c.x1 && p.x1 < c.x1 + d && p.x2 >= c.x2 && p.x2 < c.x2 + d;
    }
    /// Closed-box touch test (shared edges and corners count).
    bool touches(const Square& o) const {
        const Box2 a = box(), b = o.box();
        return a.lo1 <= b.hi1 && b.lo1 <= a.hi1 && a.lo2 <= b.hi2 && b.lo2 <= a.hi2;
    }
};

/// kd-tree over a fixed point list; supports k-nearest (ties by index) and
/// closed-box range queries. Deterministic for a fixed input order.
class KdTree2 {
  public:
    KdTree2() = default;
    explicit KdTree2(std::vector<Point2> pts);

    std::size_t size() const { return pts_.size(); }
    const std::vector<Point2>& points() const { return pts_; }

    /// Indices of the k nearest points to q, sorted by (distance, index).
    std::vector<int> nearest(Point2 q, std::size_t k) const;

    /// Distance from q to the point set (+inf when empty).
    double distance(Point2 q) const;

    /// Indices (ascending) of points inside the closed box.
    std::vector<int> range(const Box2& box) const;

  private:
    struct Node {
        int left = -1, right = -1;
        int axis = 0;
        int point = -1; // index into pts_
    };
    int build(std::vector<int>& idx, int lo, int hi, int depth);

    std::vector<Point2> pts_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace nnext
