#pragma once

#include "nnext/common.hpp"
#include "nnext/convex.hpp"

#include <vector>

namespace nnext {

/// Strictly increasing knots with one value each.
struct OneDData {
    std::vector<double> knots;
    std::vector<double> values;
};

struct OneDEval {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Knot indices a query at t may read: all knots when there are at most
/// three; the three nearest beyond the range and on the extreme intervals;
/// the four bracketing knots otherwise.
std::vector<int> stencil(double t, const std::vector<double>& knots);

/// C^2 piecewise function: per-knot parabolas blended with a quintic weight
/// on each interval, damped one-jet tails beyond the range. The evaluation
/// at t reads exactly the stencil(t) knot values.
class OneDFunction {
  public:
    enum class Mode { Linear, Nonneg };

    OneDEval eval(double t) const;
    DepthSet stencil_of(double t) const;

    const std::vector<double>& knots() const { return knots_; }
    Mode mode() const { return mode_; }

  private:
    friend OneDFunction extend_linear(const OneDData& data);
    friend OneDFunction extend_nonneg(const OneDData& data, double m);

    struct KnotPiece {
        double f = 0.0; // value
        double m = 0.0; // slope
        double c = 0.0; // quadratic coefficient
        double at(double u) const { return f + u * (m + c * u); }
        double d1(double u) const { return m + 2.0 * c * u; }
        double d2() const { return 2.0 * c; }
    };

    std::vector<double> knots_;
    std::vector<KnotPiece> pieces_;
    Mode mode_ = Mode::Linear;
    double tail_len_ = 1.0;
};

/// Linear-in-values interpolation; reproduces affine data on the knot range.
OneDFunction extend_linear(const OneDData& data);

/// Nonnegative interpolation of nonnegative values; per-knot slopes are
/// capped at 2 sqrt(M value) so each knot parabola is a perfect square.
OneDFunction extend_nonneg(const OneDData& data, double m);

} // namespace nnext
