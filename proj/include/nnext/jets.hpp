#pragma once

#include "nnext/geometry.hpp"

#include <utility>
#include <vector>

namespace nnext {

/// Affine polynomial anchored at a base point:
///   P(y) = value + grad . (y - base).
struct Jet {
    Point2 base;
    double value = 0.0;
    Point2 grad;

    double eval(Point2 y) const { return value + dot(grad, y - base); }

    /// Same polynomial re-anchored at x (value' = P(x), gradient unchanged).
    Jet rebased(Point2 x) const { return Jet{x, eval(x), grad}; }

    bool is_zero() const { return value == 0.0 && grad.x1 == 0.0 && grad.x2 == 0.0; }

    static Jet zero(Point2 base) { return Jet{base, 0.0, {0.0, 0.0}}; }
};

double jet_evaluate(const Jet& p, Point2 y);

/// l2 norm of the coefficient vector (P(base), dP/dx1, dP/dx2).
double ring_norm(const Jet& p);

/// Least M >= 0 with P(y) + M |y - base|^2 >= 0 everywhere; +inf when no
/// finite M works (value < 0, or value = 0 with nonzero gradient).
double nonneg_cushion(const Jet& p);

/// A jet at each of finitely many distinct points.
class WhitneyField {
  public:
    WhitneyField() = default;
    /// Throws input_error on duplicate base points or a jet based elsewhere
    /// than its key.
    explicit WhitneyField(std::vector<Jet> jets);

    std::size_t size() const { return jets_.size(); }
    bool empty() const { return jets_.empty(); }
    const Jet& operator[](std::size_t i) const { return jets_[i]; }
    const std::vector<Jet>& jets() const { return jets_; }

  private:
    std::vector<Jet> jets_;
};

/// max over ordered pairs x != y and derivative orders 0,1 of
/// |d^a (P^x - P^y)(x)| / |x-y|^(2-|a|). Zero for singletons. Order-2 terms
/// of affine jets vanish identically and are omitted.
double whitney_seminorm(const WhitneyField& f);

/// whitney_seminorm plus the worst per-point nonnegativity cushion.
double wplus_norm(const WhitneyField& f);

/// Sum-of-squares compatibility energy: per-jet coefficient norms plus all
/// squared scaled pairwise differences (derivative orders 0 and 1).
double compat_energy(const WhitneyField& f);

/// Nonnegativity energy: sum |grad|^4 / value^2 with the 0/0 = 0 convention;
/// +inf when any value is negative or any zero value carries a gradient.
double cushion_energy(const WhitneyField& f);

/// True iff, after re-anchoring P at x, |P(x)| <= scale * delta^2 and
/// |grad P| <= scale * delta. Throws input_error on nonpositive delta/scale.
bool ball_membership(const Jet& p, Point2 x, double delta, double scale);

} // namespace nnext
