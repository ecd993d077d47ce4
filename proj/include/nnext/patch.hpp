#pragma once

#include "nnext/extension.hpp"

#include <cstdint>
#include <memory>

namespace nnext {

struct EvalResult {
    double value = 0.0;
    double dx = 0.0, dy = 0.0;
    double dxx = 0.0, dxy = 0.0, dyy = 0.0;
    DepthSet depth;

    bool same_bits(const EvalResult& o) const;
};

/// The assembled global operator: one local piece per quadtree leaf, glued
/// by a normalized partition of box bumps supported on the 9/8-dilates.
/// Immutable after construction; queries are safe concurrently.
class Interpolant {
  public:
    /// Builds the decomposition from the points, then the pieces.
    static Interpolant build(const std::vector<Point2>& points, const std::vector<double>& values,
                             double m, const Config& cfg);

    /// Rebuild on a shared decomposition (the tree depends only on the
    /// points). `warm` may carry a previous build's per-square solver
    /// coefficients to re-seed the anchor solves.
    static Interpolant build_with(std::shared_ptr<const Decomposition> dec,
                                  const std::vector<double>& values, double m,
                                  const std::vector<AnchorSolve>* warm);

    EvalResult query(Point2 x) const;

    /// Number of leaves inspected by a query (log-depth point location plus
    /// the bounded cover).
    std::size_t cover_count(Point2 x) const { return dec_->cover(x).size(); }

    const Decomposition& decomposition() const { return *dec_; }
    std::shared_ptr<const Decomposition> decomposition_ptr() const { return dec_; }
    const std::vector<double>& values() const { return values_; }
    double bound_m() const { return m_; }
    const std::vector<AnchorSolve>& warm_store() const { return warm_; }
    const LocalPiece& piece(int square) const { return pieces_[std::size_t(square)]; }
    std::uint64_t fingerprint() const { return fingerprint_; }
    std::size_t relay_clamps() const { return relay_clamps_; }

  private:
    std::shared_ptr<const Decomposition> dec_;
    std::vector<LocalPiece> pieces_;
    std::vector<AnchorSolve> warm_;
    std::vector<double> values_;
    double m_ = 0.0;
    std::uint64_t fingerprint_ = 0;
    std::size_t relay_clamps_ = 0;
};

struct DepthAuditReport {
    int trials = 0;
    int vacuous = 0; // trials with no off-set index to perturb
    int leaks = 0;
    int first_leak_index = -1;
    std::size_t depth_size = 0; // |S(x)| of the audited query
};

/// Perturbs values at indices outside the query's depth set, rebuilds the
/// whole pipeline on the shared decomposition, and verifies the queried jet
/// is bit-identical. Both the reference and the perturbed runs rebuild from
/// the same warm store, so identical inputs take identical solver paths.
DepthAuditReport depth_audit(const Interpolant& base, Point2 x, int trials, std::uint64_t seed);

} // namespace nnext
