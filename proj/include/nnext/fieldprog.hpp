#pragma once

#include "nnext/config.hpp"
#include "nnext/convex.hpp"
#include "nnext/jets.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace nnext {

/// Convex program over a Whitney field: values at constrained points are
/// pinned, everything else is free, the energy is compat_energy +
/// cushion_energy of the stacked jets, and feasibility means energy within
/// the budget c_t * M^2.
struct JetProgram {
    Point2 x0;
    std::vector<Point2> constrained_points;
    std::vector<double> constrained_values; // all >= 0
    std::vector<Point2> free_points;        // additional free points besides x0
    double budget_m = 0.0;                  // the norm bound M
    double c_t = 10.0;
    double qp_tol = 1e-9;
};

/// Whether the feasible jet set at x0 is nonempty within qp_tol.
/// Throws solver_error when the solve cannot certify either answer.
bool jet_program_feasible(const JetProgram& prog);

struct AnchorJetResult {
    Jet jet;                // jet at x0
    bool feasible = false;  // feasible set nonempty (else jet is exactly zero)
    double energy = 0.0;    // attained compat + cushion energy
};

/// Minimal-coefficient-norm jet at x0 over the closure of the feasible set;
/// the exact zero jet when the program is infeasible. Positively homogeneous
/// by construction: inputs are normalized by the data scale before solving.
AnchorJetResult anchor_jet(const JetProgram& prog);

/// Minimizer of the energy over fields interpolating `values` (all >= 0) at
/// `points`, plus the attained sqrt(energy). Optional extra free points take
/// part in the field without pinned values.
std::pair<WhitneyField, double> min_energy_field(const std::vector<Point2>& points,
                                                 const std::vector<double>& values, const Config& cfg,
                                                 const std::vector<Point2>& free_points = {});

/// Pipeline form of the anchor-jet solve. The result doubles as a
/// certificate: rerunning the solve with it as `warm` verifies the stored
/// branch against the current data with a single gradient evaluation and
/// falls back to the full phased solve when the check fails. Deterministic
/// for fixed inputs.
struct AnchorSolve {
    /// Interior: the ring-minimal anchor jet (zero free coefficients) is
    /// itself feasible. Boundary: the energy constraint is active with
    /// multiplier mu. Infeasible: the program is empty and the jet is zero.
    enum class Branch { Interior, Boundary, Infeasible };

    Jet jet;                    // anchor jet at x0 (exactly zero when infeasible)
    bool feasible = false;
    Branch branch = Branch::Interior;
    double mu = 0.0;            // multiplier of the boundary branch (scaled units)
    double gnorm = 0.0;         // achieved stationarity of the branch objective
    double slack = 0.0;         // achieved |energy - budget| (boundary branch)
    std::vector<double> coeffs; // final stacked coefficients, physical units
    double energy = 0.0;        // attained energy, physical units
};

AnchorSolve solve_anchor(const std::vector<Point2>& points, const std::vector<double>& values,
                         Point2 x0, double m, const Config& cfg,
                         const AnchorSolve* warm = nullptr,
                         const std::vector<Point2>* extra_free = nullptr);

/// Shared engine used by the pipeline so per-square solves can be
/// warm-started across rebuilds. Coefficients are stacked [v, gx, gy] per
/// point, constrained points first (in order), then x0, then free points.
class FieldSolver {
  public:
    FieldSolver(std::vector<Point2> points, std::vector<std::optional<double>> pinned_values,
                double scale_hint = 1.0);

    std::size_t count() const { return pts_.size(); }
    const std::vector<double>& coefficients() const { return z_; }
    void set_coefficients(const std::vector<double>& z);

    /// Energy (compat + cushion) and gradient at z; +inf outside the domain.
    double energy(const std::vector<double>& z, std::vector<double>* grad) const;

    /// Minimize the energy; stops early once below `early_exit_below`.
    double minimize_energy(double early_exit_below, int max_iters, double grad_tol);

    /// Minimize |jet at anchor|^2 + mu * energy (smooth and strictly convex;
    /// the scalarized form of the budgeted anchor-norm problem).
    double minimize_scalarized(std::size_t anchor, double mu, int max_iters, double grad_tol);

    /// Minimize |jet at anchor|^2 + pen * max(0, energy - budget)^2.
    double minimize_penalized(std::size_t anchor, double budget, double pen, int max_iters,
                              double grad_tol);

    /// Minimal energy with the jet at one point held fixed (all three of its
    /// coefficients).
    double min_energy_with_fixed(std::size_t point, const Jet& jet, int max_iters, double grad_tol);

    /// Pin or release the three coefficients of one point.
    void hold_point(std::size_t point, const Jet& jet);
    void release_point(std::size_t point);
    bool is_pinned(std::size_t point) const { return pinned_[point].has_value(); }

    /// Sup-norm of the free-coordinate energy gradient at the current point.
    double energy_stationarity(double* energy_out) const;
    /// Same for the scalarized objective |anchor jet|^2 + mu * energy.
    double scalarized_stationarity(std::size_t anchor, double mu, double* energy_out) const;

    Jet jet_at(std::size_t index) const;
    WhitneyField field() const;

  private:
    struct Pair {
        int i, j;
        Point2 u;   // x_j - x_i
        double id2; // 1 / |u|^2
    };

    /// L-BFGS in coordinates scaled by the quadratic part's Hessian diagonal
    /// (the pair weights span many orders of magnitude).
    double run_preconditioned(const std::function<double(const std::vector<double>&, std::vector<double>&)>& fg,
                              int max_iters, double grad_tol, double early_exit_below);

    std::vector<Point2> pts_;
    std::vector<std::optional<double>> pinned_;
    std::vector<bool> fixed_; // per scalar coefficient
    std::vector<double> z_;
    std::vector<Pair> pairs_;
    std::vector<double> precond_; // sqrt of the quadratic Hessian diagonal
    double scale_ = 1.0;
};

} // namespace nnext
