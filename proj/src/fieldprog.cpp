#include "nnext/fieldprog.hpp"

#include "nnext/lbfgs.hpp"

#include <algorithm>
#include <cmath>

namespace nnext {

FieldSolver::FieldSolver(std::vector<Point2> points, std::vector<std::optional<double>> pinned_values,
                         double scale_hint)
    : pts_(std::move(points)), pinned_(std::move(pinned_values)) {
    const std::size_t n = pts_.size();
    if (pinned_.size() != n) throw input_error("field solver: size mismatch");
    z_.assign(3 * n, 0.0);
    fixed_.assign(3 * n, false);

    double vmax = 0.0;
    for (const auto& p : pinned_)
        if (p) vmax = std::max(vmax, std::abs(*p));
    scale_ = std::max({scale_hint, vmax, 1e-12});

    double pos_mean = 0.0;
    int pos_count = 0;
    for (const auto& p : pinned_)
        if (p && *p > 0.0) {
            pos_mean += *p;
            ++pos_count;
        }
    pos_mean = pos_count > 0 ? pos_mean / pos_count : 0.5 * scale_;

    for (std::size_t i = 0; i < n; ++i) {
        if (pinned_[i]) {
            if (*pinned_[i] < 0.0) throw input_error("field solver: negative pinned value");
            z_[3 * i] = *pinned_[i];
            fixed_[3 * i] = true;
            if (*pinned_[i] == 0.0) {
                // zero value forces zero gradient (infinite cushion otherwise)
                fixed_[3 * i + 1] = fixed_[3 * i + 2] = true;
            }
        } else {
            z_[3 * i] = std::max(pos_mean, 1e-6 * scale_);
        }
    }

    pairs_.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point2 u = pts_[j] - pts_[i];
            const double d2 = dot(u, u);
            if (d2 == 0.0) throw input_error("field solver: duplicate points");
            pairs_.push_back({int(i), int(j), u, 1.0 / d2});
        }
    }

    precond_.assign(3 * n, 2.0);
    for (const Pair& p : pairs_) {
        const double id2 = p.id2, id4 = id2 * id2;
        precond_[3 * std::size_t(p.i)] += 4.0 * id4;
        precond_[3 * std::size_t(p.j)] += 4.0 * id4;
        precond_[3 * std::size_t(p.i) + 1] += 2.0 * p.u.x1 * p.u.x1 * id4 + 4.0 * id2;
        precond_[3 * std::size_t(p.i) + 2] += 2.0 * p.u.x2 * p.u.x2 * id4 + 4.0 * id2;
        precond_[3 * std::size_t(p.j) + 1] += 2.0 * p.u.x1 * p.u.x1 * id4 + 4.0 * id2;
        precond_[3 * std::size_t(p.j) + 2] += 2.0 * p.u.x2 * p.u.x2 * id4 + 4.0 * id2;
    }
    for (double& d : precond_) d = std::sqrt(d);
}

double FieldSolver::run_preconditioned(
    const std::function<double(const std::vector<double>&, std::vector<double>&)>& fg, int max_iters,
    double grad_tol, double early_exit_below) {
    const std::size_t n = z_.size();
    std::vector<double> zs(n), zp(n), gp(n);
    for (std::size_t t = 0; t < n; ++t) zs[t] = z_[t] * precond_[t];
    auto wrapped = [&](const std::vector<double>& zw, std::vector<double>& gw) {
        for (std::size_t t = 0; t < n; ++t) zp[t] = zw[t] / precond_[t];
        gp.assign(n, 0.0);
        const double f = fg(zp, gp);
        gw.resize(n);
        for (std::size_t t = 0; t < n; ++t) gw[t] = gp[t] / precond_[t];
        return f;
    };
    LbfgsOptions opt;
    opt.max_iters = max_iters;
    opt.grad_tol = grad_tol;
    opt.scale = std::max(scale_, scale_ * scale_);
    opt.early_exit_below = early_exit_below;
    const LbfgsReport rep = lbfgs_minimize(wrapped, zs, opt);
    for (std::size_t t = 0; t < n; ++t) z_[t] = zs[t] / precond_[t];
    return rep.f;
}

void FieldSolver::set_coefficients(const std::vector<double>& z) {
    if (z.size() != z_.size()) throw input_error("field solver: coefficient size mismatch");
    z_ = z;
    // re-impose pins; a warm start never overrides problem data
    for (std::size_t i = 0; i < pts_.size(); ++i) {
        if (pinned_[i]) {
            z_[3 * i] = *pinned_[i];
            if (*pinned_[i] == 0.0) z_[3 * i + 1] = z_[3 * i + 2] = 0.0;
        }
    }
}

double FieldSolver::energy(const std::vector<double>& z, std::vector<double>* grad) const {
    const std::size_t n = pts_.size();
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);
    double e = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const double v = z[3 * i], gx = z[3 * i + 1], gy = z[3 * i + 2];
        const double g2 = gx * gx + gy * gy;
        e += v * v + g2;
        if (grad) {
            (*grad)[3 * i] += 2.0 * v;
            (*grad)[3 * i + 1] += 2.0 * gx;
            (*grad)[3 * i + 2] += 2.0 * gy;
        }
        // cushion term |g|^4 / v^2, with the 0/0 = 0 convention
        if (v < 0.0) return kInf;
        if (v == 0.0) {
            if (g2 != 0.0) return kInf;
            continue;
        }
        const double iv = 1.0 / v;
        const double q = g2 * iv;
        e += q * q;
        if (grad) {
            (*grad)[3 * i] -= 2.0 * q * q * iv;
            (*grad)[3 * i + 1] += 4.0 * gx * q * iv;
            (*grad)[3 * i + 2] += 4.0 * gy * q * iv;
        }
    }

    for (const Pair& p : pairs_) {
        const int a = 3 * p.i, b = 3 * p.j;
        const double va = z[a], gax = z[a + 1], gay = z[a + 2];
        const double vb = z[b], gbx = z[b + 1], gby = z[b + 2];
        const double id2 = p.id2;
        // value residuals of the two ordered pairs
        const double r1 = (va - vb + gbx * p.u.x1 + gby * p.u.x2) * id2;
        const double r2 = (vb - va - gax * p.u.x1 - gay * p.u.x2) * id2;
        const double wx = gax - gbx, wy = gay - gby;
        e += r1 * r1 + r2 * r2 + 2.0 * id2 * (wx * wx + wy * wy);
        if (grad) {
            const double c1 = 2.0 * r1 * id2, c2 = 2.0 * r2 * id2;
            (*grad)[a] += c1 - c2;
            (*grad)[b] += c2 - c1;
            (*grad)[b + 1] += c1 * p.u.x1;
            (*grad)[b + 2] += c1 * p.u.x2;
            (*grad)[a + 1] -= c2 * p.u.x1;
            (*grad)[a + 2] -= c2 * p.u.x2;
            const double cw = 4.0 * id2;
            (*grad)[a + 1] += cw * wx;
            (*grad)[a + 2] += cw * wy;
            (*grad)[b + 1] -= cw * wx;
            (*grad)[b + 2] -= cw * wy;
        }
    }

    if (grad) {
        for (std::size_t t = 0; t < fixed_.size(); ++t)
            if (fixed_[t]) (*grad)[t] = 0.0;
    }
    return e;
}

double FieldSolver::minimize_energy(double early_exit_below, int max_iters, double grad_tol) {
    auto fg = [this](const std::vector<double>& z, std::vector<double>& g) {
        g.assign(z.size(), 0.0);
        return energy(z, &g);
    };
    return run_preconditioned(fg, max_iters, grad_tol, early_exit_below);
}

double FieldSolver::minimize_scalarized(std::size_t anchor, double mu, int max_iters,
                                        double grad_tol) {
    const std::size_t a = 3 * anchor;
    auto fg = [&](const std::vector<double>& z, std::vector<double>& g) {
        g.assign(z.size(), 0.0);
        const double e = energy(z, &g);
        if (!is_finite(e)) return kInf;
        for (double& t : g) t *= mu;
        const double f = z[a] * z[a] + z[a + 1] * z[a + 1] + z[a + 2] * z[a + 2] + mu * e;
        if (!fixed_[a]) g[a] += 2.0 * z[a];
        if (!fixed_[a + 1]) g[a + 1] += 2.0 * z[a + 1];
        if (!fixed_[a + 2]) g[a + 2] += 2.0 * z[a + 2];
        for (std::size_t t = 0; t < fixed_.size(); ++t)
            if (fixed_[t]) g[t] = 0.0;
        return f;
    };
    return run_preconditioned(fg, max_iters, grad_tol, -kInf);
}

double FieldSolver::minimize_penalized(std::size_t anchor, double budget, double pen, int max_iters,
                                       double grad_tol) {
    const std::size_t a = 3 * anchor;
    auto fg = [&](const std::vector<double>& z, std::vector<double>& g) {
        g.assign(z.size(), 0.0);
        const double e = energy(z, &g);
        if (!is_finite(e)) return kInf;
        const double viol = std::max(0.0, e - budget);
        const double f = z[a] * z[a] + z[a + 1] * z[a + 1] + z[a + 2] * z[a + 2] + pen * viol * viol;
        const double pf = 2.0 * pen * viol;
        for (double& t : g) t *= pf;
        if (!fixed_[a]) g[a] += 2.0 * z[a];
        if (!fixed_[a + 1]) g[a + 1] += 2.0 * z[a + 1];
        if (!fixed_[a + 2]) g[a + 2] += 2.0 * z[a + 2];
        for (std::size_t t = 0; t < fixed_.size(); ++t)
            if (fixed_[t]) g[t] = 0.0;
        return f;
    };
    return run_preconditioned(fg, max_iters, grad_tol, -kInf);
}

void FieldSolver::hold_point(std::size_t point, const Jet& jet) {
    const std::size_t a = 3 * point;
    z_[a] = jet.value;
    z_[a + 1] = jet.grad.x1;
    z_[a + 2] = jet.grad.x2;
    fixed_[a] = fixed_[a + 1] = fixed_[a + 2] = true;
}

void FieldSolver::release_point(std::size_t point) {
    const std::size_t a = 3 * point;
    fixed_[a] = false;
    fixed_[a + 1] = fixed_[a + 2] = false;
    if (pinned_[point]) {
        fixed_[a] = true;
        z_[a] = *pinned_[point];
        if (*pinned_[point] == 0.0) {
            fixed_[a + 1] = fixed_[a + 2] = true;
            z_[a + 1] = z_[a + 2] = 0.0;
        }
    }
}

double FieldSolver::energy_stationarity(double* energy_out) const {
    std::vector<double> g(z_.size());
    const double e = energy(z_, &g);
    if (energy_out) *energy_out = e;
    if (!is_finite(e)) return kInf;
    double worst = 0.0;
    for (double t : g) worst = std::max(worst, std::abs(t));
    return worst;
}

double FieldSolver::scalarized_stationarity(std::size_t anchor, double mu, double* energy_out) const {
    std::vector<double> g(z_.size());
    const double e = energy(z_, &g);
    if (energy_out) *energy_out = e;
    if (!is_finite(e)) return kInf;
    const std::size_t a = 3 * anchor;
    for (double& t : g) t *= mu;
    if (!fixed_[a]) g[a] += 2.0 * z_[a];
    if (!fixed_[a + 1]) g[a + 1] += 2.0 * z_[a + 1];
    if (!fixed_[a + 2]) g[a + 2] += 2.0 * z_[a + 2];
    for (std::size_t t = 0; t < fixed_.size(); ++t)
        if (fixed_[t]) g[t] = 0.0;
    double worst = 0.0;
    for (double t : g) worst = std::max(worst, std::abs(t));
    return worst;
}

double FieldSolver::min_energy_with_fixed(std::size_t point, const Jet& jet, int max_iters,
                                          double grad_tol) {
    const std::size_t a = 3 * point;
    const std::array<bool, 3> saved{fixed_[a], fixed_[a + 1], fixed_[a + 2]};
    z_[a] = jet.value;
    z_[a + 1] = jet.grad.x1;
    z_[a + 2] = jet.grad.x2;
    fixed_[a] = fixed_[a + 1] = fixed_[a + 2] = true;
    const double e = minimize_energy(-kInf, max_iters, grad_tol);
    fixed_[a] = saved[0];
    fixed_[a + 1] = saved[1];
    fixed_[a + 2] = saved[2];
    return e;
}

Jet FieldSolver::jet_at(std::size_t index) const {
    return Jet{pts_[index], z_[3 * index], {z_[3 * index + 1], z_[3 * index + 2]}};
}

WhitneyField FieldSolver::field() const {
    std::vector<Jet> jets;
    jets.reserve(pts_.size());
    for (std::size_t i = 0; i < pts_.size(); ++i) jets.push_back(jet_at(i));
    return WhitneyField(std::move(jets));
}

namespace {

struct ScaledProgram {
    std::vector<Point2> pts;
    std::vector<std::optional<double>> pins;
    std::size_t anchor;
    double scale;
    double budget; // scaled energy budget
    double qp_tol;
};

ScaledProgram assemble(const JetProgram& prog) {
    ScaledProgram s;
    double vmax = 0.0;
    for (double v : prog.constrained_values) {
        if (v < 0.0) throw input_error("jet program: negative constrained value");
        vmax = std::max(vmax, v);
    }
    if (prog.budget_m < 0.0) throw input_error("jet program: negative M");
    s.scale = std::max({vmax, prog.budget_m, 1e-300});
    s.qp_tol = prog.qp_tol;

    bool x0_constrained = false;
    for (std::size_t i = 0; i < prog.constrained_points.size(); ++i) {
        s.pts.push_back(prog.constrained_points[i]);
        s.pins.push_back(prog.constrained_values[i] / s.scale);
        if (prog.constrained_points[i] == prog.x0) x0_constrained = true;
    }
    if (x0_constrained) {
        for (std::size_t i = 0; i < s.pts.size(); ++i)
            if (s.pts[i] == prog.x0) s.anchor = i;
    } else {
        s.pts.push_back(prog.x0);
        s.pins.emplace_back(std::nullopt);
        s.anchor = s.pts.size() - 1;
    }
    for (const Point2& p : prog.free_points) {
        s.pts.push_back(p);
        s.pins.emplace_back(std::nullopt);
    }
    const double m = prog.budget_m / s.scale;
    s.budget = prog.c_t * m * m;
    return s;
}

// iteration caps grow with problem size but stay bounded
int iter_cap(std::size_t npts) { return int(160 + 2 * npts); }

} // namespace

bool jet_program_feasible(const JetProgram& prog) {
    const ScaledProgram s = assemble(prog);
    FieldSolver solver(s.pts, s.pins, 1.0);
    const double tol = s.qp_tol * std::max(1.0, s.budget);
    const double got = solver.minimize_energy(s.budget - tol, iter_cap(s.pts.size()), 1e-8);
    if (got <= s.budget + tol) return true;
    // certify infeasibility: the minimum must clearly exceed the budget
    std::vector<double> g(3 * s.pts.size());
    solver.energy(solver.coefficients(), &g);
    double gn = 0.0;
    for (double t : g) gn = std::max(gn, std::abs(t));
    if (got > s.budget * (1.0 + 1e-6) + tol) return false;
    if (gn <= 1e-6) return false; // converged, marginally above budget
    throw solver_error("jet program: cannot certify feasibility at the iteration cap");
}

AnchorJetResult anchor_jet(const JetProgram& prog) {
    Config cfg;
    cfg.C_T = prog.c_t;
    cfg.qp_tol = prog.qp_tol;
    const AnchorSolve sol = solve_anchor(prog.constrained_points, prog.constrained_values, prog.x0,
                                         prog.budget_m, cfg, nullptr, &prog.free_points);
    AnchorJetResult out;
    out.jet = sol.jet;
    out.feasible = sol.feasible;
    out.energy = sol.energy;
    return out;
}

AnchorSolve solve_anchor(const std::vector<Point2>& points, const std::vector<double>& values,
                         Point2 x0, double m, const Config& cfg, const AnchorSolve* warm,
                         const std::vector<Point2>* extra_free) {
    if (points.size() != values.size()) throw input_error("solve_anchor: size mismatch");
    if (m < 0.0) throw input_error("solve_anchor: negative M");
    AnchorSolve out;
    out.jet = Jet::zero(x0);

    double scale = 1e-300;
    bool all_zero = true;
    for (double v : values) {
        if (v < 0.0) throw input_error("solve_anchor: negative value");
        if (v != 0.0) all_zero = false;
        scale = std::max(scale, v);
    }
    scale = std::max(scale, m);

    std::vector<Point2> pts = points;
    std::vector<std::optional<double>> pins;
    pins.reserve(points.size() + 2);
    for (double v : values) pins.emplace_back(v / scale);
    std::size_t anchor = pts.size();
    bool anchor_pinned = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i] == x0) {
            anchor = i;
            anchor_pinned = true;
        }
    }
    if (!anchor_pinned) {
        pts.push_back(x0);
        pins.emplace_back(std::nullopt);
    }
    if (extra_free)
        for (const Point2& p : *extra_free) {
            pts.push_back(p);
            pins.emplace_back(std::nullopt);
        }
    const std::size_t nz = 3 * pts.size();

    if (all_zero) {
        out.feasible = true;
        out.branch = AnchorSolve::Branch::Interior;
        out.coeffs.assign(nz, 0.0);
        return out; // the zero field is feasible and norm-minimal
    }

    const double mm = m / scale;
    const double budget = cfg.C_T * mm * mm;
    const double tol = cfg.qp_tol * std::max(1.0, budget);
    const int cap = iter_cap(pts.size());
    const double gt = 1e-9;
    // the ring-minimal anchor jet: pinned value (or zero) with zero slope
    const Jet held{x0, anchor_pinned ? values[anchor] / scale : 0.0, {0.0, 0.0}};

    FieldSolver solver(pts, pins, 1.0);

    auto finish = [&](AnchorSolve::Branch branch, double mu, double gnorm, double slack) {
        out.branch = branch;
        out.mu = mu;
        out.gnorm = gnorm;
        out.slack = slack;
        out.feasible = branch != AnchorSolve::Branch::Infeasible;
        out.coeffs = solver.coefficients();
        for (double& t : out.coeffs) t *= scale;
        out.energy = solver.energy(solver.coefficients(), nullptr) * scale * scale;
        if (!out.feasible) return;
        Jet j = solver.jet_at(anchor);
        if (ring_norm(j) <= 1e-7) return; // solver noise around the zero branch
        j.value *= scale;
        j.grad = scale * j.grad;
        out.jet = j;
    };

    // certificate verification against the current data: a single
    // evaluation accepts an unchanged square's previous solve
    if (warm && warm->coeffs.size() == nz) {
        std::vector<double> w = warm->coeffs;
        for (double& t : w) t /= scale;
        solver.set_coefficients(w);
        const double gslack = 1e-6 * std::max(1.0, budget);
        switch (warm->branch) {
            case AnchorSolve::Branch::Interior: {
                // inequality certificate: the held anchor jet is admissible
                solver.hold_point(anchor, held);
                const double e = solver.energy(solver.coefficients(), nullptr);
                if (is_finite(e) && e <= budget + tol) {
                    finish(AnchorSolve::Branch::Interior, 0.0, 0.0, 0.0);
                    return out;
                }
                solver.release_point(anchor);
                break;
            }
            case AnchorSolve::Branch::Boundary: {
                double e = 0.0;
                const double gn = solver.scalarized_stationarity(anchor, warm->mu, &e);
                const double sl = std::abs(e - budget);
                if (gn <= std::max(gslack, warm->gnorm * (1.0 + 1e-9)) &&
                    sl <= std::max(1e-4 * std::max(1.0, budget), warm->slack * (1.0 + 1e-9))) {
                    finish(AnchorSolve::Branch::Boundary, warm->mu, gn, sl);
                    return out;
                }
                break;
            }
            case AnchorSolve::Branch::Infeasible: {
                double e = 0.0;
                const double gn = solver.energy_stationarity(&e);
                if (e > budget + tol && gn <= std::max(gslack, warm->gnorm * (1.0 + 1e-9))) {
                    finish(AnchorSolve::Branch::Infeasible, 0.0, gn, 0.0);
                    return out;
                }
                break;
            }
        }
    }

    // interior branch: the ring-minimal anchor jet may already be admissible
    solver.hold_point(anchor, held);
    const double interior_e = solver.minimize_energy(budget - tol, cap, 1e-8);
    if (interior_e <= budget + tol) {
        finish(AnchorSolve::Branch::Interior, 0.0, 0.0, 0.0);
        return out;
    }
    solver.release_point(anchor);

    // global feasibility
    const double base = solver.minimize_energy(budget - tol, cap, 1e-8);
    if (base > budget + tol) {
        double e = 0.0;
        const double gn = solver.energy_stationarity(&e);
        finish(AnchorSolve::Branch::Infeasible, 0.0, gn, 0.0);
        return out;
    }

    // boundary branch: a penalty warmup provides the point and multiplier
    // guess; then root-find the multiplier so the energy meets the budget
    // (phi(mu) = energy(z(mu)) - budget is decreasing in mu)
    const double bscale = std::max(budget, 1e-30);
    solver.minimize_penalized(anchor, budget, 1e4 / bscale, cap / 2, 1e-7);
    const double e_pen = solver.energy(solver.coefficients(), nullptr);
    double mu = 2.0 * (1e4 / bscale) * std::max(0.0, e_pen - budget);
    if (mu <= 0.0 || !is_finite(mu)) mu = 1.0 / bscale;

    const double phi_tol = 1e-8 * std::max(1.0, budget);
    // phi(mu) = (minimal energy given the anchor jet of the scalarized
    // solve) - budget; the held re-minimization keeps the auxiliary
    // coordinates meaningful even when mu is tiny
    auto phi_at = [&](double m_, int iters, double tol_) {
        solver.minimize_scalarized(anchor, m_, iters, tol_);
        solver.hold_point(anchor, solver.jet_at(anchor));
        const double e = solver.minimize_energy(-kInf, iters, tol_);
        solver.release_point(anchor);
        return e - budget;
    };

    double lo = mu, hi = mu; // phi(lo) >= 0 >= phi(hi)
    double phi_mu = phi_at(mu, cap / 4, 1e-6);
    double phi_lo = phi_mu, phi_hi = phi_mu;
    if (phi_mu > 0.0) {
        for (int w = 0; w < 14 && phi_hi > 0.0; ++w) {
            lo = hi;
            phi_lo = phi_hi;
            hi *= 7.389056098930650; // e^2
            phi_hi = phi_at(hi, cap / 4, 1e-6);
        }
    } else {
        for (int w = 0; w < 14 && phi_lo < 0.0; ++w) {
            hi = lo;
            phi_hi = phi_lo;
            lo /= 7.389056098930650;
            phi_lo = phi_at(lo, cap / 4, 1e-6);
        }
    }
    double best_mu = phi_mu >= 0.0 ? lo : hi;
    if (phi_lo < 0.0) {
        // feasible even with a vanishing multiplier: the earlier interior
        // test plateaued; retry it from the current, much warmer state
        solver.hold_point(anchor, held);
        const double e0 = solver.minimize_energy(budget - tol, cap, 1e-8);
        if (e0 <= budget + tol) {
            finish(AnchorSolve::Branch::Interior, 0.0, 0.0, 0.0);
            return out;
        }
        solver.release_point(anchor);
    }
    if (phi_lo >= 0.0 && phi_hi <= 0.0) {
        // Illinois-damped false position in log(mu); clamped toward the
        // middle so a flat side cannot stall the bracket
        double wl = 1.0, wh = 1.0;
        for (int it = 0; it < 12; ++it) {
            const double la = std::log(lo), lb = std::log(hi);
            double t = 0.5;
            const double pl = phi_lo * wl, ph = phi_hi * wh;
            if (pl - ph > 1e-300) t = std::clamp(pl / (pl - ph), 0.12, 0.88);
            const double mid = std::exp(la + t * (lb - la));
            const bool last = it >= 10;
            const double phi_mid = phi_at(mid, last ? cap : cap / 4, last ? gt : 1e-7);
            best_mu = mid;
            if (std::abs(phi_mid) <= phi_tol) break;
            if (phi_mid > 0.0) {
                lo = mid;
                phi_lo = phi_mid;
                wl = 1.0;
                wh *= 0.5;
            } else {
                hi = mid;
                phi_hi = phi_mid;
                wh = 1.0;
                wl *= 0.5;
            }
        }
    }
    // final tight solve at the selected multiplier, auxiliaries re-pinned
    solver.minimize_scalarized(anchor, best_mu, cap, gt);
    solver.hold_point(anchor, solver.jet_at(anchor));
    solver.minimize_energy(-kInf, cap, gt);
    solver.release_point(anchor);
    {
        double e = 0.0;
        const double gn = solver.scalarized_stationarity(anchor, best_mu, &e);
        finish(AnchorSolve::Branch::Boundary, best_mu, gn, std::abs(e - budget));
    }
    return out;
}

std::pair<WhitneyField, double> min_energy_field(const std::vector<Point2>& points,
                                                 const std::vector<double>& values, const Config& cfg,
                                                 const std::vector<Point2>& free_points) {
    if (points.size() != values.size()) throw input_error("min_energy_field: size mismatch");
    double scale = 1e-300;
    for (double v : values) {
        if (v < 0.0) throw input_error("min_energy_field: negative value");
        scale = std::max(scale, v);
    }
    std::vector<Point2> pts = points;
    std::vector<std::optional<double>> pins;
    pins.reserve(points.size() + free_points.size());
    for (double v : values) pins.emplace_back(v / scale);
    for (const Point2& p : free_points) {
        pts.push_back(p);
        pins.emplace_back(std::nullopt);
    }
    FieldSolver solver(pts, pins, 1.0);
    const double e = solver.minimize_energy(-kInf, iter_cap(pts.size()), cfg.qp_tol * 1e3);
    if (!is_finite(e)) throw solver_error("min_energy_field: did not converge");

    std::vector<Jet> jets;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Jet j = solver.jet_at(i);
        j.value *= scale;
        j.grad = scale * j.grad;
        jets.push_back(j);
    }
    return {WhitneyField(std::move(jets)), scale * std::sqrt(std::max(0.0, e))};
}

} // namespace nnext
