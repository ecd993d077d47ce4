#pragma once

#include "nnext/common.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace nnext {

struct LbfgsOptions {
    int max_iters = 200;
    double grad_tol = 1e-9;     // stop when |grad|_inf <= grad_tol * scale
    double scale = 1.0;         // problem scale for the tolerances
    double early_exit_below = -kInf; // stop as soon as f <= this
    int memory = 8;
};

struct LbfgsReport {
    double f = kInf;
    int iters = 0;
    bool converged = false;
    bool early_exit = false;
};

/// Limited-memory BFGS with Armijo backtracking. The callback returns the
/// objective (may be +inf outside the domain) and fills the gradient.
/// Deterministic for a fixed callback and start.
inline LbfgsReport lbfgs_minimize(const std::function<double(const std::vector<double>&, std::vector<double>&)>& fg,
                                  std::vector<double>& x, const LbfgsOptions& opt) {
    const std::size_t n = x.size();
    LbfgsReport rep;
    if (n == 0) {
        std::vector<double> g;
        rep.f = fg(x, g);
        rep.converged = true;
        return rep;
    }

    std::vector<double> g(n), xn(n), gn(n), dir(n);
    std::vector<std::vector<double>> s_hist, y_hist;
    std::vector<double> rho_hist;

    double f = fg(x, g);
    rep.f = f;
    if (!is_finite(f)) return rep; // caller must start inside the domain

    auto inf_norm = [&](const std::vector<double>& v) {
        double m = 0.0;
        for (double t : v) m = std::max(m, std::abs(t));
        return m;
    };

    for (int iter = 0; iter < opt.max_iters; ++iter) {
        rep.iters = iter;
        if (f <= opt.early_exit_below) {
            rep.early_exit = true;
            rep.f = f;
            return rep;
        }
        const double gnorm = inf_norm(g);
        if (gnorm <= opt.grad_tol * opt.scale) {
            rep.converged = true;
            rep.f = f;
            return rep;
        }

        // two-loop recursion
        dir = g;
        const std::size_t m = s_hist.size();
        std::vector<double> alpha(m);
        for (std::size_t h = m; h-- > 0;) {
            double sy = 0.0;
            for (std::size_t t = 0; t < n; ++t) sy += s_hist[h][t] * dir[t];
            alpha[h] = rho_hist[h] * sy;
            for (std::size_t t = 0; t < n; ++t) dir[t] -= alpha[h] * y_hist[h][t];
        }
        if (m > 0) {
            double yy = 0.0, sy = 0.0;
            const auto& sl = s_hist.back();
            const auto& yl = y_hist.back();
            for (std::size_t t = 0; t < n; ++t) {
                yy += yl[t] * yl[t];
                sy += sl[t] * yl[t];
            }
            const double gamma = sy / std::max(yy, 1e-300);
            for (std::size_t t = 0; t < n; ++t) dir[t] *= gamma;
        }
        for (std::size_t h = 0; h < m; ++h) {
            double yd = 0.0;
            for (std::size_t t = 0; t < n; ++t) yd += y_hist[h][t] * dir[t];
            const double beta = rho_hist[h] * yd;
            for (std::size_t t = 0; t < n; ++t) dir[t] += (alpha[h] - beta) * s_hist[h][t];
        }
        // descent direction is -dir
        double gd = 0.0;
        for (std::size_t t = 0; t < n; ++t) gd += g[t] * dir[t];
        if (gd <= 0.0) { // safeguard: fall back to steepest descent
            dir = g;
            gd = 0.0;
            for (std::size_t t = 0; t < n; ++t) gd += g[t] * g[t];
        }

        double step = m == 0 ? 1.0 / (1.0 + gnorm / std::max(opt.scale, 1e-300)) : 1.0;
        bool accepted = false;
        double fn = f;
        for (int bt = 0; bt < 50; ++bt) {
            for (std::size_t t = 0; t < n; ++t) xn[t] = x[t] - step * dir[t];
            fn = fg(xn, gn);
            if (is_finite(fn) && fn <= f - 1e-4 * step * gd) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            rep.converged = true; // no further progress at floating resolution
            rep.f = f;
            return rep;
        }

        std::vector<double> s(n), y(n);
        double sy = 0.0, ss = 0.0, yy = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            s[t] = xn[t] - x[t];
            y[t] = gn[t] - g[t];
            sy += s[t] * y[t];
            ss += s[t] * s[t];
            yy += y[t] * y[t];
        }
        if (sy > 1e-12 * std::sqrt(ss * yy)) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (int(s_hist.size()) > opt.memory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }
        x.swap(xn);
        g.swap(gn);
        f = fn;
        rep.f = f;
    }
    return rep;
}

} // namespace nnext
