#include "nnext/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace nnext {
namespace {

constexpr double kTolFactor = 1e-13;

struct Sub {
    // row indices into a working set, values packed per dimension
    std::vector<LpRow> rows;
    std::array<double, 3> c{};
    int dim = 0;
    double box = 0.0;
};

bool solve(Sub& p, std::array<double, 3>& x);

// Eliminate variable `ax` of `p` using equality a.x = b, then solve the
// (dim-1)-subproblem and back-substitute.
bool solve_on_hyperplane(const Sub& p, const LpRow& eq, int ax, std::array<double, 3>& x) {
    const double piv = eq.a[ax];
    Sub q;
    q.dim = p.dim - 1;
    q.box = p.box;

    // map remaining variable slots: keep order, skip ax
    std::array<int, 3> vars{};
    int nv = 0;
    for (int t = 0; t < p.dim; ++t)
        if (t != ax) vars[nv++] = t;

    auto reduce_row = [&](const LpRow& r) {
        LpRow out;
        const double f = r.a[ax] / piv;
        for (int t = 0; t < q.dim; ++t) out.a[t] = r.a[vars[t]] - f * eq.a[vars[t]];
        out.b = r.b - f * eq.b;
        return out;
    };

    q.rows.reserve(p.rows.size() + 2);
    for (const LpRow& r : p.rows) q.rows.push_back(reduce_row(r));
    // the eliminated variable's box bounds become explicit rows
    {
        LpRow up, dn;
        up.a[ax] = 1.0;
        up.b = p.box;
        dn.a[ax] = -1.0;
        dn.b = p.box;
        q.rows.push_back(reduce_row(up));
        q.rows.push_back(reduce_row(dn));
    }
    for (int t = 0; t < q.dim; ++t) q.c[t] = p.c[vars[t]] - (p.c[ax] / piv) * eq.a[vars[t]];

    std::array<double, 3> y{0.0, 0.0, 0.0};
    if (!solve(q, y)) return false;

    double acc = eq.b;
    for (int t = 0; t < q.dim; ++t) acc -= eq.a[vars[t]] * y[t];
    for (int t = 0; t < q.dim; ++t) x[vars[t]] = y[t];
    x[ax] = acc / piv;
    return true;
}

bool solve(Sub& p, std::array<double, 3>& x) {
    const double tol = kTolFactor * std::max(1.0, p.box);

    if (p.dim == 1) {
        double lo = -p.box, hi = p.box;
        for (const LpRow& r : p.rows) {
            const double a = r.a[0];
            if (std::abs(a) <= tol) {
                if (r.b < -tol) return false;
                continue;
            }
            if (a > 0.0)
                hi = std::min(hi, r.b / a);
            else
                lo = std::max(lo, r.b / a);
        }
        if (lo > hi + tol) return false;
        if (lo > hi) lo = hi = 0.5 * (lo + hi);
        x[0] = p.c[0] > 0.0 ? hi : (p.c[0] < 0.0 ? lo : std::clamp(0.0, lo, hi));
        return true;
    }

    // start at the box corner that maximizes c
    for (int t = 0; t < p.dim; ++t) x[t] = p.c[t] >= 0.0 ? p.box : -p.box;

    // deterministic shuffle (xorshift seeded by size)
    std::vector<std::uint32_t> order(p.rows.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::uint64_t s = 0x9e3779b97f4a7c15ull ^ (order.size() * 0x2545f4914f6cdd1dull);
    for (std::size_t i = order.size(); i > 1; --i) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        std::swap(order[i - 1], order[s % i]);
    }

    for (std::size_t n = 0; n < order.size(); ++n) {
        const LpRow& r = p.rows[order[n]];
        double lhs = 0.0;
        for (int t = 0; t < p.dim; ++t) lhs += r.a[t] * x[t];
        if (lhs <= r.b + tol) continue;

        // optimum of the first n+1 constraints lies on this boundary
        int ax = 0;
        for (int t = 1; t < p.dim; ++t)
            if (std::abs(r.a[t]) > std::abs(r.a[ax])) ax = t;
        if (std::abs(r.a[ax]) <= tol) return false; // inconsistent zero row

        Sub head;
        head.dim = p.dim;
        head.box = p.box;
        head.c = p.c;
        head.rows.reserve(n);
        for (std::size_t m = 0; m < n; ++m) head.rows.push_back(p.rows[order[m]]);
        if (!solve_on_hyperplane(head, r, ax, x)) return false;
    }
    return true;
}

} // namespace

LpResult lp_maximize(const std::vector<LpRow>& rows, std::array<double, 3> c, int dim, double box) {
    Sub p;
    p.rows = rows;
    p.c = c;
    p.dim = dim;
    p.box = box;
    LpResult res;
    res.feasible = solve(p, res.x);
    if (res.feasible) {
        res.value = 0.0;
        for (int t = 0; t < dim; ++t) res.value += c[t] * res.x[t];
    }
    return res;
}

} // namespace nnext
