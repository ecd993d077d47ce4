#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace nnext {

/// One linear constraint a . x <= b in up to three variables.
struct LpRow {
    std::array<double, 3> a{0.0, 0.0, 0.0};
    double b = 0.0;
};

struct LpResult {
    bool feasible = false;
    std::array<double, 3> x{0.0, 0.0, 0.0};
    double value = 0.0;
};

/// Maximize c . x over { |x_i| <= box } intersected with the rows, by
/// randomized-incremental descent through the dimensions. The shuffle is
/// seeded from the row count, so results are reproducible. Expected O(rows)
/// per call in this fixed dimension.
LpResult lp_maximize(const std::vector<LpRow>& rows, std::array<double, 3> c, int dim, double box);

} // namespace nnext
