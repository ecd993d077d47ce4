#pragma once

#include "nnext/decomp.hpp"
#include "nnext/fieldprog.hpp"

namespace nnext {

struct NormEstimate {
    double m_hat = 0.0;
    int witness_square = -1; // data square attaining the max
    std::vector<std::pair<int, double>> per_square;
};

/// Order-of-magnitude trace-norm estimate: the worst minimal field energy
/// over the data squares' depth sets. Positively homogeneous in the values.
NormEstimate estimate_norm(const Decomposition& dec, const std::vector<double>& values);
NormEstimate estimate_norm(const std::vector<Point2>& points, const std::vector<double>& values,
                           const Config& cfg);

/// Brute-force reference for tiny instances (at most 8 points): minimizes
/// the max-form field norm (scaled pairwise differences + worst cushion +
/// worst jet norm) over interpolating fields. Throws input_error beyond the
/// size cap.
double oracle_norm(const std::vector<Point2>& points, const std::vector<double>& values,
                   const Config& cfg);

} // namespace nnext
