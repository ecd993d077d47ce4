#pragma once

#include "nnext/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nnext {

/// Planar samples with nonnegative values, as read from a CSV file with
/// columns x,y,value (an optional header line is skipped).
struct Dataset {
    std::vector<Point2> points;
    std::vector<double> values;
    std::string source;
    std::uint64_t checksum = 0;

    std::size_t size() const { return points.size(); }
};

Dataset load_csv(const std::string& path);
Dataset parse_csv(const std::string& text, const std::string& name);

void write_csv(const std::string& path, const std::vector<double>& xs, const std::vector<double>& ys,
               const std::vector<double>& vs);

/// 8-bit PGM, row major, values scaled to [0, max].
void write_pgm(const std::string& path, int nx, int ny, const std::vector<double>& vs);

} // namespace nnext
