#include "nnext/dataset.hpp"

#include "nnext/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nnext {

namespace {

bool parse_row(const std::string& line, double out[3]) {
    std::size_t pos = 0;
    for (int col = 0; col < 3; ++col) {
        std::size_t next = line.find(',', pos);
        const std::string cell =
            line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        try {
            std::size_t used = 0;
            out[col] = std::stod(cell, &used);
            while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
            if (used != cell.size()) return false;
        } catch (...) {
            return false;
        }
        if (col < 2) {
            if (next == std::string::npos) return false;
            pos = next + 1;
        } else if (next != std::string::npos) {
            return false;
        }
    }
    return true;
}

} // namespace

Dataset parse_csv(const std::string& text, const std::string& name) {
    Dataset ds;
    ds.source = name;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        double row[3];
        if (!parse_row(trimmed, row)) {
            if (lineno == 1) continue; // header
            throw input_error(name + ":" + std::to_string(lineno) + ": malformed row");
        }
        if (!is_finite(row[0]) || !is_finite(row[1]) || !is_finite(row[2]))
            throw input_error(name + ":" + std::to_string(lineno) + ": non-finite entry");
        if (row[2] < 0.0)
            throw input_error(name + ":" + std::to_string(lineno) + ": negative value");
        ds.points.push_back({row[0], row[1]});
        ds.values.push_back(row[2]);
    }
    for (std::size_t i = 0; i < ds.points.size(); ++i)
        for (std::size_t j = i + 1; j < ds.points.size(); ++j)
            if (ds.points[i] == ds.points[j])
                throw input_error(name + ": duplicate point at rows " + std::to_string(i + 1) + " and " +
                                  std::to_string(j + 1));
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < ds.points.size(); ++i) {
        h = hash_double(ds.points[i].x1, h);
        h = hash_double(ds.points[i].x2, h);
        h = hash_double(ds.values[i], h);
    }
    ds.checksum = h;
    return ds;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), path);
}

void write_csv(const std::string& path, const std::vector<double>& xs, const std::vector<double>& ys,
               const std::vector<double>& vs) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write " + path);
    out << "x,y,value\n";
    char buf[96];
    for (std::size_t i = 0; i < vs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", xs[i], ys[i], vs[i]);
        out << buf;
    }
}

void write_pgm(const std::string& path, int nx, int ny, const std::vector<double>& vs) {
    if (nx < 1 || ny < 1 || vs.size() != std::size_t(nx) * std::size_t(ny))
        throw input_error("pgm: bad dimensions");
    double top = 0.0;
    for (double v : vs) top = std::max(top, v);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write " + path);
    out << "P5\n" << nx << " " << ny << "\n255\n";
    for (double v : vs) {
        const double t = top > 0.0 ? std::clamp(v / top, 0.0, 1.0) : 0.0;
        out.put(char(int(std::lround(t * 255.0))));
    }
}

} // namespace nnext
