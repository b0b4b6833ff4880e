#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hjdg/grid.hpp"

namespace hjdg {

// Checkpoint format: one ASCII header line
//   HJDG1 n=<dim> cells=<c1,...,cn> h=<h> dt=<dt> t0=<t_start> t1=<t_end>
// followed by raw 64-bit IEEE-754 little-endian values, time-major with
// row-major spatial order.  The spatial domain is the centered box.

namespace detail {

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t byteswap64(std::uint64_t v) {
    v = ((v & 0x00000000FFFFFFFFull) << 32) | (v >> 32);
    v = ((v & 0x0000FFFF0000FFFFull) << 16) | ((v >> 16) & 0x0000FFFF0000FFFFull);
    v = ((v & 0x00FF00FF00FF00FFull) << 8) | ((v >> 8) & 0x00FF00FF00FF00FFull);
    return v;
}

inline double to_le(double x) {
    if constexpr (std::endian::native == std::endian::little) return x;
    return std::bit_cast<double>(byteswap64(std::bit_cast<std::uint64_t>(x)));
}

}  // namespace detail

inline std::string checkpoint_header(const SpaceTimeGrid<double>& g) {
    std::ostringstream os;
    os << "HJDG1 n=" << g.dim << " cells=";
    for (int d = 0; d < g.dim; ++d) {
        if (d) os << ',';
        os << g.cells[d];
    }
    os << " h=" << detail::fmt_g17(g.h) << " dt=" << detail::fmt_g17(g.dt)
       << " t0=" << detail::fmt_g17(g.t_start) << " t1=" << detail::fmt_g17(g.t_end);
    return os.str();
}

inline void write_checkpoint(const GridField<double>& u, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_checkpoint: cannot open " + path);
    os << checkpoint_header(u.grid) << '\n';
    std::vector<double> buf(size_t(u.values.size()));
    for (Index i = 0; i < u.values.size(); ++i) buf[size_t(i)] = detail::to_le(u.values[i]);
    os.write(reinterpret_cast<const char*>(buf.data()),
             std::streamsize(buf.size() * sizeof(double)));
    if (!os) throw std::runtime_error("write_checkpoint: short write to " + path);
}

inline GridField<double> read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_checkpoint: cannot open " + path);
    std::string header;
    std::getline(is, header);
    std::istringstream hs(header);
    std::string magic;
    hs >> magic;
    if (magic != "HJDG1") throw std::runtime_error("read_checkpoint: bad magic in " + path);

    int dim = 0;
    std::string cells_csv;
    double h = 0, dt = 0, t0 = 0, t1 = 0;
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw std::runtime_error("read_checkpoint: bad header token " + tok);
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "n") dim = std::stoi(val);
        else if (key == "cells") cells_csv = val;
        else if (key == "h") h = std::stod(val);
        else if (key == "dt") dt = std::stod(val);
        else if (key == "t0") t0 = std::stod(val);
        else if (key == "t1") t1 = std::stod(val);
        else throw std::runtime_error("read_checkpoint: unknown header key " + key);
    }
    if (dim < 1) throw std::runtime_error("read_checkpoint: missing dimension");
    Eigen::ArrayXi cells(dim);
    {
        std::istringstream cs(cells_csv);
        std::string piece;
        for (int d = 0; d < dim; ++d) {
            if (!std::getline(cs, piece, ',')) throw std::runtime_error("read_checkpoint: bad cells list");
            cells[d] = std::stoi(piece);
        }
    }
    auto grid = SpaceTimeGrid<double>::centered(dim, cells, h, dt, t0, t1);
    auto field = GridField<double>::zero(grid);
    std::vector<double> buf(size_t(field.values.size()));
    is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(double)));
    if (is.gcount() != std::streamsize(buf.size() * sizeof(double)))
        throw std::runtime_error("read_checkpoint: truncated payload in " + path);
    for (Index i = 0; i < field.values.size(); ++i) field.values[i] = detail::to_le(buf[size_t(i)]);
    field.require_finite("checkpoint");
    return field;
}

}  // namespace hjdg
