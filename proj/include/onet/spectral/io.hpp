#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "onet/spectral/fourier_field.hpp"
#include "onet/spectral/grid_sample.hpp"

namespace onet::spectral {

namespace detail {
inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace detail

// Text field format: header "dim max_mode", then one mode per line,
// "k_1 ... k_dim re im", in row-major band order. %.17g keeps round trips exact.
inline void write_field(const FourierField& f, std::ostream& os) {
    os << f.dim() << ' ' << f.max_mode() << '\n';
    f.for_each_mode([&](const std::vector<int>& k, std::size_t idx) {
        for (int v : k) os << v << ' ';
        os << detail::fmt_double(f.raw()[idx].real()) << ' ' << detail::fmt_double(f.raw()[idx].imag())
           << '\n';
    });
}

[[nodiscard]] inline FourierField read_field(std::istream& is) {
    int dim = 0, max_mode = -1;
    if (!(is >> dim >> max_mode)) throw std::runtime_error("read_field: bad header");
    FourierField f(dim, max_mode);
    std::vector<int> k(static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < f.num_modes(); ++i) {
        for (int j = 0; j < dim; ++j)
            if (!(is >> k[static_cast<std::size_t>(j)])) throw std::runtime_error("read_field: truncated modes");
        double re = 0.0, im = 0.0;
        if (!(is >> re >> im)) throw std::runtime_error("read_field: truncated coefficients");
        f.set_coeff(k, {re, im});
    }
    return f;
}

// Plain CSV, row-major, (2N+1)^{dim-1} rows of 2N+1 values each.
inline void write_grid_csv(const GridSample& g, std::ostream& os) {
    const int ppa = g.points_per_axis();
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        os << detail::fmt_double(g.values[i]);
        os << (((i + 1) % static_cast<std::size_t>(ppa) == 0) ? '\n' : ',');
    }
}

[[nodiscard]] inline GridSample read_grid_csv(int dim, std::istream& is) {
    std::vector<double> vals;
    std::string line;
    while (std::getline(is, line)) {
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            if (cell.empty()) continue;
            vals.push_back(std::stod(cell));
        }
    }
    for (int n = 0;; ++n) {
        const std::size_t want = GridSample::num_points(dim, n);
        if (want == vals.size()) {
            GridSample g(dim, n);
            g.values = std::move(vals);
            return g;
        }
        if (want > vals.size()) throw std::runtime_error("read_grid_csv: value count fits no grid");
    }
}

}  // namespace onet::spectral
