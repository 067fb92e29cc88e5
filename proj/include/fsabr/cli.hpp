#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fsabr/params.hpp"

namespace fsabr::cli {

struct ParamsFile {
    ModelParams params;
    std::uint64_t seed = 0;
};

// key=value lines with keys x0, y0, nu, rho, hurst, seed. Blank lines and
// lines starting with '#' are skipped; missing keys keep their defaults.
// Throws ConfigError on malformed input and DomainError on invalid values.
ParamsFile parse_params(std::istream& in);
ParamsFile load_params(const std::string& path);

// "lo:hi:step" -> lo, lo + step, ... <= hi. Points within 1e-9 step of x0
// snap to x0.
std::vector<double> parse_k_range(const std::string& spec, double x0);

struct GridSpec {
    std::size_t nx, ny;
    double x_lo, x_hi, y_lo, y_hi;

    double x(std::size_t i) const { return x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(nx - 1); }
    double y(std::size_t j) const { return y_lo + (y_hi - y_lo) * static_cast<double>(j) / static_cast<double>(ny - 1); }
};
// "nx:ny:xlo:xhi:ylo:yhi" with nx, ny >= 2.
GridSpec parse_grid_spec(const std::string& spec);

// Twelve significant digits, "nan" for NaN.
std::string format_csv_number(double v);

// Entry point shared by the executable and the tests. Exit codes: 0 success,
// 1 failed validation, 2 configuration error, 3 domain error, 4 numerical
// failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fsabr::cli
