#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsabr/params.hpp"

namespace fsabr {

struct CheckResult {
    std::string check;
    double value;
    std::string tolerance;
    bool pass;
};

// Checks with fixed parameters unless a ModelParams argument is taken.
CheckResult check_kernel_identity(std::uint64_t seed);
CheckResult check_kernel_norm();
CheckResult check_kernel_autocov(double hurst);
CheckResult check_cer_closed_form();
CheckResult check_density_normalization(const ModelParams& p, double t);
CheckResult check_hyperbolic_reduction();
CheckResult check_sabr_difference();
CheckResult check_hurst_ordering();
CheckResult check_route_identity(std::uint64_t seed);
CheckResult check_bs_roundtrip(std::uint64_t seed);
CheckResult check_ldp_hyperbolic(std::uint64_t seed);
CheckResult check_ldp_sabr();
CheckResult check_ldp_roundtrip(double hurst, std::uint64_t seed);
CheckResult check_laplace_lemma();
CheckResult check_laplace_gaussian();
CheckResult check_mc_kde(std::uint64_t seed, std::size_t workers);
CheckResult check_error_order(std::uint64_t seed, std::size_t workers);

// Suites: kernel, density, smile, ldp, laplace, all. Throws ConfigError for
// an unknown name.
std::vector<CheckResult> run_suite(const std::string& suite, const ModelParams& p, double t, std::uint64_t seed);

}  // namespace fsabr
