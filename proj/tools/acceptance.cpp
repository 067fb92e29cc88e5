// Runs the acceptance criteria and prints one line per criterion. Exit code is
// the number of failed criteria (capped at 125).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fsabr/cli.hpp"
#include "fsabr/validation.hpp"

namespace {

using fsabr::CheckResult;

struct Criterion {
    int id;
    std::string name;
    double time_limit;  // seconds
    std::function<CheckResult()> run;
};

std::string run_command(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"fsabr"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = fsabr::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code != 0) return "exit " + std::to_string(code) + ": " + err.str();
    return out.str();
}

CheckResult check_determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "fsabr_acceptance";
    std::filesystem::create_directories(dir);
    const std::string params = (dir / "params.txt").string();
    {
        std::ofstream f(params);
        f << "x0=0\ny0=0.2\nnu=1\nrho=-0.3\nhurst=0.3\nseed=2024\n";
    }
    const std::vector<std::vector<std::string>> commands{
        {"density", params, "--t", "0.05", "--grid-spec", "50:50:-0.2:0.2:0.15:0.27"},
        {"smile", params, "--t", "0.05", "--k-range", "-0.3:0.3:0.05", "--method", "asymptotic"},
        {"smile", params, "--t", "0.05", "--k-range", "-0.3:0.3:0.1", "--method", "ldp", "--steps", "64"},
        {"smile", params, "--t", "0.05", "--k-range", "-0.3:0.3:0.05", "--method", "mc", "--paths", "20000",
         "--steps", "64"},
    };
    int mismatches = 0;
    for (const auto& base : commands) {
        std::vector<std::string> bytes;
        for (const char* workers : {"1", "4", "4"}) {
            auto args = base;
            const std::string path = (dir / ("out_" + std::to_string(bytes.size()) + ".csv")).string();
            args.insert(args.end(), {"--workers", workers, "--out", path});
            const std::string status = run_command(args);
            std::ifstream f(path, std::ios::binary);
            std::stringstream content;
            content << f.rdbuf();
            bytes.push_back(status + content.str());
        }
        if (bytes[0].empty() || bytes[0] != bytes[1] || bytes[1] != bytes[2]) ++mismatches;
    }
    std::filesystem::remove_all(dir);
    return {"cli_byte_identical_outputs", static_cast<double>(mismatches), "== 0 mismatching commands",
            mismatches == 0};
}

}  // namespace

int main() {
    const std::uint64_t seed = 20240601;
    const std::vector<Criterion> criteria{
        {1, "kernel identity at H=1/2", 1.0, [&] { return fsabr::check_kernel_identity(seed); }},
        {2, "kernel L2 norm", 10.0, [] { return fsabr::check_kernel_norm(); }},
        {3, "C_eR closed form", 1.0, [] { return fsabr::check_cer_closed_form(); }},
        {4, "difference from SABR", 30.0, [] { return fsabr::check_sabr_difference(); }},
        {5, "Hurst ordering of smiles", 60.0, [] { return fsabr::check_hurst_ordering(); }},
        {6, "density normalization", 30.0,
         [] { return fsabr::check_density_normalization(fsabr::ModelParams{0.0, 0.2, 1.0, -0.3, 0.3}, 0.005); }},
        {7, "hyperbolic reduction", 5.0, [] { return fsabr::check_hyperbolic_reduction(); }},
        {8, "MC KDE cross-validation", 300.0, [&] { return fsabr::check_mc_kde(seed, 0); }},
        {9, "error-order study", 600.0, [&] { return fsabr::check_error_order(seed, 0); }},
        {10, "LDP hyperbolic energy", 5.0, [&] { return fsabr::check_ldp_hyperbolic(seed); }},
        {11, "LDP recovers SABR", 120.0, [] { return fsabr::check_ldp_sabr(); }},
        {12, "Laplace lemma", 10.0, [] { return fsabr::check_laplace_lemma(); }},
        {13, "Black-Scholes roundtrip", 1.0, [&] { return fsabr::check_bs_roundtrip(seed); }},
        {14, "CLI determinism", 60.0, [] { return check_determinism(); }},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        CheckResult r{c.name, NAN, "", false};
        std::string error;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.time_limit;
        const bool pass = error.empty() && r.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("[%s] AC%-2d %-28s value=%.6g tol=%s time=%.2fs (limit %.0fs)%s%s\n", pass ? "PASS" : "FAIL", c.id,
                    c.name.c_str(), r.value, r.tolerance.c_str(), secs, c.time_limit, in_time ? "" : " TIMEOUT",
                    error.empty() ? "" : (" error: " + error).c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return std::min(failed, 125);
}
