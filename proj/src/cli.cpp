#include "fsabr/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "fsabr/density_asymptotics.hpp"
#include "fsabr/errors.hpp"
#include "fsabr/ldp_variational.hpp"
#include "fsabr/mc_oracle.hpp"
#include "fsabr/parallel.hpp"
#include "fsabr/smile_asymptotics.hpp"
#include "fsabr/validation.hpp"

namespace fsabr::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string s = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("cannot parse " + what + " from '" + text + "'");
    }
    return v;
}

std::uint64_t parse_uint(const std::string& text, const std::string& what) {
    const std::string s = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("cannot parse " + what + " from '" + text + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) parts.push_back(item);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot open output file '" + path + "'");
    file << text;
    if (!file) throw ConfigError("failed writing output file '" + path + "'");
}

struct SmileRow {
    double k;
    double sigma;
    double diag;
    double std_err;
    bool present = true;
};

std::vector<SmileRow> smile_rows(const std::string& method, const ModelParams& p, double t,
                                 const std::vector<double>& ks, std::size_t paths, std::uint64_t seed,
                                 std::size_t steps, std::size_t workers) {
    std::vector<SmileRow> rows(ks.size());
    if (method == "asymptotic") {
        if (p.hurst > 0.5) {
            throw UnsupportedRegime(
                "H > 1/2: the small-time implied-vol formula needs a boundary minimum, which fails for H > 1/2; "
                "use --method ldp");
        }
        parallel_for(ks.size(), workers, [&](std::size_t i) {
            if (ks[i] == p.x0) {
                rows[i] = {ks[i], implied_vol_fsabr_atm(t, p), 0.0, NAN};
                return;
            }
            const SmilePoint sp = implied_vol_fsabr(ks[i], t, p);
            rows[i] = {ks[i], sp.implied_vol, sp.eta_star, NAN};
        });
    } else if (method == "ldp") {
        const std::size_t n = steps == 0 ? 128 : steps;
        parallel_for(ks.size(), workers, [&](std::size_t i) {
            if (ks[i] == p.x0) {
                rows[i].present = false;
                return;
            }
            const VariationalSolution sol = minimize_rate(ks[i], t, p, n);
            rows[i] = {ks[i], std::abs(ks[i] - p.x0) / std::sqrt(2.0 * t * sol.energy), sol.energy, NAN};
        });
    } else if (method == "mc") {
        const std::size_t n = steps == 0 ? 256 : steps;
        const TerminalSamples samples = simulate_terminal(p, TimeGrid(t, n), paths, seed, workers);
        const double spot = std::exp(p.x0);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const bool call = ks[i] >= p.x0;
            const double strike = std::exp(ks[i]);
            const McEstimate est = price_from_samples(samples.x, ks[i], call);
            double sigma = NAN, se = NAN;
            try {
                sigma = bs_implied_vol(est.price, spot, strike, t, call);
                se = est.std_err / bs_vega(spot, strike, t, sigma);
            } catch (const DomainError&) {
                // No sampled path finished in the money.
            }
            rows[i] = {ks[i], sigma, est.price, se};
        }
    } else if (method == "sabr") {
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const double sigma = sabr_formula(ks[i], t, std::exp(p.x0), p.y0, p.nu, p.rho, 1.0);
            rows[i] = {ks[i], sigma, p.nu / p.y0 * (p.x0 - ks[i]), NAN};
        }
    } else {
        throw ConfigError("unknown method '" + method + "' (expected asymptotic, ldp, mc or sabr)");
    }
    return rows;
}

std::string smile_csv(const std::string& method, const std::vector<SmileRow>& rows) {
    const bool mc = method == "mc";
    std::string csv = mc ? "k,sigma,diag,method,std_err\n" : "k,sigma,diag,method\n";
    for (const SmileRow& r : rows) {
        if (!r.present) continue;
        csv += format_csv_number(r.k) + "," + format_csv_number(r.sigma) + "," + format_csv_number(r.diag) + "," +
               method;
        if (mc) csv += "," + format_csv_number(r.std_err);
        csv += "\n";
    }
    return csv;
}

std::string density_csv(const ModelParams& p, double t, const GridSpec& grid, std::size_t workers) {
    std::vector<std::string> lines(grid.nx);
    parallel_for(grid.nx, workers, [&](std::size_t i) {
        std::string block;
        const double x = grid.x(i);
        for (std::size_t j = 0; j < grid.ny; ++j) {
            const double y = grid.y(j);
            block += format_csv_number(x) + "," + format_csv_number(y) + "," +
                     format_csv_number(approx_joint_density(p, t, x, y)) + "\n";
        }
        lines[i] = std::move(block);
    });
    std::string csv = "x,y,p\n";
    for (const auto& l : lines) csv += l;
    return csv;
}

std::string report_json(const std::string& suite, const std::vector<CheckResult>& checks) {
    nlohmann::ordered_json report;
    report["suite"] = suite;
    bool all_pass = true;
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const CheckResult& c : checks) {
        nlohmann::ordered_json item;
        item["check"] = c.check;
        item["value"] = c.value;
        item["tolerance"] = c.tolerance;
        item["pass"] = c.pass;
        list.push_back(item);
        all_pass = all_pass && c.pass;
    }
    report["checks"] = list;
    report["pass"] = all_pass;
    return report.dump(2) + "\n";
}

}  // namespace

ParamsFile parse_params(std::istream& in) {
    ParamsFile out;
    std::map<std::string, bool> seen;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected key=value, got '" + s + "'");
        }
        const std::string key = trim(s.substr(0, eq));
        const std::string value = s.substr(eq + 1);
        if (seen[key]) throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'");
        seen[key] = true;
        if (key == "x0") out.params.x0 = parse_double(value, key);
        else if (key == "y0") out.params.y0 = parse_double(value, key);
        else if (key == "nu") out.params.nu = parse_double(value, key);
        else if (key == "rho") out.params.rho = parse_double(value, key);
        else if (key == "hurst") out.params.hurst = parse_double(value, key);
        else if (key == "seed") out.seed = parse_uint(value, key);
        else throw ConfigError("line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
    out.params.validate();
    return out;
}

ParamsFile load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open params file '" + path + "'");
    return parse_params(in);
}

std::vector<double> parse_k_range(const std::string& spec, double x0) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw ConfigError("--k-range expects lo:hi:step, got '" + spec + "'");
    const double lo = parse_double(parts[0], "k-range lo");
    const double hi = parse_double(parts[1], "k-range hi");
    const double step = parse_double(parts[2], "k-range step");
    if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ConfigError("--k-range needs lo <= hi and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (count > 100000) throw ConfigError("--k-range has too many points");
    std::vector<double> ks;
    for (std::size_t i = 0; i < count; ++i) {
        double k = lo + step * static_cast<double>(i);
        if (std::abs(k - x0) < 1e-9 * step) k = x0;
        ks.push_back(k);
    }
    return ks;
}

GridSpec parse_grid_spec(const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts.size() != 6) throw ConfigError("--grid-spec expects nx:ny:xlo:xhi:ylo:yhi, got '" + spec + "'");
    GridSpec g{parse_uint(parts[0], "nx"),
               parse_uint(parts[1], "ny"),
               parse_double(parts[2], "xlo"),
               parse_double(parts[3], "xhi"),
               parse_double(parts[4], "ylo"),
               parse_double(parts[5], "yhi")};
    if (g.nx < 2 || g.ny < 2) throw ConfigError("--grid-spec needs nx, ny >= 2");
    if (!(g.x_hi > g.x_lo) || !(g.y_hi > g.y_lo)) throw ConfigError("--grid-spec needs increasing ranges");
    return g;
}

std::string format_csv_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Small-time asymptotics of the fractional SABR model"};
    app.require_subcommand(1);

    std::string params_path, out_path, grid_spec, k_range, method = "asymptotic", suite = "all";
    double t = 0.0;
    std::size_t paths = 100000, steps = 0, workers = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* sub, bool params_required) {
        auto* opt = sub->add_option("params", params_path, "key=value parameter file");
        if (params_required) opt->required();
        sub->add_option("--out", out_path, "output path (stdout when omitted)");
        sub->add_option("--workers", workers, "worker threads, 0 = all cores");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& s) { seed = s, seed_given = true; }, "overrides the file's seed");
    };

    auto* density = app.add_subcommand("density", "approximate joint density on a grid (CSV x,y,p)");
    add_common(density, true);
    density->add_option("--t", t, "maturity")->required();
    density->add_option("--grid-spec", grid_spec, "nx:ny:xlo:xhi:ylo:yhi")->required();

    auto* smile = app.add_subcommand("smile", "implied volatility smile (CSV k,sigma,diag,method[,std_err])");
    add_common(smile, true);
    smile->add_option("--t", t, "maturity")->required();
    smile->add_option("--k-range", k_range, "lo:hi:step")->required();
    smile->add_option("--method", method, "asymptotic | ldp | mc | sabr");
    smile->add_option("--paths", paths, "Monte Carlo paths");
    smile->add_option("--steps", steps, "time steps (ldp default 128, mc default 256)");

    auto* compare = app.add_subcommand("compare", "small-time formula against SABR (CSV k,sigma_fsabr,sigma_sabr,abs_diff)");
    add_common(compare, true);
    compare->add_option("--t", t, "maturity")->required();
    compare->add_option("--k-range", k_range, "lo:hi:step")->required();

    auto* hurst_sweep = app.add_subcommand("hurst-sweep", "smiles at t in {0.01, 1} for H in {0.1, 0.3, 0.5, 0.7, 0.9}");
    add_common(hurst_sweep, true);
    hurst_sweep->add_option("--k-range", k_range, "lo:hi:step")->required();
    hurst_sweep->add_option("--steps", steps, "ldp time steps for H > 1/2 (default 128)");

    auto* validate = app.add_subcommand("validate", "run invariant checks (JSON report)");
    add_common(validate, false);
    validate->add_option("--suite", suite, "kernel | density | smile | ldp | laplace | all");
    validate->add_option("--t", t, "maturity for the density check (default 0.005)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        ParamsFile config;
        if (!params_path.empty()) config = load_params(params_path);
        if (seed_given) config.seed = seed;
        const ModelParams& p = config.params;

        if (density->parsed()) {
            emit(density_csv(p, t, parse_grid_spec(grid_spec), workers), out_path, out);
        } else if (smile->parsed()) {
            const auto ks = parse_k_range(k_range, p.x0);
            emit(smile_csv(method, smile_rows(method, p, t, ks, paths, config.seed, steps, workers)), out_path, out);
        } else if (compare->parsed()) {
            const auto ks = parse_k_range(k_range, p.x0);
            const auto fs = smile_rows("asymptotic", p, t, ks, 0, 0, 0, workers);
            const auto sabr = smile_rows("sabr", p, t, ks, 0, 0, 0, workers);
            std::string csv = "k,sigma_fsabr,sigma_sabr,abs_diff\n";
            double worst = 0.0;
            for (std::size_t i = 0; i < ks.size(); ++i) {
                const double diff = std::abs(fs[i].sigma - sabr[i].sigma);
                worst = std::max(worst, diff);
                csv += format_csv_number(ks[i]) + "," + format_csv_number(fs[i].sigma) + "," +
                       format_csv_number(sabr[i].sigma) + "," + format_csv_number(diff) + "\n";
            }
            emit(csv, out_path, out);
            err << "max_abs_diff=" << format_csv_number(worst) << "\n";
        } else if (hurst_sweep->parsed()) {
            const auto ks = parse_k_range(k_range, p.x0);
            std::string csv = "t,hurst,k,sigma,method\n";
            for (double expiry : {0.01, 1.0}) {
                for (double h : {0.1, 0.3, 0.5, 0.7, 0.9}) {
                    ModelParams q = p;
                    q.hurst = h;
                    const std::string m = h <= 0.5 ? "asymptotic" : "ldp";
                    for (const SmileRow& r : smile_rows(m, q, expiry, ks, 0, 0, steps, workers)) {
                        if (!r.present) continue;
                        csv += format_csv_number(expiry) + "," + format_csv_number(h) + "," + format_csv_number(r.k) +
                               "," + format_csv_number(r.sigma) + "," + m + "\n";
                    }
                }
            }
            emit(csv, out_path, out);
        } else if (validate->parsed()) {
            const double horizon = t > 0.0 ? t : 0.005;
            const auto checks = run_suite(suite, p, horizon, config.seed);
            emit(report_json(suite, checks), out_path, out);
            for (const auto& c : checks) {
                if (!c.pass) return 1;
            }
        }
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        err << "domain error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 4;
    }
    return 0;
}

}  // namespace fsabr::cli
