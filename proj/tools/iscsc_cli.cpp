// SPDX-License-Identifier: Apache-2.0
#include "iscsc/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

using namespace iscsc;
namespace fs = std::filesystem;
using harness::ExitCode;

namespace {

int code(ExitCode c) { return static_cast<int>(c); }

ScenarioConfig config_or_reference(const std::string& path) {
    return path.empty() ? reference_scenario() : load_scenario(path);
}

// "0,3,5..8" -> 0 3 5 6 7 8
std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& tokens) {
    std::vector<std::uint64_t> out;
    for (const auto& t : tokens) {
        const auto dots = t.find("..");
        try {
            if (dots == std::string::npos) {
                out.push_back(std::stoull(t));
                continue;
            }
            const auto lo = std::stoull(t.substr(0, dots));
            const auto hi = std::stoull(t.substr(dots + 2));
            if (hi < lo) throw harness::UsageError("empty seed range " + t);
            for (auto s = lo; s <= hi; ++s) out.push_back(s);
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const harness::UsageError*>(&e)) throw;
            throw harness::UsageError("bad seed '" + t + "' (use N or A..B)");
        }
    }
    return out;
}

opt::RunOptions run_options(bool verbose) {
    opt::RunOptions o;
    o.verbose = verbose;
    o.solver_tol = harness::solver_tol_from_env();
    return o;
}

void print_summary(const nlohmann::json& report) {
    const auto& t = report.at("totals");
    std::printf("digest %s  mode %s  status %s\n", report.at("digest").get<std::string>().c_str(),
                report.at("mode").get<std::string>().c_str(), report.at("status").get<std::string>().c_str());
    std::printf("sum semantic rate %.6g  sum SSR %.6g  sum RCRB %.6g  objective %.6g\n",
                t.at("sum_semantic_rate").get<double>(), t.at("sum_ssr").get<double>(),
                t.at("sum_rcrb").get<double>(), t.at("objective").get<double>());
    const auto& p = report.at("power");
    std::printf("power comp %.6g W  c&s %.6g W  budget %.6g W  (%d outer iterations, %.2f s)\n",
                p.at("comp_w").get<double>(), p.at("cs_w").get<double>(), p.at("budget_w").get<double>(),
                report.at("solver").at("outer_iterations").get<int>(),
                report.at("solver").at("wall_seconds").get<double>());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust semantic ISAC beamforming: solve, sweep, validate, mse-crb, plot, verify"};
    app.require_subcommand(1);

    std::string config;
    std::string mode = "full";
    std::uint64_t seed = 0;
    std::string out;
    bool verbose = false;

    auto* solve = app.add_subcommand("solve", "Run the alternating design on one scenario");
    solve->add_option("--config", config, "Scenario JSON (default: the reference scenario)");
    solve->add_option("--mode", mode, "full, rho1 or conventional")->capture_default_str();
    solve->add_option("--seed", seed, "Channel and randomization seed")->capture_default_str();
    solve->add_option("--out", out, "Output directory")->required();
    solve->add_flag("-v,--verbose", verbose, "Solver progress on stderr");

    std::vector<double> powers{15, 20, 25, 30, 35};
    std::vector<std::string> modes{"full", "rho1"};
    std::vector<std::string> seed_tokens{"0"};
    bool force = false;
    bool plots = false;
    int jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "Solve a grid of power budgets and modes");
    sweep->add_option("--config", config, "Scenario JSON (default: the reference scenario)");
    sweep->add_option("--powers", powers, "Power budgets in dBm")->delimiter(',')->capture_default_str();
    sweep->add_option("--modes", modes, "Modes")->delimiter(',')->capture_default_str();
    sweep->add_option("--seeds", seed_tokens, "Seeds: N or A..B, comma separated")->delimiter(',');
    sweep->add_option("--out", out, "Output directory")->required();
    sweep->add_option("-j,--jobs", jobs, "Concurrent solves")->capture_default_str();
    sweep->add_flag("--force", force, "Recompute keys already in the table");
    sweep->add_flag("--plots", plots, "Also write SVG plots");
    sweep->add_flag("-v,--verbose", verbose, "Solver progress on stderr");

    double bleu_shift = 0.0;
    bool skip_solve = false;
    auto* val = app.add_subcommand("validate", "Run the oracle checks");
    val->add_option("--seed", seed, "Seed of the random test cases")->capture_default_str();
    val->add_flag("--skip-solve", skip_solve, "Skip the end-to-end solve checks");
    val->add_option("--bleu-denominator-shift", bleu_shift, "Mutation hook for the BLEU inversion check")
        ->group("");

    std::vector<double> snrs{0, 5, 10, 15, 20, 25, 30};
    int trials = 1000;
    auto* mse = app.add_subcommand("mse-crb", "Monte Carlo ML angle MSE against the CRB");
    mse->add_option("--config", config, "Scenario JSON (default: the reference scenario)");
    mse->add_option("--snrs", snrs, "Echo SNRs in dB")->delimiter(',')->capture_default_str();
    mse->add_option("--trials", trials, "Trials per SNR (at least 100)")->capture_default_str();
    mse->add_option("--out", out, "Output directory")->required();

    std::string table;
    auto* plot = app.add_subcommand("plot", "SVG plots from a sweep table");
    plot->add_option("--table", table, "sweep.csv")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", out, "Output directory (default: next to the table)");

    std::string report_path;
    auto* verify = app.add_subcommand("verify", "Recompute a stored report's metrics from its solution");
    verify->add_option("--report", report_path, "report.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return code(ExitCode::Usage);
    }

    try {
        if (*solve) {
            const auto m = opt::parse_mode(mode);
            const auto res = harness::cmd_solve(config_or_reference(config), m, seed, out, run_options(verbose));
            print_summary(res.report);
            if (!res.result.report.message.empty()) std::printf("note: %s\n", res.result.report.message.c_str());
            return code(harness::exit_code(res.result.report.status));
        }
        if (*sweep) {
            harness::SweepOptions o;
            o.powers_dbm = powers;
            o.modes.clear();
            for (const auto& m : modes) o.modes.push_back(opt::parse_mode(m));
            o.seeds = parse_seeds(seed_tokens);
            o.force = force;
            o.jobs = jobs;
            o.run = run_options(verbose);
            o.on_row = [](const harness::SweepRow& r) {
                std::printf("%-5g dBm  %-12s seed %-4llu rate %-10.6g ssr %-10.6g rcrb %-10.4g %s\n", r.power_dbm,
                            opt::to_string(r.mode), static_cast<unsigned long long>(r.seed), r.sum_semantic_rate,
                            r.sum_ssr, r.sum_rcrb, r.status.c_str());
                std::fflush(stdout);
            };
            const auto t = harness::cmd_sweep(config_or_reference(config), o, out);
            if (plots) harness::write_plots(t, out);
            std::printf("%zu rows in %s\n", t.rows().size(), (fs::path(out) / "sweep.csv").c_str());
            return code(ExitCode::Ok);
        }
        if (*val) {
            harness::ValidateOptions o;
            o.seed = seed;
            o.bleu_denominator_shift = bleu_shift;
            o.include_solve = !skip_solve;
            bool all = true;
            for (const auto& r : harness::cmd_validate(o)) {
                std::printf("%-4s %-26s %7.2fs  %s\n", r.passed ? "ok" : "FAIL", r.name.c_str(), r.seconds,
                            r.detail.c_str());
                all = all && r.passed;
            }
            return all ? 0 : 1;
        }
        if (*mse) {
            const auto rows = harness::cmd_mse_crb(config_or_reference(config), snrs, trials, out);
            std::printf("%8s %14s %14s %10s\n", "snr_db", "mse", "crb", "mse/crb");
            for (const auto& r : rows) std::printf("%8g %14.6g %14.6g %10.4f\n", r.snr_db, r.mse, r.crb, r.mse / r.crb);
            return code(ExitCode::Ok);
        }
        if (*plot) {
            const fs::path dir = out.empty() ? fs::path(table).parent_path() : fs::path(out);
            harness::write_plots(harness::SweepTable::load(table), dir.empty() ? fs::path(".") : dir);
            return code(ExitCode::Ok);
        }
        if (*verify) {
            const auto v = harness::verify_report(harness::read_json(report_path));
            std::printf("%s: worst relative error %.3g (%s)%s\n", v.ok ? "ok" : "FAIL", v.worst_error,
                        v.worst_field.c_str(), v.digest_ok ? "" : ", digest mismatch");
            return v.ok ? 0 : 1;
        }
    } catch (const harness::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return code(ExitCode::Usage);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return code(ExitCode::Usage);
    } catch (const harness::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return code(ExitCode::Io);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return code(ExitCode::Io);
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return code(ExitCode::Infeasible);
    } catch (const NumericalError& e) {
        std::cerr << "numerical limit: " << e.what() << "\n";
        return code(ExitCode::NumericalLimit);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return code(ExitCode::NumericalLimit);
    }
    return code(ExitCode::Usage);
}
