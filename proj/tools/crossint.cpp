// Benchmark CLI: convergence sweeps for TT-X, Fourier-TT and Monte Carlo
// basket-option integration, plus a time-to-threshold report over saved runs.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "crossint/experiments.hpp"
#include "crossint/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitBudget = 4;

struct CliOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    std::string out_path;
    double budget_seconds = 0.0;
    std::vector<std::string> in_paths; // report only
};

crossint::ExperimentConfig load_config(const CliOptions& opt) {
    crossint::ExperimentConfig cfg;
    if (!opt.config_path.empty()) cfg = crossint::parse_config_file(opt.config_path);
    if (opt.seed_set) cfg.seed = opt.seed;
    if (!opt.out_path.empty()) cfg.out_path = opt.out_path;
    if (opt.budget_seconds > 0.0) cfg.budget_seconds = opt.budget_seconds;
    return cfg;
}

int finish(const crossint::RunResult& result, const crossint::ExperimentConfig& cfg) {
    const std::string table = crossint::emit_report(result.records, cfg.out_path);
    fmt::print("{}", table);
    fmt::print("wrote {} ({} records)\n", cfg.out_path, result.records.size());
    if (result.truncated) {
        fmt::print(stderr, "warning: sweep truncated by --budget-seconds\n");
        return kExitBudget;
    }
    return kExitOk;
}

void add_common(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_path, "flat key = value config file");
    cmd->add_option("--seed", opt.seed, "RNG seed")->each([&](const std::string&) {
        opt.seed_set = true;
    });
    cmd->add_option("--threads", opt.threads, "worker cap (results are thread-count invariant)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", opt.out_path, "output CSV path");
    cmd->add_option("--budget-seconds", opt.budget_seconds, "wall-clock budget for the sweep");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"crossint: tensor-network integration benchmarks"};
    app.require_subcommand(1);

    CliOptions opt;
    CLI::App* gauss = app.add_subcommand("gauss-ttx", "TT-X of a correlated Gaussian density");
    CLI::App* ttx = app.add_subcommand("basket-ttx", "basket value by TT-X (+ Aitken)");
    CLI::App* fourier = app.add_subcommand("basket-fourier", "basket value by Fourier-TT");
    CLI::App* mc = app.add_subcommand("basket-mc", "basket value by Monte Carlo");
    CLI::App* report = app.add_subcommand("report", "time-to-threshold table from saved CSVs");
    for (CLI::App* cmd : {gauss, ttx, fourier, mc, report}) add_common(cmd, opt);
    report->add_option("--in", opt.in_paths, "input CSV files to merge")->expected(-1);

    CLI11_PARSE(app, argc, argv);

    try {
        const crossint::ExperimentConfig cfg = load_config(opt);
        // basket-ttx with diagonal covariance uses the deterministic scheme's
        // own solve tolerance, so the note would be misleading there.
        if (gauss->parsed() || (ttx->parsed() && cfg.rho != 0.0))
            fmt::print(stderr, "note: pseudo-inverse uses a relative SVD cutoff of {:g}\n",
                       cfg.pinv_tol);
        if (gauss->parsed()) return finish(crossint::run_gauss_ttx(cfg), cfg);
        if (ttx->parsed()) return finish(crossint::run_basket_ttx(cfg), cfg);
        if (fourier->parsed()) return finish(crossint::run_basket_fourier(cfg), cfg);
        if (mc->parsed()) return finish(crossint::run_basket_mc(cfg), cfg);
        // report
        std::vector<crossint::ConvergenceRecord> records;
        for (const auto& path : opt.in_paths) {
            const auto part = crossint::read_csv_file(path);
            records.insert(records.end(), part.begin(), part.end());
        }
        if (records.empty())
            throw crossint::InvalidInputError("report: no input records (use --in)");
        const std::string out = opt.out_path.empty() ? "report.csv" : opt.out_path;
        fmt::print("{}", crossint::emit_report(records, out));
        return kExitOk;
    } catch (const crossint::InvalidInputError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kExitConfig;
    } catch (const crossint::NumericalError& e) {
        fmt::print(stderr, "numerical error: {}\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitNumerical;
    }
}
