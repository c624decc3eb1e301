// yieldopt: batch front-end for the yield estimation and optimization studies.
//
//   yieldopt estimate        MC vs GPR-Hybrid on one sample set
//   yieldopt newton          adaptive Newton-MC (--classic: fixed sample size)
//   yieldopt moo             NSGA-II on width vs yield
//   yieldopt bench-compare   evaluation cost table and savings ratio
//
// Global flags: --config <ini>, --seed <u64>, --out <dir>.

#include "yieldopt/yieldopt.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>

#include <fmt/format.h>

namespace {

using namespace yieldopt;

int cmd_estimate(const RunConfig& c, const std::filesystem::path& out) {
    const EstimateReport r = run_estimate(c);
    {
        auto f = open_output(out, "estimate.csv");
        write_estimate_csv(f, r);
    }
    {
        auto f = open_output(out, "hybrid_records.csv");
        write_records_csv(f, r.records);
    }
    fmt::print("{:<11} {:>8} {:>8} {:>10}\n", "method", "yield", "sigma", "true_evals");
    fmt::print("{:<11} {:>8.4f} {:>8.4f} {:>10}\n", "mc", r.mc.value, r.mc.sigma, r.mc.true_evals);
    fmt::print("{:<11} {:>8.4f} {:>8.4f} {:>10}\n", "gpr-hybrid", r.hybrid.value, r.hybrid.sigma, r.hybrid.true_evals);
    fmt::print("critical samples: {}  disagreements with MC: {}\n", r.hybrid.critical_count, r.mismatched);
    return 0;
}

int cmd_newton(const RunConfig& c, const std::filesystem::path& out, bool classic) {
    const NewtonResult r = run_newton(c, classic);
    {
        auto f = open_output(out, "newton_trace.csv");
        write_trace_csv(f, r.trace);
    }
    fmt::print("{} Newton: {} iterations, stop: {}\n", classic ? "classic" : "adaptive", r.trace.size(),
               to_string(r.stop));
    fmt::print("start yield {:.4f} (N={})  final yield {:.4f} (N={})\n", r.start.value, r.start.n_samples,
               r.final.value, r.final.n_samples);
    fmt::print("final mean:");
    for (Eigen::Index i = 0; i < r.mean.size(); ++i) fmt::print(" {:.6g}", r.mean[i]);
    fmt::print("\ncumulative true_evals: {}\n", r.true_evals);
    return 0;
}

int cmd_moo(const RunConfig& c, const std::filesystem::path& out) {
    const MooReport r = run_moo(c);
    {
        auto f = open_output(out, "pareto.csv");
        write_pareto_csv(f, r.result.front);
    }
    {
        auto f = open_output(out, "moo_history.csv");
        write_history_csv(f, r.result.history);
    }
    fmt::print("front members: {}  evaluations: {}  true_evals: {}\n", r.result.front.size(), r.result.evaluations,
               r.true_evals);
    if (!r.result.front.empty()) {
        const auto& a = r.result.front.front();
        const auto& b = r.result.front.back();
        fmt::print("narrowest: width {:.4f} yield {:.4f}\nwidest:    width {:.4f} yield {:.4f}\n", a.f[0], -a.f[1],
                   b.f[0], -b.f[1]);
    }
    return 0;
}

int cmd_bench_compare(const RunConfig& c, const std::filesystem::path& out) {
    const EstimateReport r = run_estimate(c);
    {
        auto f = open_output(out, "bench_compare.csv");
        write_bench_compare_csv(f, r);
    }
    fmt::print("{:<11} {:>10} {:>8} {:>8}\n", "method", "true_evals", "yield", "sigma");
    fmt::print("{:<11} {:>10} {:>8.4f} {:>8.4f}\n", "mc", r.mc.true_evals, r.mc.value, r.mc.sigma);
    fmt::print("{:<11} {:>10} {:>8.4f} {:>8.4f}\n", "gpr-hybrid", r.hybrid.true_evals, r.hybrid.value, r.hybrid.sigma);
    fmt::print("savings ratio: {:.2f}\n", r.savings_ratio());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Yield estimation and optimization with GPR-Hybrid surrogates"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    bool print_config = false;
    app.add_option("--config", config_path, "INI configuration file (defaults: benchmark)");
    app.add_option("--seed", seed, "Run seed, overrides run.seed");
    app.add_option("--out", out_dir, "Output directory for CSV files");
    app.add_flag("--print-config", print_config, "Print the effective configuration before running");

    auto* est = app.add_subcommand("estimate", "Plain MC and GPR-Hybrid on the same samples");
    auto* newton = app.add_subcommand("newton", "Adaptive Newton-MC yield maximization");
    bool classic = false;
    newton->add_flag("--classic", classic, "Fixed sample size newton.n_classic, no escalation");
    auto* moo = app.add_subcommand("moo", "NSGA-II on stack width vs yield");
    auto* bench = app.add_subcommand("bench-compare", "Evaluation cost of MC vs GPR-Hybrid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (seed) cfg.seed = *seed;
        cfg.validate();
        if (print_config) std::cout << serialize_config(cfg) << '\n';
        const std::filesystem::path out(out_dir);
        if (*est) return cmd_estimate(cfg, out);
        if (*newton) return cmd_newton(cfg, out, classic);
        if (*moo) return cmd_moo(cfg, out);
        if (*bench) return cmd_bench_compare(cfg, out);
    } catch (const InvalidInput& e) {
        std::cerr << "yieldopt: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "yieldopt: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
