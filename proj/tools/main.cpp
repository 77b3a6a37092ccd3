#include "lsvj/commands.hpp"
#include "lsvj/parallel.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

constexpr const char* kThreadsEnv = "LSVJ_THREADS";

std::optional<std::size_t> env_threads() {
    const char* s = std::getenv(kThreadsEnv);
    if (!s || !*s) return std::nullopt;
    char* end = nullptr;
    const long n = std::strtol(s, &end, 10);
    if (*end != '\0' || n < 1) lsvj::fail(lsvj::ErrorKind::Config, std::string(kThreadsEnv) + " must be a positive integer");
    return static_cast<std::size_t>(n);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-difference pricer for a local stochastic volatility model with stochastic rates and jumps"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::size_t> threads;
    std::optional<long long> seed;
    std::string axis;
    int levels = 0;
    std::vector<std::size_t> sizes;

    auto common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "Output directory for CSV artifacts");
        cmd->add_option("--threads", threads, std::string("Worker threads (overrides ") + kThreadsEnv + ")")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Random seed for Monte Carlo oracles")->check(CLI::NonNegativeNumber);
    };
    CLI::App* price = app.add_subcommand("price", "Price the configured instrument and write surface and slice CSVs");
    CLI::App* conv = app.add_subcommand("convergence", "Dyadic refinement study in time or space");
    CLI::App* timing = app.add_subcommand("timing", "One-step wall time and complexity exponent per grid size");
    CLI::App* validate = app.add_subcommand("validate", "Property and oracle checks with a pass/fail table");
    for (CLI::App* c : {price, conv, timing, validate}) common(c);
    conv->add_option("--axis", axis, "time or space")->check(CLI::IsMember({"time", "space"}));
    conv->add_option("--levels", levels, "Number of refinement levels (>= 3)");
    timing->add_option("--sizes", sizes, "Nodes per axis, e.g. --sizes 31 41 51 61");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : lsvj::kExitConfig;
    }

    try {
        if (threads) lsvj::set_thread_count(*threads);
        else if (const auto n = env_threads()) lsvj::set_thread_count(*n);
        lsvj::RunConfig rc = lsvj::load_run_config(config_path);
        if (!out_dir.empty()) rc.output = out_dir;
        if (seed) {
            rc.seed = static_cast<std::uint64_t>(*seed);
            rc.mc.seed = rc.seed;
            rc.resolved["seed"] = *seed;
        }
        if (!axis.empty()) {
            rc.convergence.axis = axis;
            rc.resolved["convergence"]["axis"] = axis;
        }
        if (levels) {
            if (levels < 3) lsvj::fail(lsvj::ErrorKind::Config, "--levels must be at least 3");
            rc.convergence.levels = levels;
            rc.resolved["convergence"]["levels"] = levels;
        }
        if (!sizes.empty()) {
            if (sizes.size() < 2) lsvj::fail(lsvj::ErrorKind::Config, "--sizes needs at least two entries");
            rc.timing.sizes = sizes;
            rc.resolved["timing"]["sizes"] = sizes;
        }
        if (*price) return lsvj::cmd_price(rc, std::cout);
        if (*conv) return lsvj::cmd_convergence(rc, std::cout);
        if (*timing) return lsvj::cmd_timing(rc, std::cout);
        return lsvj::cmd_validate(rc, std::cout);
    } catch (const lsvj::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lsvj::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lsvj::kExitSolver;
    }
}
