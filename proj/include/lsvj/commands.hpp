#pragma once

#include "lsvj/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lsvj {

struct PicardStats {
    std::size_t solves = 0;
    double mean_iterations = 0.0;
    int max_iterations = 0;
    /// Share of solves that converged within two iterations.
    double within_two = 1.0;
    std::size_t not_converged = 0;
};

PicardStats picard_stats(const Diagnostics& d);

struct PriceRun {
    PriceSurface surface;
    PricingReport report;
    double price = 0.0;
    double seconds = 0.0;
};

PriceRun run_price(const RunConfig& rc);

struct ConvergenceRow {
    int level = 0;
    std::size_t n = 0;
    double dt = 0.0;
    /// S step at the spot point.
    double h = 0.0;
    double value = 0.0;
    /// |value - value at the finest level|.
    double error = 0.0;
    /// log2 of the ratio of successive level differences; NaN where undefined.
    double order = 0.0;
};

/// Dyadic refinement in dt (axis "time") or in the node count per axis
/// (axis "space", n -> 2n - 1) from rc.convergence.
std::vector<ConvergenceRow> convergence_study(const RunConfig& rc);

struct TimingRow {
    std::size_t n = 0;
    std::size_t nodes = 0;
    double diffusion_seconds = 0.0;
    /// NaN when the model has no jumps.
    double jump_seconds = 0.0;
    /// log(t_i / t_{i-1}) / log(N_i / N_{i-1}); NaN on the first row or equal sizes.
    double kappa_diffusion = 0.0;
    double kappa_jump = 0.0;
};

std::vector<TimingRow> timing_study(const RunConfig& rc);

struct ValidationCheck {
    std::string name;
    bool pass = false;
    std::string detail;
    /// Informational rows are reported but do not affect the exit status.
    bool gating = true;
};

std::vector<ValidationCheck> validation_suite(const RunConfig& rc);

/// Each command writes its CSV artifacts under rc.output and a summary to
/// `out`, returning the process exit status.
int cmd_price(const RunConfig& rc, std::ostream& out);
int cmd_convergence(const RunConfig& rc, std::ostream& out);
int cmd_timing(const RunConfig& rc, std::ostream& out);
int cmd_validate(const RunConfig& rc, std::ostream& out);

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitValidation = 4 };

int exit_code_for(ErrorKind kind);

}  // namespace lsvj

namespace lsvj {

/// Sup-norm gap between idio_jump_step and the spectral oracle for a
/// Gaussian bump on an n-node uniform log grid, over the middle 60% of nodes.
double idio_spectral_discrepancy(const MeixnerParams& p, double dt, std::size_t n = 201);

/// Number of line matrices failing em_check among the factored mixed-solve
/// matrices of every active pair, and the total checked.
std::pair<std::size_t, std::size_t> em_failures_mixed(const ModelSpec& m, const Grid3D& g, double dt,
                                                      MixedVariant variant, double beta_mult);

}  // namespace lsvj
