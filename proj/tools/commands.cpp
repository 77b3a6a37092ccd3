#include "lsvj/commands.hpp"

#include "lsvj/banded.hpp"
#include "lsvj/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace lsvj {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double spot_value(const PriceSurface& s, const GridSpec& gs, const ModelSpec& m) {
    const auto p = spot_point(gs, m);
    return s.value_at(p[0], p[1], p[2]);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Config, "cannot create output directory " + dir.string() + ": " + ec.message());
}

std::string fmt(double x, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << x;
    return os.str();
}

}  // namespace

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return kExitConfig;
        case ErrorKind::Domain:
        case ErrorKind::Solver: return kExitSolver;
        case ErrorKind::Validation: return kExitValidation;
    }
    return kExitSolver;
}

PicardStats picard_stats(const Diagnostics& d) {
    PicardStats s;
    s.solves = d.picard.size();
    if (s.solves == 0) return s;
    double total = 0.0;
    std::size_t two = 0;
    for (const auto& r : d.picard) {
        total += r.iterations;
        s.max_iterations = std::max(s.max_iterations, r.iterations);
        if (r.converged && r.iterations <= 2) ++two;
        if (!r.converged) ++s.not_converged;
    }
    s.mean_iterations = total / static_cast<double>(s.solves);
    s.within_two = static_cast<double>(two) / static_cast<double>(s.solves);
    return s;
}

PriceRun run_price(const RunConfig& rc) {
    PriceRun run;
    const Grid3D g = build_pricing_grid(rc.grid, rc.instrument, rc.model);
    PricingOptions opt;
    opt.jumps = rc.jumps;
    const auto t0 = std::chrono::steady_clock::now();
    run.surface = price(rc.instrument, rc.model, g, rc.solver, opt, &run.report);
    run.seconds = seconds_since(t0);
    run.price = spot_value(run.surface, rc.grid, rc.model);
    return run;
}

int cmd_price(const RunConfig& rc, std::ostream& out) {
    const PriceRun run = run_price(rc);
    const std::string hash = rc.hash();
    ensure_dir(rc.output);
    const Grid3D& g = run.surface.grid;
    const Shape3 sh = g.shape();
    const Vector& val = run.surface.values;
    auto at = [&](std::size_t i, std::size_t j, std::size_t k) { return val[static_cast<Eigen::Index>(sh.flat(i, j, k))]; };
    {
        CsvWriter csv(rc.output / "surface.csv", hash, {"S", "v", "r", "value"});
        for (std::size_t k = 0; k < sh.n[2]; ++k)
            for (std::size_t j = 0; j < sh.n[1]; ++j)
                for (std::size_t i = 0; i < sh.n[0]; ++i) csv.row({g.s.nodes[i], g.v.nodes[j], g.r.nodes[k], at(i, j, k)});
    }
    const auto spot = spot_point(rc.grid, rc.model);
    const std::size_t is = g.s.nearest(spot[0]), iv = g.v.nearest(spot[1]), ir = g.r.nearest(spot[2]);
    {
        CsvWriter csv(rc.output / "slice_fixed_r.csv", hash, {"S", "v", "value"});
        for (std::size_t j = 0; j < sh.n[1]; ++j)
            for (std::size_t i = 0; i < sh.n[0]; ++i) csv.row({g.s.nodes[i], g.v.nodes[j], at(i, j, ir)});
    }
    {
        CsvWriter csv(rc.output / "slice_fixed_v.csv", hash, {"S", "r", "value"});
        for (std::size_t k = 0; k < sh.n[2]; ++k)
            for (std::size_t i = 0; i < sh.n[0]; ++i) csv.row({g.s.nodes[i], g.r.nodes[k], at(i, iv, k)});
    }
    {
        CsvWriter csv(rc.output / "slice_fixed_s.csv", hash, {"v", "r", "value"});
        for (std::size_t k = 0; k < sh.n[2]; ++k)
            for (std::size_t j = 0; j < sh.n[1]; ++j) csv.row({g.v.nodes[j], g.r.nodes[k], at(is, j, k)});
    }
    {
        CsvWriter csv(rc.output / "picard.csv", hash, {"tau", "pair", "iterations", "last_change", "contraction", "converged"});
        for (const auto& r : run.report.diagnostics.picard)
            csv.row({r.tau, double(r.pair), double(r.iterations), r.last_change, r.contraction, r.converged ? 1.0 : 0.0});
    }
    const PicardStats ps = picard_stats(run.report.diagnostics);
    {
        CsvWriter csv(rc.output / "summary.csv", hash,
                      {"price", "S0", "v0", "r0", "steps", "picard_solves", "picard_mean_iterations",
                       "picard_max_iterations", "picard_within_two", "intermediate_min"});
        csv.row({run.price, spot[0], spot[1], spot[2], double(run.report.steps), double(ps.solves), ps.mean_iterations,
                 double(ps.max_iterations), ps.within_two, run.report.intermediate_min});
    }
    out << "price=" << fmt(run.price, 10) << " S0=" << spot[0] << " v0=" << spot[1] << " r0=" << spot[2]
        << " runtime_s=" << fmt(run.seconds, 4) << " picard_solves=" << ps.solves
        << " picard_mean_iter=" << fmt(ps.mean_iterations, 4) << " picard_max_iter=" << ps.max_iterations
        << " intermediate_min=" << fmt(run.report.intermediate_min, 4) << " threads=" << thread_count()
        << " config_hash=" << hash << '\n';
    return kExitOk;
}

std::vector<ConvergenceRow> convergence_study(const RunConfig& rc) {
    const auto& co = rc.convergence;
    std::vector<ConvergenceRow> rows;
    for (int level = 0; level < co.levels; ++level) {
        RunConfig r = rc;
        ConvergenceRow row;
        row.level = level;
        if (co.axis == "time") {
            r.solver.dt = co.dt0 / std::pow(2.0, level);
        } else {
            const std::size_t n = (co.n0 - 1) * (std::size_t{1} << level) + 1;
            r.grid.snap_spot = false;
            r.grid.n_s = n;
            if (rc.grid.n_v > 1) r.grid.n_v = n;
            if (rc.grid.n_r > 1) r.grid.n_r = n;
            row.n = n;
        }
        row.dt = r.solver.dt;
        const PriceRun run = run_price(r);
        const auto& s = run.surface.grid.s;
        const std::size_t i = std::clamp<std::size_t>(s.nearest(r.grid.s0), 1, s.size() - 1);
        row.h = s.nodes[i] - s.nodes[i - 1];
        row.value = run.price;
        rows.push_back(row);
    }
    const double finest = rows.back().value;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        rows[k].error = std::abs(rows[k].value - finest);
        rows[k].order = kNaN;
        if (k + 2 < rows.size()) {
            const double d1 = std::abs(rows[k].value - rows[k + 1].value);
            const double d2 = std::abs(rows[k + 1].value - rows[k + 2].value);
            if (d1 > 0.0 && d2 > 0.0) rows[k].order = std::log2(d1 / d2);
        }
    }
    return rows;
}

int cmd_convergence(const RunConfig& rc, std::ostream& out) {
    const auto rows = convergence_study(rc);
    ensure_dir(rc.output);
    CsvWriter csv(rc.output / "convergence.csv", rc.hash(), {"level", "n", "dt", "h", "value", "error", "order"});
    out << "axis=" << rc.convergence.axis << '\n';
    for (const auto& r : rows) {
        csv.row({double(r.level), r.n ? double(r.n) : kNaN, r.dt, r.h, r.value, r.error, r.order});
        out << "level=" << r.level << " n=" << r.n << " dt=" << r.dt << " h=" << fmt(r.h) << " value=" << fmt(r.value, 10)
            << " error=" << fmt(r.error, 4) << " order=" << (std::isnan(r.order) ? std::string("-") : fmt(r.order, 4)) << '\n';
    }
    return kExitOk;
}

namespace {

double median(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    return x[x.size() / 2];
}

double kappa(double t1, double t0, double n1, double n0) {
    if (!(t0 > 0.0) || !(t1 > 0.0) || n1 == n0) return kNaN;
    return std::log(t1 / t0) / std::log(n1 / n0);
}

}  // namespace

std::vector<TimingRow> timing_study(const RunConfig& rc) {
    std::vector<TimingRow> rows;
    for (std::size_t n : rc.timing.sizes) {
        GridSpec gs = rc.grid;
        gs.n_s = gs.n_v = gs.n_r = n;
        const Grid3D g = build_pricing_grid(gs, rc.instrument, rc.model);
        TimingRow row;
        row.n = n;
        row.nodes = g.shape().size();
        const double t = 0.0;
        const DiffusionOperators ops = assemble_operators(rc.model, g, t, {rc.solver.discount});
        SolverConfig cfg = rc.solver;
        cfg.picard_strict = false;
        const Vector v0 = terminal_payoff(rc.instrument, g);
        std::vector<double> td, tj;
        for (int rep = 0; rep < rc.timing.repeats; ++rep) {
            const StepContext ctx{&rc.model, &g, &cfg, nullptr};
            auto t0 = std::chrono::steady_clock::now();
            Vector v = diffusion_step(v0, ops, ops, cfg.dt, ctx);
            td.push_back(seconds_since(t0));
            if (rc.model.jumps) {
                const auto& js = *rc.model.jumps;
                t0 = std::chrono::steady_clock::now();
                for (Axis a : kAxes) v = idio_jump_step(v, a, js.idio(a), cfg.dt, g, rc.jumps);
                v = common_jump_step(v, js, cfg.dt, g, cfg, rc.jumps);
                tj.push_back(seconds_since(t0));
            }
        }
        row.diffusion_seconds = median(td);
        row.jump_seconds = tj.empty() ? kNaN : median(tj);
        rows.push_back(row);
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        rows[k].kappa_diffusion = rows[k].kappa_jump = kNaN;
        if (k == 0) continue;
        const auto n1 = static_cast<double>(rows[k].nodes), n0 = static_cast<double>(rows[k - 1].nodes);
        rows[k].kappa_diffusion = kappa(rows[k].diffusion_seconds, rows[k - 1].diffusion_seconds, n1, n0);
        rows[k].kappa_jump = kappa(rows[k].jump_seconds, rows[k - 1].jump_seconds, n1, n0);
    }
    return rows;
}

int cmd_timing(const RunConfig& rc, std::ostream& out) {
    const auto rows = timing_study(rc);
    ensure_dir(rc.output);
    CsvWriter csv(rc.output / "timing.csv", rc.hash(),
                  {"n", "nodes", "diffusion_seconds", "jump_seconds", "kappa_diffusion", "kappa_jump"});
    for (const auto& r : rows) {
        csv.row({double(r.n), double(r.nodes), r.diffusion_seconds, r.jump_seconds, r.kappa_diffusion, r.kappa_jump});
        out << "n=" << r.n << " nodes=" << r.nodes << " diffusion_s=" << fmt(r.diffusion_seconds, 4)
            << " jump_s=" << fmt(r.jump_seconds, 4) << " kappa_diffusion=" << fmt(r.kappa_diffusion, 3)
            << " kappa_jump=" << fmt(r.kappa_jump, 3) << '\n';
    }
    return kExitOk;
}

namespace {

const char* status(const ValidationCheck& c) {
    if (!c.gating) return c.pass ? "PASS" : "INFO";
    return c.pass ? "PASS" : "FAIL";
}

}  // namespace

int cmd_validate(const RunConfig& rc, std::ostream& out) {
    const auto checks = validation_suite(rc);
    ensure_dir(rc.output);
    CsvWriter csv(rc.output / "validation.csv", rc.hash(), {"check", "status", "detail"});
    bool ok = true;
    std::size_t width = 0;
    for (const auto& c : checks) width = std::max(width, c.name.size());
    for (const auto& c : checks) {
        csv.row_text({c.name, status(c), "\"" + c.detail + "\""});
        out << std::left << std::setw(static_cast<int>(width) + 2) << c.name << status(c) << "  " << c.detail
            << '\n';
        ok = ok && (c.pass || !c.gating);
    }
    return ok ? kExitOk : kExitValidation;
}

}  // namespace lsvj
