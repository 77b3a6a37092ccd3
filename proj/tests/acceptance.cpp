// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "lsvj/commands.hpp"
#include "lsvj/oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#ifndef LSVJ_CONFIG_DIR
#define LSVJ_CONFIG_DIR "configs"
#endif

using namespace lsvj;

namespace {

namespace tol {
constexpr double kBlackScholesRel = 5e-3;
constexpr double kBlackScholesSeconds = 300.0;
constexpr double kMcStdErrors = 3.0;
constexpr double kMcRel = 1.5e-2;
constexpr double kPositivityFloor = -1e-12;
constexpr int kPositivityDraws = 100;
constexpr int kPositivitySteps = 20;
constexpr double kStabilityDt = 0.05;
constexpr double kSupSlack = 1e-8;
constexpr double kTvSlack = 1e-10;
constexpr double kTimeOrderLo = 1.7;
constexpr double kTimeOrderHi = 2.3;
constexpr double kSpaceOrderB = 1.8;
constexpr double kSpaceOrderA = 1.0;
constexpr double kConvergenceSeconds = 900.0;
constexpr double kPicardTol = 1e-6;
constexpr double kPicardShare = 0.95;
constexpr double kSpectralGap = 1e-3;
constexpr double kCommonGap = 1e-6;
constexpr double kComplexity = 1.3;
constexpr int kEmDraws = 200;
constexpr double kEmViolationMult = 0.5;
constexpr double kLoadingScale = 10.0;
constexpr double kNonzeroDiff = 1e-8;
}  // namespace tol

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::filesystem::path g_configs = LSVJ_CONFIG_DIR;

RunConfig config(const std::string& name) { return load_run_config(g_configs / name); }

std::string num(double x, int digits = 4) {
    std::ostringstream os;
    os << std::setprecision(digits) << x;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Random valid diffusion model; correlations are redrawn until the matrix is PSD.
ModelSpec random_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
    ModelSpec m;
    auto& d = m.diffusion;
    d.q = in(0.0, 0.05);
    d.kappa_v = in(0.5, 3.0);
    d.theta_v = in(0.02, 0.6);
    d.xi_v = in(0.1, 0.6);
    d.kappa_r = in(0.1, 3.0);
    d.theta_r = in(0.01, 0.08);
    d.xi_r = in(0.02, 0.2);
    d.local_vol = LocalVolSurface(in(0.5, 1.5));
    do {
        d.rho_sv = in(-0.9, 0.9);
        d.rho_sr = in(-0.9, 0.9);
        d.rho_vr = in(-0.9, 0.9);
    } while (min_eigenvalue(d.correlation_matrix()) < 0.0);
    m.validate();
    return m;
}

GridSpec cube(std::size_t n, double s_max = 400.0) {
    GridSpec gs;
    gs.n_s = gs.n_v = gs.n_r = n;
    gs.s_max = s_max;
    return gs;
}

/// Call-configuration run shared by criteria 2 and 6.
const PriceRun& call_run() {
    static const PriceRun run = run_price(config("european_call.json"));
    return run;
}

Outcome black_scholes_limit() {
    const RunConfig rc = config("black_scholes.json");
    const auto t0 = std::chrono::steady_clock::now();
    const PriceRun run = run_price(rc);
    const double secs = seconds_since(t0);
    const double cf = oracles::black_scholes_call(100.0, 100.0, 0.05, 0.0, 0.2, 1.0);
    const double rel = std::abs(run.price / cf - 1.0);
    return {rel <= tol::kBlackScholesRel && secs <= tol::kBlackScholesSeconds,
            "fd " + num(run.price, 8) + " closed form " + num(cf, 8) + " rel " + num(rel) + " runtime " +
                num(secs, 3) + " s"};
}

Outcome call_vs_mc() {
    const RunConfig rc = config("european_call.json");
    const PriceRun& run = call_run();
    const auto mc = oracles::mc_price_diffusion(rc.instrument, rc.model, spot_point(rc.grid, rc.model), rc.mc);
    const double gap = std::abs(run.price - mc.price);
    const double rel = gap / mc.price;
    return {gap <= tol::kMcStdErrors * mc.std_error && rel <= tol::kMcRel,
            "fd " + num(run.price, 8) + " mc " + num(mc.price, 8) + " +- " + num(mc.std_error, 3) + " (" +
                num(gap / mc.std_error, 3) + " se, rel " + num(rel) + ")"};
}

Outcome positivity_sweep() {
    std::mt19937_64 rng(20240607);
    int failures = 0;
    double worst = 0.0;
    for (int k = 0; k < tol::kPositivityDraws; ++k) {
        const ModelSpec m = random_model(rng);
        InstrumentSpec inst;
        SolverConfig cfg;
        cfg.dt = 0.01;
        cfg.scheme = k % 2 == 0 ? Scheme::ImplicitA : Scheme::ImplicitB;
        cfg.mixed_variant = k % 2 == 0 ? MixedVariant::A : MixedVariant::B;
        inst.maturity = tol::kPositivitySteps * cfg.dt;
        const Grid3D g = build_pricing_grid(cube(21), inst, m);
        PricingReport rep;
        price(inst, m, g, cfg, {}, &rep);
        worst = std::min(worst, rep.intermediate_min);
        if (rep.intermediate_min < tol::kPositivityFloor) ++failures;
    }
    return {failures == 0, std::to_string(failures) + " of " + std::to_string(tol::kPositivityDraws) +
                               " draws go negative; worst min " + num(worst)};
}

/// Sum over S-lines of the total variation along S.
double total_variation_s(const Vector& v, const Grid3D& g) {
    const Shape3 sh = g.shape();
    double tv = 0.0;
    for (std::size_t k = 0; k < sh.n[2]; ++k)
        for (std::size_t j = 0; j < sh.n[1]; ++j)
            for (std::size_t i = 1; i < sh.n[0]; ++i)
                tv += std::abs(v[static_cast<Eigen::Index>(sh.flat(i, j, k))] -
                               v[static_cast<Eigen::Index>(sh.flat(i - 1, j, k))]);
    return tv;
}

std::vector<double> line_variation(const Vector& v, const Grid3D& g) {
    const Shape3 sh = g.shape();
    std::vector<double> out;
    for (std::size_t k = 0; k < sh.n[2]; ++k)
        for (std::size_t j = 0; j < sh.n[1]; ++j) {
            double tv = 0.0;
            for (std::size_t i = 1; i < sh.n[0]; ++i)
                tv += std::abs(v[static_cast<Eigen::Index>(sh.flat(i, j, k))] -
                               v[static_cast<Eigen::Index>(sh.flat(i - 1, j, k))]);
            out.push_back(tv);
        }
    return out;
}

Outcome large_dt_stability() {
    RunConfig rc = config("double_barrier.json");
    rc.solver.dt = tol::kStabilityDt;
    rc.solver.scheme = Scheme::FullyImplicit;
    rc.solver.rannacher_steps = 0;
    const Grid3D g = build_pricing_grid(rc.grid, rc.instrument, rc.model);
    Vector v = terminal_payoff(rc.instrument, g);
    const double bound = v.cwiseAbs().maxCoeff() + tol::kSupSlack;
    std::vector<double> tv = line_variation(v, g);
    const double tv0 = total_variation_s(v, g);
    double sup = 0.0, worst_growth = 0.0;
    int steps = 0;
    for (double tau = 0.0; tau < rc.instrument.maturity - 1e-12; tau += rc.solver.dt, ++steps) {
        v = splitting_step(v, rc.instrument, rc.model, g, rc.solver, tau, rc.solver.dt, false, {}, nullptr);
        if (!v.allFinite()) return {false, "non-finite values at step " + std::to_string(steps + 1)};
        sup = std::max(sup, v.cwiseAbs().maxCoeff());
        const auto next = line_variation(v, g);
        for (std::size_t l = 0; l < tv.size(); ++l) worst_growth = std::max(worst_growth, next[l] - tv[l]);
        tv = next;
    }
    const bool pass = sup <= bound && worst_growth <= tol::kTvSlack * std::max(1.0, tv0);
    return {pass, std::to_string(steps) + " steps; sup " + num(sup) + " (bound " + num(bound) +
                      "); largest per-line TV growth " + num(worst_growth)};
}

Outcome convergence_orders() {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream detail;
    bool pass = true;
    auto orders = [](const std::vector<ConvergenceRow>& rows) {
        std::vector<double> out;
        for (const auto& r : rows)
            if (std::isfinite(r.order)) out.push_back(r.order);
        return out;
    };
    auto list = [](const std::vector<double>& xs) {
        std::string s;
        for (double x : xs) s += (s.empty() ? "" : ",") + num(x, 3);
        return s;
    };
    {
        const auto t = orders(convergence_study(config("convergence_time.json")));
        bool ok = !t.empty();
        for (double o : t) ok = ok && o >= tol::kTimeOrderLo && o <= tol::kTimeOrderHi;
        pass = pass && ok;
        detail << "time " << list(t) << (ok ? "" : " (out of range)");
    }
    for (MixedVariant variant : {MixedVariant::B, MixedVariant::A}) {
        RunConfig rc = config("convergence_space.json");
        rc.solver.scheme = variant == MixedVariant::B ? Scheme::ImplicitB : Scheme::ImplicitA;
        rc.solver.mixed_variant = variant;
        const auto s = orders(convergence_study(rc));
        const double need = variant == MixedVariant::B ? tol::kSpaceOrderB : tol::kSpaceOrderA;
        bool ok = !s.empty();
        for (double o : s) ok = ok && o >= need;
        pass = pass && ok;
        detail << "; space " << (variant == MixedVariant::B ? "B " : "A ") << list(s) << (ok ? "" : " (low)");
    }
    const double secs = seconds_since(t0);
    detail << "; runtime " << num(secs, 3) << " s";
    return {pass && secs <= tol::kConvergenceSeconds, detail.str()};
}

Outcome picard_behaviour() {
    std::ostringstream detail;
    bool pass = true;
    auto check = [&](const std::string& label, const PriceRun& run) {
        const PicardStats ps = picard_stats(run.report.diagnostics);
        const bool ok = ps.solves > 0 && ps.within_two >= tol::kPicardShare;
        pass = pass && ok;
        detail << (detail.tellp() > 0 ? "; " : "") << label << " " << num(100.0 * ps.within_two, 4) << "% of "
               << ps.solves << " solves in <= 2 iterations (max " << ps.max_iterations << ")";
    };
    check("call", call_run());
    RunConfig rc = config("double_barrier.json");
    rc.solver.picard_tol = tol::kPicardTol;
    check("double barrier", run_price(rc));
    return {pass, detail.str()};
}

Outcome jump_oracles() {
    const RunConfig rc = config("up_and_out_jumps.json");
    const JumpStructure& js = *rc.model.jumps;
    std::ostringstream detail;
    bool pass = true;
    for (Axis a : kAxes) {
        const double gap = idio_spectral_discrepancy(js.idio(a), 0.01);
        pass = pass && gap <= tol::kSpectralGap;
        detail << "row " << "svr"[index_of(a)] << " " << num(gap, 3) << "; ";
    }
    Grid3D g;
    g.s = build_nonuniform_grid(50.0, 150.0, 11, 100.0, 1e9);
    g.v = build_nonuniform_grid(0.02, 0.5, 11, 0.1, 1e9);
    g.r = build_nonuniform_grid(0.01, 0.2, 11, 0.05, 1e9);
    const Shape3 sh = g.shape();
    Vector v(static_cast<Eigen::Index>(sh.size()));
    for (std::size_t p = 0; p < sh.size(); ++p) {
        const auto [i, j, k] = sh.unflat(p);
        v[static_cast<Eigen::Index>(p)] = std::max(g.s.nodes[i] - 100.0, 0.0) * (1.0 + g.v.nodes[j]) + g.r.nodes[k];
    }
    SolverConfig cfg;
    cfg.picard_tol = 1e-12;
    const Vector got = common_jump_step(v, js, 0.01, g, cfg);
    std::array<std::vector<double>, 3> x;
    for (Axis a : kAxes)
        for (double n : g.axis(a).nodes) x[static_cast<std::size_t>(index_of(a))].push_back(std::log(n));
    const Vector want = oracles::dense::common_jump_step(v, x, js.loadings, js.common, 0.01, 10);
    const double gap = (got - want).cwiseAbs().maxCoeff();
    pass = pass && gap <= tol::kCommonGap;
    detail << "common vs dense " << num(gap, 3);
    return {pass, detail.str()};
}

/// Least-squares slope of log t against log N.
double regression_exponent(const std::vector<TimingRow>& rows, double TimingRow::*field) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
        const double x = std::log(static_cast<double>(r.nodes)), y = std::log(r.*field);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome complexity() {
    const auto rows = timing_study(config("timing.json"));
    const double kd = regression_exponent(rows, &TimingRow::diffusion_seconds);
    const double kj = regression_exponent(rows, &TimingRow::jump_seconds);
    std::ostringstream detail;
    detail << "kappa diffusion " << num(kd, 3) << ", jump " << num(kj, 3) << " (seconds per step:";
    for (const auto& r : rows) detail << " " << r.n << "^3 " << num(r.diffusion_seconds, 3) << "/" << num(r.jump_seconds, 3);
    detail << ")";
    return {kd <= tol::kComplexity && kj <= tol::kComplexity, detail.str()};
}

Outcome em_suite() {
    std::mt19937_64 rng(8675309);
    std::size_t bad_a = 0, bad_b = 0, total = 0;
    int draws_failing = 0;
    InstrumentSpec inst;
    for (int k = 0; k < tol::kEmDraws; ++k) {
        const ModelSpec m = random_model(rng);
        const Grid3D g = build_pricing_grid(cube(21), inst, m);
        const auto [a, na] = em_failures_mixed(m, g, 0.01, MixedVariant::A, 10.0);
        const auto [b, nb] = em_failures_mixed(m, g, 0.01, MixedVariant::B, 10.0);
        bad_a += a;
        bad_b += b;
        total += na;
        if (a + b > 0) ++draws_failing;
    }
    std::mt19937_64 vr(1);
    const ModelSpec m = random_model(vr);
    const Grid3D g = build_pricing_grid(cube(21), inst, m);
    const auto va = em_failures_mixed(m, g, 0.01, MixedVariant::A, tol::kEmViolationMult);
    const auto vb = em_failures_mixed(m, g, 0.01, MixedVariant::B, tol::kEmViolationMult);
    const bool caught = va.first + vb.first > 0;
    std::ostringstream detail;
    detail << draws_failing << " of " << tol::kEmDraws << " draws fail; A " << bad_a << " of " << total << ", B "
           << bad_b << " of " << total << " matrices; beta violation "
           << (caught ? "detected" : "not detected") << " (A " << va.first << ", B " << vb.first << " of " << va.second
           << " matrices at beta_mult " << tol::kEmViolationMult << ")";
    return {draws_failing == 0 && caught, detail.str()};
}

Outcome economic_sanity() {
    const RunConfig rc = config("up_and_out_jumps.json");
    const Grid3D g = build_pricing_grid(rc.grid, rc.instrument, rc.model);
    const auto spot = spot_point(rc.grid, rc.model);
    PricingOptions opt;
    opt.jumps = rc.jumps;
    const PriceSurface with = price(rc.instrument, rc.model, g, rc.solver, opt);
    ModelSpec plain = rc.model;
    plain.jumps.reset();
    const PriceSurface without = price(rc.instrument, plain, g, rc.solver, opt);
    ModelSpec scaled = rc.model;
    for (double& b : scaled.jumps->loadings) b *= tol::kLoadingScale;
    const PriceSurface heavy = price(rc.instrument, scaled, g, rc.solver, opt);
    const double diff = (with.values - without.values).cwiseAbs().maxCoeff();
    const double p1 = with.value_at(spot[0], spot[1], spot[2]);
    const double p10 = heavy.value_at(spot[0], spot[1], spot[2]);
    const double p0 = without.value_at(spot[0], spot[1], spot[2]);
    return {diff > tol::kNonzeroDiff && p10 < p1,
            "no jumps " + num(p0, 6) + ", loadings x1 " + num(p1, 6) + ", x10 " + num(p10, 6) +
                "; max |jump - no jump| " + num(diff, 3)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string dir = g_configs.string();
    std::vector<int> only;
    app.add_option("--configs", dir, "Directory holding the run configurations");
    app.add_option("--only", only, "Run only these criteria (1-10)");
    CLI11_PARSE(app, argc, argv);
    g_configs = dir;

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"black-scholes limit", black_scholes_limit},
        {"call vs monte carlo", call_vs_mc},
        {"positivity sweep", positivity_sweep},
        {"stability at dt 0.05", large_dt_stability},
        {"convergence orders", convergence_orders},
        {"picard iterations", picard_behaviour},
        {"jump oracles", jump_oracles},
        {"complexity", complexity},
        {"em-matrix suite", em_suite},
        {"economic sanity", economic_sanity},
    };
    const std::set<int> chosen(only.begin(), only.end());
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!chosen.empty() && !chosen.count(id)) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << id << "  " << criteria[i].first
                  << ": " << o.detail << " [" << num(seconds_since(t0), 3) << " s]" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
