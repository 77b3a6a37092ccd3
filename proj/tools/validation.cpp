#include "lsvj/commands.hpp"

#include "lsvj/banded.hpp"

#include <cmath>
#include <sstream>

namespace lsvj {

double idio_spectral_discrepancy(const MeixnerParams& p, double dt, std::size_t n) {
    const double x0 = std::log(100.0);
    const double half_span = 1.0;
    const double h = 2.0 * half_span / static_cast<double>(n - 1);
    Grid3D g;
    g.v.nodes = {1.0};
    g.r.nodes = {1.0};
    g.v.core_end = g.r.core_end = 1;
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double x = x0 - half_span + h * static_cast<double>(i);
        g.s.nodes.push_back(std::exp(x));
        const double z = (x - x0) / 0.1;
        v[static_cast<Eigen::Index>(i)] = std::exp(-z * z);
    }
    g.s.core_end = n;
    const Vector fd = idio_jump_step(v, Axis::S, p, dt, g);
    const auto spec = oracles::spectral_jump_propagate(v, h, p, dt);
    double err = 0.0;
    for (std::size_t i = n / 5; i < n - n / 5; ++i) {
        const auto e = static_cast<Eigen::Index>(i);
        err = std::max(err, std::abs(fd[e] - spec.values[e]));
    }
    return err;
}

std::pair<std::size_t, std::size_t> em_failures_mixed(const ModelSpec& m, const Grid3D& g, double dt,
                                                      MixedVariant variant, double beta_mult) {
    const auto pairs = assemble_mixed(m, g, 0.0);
    std::size_t bad = 0, total = 0;
    for (const auto& p : pairs) {
        const MixedLhs lhs = mixed_lhs_matrices(p, g, dt, variant, beta_mult);
        for (const auto* set : {&lhs.first, &lhs.second})
            for (const auto& mat : *set) {
                ++total;
                if (!em_check(mat).is_em) ++bad;
            }
    }
    return {bad, total};
}

namespace {

std::string str(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

}  // namespace

std::vector<ValidationCheck> validation_suite(const RunConfig& rc) {
    std::vector<ValidationCheck> out;
    out.push_back({"config", true, "parsed and validated; correlation matrix PSD"});

    GridSpec gs = rc.grid;
    gs.n_s = std::min<std::size_t>(gs.n_s, 21);
    gs.n_v = std::min<std::size_t>(gs.n_v, 21);
    gs.n_r = std::min<std::size_t>(gs.n_r, 21);
    const Grid3D g = build_pricing_grid(gs, rc.instrument, rc.model);

    for (MixedVariant variant : {MixedVariant::A, MixedVariant::B}) {
        const auto [bad, total] = em_failures_mixed(rc.model, g, rc.solver.dt, variant, rc.solver.beta_mult);
        out.push_back({std::string("em_mixed_") + (variant == MixedVariant::A ? "A" : "B"), bad == 0,
                       std::to_string(bad) + " of " + std::to_string(total) + " line matrices fail em_check (beta_mult=" +
                           str(rc.solver.beta_mult) + ")"});
    }
    {
        const DiffusionOperators ops = assemble_operators(rc.model, g, 0.0, {rc.solver.discount});
        std::size_t bad = 0, total = 0;
        for (const auto& f : ops.f)
            for (std::size_t l = 0; l < f.line_count(); ++l) {
                Banded a = f.line(l);
                a.affine(1.0, -rc.solver.dt);
                ++total;
                if (!em_check(a).is_em) ++bad;
            }
        out.push_back({"em_implicit_F", bad == 0,
                       std::to_string(bad) + " of " + std::to_string(total) + " matrices I - dt F_k fail em_check",
                       false});
    }
    {
        InstrumentSpec inst = rc.instrument;
        inst.maturity = std::min(inst.maturity, 20.0 * rc.solver.dt);
        SolverConfig cfg = rc.solver;
        cfg.picard_strict = false;
        PricingOptions opt;
        opt.jumps = rc.jumps;
        PricingReport rep;
        bool ran = true;
        std::string why;
        try {
            price(inst, rc.model, g, cfg, opt, &rep);
        } catch (const Error& e) {
            ran = false;
            why = e.what();
        }
        const PicardStats ps = picard_stats(rep.diagnostics);
        out.push_back({"picard_convergence", ran && ps.not_converged == 0,
                       ran ? std::to_string(ps.not_converged) + " of " + std::to_string(ps.solves) +
                                 " solves above tolerance; mean iterations " + str(ps.mean_iterations)
                           : why});
        out.push_back({"positivity", ran && rep.intermediate_min >= -1e-12,
                       ran ? "min over intermediate fields " + str(rep.intermediate_min) : why});
    }
    const auto& d = rc.model.diffusion;
    if (d.b_pow == 0.5 && d.kappa_r.is_constant() && d.theta_r.is_constant() && d.xi_r.is_constant()) {
        ModelSpec m = rc.model;
        m.jumps.reset();
        GridSpec bg;
        bg.n_s = 5;
        bg.n_v = 1;
        bg.n_r = 41;
        InstrumentSpec bond;
        bond.kind = InstrumentKind::ZeroCouponBond;
        bond.maturity = 1.0;
        const Grid3D grid = build_pricing_grid(bg, bond, m);
        SolverConfig cfg = rc.solver;
        cfg.picard_strict = false;
        const PriceSurface ps = zero_coupon_bond(m, grid, cfg, 1.0);
        const auto spot = spot_point(bg, m);
        const double fd = ps.value_at(spot[0], spot[1], spot[2]);
        const double cf = oracles::cir_bond_price(spot[2], d.kappa_r.at(0.0), d.theta_r.at(0.0), d.xi_r.at(0.0), 1.0);
        const double rel = std::abs(fd / cf - 1.0);
        out.push_back({"bond_vs_cir", rel <= 2e-3, "relative gap " + str(rel) + " (fd " + str(fd) + ", closed form " + str(cf) + ")"});
    }
    if (rc.model.jumps) {
        const auto& js = *rc.model.jumps;
        double worst = 0.0;
        for (Axis a : kAxes)
            if (js.idio(a).d > 0.0) worst = std::max(worst, idio_spectral_discrepancy(js.idio(a), 0.01));
        if (js.common.d > 0.0) worst = std::max(worst, idio_spectral_discrepancy(js.common, 0.01));
        out.push_back({"jump_spectral", worst <= 1e-3, "max sup-norm gap " + str(worst)});
    }
    return out;
}

}  // namespace lsvj
