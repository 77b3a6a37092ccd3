#include "lsvj/pricer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lsvj {

InstrumentKind parse_instrument_kind(const std::string& s) {
    if (s == "european-call") return InstrumentKind::EuropeanCall;
    if (s == "european-put") return InstrumentKind::EuropeanPut;
    if (s == "double-barrier-call") return InstrumentKind::DoubleBarrierCall;
    if (s == "up-and-out-call") return InstrumentKind::UpAndOutCall;
    if (s == "zero-coupon-bond") return InstrumentKind::ZeroCouponBond;
    if (s == "gaussian-bump") return InstrumentKind::GaussianBump;
    fail(ErrorKind::Config, "unknown instrument kind '" + s + "'");
}

std::string to_string(InstrumentKind k) {
    switch (k) {
        case InstrumentKind::EuropeanCall: return "european-call";
        case InstrumentKind::EuropeanPut: return "european-put";
        case InstrumentKind::DoubleBarrierCall: return "double-barrier-call";
        case InstrumentKind::UpAndOutCall: return "up-and-out-call";
        case InstrumentKind::ZeroCouponBond: return "zero-coupon-bond";
        case InstrumentKind::GaussianBump: return "gaussian-bump";
    }
    return "?";
}

void InstrumentSpec::validate() const {
    if (!(maturity > 0.0)) fail(ErrorKind::Config, "instrument.maturity must be positive");
    if (kind != InstrumentKind::ZeroCouponBond && !(strike > 0.0))
        fail(ErrorKind::Config, "instrument.strike must be positive");
    if (rebate < 0.0) fail(ErrorKind::Config, "instrument.rebate must be non-negative");
    if (kind == InstrumentKind::UpAndOutCall && !upper_barrier)
        fail(ErrorKind::Config, "up-and-out-call needs upper_barrier");
    if (kind == InstrumentKind::DoubleBarrierCall && (!upper_barrier || !lower_barrier))
        fail(ErrorKind::Config, "double-barrier-call needs both barriers");
    if (lower_barrier && upper_barrier && !(*lower_barrier < *upper_barrier))
        fail(ErrorKind::Config, "lower_barrier must be below upper_barrier");
    if (lower_barrier && !(*lower_barrier > 0.0)) fail(ErrorKind::Config, "lower_barrier must be positive");
    if (kind == InstrumentKind::GaussianBump && !(bump_width > 0.0))
        fail(ErrorKind::Config, "instrument.bump_width must be positive");
}

void GridSpec::validate() const {
    if (n_s < 5 || n_v < 1 || n_r < 1) fail(ErrorKind::Config, "grid: n_s must be >= 5 and n_v, n_r >= 1");
    if ((n_v > 1 && n_v < 5) || (n_r > 1 && n_r < 5)) fail(ErrorKind::Config, "grid: n_v and n_r must be 1 or >= 5");
    if (!(s_max > 0.0)) fail(ErrorKind::Config, "grid.s_max must be positive");
    if (v_max < 0.0 || r_max < 0.0) fail(ErrorKind::Config, "grid.v_max and grid.r_max must be non-negative");
    if (ghost_count < 2 || ghost_count > 3) fail(ErrorKind::Config, "grid.ghost_count must be 2 or 3");
    if (!(s0 > 0.0) || s0 >= s_max) fail(ErrorKind::Config, "grid.s0 must lie inside (0, s_max)");
}

std::array<double, 3> spot_point(const GridSpec& gs, const ModelSpec& m) {
    return {gs.s0, gs.v0 >= 0.0 ? gs.v0 : m.diffusion.theta_v.at(0.0), gs.r0 >= 0.0 ? gs.r0 : m.diffusion.theta_r.at(0.0)};
}

namespace {

Grid1D single_node(double x) {
    Grid1D g;
    g.nodes = {x};
    g.core_begin = 0;
    g.core_end = 1;
    return g;
}

Grid1D snapped(Grid1D g, double x, bool snap) {
    if (!snap || x <= g.lo() || x >= g.hi()) return g;
    return snap_to_node(g, x).grid;
}

bool axis_has_jumps(const ModelSpec& m, Axis a) {
    if (!m.jumps) return false;
    const auto& js = *m.jumps;
    return js.idio(a).d > 0.0 || js.idio(a).m != 0.0 ||
           ((js.common.d > 0.0 || js.common.m != 0.0) && js.loading(a) != 0.0);
}

}  // namespace

Grid3D build_pricing_grid(const GridSpec& gs, const InstrumentSpec& inst, const ModelSpec& m) {
    gs.validate();
    const auto spot = spot_point(gs, m);
    Grid3D g;

    double focus = inst.strike;
    if (inst.kind == InstrumentKind::ZeroCouponBond) focus = gs.s0;
    if (inst.lower_barrier && inst.upper_barrier) focus = 0.5 * (*inst.lower_barrier + *inst.upper_barrier);
    focus = std::clamp(focus, 0.0, gs.s_max);
    const double s_den = gs.s_density > 0.0 ? gs.s_density : 0.2 * std::max(focus, 1e-3);
    const bool knock_up = inst.upper_barrier && (inst.kind == InstrumentKind::DoubleBarrierCall ||
                                                 inst.kind == InstrumentKind::UpAndOutCall);
    const double s_hi = knock_up ? std::min(gs.s_max, *inst.upper_barrier) : gs.s_max;
    g.s = snapped(build_nonuniform_grid(0.0, s_hi, gs.n_s, std::min(focus, s_hi), s_den), spot[0], gs.snap_spot);
    if (inst.kind == InstrumentKind::DoubleBarrierCall || inst.kind == InstrumentKind::UpAndOutCall) {
        if (inst.lower_barrier && inst.kind == InstrumentKind::DoubleBarrierCall)
            g.s = add_barrier_ghosts(g.s, *inst.lower_barrier, BarrierSide::Below, gs.ghost_count);
        if (inst.upper_barrier) g.s = add_barrier_ghosts(g.s, *inst.upper_barrier, BarrierSide::Above, gs.ghost_count);
    }

    const double theta_v = m.diffusion.theta_v.at(0.0);
    const double theta_r = m.diffusion.theta_r.at(0.0);
    if (gs.n_v == 1) {
        g.v = single_node(spot[1]);
    } else {
        const double vmax = gs.v_max > 0.0 ? gs.v_max : 5.0 * theta_v;
        const double vden = gs.v_density > 0.0 ? gs.v_density : vmax / 10.0;
        g.v = snapped(build_nonuniform_grid(0.0, vmax, gs.n_v, 0.0, vden), spot[1], gs.snap_spot);
    }
    if (gs.n_r == 1) {
        g.r = single_node(spot[2]);
    } else {
        const double rmax = gs.r_max > 0.0 ? gs.r_max : 5.0 * theta_r;
        const double rden = gs.r_density > 0.0 ? gs.r_density : rmax / 10.0;
        g.r = snapped(build_nonuniform_grid(0.0, rmax, gs.n_r, std::min(theta_r, rmax), rden), spot[2], gs.snap_spot);
    }

    if (axis_has_jumps(m, Axis::S)) g.s = extend_jump_grid(g.s, gs.jump_extra);
    if (axis_has_jumps(m, Axis::V) && g.v.size() > 1) g.v = extend_jump_grid(g.v, std::max<std::size_t>(gs.jump_extra / 5, 1));
    if (axis_has_jumps(m, Axis::R) && g.r.size() > 1) g.r = extend_jump_grid(g.r, std::max<std::size_t>(gs.jump_extra / 5, 1));
    g.validate();
    return g;
}

Vector terminal_payoff(const InstrumentSpec& inst, const Grid3D& g) {
    inst.validate();
    const Shape3 sh = g.shape();
    Vector out(static_cast<Eigen::Index>(sh.size()));
    for (std::size_t p = 0; p < sh.size(); ++p) {
        const double s = g.s.nodes[sh.unflat(p)[0]];
        double val = 0.0;
        switch (inst.kind) {
            case InstrumentKind::EuropeanCall:
            case InstrumentKind::DoubleBarrierCall:
            case InstrumentKind::UpAndOutCall: val = std::max(s - inst.strike, 0.0); break;
            case InstrumentKind::EuropeanPut: val = std::max(inst.strike - s, 0.0); break;
            case InstrumentKind::ZeroCouponBond: val = 1.0; break;
            case InstrumentKind::GaussianBump: {
                const double z = (s - inst.strike) / inst.bump_width;
                val = std::exp(-z * z);
                break;
            }
        }
        out[static_cast<Eigen::Index>(p)] = val;
    }
    apply_boundary_conditions(out, inst, g, 0.0);
    return out;
}

void apply_boundary_conditions(Vector& v, const InstrumentSpec& inst, const Grid3D& g, double /*tau*/) {
    const Shape3 sh = g.shape();
    const auto& s = g.s.nodes;
    const std::size_t ns = s.size();
    const bool knock_up = inst.upper_barrier && (inst.kind == InstrumentKind::UpAndOutCall ||
                                                 inst.kind == InstrumentKind::DoubleBarrierCall);
    const bool knock_down = inst.lower_barrier && inst.kind == InstrumentKind::DoubleBarrierCall;
    const bool linear_top = !knock_up && ns >= 3 && inst.kind != InstrumentKind::ZeroCouponBond;
    const double ratio = linear_top ? (s[ns - 1] - s[ns - 2]) / (s[ns - 2] - s[ns - 3]) : 0.0;
    for (std::size_t k = 0; k < sh.n[2]; ++k)
        for (std::size_t j = 0; j < sh.n[1]; ++j) {
            const std::size_t base = sh.flat(0, j, k);
            for (std::size_t i = 0; i < ns; ++i) {
                if ((knock_up && s[i] >= *inst.upper_barrier) || (knock_down && s[i] <= *inst.lower_barrier))
                    v[static_cast<Eigen::Index>(base + i)] = inst.rebate;
            }
            if (linear_top) {
                const auto a = static_cast<Eigen::Index>(base + ns - 3);
                v[a + 2] = v[a + 1] + (v[a + 1] - v[a]) * ratio;
            }
        }
}

namespace {

/// Lagrange weights on up to four nodes of `x` around `t`.
std::vector<std::pair<std::size_t, double>> lagrange(const std::vector<double>& x, double t) {
    const std::size_t n = x.size();
    if (n == 1) return {{0, 1.0}};
    const std::size_t m = std::min<std::size_t>(4, n);
    std::size_t hi = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), t) - x.begin());
    hi = std::clamp<std::size_t>(hi, 1, n - 1);
    long start = static_cast<long>(hi) - static_cast<long>(m / 2);
    start = std::clamp<long>(start, 0, static_cast<long>(n - m));
    std::vector<std::pair<std::size_t, double>> w;
    for (std::size_t a = 0; a < m; ++a) {
        const std::size_t ia = static_cast<std::size_t>(start) + a;
        double l = 1.0;
        for (std::size_t b = 0; b < m; ++b) {
            const std::size_t ib = static_cast<std::size_t>(start) + b;
            if (ib != ia) l *= (t - x[ib]) / (x[ia] - x[ib]);
        }
        w.emplace_back(ia, l);
    }
    return w;
}

}  // namespace

double PriceSurface::value_at(double s, double v, double r) const {
    const Shape3 sh = grid.shape();
    const auto ws = lagrange(grid.s.nodes, s);
    const auto wv = lagrange(grid.v.nodes, v);
    const auto wr = lagrange(grid.r.nodes, r);
    double acc = 0.0;
    for (const auto& [k, a] : wr)
        for (const auto& [j, b] : wv)
            for (const auto& [i, c] : ws) acc += a * b * c * values[static_cast<Eigen::Index>(sh.flat(i, j, k))];
    return acc;
}

namespace {

bool time_homogeneous(const ModelSpec& m) {
    const auto& d = m.diffusion;
    return d.kappa_v.is_constant() && d.theta_v.is_constant() && d.xi_v.is_constant() && d.kappa_r.is_constant() &&
           d.theta_r.is_constant() && d.xi_r.is_constant() && d.local_vol.t_nodes().size() <= 1;
}

/// Assembles operators on demand; time-homogeneous models assemble once.
class OperatorCache {
public:
    OperatorCache(const ModelSpec& m, const Grid3D& g, const SolverConfig& cfg)
        : m_(m), g_(g), opt_{cfg.discount}, homogeneous_(time_homogeneous(m)) {}

    const DiffusionOperators& at(double t) {
        const double key = homogeneous_ ? 0.0 : t;
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        if (cache_.size() > 4) cache_.clear();
        return cache_.emplace(key, assemble_operators(m_, g_, t, opt_)).first->second;
    }

private:
    const ModelSpec& m_;
    const Grid3D& g_;
    AssemblyOptions opt_;
    bool homogeneous_;
    std::map<double, DiffusionOperators> cache_;
};

struct StageRunner {
    const InstrumentSpec& inst;
    const ModelSpec& m;
    const Grid3D& g;
    const SolverConfig& cfg;
    const PricingOptions& opt;
    PricingReport* report;
    OperatorCache& cache;
    double T;
    PicardWarmStart* diffusion_warm = nullptr;
    PicardWarmStart* jump_warm = nullptr;

    void finish(Vector& v, double tau) const {
        apply_boundary_conditions(v, inst, g, tau);
        if (!v.allFinite()) fail(ErrorKind::Solver, "non-finite values in the solution");
        if (report && opt.track_intermediate) report->intermediate_min = std::min(report->intermediate_min, v.minCoeff());
    }

    void diffusion(Vector& v, double tau, double h, bool damped, int half) const {
        const StepContext ctx{&m, &g, &cfg, report ? &report->diagnostics : nullptr, diffusion_warm, half};
        const DiffusionOperators& ops0 = cache.at(T - tau);
        const DiffusionOperators& ops1 = cache.at(T - tau - h);
        v = diffusion_step(v, ops0, ops1, h, ctx, tau, damped);
        finish(v, tau + h);
    }

    void idio(Vector& v, Axis a, double tau, double h) const {
        if (!m.jumps) return;
        const MeixnerParams& p = m.jumps->idio(a);
        if (p.d == 0.0 && p.m == 0.0) return;
        v = idio_jump_step(v, a, p, h, g, opt.jumps);
        finish(v, tau);
    }

    void common(Vector& v, double tau, double h) const {
        if (!m.jumps) return;
        const auto& js = *m.jumps;
        if (js.common.d == 0.0 && js.common.m == 0.0) return;
        v = common_jump_step(v, js, h, g, cfg, opt.jumps, report ? &report->diagnostics : nullptr, jump_warm);
        finish(v, tau);
    }
};

/// Diffusion halves around the jump stages, or jump halves around the
/// diffusion when reversed.
void strang_step(const StageRunner& run, Vector& v, double tau, double h, bool damped, bool reverse) {
    const double h2 = 0.5 * h;
    if (!reverse) {
        run.diffusion(v, tau, h2, damped, 0);
        for (Axis a : {Axis::S, Axis::V, Axis::R}) run.idio(v, a, tau + h2, h2);
        run.common(v, tau + h2, h);
        for (Axis a : {Axis::R, Axis::V, Axis::S}) run.idio(v, a, tau + h2, h2);
        run.diffusion(v, tau + h2, h2, damped, 1);
    } else {
        run.common(v, tau, h2);
        for (Axis a : {Axis::S, Axis::V, Axis::R}) run.idio(v, a, tau, h2);
        run.diffusion(v, tau, h2, damped, 0);
        run.diffusion(v, tau + h2, h2, damped, 1);
        for (Axis a : {Axis::R, Axis::V, Axis::S}) run.idio(v, a, tau + h2, h2);
        run.common(v, tau + h2, h2);
    }
}

}  // namespace

Vector splitting_step(const Vector& v, const InstrumentSpec& inst, const ModelSpec& m, const Grid3D& g,
                      const SolverConfig& cfg, double tau, double dt, bool damped, const PricingOptions& opt,
                      PricingReport* report) {
    OperatorCache cache(m, g, cfg);
    const StageRunner run{inst, m, g, cfg, opt, report, cache, inst.maturity};
    Vector out = v;
    strang_step(run, out, tau, dt, damped, opt.reverse_splitting);
    return out;
}

PriceSurface price(const InstrumentSpec& inst, const ModelSpec& m, const Grid3D& g, const SolverConfig& cfg,
                   const PricingOptions& opt, PricingReport* report) {
    inst.validate();
    m.validate();
    g.validate();
    cfg.validate();
    Vector v = terminal_payoff(inst, g);
    if (report) {
        report->intermediate_min = v.minCoeff();
        report->steps = 0;
    }
    OperatorCache cache(m, g, cfg);
    PicardWarmStart diffusion_warm, jump_warm;
    const StageRunner run{inst, m, g, cfg, opt, report, cache, inst.maturity, &diffusion_warm, &jump_warm};
    const double T = inst.maturity;
    const auto steps = static_cast<std::size_t>(std::ceil(T / cfg.dt - 1e-9));
    double tau = 0.0;
    for (std::size_t n = 0; n < steps; ++n) {
        const double h = std::min(cfg.dt, T - tau);
        if (!(h > 0.0)) break;
        strang_step(run, v, tau, h, static_cast<int>(n) < cfg.rannacher_steps, opt.reverse_splitting);
        tau += h;
        if (report) {
            report->steps = n + 1;
            report->diagnostics.step_tau.push_back(tau);
            report->diagnostics.step_min.push_back(v.minCoeff());
            report->diagnostics.step_max.push_back(v.maxCoeff());
        }
    }
    PriceSurface surf;
    surf.values = std::move(v);
    surf.grid = g;
    surf.tau = T;
    return surf;
}

PriceSurface zero_coupon_bond(const ModelSpec& m, const Grid3D& g, const SolverConfig& cfg, double T,
                              PricingReport* report) {
    InstrumentSpec bond;
    bond.kind = InstrumentKind::ZeroCouponBond;
    bond.maturity = T;
    return price(bond, m, g, cfg, {}, report);
}

}  // namespace lsvj
