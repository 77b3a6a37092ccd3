#include "lsvj/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace lsvj {

Scheme parse_scheme(const std::string& s) {
    if (s == "hv-explicit-mixed") return Scheme::HvExplicitMixed;
    if (s == "implicit-A") return Scheme::ImplicitA;
    if (s == "implicit-B") return Scheme::ImplicitB;
    if (s == "fully-implicit") return Scheme::FullyImplicit;
    fail(ErrorKind::Config, "unknown scheme '" + s + "'");
}

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::HvExplicitMixed: return "hv-explicit-mixed";
        case Scheme::ImplicitA: return "implicit-A";
        case Scheme::ImplicitB: return "implicit-B";
        case Scheme::FullyImplicit: return "fully-implicit";
    }
    return "?";
}

void SolverConfig::validate() const {
    if (!(dt > 0.0)) fail(ErrorKind::Config, "solver.dt must be positive");
    if (!(theta > 0.0 && theta <= 1.0)) fail(ErrorKind::Config, "solver.theta must lie in (0, 1]");
    if (!(beta_mult > 0.0)) fail(ErrorKind::Config, "solver.beta_mult must be positive");
    if (!(picard_tol > 0.0)) fail(ErrorKind::Config, "solver.picard_tol must be positive");
    if (picard_max < 1) fail(ErrorKind::Config, "solver.picard_max must be at least 1");
    if (picard_predictor < 0 || picard_predictor > 4) fail(ErrorKind::Config, "solver.picard_predictor must be in 0..4");
    if (rannacher_steps < 0) fail(ErrorKind::Config, "solver.rannacher_steps must be non-negative");
}

void Diagnostics::write_picard_csv(std::ostream& os) const {
    os << "tau,pair,iterations,last_change,contraction,converged\n";
    for (const auto& r : picard)
        os << r.tau << ',' << r.pair << ',' << r.iterations << ',' << r.last_change << ',' << r.contraction << ','
           << (r.converged ? 1 : 0) << '\n';
}

namespace {

/// One-sided derivative weights that never switch side; the two end rows of
/// the axis are left empty so the mixed term vanishes on the boundary.
Weights one_sided(const std::vector<double>& x, std::size_t i, Dir dir, int order) {
    const std::size_t n = x.size();
    if (n < 3 || i == 0 || i + 1 == n) return {};
    if (dir == Dir::Forward) return (order == 2 && i + 2 < n) ? weights_first_order2(x, i, dir) : weights_first_order1(x, i, dir);
    return (order == 2 && i >= 2) ? weights_first_order2(x, i, dir) : weights_first_order1(x, i, dir);
}

/// coef[p] * D along axis a.
AxisOperator scaled_one_sided(const Grid3D& g, Axis a, Dir dir, int order, const Vector& coef) {
    const Shape3 sh = g.shape();
    AxisOperator op(sh, a);
    const auto& x = g.axis(a).nodes;
    const auto ax = static_cast<std::size_t>(index_of(a));
    for (std::size_t p = 0; p < sh.size(); ++p) {
        const double c = coef[static_cast<Eigen::Index>(p)];
        if (c == 0.0) continue;
        Weights w = one_sided(x, sh.unflat(p)[ax], dir, order);
        for (auto& e : w) e *= c;
        op.at(p) = w;
    }
    return op;
}

double local_step(const std::vector<double>& x, std::size_t i) {
    const std::size_t n = x.size();
    if (n < 2) return 1.0;
    if (i == 0) return x[1] - x[0];
    if (i + 1 == n) return x[n - 1] - x[n - 2];
    return 0.5 * (x[i + 1] - x[i - 1]);
}

Axis third_axis(Axis a1, Axis a2) { return static_cast<Axis>(3 - index_of(a1) - index_of(a2)); }

/// Picard shifts P (along a1) and Q (along a2) per node.
void picard_shifts(const MixedPair& p, const Grid3D& g, double dt, const SolverConfig& cfg, Vector& P, Vector& Q) {
    const Shape3 sh = g.shape();
    const auto n = static_cast<Eigen::Index>(sh.size());
    P = Vector::Ones(n);
    Q = Vector::Ones(n);
    if (cfg.picard_scaling == PicardScaling::Unit) return;
    const Axis a3 = third_axis(p.a1, p.a2);
    const auto i1 = static_cast<std::size_t>(index_of(p.a1));
    const auto i2 = static_cast<std::size_t>(index_of(p.a2));
    const auto i3 = static_cast<std::size_t>(index_of(a3));
    std::vector<double> slice_beta(sh.extent(a3), 0.0);
    for (std::size_t q = 0; q < sh.size(); ++q) {
        const auto e = static_cast<Eigen::Index>(q);
        auto& b = slice_beta[sh.unflat(q)[i3]];
        b = std::max(b, std::abs(p.w2[e]) + std::abs(p.rho) * std::abs(p.w1[e]));
    }
    const double sdt = std::sqrt(dt);
    for (std::size_t q = 0; q < sh.size(); ++q) {
        const auto idx = sh.unflat(q);
        const double beta = cfg.beta_mult * slice_beta[idx[i3]];
        const auto e = static_cast<Eigen::Index>(q);
        P[e] = beta * sdt / local_step(g.axis(p.a1).nodes, idx[i1]);
        Q[e] = beta * sdt / local_step(g.axis(p.a2).nodes, idx[i2]);
    }
}

double sup_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

double choose_beta(const MixedPair& p, double beta_mult) {
    if (p.w1.size() == 0) return 0.0;
    const double m = (p.w2.cwiseAbs() + std::abs(p.rho) * p.w1.cwiseAbs()).maxCoeff();
    return beta_mult * m;
}

double choose_beta(const ModelSpec& m, const Grid3D& g, double t, int pair, double beta_mult) {
    if (pair < 0 || pair > 2) fail(ErrorKind::Domain, "choose_beta: pair index must be 0, 1 or 2");
    return choose_beta(assemble_mixed(m, g, t)[static_cast<std::size_t>(pair)], beta_mult);
}

Vector mixed_step(const Vector& v_in, const MixedPair& p, double dt, MixedVariant variant, const StepContext& ctx,
                  double tau, int pair_index) {
    if (!p.active()) return v_in;
    const Grid3D& g = *ctx.grid;
    const SolverConfig& cfg = *ctx.cfg;
    const int order = variant == MixedVariant::A ? 1 : 2;
    const double sdt = std::sqrt(dt);
    const Dir d1 = p.rho >= 0.0 ? Dir::Forward : Dir::Backward;

    const Vector c1 = (sdt * p.rho) * p.w1;
    const Vector c2 = sdt * p.w2;
    const AxisOperator X = scaled_one_sided(g, p.a1, d1, order, c1);
    const AxisOperator Y = scaled_one_sided(g, p.a2, Dir::Backward, order, c2);

    Vector P, Q;
    picard_shifts(p, g, dt, cfg, P, Q);
    const Vector PQm1 = (P.array() * Q.array() - 1.0).matrix();

    const int key = 3 * ctx.slot + pair_index;
    Vector v = v_in;
    const Vector* warm = nullptr;
    if (ctx.warm) {
        auto it = ctx.warm->delta.find(key);
        if (it != ctx.warm->delta.end() && it->second.size() == v_in.size()) warm = &it->second;
    }
    {
        Vector term = v_in;
        for (int o = 0; o < cfg.picard_predictor; ++o) {
            term = X * (Y * term);
            v += term;
        }
    }
    if (warm) {
        // keep whichever first iterate has the smaller residual of (1 - XY) V = v_in
        auto residual = [&](const Vector& u) { return sup_norm(v_in - u + X * (Y * u)); };
        Vector alt = v_in + *warm;
        if (residual(alt) < residual(v)) v.swap(alt);
    }

    PicardRecord rec;
    rec.tau = tau;
    rec.pair = pair_index;
    rec.converged = false;
    double prev_change = 0.0;
    Vector xv, yv, next;
    for (int k = 1; k <= cfg.picard_max; ++k) {
        X.apply(v, xv);
        Y.apply(v, yv);
        next = v_in.array() + PQm1.array() * v.array() + P.array() * yv.array() - Q.array() * xv.array();
        Y.solve(Q, 1.0, next);
        X.solve(P, -1.0, next);
        const double change = sup_norm(next - v);
        v.swap(next);
        rec.iterations = k;
        rec.contraction = prev_change > 0.0 ? change / prev_change : 0.0;
        rec.last_change = change;
        prev_change = change;
        if (!v.allFinite()) fail(ErrorKind::Solver, "mixed step: non-finite Picard iterate");
        if (change <= cfg.picard_tol * std::max(sup_norm(v), std::numeric_limits<double>::min())) {
            rec.converged = true;
            break;
        }
    }
    if (ctx.diag) ctx.diag->picard.push_back(rec);
    if (ctx.warm) ctx.warm->delta[key] = v - v_in;
    if (!rec.converged && cfg.picard_strict)
        fail(ErrorKind::Solver, "mixed step: Picard iterations did not converge within picard_max");
    return v;
}

MixedLhs mixed_lhs_matrices(const MixedPair& p, const Grid3D& g, double dt, MixedVariant variant, double beta_mult) {
    MixedLhs out;
    if (!p.active()) return out;
    const int order = variant == MixedVariant::A ? 1 : 2;
    const double sdt = std::sqrt(dt);
    const Dir d1 = p.rho >= 0.0 ? Dir::Forward : Dir::Backward;
    const AxisOperator X = scaled_one_sided(g, p.a1, d1, order, Vector((sdt * p.rho) * p.w1));
    const AxisOperator Y = scaled_one_sided(g, p.a2, Dir::Backward, order, Vector(sdt * p.w2));
    SolverConfig shifted;
    shifted.picard_scaling = PicardScaling::Shifted;
    shifted.beta_mult = beta_mult;
    Vector P, Q;
    picard_shifts(p, g, dt, shifted, P, Q);
    auto lines = [](const AxisOperator& op, const Vector& shift, double sign) {
        std::vector<Banded> result;
        for (std::size_t l = 0; l < op.line_count(); ++l) {
            Banded m = op.line(l);
            m *= sign;
            for (std::size_t i = 0; i < m.size(); ++i)
                m.at(i, 0) += shift[static_cast<Eigen::Index>(op.line_base(l) + i * op.line_stride())];
            result.push_back(std::move(m));
        }
        return result;
    };
    out.first = lines(X, P, -1.0);
    out.second = lines(Y, Q, 1.0);
    return out;
}

Vector mixed_step_scheme_A(const Vector& v_in, const MixedPair& p, double dt, const StepContext& ctx) {
    return mixed_step(v_in, p, dt, MixedVariant::A, ctx);
}

Vector mixed_step_scheme_B(const Vector& v_in, const MixedPair& p, double dt, const StepContext& ctx) {
    return mixed_step(v_in, p, dt, MixedVariant::B, ctx);
}

Vector mixed_split(const Vector& v, const DiffusionOperators& ops, double dt, MixedVariant variant,
                   const StepContext& ctx, double tau) {
    Vector out = v;
    for (int k = 0; k < 3; ++k) out = mixed_step(out, ops.mixed[static_cast<std::size_t>(k)], dt, variant, ctx, tau, k);
    return out;
}

Vector fully_implicit_stage(const Vector& v, const DiffusionOperators& ops, double dt, MixedVariant variant,
                            const StepContext& ctx, double tau) {
    Vector out = mixed_split(v, ops, dt, variant, ctx, tau);
    for (const auto& f : ops.f) f.solve(1.0, -dt, out);
    return out;
}

namespace {

/// Stages Y_1..Y_3 (or their corrected counterparts) of the HV skeleton:
/// [1 - theta dt F_j(ops1)] Y_j = Y_{j-1} - theta dt F_j(ref_ops) ref.
Vector implicit_sweeps(Vector y, const DiffusionOperators& ops1, const DiffusionOperators& ref_ops, const Vector& ref,
                       double theta_dt) {
    for (std::size_t k = 0; k < 3; ++k) {
        y -= theta_dt * (ref_ops.f[k] * ref);
        ops1.f[k].solve(1.0, -theta_dt, y);
    }
    return y;
}

}  // namespace

Vector hv_step(const Vector& v, const DiffusionOperators& ops0, const DiffusionOperators& ops1, double dt,
               const StepContext& ctx) {
    const double th = ctx.cfg->theta * dt;
    const Vector Fv = apply_F0(ops0, v) + apply_F123(ops0, v);
    const Vector y0 = v + dt * Fv;
    const Vector y3 = implicit_sweeps(y0, ops1, ops0, v, th);
    const Vector FY3 = apply_F0(ops1, y3) + apply_F123(ops1, y3);
    const Vector yt0 = y0 + 0.5 * dt * (FY3 - Fv);
    return implicit_sweeps(yt0, ops1, ops1, y3, th);
}

namespace {

template <typename Predictor>
Vector hv_skeleton(const Vector& v, const DiffusionOperators& ops0, const DiffusionOperators& ops1, double dt,
                   const StepContext& ctx, Predictor&& predictor) {
    const double th = ctx.cfg->theta * dt;
    StepContext first = ctx;
    StepContext second = ctx;
    first.slot = 2 * ctx.slot;
    second.slot = 2 * ctx.slot + 1;
    const Vector y0 = predictor(v, ops0, first);
    const Vector y3 = implicit_sweeps(y0, ops1, ops0, v, th);
    const Vector s3 = predictor(y3, ops1, second);
    const Vector yt0 = y0 + 0.5 * (s3 - y0 - y3 + v);
    return implicit_sweeps(yt0, ops1, ops1, y3, th);
}

}  // namespace

Vector hv_with_implicit_mixed(const Vector& v, const DiffusionOperators& ops0, const DiffusionOperators& ops1,
                              double dt, MixedVariant variant, const StepContext& ctx, double tau) {
    return hv_skeleton(v, ops0, ops1, dt, ctx, [&](const Vector& x, const DiffusionOperators& ops, const StepContext& c) {
        const Vector m = mixed_split(x, ops, dt, variant, c, tau);
        return Vector(m + dt * apply_F123(ops, m));
    });
}

Vector fully_implicit_step(const Vector& v, const DiffusionOperators& ops0, const DiffusionOperators& ops1, double dt,
                           const StepContext& ctx, double tau) {
    const MixedVariant variant = ctx.cfg->mixed_variant;
    return hv_skeleton(v, ops0, ops1, dt, ctx, [&](const Vector& x, const DiffusionOperators& ops, const StepContext& c) {
        return fully_implicit_stage(x, ops, dt, variant, c, tau);
    });
}

Vector diffusion_step(const Vector& v, const DiffusionOperators& ops0, const DiffusionOperators& ops1, double dt,
                      const StepContext& ctx, double tau, bool damped) {
    if (damped) {
        const MixedVariant variant = ctx.cfg->mixed_variant;
        StepContext first = ctx;
        StepContext second = ctx;
        first.slot = 2 * ctx.slot;
        second.slot = 2 * ctx.slot + 1;
        const Vector half = fully_implicit_stage(v, ops1, 0.5 * dt, variant, first, tau);
        return fully_implicit_stage(half, ops1, 0.5 * dt, variant, second, tau);
    }
    switch (ctx.cfg->scheme) {
        case Scheme::HvExplicitMixed: return hv_step(v, ops0, ops1, dt, ctx);
        case Scheme::ImplicitA: return hv_with_implicit_mixed(v, ops0, ops1, dt, MixedVariant::A, ctx, tau);
        case Scheme::ImplicitB: return hv_with_implicit_mixed(v, ops0, ops1, dt, MixedVariant::B, ctx, tau);
        case Scheme::FullyImplicit: return fully_implicit_step(v, ops0, ops1, dt, ctx, tau);
    }
    return v;
}

}  // namespace lsvj
