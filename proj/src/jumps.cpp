#include "lsvj/jumps.hpp"

#include "lsvj/stencils.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace lsvj {

JumpProductPlan plan_jump_product(const MeixnerParams& p, double dt, int M) {
    if (!(dt > 0.0)) fail(ErrorKind::Domain, "plan_jump_product: dt must be positive");
    if (M < 1) fail(ErrorKind::Domain, "plan_jump_product: M must be at least 1");
    JumpProductPlan plan;
    plan.M = M;
    plan.kappa = 2.0 * p.d * dt;
    plan.substeps = plan.kappa >= 1.0 ? static_cast<int>(std::floor(plan.kappa)) + 1 : 1;
    plan.sub_dt = dt / plan.substeps;
    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    for (int n = 1; n <= M; ++n) {
        const double h = n - 0.5;
        const double T = p.a * p.a / (four_pi2 * h * h);
        plan.T.push_back(T);
        plan.K.push_back(T / (plan.sub_dt * plan.sub_dt));
    }
    return plan;
}

void JumpProductPlan::write(std::ostream& os) const {
    os << "kappa," << kappa << "\nsubsteps," << substeps << "\nsub_dt," << sub_dt << "\nn,T_n,K_n\n";
    for (std::size_t n = 0; n < T.size(); ++n) os << n + 1 << ',' << T[n] << ',' << K[n] << '\n';
}

LogBox make_log_box(const Grid3D& g) {
    LogBox box;
    box.full = g.shape();
    for (Axis a : kAxes) {
        const auto& nodes = g.axis(a).nodes;
        std::size_t b = 0;
        while (b < nodes.size() && !(nodes[b] > 0.0)) ++b;
        if (b == nodes.size()) fail(ErrorKind::Domain, std::string("jump grid: no positive nodes on axis ") + axis_name(a));
        const auto ax = static_cast<std::size_t>(index_of(a));
        box.begin[ax] = b;
        box.shape.n[ax] = nodes.size() - b;
        Grid1D lg;
        for (std::size_t i = b; i < nodes.size(); ++i) lg.nodes.push_back(std::log(nodes[i]));
        lg.core_begin = 0;
        lg.core_end = lg.nodes.size();
        box.log_grid.axis(a) = std::move(lg);
    }
    return box;
}

Vector LogBox::gather(const Vector& v) const {
    Vector out(static_cast<Eigen::Index>(shape.size()));
    for (std::size_t k = 0; k < shape.n[2]; ++k)
        for (std::size_t j = 0; j < shape.n[1]; ++j)
            for (std::size_t i = 0; i < shape.n[0]; ++i)
                out[static_cast<Eigen::Index>(shape.flat(i, j, k))] =
                    v[static_cast<Eigen::Index>(full.flat(i + begin[0], j + begin[1], k + begin[2]))];
    return out;
}

void LogBox::scatter(const Vector& sub, Vector& v) const {
    for (std::size_t k = 0; k < shape.n[2]; ++k)
        for (std::size_t j = 0; j < shape.n[1]; ++j)
            for (std::size_t i = 0; i < shape.n[0]; ++i)
                v[static_cast<Eigen::Index>(full.flat(i + begin[0], j + begin[1], k + begin[2]))] =
                    sub[static_cast<Eigen::Index>(shape.flat(i, j, k))];
}

Banded jump_line_operator(const std::vector<double>& x, double T, double c, double c2_share, double diff_scale) {
    const std::size_t n = x.size();
    Banded op(n);
    if (n < 3) return op;
    const Dir dir = c >= 0.0 ? Dir::Forward : Dir::Backward;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const Weights d2 = weights_second(x, i);
        const Weights d1 = weights_first_order2(x, i, dir);
        auto& r = op.row(i);
        for (int k = 0; k < 5; ++k) r[k] = T * (diff_scale * d2[k] + 2.0 * c * d1[k]);
        r[2] += T * c2_share;
    }
    return op;
}

namespace {

/// Second-order one-sided derivative pointing along `dir` on interior rows,
/// first order next to the boundary, zero on the end rows.
Banded upwind_derivative(const std::vector<double>& x, Dir dir) {
    const std::size_t n = x.size();
    Banded op(n);
    if (n < 3) return op;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const bool room = dir == Dir::Forward ? i + 2 < n : i >= 2;
        op.row(i) = room ? weights_first_order2(x, i, dir) : weights_first_order1(x, i, dir);
    }
    return op;
}

/// exp(A) v per line by a Taylor series on sub-steps with ||A / s|| <= 1/2.
void expm_lines(const Shape3& shape, Axis axis, std::size_t begin, const Banded& a, Vector& v) {
    double norm = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double row = 0.0;
        for (double c : a.row(i)) row += std::abs(c);
        norm = std::max(norm, row);
    }
    if (norm == 0.0) return;
    const int sub = std::max(1, static_cast<int>(std::ceil(norm / 0.5)));
    Banded scaled = a;
    scaled *= 1.0 / sub;
    // apply_lines leaves positions outside the range untouched; the mask drops
    // them from every Taylor term after the first
    Vector inside = Vector::Zero(v.size());
    for (std::size_t p = 0; p < shape.size(); ++p) {
        const std::size_t pos = shape.unflat(p)[static_cast<std::size_t>(index_of(axis))];
        if (pos >= begin && pos < begin + a.size()) inside[static_cast<Eigen::Index>(p)] = 1.0;
    }
    for (int s = 0; s < sub; ++s) {
        Vector term = v;
        Vector acc = v;
        for (int k = 1; k <= 30; ++k) {
            apply_lines(shape, axis, begin, scaled, term);
            term = term.cwiseProduct(inside) / static_cast<double>(k);
            acc += term;
            if (term.cwiseAbs().maxCoeff() <= 1e-17 * std::max(1.0, acc.cwiseAbs().maxCoeff())) break;
        }
        v = acc;
    }
}

std::size_t first_positive(const std::vector<double>& nodes) {
    std::size_t b = 0;
    while (b < nodes.size() && !(nodes[b] > 0.0)) ++b;
    return b;
}

std::vector<double> log_nodes(const std::vector<double>& nodes, std::size_t b) {
    std::vector<double> x;
    for (std::size_t i = b; i < nodes.size(); ++i) x.push_back(std::log(nodes[i]));
    return x;
}

/// V <- (1 - kappa) V + kappa W where W solves (I - A) W = V along lines.
void interpolated_solve(const Shape3& shape, Axis axis, std::size_t begin, const Banded& A, double kappa, Vector& v) {
    Banded lhs = A;
    lhs.affine(1.0, -1.0);
    Vector w = v;
    solve_lines(shape, axis, begin, lhs, w);
    v = (1.0 - kappa) * v + kappa * w;
}

}  // namespace

Vector jump_drift_step(const Vector& v, Axis axis, double m_dt, const Grid3D& g) {
    if (m_dt == 0.0) return v;
    const auto& nodes = g.axis(axis).nodes;
    const std::size_t b = first_positive(nodes);
    const auto x = log_nodes(nodes, b);
    if (x.size() < 3) return v;
    Banded a = upwind_derivative(x, m_dt > 0.0 ? Dir::Forward : Dir::Backward);
    a *= m_dt;
    Vector out = v;
    expm_lines(g.shape(), axis, b, a, out);
    return out;
}

Vector idio_jump_step(const Vector& v, Axis axis, const MeixnerParams& p, double dt, const Grid3D& g,
                      const JumpOptions& opt) {
    p.validate();
    Vector out = jump_drift_step(v, axis, p.m * dt, g);
    if (p.d == 0.0) return out;
    const auto& nodes = g.axis(axis).nodes;
    const std::size_t b = first_positive(nodes);
    const auto x = log_nodes(nodes, b);
    if (x.size() < 3) return out;
    const JumpProductPlan plan = plan_jump_product(p, dt, opt.M);
    const double kappa = plan.sub_kappa();
    const double c = p.b / p.a;
    const double scale = std::pow(std::cos(0.5 * p.b), kappa);
    std::vector<Banded> factors;
    for (int n = 0; n < plan.M; ++n) factors.push_back(jump_line_operator(x, plan.T[static_cast<std::size_t>(n)], c, c * c));
    const Shape3 sh = g.shape();
    Banded scaling = Banded::identity(x.size());
    for (std::size_t i = 1; i + 1 < x.size(); ++i) scaling.at(i, 0) = scale;
    for (int s = 0; s < plan.substeps; ++s) {
        apply_lines(sh, axis, b, scaling, out);
        if (opt.interpolation == KappaInterpolation::PerFactor) {
            for (const auto& f : factors) interpolated_solve(sh, axis, b, f, kappa, out);
        } else {
            Vector w = out;
            for (const auto& f : factors) interpolated_solve(sh, axis, b, f, 1.0, w);
            out = (1.0 - kappa) * out + kappa * w;
        }
    }
    return out;
}

Vector common_jump_step(const Vector& v, const JumpStructure& js, double dt, const Grid3D& g, const SolverConfig& cfg,
                        const JumpOptions& opt, Diagnostics* diag, PicardWarmStart* warm) {
    const MeixnerParams& p = js.common;
    p.validate();
    const LogBox box = make_log_box(g);
    std::array<bool, 3> active{};
    int n_active = 0;
    for (Axis a : kAxes) {
        const auto ax = static_cast<std::size_t>(index_of(a));
        active[ax] = js.loadings[ax] != 0.0 && box.shape.n[ax] >= 3;
        n_active += active[ax] ? 1 : 0;
    }
    if (n_active == 0) return v;

    Vector out = v;
    for (Axis a : kAxes) {
        const auto ax = static_cast<std::size_t>(index_of(a));
        if (active[ax]) out = jump_drift_step(out, a, p.m * js.loadings[ax] * dt, g);
    }
    if (p.d == 0.0) return out;

    const JumpProductPlan plan = plan_jump_product(p, dt, opt.M);
    const double kappa = plan.sub_kappa();
    const double c = p.b / p.a;
    const double scale = std::pow(std::cos(0.5 * p.b), kappa);
    const Shape3& sh = box.shape;
    const auto N = static_cast<Eigen::Index>(sh.size());

    // Mixed parts 2 b_i b_j d_i d_j written as rho W_i W_j with W = sqrt(2)|b|.
    std::array<MixedPair, 3> pairs;
    const std::array<std::pair<Axis, Axis>, 3> order{{{Axis::S, Axis::V}, {Axis::S, Axis::R}, {Axis::V, Axis::R}}};
    for (std::size_t q = 0; q < 3; ++q) {
        const auto [a1, a2] = order[q];
        const auto i1 = static_cast<std::size_t>(index_of(a1));
        const auto i2 = static_cast<std::size_t>(index_of(a2));
        MixedPair mp{a1, a2, 0.0, Vector::Zero(N), Vector::Zero(N)};
        if (active[i1] && active[i2]) {
            const double prod = js.loadings[i1] * js.loadings[i2];
            mp.rho = prod > 0.0 ? 1.0 : -1.0;
            mp.w1.setConstant(std::sqrt(2.0) * std::abs(js.loadings[i1]));
            mp.w2.setConstant(std::sqrt(2.0) * std::abs(js.loadings[i2]));
        }
        pairs[q] = std::move(mp);
    }
    SolverConfig jcfg = cfg;
    jcfg.picard_max = std::max(cfg.picard_max, 200);
    StepContext ctx{nullptr, &box.log_grid, &jcfg, diag, warm, 0};

    auto unit_solve = [&](Vector& field, std::size_t n) {
        const double T = plan.T[n];
        ctx.slot = static_cast<int>(n);
        for (std::size_t q = 0; q < 3; ++q) field = mixed_step(field, pairs[q], T, jcfg.mixed_variant, ctx, 0.0, static_cast<int>(q));
        for (Axis a : kAxes) {
            const auto ax = static_cast<std::size_t>(index_of(a));
            if (!active[ax]) continue;
            const double bl = js.loadings[ax];
            Banded A = jump_line_operator(box.log_grid.axis(a).nodes, T, c / bl, c * c / (bl * bl * n_active),
                                          1.0);
            A *= bl * bl;
            Banded lhs = A;
            lhs.affine(1.0, -1.0);
            solve_lines(sh, a, 0, lhs, field);
        }
    };

    // faces of the box along active axes are identity rows and keep their values
    Vector mask = Vector::Constant(N, scale);
    for (std::size_t q = 0; q < sh.size(); ++q) {
        const auto idx = sh.unflat(q);
        for (std::size_t ax = 0; ax < 3; ++ax)
            if (active[ax] && (idx[ax] == 0 || idx[ax] + 1 == sh.n[ax])) mask[static_cast<Eigen::Index>(q)] = 1.0;
    }
    Vector sub = box.gather(out);
    for (int s = 0; s < plan.substeps; ++s) {
        sub.array() *= mask.array();
        if (opt.interpolation == KappaInterpolation::PerFactor) {
            for (std::size_t n = 0; n < plan.T.size(); ++n) {
                Vector w = sub;
                unit_solve(w, n);
                sub = (1.0 - kappa) * sub + kappa * w;
            }
        } else {
            Vector w = sub;
            for (std::size_t n = 0; n < plan.T.size(); ++n) unit_solve(w, n);
            sub = (1.0 - kappa) * sub + kappa * w;
        }
    }
    box.scatter(sub, out);
    return out;
}

}  // namespace lsvj
