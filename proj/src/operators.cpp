#include "lsvj/operators.hpp"

#include <cmath>

namespace lsvj {

namespace {

double pos_pow(double x, double p) { return p == 0.0 ? 1.0 : std::pow(std::max(x, 0.0), p); }

/// Node-wise drift, diffusion and reaction along one axis.
struct AxisCoefficients {
    double drift = 0.0;
    double diffusion = 0.0;
    double reaction = 0.0;
};

/// Fills one row of a convection-diffusion operator.
Weights row_weights(const std::vector<double>& x, std::size_t i, const AxisCoefficients& c, bool zero_last_row) {
    Weights w{};
    const std::size_t n = x.size();
    if (n >= 3) {
        const bool first = i == 0;
        const bool last = i + 1 == n;
        if (last && zero_last_row) return w;
        if (!first && !last && c.diffusion != 0.0) {
            const Weights d2 = weights_second(x, i);
            for (int k = 0; k < 5; ++k) w[k] += c.diffusion * d2[k];
        }
        if (c.drift != 0.0) {
            Dir dir = c.drift > 0.0 ? Dir::Forward : Dir::Backward;
            if (first) dir = Dir::Forward;
            if (last) dir = Dir::Backward;
            const Weights d1 = weights_first_order2(x, i, dir);
            for (int k = 0; k < 5; ++k) w[k] += c.drift * d1[k];
        }
    }
    w[2] += c.reaction;
    return w;
}

}  // namespace

double w_s(const DiffusionParams& d, double s, double t) { return d.local_vol(s, t) * pos_pow(s, d.c_pow); }
double w_v(const DiffusionParams& d, double v, double t) { return d.xi_v.at(t) * pos_pow(v, d.a_pow + 0.5); }
double w_r(const DiffusionParams& d, double r, double t) { return d.xi_r.at(t) * pos_pow(r, d.b_pow); }

AxisOperator assemble_F(int k, const ModelSpec& m, const Grid3D& g, double t, const AssemblyOptions& opt) {
    if (k < 1 || k > 3) fail(ErrorKind::Domain, "assemble_F: k must be 1, 2 or 3");
    const DiffusionParams& d = m.diffusion;
    const Shape3 sh = g.shape();
    const Axis axis = kAxes[static_cast<std::size_t>(k - 1)];
    AxisOperator op(sh, axis);
    const double half_disc = opt.discount ? 0.5 : 0.0;
    const double kv = d.kappa_v.at(t), tv = d.theta_v.at(t), xv = d.xi_v.at(t);
    const double kr = d.kappa_r.at(t), tr = d.theta_r.at(t), xr = d.xi_r.at(t);
    for (std::size_t kk = 0; kk < sh.n[2]; ++kk) {
        const double r = g.r.nodes[kk];
        for (std::size_t j = 0; j < sh.n[1]; ++j) {
            const double v = g.v.nodes[j];
            for (std::size_t i = 0; i < sh.n[0]; ++i) {
                const double s = g.s.nodes[i];
                AxisCoefficients c;
                std::size_t pos = 0;
                const std::vector<double>* x = nullptr;
                bool zero_last = false;
                switch (axis) {
                    case Axis::S: {
                        const double sig = d.local_vol(s, t);
                        c.drift = (r - d.q) * s;
                        c.diffusion = 0.5 * sig * sig * pos_pow(s, 2.0 * d.c_pow) * v;
                        c.reaction = -half_disc * r;
                        pos = i;
                        x = &g.s.nodes;
                        break;
                    }
                    case Axis::V:
                        c.drift = kv * (tv - v);
                        c.diffusion = 0.5 * xv * xv * pos_pow(v, 2.0 * d.a_pow);
                        pos = j;
                        x = &g.v.nodes;
                        zero_last = true;
                        break;
                    case Axis::R:
                        c.drift = kr * (tr - r);
                        c.diffusion = 0.5 * xr * xr * pos_pow(r, 2.0 * d.b_pow);
                        c.reaction = -half_disc * r;
                        pos = kk;
                        x = &g.r.nodes;
                        break;
                }
                op.at(sh.flat(i, j, kk)) = row_weights(*x, pos, c, zero_last);
            }
        }
    }
    return op;
}

std::array<MixedPair, 3> assemble_mixed(const ModelSpec& m, const Grid3D& g, double t) {
    const DiffusionParams& d = m.diffusion;
    const Shape3 sh = g.shape();
    const auto n = static_cast<Eigen::Index>(sh.size());
    std::array<MixedPair, 3> out;
    out[0] = MixedPair{Axis::S, Axis::V, d.rho_sv, Vector(n), Vector(n)};
    out[1] = MixedPair{Axis::S, Axis::R, d.rho_sr, Vector(n), Vector(n)};
    out[2] = MixedPair{Axis::V, Axis::R, d.rho_vr, Vector(n), Vector(n)};
    const double xv = d.xi_v.at(t);
    for (std::size_t k = 0; k < sh.n[2]; ++k) {
        const double wr = w_r(d, g.r.nodes[k], t);
        for (std::size_t j = 0; j < sh.n[1]; ++j) {
            const double v = g.v.nodes[j];
            const double wv = w_v(d, v, t);
            const double sqv = std::sqrt(std::max(v, 0.0));
            const double wv_over_sqrt = xv * pos_pow(v, d.a_pow);
            for (std::size_t i = 0; i < sh.n[0]; ++i) {
                const double ws = w_s(d, g.s.nodes[i], t);
                const auto p = static_cast<Eigen::Index>(sh.flat(i, j, k));
                out[0].w1[p] = ws;
                out[0].w2[p] = wv;
                out[1].w1[p] = ws * sqv;
                out[1].w2[p] = wr;
                out[2].w1[p] = wv_over_sqrt;
                out[2].w2[p] = wr;
            }
        }
    }
    return out;
}

AxisOperator central_first_operator(const Grid3D& g, Axis a) {
    const Shape3 sh = g.shape();
    AxisOperator op(sh, a);
    const auto& x = g.axis(a).nodes;
    if (x.size() < 3) return op;
    for (std::size_t p = 0; p < sh.size(); ++p) {
        const std::size_t pos = sh.unflat(p)[static_cast<std::size_t>(index_of(a))];
        if (pos == 0 || pos + 1 == x.size()) continue;
        op.at(p) = weights_first_central(x, pos);
    }
    return op;
}

DiffusionOperators assemble_operators(const ModelSpec& m, const Grid3D& g, double t, const AssemblyOptions& opt) {
    DiffusionOperators ops;
    ops.shape = g.shape();
    for (int k = 1; k <= 3; ++k) ops.f[static_cast<std::size_t>(k - 1)] = assemble_F(k, m, g, t, opt);
    ops.mixed = assemble_mixed(m, g, t);
    for (Axis a : kAxes) ops.central[static_cast<std::size_t>(index_of(a))] = central_first_operator(g, a);
    return ops;
}

Vector apply_mixed(const MixedPair& p, const AxisOperator& d1, const AxisOperator& d2, const Vector& v) {
    if (!p.active()) return Vector::Zero(v.size());
    Vector tmp = d2 * v;
    Vector out = d1 * tmp;
    return (p.rho * p.w1.array() * p.w2.array() * out.array()).matrix();
}

Vector apply_F0(const DiffusionOperators& ops, const Vector& v) {
    Vector out = Vector::Zero(v.size());
    for (const auto& p : ops.mixed) {
        if (!p.active()) continue;
        out += apply_mixed(p, ops.central[static_cast<std::size_t>(index_of(p.a1))],
                           ops.central[static_cast<std::size_t>(index_of(p.a2))], v);
    }
    return out;
}

Vector apply_F123(const DiffusionOperators& ops, const Vector& v) {
    Vector out = ops.f[0] * v;
    out += ops.f[1] * v;
    out += ops.f[2] * v;
    return out;
}

}  // namespace lsvj
