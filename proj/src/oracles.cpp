#include "lsvj/oracles.hpp"

#include "lsvj/parallel.hpp"

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lsvj::oracles {

namespace {

double payoff(const InstrumentSpec& inst, double s) {
    switch (inst.kind) {
        case InstrumentKind::EuropeanCall:
        case InstrumentKind::DoubleBarrierCall:
        case InstrumentKind::UpAndOutCall: return std::max(s - inst.strike, 0.0);
        case InstrumentKind::EuropeanPut: return std::max(inst.strike - s, 0.0);
        case InstrumentKind::ZeroCouponBond: return 1.0;
        case InstrumentKind::GaussianBump: {
            const double z = (s - inst.strike) / inst.bump_width;
            return std::exp(-z * z);
        }
    }
    return 0.0;
}

bool knocked(const InstrumentSpec& inst, double s) {
    if (inst.kind == InstrumentKind::UpAndOutCall || inst.kind == InstrumentKind::DoubleBarrierCall)
        if (inst.upper_barrier && s >= *inst.upper_barrier) return true;
    if (inst.kind == InstrumentKind::DoubleBarrierCall && inst.lower_barrier && s <= *inst.lower_barrier) return true;
    return false;
}

double power(double x, double e) { return e == 0.5 ? std::sqrt(x) : (e == 0.0 ? 1.0 : std::pow(x, e)); }

}  // namespace

McResult mc_price_diffusion(const InstrumentSpec& inst, const ModelSpec& m, const std::array<double, 3>& spot,
                            const McConfig& mc) {
    if (m.jumps) fail(ErrorKind::Domain, "mc_price_diffusion: jump components are not simulated");
    if (mc.paths < 2 || mc.steps_per_year < 1 || mc.chunk < 1) fail(ErrorKind::Domain, "mc_price_diffusion: bad McConfig");
    const auto& d = m.diffusion;
    Eigen::LLT<Eigen::Matrix3d> llt(d.correlation_matrix());
    if (llt.info() != Eigen::Success) fail(ErrorKind::Domain, "mc_price_diffusion: correlation matrix is not positive definite");
    const Eigen::Matrix3d L = llt.matrixL();

    const double T = inst.maturity;
    const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(T * static_cast<double>(mc.steps_per_year) - 1e-9)));
    const double dt = T / static_cast<double>(steps);
    const double sdt = std::sqrt(dt);

    struct Frozen {
        double kv, tv, xv, kr, tr, xr;
    };
    std::vector<Frozen> par(steps);
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        par[n] = {d.kappa_v.at(t), d.theta_v.at(t), d.xi_v.at(t), d.kappa_r.at(t), d.theta_r.at(t), d.xi_r.at(t)};
    }
    const bool flat_lv = d.local_vol.is_constant();
    const double lv_const = d.local_vol(1.0, 0.0);

    const std::size_t chunks = (mc.paths + mc.chunk - 1) / mc.chunk;
    std::vector<double> sum(chunks, 0.0), sum2(chunks, 0.0);
    parallel_for(chunks, [&](std::size_t c) {
        std::seed_seq seq{static_cast<std::uint64_t>(mc.seed & 0xffffffffu), static_cast<std::uint64_t>(mc.seed >> 32),
                          static_cast<std::uint64_t>(c)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal;
        const std::size_t begin = c * mc.chunk;
        const std::size_t end = std::min(mc.paths, begin + mc.chunk);
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t path = begin; path < end; ++path) {
            double x = std::log(spot[0]);
            double v = spot[1];
            double r = spot[2];
            double integral = 0.0;
            bool alive = !knocked(inst, spot[0]);
            for (std::size_t n = 0; n < steps && alive; ++n) {
                const Frozen& f = par[n];
                const Eigen::Vector3d z = L * Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
                const double vp = std::max(v, 0.0);
                const double rp = std::max(r, 0.0);
                const double s = std::exp(x);
                const double t = static_cast<double>(n) * dt;
                const double sigma = flat_lv ? lv_const : d.local_vol(s, t);
                const double vol = sigma * power(s, d.c_pow - 1.0) * std::sqrt(vp);
                x += (rp - d.q - 0.5 * vol * vol) * dt + vol * sdt * z[0];
                v += f.kv * (f.tv - vp) * dt + f.xv * power(vp, d.a_pow) * sdt * z[1];
                const double r_next = r + f.kr * (f.tr - rp) * dt + f.xr * power(rp, d.b_pow) * sdt * z[2];
                integral += 0.5 * (rp + std::max(r_next, 0.0)) * dt;
                r = r_next;
                if (knocked(inst, std::exp(x))) alive = false;
            }
            const double val = alive ? std::exp(-integral) * payoff(inst, std::exp(x)) : 0.0;
            s1 += val;
            s2 += val * val;
        }
        sum[c] = s1;
        sum2[c] = s2;
    });
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        s1 += sum[c];
        s2 += sum2[c];
    }
    const auto N = static_cast<double>(mc.paths);
    const double mean = s1 / N;
    const double var = std::max(0.0, (s2 - N * mean * mean) / (N - 1.0));
    return {mean, std::sqrt(var / N)};
}

Vector dense_expm_propagate(const Eigen::MatrixXd& op, const Vector& v, double dt) {
    if (op.rows() != op.cols() || op.rows() != v.size()) fail(ErrorKind::Domain, "dense_expm_propagate: size mismatch");
    if (op.rows() > 3000) fail(ErrorKind::Domain, "dense_expm_propagate: matrix too large");
    const Eigen::MatrixXd e = (dt * op).exp();
    if (!e.allFinite()) fail(ErrorKind::Solver, "dense_expm_propagate: overflow");
    return e * v;
}

std::complex<double> meixner_exponent(double u, const MeixnerParams& p) {
    using C = std::complex<double>;
    const C z = C(p.a * u, -p.b) / 2.0;
    // log cosh z = |Re z| + log((1 + exp(-2 z sgn)) / 2), stable for large |u|
    const C zs = z.real() >= 0.0 ? z : -z;
    const C log_cosh = zs + std::log((1.0 + std::exp(-2.0 * zs)) / 2.0);
    return 2.0 * p.d * (std::log(std::cos(p.b / 2.0)) - log_cosh) + C(0.0, p.m * u);
}

SpectralResult spectral_jump_propagate(const Vector& v, double h, const MeixnerParams& p, double dt,
                                       double pad_factor) {
    const auto n = static_cast<std::size_t>(v.size());
    if (n < 2 || !(h > 0.0)) fail(ErrorKind::Domain, "spectral_jump_propagate: need at least two nodes and h > 0");
    if (pad_factor < 2.0) fail(ErrorKind::Domain, "spectral_jump_propagate: padding must be at least twice the support");
    const auto pad = static_cast<std::size_t>(std::ceil(pad_factor * static_cast<double>(n)));
    const std::size_t N = n + 2 * pad;
    std::vector<std::complex<double>> in(N), spec, out;
    for (std::size_t j = 0; j < N; ++j) {
        const std::size_t src = j < pad ? 0 : (j >= pad + n ? n - 1 : j - pad);
        in[j] = v[static_cast<Eigen::Index>(src)];
    }
    Eigen::FFT<double> fft;
    fft.fwd(spec, in);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t k = 0; k < N; ++k) {
        const double kk = k <= N / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(N);
        const double u = two_pi * kk / (static_cast<double>(N) * h);
        spec[k] *= std::exp(dt * meixner_exponent(u, p));
    }
    fft.inv(out, spec);
    SpectralResult res;
    res.values.resize(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) res.values[static_cast<Eigen::Index>(j)] = out[j + pad].real();
    double peak = 0.0, edge = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        const double a = std::abs(out[j] - in[j]);
        peak = std::max(peak, std::abs(out[j]));
        if (j < pad / 4 || j >= N - pad / 4) edge = std::max(edge, a);
    }
    res.aliasing = edge > 1e-6 * std::max(peak, 1e-300);
    return res;
}

double black_scholes_call(double S, double K, double r, double q, double sigma, double T) {
    if (!(sigma > 0.0) || !(T > 0.0)) return std::max(S * std::exp(-q * std::max(T, 0.0)) - K * std::exp(-r * std::max(T, 0.0)), 0.0);
    const double sq = sigma * std::sqrt(T);
    const double d1 = (std::log(S / K) + (r - q + 0.5 * sigma * sigma) * T) / sq;
    const double d2 = d1 - sq;
    auto N = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
    return S * std::exp(-q * T) * N(d1) - K * std::exp(-r * T) * N(d2);
}

double cir_bond_price(double r0, double kappa, double theta, double xi, double T) {
    if (T <= 0.0) return 1.0;
    if (xi == 0.0) {
        const double B = kappa > 0.0 ? (1.0 - std::exp(-kappa * T)) / kappa : T;
        return std::exp(-theta * T - (r0 - theta) * B);
    }
    const double g = std::sqrt(kappa * kappa + 2.0 * xi * xi);
    const double e = std::expm1(g * T);
    const double den = (g + kappa) * e + 2.0 * g;
    const double B = 2.0 * e / den;
    const double A = std::pow(2.0 * g * std::exp(0.5 * (kappa + g) * T) / den, 2.0 * kappa * theta / (xi * xi));
    return A * std::exp(-B * r0);
}

namespace dense {

Eigen::MatrixXd one_sided_first(const std::vector<double>& x, Side side) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (side == Side::Forward) {
            if (i + 2 < n) {
                const double a = x[u + 1] - x[u], b = x[u + 2] - x[u];
                // exact for 1, x, x^2 on nodes {0, a, b}
                D(i, i + 1) = b / (a * (b - a));
                D(i, i + 2) = -a / (b * (b - a));
                D(i, i) = -(D(i, i + 1) + D(i, i + 2));
            } else {
                D(i, i + 1) = 1.0 / (x[u + 1] - x[u]);
                D(i, i) = -D(i, i + 1);
            }
        } else {
            if (i >= 2) {
                const double a = x[u] - x[u - 1], b = x[u] - x[u - 2];
                D(i, i - 1) = -b / (a * (b - a));
                D(i, i - 2) = a / (b * (b - a));
                D(i, i) = -(D(i, i - 1) + D(i, i - 2));
            } else {
                D(i, i - 1) = -1.0 / (x[u] - x[u - 1]);
                D(i, i) = -D(i, i - 1);
            }
        }
    }
    return D;
}

Eigen::MatrixXd second(const std::vector<double>& x) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const double hm = x[u] - x[u - 1], hp = x[u + 1] - x[u];
        D(i, i - 1) = 2.0 / (hm * (hm + hp));
        D(i, i + 1) = 2.0 / (hp * (hm + hp));
        D(i, i) = -(D(i, i - 1) + D(i, i + 1));
    }
    return D;
}

SpMat lift(const Eigen::MatrixXd& a, int axis, const std::array<std::size_t, 3>& n) {
    const std::size_t N = n[0] * n[1] * n[2];
    if (a.rows() != static_cast<Eigen::Index>(n[static_cast<std::size_t>(axis)]))
        fail(ErrorKind::Domain, "dense::lift: size mismatch");
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t p = 0; p < N; ++p) {
        std::array<std::size_t, 3> idx{p % n[0], (p / n[0]) % n[1], p / (n[0] * n[1])};
        const auto ax = static_cast<std::size_t>(axis);
        const auto row = static_cast<Eigen::Index>(idx[ax]);
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (a(row, c) == 0.0) continue;
            auto jdx = idx;
            jdx[ax] = static_cast<std::size_t>(c);
            const std::size_t q = jdx[0] + n[0] * (jdx[1] + n[1] * jdx[2]);
            t.emplace_back(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q), a(row, c));
        }
    }
    SpMat m(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

namespace {

Vector sparse_solve(const SpMat& a, const Vector& b) {
    Eigen::SparseLU<SpMat> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) fail(ErrorKind::Solver, "dense oracle: factorization failed");
    return lu.solve(b);
}

SpMat identity(Eigen::Index N) {
    SpMat I(N, N);
    I.setIdentity();
    return I;
}

}  // namespace

Vector common_jump_step(const Vector& v, const std::array<std::vector<double>, 3>& x,
                        const std::array<double, 3>& loadings, const MeixnerParams& p, double dt, int M,
                        bool per_factor) {
    const std::array<std::size_t, 3> n{x[0].size(), x[1].size(), x[2].size()};
    const auto N = static_cast<Eigen::Index>(n[0] * n[1] * n[2]);
    if (v.size() != N) fail(ErrorKind::Domain, "dense::common_jump_step: size mismatch");
    std::array<bool, 3> active{};
    int n_active = 0;
    for (int a = 0; a < 3; ++a) {
        const auto u = static_cast<std::size_t>(a);
        active[u] = loadings[u] != 0.0 && n[u] >= 3;
        n_active += active[u];
    }
    if (n_active == 0) return v;

    Vector out = v;
    for (int a = 0; a < 3; ++a) {
        const auto u = static_cast<std::size_t>(a);
        if (!active[u]) continue;
        const double speed = p.m * loadings[u] * dt;
        if (speed == 0.0) continue;
        const Eigen::MatrixXd E = (speed * one_sided_first(x[u], speed > 0.0 ? Side::Forward : Side::Backward)).exp();
        out = lift(E, a, n) * out;
    }
    if (p.d == 0.0) return out;

    const double kappa_total = 2.0 * p.d * dt;
    const int substeps = kappa_total >= 1.0 ? static_cast<int>(std::floor(kappa_total)) + 1 : 1;
    const double kappa = kappa_total / substeps;
    const double c = p.b / p.a;
    const SpMat I = identity(N);

    std::vector<SpMat> unit_ops;  // the operators of each unit solve, in order, for T = 1
    const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
    for (const auto& [i, j] : pairs) {
        const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
        if (!(active[ui] && active[uj])) continue;
        const double prod = loadings[ui] * loadings[uj];
        const SpMat D1 = lift(one_sided_first(x[ui], prod > 0.0 ? Side::Forward : Side::Backward), i, n);
        const SpMat D2 = lift(one_sided_first(x[uj], Side::Backward), j, n);
        unit_ops.push_back(SpMat(2.0 * prod * (D1 * D2)));
    }
    for (int a = 0; a < 3; ++a) {
        const auto u = static_cast<std::size_t>(a);
        if (!active[u]) continue;
        const double bl = loadings[u];
        const double cb = c / bl;
        Eigen::MatrixXd A = second(x[u]) + 2.0 * cb * one_sided_first(x[u], cb >= 0.0 ? Side::Forward : Side::Backward);
        for (Eigen::Index r = 1; r + 1 < A.rows(); ++r) A(r, r) += cb * cb / n_active;
        unit_ops.push_back(lift(bl * bl * A, a, n));
    }

    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    std::vector<double> T;
    for (int k = 1; k <= M; ++k) T.push_back(p.a * p.a / (four_pi2 * (k - 0.5) * (k - 0.5)));

    const double scale = std::pow(std::cos(0.5 * p.b), kappa);
    Vector mask = Vector::Constant(N, scale);
    for (Eigen::Index q = 0; q < N; ++q) {
        const auto uq = static_cast<std::size_t>(q);
        const std::array<std::size_t, 3> idx{uq % n[0], (uq / n[0]) % n[1], uq / (n[0] * n[1])};
        for (std::size_t a = 0; a < 3; ++a)
            if (active[a] && (idx[a] == 0 || idx[a] + 1 == n[a])) mask[q] = 1.0;
    }

    auto unit = [&](Vector w, double Tn) {
        for (const auto& op : unit_ops) w = sparse_solve(SpMat(I - Tn * op), w);
        return w;
    };
    for (int s = 0; s < substeps; ++s) {
        out.array() *= mask.array();
        if (per_factor) {
            for (double Tn : T) out = (1.0 - kappa) * out + kappa * unit(out, Tn);
        } else {
            Vector w = out;
            for (double Tn : T) w = unit(w, Tn);
            out = (1.0 - kappa) * out + kappa * w;
        }
    }
    return out;
}

}  // namespace dense

}  // namespace lsvj::oracles
