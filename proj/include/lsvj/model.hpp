#pragma once

#include "lsvj/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

namespace lsvj {

/// Meixner process parameters: scale a, skew b, intensity d, drift m.
struct MeixnerParams {
    double a = 1.0;
    double b = 0.0;
    double d = 0.0;
    double m = 0.0;

    void validate() const;
};

/// Characteristic exponent of the Meixner process,
///   2d{log cos(b/2) - log cosh((a u - i b)/2)} + i m u.
/// Evaluated with an overflow-free log cosh; valid for complex u with |Im(a u - i b)| < pi.
template <typename T>
std::complex<T> meixner_char_exponent(std::complex<T> u, const MeixnerParams& p) {
    using C = std::complex<T>;
    const T a(p.a), b(p.b), d(p.d), m(p.m);
    C z = (a * u - C(0, b)) / T(2);
    if (z.real() < 0) z = -z;
    // log cosh z = z - log 2 + log(1 + exp(-2z)) for Re z >= 0
    const C log_cosh = z - std::log(T(2)) + std::log(C(1) + std::exp(T(-2) * z));
    return T(2) * d * (C(std::log(std::cos(b / T(2)))) - log_cosh) + C(0, 1) * m * u;
}

/// Variance of the unit-time Meixner increment, a^2 d / (2 cos^2(b/2)).
double meixner_variance(const MeixnerParams& p);

/// Levy density d exp(b y / a) / (y sinh(pi y / a)); y == 0 is rejected.
double meixner_levy_density(double y, const MeixnerParams& p);

/// Idiosyncratic Meixner components Y_s, Y_v, Y_r, a common component Z and
/// the loadings b_j with X_j = Y_j + b_j Z.
struct JumpStructure {
    MeixnerParams idio_s;
    MeixnerParams idio_v;
    MeixnerParams idio_r;
    MeixnerParams common;
    std::array<double, 3> loadings{0.0, 0.0, 0.0};

    const MeixnerParams& idio(Axis a) const;
    double loading(Axis a) const { return loadings[index_of(a)]; }
    void validate() const;
};

double pairwise_jump_correlation(Axis i, Axis j, const JumpStructure& js);

double total_correlation(Axis i, Axis j, double sigma_i, double sigma_j, double rho, const JumpStructure& js);

/// rho_xy from rho_yz, rho_xz and the angle phi_xy between x and its projection on span{y, z}.
double cosine_law_rho(double rho_yz, double rho_xz, double phi_xy);

/// Step function of calendar time; value i applies on [times[i], times[i+1]).
class PiecewiseConstant {
public:
    PiecewiseConstant(double value = 0.0) : times_{0.0}, values_{value} {}
    PiecewiseConstant(std::vector<double> times, std::vector<double> values);

    double at(double t) const;
    double min() const;
    double max() const;
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }
    bool is_constant() const { return values_.size() == 1; }

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

/// Local volatility sigma_s(S, t) tabulated on a rectangle, bilinear in between
/// and flat outside. A default-constructed surface is identically 1.
class LocalVolSurface {
public:
    LocalVolSurface(double constant = 1.0);
    LocalVolSurface(std::vector<double> s_nodes, std::vector<double> t_nodes, Eigen::MatrixXd values);

    double operator()(double s, double t) const;
    bool is_constant() const { return s_nodes_.size() == 1 && t_nodes_.size() == 1; }
    const std::vector<double>& s_nodes() const { return s_nodes_; }
    const std::vector<double>& t_nodes() const { return t_nodes_; }
    const Eigen::MatrixXd& values() const { return values_; }

private:
    std::vector<double> s_nodes_;
    std::vector<double> t_nodes_;
    Eigen::MatrixXd values_;  // rows: s, cols: t
};

struct DiffusionParams {
    double q = 0.0;
    PiecewiseConstant kappa_v{0.0};
    PiecewiseConstant theta_v{1.0};
    PiecewiseConstant xi_v{0.0};
    PiecewiseConstant kappa_r{0.0};
    PiecewiseConstant theta_r{0.05};
    PiecewiseConstant xi_r{0.0};
    double a_pow = 0.5;
    double b_pow = 0.5;
    double c_pow = 1.0;
    LocalVolSurface local_vol{};
    double rho_sv = 0.0;
    double rho_sr = 0.0;
    double rho_vr = 0.0;

    double rho(Axis i, Axis j) const;
    Eigen::Matrix3d correlation_matrix() const;
    void validate() const;
};

struct ModelSpec {
    DiffusionParams diffusion;
    std::optional<JumpStructure> jumps;

    void validate() const;
};

double min_eigenvalue(const Eigen::Matrix3d& m);

}  // namespace lsvj
