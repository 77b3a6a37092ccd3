#include "lsvj/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <sstream>

namespace lsvj {

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::S: return "S";
        case Axis::V: return "v";
        case Axis::R: return "r";
    }
    return "?";
}

void MeixnerParams::validate() const {
    if (!(a > 0.0)) fail(ErrorKind::Domain, "Meixner scale a must be positive");
    if (!(std::abs(b) < std::numbers::pi)) fail(ErrorKind::Domain, "Meixner skew b must satisfy |b| < pi");
    if (!(d >= 0.0)) fail(ErrorKind::Domain, "Meixner intensity d must be non-negative");
    if (!std::isfinite(m)) fail(ErrorKind::Domain, "Meixner drift m must be finite");
}

double meixner_variance(const MeixnerParams& p) {
    // -phi''(0): the second derivative of 2d log cosh((a u - i b)/2) at u = 0 is
    // (d a^2 / 2) sech^2(-i b / 2) = d a^2 / (2 cos^2(b / 2)).
    const double c = std::cos(0.5 * p.b);
    return p.a * p.a * p.d / (2.0 * c * c);
}

double meixner_levy_density(double y, const MeixnerParams& p) {
    if (y == 0.0) fail(ErrorKind::Domain, "Meixner Levy density is singular at y = 0");
    if (p.d == 0.0) return 0.0;
    const double x = std::numbers::pi * y / p.a;
    // exp(b y / a) / sinh(pi y / a) without overflow for large |y|
    const double ax = std::abs(x);
    const double sign = x > 0 ? 1.0 : -1.0;
    const double ratio = 2.0 * std::exp(p.b * y / p.a - ax) / (-std::expm1(-2.0 * ax));
    return p.d * sign * ratio / y;
}

const MeixnerParams& JumpStructure::idio(Axis a) const {
    switch (a) {
        case Axis::S: return idio_s;
        case Axis::V: return idio_v;
        case Axis::R: return idio_r;
    }
    return idio_s;
}

void JumpStructure::validate() const {
    idio_s.validate();
    idio_v.validate();
    idio_r.validate();
    common.validate();
    for (double l : loadings)
        if (!std::isfinite(l)) fail(ErrorKind::Domain, "jump loadings must be finite");
}

namespace {

double total_jump_variance(Axis i, const JumpStructure& js) {
    const double b = js.loading(i);
    return meixner_variance(js.idio(i)) + b * b * meixner_variance(js.common);
}

}  // namespace

double pairwise_jump_correlation(Axis i, Axis j, const JumpStructure& js) {
    const double vi = total_jump_variance(i, js);
    const double vj = total_jump_variance(j, js);
    if (vi <= 0.0 || vj <= 0.0) fail(ErrorKind::Domain, "degenerate jump variance in pairwise correlation");
    return js.loading(i) * js.loading(j) * meixner_variance(js.common) / (std::sqrt(vi) * std::sqrt(vj));
}

double total_correlation(Axis i, Axis j, double sigma_i, double sigma_j, double rho, const JumpStructure& js) {
    if (sigma_i < 0.0 || sigma_j < 0.0) fail(ErrorKind::Domain, "diffusion volatilities must be non-negative");
    const double di = sigma_i * sigma_i + total_jump_variance(i, js);
    const double dj = sigma_j * sigma_j + total_jump_variance(j, js);
    if (di <= 0.0 || dj <= 0.0) fail(ErrorKind::Domain, "degenerate denominator in total correlation");
    const double num = rho * sigma_i * sigma_j + js.loading(i) * js.loading(j) * meixner_variance(js.common);
    return num / (std::sqrt(di) * std::sqrt(dj));
}

double cosine_law_rho(double rho_yz, double rho_xz, double phi_xy) {
    if (std::abs(rho_yz) > 1.0 || std::abs(rho_xz) > 1.0) fail(ErrorKind::Domain, "correlations must lie in [-1, 1]");
    return rho_yz * rho_xz + std::sqrt((1.0 - rho_yz * rho_yz) * (1.0 - rho_xz * rho_xz)) * std::cos(phi_xy);
}

PiecewiseConstant::PiecewiseConstant(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.empty() || times_.size() != values_.size())
        fail(ErrorKind::Config, "piecewise-constant function needs matching non-empty times/values");
    if (!std::is_sorted(times_.begin(), times_.end()))
        fail(ErrorKind::Config, "piecewise-constant breakpoints must be sorted");
}

double PiecewiseConstant::at(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return values_.front();
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double PiecewiseConstant::min() const { return *std::min_element(values_.begin(), values_.end()); }
double PiecewiseConstant::max() const { return *std::max_element(values_.begin(), values_.end()); }

LocalVolSurface::LocalVolSurface(double constant) : s_nodes_{0.0}, t_nodes_{0.0}, values_(1, 1) {
    values_(0, 0) = constant;
}

LocalVolSurface::LocalVolSurface(std::vector<double> s_nodes, std::vector<double> t_nodes, Eigen::MatrixXd values)
    : s_nodes_(std::move(s_nodes)), t_nodes_(std::move(t_nodes)), values_(std::move(values)) {
    if (s_nodes_.empty() || t_nodes_.empty()) fail(ErrorKind::Config, "local vol table needs nodes");
    if (values_.rows() != static_cast<Eigen::Index>(s_nodes_.size()) ||
        values_.cols() != static_cast<Eigen::Index>(t_nodes_.size()))
        fail(ErrorKind::Config, "local vol table shape mismatch");
    if (!std::is_sorted(s_nodes_.begin(), s_nodes_.end()) || !std::is_sorted(t_nodes_.begin(), t_nodes_.end()))
        fail(ErrorKind::Config, "local vol nodes must be sorted");
    if (!(values_.array() > 0.0).all()) fail(ErrorKind::Config, "local vol must be positive");
}

namespace {

// Bracketing index and weight of x on sorted nodes, flat extrapolation.
std::pair<std::size_t, double> locate(const std::vector<double>& nodes, double x) {
    if (nodes.size() == 1 || x <= nodes.front()) return {0, 0.0};
    if (x >= nodes.back()) return {nodes.size() - 2, 1.0};
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - nodes.begin()) - 1;
    return {i, (x - nodes[i]) / (nodes[i + 1] - nodes[i])};
}

}  // namespace

double LocalVolSurface::operator()(double s, double t) const {
    if (is_constant()) return values_(0, 0);
    auto [i, ws] = locate(s_nodes_, s);
    auto [j, wt] = locate(t_nodes_, t);
    const Eigen::Index i0 = static_cast<Eigen::Index>(i), j0 = static_cast<Eigen::Index>(j);
    const Eigen::Index i1 = s_nodes_.size() > 1 ? i0 + 1 : i0;
    const Eigen::Index j1 = t_nodes_.size() > 1 ? j0 + 1 : j0;
    return (1 - ws) * (1 - wt) * values_(i0, j0) + ws * (1 - wt) * values_(i1, j0) +
           (1 - ws) * wt * values_(i0, j1) + ws * wt * values_(i1, j1);
}

double DiffusionParams::rho(Axis i, Axis j) const {
    if (i == j) return 1.0;
    const int key = (1 << index_of(i)) | (1 << index_of(j));
    switch (key) {
        case 0b011: return rho_sv;
        case 0b101: return rho_sr;
        case 0b110: return rho_vr;
    }
    return 0.0;
}

Eigen::Matrix3d DiffusionParams::correlation_matrix() const {
    Eigen::Matrix3d c;
    c << 1.0, rho_sv, rho_sr, rho_sv, 1.0, rho_vr, rho_sr, rho_vr, 1.0;
    return c;
}

double min_eigenvalue(const Eigen::Matrix3d& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void DiffusionParams::validate() const {
    auto in_unit = [](double r) { return r >= -1.0 && r <= 1.0; };
    if (!in_unit(rho_sv) || !in_unit(rho_sr) || !in_unit(rho_vr))
        fail(ErrorKind::Config, "Brownian correlations must lie in [-1, 1]");
    const double lmin = min_eigenvalue(correlation_matrix());
    if (lmin < -1e-12) {
        std::ostringstream os;
        os << "Brownian correlation matrix is not positive semidefinite (min eigenvalue " << lmin << ")";
        fail(ErrorKind::Config, os.str());
    }
    for (double p : {a_pow, b_pow, c_pow})
        if (!(p >= 0.0 && p < 2.0)) fail(ErrorKind::Config, "CEV exponents must lie in [0, 2)");
    if (kappa_v.min() < 0 || kappa_r.min() < 0 || xi_v.min() < 0 || xi_r.min() < 0)
        fail(ErrorKind::Config, "mean-reversion rates and vol-of-vols must be non-negative");
    if (!(theta_v.min() > 0) || !(theta_r.min() > 0)) fail(ErrorKind::Config, "mean-reversion levels must be positive");
    if (!std::isfinite(q)) fail(ErrorKind::Config, "dividend yield must be finite");
}

void ModelSpec::validate() const {
    diffusion.validate();
    if (jumps) jumps->validate();
}

}  // namespace lsvj
