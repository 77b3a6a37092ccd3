#pragma once

#include "lsvj/model.hpp"
#include "lsvj/pricer.hpp"
#include "lsvj/types.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

/// Reference implementations used by tests and validation runs. Nothing in
/// here calls the solver's stencil, banded or splitting code.
namespace lsvj::oracles {

struct McConfig {
    std::size_t paths = 1'000'000;
    std::size_t steps_per_year = 250;
    std::uint64_t seed = 20240101;
    /// Paths per independent random substream.
    std::size_t chunk = 8192;
};

struct McResult {
    double price = 0.0;
    double std_error = 0.0;
};

/// Full-truncation Euler for (v, r) and log-Euler for S with correlated
/// Gaussian increments; barriers are monitored at every time step.
McResult mc_price_diffusion(const InstrumentSpec& inst, const ModelSpec& m, const std::array<double, 3>& spot,
                            const McConfig& mc);

/// exp(dt * op) v.
Vector dense_expm_propagate(const Eigen::MatrixXd& op, const Vector& v, double dt);

/// Meixner characteristic exponent psi(u) with E exp(i u X_t) = exp(t psi(u)).
std::complex<double> meixner_exponent(double u, const MeixnerParams& p);

struct SpectralResult {
    Vector values;
    bool aliasing = false;
};

/// E[V(x + X_dt)] on a uniform grid with spacing h, computed through a
/// periodic extension padded by `pad_factor` times the grid length per side.
SpectralResult spectral_jump_propagate(const Vector& v, double h, const MeixnerParams& p, double dt,
                                       double pad_factor = 2.0);

double black_scholes_call(double S, double K, double r, double q, double sigma, double T);

double cir_bond_price(double r0, double kappa, double theta, double xi, double T);

namespace dense {

using SpMat = Eigen::SparseMatrix<double>;

enum class Side { Forward, Backward };

/// First derivative that looks only towards `side`: second order where three
/// nodes are available, first order next to the far end, zero end rows.
Eigen::MatrixXd one_sided_first(const std::vector<double>& x, Side side);

/// Three-point second derivative with zero end rows.
Eigen::MatrixXd second(const std::vector<double>& x);

/// Lifts a 1D matrix acting on `axis` to the 3D lexicographic index
/// i + n0 (j + n1 k).
SpMat lift(const Eigen::MatrixXd& a, int axis, const std::array<std::size_t, 3>& n);

/// One common-jump step on a box of log nodes, evaluated by sparse direct
/// solves of the same truncated product the solver iterates on.
Vector common_jump_step(const Vector& v, const std::array<std::vector<double>, 3>& x,
                        const std::array<double, 3>& loadings, const MeixnerParams& p, double dt, int M,
                        bool per_factor = true);

}  // namespace dense

}  // namespace lsvj::oracles
