#pragma once

#include "lsvj/diffusion.hpp"
#include "lsvj/grid.hpp"
#include "lsvj/model.hpp"

#include <iosfwd>
#include <vector>

namespace lsvj {

/// Truncated product form of a Meixner jump propagator over one time step.
struct JumpProductPlan {
    int M = 10;
    /// 2 d dt over the whole step.
    double kappa = 0.0;
    /// Equal sub-steps so that each carries kappa / substeps < 1.
    int substeps = 1;
    double sub_dt = 0.0;
    /// K_n = a^2 / (4 pi^2 (n - 1/2)^2 sub_dt^2) and T_n = K_n sub_dt^2.
    std::vector<double> K;
    std::vector<double> T;

    double sub_kappa() const { return kappa / substeps; }
    void write(std::ostream& os) const;
};

JumpProductPlan plan_jump_product(const MeixnerParams& p, double dt, int M = 10);

enum class KappaInterpolation { PerFactor, Global };

struct JumpOptions {
    int M = 10;
    KappaInterpolation interpolation = KappaInterpolation::PerFactor;
};

/// Nodes with a strictly positive coordinate on every axis form the box the
/// jump operators act on, in log coordinates. Other nodes are left unchanged.
struct LogBox {
    std::array<std::size_t, 3> begin{};
    Shape3 full;
    Shape3 shape;
    Grid3D log_grid;

    Vector gather(const Vector& v) const;
    void scatter(const Vector& sub, Vector& v) const;
};

LogBox make_log_box(const Grid3D& g);

/// Log-coordinate line operator T (D^2 + 2c D + c2) along one axis with zero
/// end rows; D is upwinded by the sign of c.
Banded jump_line_operator(const std::vector<double>& x, double T, double c, double c2_share, double diff_scale = 1.0);

/// exp(t * m * D) v along `axis` with D the second-order one-sided stencil
/// pointing in the direction of m.
Vector jump_drift_step(const Vector& v, Axis axis, double m_dt, const Grid3D& g);

/// exp(dt phi(-i grad)) along one axis.
Vector idio_jump_step(const Vector& v, Axis axis, const MeixnerParams& p, double dt, const Grid3D& g,
                      const JumpOptions& opt = {});

/// exp(dt J_123) with grad = sum_k b_k grad_k.
Vector common_jump_step(const Vector& v, const JumpStructure& js, double dt, const Grid3D& g, const SolverConfig& cfg,
                        const JumpOptions& opt = {}, Diagnostics* diag = nullptr,
                        PicardWarmStart* warm = nullptr);

}  // namespace lsvj
