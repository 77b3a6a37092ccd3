#pragma once

#include "lsvj/diffusion.hpp"
#include "lsvj/jumps.hpp"

#include <optional>
#include <string>

namespace lsvj {

enum class InstrumentKind { EuropeanCall, EuropeanPut, DoubleBarrierCall, UpAndOutCall, ZeroCouponBond, GaussianBump };

InstrumentKind parse_instrument_kind(const std::string& s);
std::string to_string(InstrumentKind k);

struct InstrumentSpec {
    InstrumentKind kind = InstrumentKind::EuropeanCall;
    double strike = 100.0;
    double maturity = 1.0;
    std::optional<double> lower_barrier;
    std::optional<double> upper_barrier;
    double rebate = 0.0;
    /// Width of the smooth payoff exp(-((S - K)/width)^2) used for convergence studies.
    double bump_width = 20.0;

    void validate() const;
};

/// Node counts and extents of the pricing grid before ghosts and jump extension.
struct GridSpec {
    std::size_t n_s = 61;
    std::size_t n_v = 31;
    std::size_t n_r = 31;
    double s_max = 1000.0;
    /// Zero means 5 theta_v (resp. 5 theta_r).
    double v_max = 0.0;
    double r_max = 0.0;
    double s_density = 0.0;  // zero: 0.2 * focus
    double v_density = 0.0;  // zero: v_max / 10
    double r_density = 0.0;  // zero: r_max / 10
    std::size_t ghost_count = 3;
    std::size_t jump_extra = 25;
    double s0 = 100.0;
    /// Negative means theta_v(0) (resp. theta_r(0)).
    double v0 = -1.0;
    double r0 = -1.0;
    /// Snap s0, v0, r0 onto nodes.
    bool snap_spot = true;

    void validate() const;
};

Grid3D build_pricing_grid(const GridSpec& gs, const InstrumentSpec& inst, const ModelSpec& m);

/// Spot coordinates used for reporting (v0, r0 resolved from the model when negative).
std::array<double, 3> spot_point(const GridSpec& gs, const ModelSpec& m);

Vector terminal_payoff(const InstrumentSpec& inst, const Grid3D& g);

/// Barrier and far-field conditions imposed after every sub-step.
void apply_boundary_conditions(Vector& v, const InstrumentSpec& inst, const Grid3D& g, double tau);

struct PriceSurface {
    Vector values;
    Grid3D grid;
    double tau = 0.0;
    std::string meta;

    /// Tensor Lagrange interpolation on up to four nodes per axis.
    double value_at(double s, double v, double r) const;
};

struct PricingOptions {
    JumpOptions jumps{};
    /// Record the minimum over every intermediate field.
    bool track_intermediate = true;
    /// Reverse the order of the nine splitting stages.
    bool reverse_splitting = false;
};

/// Minimum over every intermediate field of the last run using track_intermediate.
struct PricingReport {
    double intermediate_min = 0.0;
    std::size_t steps = 0;
    Diagnostics diagnostics;
};

PriceSurface price(const InstrumentSpec& inst, const ModelSpec& m, const Grid3D& g, const SolverConfig& cfg,
                   const PricingOptions& opt = {}, PricingReport* report = nullptr);

/// Advances `v` from tau to tau + dt by the nine-stage splitting.
Vector splitting_step(const Vector& v, const InstrumentSpec& inst, const ModelSpec& m, const Grid3D& g,
                      const SolverConfig& cfg, double tau, double dt, bool damped, const PricingOptions& opt,
                      PricingReport* report);

PriceSurface zero_coupon_bond(const ModelSpec& m, const Grid3D& g, const SolverConfig& cfg, double T,
                              PricingReport* report = nullptr);

}  // namespace lsvj
