#pragma once

#include "lsvj/operators.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace lsvj {

enum class Scheme { HvExplicitMixed, ImplicitA, ImplicitB, FullyImplicit };
/// Stencil family of the implicit mixed-derivative solve: A uses first-order
/// one-sided differences, B second-order ones.
enum class MixedVariant { A, B };
/// Diagonal shifts of the two Picard factors: Unit sets P = Q = 1, Shifted sets
/// P = beta sqrt(dt)/h1, Q = beta sqrt(dt)/h2.
enum class PicardScaling { Unit, Shifted };

Scheme parse_scheme(const std::string& s);
std::string to_string(Scheme s);

struct SolverConfig {
    double dt = 0.005;
    double theta = 0.8;
    double beta_mult = 10.0;
    double picard_tol = 1e-6;
    int picard_max = 10;
    /// Throw Solver when the cap is reached above tolerance.
    bool picard_strict = false;
    /// Terms of the Neumann series (I - XY)^{-1} used as the first Picard
    /// iterate when no warm start is available.
    int picard_predictor = 2;
    PicardScaling picard_scaling = PicardScaling::Unit;
    Scheme scheme = Scheme::FullyImplicit;
    MixedVariant mixed_variant = MixedVariant::B;
    int rannacher_steps = 0;
    bool discount = true;

    void validate() const;
};

struct ValueField {
    Vector data;
    double tau = 0.0;
};

struct PicardRecord {
    double tau = 0.0;
    int pair = 0;
    int iterations = 0;
    double last_change = 0.0;
    /// Ratio of the last two successive changes; 0 when only one iteration ran.
    double contraction = 0.0;
    bool converged = true;
};

/// Per-step diagnostics; the solver appends to it when a pointer is supplied.
struct Diagnostics {
    std::vector<PicardRecord> picard;
    std::vector<double> step_tau;
    std::vector<double> step_min;
    std::vector<double> step_max;

    void write_picard_csv(std::ostream& os) const;
};

/// Last converged correction V - V_in of each mixed solve, keyed by call
/// site. A stored correction of matching size replaces the Neumann predictor
/// as the first Picard iterate of the next solve at the same site.
struct PicardWarmStart {
    std::map<int, Vector> delta;
};

/// Everything one diffusion step needs besides the field.
struct StepContext {
    const ModelSpec* model = nullptr;
    const Grid3D* grid = nullptr;
    const SolverConfig* cfg = nullptr;
    Diagnostics* diag = nullptr;
    PicardWarmStart* warm = nullptr;
    /// Call-site index combined with the pair index to key `warm`.
    int slot = 0;
};

/// beta_mult * max over nodes of [w2 + |rho| w1] for one mixed pair.
double choose_beta(const MixedPair& p, double beta_mult);
double choose_beta(const ModelSpec& m, const Grid3D& g, double t, int pair, double beta_mult);

/// Solves [1 - dt rho w1 w2 D1 D2] V = v_in by Picard iterations on the two
/// factored 1D systems. The stencils D1, D2 are one-sided in the direction
/// picked by the sign of rho and the variant sets their order.
Vector mixed_step(const Vector& v_in, const MixedPair& p, double dt, MixedVariant variant, const StepContext& ctx,
                  double tau = 0.0, int pair_index = 0);

/// Line matrices P - X (along a1) and Q + Y (along a2) of the factored mixed
/// solve with the shifts P = beta sqrt(dt)/h1, Q = beta sqrt(dt)/h2.
struct MixedLhs {
    std::vector<Banded> first;
    std::vector<Banded> second;
};
MixedLhs mixed_lhs_matrices(const MixedPair& p, const Grid3D& g, double dt, MixedVariant variant, double beta_mult);

Vector mixed_step_scheme_A(const Vector& v_in, const MixedPair& p, double dt, const StepContext& ctx);
Vector mixed_step_scheme_B(const Vector& v_in, const MixedPair& p, double dt, const StepContext& ctx);

/// The three mixed solves in the order (S,v), (S,r), (v,r).
Vector mixed_split(const Vector& v, const DiffusionOperators& ops, double dt, MixedVariant variant,
                   const StepContext& ctx, double tau = 0.0);

/// Fully implicit stage: mixed solves, then [1 - dt F_k]^{-1} for k = 1, 2, 3.
Vector fully_implicit_stage(const Vector& v, const DiffusionOperators& ops, double dt, MixedVariant variant,
                            const StepContext& ctx, double tau = 0.0);

/// One Hundsdorfer-Verwer step with explicit central mixed terms. ops0 and
/// ops1 are frozen at the left and right ends of the step.
Vector hv_step(const Vector& v, const DiffusionOperators& ops0, const DiffusionOperators& ops1, double dt,
               const StepContext& ctx);

/// HV skeleton whose first stage is the implicit mixed solve followed by the
/// explicit F1 + F2 + F3 update, with the matching corrector stage.
Vector hv_with_implicit_mixed(const Vector& v, const DiffusionOperators& ops0, const DiffusionOperators& ops1,
                              double dt, MixedVariant variant, const StepContext& ctx, double tau = 0.0);

/// HV skeleton whose predictor and corrector use the fully implicit stage.
Vector fully_implicit_step(const Vector& v, const DiffusionOperators& ops0, const DiffusionOperators& ops1, double dt,
                           const StepContext& ctx, double tau = 0.0);

/// Dispatches on ctx.cfg->scheme; `damped` forces two implicit half steps.
Vector diffusion_step(const Vector& v, const DiffusionOperators& ops0, const DiffusionOperators& ops1, double dt,
                      const StepContext& ctx, double tau = 0.0, bool damped = false);

}  // namespace lsvj
