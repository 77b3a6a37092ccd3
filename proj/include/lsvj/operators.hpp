#pragma once

#include "lsvj/axis_operator.hpp"
#include "lsvj/grid.hpp"
#include "lsvj/model.hpp"

#include <array>

namespace lsvj {

/// Coefficient functions of the mixed terms. For the pair (a1, a2) the term is
/// rho * w1 * w2 * d^2/(da1 da2), with w1, w2 sampled on every node.
struct MixedPair {
    Axis a1 = Axis::S;
    Axis a2 = Axis::V;
    double rho = 0.0;
    Vector w1;
    Vector w2;

    bool active() const { return rho != 0.0 && w1.size() > 0 && (w1.array() * w2.array()).abs().maxCoeff() > 0.0; }
};

/// The split operator D = F0 + F1 + F2 + F3 frozen at one calendar time.
struct DiffusionOperators {
    Shape3 shape;
    std::array<AxisOperator, 3> f;      // F1 (S), F2 (v), F3 (r)
    std::array<MixedPair, 3> mixed;     // (S,v), (S,r), (v,r)
    std::array<AxisOperator, 3> central; // first-derivative central stencils with zero end rows

    const AxisOperator& F(Axis a) const { return f[static_cast<std::size_t>(index_of(a))]; }
};

struct AssemblyOptions {
    /// Adds the -r V discount split evenly between F1 and F3.
    bool discount = true;
};

/// W(S) = sigma_s(S,t) S^c, W(v) = xi_v(t) v^{a+1/2}, W(r) = xi_r(t) r^b.
double w_s(const DiffusionParams& d, double s, double t);
double w_v(const DiffusionParams& d, double v, double t);
double w_r(const DiffusionParams& d, double r, double t);

/// F_k for k in {1, 2, 3}; advection upwinded with second-order one-sided
/// stencils, diffusion central, boundary rows per the module conventions.
AxisOperator assemble_F(int k, const ModelSpec& m, const Grid3D& g, double t, const AssemblyOptions& opt = {});

/// Coefficients of the three mixed terms at calendar time t.
std::array<MixedPair, 3> assemble_mixed(const ModelSpec& m, const Grid3D& g, double t);

DiffusionOperators assemble_operators(const ModelSpec& m, const Grid3D& g, double t, const AssemblyOptions& opt = {});

/// Central first-derivative operator along `a` with zero end rows.
AxisOperator central_first_operator(const Grid3D& g, Axis a);

/// F0 V with central x central stencils (zero on boundary rows of either axis).
Vector apply_F0(const DiffusionOperators& ops, const Vector& v);
/// One mixed term applied with the derivative operators d1 (along a1) and d2 (along a2).
Vector apply_mixed(const MixedPair& p, const AxisOperator& d1, const AxisOperator& d2, const Vector& v);

/// (F1 + F2 + F3) V.
Vector apply_F123(const DiffusionOperators& ops, const Vector& v);

}  // namespace lsvj
