#pragma once

#include "lsvj/banded.hpp"
#include "lsvj/stencils.hpp"
#include "lsvj/types.hpp"

#include <vector>

namespace lsvj {

/// Linear operator on a 3D field that acts along a single axis: every node
/// carries five weights for its neighbours at offsets -2..+2 along `axis`.
/// Lines are independent, so apply and solve parallelize over them.
class AxisOperator {
public:
    AxisOperator() = default;
    AxisOperator(Shape3 shape, Axis axis);

    Axis axis() const { return axis_; }
    const Shape3& shape() const { return shape_; }
    std::size_t size() const { return coef_.size(); }

    Weights& at(std::size_t flat) { return coef_[flat]; }
    const Weights& at(std::size_t flat) const { return coef_[flat]; }

    std::size_t line_count() const;
    std::size_t line_length() const { return shape_.extent(axis_); }
    std::size_t line_stride() const { return shape_.stride(axis_); }
    /// Flat index of the first node of line `l`.
    std::size_t line_base(std::size_t l) const;

    /// out = A in
    void apply(const Vector& in, Vector& out) const;
    Vector operator*(const Vector& in) const;

    /// Overwrites rhs with x solving (diag + scale A) x = rhs, diag per node.
    void solve(const Vector& diag, double scale, Vector& rhs) const;
    /// Same with a constant diagonal.
    void solve(double diag, double scale, Vector& rhs) const;

    /// The 1D operator on line `l`.
    Banded line(std::size_t l) const;

    AxisOperator& operator+=(const AxisOperator& o);
    AxisOperator& operator*=(double s);
    /// Adds `c[p]` to the diagonal weight of node p.
    AxisOperator& add_diagonal(const Vector& c);

private:
    Shape3 shape_{};
    Axis axis_ = Axis::S;
    std::vector<Weights> coef_;
};

/// Applies the same 1D operator to every line along `axis`, restricted to the
/// positions [begin, begin + a.size()); other positions are left unchanged.
void apply_lines(const Shape3& shape, Axis axis, std::size_t begin, const Banded& a, Vector& v);
/// Solves a x = rhs on every line along `axis` over the same position range.
void solve_lines(const Shape3& shape, Axis axis, std::size_t begin, const Banded& a, Vector& rhs);

}  // namespace lsvj
