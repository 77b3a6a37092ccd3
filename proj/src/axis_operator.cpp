#include "lsvj/axis_operator.hpp"

#include "lsvj/parallel.hpp"

#include <functional>

namespace lsvj {

AxisOperator::AxisOperator(Shape3 shape, Axis axis) : shape_(shape), axis_(axis), coef_(shape.size(), Weights{}) {}

std::size_t AxisOperator::line_count() const { return shape_.size() / line_length(); }

std::size_t AxisOperator::line_base(std::size_t l) const {
    const std::size_t n0 = shape_.n[0];
    const std::size_t n1 = shape_.n[1];
    switch (axis_) {
        case Axis::S: return l * n0;
        case Axis::V: return (l % n0) + n0 * n1 * (l / n0);
        case Axis::R: return l;
    }
    return 0;
}

void AxisOperator::apply(const Vector& in, Vector& out) const {
    out.resize(in.size());
    const long n = static_cast<long>(line_length());
    const std::size_t st = line_stride();
    parallel_for(line_count(), [&](std::size_t l) {
        const std::size_t base = line_base(l);
        for (long i = 0; i < n; ++i) {
            const std::size_t p = base + static_cast<std::size_t>(i) * st;
            const Weights& w = coef_[p];
            double acc = 0.0;
            for (int o = -2; o <= 2; ++o) {
                const long j = i + o;
                if (j < 0 || j >= n || w[o + 2] == 0.0) continue;
                acc += w[o + 2] * in[static_cast<Eigen::Index>(base + static_cast<std::size_t>(j) * st)];
            }
            out[static_cast<Eigen::Index>(p)] = acc;
        }
    });
}

Vector AxisOperator::operator*(const Vector& in) const {
    Vector out;
    apply(in, out);
    return out;
}

Banded AxisOperator::line(std::size_t l) const {
    const std::size_t n = line_length();
    const std::size_t base = line_base(l);
    Banded op(n);
    for (std::size_t i = 0; i < n; ++i) op.row(i) = coef_[base + i * line_stride()];
    return op;
}

void AxisOperator::solve(const Vector& diag, double scale, Vector& rhs) const {
    const std::size_t n = line_length();
    const std::size_t st = line_stride();
    parallel_for(line_count(), [&](std::size_t l) {
        const std::size_t base = line_base(l);
        Banded work(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t p = base + i * st;
            auto& r = work.row(i);
            r = coef_[p];
            for (auto& c : r) c *= scale;
            r[2] += diag[static_cast<Eigen::Index>(p)];
        }
        banded_solve_inplace(work, rhs.data() + base, st);
    });
}

void AxisOperator::solve(double diag, double scale, Vector& rhs) const {
    solve(Vector::Constant(static_cast<Eigen::Index>(size()), diag), scale, rhs);
}

AxisOperator& AxisOperator::operator+=(const AxisOperator& o) {
    if (!(o.shape_ == shape_) || o.axis_ != axis_) fail(ErrorKind::Domain, "AxisOperator: mismatched operands");
    for (std::size_t p = 0; p < coef_.size(); ++p)
        for (int k = 0; k < 5; ++k) coef_[p][k] += o.coef_[p][k];
    return *this;
}

AxisOperator& AxisOperator::operator*=(double s) {
    for (auto& w : coef_)
        for (auto& c : w) c *= s;
    return *this;
}

AxisOperator& AxisOperator::add_diagonal(const Vector& c) {
    for (std::size_t p = 0; p < coef_.size(); ++p) coef_[p][2] += c[static_cast<Eigen::Index>(p)];
    return *this;
}

namespace {

struct LineLayout {
    std::size_t count;
    std::size_t stride;
    std::function<std::size_t(std::size_t)> base;
};

LineLayout layout(const Shape3& shape, Axis axis) {
    const std::size_t n0 = shape.n[0];
    const std::size_t n1 = shape.n[1];
    const std::size_t len = shape.extent(axis);
    LineLayout l{shape.size() / len, shape.stride(axis), {}};
    switch (axis) {
        case Axis::S: l.base = [n0](std::size_t i) { return i * n0; }; break;
        case Axis::V: l.base = [n0, n1](std::size_t i) { return (i % n0) + n0 * n1 * (i / n0); }; break;
        case Axis::R: l.base = [](std::size_t i) { return i; }; break;
    }
    return l;
}

}  // namespace

void apply_lines(const Shape3& shape, Axis axis, std::size_t begin, const Banded& a, Vector& v) {
    if (begin + a.size() > shape.extent(axis)) fail(ErrorKind::Domain, "apply_lines: range exceeds axis");
    const LineLayout l = layout(shape, axis);
    parallel_for(l.count, [&](std::size_t i) {
        const std::size_t base = l.base(i) + begin * l.stride;
        std::vector<double> in(a.size()), out(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) in[k] = v[static_cast<Eigen::Index>(base + k * l.stride)];
        a.apply(in.data(), out.data());
        for (std::size_t k = 0; k < a.size(); ++k) v[static_cast<Eigen::Index>(base + k * l.stride)] = out[k];
    });
}

void solve_lines(const Shape3& shape, Axis axis, std::size_t begin, const Banded& a, Vector& rhs) {
    if (begin + a.size() > shape.extent(axis)) fail(ErrorKind::Domain, "solve_lines: range exceeds axis");
    const LineLayout l = layout(shape, axis);
    parallel_for(l.count, [&](std::size_t i) {
        Banded work = a;
        banded_solve_inplace(work, rhs.data() + l.base(i) + begin * l.stride, l.stride);
    });
}

}  // namespace lsvj
