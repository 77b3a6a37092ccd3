#pragma once

#include "lsvj/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <tuple>
#include <vector>

namespace lsvj {

/// Square matrix with bandwidth at most two on each side, stored row-wise as
/// coefficients for column offsets -2..+2. Holds every 1D stencil, the
/// discretized F_k lines and the jump-product factors.
template <typename Scalar>
class BandedOperator {
public:
    static constexpr int kHalf = 2;
    using Row = std::array<Scalar, 2 * kHalf + 1>;

    BandedOperator() = default;
    explicit BandedOperator(std::size_t n) : rows_(n, Row{}) {}

    static BandedOperator identity(std::size_t n) {
        BandedOperator op(n);
        for (auto& r : op.rows_) r[kHalf] = Scalar(1);
        return op;
    }

    std::size_t size() const { return rows_.size(); }

    Scalar& at(std::size_t row, int offset) { return rows_[row][offset + kHalf]; }
    Scalar at(std::size_t row, int offset) const { return rows_[row][offset + kHalf]; }
    Row& row(std::size_t i) { return rows_[i]; }
    const Row& row(std::size_t i) const { return rows_[i]; }

    /// Dense-index access, zero outside the band.
    Scalar operator()(std::size_t r, std::size_t c) const {
        const long off = static_cast<long>(c) - static_cast<long>(r);
        if (off < -kHalf || off > kHalf) return Scalar(0);
        return at(r, static_cast<int>(off));
    }

    /// out = A * in, both strided views of length size().
    void apply(const Scalar* in, Scalar* out, std::size_t stride = 1) const {
        const long n = static_cast<long>(size());
        for (long i = 0; i < n; ++i) {
            Scalar acc(0);
            for (int o = -kHalf; o <= kHalf; ++o) {
                const long j = i + o;
                if (j < 0 || j >= n) continue;
                const Scalar c = rows_[static_cast<std::size_t>(i)][o + kHalf];
                if (c != Scalar(0)) acc += c * in[static_cast<std::size_t>(j) * stride];
            }
            out[static_cast<std::size_t>(i) * stride] = acc;
        }
    }

    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> operator*(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) const {
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y(x.size());
        apply(x.data(), y.data());
        return y;
    }

    /// this = alpha * I + beta * this
    BandedOperator& affine(Scalar alpha, Scalar beta) {
        for (auto& r : rows_) {
            for (auto& c : r) c *= beta;
            r[kHalf] += alpha;
        }
        return *this;
    }

    BandedOperator& operator+=(const BandedOperator& o) {
        for (std::size_t i = 0; i < size(); ++i)
            for (int k = 0; k < 2 * kHalf + 1; ++k) rows_[i][k] += o.rows_[i][k];
        return *this;
    }

    BandedOperator& operator*=(Scalar s) {
        for (auto& r : rows_)
            for (auto& c : r) c *= s;
        return *this;
    }

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> to_dense() const {
        const auto n = static_cast<Eigen::Index>(size());
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
            Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (int o = -kHalf; o <= kHalf; ++o) {
                const Eigen::Index j = i + o;
                if (j >= 0 && j < n) m(i, j) = at(static_cast<std::size_t>(i), o);
            }
        return m;
    }

    /// Coordinate-format dump: one "row col value" line per stored non-zero.
    void write_coo(std::ostream& os) const {
        for (std::size_t i = 0; i < size(); ++i)
            for (int o = -kHalf; o <= kHalf; ++o) {
                const long j = static_cast<long>(i) + o;
                const Scalar c = at(i, o);
                if (j < 0 || j >= static_cast<long>(size()) || c == Scalar(0)) continue;
                os << i << ' ' << j << ' ' << c << '\n';
            }
    }

private:
    std::vector<Row> rows_;
};

using Banded = BandedOperator<double>;

/// Solves A x = b in place (b is overwritten by x) by band Gaussian elimination
/// without pivoting. `a` is consumed as workspace. Throws Solver on a zero pivot.
template <typename Scalar>
void banded_solve_inplace(BandedOperator<Scalar>& a, Scalar* b, std::size_t stride = 1) {
    constexpr int H = BandedOperator<Scalar>::kHalf;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Scalar pivot = a.at(i, 0);
        if (pivot == Scalar(0) || !std::isfinite(static_cast<double>(std::abs(pivot))))
            fail(ErrorKind::Solver, "singular band in linear solve");
        for (int k = 1; k <= H && i + static_cast<std::size_t>(k) < n; ++k) {
            const std::size_t r = i + static_cast<std::size_t>(k);
            const Scalar lower = a.at(r, -k);
            if (lower == Scalar(0)) continue;
            const Scalar f = lower / pivot;
            // row r, column i + c sits at offset c - k
            for (int c = 0; c <= H; ++c) {
                const int off = c - k;
                if (off > H) break;
                a.at(r, off) -= f * a.at(i, c);
            }
            b[r * stride] -= f * b[i * stride];
        }
    }
    for (std::size_t ii = n; ii-- > 0;) {
        Scalar acc = b[ii * stride];
        for (int c = 1; c <= H && ii + static_cast<std::size_t>(c) < n; ++c)
            acc -= a.at(ii, c) * b[(ii + static_cast<std::size_t>(c)) * stride];
        b[ii * stride] = acc / a.at(ii, 0);
    }
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> banded_solve(BandedOperator<Scalar> a,
                                                      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b) {
    banded_solve_inplace(a, b.data());
    return b;
}

struct EmReport {
    bool is_em = false;
    std::optional<std::tuple<std::size_t, std::size_t, double>> offending_entry;
    /// Minimum entry of the dense inverse; only filled for small sizes.
    std::optional<double> inverse_min;
};

inline constexpr std::size_t kEmDenseLimit = 500;

/// EM-matrix probe: positive diagonal, first off-diagonals non-positive, second
/// off-diagonals no larger than half the adjacent first one, and for sizes up
/// to kEmDenseLimit an elementwise non-negative inverse.
EmReport em_check(const Eigen::MatrixXd& m);
EmReport em_check(const Banded& op);

}  // namespace lsvj
