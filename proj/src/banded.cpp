#include "lsvj/banded.hpp"

#include <Eigen/LU>

#include <algorithm>

namespace lsvj {

namespace {

constexpr double kInverseTol = 1e-12;

void probe_inverse(const Eigen::MatrixXd& m, EmReport& rep) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) fail(ErrorKind::Solver, "em_check: singular matrix");
    const Eigen::MatrixXd inv = lu.inverse();
    Eigen::Index r = 0, c = 0;
    const double mn = inv.minCoeff(&r, &c);
    rep.inverse_min = mn;
    if (mn < -kInverseTol * std::max(1.0, inv.cwiseAbs().maxCoeff())) {
        rep.is_em = false;
        if (!rep.offending_entry)
            rep.offending_entry = std::make_tuple(static_cast<std::size_t>(r), static_cast<std::size_t>(c), mn);
    }
}

}  // namespace

EmReport em_check(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() == 0) fail(ErrorKind::Domain, "em_check: matrix must be square and non-empty");
    EmReport rep;
    rep.is_em = true;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (!(m(i, i) > 0.0)) {
            rep.is_em = false;
            rep.offending_entry = std::make_tuple(static_cast<std::size_t>(i), static_cast<std::size_t>(i), m(i, i));
            break;
        }
    }
    if (static_cast<std::size_t>(m.rows()) <= kEmDenseLimit) {
        probe_inverse(m, rep);
    } else if (rep.is_em) {
        for (Eigen::Index i = 0; i < m.rows() && rep.is_em; ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                if (i != j && m(i, j) > 0.0) {
                    rep.is_em = false;
                    rep.offending_entry = std::make_tuple(static_cast<std::size_t>(i), static_cast<std::size_t>(j), m(i, j));
                    break;
                }
    }
    return rep;
}

EmReport em_check(const Banded& op) {
    if (op.size() == 0) fail(ErrorKind::Domain, "em_check: empty operator");
    EmReport rep;
    rep.is_em = true;
    auto flag = [&](std::size_t r, long off, double v) {
        rep.is_em = false;
        if (!rep.offending_entry)
            rep.offending_entry = std::make_tuple(r, static_cast<std::size_t>(static_cast<long>(r) + off), v);
    };
    const long n = static_cast<long>(op.size());
    for (long i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(i);
        if (!(op.at(r, 0) > 0.0)) flag(r, 0, op.at(r, 0));
        for (int side : {-1, 1}) {
            if (i + side < 0 || i + side >= n) continue;
            const double first = op.at(r, side);
            if (first > 0.0) flag(r, side, first);
            if (i + 2 * side < 0 || i + 2 * side >= n) continue;
            const double second = op.at(r, 2 * side);
            if (second > 0.0 && second > 0.5 * std::abs(first)) flag(r, 2 * side, second);
        }
    }
    if (op.size() <= kEmDenseLimit) probe_inverse(op.to_dense(), rep);
    return rep;
}

}  // namespace lsvj
