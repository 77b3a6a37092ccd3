#include "lsvj/stencils.hpp"

namespace lsvj {

namespace {

void require_size(const std::vector<double>& x, std::size_t need, const char* what) {
    if (x.size() < need) fail(ErrorKind::Domain, std::string(what) + ": grid too small");
}

Weights forward1(const std::vector<double>& x, std::size_t i) {
    const double h = x[i + 1] - x[i];
    return {0.0, 0.0, -1.0 / h, 1.0 / h, 0.0};
}

Weights backward1(const std::vector<double>& x, std::size_t i) {
    const double h = x[i] - x[i - 1];
    return {0.0, -1.0 / h, 1.0 / h, 0.0, 0.0};
}

Weights forward2(const std::vector<double>& x, std::size_t i) {
    const double h1 = x[i + 1] - x[i];
    const double h2 = x[i + 2] - x[i + 1];
    return {0.0, 0.0, -(2.0 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2), -h1 / (h2 * (h1 + h2))};
}

Weights backward2(const std::vector<double>& x, std::size_t i) {
    const double h1 = x[i - 1] - x[i - 2];
    const double h2 = x[i] - x[i - 1];
    return {h2 / (h1 * (h1 + h2)), -(h1 + h2) / (h1 * h2), (h1 + 2.0 * h2) / (h2 * (h1 + h2)), 0.0, 0.0};
}

Banded from_kernel(const Grid1D& g, auto&& kernel) {
    Banded op(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) op.row(i) = kernel(g.nodes, i);
    return op;
}

}  // namespace

Weights weights_first_order1(const std::vector<double>& x, std::size_t i, Dir dir) {
    const std::size_t n = x.size();
    if (dir == Dir::Forward) return i + 1 < n ? forward1(x, i) : backward1(x, i);
    return i >= 1 ? backward1(x, i) : forward1(x, i);
}

Weights weights_first_order2(const std::vector<double>& x, std::size_t i, Dir dir) {
    const std::size_t n = x.size();
    if (dir == Dir::Forward) {
        if (i + 2 < n) return forward2(x, i);
        if (i + 1 < n) return forward1(x, i);
        return backward2(x, i);
    }
    if (i >= 2) return backward2(x, i);
    if (i >= 1) return backward1(x, i);
    return forward2(x, i);
}

Weights weights_first_central(const std::vector<double>& x, std::size_t i) {
    const std::size_t n = x.size();
    if (i == 0) return forward2(x, i);
    if (i + 1 == n) return backward2(x, i);
    const double h1 = x[i] - x[i - 1];
    const double h2 = x[i + 1] - x[i];
    return {0.0, -h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2)), 0.0};
}

Weights weights_second(const std::vector<double>& x, std::size_t i) {
    if (i == 0 || i + 1 == x.size()) return {};
    const double h1 = x[i] - x[i - 1];
    const double h2 = x[i + 1] - x[i];
    return {0.0, 2.0 / (h1 * (h1 + h2)), -2.0 / (h1 * h2), 2.0 / (h2 * (h1 + h2)), 0.0};
}

Banded stencil_first_order(Dir dir, const Grid1D& g) {
    require_size(g.nodes, 2, "stencil_first_order");
    return from_kernel(g, [dir](const auto& x, std::size_t i) { return weights_first_order1(x, i, dir); });
}

Banded stencil_first_order2(Dir dir, const Grid1D& g) {
    require_size(g.nodes, 3, "stencil_first_order2");
    return from_kernel(g, [dir](const auto& x, std::size_t i) { return weights_first_order2(x, i, dir); });
}

Banded stencil_first_central(const Grid1D& g) {
    require_size(g.nodes, 3, "stencil_first_central");
    return from_kernel(g, [](const auto& x, std::size_t i) { return weights_first_central(x, i); });
}

Banded stencil_second(const Grid1D& g) {
    require_size(g.nodes, 3, "stencil_second");
    return from_kernel(g, [](const auto& x, std::size_t i) { return weights_second(x, i); });
}

}  // namespace lsvj
