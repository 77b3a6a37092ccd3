#pragma once

#include "lsvj/banded.hpp"
#include "lsvj/grid.hpp"

#include <array>

namespace lsvj {

enum class Dir { Forward, Backward };

/// Five weights for offsets -2..+2 at a single node.
using Weights = std::array<double, 5>;

/// Non-uniform stencil weights at node i of `x`. Every kernel annihilates
/// constants exactly. Kernels fall back to a lower order (or to the opposite
/// side) when the preferred nodes do not exist.
Weights weights_first_order1(const std::vector<double>& x, std::size_t i, Dir dir);
Weights weights_first_order2(const std::vector<double>& x, std::size_t i, Dir dir);
Weights weights_first_central(const std::vector<double>& x, std::size_t i);
/// Three-point second derivative; zero on the two end rows.
Weights weights_second(const std::vector<double>& x, std::size_t i);

Banded stencil_first_order(Dir dir, const Grid1D& g);
Banded stencil_first_order2(Dir dir, const Grid1D& g);
Banded stencil_first_central(const Grid1D& g);
Banded stencil_second(const Grid1D& g);

}  // namespace lsvj
