#include "lsvj/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace lsvj {

std::vector<double> Grid1D::core_nodes() const {
    return {nodes.begin() + static_cast<std::ptrdiff_t>(core_begin), nodes.begin() + static_cast<std::ptrdiff_t>(core_end)};
}

std::size_t Grid1D::nearest(double x) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
    if (it == nodes.begin()) return 0;
    if (it == nodes.end()) return nodes.size() - 1;
    const std::size_t i = static_cast<std::size_t>(it - nodes.begin());
    return (x - nodes[i - 1] <= nodes[i] - x) ? i - 1 : i;
}

std::size_t Grid1D::find(double x) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
    if (it != nodes.end() && *it == x) return static_cast<std::size_t>(it - nodes.begin());
    return nodes.size();
}

void Grid1D::validate() const {
    if (nodes.empty()) fail(ErrorKind::Domain, "grid has no nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1])) fail(ErrorKind::Domain, "grid nodes must be strictly increasing");
    for (double x : nodes)
        if (!std::isfinite(x)) fail(ErrorKind::Domain, "grid nodes must be finite");
    if (!(core_begin < core_end && core_end <= nodes.size())) fail(ErrorKind::Domain, "grid core range is invalid");
}

const Grid1D& Grid3D::axis(Axis a) const {
    switch (a) {
        case Axis::S: return s;
        case Axis::V: return v;
        case Axis::R: return r;
    }
    return s;
}

Grid1D& Grid3D::axis(Axis a) { return const_cast<Grid1D&>(static_cast<const Grid3D&>(*this).axis(a)); }

void Grid3D::validate() const {
    s.validate();
    v.validate();
    r.validate();
}

Grid1D build_nonuniform_grid(double lo, double hi, std::size_t n, double focus, double density) {
    if (!(lo < hi)) fail(ErrorKind::Config, "grid bounds must satisfy lo < hi");
    if (n < 5) fail(ErrorKind::Config, "grid needs at least 5 nodes");
    if (!(focus >= lo && focus <= hi)) fail(ErrorKind::Config, "grid focus must lie inside the bounds");
    if (!(density > 0)) fail(ErrorKind::Config, "grid density must be positive");

    const double xi_lo = std::asinh((lo - focus) / density);
    const double xi_hi = std::asinh((hi - focus) / density);
    Grid1D g;
    g.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = xi_lo + (xi_hi - xi_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        g.nodes[i] = focus + density * std::sinh(xi);
    }
    g.nodes.front() = lo;
    g.nodes.back() = hi;
    g.core_begin = 0;
    g.core_end = n;
    g.validate();
    return g;
}

SnapResult snap_to_node(const Grid1D& g, double x) {
    if (!(x >= g.lo() && x <= g.hi())) fail(ErrorKind::Domain, "snap target lies outside the grid");
    SnapResult res{g, g.nearest(x), 0.0};
    res.distance = std::abs(g.nodes[res.index] - x);
    res.grid.nodes[res.index] = x;
    res.grid.validate();
    return res;
}

Grid1D add_barrier_ghosts(const Grid1D& g, double barrier, BarrierSide side, std::size_t count) {
    if (!(barrier >= g.lo() && barrier <= g.hi())) fail(ErrorKind::Domain, "barrier lies outside the grid domain");
    if (count < 2 || count > 3) fail(ErrorKind::Config, "barrier ghost count must be 2 or 3");
    auto [snapped, ib, dist] = snap_to_node(g, barrier);
    (void)dist;
    Grid1D out;
    if (side == BarrierSide::Above) {
        if (ib == 0) fail(ErrorKind::Domain, "upper barrier at the lower grid end");
        const double h = snapped.nodes[ib] - snapped.nodes[ib - 1];
        out.nodes.assign(snapped.nodes.begin(), snapped.nodes.begin() + static_cast<std::ptrdiff_t>(ib) + 1);
        for (std::size_t k = 1; k <= count; ++k) out.nodes.push_back(barrier + static_cast<double>(k) * h);
        out.core_begin = std::min(snapped.core_begin, ib);
        out.core_end = std::min(snapped.core_end, ib + 1);
    } else {
        if (ib + 1 >= snapped.size()) fail(ErrorKind::Domain, "lower barrier at the upper grid end");
        const double h = snapped.nodes[ib + 1] - snapped.nodes[ib];
        for (std::size_t k = count; k >= 1; --k) out.nodes.push_back(barrier - static_cast<double>(k) * h);
        out.nodes.insert(out.nodes.end(), snapped.nodes.begin() + static_cast<std::ptrdiff_t>(ib), snapped.nodes.end());
        const std::size_t old_begin = std::max(snapped.core_begin, ib);
        out.core_begin = old_begin - ib + count;
        out.core_end = (snapped.core_end > ib ? snapped.core_end - ib : 1) + count;
    }
    out.validate();
    return out;
}

Grid1D extend_jump_grid(const Grid1D& g, std::size_t extra) {
    if (extra == 0) return g;
    std::vector<double> below;
    std::size_t n_below = 0;
    if (g.lo() > 0.0 && g.size() >= 2) {
        double h = g.step(1);
        double x = g.lo();
        for (std::size_t k = 0; k < extra / 2; ++k) {
            h *= kJumpGridRatio;
            if (x - h <= 0.0) break;
            x -= h;
            below.push_back(x);
        }
        n_below = below.size();
    }
    Grid1D out;
    out.nodes.assign(below.rbegin(), below.rend());
    out.nodes.insert(out.nodes.end(), g.nodes.begin(), g.nodes.end());
    double h = g.step(g.size() - 1);
    double x = g.hi();
    for (std::size_t k = 0; k < extra - n_below; ++k) {
        h *= kJumpGridRatio;
        x += h;
        out.nodes.push_back(x);
    }
    out.core_begin = g.core_begin + n_below;
    out.core_end = g.core_end + n_below;
    out.validate();
    return out;
}

void write_grid_csv(std::ostream& os, const Grid3D& g) {
    os << "S,v,r\n";
    const std::size_t rows = std::max({g.s.size(), g.v.size(), g.r.size()});
    os.precision(17);
    for (std::size_t i = 0; i < rows; ++i) {
        for (Axis a : kAxes) {
            const Grid1D& ax = g.axis(a);
            if (a != Axis::S) os << ',';
            if (i < ax.size()) os << ax.nodes[i];
        }
        os << '\n';
    }
}

}  // namespace lsvj
