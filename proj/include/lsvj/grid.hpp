#pragma once

#include "lsvj/types.hpp"

#include <iosfwd>
#include <vector>

namespace lsvj {

/// Strictly increasing node vector. [core_begin, core_end) is the diffusion
/// region; nodes outside it are barrier ghosts or jump-grid extensions.
struct Grid1D {
    std::vector<double> nodes;
    std::size_t core_begin = 0;
    std::size_t core_end = 0;

    std::size_t size() const { return nodes.size(); }
    double lo() const { return nodes.front(); }
    double hi() const { return nodes.back(); }
    /// h_i = nodes[i] - nodes[i-1], i >= 1.
    double step(std::size_t i) const { return nodes[i] - nodes[i - 1]; }
    std::vector<double> core_nodes() const;
    std::size_t nearest(double x) const;
    /// Index of x when it is a node (exact match), otherwise size().
    std::size_t find(double x) const;

    /// Throws Domain on any broken invariant.
    void validate() const;
};

struct Grid3D {
    Grid1D s;
    Grid1D v;
    Grid1D r;

    const Grid1D& axis(Axis a) const;
    Grid1D& axis(Axis a);
    Shape3 shape() const { return Shape3{{s.size(), v.size(), r.size()}}; }
    void validate() const;
};

/// sinh-stretched grid on [lo, hi] concentrated at `focus`; `density` is the
/// stretch length scale, so large values approach a uniform grid.
Grid1D build_nonuniform_grid(double lo, double hi, std::size_t n, double focus, double density);

struct SnapResult {
    Grid1D grid;
    std::size_t index;
    double distance;
};

/// Moves the node nearest to `x` onto `x`.
SnapResult snap_to_node(const Grid1D& g, double x);

enum class BarrierSide { Above, Below };

/// Snaps the barrier to a node, drops nodes beyond it and appends `count`
/// ghost nodes beyond the barrier spaced like the adjacent interior interval.
Grid1D add_barrier_ghosts(const Grid1D& g, double barrier, BarrierSide side, std::size_t count);

inline constexpr double kJumpGridRatio = 1.15;

/// Extends the grid with `extra` geometrically growing steps. Nodes go above
/// the upper end; when the lower end is positive, up to half go below it as
/// long as they stay positive.
Grid1D extend_jump_grid(const Grid1D& g, std::size_t extra);

/// Node vectors as CSV columns S,v,r (shorter columns left blank).
void write_grid_csv(std::ostream& os, const Grid3D& g);

}  // namespace lsvj
