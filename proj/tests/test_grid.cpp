#include "doctest.h"

#include "lsvj/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace lsvj;

namespace {

double max_step(const Grid1D& g) {
    double h = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) h = std::max(h, g.step(i));
    return h;
}

double min_step(const Grid1D& g) {
    double h = g.hi() - g.lo();
    for (std::size_t i = 1; i < g.size(); ++i) h = std::min(h, g.step(i));
    return h;
}

}  // namespace

TEST_CASE("huge density gives a near-uniform grid") {
    const Grid1D g = build_nonuniform_grid(0.0, 1000.0, 61, 100.0, 1e6);
    CHECK_NOTHROW(g.validate());
    CHECK(max_step(g) / min_step(g) < 1.01);
}

TEST_CASE("five-node grid with huge density is the integer lattice") {
    const Grid1D g = build_nonuniform_grid(0.0, 4.0, 5, 2.0, 1e9);
    REQUIRE(g.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(g.nodes[i] - static_cast<double>(i)) < 1e-3);
}

TEST_CASE("sinh grid concentrates at the focus and hits both ends exactly") {
    const Grid1D g = build_nonuniform_grid(0.0, 1000.0, 61, 100.0, 20.0);
    CHECK(g.size() == 61);
    CHECK(g.lo() == 0.0);
    CHECK(g.hi() == 1000.0);
    CHECK(g.core_begin == 0);
    CHECK(g.core_end == 61);
    const std::size_t k = g.nearest(100.0);
    const double near_focus = std::min(g.step(k), g.step(k + 1));
    CHECK(min_step(g) >= 0.8 * near_focus);
    CHECK(max_step(g) > 5.0 * min_step(g));
}

TEST_CASE("grid builder rejects bad input") {
    CHECK_THROWS_AS(build_nonuniform_grid(1.0, 0.0, 11, 0.5, 1.0), Error);
    CHECK_THROWS_AS(build_nonuniform_grid(0.0, 1.0, 4, 0.5, 1.0), Error);
    CHECK_THROWS_AS(build_nonuniform_grid(0.0, 1.0, 11, 2.0, 1.0), Error);
    CHECK_THROWS_AS(build_nonuniform_grid(0.0, 1.0, 11, 0.5, 0.0), Error);
}

TEST_CASE("validator catches broken invariants") {
    Grid1D g;
    g.nodes = {0.0, 1.0, 1.0};
    g.core_end = 3;
    CHECK_THROWS_AS(g.validate(), Error);
    g.nodes = {0.0, 1.0, 2.0};
    g.core_begin = 2;
    g.core_end = 2;
    CHECK_THROWS_AS(g.validate(), Error);
    g.core_begin = 0;
    g.core_end = 4;
    CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("snapping moves the nearest node by at most half a local step") {
    const Grid1D g = build_nonuniform_grid(0.0, 500.0, 41, 100.0, 20.0);
    for (double x : {37.3, 100.0, 101.7, 333.3}) {
        const SnapResult s = snap_to_node(g, x);
        CHECK_NOTHROW(s.grid.validate());
        CHECK(s.grid.nodes[s.index] == x);
        const double h = std::max(g.step(std::max<std::size_t>(s.index, 1)),
                                  g.step(std::min(s.index + 1, g.size() - 1)));
        CHECK(s.distance <= 0.5 * h + 1e-12);
    }
}

TEST_CASE("ghosts above an endpoint barrier copy the last interior step") {
    Grid1D g = build_nonuniform_grid(0.0, 130.0, 31, 90.0, 18.0);
    const double h = g.step(g.size() - 1);
    const Grid1D out = add_barrier_ghosts(g, 130.0, BarrierSide::Above, 2);
    CHECK_NOTHROW(out.validate());
    REQUIRE(out.size() == 33);
    CHECK(out.core_end == 31);
    CHECK(out.nodes[30] == 130.0);
    CHECK(out.step(31) == doctest::Approx(h));
    CHECK(out.step(32) == doctest::Approx(h));
}

TEST_CASE("double barrier ghosts keep both barriers as exact nodes") {
    Grid1D g = build_nonuniform_grid(0.0, 200.0, 41, 90.0, 18.0);
    g = add_barrier_ghosts(g, 130.0, BarrierSide::Above, 2);
    g = add_barrier_ghosts(g, 50.0, BarrierSide::Below, 3);
    CHECK_NOTHROW(g.validate());
    CHECK(g.find(50.0) < g.size());
    CHECK(g.find(130.0) < g.size());
    CHECK(g.core_begin == 3);
    CHECK(g.nodes[g.core_begin] == 50.0);
    CHECK(g.nodes[g.core_end - 1] == 130.0);
    CHECK(g.size() - g.core_end == 2);
}

TEST_CASE("barrier outside the domain is rejected") {
    const Grid1D g = build_nonuniform_grid(0.0, 100.0, 21, 50.0, 10.0);
    CHECK_THROWS_AS(add_barrier_ghosts(g, 150.0, BarrierSide::Above, 2), Error);
}

TEST_CASE("zero extension is the identity") {
    const Grid1D g = build_nonuniform_grid(0.0, 100.0, 21, 50.0, 10.0);
    const Grid1D e = extend_jump_grid(g, 0);
    CHECK(e.nodes == g.nodes);
    CHECK(e.core_begin == g.core_begin);
    CHECK(e.core_end == g.core_end);
}

TEST_CASE("jump extension adds growing steps and preserves the core") {
    const Grid1D g = build_nonuniform_grid(0.0, 1000.0, 61, 100.0, 20.0);
    const Grid1D e = extend_jump_grid(g, 25);
    CHECK_NOTHROW(e.validate());
    CHECK(e.size() == 86);
    CHECK(e.core_end - e.core_begin == 61);
    CHECK(std::equal(g.nodes.begin(), g.nodes.end(), e.nodes.begin() + static_cast<long>(e.core_begin)));
    for (std::size_t i = e.core_end + 1; i < e.size(); ++i)
        CHECK(e.step(i) == doctest::Approx(kJumpGridRatio * e.step(i - 1)));
}

TEST_CASE("jump extension of a positive grid places nodes on both sides") {
    const Grid1D g = build_nonuniform_grid(50.0, 150.0, 21, 100.0, 10.0);
    const Grid1D e = extend_jump_grid(g, 20);
    CHECK_NOTHROW(e.validate());
    CHECK(e.size() == 41);
    CHECK(e.core_begin > 0);
    CHECK(e.lo() > 0.0);
    CHECK(std::equal(g.nodes.begin(), g.nodes.end(), e.nodes.begin() + static_cast<long>(e.core_begin)));
}

TEST_CASE("grid csv lists one column per axis") {
    Grid3D g;
    g.s = build_nonuniform_grid(0.0, 4.0, 5, 2.0, 1e9);
    g.v.nodes = {0.0, 1.0};
    g.v.core_end = 2;
    g.r.nodes = {0.05};
    g.r.core_end = 1;
    CHECK(g.shape().size() == 10);
    std::ostringstream os;
    write_grid_csv(os, g);
    const std::string text = os.str();
    CHECK(text.rfind("S,v,r", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
}
