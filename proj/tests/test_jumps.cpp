#include "doctest.h"

#include "lsvj/jumps.hpp"
#include "lsvj/oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace lsvj;

namespace {

const MeixnerParams kRowS{0.04, -0.33, 52.0, 0.1};
const MeixnerParams kRowV{0.02, -0.5, 40.0, 0.03};
const MeixnerParams kRowR{0.01, -0.2, 30.0, 0.01};
const MeixnerParams kCommon{0.03, -0.1, 40.0, 0.05};

Grid1D single(double x) {
    Grid1D g;
    g.nodes = {x};
    g.core_end = 1;
    return g;
}

/// S axis on a uniform log grid x0 +- half_span, other axes a single node.
Grid3D log_line(std::size_t n, double x0 = std::log(100.0), double half_span = 1.0) {
    Grid3D g;
    const double h = 2.0 * half_span / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g.s.nodes.push_back(std::exp(x0 - half_span + h * static_cast<double>(i)));
    g.s.core_end = n;
    g.v = single(1.0);
    g.r = single(1.0);
    return g;
}

Vector bump(const Grid3D& g, double width = 0.1) {
    const double x0 = std::log(100.0);
    Vector v(static_cast<Eigen::Index>(g.s.size()));
    for (std::size_t i = 0; i < g.s.size(); ++i) {
        const double z = (std::log(g.s.nodes[i]) - x0) / width;
        v[static_cast<Eigen::Index>(i)] = std::exp(-z * z);
    }
    return v;
}

double interior_gap(const Vector& a, const Vector& b) {
    const auto n = a.size();
    double e = 0.0;
    for (Eigen::Index i = n / 5; i < n - n / 5; ++i) e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

Grid3D positive_box(std::size_t n) {
    Grid3D g;
    g.s = build_nonuniform_grid(50.0, 150.0, n, 100.0, 1e9);
    g.v = build_nonuniform_grid(0.02, 0.5, n, 0.1, 1e9);
    g.r = build_nonuniform_grid(0.01, 0.2, n, 0.05, 1e9);
    return g;
}

}  // namespace

TEST_CASE("jump product plan arithmetic") {
    const JumpProductPlan a = plan_jump_product(kRowS, 0.005);
    CHECK(a.kappa == doctest::Approx(0.52));
    CHECK(a.substeps == 1);
    const JumpProductPlan b = plan_jump_product(kRowS, 0.02);
    CHECK(b.kappa == doctest::Approx(2.08));
    CHECK(b.substeps == 3);
    CHECK(b.sub_kappa() == doctest::Approx(0.6933).epsilon(1e-3));
    CHECK(a.T.size() == 10);
    CHECK(a.T[0] == doctest::Approx(1.62e-4).epsilon(1e-2));
    for (std::size_t n = 1; n < a.T.size(); ++n) CHECK(a.T[n] < a.T[n - 1]);
    CHECK(a.K[0] * a.sub_dt * a.sub_dt == doctest::Approx(a.T[0]));
    std::ostringstream os;
    a.write(os);
    CHECK(!os.str().empty());
}

TEST_CASE("ten factors carry the exact partial share of the infinite horizon sum") {
    // sum over all n of 1/(n - 1/2)^2 is pi^2 / 2
    const JumpProductPlan p = plan_jump_product(kRowS, 0.005);
    double partial = 0.0;
    for (double t : p.T) partial += t;
    const double total = kRowS.a * kRowS.a / (4.0 * std::numbers::pi * std::numbers::pi) * std::numbers::pi *
                         std::numbers::pi / 2.0;
    double share = 0.0;
    for (int n = 1; n <= 10; ++n) share += 1.0 / ((n - 0.5) * (n - 0.5));
    share /= std::numbers::pi * std::numbers::pi / 2.0;
    CHECK(partial / total == doctest::Approx(share).epsilon(1e-12));
    CHECK(share == doctest::Approx(0.9797).epsilon(1e-4));
}

TEST_CASE("zero exponent leaves the field unchanged") {
    const Grid3D g = log_line(41);
    const Vector v = bump(g);
    CHECK((idio_jump_step(v, Axis::S, MeixnerParams{0.04, -0.3, 0.0, 0.0}, 0.01, g) - v).cwiseAbs().maxCoeff() == 0.0);

    const Grid3D box = positive_box(7);
    Vector f = Vector::LinSpaced(static_cast<Eigen::Index>(box.shape().size()), 0.0, 1.0);
    JumpStructure js;
    js.idio_s = js.idio_v = js.idio_r = kRowV;
    js.common = kCommon;
    js.loadings = {0.0, 0.0, 0.0};
    SolverConfig cfg;
    CHECK((common_jump_step(f, js, 0.01, box, cfg) - f).cwiseAbs().maxCoeff() == 0.0);
    js.loadings = {1.0, 2.0, 3.0};
    js.common = MeixnerParams{0.03, -0.1, 0.0, 0.0};
    CHECK((common_jump_step(f, js, 0.01, box, cfg) - f).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("idiosyncratic step for the v row matches the spectral oracle on 201 nodes") {
    const Grid3D g = log_line(201);
    const Vector v = bump(g);
    const Vector fd = idio_jump_step(v, Axis::S, kRowV, 0.01, g);
    const auto spec = oracles::spectral_jump_propagate(v, 2.0 / 200.0, kRowV, 0.01);
    CHECK_FALSE(spec.aliasing);
    CHECK(interior_gap(fd, spec.values) <= 1e-3);
}

TEST_CASE("idiosyncratic step for the r row matches the spectral oracle on 201 nodes") {
    const Grid3D g = log_line(201);
    const Vector v = bump(g);
    const Vector fd = idio_jump_step(v, Axis::S, kRowR, 0.01, g);
    const auto spec = oracles::spectral_jump_propagate(v, 2.0 / 200.0, kRowR, 0.01);
    CHECK(interior_gap(fd, spec.values) <= 1e-3);
}

TEST_CASE("pure drift shifts a smooth profile with second-order accuracy") {
    const MeixnerParams drift{0.04, 0.0, 0.0, 0.5};
    const double dt = 0.1;
    std::vector<double> errors;
    for (std::size_t n : {101, 201, 401}) {
        const Grid3D g = log_line(n);
        const Vector out = idio_jump_step(bump(g, 0.2), Axis::S, drift, dt, g);
        Vector want(out.size());
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (std::log(g.s.nodes[i]) + drift.m * dt - std::log(100.0)) / 0.2;
            want[static_cast<Eigen::Index>(i)] = std::exp(-z * z);
        }
        errors.push_back(interior_gap(out, want));
    }
    CHECK(std::log2(errors[0] / errors[1]) >= 1.8);
    CHECK(std::log2(errors[1] / errors[2]) >= 1.8);
}

TEST_CASE("the jump step nearly preserves constants") {
    const Grid3D g = log_line(201);
    const Vector one = Vector::Ones(201);
    for (MeixnerParams p : {kRowS, kRowV, kRowR, kCommon}) {
        p.m = 0.0;
        const Vector out = idio_jump_step(one, Axis::S, p, 0.01, g);
        CHECK(interior_gap(out, one) <= 1e-3);
    }
}

TEST_CASE("idiosyncratic steps on different axes commute within O(dt^2)") {
    const Grid3D g = positive_box(15);
    const Shape3 sh = g.shape();
    Vector v(static_cast<Eigen::Index>(sh.size()));
    for (std::size_t p = 0; p < sh.size(); ++p) {
        const auto [i, j, k] = sh.unflat(p);
        v[static_cast<Eigen::Index>(p)] = std::exp(-std::pow((g.s.nodes[i] - 100.0) / 20.0, 2)) *
                                          (1.0 + g.v.nodes[j]) * (1.0 + 3.0 * g.r.nodes[k]);
    }
    const MeixnerParams ps{0.3, -0.3, 5.0, 0.1};
    const MeixnerParams pv{0.4, 0.4, 4.0, -0.2};
    // log-grid coefficients are constant, so the two line operators commute
    // exactly and the gap sits at rounding level, far below dt^2
    for (double dt : {0.04, 0.02, 0.01}) {
        const Vector sv = idio_jump_step(idio_jump_step(v, Axis::S, ps, dt, g), Axis::V, pv, dt, g);
        const Vector vs = idio_jump_step(idio_jump_step(v, Axis::V, pv, dt, g), Axis::S, ps, dt, g);
        CHECK((sv - vs).cwiseAbs().maxCoeff() <= 1e-8 * dt * dt);
    }
}

TEST_CASE("common jump step matches the dense truncated product on an 11^3 grid") {
    const Grid3D g = positive_box(11);
    const Shape3 sh = g.shape();
    Vector v(static_cast<Eigen::Index>(sh.size()));
    for (std::size_t p = 0; p < sh.size(); ++p) {
        const auto [i, j, k] = sh.unflat(p);
        v[static_cast<Eigen::Index>(p)] = std::max(g.s.nodes[i] - 100.0, 0.0) * (1.0 + g.v.nodes[j]) + g.r.nodes[k];
    }
    JumpStructure js;
    js.idio_s = kRowS;
    js.idio_v = kRowV;
    js.idio_r = kRowR;
    js.common = kCommon;
    js.loadings = {1.0, 2.0, 3.0};
    SolverConfig cfg;
    cfg.picard_tol = 1e-12;
    const Vector got = common_jump_step(v, js, 0.01, g, cfg);
    std::array<std::vector<double>, 3> x;
    for (Axis a : kAxes)
        for (double n : g.axis(a).nodes) x[static_cast<std::size_t>(index_of(a))].push_back(std::log(n));
    const Vector want = oracles::dense::common_jump_step(v, x, js.loadings, js.common, 0.01, 10);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("jump steps leave nodes outside the positive box untouched") {
    Grid3D g = log_line(31);
    g.s.nodes.insert(g.s.nodes.begin(), 0.0);
    g.s.core_end = g.s.nodes.size();
    Vector v = Vector::Ones(static_cast<Eigen::Index>(g.s.size()));
    v[0] = 42.0;
    const Vector out = idio_jump_step(v, Axis::S, kRowV, 0.01, g);
    CHECK(out[0] == 42.0);
}

// Known violation: the second-order upwind drift and the interpolated product
// both produce negative entries from non-negative data.
TEST_CASE("jump steps keep non-negative input non-negative" * doctest::should_fail()) {
    const Grid3D g = positive_box(21);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    JumpStructure js;
    js.idio_s = kRowS;
    js.idio_v = kRowV;
    js.idio_r = kRowR;
    js.common = kCommon;
    js.loadings = {1.0, 2.0, 3.0};
    SolverConfig cfg;
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        Vector v(static_cast<Eigen::Index>(g.shape().size()));
        for (auto& x : v) x = u(rng) < 0.3 ? 0.0 : u(rng);
        for (Axis a : kAxes) worst = std::min(worst, idio_jump_step(v, a, js.idio(a), 0.01, g).minCoeff());
        if (t < 5) worst = std::min(worst, common_jump_step(v, js, 0.01, g, cfg).minCoeff());
    }
    INFO("minimum output " << worst);
    CHECK(worst >= -1e-12);
}
