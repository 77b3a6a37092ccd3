#include "doctest.h"

#include "lsvj/model.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace lsvj;

namespace {

const MeixnerParams kRowS{0.04, -0.33, 52.0, 0.1};
const MeixnerParams kRowV{0.02, -0.5, 40.0, 0.03};
const MeixnerParams kRowR{0.01, -0.2, 30.0, 0.01};
const MeixnerParams kCommon{0.03, -0.1, 40.0, 0.05};

// Direct long-double evaluation of the closed form with std::cosh; independent
// of the overflow-free rewrite used by the library.
std::complex<long double> exponent_reference(long double u, const MeixnerParams& p) {
    using C = std::complex<long double>;
    const long double a = p.a, b = p.b, d = p.d, m = p.m;
    const C z = C(a * u, -b) / 2.0L;
    return 2.0L * d * (std::log(C(std::cos(b / 2.0L))) - std::log(std::cosh(z))) + C(0.0L, m * u);
}

JumpStructure reference_jumps(double scale = 1.0) {
    JumpStructure js;
    js.idio_s = kRowS;
    js.idio_v = kRowV;
    js.idio_r = kRowR;
    js.common = kCommon;
    js.loadings = {1.0 * scale, 2.0 * scale, 3.0 * scale};
    return js;
}

}  // namespace

TEST_CASE("meixner exponent vanishes at zero") {
    for (const auto& p : {kRowS, kRowV, kRowR, kCommon}) {
        const auto v = meixner_char_exponent(std::complex<double>(0.0), p);
        CHECK(std::abs(v) < 1e-15 * (1.0 + 2.0 * p.d));
    }
}

TEST_CASE("meixner exponent matches a long-double closed form at u = 1 for the S row") {
    const auto ref = exponent_reference(1.0L, kRowS);
    const auto got = meixner_char_exponent(std::complex<double>(1.0), kRowS);
    const double tol = 1e-15 * 2.0 * kRowS.d;
    CHECK(std::abs(got.real() - static_cast<double>(ref.real())) < tol);
    CHECK(std::abs(got.imag() - static_cast<double>(ref.imag())) < tol);
}

TEST_CASE("meixner exponent matches the reference across frequencies") {
    for (const auto& p : {kRowS, kRowV, kRowR, kCommon})
        for (double u : {-300.0, -17.5, -1.0, 0.3, 4.0, 55.0, 250.0}) {
            const auto ref = exponent_reference(u, p);
            const auto got = meixner_char_exponent(std::complex<double>(u), p);
            const double scale = std::max(1.0, static_cast<double>(std::abs(ref)));
            CHECK(std::abs(got - std::complex<double>(ref)) < 1e-12 * scale);
        }
}

TEST_CASE("symmetric meixner exponent is -2d log cosh(a u / 2)") {
    const MeixnerParams p{0.3, 0.0, 7.0, 0.0};
    for (double u : {0.5, 2.0, 9.0}) {
        const auto got = meixner_char_exponent(std::complex<double>(u), p);
        CHECK(got.imag() == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(got.real() == doctest::Approx(-2.0 * p.d * std::log(std::cosh(p.a * u / 2.0))).epsilon(1e-13));
        CHECK(got.real() <= 0.0);
    }
}

TEST_CASE("meixner exponent is Hermitian and its diffusive part is non-positive") {
    for (const auto& p : {kRowS, kRowV, kRowR, kCommon})
        for (double u : {0.1, 1.0, 13.0, 140.0}) {
            const auto plus = meixner_char_exponent(std::complex<double>(u), p);
            const auto minus = meixner_char_exponent(std::complex<double>(-u), p);
            CHECK(std::abs(minus - std::conj(plus)) < 1e-12 * std::max(1.0, std::abs(plus)));
            CHECK(plus.real() <= 1e-14);
        }
}

TEST_CASE("meixner variance equals minus the second derivative of the exponent") {
    for (const auto& p : {kRowS, kRowV, kRowR, kCommon}) {
        const long double h = 1e-3L;
        const long double f0 = exponent_reference(0.0L, p).real();
        const long double fp = exponent_reference(h, p).real();
        const long double fm = exponent_reference(-h, p).real();
        const double numeric = -static_cast<double>((fp - 2.0L * f0 + fm) / (h * h));
        CHECK(meixner_variance(p) == doctest::Approx(numeric).epsilon(1e-6));
    }
}

TEST_CASE("second moment of the levy density equals the variance") {
    for (const auto& p : {kRowV, kCommon}) {
        // y^2 mu(y) is smooth at 0 with limit d a / pi
        const double span = 60.0 * p.a;
        const int n = 200000;
        const double h = span / n;
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double y = (i + 0.5) * h;
            total += h * y * y * (meixner_levy_density(y, p) + meixner_levy_density(-y, p));
        }
        CHECK(total == doctest::Approx(meixner_variance(p)).epsilon(1e-6));
    }
    CHECK_THROWS(meixner_levy_density(0.0, kRowS));
}

TEST_CASE("levy density is non-negative and skewed by b") {
    const MeixnerParams p{0.2, 0.8, 3.0, 0.0};
    for (double y : {0.01, 0.1, 0.5}) {
        CHECK(meixner_levy_density(y, p) > meixner_levy_density(-y, p));
        CHECK(meixner_levy_density(-y, p) > 0.0);
    }
}

TEST_CASE("meixner parameter validation") {
    CHECK_NOTHROW(kRowS.validate());
    CHECK_THROWS_AS((MeixnerParams{0.0, 0.0, 1.0, 0.0}.validate()), Error);
    CHECK_THROWS_AS((MeixnerParams{1.0, 3.2, 1.0, 0.0}.validate()), Error);
    CHECK_THROWS_AS((MeixnerParams{1.0, 0.0, -1.0, 0.0}.validate()), Error);
}

TEST_CASE("pairwise jump correlation flips sign with a single loading") {
    JumpStructure js = reference_jumps();
    const double base = pairwise_jump_correlation(Axis::S, Axis::V, js);
    CHECK(base > 0.0);
    js.loadings[0] = -js.loadings[0];
    CHECK(pairwise_jump_correlation(Axis::S, Axis::V, js) == -base);
}

TEST_CASE("pairwise jump correlation approaches one for large loadings") {
    const JumpStructure js = reference_jumps(1e3);
    CHECK(pairwise_jump_correlation(Axis::S, Axis::V, js) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(pairwise_jump_correlation(Axis::V, Axis::R, js) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(pairwise_jump_correlation(Axis::S, Axis::R, js) <= 1.0);
}

TEST_CASE("pairwise jump correlation vanishes without a common factor") {
    JumpStructure js = reference_jumps();
    js.loadings = {0.0, 2.0, 3.0};
    CHECK(pairwise_jump_correlation(Axis::S, Axis::V, js) == 0.0);
}

TEST_CASE("total correlation reductions") {
    JumpStructure none;
    none.idio_s = none.idio_v = none.idio_r = none.common = MeixnerParams{1.0, 0.0, 0.0, 0.0};
    for (double rho : {-0.9, -0.3, 0.0, 0.47, 0.99})
        CHECK(std::abs(total_correlation(Axis::S, Axis::V, 0.3, 0.7, rho, none) - rho) <= 1e-14);

    const JumpStructure js = reference_jumps();
    CHECK(total_correlation(Axis::S, Axis::R, 0.0, 0.0, 0.0, js) ==
          doctest::Approx(pairwise_jump_correlation(Axis::S, Axis::R, js)).epsilon(1e-14));
}

TEST_CASE("cosine law reproduces orthogonal and aligned cases") {
    CHECK(cosine_law_rho(0.0, 0.0, 0.0) == doctest::Approx(1.0));
    CHECK(cosine_law_rho(0.0, 0.0, std::numbers::pi / 2) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(cosine_law_rho(0.5, 0.5, std::numbers::pi) == doctest::Approx(0.25 - 0.75));
    CHECK_THROWS(cosine_law_rho(1.5, 0.0, 0.0));
}

TEST_CASE("piecewise constant lookup") {
    const PiecewiseConstant f({0.0, 1.0, 2.0}, {3.0, 5.0, 4.0});
    CHECK(f.at(0.0) == 3.0);
    CHECK(f.at(0.999) == 3.0);
    CHECK(f.at(1.0) == 5.0);
    CHECK(f.at(7.0) == 4.0);
    CHECK(f.min() == 3.0);
    CHECK(f.max() == 5.0);
    CHECK_THROWS_AS(PiecewiseConstant({1.0, 0.0}, {1.0, 2.0}), Error);
}

TEST_CASE("local volatility surface is bilinear inside and flat outside") {
    Eigen::MatrixXd vals(2, 2);
    vals << 0.1, 0.3, 0.2, 0.4;
    const LocalVolSurface lv({50.0, 150.0}, {0.0, 1.0}, vals);
    CHECK(lv(100.0, 0.5) == doctest::Approx(0.25));
    CHECK(lv(10.0, 0.0) == doctest::Approx(0.1));
    CHECK(lv(500.0, 9.0) == doctest::Approx(0.4));
    CHECK(LocalVolSurface(0.2)(123.0, 4.0) == 0.2);
}

TEST_CASE("diffusion parameter validation rejects a non-PSD correlation matrix") {
    DiffusionParams d;
    d.rho_sv = 0.9;
    d.rho_sr = 0.9;
    d.rho_vr = -0.9;
    CHECK(min_eigenvalue(d.correlation_matrix()) < 0.0);
    CHECK_THROWS_AS(d.validate(), Error);
    d.rho_vr = 0.9;
    CHECK_NOTHROW(d.validate());
    CHECK(d.rho(Axis::V, Axis::S) == d.rho_sv);
    CHECK(d.rho(Axis::R, Axis::R) == 1.0);
}
