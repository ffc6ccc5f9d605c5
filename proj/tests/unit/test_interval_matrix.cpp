#include <cmath>

#include "doctest.h"
#include "reach/interval_matrix.hpp"
#include "support/oracles.hpp"

using namespace reach;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

IntervalMatrix random_interval(oracle::Rng& rng, Eigen::Index r, Eigen::Index c) {
    const Matrix mid = rng.matrix(r, c, 2.0);
    Matrix rad = rng.matrix(r, c, 0.5).cwiseAbs();
    return IntervalMatrix(mid - rad, mid + rad);
}

// Endpoints and midpoint of every entry, chosen at random.
Matrix sample_member(oracle::Rng& rng, const IntervalMatrix& m) {
    Matrix x(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const int pick = rng.integer(0, 2);
            x(i, j) = pick == 0 ? m.lo()(i, j) : pick == 1 ? m.hi()(i, j) : 0.5 * (m.lo()(i, j) + m.hi()(i, j));
        }
    }
    return x;
}

}  // namespace

TEST_CASE("interval matrix construction") {
    CHECK_THROWS_AS(IntervalMatrix(scalar(1.0), scalar(0.0)), InvalidArgument);
    CHECK_THROWS_AS(IntervalMatrix(Matrix::Zero(1, 2), Matrix::Zero(2, 1)), DimensionMismatch);
    const auto s = IntervalMatrix::symmetric(scalar(0.5));
    CHECK(s.lo()(0, 0) == -0.5);
    CHECK(s.hi()(0, 0) == 0.5);
    CHECK_THROWS_AS(IntervalMatrix::symmetric(scalar(-1.0)), InvalidArgument);
    CHECK_THROWS_AS(TaylorOrder(0), InvalidArgument);
}

TEST_CASE("im_add") {
    oracle::Rng rng(1);
    const IntervalMatrix m = random_interval(rng, 3, 3);
    const IntervalMatrix sum = im_add(IntervalMatrix::zero(3, 3), m);
    CHECK(sum.lo() == m.lo());
    CHECK(sum.hi() == m.hi());

    const IntervalMatrix r = im_add(IntervalMatrix(scalar(-1), scalar(1)), IntervalMatrix(scalar(2), scalar(3)));
    CHECK(r.lo()(0, 0) == 1.0);
    CHECK(r.hi()(0, 0) == 4.0);
    CHECK_THROWS_AS(im_add(IntervalMatrix::zero(2, 2), IntervalMatrix::zero(3, 3)), DimensionMismatch);
}

TEST_CASE("im_mul examples") {
    oracle::Rng rng(2);
    const IntervalMatrix m = random_interval(rng, 3, 3);
    const IntervalMatrix id = im_mul(IntervalMatrix::identity(3), m);
    CHECK((id.lo() - m.lo()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((id.hi() - m.hi()).cwiseAbs().maxCoeff() < 1e-15);

    const IntervalMatrix z = im_mul(IntervalMatrix::zero(1, 1), IntervalMatrix(scalar(-4), scalar(7)));
    CHECK(z.lo()(0, 0) == 0.0);
    CHECK(z.hi()(0, 0) == 0.0);

    const IntervalMatrix p = im_mul(IntervalMatrix(scalar(1), scalar(2)), IntervalMatrix(scalar(-1), scalar(1)));
    CHECK(p.lo()(0, 0) == doctest::Approx(-2.0));
    CHECK(p.hi()(0, 0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(im_mul(IntervalMatrix::zero(2, 3), IntervalMatrix::zero(2, 3)), DimensionMismatch);
}

TEST_CASE("im_mul encloses sampled products") {
    oracle::Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        const Eigen::Index n = rng.integer(1, 4);
        const IntervalMatrix a = random_interval(rng, n, n);
        const IntervalMatrix b = random_interval(rng, n, n);
        const IntervalMatrix ab = im_mul(a, b);
        for (int s = 0; s < 10; ++s) {
            const Matrix x = sample_member(rng, a) * sample_member(rng, b);
            REQUIRE(((x - ab.lo()).array() >= -1e-12).all());
            REQUIRE(((ab.hi() - x).array() >= -1e-12).all());
        }
    }
}

TEST_CASE("interval_scale handles signs") {
    const IntervalMatrix m = interval_scale(-0.25, 0.0, (Matrix(1, 2) << 2.0, -4.0).finished());
    CHECK(m.lo()(0, 0) == doctest::Approx(-0.5));
    CHECK(m.hi()(0, 0) == doctest::Approx(0.0));
    CHECK(m.lo()(0, 1) == doctest::Approx(0.0));
    CHECK(m.hi()(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("taylor_partial_sum") {
    const Matrix zero = Matrix::Zero(3, 3);
    CHECK(taylor_partial_sum(zero, 0.7, TaylorOrder(5)) == Matrix::Identity(3, 3));
    CHECK(taylor_partial_sum(scalar(1.0), 0.1, TaylorOrder(2))(0, 0) == doctest::Approx(1.105).epsilon(1e-15));
    CHECK(std::abs(taylor_partial_sum(scalar(1.0), 0.1, TaylorOrder(20))(0, 0) - std::exp(0.1)) < 1e-15);
    CHECK(input_integral_sum(scalar(1.0), 0.1, TaylorOrder(2))(0, 0) ==
          doctest::Approx(0.1 + 0.01 / 2 + 0.001 / 6).epsilon(1e-14));
}

TEST_CASE("remainder_E") {
    CHECK(remainder_E(Matrix::Zero(2, 2), 0.3, TaylorOrder(3)).hi() == Matrix::Zero(2, 2));

    const IntervalMatrix e = remainder_E(scalar(1.0), 0.1, TaylorOrder(2));
    const double bound = (std::pow(0.1, 3) / 6.0) / (1.0 - 0.025);
    CHECK(e.hi()(0, 0) == doctest::Approx(bound).epsilon(1e-9));
    CHECK(e.lo()(0, 0) == -e.hi()(0, 0));
    CHECK(e.hi()(0, 0) >= std::exp(0.1) - 1.105);

    CHECK_THROWS_AS(remainder_E(scalar(10.0), 1.0, TaylorOrder(8)), NotConvergent);
    CHECK_NOTHROW(remainder_E(scalar(10.0), 1.0, TaylorOrder(9)));
}

TEST_CASE("remainder_E is sound against the scalar exponential") {
    oracle::Rng rng(4);
    for (int k = 0; k < 500; ++k) {
        const double a = rng.uniform(-5.0, 5.0);
        const int eta = rng.integer(1, 15);
        const double dt = rng.uniform(0.01, 0.99) * (eta + 2) / std::abs(a);
        const double tail = std::exp(a * dt) - taylor_partial_sum(scalar(a), dt, TaylorOrder(eta))(0, 0);
        const IntervalMatrix e = remainder_E(scalar(a), dt, TaylorOrder(eta));
        REQUIRE(std::abs(tail) <= e.hi()(0, 0) * (1.0 + 1e-12) + 1e-14 * std::exp(std::abs(a) * dt));
    }
}

TEST_CASE("remainder_E is superlinear in dt and monotone in eta") {
    oracle::Rng rng(5);
    for (int k = 0; k < 300; ++k) {
        const Eigen::Index n = rng.integer(1, 6);
        const Matrix a = rng.matrix(n, n, rng.uniform(0.1, 3.0));
        const int eta = rng.integer(1, 10);
        const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
        const double dt = rng.uniform(0.01, 0.99) * (eta + 2.0) / norm;
        const double phi = rng.uniform(0.01, 0.99);
        const Matrix full = remainder_E(a, dt, TaylorOrder(eta)).hi();
        REQUIRE((remainder_E(a, phi * dt, TaylorOrder(eta)).hi().array() <= (phi * full).array()).all());
        REQUIRE((remainder_E(a, dt, TaylorOrder(eta + 1)).hi().array() <= full.array()).all());
    }
}

TEST_CASE("curvature_F scalar example") {
    CHECK(curvature_F(Matrix::Zero(2, 2), 0.5, TaylorOrder(3)).hi() == Matrix::Zero(2, 2));
    const IntervalMatrix f = curvature_F(scalar(1.0), 0.1, TaylorOrder(2));
    CHECK(f.lo()(0, 0) == doctest::Approx(-1.42094e-3).epsilon(1e-4));
    CHECK(f.hi()(0, 0) == doctest::Approx(1.7094e-4).epsilon(1e-4));
}

TEST_CASE("curvature_F covers the exact curvature") {
    // e^{a s} - 1 - (s / dt)(e^{a dt} - 1) for s in [0, dt], sampled densely.
    oracle::Rng rng(6);
    for (int k = 0; k < 100; ++k) {
        const double a = rng.uniform(-3.0, 3.0);
        const double dt = rng.uniform(0.01, 0.5);
        const int eta = rng.integer(2, 8);
        const IntervalMatrix f = curvature_F(scalar(a), dt, TaylorOrder(eta));
        for (int s = 0; s <= 50; ++s) {
            const double t = dt * s / 50.0;
            const double v = std::exp(a * t) - 1.0 - (t / dt) * (std::exp(a * dt) - 1.0);
            REQUIRE(v >= f.lo()(0, 0) - 1e-14);
            REQUIRE(v <= f.hi()(0, 0) + 1e-14);
        }
    }
}

TEST_CASE("input_correction_Fu") {
    CHECK(input_correction_Fu(Matrix::Zero(2, 2), 0.5, TaylorOrder(3)).hi() == Matrix::Zero(2, 2));
    // Single term (2^-2 - 2^-1) dt^2 / 2! = -0.00125, widened by E(dt, 1) dt.
    const IntervalMatrix fu = input_correction_Fu(scalar(1.0), 0.1, TaylorOrder(1));
    const double e1 = remainder_E(scalar(1.0), 0.1, TaylorOrder(1)).hi()(0, 0);
    CHECK(fu.lo()(0, 0) == doctest::Approx(-0.00125 - e1 * 0.1).epsilon(1e-9));
    CHECK(fu.hi()(0, 0) == doctest::Approx(e1 * 0.1).epsilon(1e-9));
}

TEST_CASE("curvature terms vanish as dt shrinks") {
    oracle::Rng rng(7);
    const Matrix a = rng.matrix(3, 3);
    double prev_f = std::numeric_limits<double>::infinity();
    double prev_fu = prev_f;
    double dt = 0.5;
    for (int k = 0; k < 10; ++k, dt *= 0.5) {
        const IntervalMatrix f = curvature_F(a, dt, TaylorOrder(3));
        const IntervalMatrix fu = input_correction_Fu(a, dt, TaylorOrder(3));
        const double wf = std::max(f.lo().cwiseAbs().maxCoeff(), f.hi().cwiseAbs().maxCoeff());
        const double wfu = std::max(fu.lo().cwiseAbs().maxCoeff(), fu.hi().cwiseAbs().maxCoeff());
        CHECK(wf < prev_f);
        CHECK(wfu < prev_fu);
        prev_f = wf;
        prev_fu = wfu;
    }
}

TEST_CASE("eta_max") {
    CHECK(eta_max(Matrix::Zero(2, 2), 0.1) == 1);
    // Tail bound 0.1^8 / 8! / (1 - 0.1 / 9) ~ 2.5e-13 is the first below the floor.
    const int e = eta_max(scalar(1.0), 0.1);
    CHECK(e == 7);
    const double rel = remainder_E(scalar(1.0), 0.1, TaylorOrder(e)).hi()(0, 0) / std::exp(0.1);
    CHECK(rel <= kEtaRelativeFloor);
    CHECK(eta_max(scalar(10.0), 1.0) > 8);
    CHECK(eta_max(scalar(1e6), 1.0) == kEtaCeiling);
}

TEST_CASE("cache agrees with the free functions") {
    oracle::Rng rng(8);
    const Matrix a = rng.matrix(3, 3);
    TaylorCache cache(a);
    const TaylorTerms& t = cache.terms(0.2, TaylorOrder(4));
    CHECK((t.exp_sum - taylor_partial_sum(a, 0.2, TaylorOrder(4))).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((t.remainder.hi() - remainder_E(a, 0.2, TaylorOrder(4)).hi()).cwiseAbs().maxCoeff() < 1e-18);
    CHECK(&cache.terms(0.2, TaylorOrder(4)) == &t);
    CHECK(cache.cached_entries() == 1);
    CHECK(cache.eta_max(0.2) == eta_max(a, 0.2));
}
