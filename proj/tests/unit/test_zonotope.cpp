#include <cmath>

#include "doctest.h"
#include "reach/zonotope.hpp"
#include "support/oracles.hpp"

using namespace reach;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

Zonotope unit_box(Eigen::Index n) { return Zonotope(Vector::Zero(n), Matrix::Identity(n, n)); }

// Two-sided Hausdorff distance over sampled directions (convex sets).
double hausdorff(const Zonotope& a, const Zonotope& b) {
    double worst = 0.0;
    for (const auto& d : oracle::directions(a.dim())) {
        worst = std::max(worst, std::abs(oracle::support(a.center(), a.generators(), d) -
                                         oracle::support(b.center(), b.generators(), d)));
    }
    return worst;
}

}  // namespace

TEST_CASE("zonotope construction drops zero generators") {
    const Zonotope z(vec({1, 2}), (Matrix(2, 3) << 1, 0, 0, 0, 0, 1).finished());
    CHECK(z.num_generators() == 2);
    CHECK(z.order() == doctest::Approx(1.0));
    CHECK_THROWS_AS(Zonotope(vec({1, 2}), Matrix::Zero(3, 1)), DimensionMismatch);
    CHECK(Zonotope::point(vec({3})).num_generators() == 0);
}

TEST_CASE("minkowski_sum") {
    const Zonotope z(vec({1, 1}), Matrix::Identity(2, 2));
    const Zonotope same = minkowski_sum(z, Zonotope::point(Vector::Zero(2)));
    CHECK(same.center() == z.center());
    CHECK(same.generators() == z.generators());

    const IntervalVector b = box(minkowski_sum(unit_box(2), unit_box(2)));
    CHECK(b.lo == vec({-2, -2}));
    CHECK(b.hi == vec({2, 2}));

    const Zonotope s = minkowski_sum(z, Zonotope(vec({-1, 0}), (Matrix(2, 1) << 0.5, 0).finished()));
    CHECK(s.center() == vec({0, 1}));
    CHECK(s.num_generators() == 3);
    CHECK_THROWS_AS(minkowski_sum(unit_box(2), unit_box(3)), DimensionMismatch);
}

TEST_CASE("linear_map") {
    const Zonotope z(vec({1, 1}), Matrix::Identity(2, 2));
    CHECK(linear_map(Matrix::Identity(2, 2), z).center() == z.center());
    const Zonotope zero = linear_map(Matrix::Zero(2, 2), z);
    CHECK(zero.num_generators() == 0);
    CHECK(zero.center() == Vector::Zero(2));
    const Zonotope d = linear_map(vec({2, 3}).asDiagonal(), z);
    CHECK(d.center() == vec({2, 3}));
    CHECK(d.generators() == Matrix(vec({2, 3}).asDiagonal()));
}

TEST_CASE("interval_map") {
    oracle::Rng rng(1);
    const Matrix p = rng.matrix(2, 2);
    const Zonotope z(rng.vector(2), rng.matrix(2, 3));
    const Zonotope point_image = interval_map(IntervalMatrix(p), z);
    const Zonotope exact = linear_map(p, z);
    CHECK((point_image.center() - exact.center()).norm() < 1e-15);
    CHECK(hausdorff(point_image, exact) < 1e-12);

    const Matrix e = (Matrix(2, 2) << 0.1, 0.2, 0.3, 0.4).finished();
    const IntervalVector b = box(interval_map(IntervalMatrix::symmetric(e), Zonotope::point(vec({1, -2}))));
    CHECK(b.hi(0) == doctest::Approx(0.5));
    CHECK(b.hi(1) == doctest::Approx(1.1));
    CHECK(b.lo(0) == doctest::Approx(-0.5));

    const IntervalVector one = box(interval_map(IntervalMatrix(Matrix::Constant(1, 1, 1), Matrix::Constant(1, 1, 2)),
                                                Zonotope(vec({0}), Matrix::Constant(1, 1, 1))));
    CHECK(one.lo(0) == doctest::Approx(-2.0));
    CHECK(one.hi(0) == doctest::Approx(2.0));
}

TEST_CASE("interval_map encloses sampled images") {
    oracle::Rng rng(2);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Index n = rng.integer(1, 3);
        const Matrix mid = rng.matrix(n, n);
        const Matrix rad = rng.matrix(n, n, 0.2).cwiseAbs();
        const IntervalMatrix m(mid - rad, mid + rad);
        const Zonotope z(rng.vector(n), rng.matrix(n, rng.integer(1, 4)));
        const Zonotope image = interval_map(m, z);
        for (int s = 0; s < 20; ++s) {
            Matrix x = mid;
            for (Eigen::Index i = 0; i < n * n; ++i) x(i) += rng.uniform(-1, 1) * rad(i);
            Vector beta(z.num_generators());
            for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) = rng.coin() ? 1.0 : -1.0;
            REQUIRE(contains_point(image, x * (z.center() + z.generators() * beta), 1e-9));
        }
    }
}

TEST_CASE("convex_hull_step") {
    const Zonotope z(vec({1, 2}), (Matrix(2, 2) << 1, 0.5, 0, 1).finished());
    const Zonotope same = convex_hull_step(z, Matrix::Identity(2, 2));
    CHECK(hausdorff(same, z) < 1e-12);

    const Zonotope seg = convex_hull_step(Zonotope::point(vec({1, 1})), (Matrix(2, 2) << 2, 0, 0, 3).finished());
    CHECK(seg.num_generators() == 1);
    CHECK(box(seg).lo.isApprox(vec({1, 1})));
    CHECK(box(seg).hi.isApprox(vec({2, 3})));

    const Zonotope one = convex_hull_step(Zonotope(vec({1}), Matrix::Constant(1, 1, 0.1)), Matrix::Constant(1, 1, 2));
    CHECK(one.center()(0) == doctest::Approx(1.5));
    CHECK(box(one).lo(0) <= 0.9 + 1e-12);
    CHECK(box(one).hi(0) >= 2.2 - 1e-12);
}

TEST_CASE("convex hull gap bounds the distance to the exact hull") {
    // Every point of the enclosure must lie within the gap set of the exact
    // hull; check on support functions of the exact hull (max of both sets).
    oracle::Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Index n = rng.integer(2, 3);
        const Zonotope z(rng.vector(n, 3.0), rng.matrix(n, rng.integer(1, 4)));
        const Matrix w = Matrix::Identity(n, n) + rng.matrix(n, n, 0.3);
        const Vector offset = rng.vector(n, 0.5);
        const Zonotope hull = convex_hull_step(z, w, offset);
        const Zonotope gap = convex_hull_gap(z, w);
        const Zonotope image(w * z.center() + offset, w * z.generators());
        for (const auto& d : oracle::directions(n)) {
            const double exact = std::max(oracle::support(z.center(), z.generators(), d),
                                          oracle::support(image.center(), image.generators(), d));
            const double outer = oracle::support(hull.center(), hull.generators(), d);
            REQUIRE(outer >= exact - 1e-9);
            REQUIRE(outer - exact <= err(gap) + 1e-9);
        }
    }
}

TEST_CASE("box and err") {
    const IntervalVector p = box(Zonotope::point(vec({1, 2})));
    CHECK(p.lo == p.hi);
    const IntervalVector b = box(Zonotope(vec({0, 0}), (Matrix(2, 2) << 1, 1, 1, -1).finished()));
    CHECK(b.lo == vec({-2, -2}));
    CHECK(b.hi == vec({2, 2}));
    const IntervalVector c = box(Zonotope(vec({5}), Matrix::Constant(1, 1, 0.25)));
    CHECK(c.lo(0) == 4.75);
    CHECK(c.hi(0) == 5.25);

    CHECK(err(Zonotope::point(Vector::Zero(2))) == 0.0);
    CHECK(err(unit_box(2)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(err(Zonotope(Vector::Zero(3), (Matrix(3, 2) << 1, 0, 0, 1, 0, 0).finished())) ==
          doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("err_of_image matches err of the interval image") {
    oracle::Rng rng(4);
    for (int k = 0; k < 50; ++k) {
        const Eigen::Index n = rng.integer(1, 4);
        const Matrix mid = rng.matrix(n, n);
        const Matrix rad = rng.matrix(n, n, 0.1).cwiseAbs();
        const IntervalMatrix m(mid - rad, mid + rad);
        const Zonotope z(rng.vector(n), rng.matrix(n, 3));
        CHECK(err_of_image(m, z) == doctest::Approx(err(interval_map(m, z))).epsilon(1e-12));
    }
}

TEST_CASE("err bounds the Hausdorff distance of adding a set around the origin") {
    oracle::Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Index n = rng.integer(2, 3);
        const Zonotope s_eq(rng.vector(n, 5.0), rng.matrix(n, rng.integer(1, 5)));
        const Matrix g = rng.matrix(n, rng.integer(1, 4), 0.5);
        Vector beta(g.cols());
        for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) = rng.uniform(-1, 1);
        const Zonotope s_plus(-g * beta, g);
        REQUIRE(hausdorff(minkowski_sum(s_eq, s_plus), s_eq) <= err(s_plus) + 1e-9);
    }
}

TEST_CASE("reduce examples") {
    const Reduction same = reduce(unit_box(2), 1.0);
    CHECK(same.error == 0.0);
    CHECK(same.removed == 0);
    CHECK(same.set.num_generators() == 2);

    const Zonotope z(Vector::Zero(2), (Matrix(2, 3) << 1, 0, 0.1, 0, 1, 0.1).finished());
    const Reduction r = reduce(z, 1.0);
    CHECK(r.set.num_generators() <= 2);
    const IntervalVector b = box(r.set);
    CHECK(b.lo.isApprox(vec({-1.1, -1.1})));
    CHECK(b.hi.isApprox(vec({1.1, 1.1})));
    // Only the diagonal generator is not axis-aligned.
    CHECK(r.error == doctest::Approx(err(Zonotope(Vector::Zero(2), (Matrix(2, 1) << 0.1, 0.1).finished()))));
    CHECK(r.error >= hausdorff(r.set, z) - 1e-12);

    CHECK_THROWS_AS(reduce(z, 0.5), InvalidArgument);
}

TEST_CASE("reduce returns a superset within its certified error") {
    oracle::Rng rng(6);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Index n = rng.integer(2, 3);
        const Zonotope z(rng.vector(n), rng.matrix(n, rng.integer(n + 1, 4 * n)));
        const double rho = rng.integer(1, 3);
        const Reduction r = reduce(z, rho);
        REQUIRE(r.set.num_generators() <= static_cast<Eigen::Index>(rho * n));
        for (const auto& d : oracle::directions(n)) {
            REQUIRE(support(r.set, d) >= support(z, d) - 1e-12);
        }
        REQUIRE(hausdorff(r.set, z) <= r.error + 1e-9);
    }
}

TEST_CASE("reduction order is stable") {
    const Matrix g = (Matrix(2, 4) << 1, 0, 1, 2, 0, 3, 1, 0).finished();
    CHECK(reduction_order(g) == std::vector<Eigen::Index>{0, 1, 3, 2});
    CHECK(is_axis_aligned(g.col(0)));
    CHECK(!is_axis_aligned(g.col(2)));
}

TEST_CASE("support") {
    CHECK(support(Zonotope(vec({5}), Matrix::Constant(1, 1, 0.25)), vec({1})) == 5.25);
    CHECK(support(unit_box(2), vec({0, 0})) == 0.0);
    CHECK(support(unit_box(2), vec({1, 1})) == 2.0);
}

TEST_CASE("contains_point examples") {
    const Zonotope z(vec({1, 2}), (Matrix(2, 3) << 1, 0.5, 0, 0, 1, 1).finished());
    CHECK(contains_point(z, z.center()));
    CHECK(!contains_point(unit_box(2), vec({1.5, 0}), 0.4));
    CHECK(contains_point(unit_box(2), vec({1.5, 0}), 0.5));
    CHECK(contains_point(unit_box(2), vec({1, 1})));
    CHECK_THROWS_AS(contains_point(unit_box(2), vec({1, 1, 1})), DimensionMismatch);
}

TEST_CASE("contains_point agrees with a separating direction") {
    // Inside: images of random beta. Outside: points pushed past the support
    // along a direction.
    oracle::Rng rng(7);
    for (int k = 0; k < 300; ++k) {
        const Eigen::Index n = rng.integer(2, 4);
        const Zonotope z(rng.vector(n, 3.0), rng.matrix(n, rng.integer(1, 12)));
        Vector beta(z.num_generators());
        for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) = rng.uniform(-1, 1);
        REQUIRE(contains_point(z, z.center() + z.generators() * beta, 1e-9));

        Vector d = rng.vector(n);
        d.normalize();
        const double h = support(z, d);
        // Any point with d^T x > h is outside.
        Vector x = z.center() + z.generators() * beta;
        x += (h - d.dot(x) + 0.01) * d;
        REQUIRE(!contains_point(z, x, 1e-9));
    }
}
