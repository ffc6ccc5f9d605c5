#pragma once

#include <utility>
#include <vector>

#include "reach/interval_matrix.hpp"

namespace reach {

/// Axis-aligned box [lo, hi].
struct IntervalVector {
    Vector lo;
    Vector hi;

    IntervalVector() = default;
    /// Throws InvalidArgument unless lo <= hi componentwise.
    IntervalVector(Vector lo_, Vector hi_);

    Eigen::Index dim() const { return lo.size(); }
    Vector center() const { return 0.5 * (lo + hi); }
    Vector radius() const { return 0.5 * (hi - lo); }
    bool contains(const Vector& x, double tol = 0.0) const;
};

/// Zonotope {c + G b : b in [-1, 1]^gamma}.
///
/// The generator matrix is n x gamma; gamma == 0 is a single point.
/// Zero columns are dropped on construction.
class Zonotope {
public:
    Zonotope() = default;
    Zonotope(Vector center, Matrix generators);

    static Zonotope point(Vector p);
    /// Box with the given center and non-negative half-widths.
    static Zonotope box(const Vector& center, const Vector& half_widths);
    static Zonotope from_interval(const IntervalVector& iv);

    const Vector& center() const { return center_; }
    const Matrix& generators() const { return generators_; }
    Eigen::Index dim() const { return center_.size(); }
    Eigen::Index num_generators() const { return generators_.cols(); }
    /// rho = gamma / n.
    double order() const;

    /// Same generators around a new center.
    Zonotope translated(const Vector& offset) const;
    /// Generators only, centered at the origin.
    Zonotope centered() const;

private:
    Vector center_;
    Matrix generators_;
};

/// Exact: centers add, generators are concatenated.
Zonotope minkowski_sum(const Zonotope& z1, const Zonotope& z2);

/// Exact image (M c, M G).
Zonotope linear_map(const Matrix& m, const Zonotope& z);

/// Encloses {X z : X in M, z in Z}: mid(M) Z plus a box with half-widths
/// rad(M) (|c| + sum_j |g_j|).
Zonotope interval_map(const IntervalMatrix& m, const Zonotope& z);

/// Enclosure of {(1 - l) x + l (W x + offset) : x in Z, l in [0, 1]}, which
/// contains both Z and W Z + offset.
Zonotope convex_hull_step(const Zonotope& z, const Matrix& w, const Vector& offset);
Zonotope convex_hull_step(const Zonotope& z, const Matrix& w);

/// Origin-centered zonotope with generators G - W G. Every point of
/// convex_hull_step(z, w, offset) lies within this set of a point of the exact
/// hull of z and w z + offset, so err() of it bounds their Hausdorff distance.
Zonotope convex_hull_gap(const Zonotope& z, const Matrix& w);

/// Tightest axis-aligned enclosure.
IntervalVector box(const Zonotope& z);

/// Radius of the smallest origin-centered ball enclosing box(Z).
double err(const Zonotope& z);
/// Same measure for an already computed box.
double err(const IntervalVector& b);
/// err(interval_map(m, z)) without forming the image.
double err_of_image(const IntervalMatrix& m, const Zonotope& z);

/// Result of an order reduction.
struct Reduction {
    Zonotope set;
    /// Certified Hausdorff bound between the input and `set`.
    double error = 0.0;
    /// Number of generators that were replaced by their box.
    Eigen::Index removed = 0;
};

/// Girard-style reduction to at most n * rho_target generators.
///
/// The generators with the smallest ||g||_1 - ||g||_inf (ties by column
/// index) are replaced by their box. The certified error is err() of the box
/// of the removed generators that are not axis-aligned; axis-aligned
/// generators are represented exactly by the box.
Reduction reduce(const Zonotope& z, double rho_target);

/// Replaces the first `count` generators of `order` by their box.
Reduction reduce_generators(const Zonotope& z, const std::vector<Eigen::Index>& order,
                            Eigen::Index count);

/// d^T c + sum_j |d^T g_j|.
double support(const Zonotope& z, const Vector& d);

/// True iff c + G b = x for some b with ||b||_inf <= 1 + tol, decided by a
/// bounded-variable simplex feasibility problem.
bool contains_point(const Zonotope& z, const Vector& x, double tol = 0.0);

/// Generator selection order used by reduce(): indices sorted by
/// ||g||_1 - ||g||_inf ascending, stable.
std::vector<Eigen::Index> reduction_order(const Matrix& generators);

/// True when the column has at most one non-zero entry.
bool is_axis_aligned(const Eigen::Ref<const Vector>& g);

}  // namespace reach
