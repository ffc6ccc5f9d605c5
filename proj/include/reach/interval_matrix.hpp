#pragma once

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "reach/errors.hpp"

namespace reach {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Matrix whose entries range over closed intervals [lo(i,j), hi(i,j)].
///
/// Floating-point rounding is not directed; enclosures are exact in real
/// arithmetic only.
class IntervalMatrix {
public:
    IntervalMatrix() = default;

    /// Degenerate interval matrix [P, P].
    explicit IntervalMatrix(Matrix point);

    /// Throws InvalidArgument unless lo <= hi entrywise with equal shapes.
    IntervalMatrix(Matrix lo, Matrix hi);

    /// [-radius, radius]; radius must be entrywise non-negative.
    static IntervalMatrix symmetric(const Matrix& radius);
    static IntervalMatrix zero(Eigen::Index rows, Eigen::Index cols);
    static IntervalMatrix identity(Eigen::Index n);

    const Matrix& lo() const { return lo_; }
    const Matrix& hi() const { return hi_; }
    Eigen::Index rows() const { return lo_.rows(); }
    Eigen::Index cols() const { return lo_.cols(); }

    Matrix mid() const { return 0.5 * (lo_ + hi_); }
    Matrix rad() const { return 0.5 * (hi_ - lo_); }

    bool contains(const Matrix& point) const;
    /// Interval multiplication by a positive real.
    IntervalMatrix scaled(double factor) const;

private:
    Matrix lo_;
    Matrix hi_;
};

/// Number of Taylor terms used for the matrix exponential (>= 1).
class TaylorOrder {
public:
    explicit TaylorOrder(int eta);
    int value() const { return eta_; }
    friend bool operator==(TaylorOrder a, TaylorOrder b) { return a.eta_ == b.eta_; }
    friend auto operator<=>(TaylorOrder a, TaylorOrder b) { return a.eta_ <=> b.eta_; }

private:
    int eta_;
};

IntervalMatrix im_add(const IntervalMatrix& m1, const IntervalMatrix& m2);

/// Center-radius product; encloses {XY : X in m1, Y in m2}.
IntervalMatrix im_mul(const IntervalMatrix& m1, const IntervalMatrix& m2);

/// [l, u] * P evaluated per entry with correct sign handling.
IntervalMatrix interval_scale(double l, double u, const Matrix& p);

/// Sum_{k=0}^{eta} (A dt)^k / k!.
Matrix taylor_partial_sum(const Matrix& a, double dt, TaylorOrder eta);

/// Sum_{k=0}^{eta} A^k dt^{k+1} / (k+1)!, the truncated integral of e^{A s} over [0, dt].
Matrix input_integral_sum(const Matrix& a, double dt, TaylorOrder eta);

/// Interval matrix [-E, E] enclosing the exponential series tail beyond eta.
/// Throws NotConvergent when ||A||_inf dt / (eta + 2) >= 1.
IntervalMatrix remainder_E(const Matrix& a, double dt, TaylorOrder eta);

/// Curvature enclosure covering e^{A s} - I - (s/dt)(e^{A dt} - I) for s in [0, dt].
IntervalMatrix curvature_F(const Matrix& a, double dt, TaylorOrder eta);

/// Curvature enclosure for the solution under a constant input.
IntervalMatrix input_correction_Fu(const Matrix& a, double dt, TaylorOrder eta);

/// Smallest eta for which the tail bound is convergent and negligible
/// (relative floor 1e-12), capped at 100.
int eta_max(const Matrix& a, double dt);

inline constexpr int kEtaCeiling = 100;
inline constexpr double kEtaRelativeFloor = 1e-12;

/// Everything derived from (A, dt, eta) that one propagation step needs.
struct TaylorTerms {
    double dt = 0.0;
    int eta = 0;
    Matrix exp_sum;       // W = sum_{k<=eta} (A dt)^k / k!
    Matrix input_sum;     // sum_{k<=eta} A^k dt^{k+1} / (k+1)!
    IntervalMatrix remainder;    // E
    IntervalMatrix curvature;    // F
    IntervalMatrix input_curvature;  // F_u
};

/// Powers of A and |A| grown on demand, plus memoized TaylorTerms per
/// (dt, eta). Confined to one analysis run.
class TaylorCache {
public:
    explicit TaylorCache(Matrix a);

    const Matrix& system_matrix() const { return a_; }
    Eigen::Index dim() const { return a_.rows(); }
    double norm_inf() const { return norm_inf_; }

    /// A^k.
    const Matrix& power(int k);
    /// |A|^k (powers of the entrywise absolute value).
    const Matrix& abs_power(int k);

    /// Throws NotConvergent like remainder_E.
    const TaylorTerms& terms(double dt, TaylorOrder eta);
    bool convergent(double dt, TaylorOrder eta) const;
    int eta_max(double dt);

    std::size_t cached_entries() const { return terms_.size(); }

private:
    Matrix a_;
    double norm_inf_;
    std::vector<Matrix> powers_;
    std::vector<Matrix> abs_powers_;
    std::map<std::pair<double, int>, TaylorTerms> terms_;
    std::map<double, int> eta_max_;
};

// Building blocks shared by the free functions and the cache.
namespace detail {
Matrix taylor_sum(TaylorCache& cache, double dt, int eta);
Matrix input_sum(TaylorCache& cache, double dt, int eta);
Matrix remainder_bound(TaylorCache& cache, double dt, int eta);
IntervalMatrix curvature(TaylorCache& cache, double dt, int eta, const Matrix& e_abs);
IntervalMatrix input_curvature(TaylorCache& cache, double dt, int eta, const Matrix& e_abs);
}  // namespace detail

}  // namespace reach
