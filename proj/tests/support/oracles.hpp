#pragma once

// Reference computations used by the tests. Nothing here calls into the
// library's set arithmetic, so the checks stay independent of the code under
// test.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// e^{A t} via Eigen's Pade-based matrix exponential.
inline Matrix expm(const Matrix& a, double t) {
    const Matrix at = a * t;
    return at.exp();
}

/// Support function h(d) = d^T c + sum_j |d^T g_j|.
inline double support(const Vector& c, const Matrix& g, const Vector& d) {
    double h = d.dot(c);
    for (Eigen::Index j = 0; j < g.cols(); ++j) h += std::abs(d.dot(g.col(j)));
    return h;
}

/// 360 unit directions: the circle for n = 2, a Fibonacci sphere for n = 3.
inline std::vector<Vector> directions(Eigen::Index n, int count = 360) {
    std::vector<Vector> out;
    if (n == 1) {
        out.push_back(Vector::Constant(1, 1.0));
        out.push_back(Vector::Constant(1, -1.0));
        return out;
    }
    for (int k = 0; k < count; ++k) {
        Vector d = Vector::Zero(n);
        if (n == 2) {
            const double th = 2.0 * std::numbers::pi * k / count;
            d << std::cos(th), std::sin(th);
        } else {
            const double z = 1.0 - 2.0 * (k + 0.5) / count;
            const double r = std::sqrt(1.0 - z * z);
            const double th = std::numbers::pi * (3.0 - std::sqrt(5.0)) * k;
            d(0) = r * std::cos(th);
            d(1) = r * std::sin(th);
            d(2) = z;
        }
        out.push_back(d);
    }
    return out;
}

/// max_d (h_outer(d) - h_inner(d)) over sampled unit directions; for
/// inner subset of outer this is the Hausdorff distance restricted to the samples.
inline double directional_excess(const Vector& c_outer, const Matrix& g_outer, const Vector& c_inner,
                                 const Matrix& g_inner, int count = 360) {
    double worst = 0.0;
    for (const auto& d : directions(c_outer.size(), count)) {
        worst = std::max(worst, support(c_outer, g_outer, d) - support(c_inner, g_inner, d));
    }
    return worst;
}

/// Classical RK4 for x' = A x + u with constant u.
inline Vector rk4(const Matrix& a, const Vector& u, Vector x, double t, int steps) {
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const Vector k1 = a * x + u;
        const Vector k2 = a * (x + 0.5 * h * k1) + u;
        const Vector k3 = a * (x + 0.5 * h * k2) + u;
        const Vector k4 = a * (x + h * k3) + u;
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

/// Scalar tail sum_{k > eta} x^k / k! for x >= 0.
inline double exp_tail(double x, int eta) {
    double term = 1.0;
    for (int k = 1; k <= eta; ++k) term *= x / k;
    double sum = 0.0;
    for (int k = eta + 1; k < eta + 200; ++k) {
        term *= x / k;
        sum += term;
        if (term < 1e-300) break;
    }
    return sum;
}

/// Exact reachable interval of x' = -x + u, x(0) in [x_lo, x_hi], |u| <= w at time t.
inline std::pair<double, double> decay_interval(double x_lo, double x_hi, double w, double t) {
    const double e = std::exp(-t);
    return {e * x_lo - w * (1.0 - e), e * x_hi + w * (1.0 - e)};
}

/// Small deterministic generator helpers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    bool coin() { return std::bernoulli_distribution(0.5)(eng_); }

    Matrix matrix(Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(-scale, scale);
        }
        return m;
    }
    Vector vector(Eigen::Index n, double scale = 1.0) { return matrix(n, 1, scale).col(0); }
    Vector signs(Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = coin() ? 1.0 : -1.0;
        return v;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace oracle
