#include "reach/interval_matrix.hpp"

#include <cmath>
#include <string>

namespace reach {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch(std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()));
    }
}

void require_step_input(const Matrix& a, double dt) {
    if (a.rows() != a.cols()) throw DimensionMismatch("system matrix must be square");
    if (!a.allFinite()) throw InvalidArgument("system matrix has non-finite entries");
    if (!std::isfinite(dt) || dt <= 0.0) throw InvalidArgument("time step must be positive and finite");
}

// Number of explicit Neumann terms in the remainder bound; the rest of the
// geometric series is bounded through the infinity norm.
constexpr int kNeumannTerms = 24;

// Lower end of the interval (s/dt)^k - s/dt over s in [0, dt].
double curvature_coefficient(int k) {
    const double kk = static_cast<double>(k);
    return std::pow(kk, -kk / (kk - 1.0)) - std::pow(kk, -1.0 / (kk - 1.0));
}

}  // namespace

IntervalMatrix::IntervalMatrix(Matrix point) : lo_(point), hi_(std::move(point)) {}

IntervalMatrix::IntervalMatrix(Matrix lo, Matrix hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    require_same_shape(lo_, hi_, "interval matrix bounds");
    if ((lo_.array() > hi_.array()).any()) {
        throw InvalidArgument("interval matrix requires lo <= hi entrywise");
    }
}

IntervalMatrix IntervalMatrix::symmetric(const Matrix& radius) {
    if ((radius.array() < 0.0).any()) throw InvalidArgument("negative interval radius");
    return IntervalMatrix(-radius, radius);
}

IntervalMatrix IntervalMatrix::zero(Eigen::Index rows, Eigen::Index cols) {
    return IntervalMatrix(Matrix::Zero(rows, cols));
}

IntervalMatrix IntervalMatrix::identity(Eigen::Index n) {
    return IntervalMatrix(Matrix::Identity(n, n));
}

bool IntervalMatrix::contains(const Matrix& point) const {
    if (point.rows() != rows() || point.cols() != cols()) return false;
    return (lo_.array() <= point.array()).all() && (point.array() <= hi_.array()).all();
}

IntervalMatrix IntervalMatrix::scaled(double factor) const {
    if (factor < 0.0) throw InvalidArgument("scaled() expects a non-negative factor");
    return IntervalMatrix(lo_ * factor, hi_ * factor);
}

TaylorOrder::TaylorOrder(int eta) : eta_(eta) {
    if (eta < 1) throw InvalidArgument("Taylor order must be at least 1");
}

IntervalMatrix im_add(const IntervalMatrix& m1, const IntervalMatrix& m2) {
    require_same_shape(m1.lo(), m2.lo(), "im_add");
    return IntervalMatrix(m1.lo() + m2.lo(), m1.hi() + m2.hi());
}

IntervalMatrix im_mul(const IntervalMatrix& m1, const IntervalMatrix& m2) {
    if (m1.cols() != m2.rows()) {
        throw DimensionMismatch("im_mul: inner dimensions " + std::to_string(m1.cols()) + " and " +
                                std::to_string(m2.rows()));
    }
    const Matrix c1 = m1.mid();
    const Matrix r1 = m1.rad();
    const Matrix c2 = m2.mid();
    const Matrix r2 = m2.rad();
    const Matrix center = c1 * c2;
    const Matrix radius = c1.cwiseAbs() * r2 + r1 * c2.cwiseAbs() + r1 * r2;
    return IntervalMatrix(center - radius, center + radius);
}

IntervalMatrix interval_scale(double l, double u, const Matrix& p) {
    if (l > u) throw InvalidArgument("interval_scale expects l <= u");
    const Matrix a = l * p;
    const Matrix b = u * p;
    return IntervalMatrix(a.cwiseMin(b), a.cwiseMax(b));
}

// ---------------------------------------------------------------------------

TaylorCache::TaylorCache(Matrix a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) throw DimensionMismatch("system matrix must be square");
    if (!a_.allFinite()) throw InvalidArgument("system matrix has non-finite entries");
    norm_inf_ = a_.rows() == 0 ? 0.0 : a_.cwiseAbs().rowwise().sum().maxCoeff();
    powers_.push_back(Matrix::Identity(a_.rows(), a_.cols()));
    abs_powers_.push_back(Matrix::Identity(a_.rows(), a_.cols()));
}

const Matrix& TaylorCache::power(int k) {
    while (static_cast<int>(powers_.size()) <= k) powers_.push_back(powers_.back() * a_);
    return powers_[static_cast<std::size_t>(k)];
}

const Matrix& TaylorCache::abs_power(int k) {
    while (static_cast<int>(abs_powers_.size()) <= k) {
        abs_powers_.push_back(abs_powers_.back() * a_.cwiseAbs());
    }
    return abs_powers_[static_cast<std::size_t>(k)];
}

bool TaylorCache::convergent(double dt, TaylorOrder eta) const {
    return norm_inf_ * dt / (eta.value() + 2.0) < 1.0;
}

const TaylorTerms& TaylorCache::terms(double dt, TaylorOrder eta) {
    const auto key = std::make_pair(dt, eta.value());
    if (auto it = terms_.find(key); it != terms_.end()) return it->second;

    require_step_input(a_, dt);
    const int k = eta.value();
    TaylorTerms t;
    t.dt = dt;
    t.eta = k;
    const Matrix e_abs = detail::remainder_bound(*this, dt, k);
    t.exp_sum = detail::taylor_sum(*this, dt, k);
    t.input_sum = detail::input_sum(*this, dt, k);
    t.remainder = IntervalMatrix::symmetric(e_abs);
    t.curvature = detail::curvature(*this, dt, k, e_abs);
    t.input_curvature = detail::input_curvature(*this, dt, k, e_abs);
    return terms_.emplace(key, std::move(t)).first->second;
}

int TaylorCache::eta_max(double dt) {
    if (!std::isfinite(dt) || dt <= 0.0) throw InvalidArgument("time step must be positive and finite");
    if (auto it = eta_max_.find(dt); it != eta_max_.end()) return it->second;
    const double scaled_norm = norm_inf_ * dt;
    int found = kEtaCeiling;
    for (int eta = 1; eta <= kEtaCeiling; ++eta) {
        const double zeta = scaled_norm / (eta + 2.0);
        if (zeta >= 1.0) continue;
        // scaled_norm^{eta+1} / (eta+1)!
        double head = 1.0;
        for (int j = 1; j <= eta + 1; ++j) head *= scaled_norm / j;
        const double tail = head / (1.0 - zeta);
        const double scale = detail::taylor_sum(*this, dt, eta).cwiseAbs().rowwise().sum().maxCoeff();
        if (tail <= kEtaRelativeFloor * scale) {
            found = eta;
            break;
        }
    }
    eta_max_.emplace(dt, found);
    return found;
}

namespace detail {

Matrix taylor_sum(TaylorCache& cache, double dt, int eta) {
    const Eigen::Index n = cache.dim();
    Matrix w = Matrix::Identity(n, n);
    double coeff = 1.0;
    for (int k = 1; k <= eta; ++k) {
        coeff *= dt / k;
        w += coeff * cache.power(k);
    }
    return w;
}

Matrix input_sum(TaylorCache& cache, double dt, int eta) {
    const Eigen::Index n = cache.dim();
    Matrix s = dt * Matrix::Identity(n, n);
    double coeff = dt;  // dt^{k+1} / (k+1)!
    for (int k = 1; k <= eta; ++k) {
        coeff *= dt / (k + 1);
        s += coeff * cache.power(k);
    }
    return s;
}

// Entrywise bound of sum_{k>eta} (|A| dt)^k / k!:
//   (|A| dt)^{eta+1} / (eta+1)! * sum_j (|A| dt / (eta+2))^j,
// with the Neumann series kept as a matrix so that zero patterns of
// |A|^{eta+1} cannot hide mass that appears in higher powers.
Matrix remainder_bound(TaylorCache& cache, double dt, int eta) {
    const Eigen::Index n = cache.dim();
    const double zeta = cache.norm_inf() * dt / (eta + 2.0);
    if (!(zeta < 1.0)) {
        throw NotConvergent("remainder series bound does not converge: ||A|| dt / (eta+2) = " +
                            std::to_string(zeta));
    }
    if (cache.norm_inf() == 0.0) return Matrix::Zero(n, n);

    double head_coeff = 1.0;  // dt^{eta+1} / (eta+1)!
    for (int j = 1; j <= eta + 1; ++j) head_coeff *= dt / j;
    const Matrix head = head_coeff * cache.abs_power(eta + 1);

    const Matrix step = cache.abs_power(1) * (dt / (eta + 2.0));
    // Entries of step^j are at most zeta^j, so the series may stop once the
    // scalar tail is negligible; the tail is still added.
    Matrix sum = Matrix::Identity(n, n);
    Matrix term = Matrix::Identity(n, n);
    double power = zeta;  // zeta^{j}
    int j = 1;
    for (; j <= kNeumannTerms && power / (1.0 - zeta) > 1e-17; ++j) {
        term = term * step;
        sum += term;
        power *= zeta;
    }
    const double tail = power / (1.0 - zeta);
    sum.array() += tail;
    return head * sum;
}

IntervalMatrix curvature(TaylorCache& cache, double dt, int eta, const Matrix& e_abs) {
    Matrix lo = -e_abs;
    Matrix hi = e_abs;
    double coeff = 1.0;  // dt^k / k!
    for (int k = 1; k <= eta; ++k) {
        coeff *= dt / k;
        if (k < 2) continue;
        const IntervalMatrix term = interval_scale(curvature_coefficient(k) * coeff, 0.0, cache.power(k));
        lo += term.lo();
        hi += term.hi();
    }
    return IntervalMatrix(lo, hi);
}

IntervalMatrix input_curvature(TaylorCache& cache, double dt, int eta, const Matrix& e_abs) {
    Matrix lo = -e_abs * dt;
    Matrix hi = e_abs * dt;
    double coeff = 1.0;  // dt^k / k!
    for (int k = 1; k <= eta + 1; ++k) {
        coeff *= dt / k;
        if (k < 2) continue;
        const IntervalMatrix term =
            interval_scale(curvature_coefficient(k) * coeff, 0.0, cache.power(k - 1));
        lo += term.lo();
        hi += term.hi();
    }
    return IntervalMatrix(lo, hi);
}

}  // namespace detail

Matrix taylor_partial_sum(const Matrix& a, double dt, TaylorOrder eta) {
    require_step_input(a, dt);
    TaylorCache cache(a);
    return detail::taylor_sum(cache, dt, eta.value());
}

Matrix input_integral_sum(const Matrix& a, double dt, TaylorOrder eta) {
    require_step_input(a, dt);
    TaylorCache cache(a);
    return detail::input_sum(cache, dt, eta.value());
}

IntervalMatrix remainder_E(const Matrix& a, double dt, TaylorOrder eta) {
    require_step_input(a, dt);
    TaylorCache cache(a);
    return IntervalMatrix::symmetric(detail::remainder_bound(cache, dt, eta.value()));
}

IntervalMatrix curvature_F(const Matrix& a, double dt, TaylorOrder eta) {
    require_step_input(a, dt);
    TaylorCache cache(a);
    const Matrix e_abs = detail::remainder_bound(cache, dt, eta.value());
    return detail::curvature(cache, dt, eta.value(), e_abs);
}

IntervalMatrix input_correction_Fu(const Matrix& a, double dt, TaylorOrder eta) {
    require_step_input(a, dt);
    TaylorCache cache(a);
    const Matrix e_abs = detail::remainder_bound(cache, dt, eta.value());
    return detail::input_curvature(cache, dt, eta.value(), e_abs);
}

int eta_max(const Matrix& a, double dt) {
    require_step_input(a, dt);
    TaylorCache cache(a);
    return cache.eta_max(dt);
}

}  // namespace reach
