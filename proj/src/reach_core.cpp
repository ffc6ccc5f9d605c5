#include "reach/reach_core.hpp"

#include <cmath>
#include <string>

namespace reach {

void LinearSystem::validate() const {
    if (a.rows() != a.cols()) throw DimensionMismatch("A must be square");
    if (a.rows() == 0) throw InvalidArgument("system dimension must be positive");
    if (!a.allFinite()) throw InvalidArgument("A has non-finite entries");
    if (initial.dim() != a.rows()) {
        throw DimensionMismatch("X0 has dimension " + std::to_string(initial.dim()) + ", expected " +
                                std::to_string(a.rows()));
    }
    if (input.dim() != a.rows()) {
        throw DimensionMismatch("U has dimension " + std::to_string(input.dim()) + ", expected " +
                                std::to_string(a.rows()));
    }
    if (!std::isfinite(horizon) || horizon <= 0.0) throw InvalidArgument("T must be positive and finite");
}

ExponentialAccumulator ExponentialAccumulator::initial(Eigen::Index n) {
    return {IntervalMatrix::identity(n), 0.0};
}

namespace {

Zonotope homogeneous_error(const LinearSystem& sys, const TaylorTerms& terms) {
    return minkowski_sum(interval_map(terms.curvature, sys.initial),
                         interval_map(terms.input_curvature, Zonotope::point(sys.input_center())));
}

Zonotope input_error(const LinearSystem& sys, TaylorCache& cache, const TaylorTerms& terms) {
    const Zonotope& u = sys.input;
    const Vector magnitude = u.center().cwiseAbs() + box(u.centered()).hi;
    const Vector half = varying_input_box(cache, u.centered(), terms.dt, terms.eta) +
                        terms.dt * (terms.remainder.rad() * magnitude);
    return Zonotope::box(Vector::Zero(u.dim()), half);
}

}  // namespace

std::pair<Zonotope, Zonotope> step_homogeneous(const LinearSystem& sys, const TaylorTerms& terms) {
    Zonotope h_eq = convex_hull_step(sys.initial, terms.exp_sum, terms.input_sum * sys.input_center());
    return {std::move(h_eq), homogeneous_error(sys, terms)};
}

ErrorSets error_sets(const LinearSystem& sys, TaylorCache& cache, const TaylorTerms& terms) {
    return {homogeneous_error(sys, terms), convex_hull_gap(sys.initial, terms.exp_sum), input_error(sys, cache, terms)};
}

std::pair<Zonotope, Zonotope> step_homogeneous(const LinearSystem& sys, double dt, TaylorOrder eta) {
    TaylorCache cache(sys.a);
    return step_homogeneous(sys, cache.terms(dt, eta));
}

Vector varying_input_box(TaylorCache& cache, const Zonotope& centered_input, double dt, int eta) {
    const Eigen::Index n = cache.dim();
    Vector half = Vector::Zero(n);
    if (centered_input.num_generators() == 0) return half;
    // int_0^dt |s^k/k! - dt^k/(k+1)!| ds = dt^{k+1}/k! * 2k (k+1)^{-1/k} / (k+1)^2
    double coeff = dt;  // dt^{k+1} / k!
    for (int k = 1; k <= eta; ++k) {
        coeff *= dt / k;
        const double kk = static_cast<double>(k);
        const double weight = coeff * 2.0 * kk * std::pow(kk + 1.0, -1.0 / kk) / ((kk + 1.0) * (kk + 1.0));
        half += weight * (cache.power(k) * centered_input.generators()).cwiseAbs().rowwise().sum();
    }
    return half;
}

std::pair<Zonotope, Zonotope> step_inhomogeneous(const LinearSystem& sys, TaylorCache& cache,
                                                 const TaylorTerms& terms) {
    return {linear_map(terms.input_sum, sys.input), input_error(sys, cache, terms)};
}

std::pair<Zonotope, Zonotope> step_inhomogeneous(const LinearSystem& sys, double dt, TaylorOrder eta) {
    TaylorCache cache(sys.a);
    return step_inhomogeneous(sys, cache, cache.terms(dt, eta));
}

StepSets step_sets(const LinearSystem& sys, TaylorCache& cache, const TaylorTerms& terms) {
    auto [h_eq, h_plus] = step_homogeneous(sys, terms);
    auto [p_eq, p_plus] = step_inhomogeneous(sys, cache, terms);
    return {std::move(h_eq), std::move(h_plus), std::move(p_eq), std::move(p_plus),
            convex_hull_gap(sys.initial, terms.exp_sum)};
}

ExponentialAccumulator advance(const ExponentialAccumulator& acc, const Matrix& w,
                               const IntervalMatrix& e, double dt) {
    return {im_mul(acc.phi, im_add(IntervalMatrix(w), e)), acc.t + dt};
}

PropagatedSets propagate_step(const ExponentialAccumulator& acc, const StepSets& step,
                              const Zonotope& p_prev) {
    Zonotope h_interval = interval_map(acc.phi, minkowski_sum(step.h_eq, step.h_plus));
    Zonotope p_accum = minkowski_sum(p_prev, interval_map(acc.phi, minkowski_sum(step.p_eq, step.p_plus)));
    Zonotope p_segment =
        minkowski_sum(p_prev, interval_map(acc.phi, minkowski_sum(step.p_eq.centered(), step.p_plus)));
    return {std::move(h_interval), std::move(p_accum), std::move(p_segment)};
}

double error_H(const ExponentialAccumulator& acc, const Zonotope& h_plus, const Zonotope& h_gap) {
    return err_of_image(acc.phi, minkowski_sum(h_plus, h_gap));
}

double error_H(const ExponentialAccumulator& acc, const StepSets& step) {
    return error_H(acc, step.h_plus, step.h_gap);
}

double error_H(const ExponentialAccumulator& acc, const LinearSystem& sys, double dt, TaylorOrder eta) {
    TaylorCache cache(sys.a);
    const TaylorTerms& terms = cache.terms(dt, eta);
    const auto [h_eq, h_plus] = step_homogeneous(sys, terms);
    return error_H(acc, h_plus, convex_hull_gap(sys.initial, terms.exp_sum));
}

double error_P(const ExponentialAccumulator& acc, const Zonotope& p_plus) { return err_of_image(acc.phi, p_plus); }

double error_P(const ExponentialAccumulator& acc, const StepSets& step) { return error_P(acc, step.p_plus); }

double error_P(const ExponentialAccumulator& acc, const LinearSystem& sys, double dt, TaylorOrder eta) {
    TaylorCache cache(sys.a);
    const auto [p_eq, p_plus] = step_inhomogeneous(sys, cache, cache.terms(dt, eta));
    return error_P(acc, p_plus);
}

}  // namespace reach
