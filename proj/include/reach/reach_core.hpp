#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "reach/interval_matrix.hpp"
#include "reach/ledger.hpp"
#include "reach/zonotope.hpp"

namespace reach {

/// x' = A x + u,  x(0) in X0,  u(t) in U,  t in [0, T].
///
/// Systems with an input matrix B are expected to be supplied with U already
/// mapped through B.
struct LinearSystem {
    Matrix a;
    Zonotope initial;
    Zonotope input;
    double horizon = 0.0;

    Eigen::Index dim() const { return a.rows(); }
    const Vector& input_center() const { return input.center(); }

    /// Throws InvalidArgument / DimensionMismatch on inconsistent data.
    void validate() const;
};

/// Local reachable sets over [0, dt], split into the exactly computed part
/// and the error part. Both error parts contain the origin.
struct StepSets {
    Zonotope h_eq;
    Zonotope h_plus;
    Zonotope p_eq;
    Zonotope p_plus;
    /// Not part of the set: bounds how far the zonotope enclosure h_eq of the
    /// convex hull reaches beyond the hull itself (see convex_hull_gap).
    Zonotope h_gap;
};

/// The parts of StepSets that the error checks read.
struct ErrorSets {
    Zonotope h_plus;
    Zonotope h_gap;
    Zonotope p_plus;
};

/// Enclosure of e^{A t} at the current time.
struct ExponentialAccumulator {
    IntervalMatrix phi;
    double t = 0.0;

    static ExponentialAccumulator initial(Eigen::Index n);
};

struct ReachSegment {
    double t_lo = 0.0;
    double t_hi = 0.0;
    Zonotope set;
};

struct RunTiming {
    double total_seconds = 0.0;
    double tuning_seconds = 0.0;

    double tuning_fraction() const {
        return total_seconds > 0.0 ? std::min(1.0, tuning_seconds / total_seconds) : 0.0;
    }
};

struct ReachResult {
    std::vector<ReachSegment> segments;
    ErrorLedger ledger;
    RunTiming timing;
};

/// Homogeneous solution over [0, dt]:
///   h_eq   = hull(X0, W X0 + S c_u)   with W the Taylor sum and
///            S = sum_k A^k dt^{k+1}/(k+1)! (particular solution for c_u)
///   h_plus = F X0 + F_u c_u
std::pair<Zonotope, Zonotope> step_homogeneous(const LinearSystem& sys, const TaylorTerms& terms);
std::pair<Zonotope, Zonotope> step_homogeneous(const LinearSystem& sys, double dt, TaylorOrder eta);

/// Input solution over [0, dt]:
///   p_eq   = S U
///   p_plus = E dt U  plus a box covering inputs that vary inside the step
std::pair<Zonotope, Zonotope> step_inhomogeneous(const LinearSystem& sys, TaylorCache& cache,
                                                 const TaylorTerms& terms);
std::pair<Zonotope, Zonotope> step_inhomogeneous(const LinearSystem& sys, double dt, TaylorOrder eta);

StepSets step_sets(const LinearSystem& sys, TaylorCache& cache, const TaylorTerms& terms);

ErrorSets error_sets(const LinearSystem& sys, TaylorCache& cache, const TaylorTerms& terms);

/// phi' = phi ([W, W] + E), t' = t + dt.
ExponentialAccumulator advance(const ExponentialAccumulator& acc, const Matrix& w,
                               const IntervalMatrix& e, double dt);

struct PropagatedSets {
    /// e^{A t_i} H[0, dt]
    Zonotope h_interval;
    /// P[0, t_{i+1}] = P[0, t_i] + e^{A t_i} P[0, dt]
    Zonotope p_accum;
    /// Input part of the segment set: the constant-input share of the new
    /// step is already inside h_interval, so only the centered part is added.
    Zonotope p_segment;
};

PropagatedSets propagate_step(const ExponentialAccumulator& acc, const StepSets& step,
                              const Zonotope& p_prev);

/// err(e^{A t_i} (F X0 + F_u c_u + hull gap)). The hull gap charges the
/// distance between the zonotope hull enclosure and the exact hull.
double error_H(const ExponentialAccumulator& acc, const StepSets& step);
double error_H(const ExponentialAccumulator& acc, const Zonotope& h_plus, const Zonotope& h_gap);
double error_H(const ExponentialAccumulator& acc, const LinearSystem& sys, double dt, TaylorOrder eta);

/// err(e^{A t_i} P_plus).
double error_P(const ExponentialAccumulator& acc, const StepSets& step);
double error_P(const ExponentialAccumulator& acc, const Zonotope& p_plus);
double error_P(const ExponentialAccumulator& acc, const LinearSystem& sys, double dt, TaylorOrder eta);

/// Half-widths of the box covering sum_{k=1}^{eta} A^k int_0^dt w_k(s) u(s) ds
/// for inputs u(s) in U - c_u varying within the step.
Vector varying_input_box(TaylorCache& cache, const Zonotope& centered_input, double dt, int eta);

}  // namespace reach
