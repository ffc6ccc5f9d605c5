#pragma once

#include <array>
#include <map>
#include <utility>

#include "reach/reach_core.hpp"

namespace reach {

using BudgetWeights = std::array<double, 3>;  // (H, P, S)

inline constexpr BudgetWeights kDefaultWeights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
inline constexpr double kDefaultMu = 0.9;

/// eps_max * weights; weights must be non-negative and sum to 1.
ErrorBudget split_budget(double eps_max, const BudgetWeights& weights = kDefaultWeights);

/// Share of the remaining P budget granted to a step of length dt at time t:
/// (eps_P_max - eps_P_acc) dt / (T - t).
double admissible_P(const ErrorBudget& budget, const ErrorLedger& ledger, double dt, double t, double horizon);
double admissible_S(const ErrorBudget& budget, const ErrorLedger& ledger, double dt, double t, double horizon);

/// Step-size state carried between steps. Candidate step sizes live on the
/// lattice T * mu^level so that revisited sizes hit the step-set cache.
struct TuningState {
    double horizon = 0.0;
    double mu = kDefaultMu;
    int level = 1;  // dt_prev = T * mu^level

    static TuningState initial(double horizon, double mu = kDefaultMu);
    double dt_prev() const;
    double dt_at(int lvl) const;
};

/// Memoized step sets per (dt, eta) for one analysis run. Candidates that are
/// only checked against the bounds need just the error parts.
class StepSetCache {
public:
    StepSetCache(const LinearSystem& sys, TaylorCache& taylor) : sys_(sys), taylor_(taylor) {}

    const ErrorSets& errors(double dt, TaylorOrder eta);
    const StepSets& get(double dt, TaylorOrder eta);
    bool has_errors(double dt, TaylorOrder eta) const { return errors_.count({dt, eta.value()}) != 0; }
    const TaylorTerms& terms(double dt, TaylorOrder eta) { return taylor_.terms(dt, eta); }
    TaylorCache& taylor() { return taylor_; }

private:
    const LinearSystem& sys_;
    TaylorCache& taylor_;
    std::map<std::pair<double, int>, ErrorSets> errors_;
    std::map<std::pair<double, int>, StepSets> sets_;
};

struct TunedStep {
    double dt = 0.0;
    int eta = 0;
    double eps_H = 0.0;
    double eps_P = 0.0;
    double admissible_P = 0.0;
    int retries = 0;
    bool clamped = false;
    /// Time spent building the accepted candidate's Taylor terms and error
    /// sets during this search; propagation needs them anyway, so it is not
    /// counted as tuning overhead.
    double build_seconds = 0.0;
};

/// Step-size / Taylor-order search. Starts at dt_prev / mu with eta = 1,
/// raises eta up to eta_max(A, dt), then shrinks dt by mu and restarts eta.
/// Accepts the first candidate with eps_H <= eps_H_max and eps_P <= admissible_P.
/// A step size is first probed at eta_max; if even that fails, the lower
/// orders are skipped.
/// A step overshooting T is clamped to T - t and only eta is re-tuned.
/// Updates state.level; the caller books eps_P into the ledger.
TunedStep tune_step(const LinearSystem& sys, StepSetCache& cache, TuningState& state,
                    const ErrorBudget& budget, const ErrorLedger& ledger, const ExponentialAccumulator& acc);

struct InhomogeneousReduction {
    Zonotope set;
    double eps_S = 0.0;
    double admissible_S = 0.0;
};

/// Removes generators of P[0, t_{i+1}] one at a time while the reduction error
/// stays strictly below admissible_S; the last tentative reduction that
/// reaches the bound is rolled back.
InhomogeneousReduction reduce_inhomogeneous(const Zonotope& p_accum, const ErrorBudget& budget,
                                            const ErrorLedger& ledger, double dt, double t, double horizon);

struct RunOptions {
    BudgetWeights weights = kDefaultWeights;
    double mu = kDefaultMu;
};

/// Fully automated analysis; every reported error respects its budget.
ReachResult run(const LinearSystem& sys, double eps_max, const RunOptions& options = {});

/// Same pipeline with fixed dt, eta and zonotope order; errors are tracked
/// but not enforced. The last step is clamped to reach T.
ReachResult run_fixed(const LinearSystem& sys, double dt, int eta, double rho);

}  // namespace reach
