#include "reach/tuner.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace reach {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Relative tolerance for reaching the horizon and for snapping the final step.
constexpr double kTimeTol = 1e-12;
constexpr double kSnapTol = 1e-9;
// Smallest step (relative to T) the search may try before giving up.
constexpr double kMinRelativeStep = 1e-13;

double admissible(double max, double acc, double dt, double t, double horizon) {
    if (!(t < horizon)) throw InvalidArgument("admissible error requested at t >= T");
    if (!(dt > 0.0)) throw InvalidArgument("admissible error requires dt > 0");
    return std::max(0.0, (max - acc) * dt / (horizon - t));
}

// Terms used to advance the enclosure of e^{A t}. The accumulator is
// multiplied once per step, so its remainder is kept at the eta_max level
// regardless of the Taylor order chosen for the step sets.
const TaylorTerms& accumulator_terms(TaylorCache& cache, double dt, TaylorOrder fallback) {
    const TaylorOrder top(cache.eta_max(dt));
    return cache.convergent(dt, top) ? cache.terms(dt, top) : cache.terms(dt, fallback);
}

}  // namespace

ErrorBudget split_budget(double eps_max, const BudgetWeights& weights) {
    if (!(eps_max > 0.0) || !std::isfinite(eps_max)) throw InvalidArgument("eps_max must be positive");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("budget weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("budget weights must sum to 1");
    return {eps_max * weights[0], eps_max * weights[1], eps_max * weights[2]};
}

double admissible_P(const ErrorBudget& budget, const ErrorLedger& ledger, double dt, double t, double horizon) {
    return admissible(budget.eps_P_max, ledger.eps_P_acc, dt, t, horizon);
}

double admissible_S(const ErrorBudget& budget, const ErrorLedger& ledger, double dt, double t, double horizon) {
    return admissible(budget.eps_S_max, ledger.eps_S_acc, dt, t, horizon);
}

TuningState TuningState::initial(double horizon, double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw InvalidArgument("mu must lie in (0, 1)");
    return {horizon, mu, 1};
}

double TuningState::dt_at(int lvl) const { return horizon * std::pow(mu, lvl); }

double TuningState::dt_prev() const { return dt_at(level); }

const ErrorSets& StepSetCache::errors(double dt, TaylorOrder eta) {
    const auto key = std::make_pair(dt, eta.value());
    if (auto it = errors_.find(key); it != errors_.end()) return it->second;
    return errors_.emplace(key, error_sets(sys_, taylor_, taylor_.terms(dt, eta))).first->second;
}

const StepSets& StepSetCache::get(double dt, TaylorOrder eta) {
    const auto key = std::make_pair(dt, eta.value());
    if (auto it = sets_.find(key); it != sets_.end()) return it->second;
    const TaylorTerms& t = taylor_.terms(dt, eta);
    const ErrorSets& e = errors(dt, eta);
    StepSets sets{convex_hull_step(sys_.initial, t.exp_sum, t.input_sum * sys_.input_center()), e.h_plus,
                  linear_map(t.input_sum, sys_.input), e.p_plus, e.h_gap};
    return sets_.emplace(key, std::move(sets)).first->second;
}

TunedStep tune_step(const LinearSystem& sys, StepSetCache& cache, TuningState& state,
                    const ErrorBudget& budget, const ErrorLedger& ledger, const ExponentialAccumulator& acc) {
    const double horizon = sys.horizon;
    const double t = acc.t;
    int retries = 0;

    auto evaluate = [&](double dt, int eta, double adm) {
        const TaylorOrder order(eta);
        ++retries;
        const bool fresh = !cache.has_errors(dt, order);
        const auto built = Clock::now();
        const ErrorSets& parts = cache.errors(dt, order);
        TunedStep c;
        c.dt = dt;
        c.eta = eta;
        c.build_seconds = fresh ? seconds_since(built) : 0.0;
        c.eps_H = error_H(acc, parts.h_plus, parts.h_gap);
        c.eps_P = error_P(acc, parts.p_plus);
        c.admissible_P = adm;
        return c;
    };
    auto passes = [&](const TunedStep& c) { return c.eps_H <= budget.eps_H_max && c.eps_P <= c.admissible_P; };

    // Raises eta from 1 to eta_max at a fixed dt; the first candidate meeting
    // both bounds wins.
    auto try_step = [&](double dt) -> std::optional<TunedStep> {
        const double adm = admissible_P(budget, ledger, dt, t, horizon);
        const int top = cache.taylor().eta_max(dt);
        if (!cache.taylor().convergent(dt, TaylorOrder(top))) return std::nullopt;
        TunedStep probe = evaluate(dt, top, adm);
        if (!passes(probe)) return std::nullopt;
        for (int eta = 1; eta < top; ++eta) {
            if (!cache.taylor().convergent(dt, TaylorOrder(eta))) continue;
            TunedStep c = evaluate(dt, eta, adm);
            if (passes(c)) return c;
        }
        return probe;
    };

    auto shrink_from = [&](int level) {
        for (;; ++level) {
            const double dt = state.dt_at(level);
            if (dt < kMinRelativeStep * horizon) {
                throw TuningFailure("step size fell below " + std::to_string(dt) +
                                    " without meeting the error bounds at t = " + std::to_string(t));
            }
            if (auto found = try_step(dt)) return std::make_pair(level, std::move(*found));
        }
    };

    auto [level, step] = shrink_from(state.level - 1);
    state.level = level;

    const double remaining = horizon - t;
    if (step.dt >= remaining || remaining - step.dt <= kSnapTol * horizon) {
        if (auto last = try_step(remaining)) {
            step = std::move(*last);
            step.clamped = true;
        } else if (step.dt >= remaining) {
            // Not expected for errors that shrink with dt; keep shrinking below the remainder.
            int lvl = level;
            while (state.dt_at(lvl) >= remaining) ++lvl;
            auto [lvl2, fallback] = shrink_from(lvl);
            step = std::move(fallback);
            state.level = lvl2;
        }
    }
    step.retries = retries;
    return step;
}

InhomogeneousReduction reduce_inhomogeneous(const Zonotope& p_accum, const ErrorBudget& budget,
                                            const ErrorLedger& ledger, double dt, double t, double horizon) {
    InhomogeneousReduction out{p_accum, 0.0, admissible_S(budget, ledger, dt, t, horizon)};
    const Eigen::Index n = p_accum.dim();
    const Eigen::Index gamma = p_accum.num_generators();
    if (gamma <= n || !(out.admissible_S > 0.0)) return out;

    // Decrementing the generator count by one removes n + d generators into a
    // box at the d-th decrement; the error only grows with d.
    const std::vector<Eigen::Index> order = reduction_order(p_accum.generators());
    const Matrix& g = p_accum.generators();
    Vector lossy = Vector::Zero(n);
    Eigen::Index accepted = 0;
    for (Eigen::Index r = 1; r <= gamma; ++r) {
        const Eigen::Index j = order[static_cast<std::size_t>(r - 1)];
        if (!is_axis_aligned(g.col(j))) lossy += g.col(j).cwiseAbs();
        if (r <= n) continue;
        if (!(lossy.norm() < out.admissible_S)) break;
        accepted = r;
    }
    if (accepted == 0) return out;
    Reduction red = reduce_generators(p_accum, order, accepted);
    out.set = std::move(red.set);
    out.eps_S = red.error;
    return out;
}

ReachResult run(const LinearSystem& sys, double eps_max, const RunOptions& options) {
    sys.validate();
    const ErrorBudget budget = split_budget(eps_max, options.weights);
    const auto start = Clock::now();
    const double horizon = sys.horizon;

    TaylorCache taylor(sys.a);
    StepSetCache cache(sys, taylor);
    TuningState state = TuningState::initial(horizon, options.mu);
    ExponentialAccumulator acc = ExponentialAccumulator::initial(sys.dim());
    Zonotope p_accum = Zonotope::point(Vector::Zero(sys.dim()));

    ReachResult result;
    ErrorLedger& ledger = result.ledger;
    while (horizon - acc.t > kTimeTol * horizon) {
        auto tick = Clock::now();
        TunedStep step = tune_step(sys, cache, state, budget, ledger, acc);
        result.timing.tuning_seconds += std::max(0.0, seconds_since(tick) - step.build_seconds);

        StepRecord rec;
        rec.t_lo = acc.t;
        rec.t_hi = step.clamped ? horizon : acc.t + step.dt;
        rec.dt = step.dt;
        rec.eta = step.eta;
        rec.eps_H = step.eps_H;
        rec.eps_P = step.eps_P;
        rec.admissible_P = step.admissible_P;
        rec.retries = step.retries;
        ledger.eps_P_acc += step.eps_P;

        const TaylorOrder order(step.eta);
        const StepSets& sets = cache.get(step.dt, order);
        PropagatedSets prop = propagate_step(acc, sets, p_accum);

        tick = Clock::now();
        InhomogeneousReduction red = reduce_inhomogeneous(prop.p_accum, budget, ledger, step.dt, acc.t, horizon);
        result.timing.tuning_seconds += seconds_since(tick);
        rec.eps_S = red.eps_S;
        rec.admissible_S = red.admissible_S;
        ledger.eps_S_acc += red.eps_S;
        p_accum = std::move(red.set);
        rec.rho = p_accum.order();

        result.segments.push_back({rec.t_lo, rec.t_hi, minkowski_sum(prop.h_interval, prop.p_segment)});
        ledger.steps.push_back(rec);

        const TaylorTerms& exact = accumulator_terms(taylor, step.dt, order);
        acc = advance(acc, exact.exp_sum, exact.remainder, step.dt);
        if (step.clamped) acc.t = horizon;
    }
    result.timing.total_seconds = seconds_since(start);
    return result;
}

ReachResult run_fixed(const LinearSystem& sys, double dt, int eta, double rho) {
    sys.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("fixed step size must be positive");
    const TaylorOrder order(eta);
    if (!(rho >= 1.0)) throw InvalidArgument("fixed zonotope order must be >= 1");
    const auto start = Clock::now();
    const double horizon = sys.horizon;

    TaylorCache taylor(sys.a);
    StepSetCache cache(sys, taylor);
    ExponentialAccumulator acc = ExponentialAccumulator::initial(sys.dim());
    Zonotope p_accum = Zonotope::point(Vector::Zero(sys.dim()));

    ReachResult result;
    ErrorLedger& ledger = result.ledger;
    while (horizon - acc.t > kTimeTol * horizon) {
        const double remaining = horizon - acc.t;
        const bool last = dt >= remaining || remaining - dt <= kSnapTol * horizon;
        const double step_dt = last ? remaining : dt;
        if (!taylor.convergent(step_dt, order)) {
            throw InvalidArgument("Taylor order " + std::to_string(eta) + " does not converge for dt = " +
                                  std::to_string(step_dt));
        }
        const StepSets& sets = cache.get(step_dt, order);

        StepRecord rec;
        rec.t_lo = acc.t;
        rec.t_hi = last ? horizon : acc.t + step_dt;
        rec.dt = step_dt;
        rec.eta = eta;
        rec.eps_H = error_H(acc, sets);
        rec.eps_P = error_P(acc, sets);
        rec.retries = 1;
        ledger.eps_P_acc += rec.eps_P;

        PropagatedSets prop = propagate_step(acc, sets, p_accum);
        Reduction red = reduce(prop.p_accum, rho);
        rec.eps_S = red.error;
        ledger.eps_S_acc += red.error;
        p_accum = std::move(red.set);
        rec.rho = p_accum.order();

        result.segments.push_back({rec.t_lo, rec.t_hi, minkowski_sum(prop.h_interval, prop.p_segment)});
        ledger.steps.push_back(rec);

        const TaylorTerms& exact = accumulator_terms(taylor, step_dt, order);
        acc = advance(acc, exact.exp_sum, exact.remainder, step_dt);
        if (last) acc.t = horizon;
    }
    result.timing.total_seconds = seconds_since(start);
    return result;
}

}  // namespace reach
