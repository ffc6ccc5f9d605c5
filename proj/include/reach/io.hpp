#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "reach/tuner.hpp"

namespace reach {

/// Halfspace requirement direction^T x <= bound.
struct SafetySpec {
    std::string name;
    Vector direction;
    double bound = 0.0;
};

/// Contents of a model file. Inputs entering through a matrix B must be
/// mapped by the author: store U = B * D, not D.
struct Model {
    LinearSystem system;
    std::vector<SafetySpec> specs;
};

/// Throws InputError with the offending field (and parse position) on failure.
Model parse_model(const nlohmann::json& doc);
Model load_model(const std::filesystem::path& path);
nlohmann::json model_to_json(const Model& model);
void save_model(const Model& model, const std::filesystem::path& path);

/// Random stable-ish benchmark system: conjugate eigenvalue pairs a +- bi with
/// a in [-1, 1], b in [0, 1] as 2x2 real blocks (one real eigenvalue for odd
/// n), conjugated by a product of random Givens rotations. X0 = [9.75, 10.25]^n,
/// U = [0.95, 1.05]^n, T = 3. Deterministic in (n, seed).
LinearSystem gen_random_system(int n, std::uint64_t seed);

struct RunReport {
    std::size_t steps = 0;
    double dt_min = 0.0;
    double dt_max = 0.0;
    double wall_time = 0.0;
    double tuning_time_fraction = 0.0;
    ErrorBudget budget;  // zero for fixed-parameter runs
    double eps_P_acc = 0.0;
    double eps_S_acc = 0.0;
    double max_eps_H = 0.0;
    std::vector<double> t;
    std::vector<double> dt;
    std::vector<int> eta;
    std::vector<double> rho;
    std::vector<int> retries;
    Eigen::Index dimension = 0;
};

/// dt_min ignores a final step shortened to land on T unless it is the only step.
RunReport make_report(const ReachResult& result, Eigen::Index dimension, const ErrorBudget& budget);
nlohmann::json report_to_json(const RunReport& report);

/// One JSON line per segment; doubles use the shortest round-trip form.
void save_result(const std::vector<ReachSegment>& segments, const std::filesystem::path& path);
std::vector<ReachSegment> load_result(const std::filesystem::path& path);
nlohmann::json segment_to_json(const ReachSegment& segment);
ReachSegment segment_from_json(const nlohmann::json& line);

/// Runs the adaptive analysis; writes the result (and report) when paths are given.
std::pair<ReachResult, RunReport> run_adaptive(const Model& model, double eps_max, const BudgetWeights& weights,
                                               const std::optional<std::filesystem::path>& out_path = {},
                                               const std::optional<std::filesystem::path>& report_path = {});
std::pair<ReachResult, RunReport> run_baseline_fixed(const Model& model, double dt, int eta, double rho,
                                                     const std::optional<std::filesystem::path>& out_path = {},
                                                     const std::optional<std::filesystem::path>& report_path = {});

struct SpecVerdict {
    std::string name;
    bool satisfied = true;
    std::optional<std::size_t> first_violation;  // segment index
    double worst_support = 0.0;
};

std::vector<SpecVerdict> check_specs(const std::vector<ReachSegment>& segments, const std::vector<SafetySpec>& specs);

struct TrajectoryPoint {
    double t = 0.0;
    Vector x;
};
using Trajectory = std::vector<TrajectoryPoint>;

struct SampleOptions {
    std::size_t count = 100;
    std::uint64_t seed = 0;
    double step = 0.0;        // RK4 step; also bounded by every switching interval
    int switches = 10;        // input switching grid over [0, T]
    std::size_t stride = 1;   // keep every stride-th RK4 state (the final one is always kept)
};

/// Trajectories from x0 in X0 (vertices and interior points) under inputs that
/// are piecewise constant on a uniform switching grid, integrated with
/// classical RK4.
std::vector<Trajectory> sample_trajectories(const LinearSystem& sys, const SampleOptions& options);

/// Index of the segment covering time t (the earlier one at shared endpoints).
std::optional<std::size_t> covering_segment(const std::vector<ReachSegment>& segments, double t);

struct BatchEntry {
    int dimension = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    RunReport report;
};

/// Adaptive runs on gen_random_system(n, seed) for every (n, seed) pair, spread
/// over `workers` threads. Each worker owns its analysis state.
std::vector<BatchEntry> run_batch(const std::vector<int>& dimensions, const std::vector<std::uint64_t>& seeds,
                                  double eps_max, const BudgetWeights& weights, unsigned workers);

/// Worker count for batch runs: REACH_THREADS if set and positive, else the
/// hardware concurrency (at least 1).
unsigned worker_count();

}  // namespace reach
