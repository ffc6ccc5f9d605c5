// Command-line front end: run, baseline, gen, check, sample, bench.
//
// Exit codes: 0 completed (and specs satisfied), 2 spec violated,
// 3 input error, 4 internal failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "reach/io.hpp"

namespace {

using namespace reach;

constexpr int kExitOk = 0;
constexpr int kExitViolated = 2;
constexpr int kExitInput = 3;
constexpr int kExitInternal = 4;

BudgetWeights parse_weights(const std::string& text) {
    BudgetWeights w{};
    std::stringstream in(text);
    std::string item;
    std::size_t k = 0;
    while (std::getline(in, item, ',')) {
        if (k >= w.size()) throw InvalidArgument("--weights expects three comma-separated values");
        try {
            w[k++] = std::stod(item);
        } catch (const std::exception&) {
            throw InvalidArgument("--weights entry '" + item + "' is not a number");
        }
    }
    if (k != w.size()) throw InvalidArgument("--weights expects three comma-separated values");
    return w;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            out.push_back(std::stoull(item));
        } else {
            const auto lo = std::stoull(item.substr(0, dash));
            const auto hi = std::stoull(item.substr(dash + 1));
            for (auto s = lo; s <= hi; ++s) out.push_back(s);
        }
    }
    return out;
}

int report_specs(const std::vector<ReachSegment>& segments, const std::vector<SafetySpec>& specs) {
    bool ok = true;
    for (const auto& v : check_specs(segments, specs)) {
        if (v.satisfied) {
            std::printf("spec %s: satisfied (max support %.17g)\n", v.name.c_str(), v.worst_support);
        } else {
            std::printf("spec %s: violated at segment %zu (max support %.17g)\n", v.name.c_str(),
                        *v.first_violation, v.worst_support);
            ok = false;
        }
    }
    return ok ? kExitOk : kExitViolated;
}

void print_summary(const RunReport& r) {
    std::printf("steps %zu  dt [%.6g, %.6g]  wall %.3fs  tuning %.1f%%\n", r.steps, r.dt_min, r.dt_max, r.wall_time,
                100.0 * r.tuning_time_fraction);
    std::printf("eps_H max %.6g (limit %.6g)  eps_P %.6g (limit %.6g)  eps_S %.6g (limit %.6g)\n", r.max_eps_H,
                r.budget.eps_H_max, r.eps_P_acc, r.budget.eps_P_max, r.eps_S_acc, r.budget.eps_S_max);
}

std::optional<std::filesystem::path> optional_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

double result_dt_min(const std::vector<ReachSegment>& segments) {
    double m = std::numeric_limits<double>::infinity();
    const std::size_t counted = segments.size() > 1 ? segments.size() - 1 : segments.size();
    for (std::size_t k = 0; k < counted; ++k) m = std::min(m, segments[k].t_hi - segments[k].t_lo);
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reachability analysis for linear systems with automatic parameter tuning"};
    app.require_subcommand(1);

    std::string model_path, out_path, report_path, result_path, weights_text = "1/3";
    double eps = 0.05;
    auto* run_cmd = app.add_subcommand("run", "adaptive analysis under a total error bound");
    run_cmd->add_option("--model", model_path, "model JSON")->required();
    run_cmd->add_option("--eps", eps, "total error bound eps_max");
    run_cmd->add_option("--weights", weights_text, "budget split h,p,s (sums to 1)");
    run_cmd->add_option("--out", out_path, "result JSONL");
    run_cmd->add_option("--report", report_path, "report JSON");

    double dt = 0.01, rho = 10.0;
    int eta = 4;
    auto* base_cmd = app.add_subcommand("baseline", "fixed dt, Taylor order and zonotope order");
    base_cmd->add_option("--model", model_path, "model JSON")->required();
    base_cmd->add_option("--dt", dt, "time step");
    base_cmd->add_option("--eta", eta, "Taylor order");
    base_cmd->add_option("--rho", rho, "zonotope order");
    base_cmd->add_option("--out", out_path, "result JSONL");
    base_cmd->add_option("--report", report_path, "report JSON");

    int dim = 5;
    std::uint64_t seed = 0;
    auto* gen_cmd = app.add_subcommand("gen", "random benchmark system");
    gen_cmd->add_option("--dim", dim, "dimension (>= 2)");
    gen_cmd->add_option("--seed", seed, "random seed");
    gen_cmd->add_option("--out", out_path, "model JSON")->required();

    auto* check_cmd = app.add_subcommand("check", "check model specs against a result");
    check_cmd->add_option("--result", result_path, "result JSONL")->required();
    check_cmd->add_option("--model", model_path, "model JSON with specs")->required();

    std::size_t count = 100, stride = 1;
    double step = 0.0;
    auto* sample_cmd = app.add_subcommand("sample", "simulate random trajectories");
    sample_cmd->add_option("--model", model_path, "model JSON")->required();
    sample_cmd->add_option("--count", count, "number of trajectories");
    sample_cmd->add_option("--seed", seed, "random seed");
    sample_cmd->add_option("--step", step, "RK4 step (default: result dt_min / 100, else T / 1000)");
    sample_cmd->add_option("--result", result_path, "result JSONL used to derive the step");
    sample_cmd->add_option("--stride", stride, "keep every stride-th state");
    sample_cmd->add_option("--out", out_path, "trajectory JSONL")->required();

    std::string dims_text = "2,5,10", seeds_text = "1-20";
    auto* bench_cmd = app.add_subcommand("bench", "adaptive runs on random systems (REACH_THREADS workers)");
    bench_cmd->add_option("--dims", dims_text, "comma-separated dimensions");
    bench_cmd->add_option("--seeds", seeds_text, "seeds, e.g. 1-20 or 1,4,9");
    bench_cmd->add_option("--eps", eps, "total error bound eps_max");
    bench_cmd->add_option("--weights", weights_text, "budget split h,p,s");
    bench_cmd->add_option("--report", report_path, "JSON array of per-run reports");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        const BudgetWeights weights = weights_text == "1/3" ? kDefaultWeights : parse_weights(weights_text);
        if (*run_cmd) {
            const Model model = load_model(model_path);
            auto [result, rep] = run_adaptive(model, eps, weights, optional_path(out_path), optional_path(report_path));
            print_summary(rep);
            return report_specs(result.segments, model.specs);
        }
        if (*base_cmd) {
            const Model model = load_model(model_path);
            auto [result, rep] =
                run_baseline_fixed(model, dt, eta, rho, optional_path(out_path), optional_path(report_path));
            print_summary(rep);
            return report_specs(result.segments, model.specs);
        }
        if (*gen_cmd) {
            save_model(Model{gen_random_system(dim, seed), {}}, out_path);
            return kExitOk;
        }
        if (*check_cmd) {
            const Model model = load_model(model_path);
            return report_specs(load_result(result_path), model.specs);
        }
        if (*sample_cmd) {
            const Model model = load_model(model_path);
            SampleOptions opts;
            opts.count = count;
            opts.seed = seed;
            opts.stride = stride;
            opts.step = step;
            if (opts.step <= 0.0 && !result_path.empty()) opts.step = result_dt_min(load_result(result_path)) / 100.0;
            std::ofstream out(out_path);
            if (!out) throw InputError("cannot write " + out_path);
            for (const auto& traj : sample_trajectories(model.system, opts)) {
                nlohmann::json t = nlohmann::json::array(), x = nlohmann::json::array();
                for (const auto& p : traj) {
                    t.push_back(p.t);
                    x.push_back(std::vector<double>(p.x.data(), p.x.data() + p.x.size()));
                }
                out << nlohmann::json{{"t", t}, {"x", x}}.dump() << '\n';
            }
            return kExitOk;
        }
        if (*bench_cmd) {
            std::vector<int> dims;
            for (auto d : parse_seeds(dims_text)) dims.push_back(static_cast<int>(d));
            const auto entries = run_batch(dims, parse_seeds(seeds_text), eps, weights, worker_count());
            nlohmann::json all = nlohmann::json::array();
            bool failed = false;
            for (const auto& e : entries) {
                if (e.ok) {
                    std::printf("n=%d seed=%llu steps=%zu wall=%.3fs tuning=%.1f%%\n", e.dimension,
                                static_cast<unsigned long long>(e.seed), e.report.steps, e.report.wall_time,
                                100.0 * e.report.tuning_time_fraction);
                    auto j = report_to_json(e.report);
                    j["seed"] = e.seed;
                    all.push_back(j);
                } else {
                    std::printf("n=%d seed=%llu failed: %s\n", e.dimension, static_cast<unsigned long long>(e.seed),
                                e.error.c_str());
                    failed = true;
                }
            }
            if (!report_path.empty()) {
                std::ofstream out(report_path);
                out << all.dump(2) << '\n';
            }
            return failed ? kExitInternal : kExitOk;
        }
    } catch (const InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "invalid argument: %s\n", e.what());
        return kExitInput;
    } catch (const DimensionMismatch& e) {
        std::fprintf(stderr, "dimension mismatch: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInternal;
    }
    return kExitInternal;
}
