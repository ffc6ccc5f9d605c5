#include "reach/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace reach {

using nlohmann::json;

namespace {

const json& require(const json& obj, const std::string& key, const std::string& context) {
    if (!obj.is_object()) throw InputError(context + " must be an object");
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw InputError("missing field " + (context.empty() ? key : context + "." + key));
    }
    return *it;
}

double read_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw InputError("field " + field + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw InputError("field " + field + " contains a non-finite value");
    return x;
}

Vector read_vector(const json& v, const std::string& field) {
    if (!v.is_array()) throw InputError("field " + field + " must be an array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = read_number(v[i], field + "[" + std::to_string(i) + "]");
    }
    return out;
}

// Rows of `v` become rows of the result unless `as_columns` is set.
Matrix read_matrix(const json& v, const std::string& field, Eigen::Index inner, bool as_columns) {
    if (!v.is_array()) throw InputError("field " + field + " must be an array of arrays");
    const auto outer = static_cast<Eigen::Index>(v.size());
    Matrix m = as_columns ? Matrix(inner, outer) : Matrix(outer, inner);
    for (Eigen::Index i = 0; i < outer; ++i) {
        const std::string name = field + "[" + std::to_string(i) + "]";
        Vector line = read_vector(v[static_cast<std::size_t>(i)], name);
        if (line.size() != inner) {
            throw InputError("field " + name + " has length " + std::to_string(line.size()) + ", expected " +
                             std::to_string(inner));
        }
        if (as_columns) {
            m.col(i) = line;
        } else {
            m.row(i) = line.transpose();
        }
    }
    return m;
}

Zonotope read_zonotope(const json& v, const std::string& field, Eigen::Index n) {
    Vector c = read_vector(require(v, "center", field), field + ".center");
    if (c.size() != n) {
        throw InputError("field " + field + ".center has dimension " + std::to_string(c.size()) + ", expected " +
                         std::to_string(n));
    }
    Matrix g(n, 0);
    if (auto it = v.find("generators"); it != v.end() && !it->is_null()) {
        g = read_matrix(*it, field + ".generators", n, true);
    }
    return Zonotope(std::move(c), std::move(g));
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json columns_json(const Matrix& m) {
    json cols = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) cols.push_back(vector_json(m.col(j)));
    return cols;
}

json zonotope_json(const Zonotope& z) {
    return {{"center", vector_json(z.center())}, {"generators", columns_json(z.generators())}};
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json parse_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(source + ": parse error at line " + std::to_string(line_of_offset(text, e.byte)) + ": " +
                         e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace

Model parse_model(const json& doc) {
    if (!doc.is_object()) throw InputError("model must be a JSON object");
    const json& a_json = require(doc, "A", "");
    if (!a_json.is_array() || a_json.empty()) throw InputError("field A must be a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(a_json.size());
    if (!a_json[0].is_array()) throw InputError("field A must be an array of rows");
    if (static_cast<Eigen::Index>(a_json[0].size()) != n) {
        throw InputError("field A must be square, got " + std::to_string(n) + " rows of length " +
                         std::to_string(a_json[0].size()));
    }

    Model model;
    LinearSystem& sys = model.system;
    sys.a = read_matrix(a_json, "A", n, false);
    sys.initial = read_zonotope(require(doc, "X0", ""), "X0", n);
    sys.input = read_zonotope(require(doc, "U", ""), "U", n);
    sys.horizon = read_number(require(doc, "T", ""), "T");
    if (sys.horizon <= 0.0) throw InputError("field T must be positive");

    if (auto it = doc.find("specs"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) throw InputError("field specs must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& s = (*it)[i];
            const std::string field = "specs[" + std::to_string(i) + "]";
            SafetySpec spec;
            spec.name = s.is_object() && s.contains("name") && s["name"].is_string() ? s["name"].get<std::string>()
                                                                                   : field;
            spec.direction = read_vector(require(s, "direction", field), field + ".direction");
            if (spec.direction.size() != n) {
                throw InputError("field " + field + ".direction has dimension " +
                                 std::to_string(spec.direction.size()) + ", expected " + std::to_string(n));
            }
            spec.bound = read_number(require(s, "bound", field), field + ".bound");
            model.specs.push_back(std::move(spec));
        }
    }
    return model;
}

Model load_model(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    return parse_model(parse_text(text, path.string()));
}

json model_to_json(const Model& model) {
    const LinearSystem& sys = model.system;
    json a = json::array();
    for (Eigen::Index i = 0; i < sys.a.rows(); ++i) a.push_back(vector_json(sys.a.row(i).transpose()));
    json doc = {{"A", a}, {"X0", zonotope_json(sys.initial)}, {"U", zonotope_json(sys.input)}, {"T", sys.horizon}};
    if (!model.specs.empty()) {
        json specs = json::array();
        for (const auto& s : model.specs) {
            specs.push_back({{"name", s.name}, {"direction", vector_json(s.direction)}, {"bound", s.bound}});
        }
        doc["specs"] = specs;
    }
    return doc;
}

void save_model(const Model& model, const std::filesystem::path& path) {
    write_text(path, model_to_json(model).dump(2) + "\n");
}

LinearSystem gen_random_system(int n, std::uint64_t seed) {
    if (n < 2) throw InvalidArgument("random systems need dimension >= 2");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> real_part(-1.0, 1.0);
    std::uniform_real_distribution<double> imag_part(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

    Matrix d = Matrix::Zero(n, n);
    int i = 0;
    for (; i + 1 < n; i += 2) {
        const double a = real_part(rng);
        const double b = imag_part(rng);
        d(i, i) = a;
        d(i, i + 1) = b;
        d(i + 1, i) = -b;
        d(i + 1, i + 1) = a;
    }
    if (i < n) d(i, i) = real_part(rng);

    const int rotations = n <= 10 ? (n + 1) / 2 : n;
    std::uniform_int_distribution<int> index(0, n - 1);
    Matrix q = Matrix::Identity(n, n);
    for (int r = 0; r < rotations; ++r) {
        const int p = index(rng);
        int s = index(rng);
        while (s == p) s = index(rng);
        const double th = angle(rng);
        const double c = std::cos(th);
        const double sn = std::sin(th);
        // q <- q * G(p, s, th)
        const Vector qp = q.col(p);
        const Vector qs = q.col(s);
        q.col(p) = c * qp + sn * qs;
        q.col(s) = -sn * qp + c * qs;
    }

    LinearSystem sys;
    sys.a = q * d * q.transpose();
    sys.initial = Zonotope::box(Vector::Constant(n, 10.0), Vector::Constant(n, 0.25));
    sys.input = Zonotope::box(Vector::Constant(n, 1.0), Vector::Constant(n, 0.05));
    sys.horizon = 3.0;
    return sys;
}

RunReport make_report(const ReachResult& result, Eigen::Index dimension, const ErrorBudget& budget) {
    RunReport rep;
    const auto& steps = result.ledger.steps;
    rep.steps = steps.size();
    rep.dimension = dimension;
    rep.budget = budget;
    rep.eps_P_acc = result.ledger.eps_P_acc;
    rep.eps_S_acc = result.ledger.eps_S_acc;
    rep.max_eps_H = result.ledger.max_eps_H();
    rep.wall_time = result.timing.total_seconds;
    rep.tuning_time_fraction = result.timing.tuning_fraction();
    if (!steps.empty()) {
        const std::size_t counted = steps.size() > 1 ? steps.size() - 1 : 1;
        rep.dt_min = steps.front().dt;
        rep.dt_max = steps.front().dt;
        for (std::size_t k = 0; k < steps.size(); ++k) {
            if (k < counted) rep.dt_min = std::min(rep.dt_min, steps[k].dt);
            rep.dt_max = std::max(rep.dt_max, steps[k].dt);
        }
    }
    for (const auto& s : steps) {
        rep.t.push_back(s.t_lo);
        rep.dt.push_back(s.dt);
        rep.eta.push_back(s.eta);
        rep.rho.push_back(s.rho);
        rep.retries.push_back(s.retries);
    }
    return rep;
}

json report_to_json(const RunReport& r) {
    return {
        {"steps", r.steps},
        {"dt_min", r.dt_min},
        {"dt_max", r.dt_max},
        {"wall_time", r.wall_time},
        {"tuning_time_fraction", r.tuning_time_fraction},
        {"ledger",
         {{"eps_P_acc", r.eps_P_acc},
          {"eps_S_acc", r.eps_S_acc},
          {"max_eps_H", r.max_eps_H},
          {"eps_H_max", r.budget.eps_H_max},
          {"eps_P_max", r.budget.eps_P_max},
          {"eps_S_max", r.budget.eps_S_max}}},
        {"series", {{"t", r.t}, {"dt", r.dt}, {"eta", r.eta}, {"rho", r.rho}, {"retries", r.retries}}},
        {"timing", {{"dimension", r.dimension}, {"tuning_fraction", r.tuning_time_fraction}}},
    };
}

json segment_to_json(const ReachSegment& s) {
    const IntervalVector hull = box(s.set);
    return {{"t_lo", s.t_lo},
            {"t_hi", s.t_hi},
            {"center", vector_json(s.set.center())},
            {"generators", columns_json(s.set.generators())},
            {"interval_lo", vector_json(hull.lo)},
            {"interval_hi", vector_json(hull.hi)}};
}

ReachSegment segment_from_json(const json& line) {
    ReachSegment s;
    s.t_lo = read_number(require(line, "t_lo", "segment"), "t_lo");
    s.t_hi = read_number(require(line, "t_hi", "segment"), "t_hi");
    Vector c = read_vector(require(line, "center", "segment"), "center");
    Matrix g = read_matrix(require(line, "generators", "segment"), "generators", c.size(), true);
    s.set = Zonotope(std::move(c), std::move(g));
    return s;
}

// nlohmann emits the shortest representation that parses back to the same
// double, which is at most 17 significant digits.
void save_result(const std::vector<ReachSegment>& segments, const std::filesystem::path& path) {
    std::string text;
    for (const auto& s : segments) {
        text += segment_to_json(s).dump();
        text += '\n';
    }
    write_text(path, text);
}

std::vector<ReachSegment> load_result(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<ReachSegment> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + " line " + std::to_string(number);
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw InputError(where + ": " + e.what());
        }
        try {
            out.push_back(segment_from_json(doc));
        } catch (const ReachError& e) {
            throw InputError(where + ": " + e.what());
        }
    }
    return out;
}

namespace {

RunReport finish(const ReachResult& result, const LinearSystem& sys, const ErrorBudget& budget,
                 const std::optional<std::filesystem::path>& out_path,
                 const std::optional<std::filesystem::path>& report_path) {
    RunReport rep = make_report(result, sys.dim(), budget);
    if (out_path) save_result(result.segments, *out_path);
    if (report_path) write_text(*report_path, report_to_json(rep).dump(2) + "\n");
    return rep;
}

}  // namespace

std::pair<ReachResult, RunReport> run_adaptive(const Model& model, double eps_max, const BudgetWeights& weights,
                                               const std::optional<std::filesystem::path>& out_path,
                                               const std::optional<std::filesystem::path>& report_path) {
    RunOptions options;
    options.weights = weights;
    ReachResult result = run(model.system, eps_max, options);
    RunReport rep = finish(result, model.system, split_budget(eps_max, weights), out_path, report_path);
    return {std::move(result), std::move(rep)};
}

std::pair<ReachResult, RunReport> run_baseline_fixed(const Model& model, double dt, int eta, double rho,
                                                     const std::optional<std::filesystem::path>& out_path,
                                                     const std::optional<std::filesystem::path>& report_path) {
    ReachResult result = run_fixed(model.system, dt, eta, rho);
    RunReport rep = finish(result, model.system, ErrorBudget{}, out_path, report_path);
    return {std::move(result), std::move(rep)};
}

std::vector<SpecVerdict> check_specs(const std::vector<ReachSegment>& segments, const std::vector<SafetySpec>& specs) {
    std::vector<SpecVerdict> out;
    for (const auto& spec : specs) {
        SpecVerdict v;
        v.name = spec.name;
        v.worst_support = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < segments.size(); ++k) {
            if (segments[k].set.dim() != spec.direction.size()) {
                throw DimensionMismatch("spec " + spec.name + " does not match the result dimension");
            }
            const double h = support(segments[k].set, spec.direction);
            v.worst_support = std::max(v.worst_support, h);
            if (h > spec.bound && v.satisfied) {
                v.satisfied = false;
                v.first_violation = k;
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<Trajectory> sample_trajectories(const LinearSystem& sys, const SampleOptions& options) {
    if (options.count < 1) throw InvalidArgument("sample count must be >= 1");
    sys.validate();
    const double horizon = sys.horizon;
    const double step = options.step > 0.0 ? options.step : horizon / 1000.0;
    const int switches = std::max(1, options.switches);
    const std::size_t stride = std::max<std::size_t>(1, options.stride);

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    auto draw = [&](const Zonotope& z, bool vertex) {
        Vector beta(z.num_generators());
        for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) = vertex ? (coin(rng) ? 1.0 : -1.0) : unit(rng);
        return Vector(z.center() + z.generators() * beta);
    };

    const Matrix& a = sys.a;
    std::vector<Trajectory> out;
    out.reserve(options.count);
    for (std::size_t k = 0; k < options.count; ++k) {
        Vector x = draw(sys.initial, k % 2 == 0);
        Trajectory traj{{0.0, x}};
        std::size_t counter = 0;
        for (int j = 0; j < switches; ++j) {
            const Vector u = draw(sys.input, coin(rng));
            const double t_a = horizon * j / switches;
            const double t_b = j + 1 == switches ? horizon : horizon * (j + 1) / switches;
            const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil((t_b - t_a) / step - 1e-9)));
            const double h = (t_b - t_a) / static_cast<double>(m);
            for (std::size_t i = 0; i < m; ++i) {
                const Vector k1 = a * x + u;
                const Vector k2 = a * (x + 0.5 * h * k1) + u;
                const Vector k3 = a * (x + 0.5 * h * k2) + u;
                const Vector k4 = a * (x + h * k3) + u;
                x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                ++counter;
                const bool final = j + 1 == switches && i + 1 == m;
                if (counter % stride == 0 || final) {
                    traj.push_back({i + 1 == m ? t_b : t_a + h * static_cast<double>(i + 1), x});
                }
            }
        }
        out.push_back(std::move(traj));
    }
    return out;
}

std::optional<std::size_t> covering_segment(const std::vector<ReachSegment>& segments, double t) {
    auto it = std::lower_bound(segments.begin(), segments.end(), t,
                               [](const ReachSegment& s, double value) { return s.t_hi < value; });
    if (it == segments.end() || t < it->t_lo) return std::nullopt;
    return static_cast<std::size_t>(it - segments.begin());
}

unsigned worker_count() {
    if (const char* env = std::getenv("REACH_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<BatchEntry> run_batch(const std::vector<int>& dimensions, const std::vector<std::uint64_t>& seeds,
                                  double eps_max, const BudgetWeights& weights, unsigned workers) {
    std::vector<BatchEntry> entries;
    for (int n : dimensions) {
        for (auto s : seeds) entries.push_back({n, s, false, {}, {}});
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < entries.size(); k = next++) {
            BatchEntry& e = entries[k];
            try {
                Model model{gen_random_system(e.dimension, e.seed), {}};
                e.report = run_adaptive(model, eps_max, weights).second;
                e.ok = true;
            } catch (const std::exception& ex) {
                e.error = ex.what();
            }
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(entries.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return entries;
}

}  // namespace reach
