#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "decision.hpp"
#include "labeling.hpp"
#include "noise.hpp"
#include "path_builder.hpp"
#include "query_graph.hpp"

namespace pathvote {

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

enum class SizesMode { uniform, balanced, explicit_sizes };

struct ExperimentConfig {
    int n = 100;
    int k = 2;
    NoiseSpec noise = NoiseSpec::sign_flip(0.1);
    std::optional<SamplingPlan> sampling;   // nullopt = auto from the budget
    std::optional<PathParams> path_params;  // nullopt = auto derived
    std::optional<int> branch_first_override;  // sweep knob
    RecoveryMode mode = RecoveryMode::anchored;
    int trials = 1;
    std::uint64_t seed = 1;
    SizesMode sizes_mode = SizesMode::uniform;
    std::vector<int> sizes;  // explicit_sizes only
    double budget_constant = 20.0;
    int workers = 1;
    std::string output;          // CSV path; empty = in-memory only
    std::string dump_paths_dir;  // empty = off
};

struct ExperimentRecord {
    std::string axis;  // sweep axis name, empty for plain runs
    double axis_value = 0.0;
    int trial = 0;
    std::uint64_t trial_seed = 0;
    int n = 0;
    int k = 0;
    std::string variant;
    double q = 0.0;
    std::string mode;
    std::string sampling;
    long long budget = 0;
    long long edge_count = 0;
    int depth1 = 0, depth2 = 0, branch_first = 0, branch_rest = 0;
    bool exact = false;
    int misclassified = 0;
    int pairs_failed = 0;
    int unassigned = 0;
    int ties = 0;
    double mean_paths = 0.0;
    double mean_max_read = 0.0;
    bool degraded = false;
    int max_bad_edges = 0;
    double wall_time_s = 0.0;
    std::string note;  // error text for failed trials
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
    j = nlohmann::json::object();
    j["n"] = cfg.n;
    j["k"] = cfg.k;
    j["noise"] = {{"model", to_string(cfg.noise.model)}, {"q", cfg.noise.q}};
    if (cfg.noise.model == NoiseModel::modular_general)
        j["noise"]["dist"] = cfg.noise.dist;
    if (cfg.sampling) {
        if (cfg.sampling->mode == SamplingPlan::Mode::bernoulli)
            j["sampling"] = {{"mode", "bernoulli"}, {"p", cfg.sampling->edge_prob}};
        else
            j["sampling"] = {{"mode", "fixed"}, {"count", cfg.sampling->query_count}};
    } else {
        j["sampling"] = "auto";
    }
    if (cfg.path_params) {
        const PathParams& p = *cfg.path_params;
        j["path_params"] = {{"depth1", p.depth1},
                            {"depth2", p.depth2},
                            {"branch_first", p.branch_first},
                            {"branch_rest", p.branch_rest},
                            {"min_paths", p.min_paths},
                            {"max_paths", p.max_paths}};
    } else {
        j["path_params"] = "auto";
    }
    if (cfg.branch_first_override)
        j["branch_first_override"] = *cfg.branch_first_override;
    j["mode"] = to_string(cfg.mode);
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    switch (cfg.sizes_mode) {
        case SizesMode::uniform: j["sizes"] = "uniform"; break;
        case SizesMode::balanced: j["sizes"] = "balanced"; break;
        case SizesMode::explicit_sizes: j["sizes"] = cfg.sizes; break;
    }
    j["budget_constant"] = cfg.budget_constant;
    j["workers"] = cfg.workers;
    j["output"] = cfg.output;
    if (!cfg.dump_paths_dir.empty()) j["dump_paths"] = cfg.dump_paths_dir;
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
    cfg = ExperimentConfig{};
    if (j.contains("n")) j.at("n").get_to(cfg.n);
    if (j.contains("k")) j.at("k").get_to(cfg.k);
    if (j.contains("noise")) {
        const auto& nj = j.at("noise");
        NoiseModel model = noise_model_from_string(
            nj.value("model", std::string("sign_flip")));
        if (model == NoiseModel::sign_flip)
            cfg.noise = NoiseSpec::sign_flip(nj.value("q", 0.1));
        else if (model == NoiseModel::modular_pm)
            cfg.noise = NoiseSpec::modular_pm(nj.value("q", 0.1));
        else
            cfg.noise = NoiseSpec::modular_general(
                nj.at("dist").get<std::vector<double>>());
    }
    if (j.contains("sampling") && j.at("sampling").is_object()) {
        const auto& sj = j.at("sampling");
        std::string mode = sj.value("mode", std::string("bernoulli"));
        if (mode == "bernoulli")
            cfg.sampling = SamplingPlan::bernoulli(sj.at("p").get<double>());
        else if (mode == "fixed")
            cfg.sampling =
                SamplingPlan::fixed_count(sj.at("count").get<long long>());
        else
            throw std::invalid_argument("config: unknown sampling mode " + mode);
    }
    if (j.contains("path_params") && j.at("path_params").is_object()) {
        const auto& pj = j.at("path_params");
        PathParams p;
        p.depth1 = pj.value("depth1", 1);
        p.depth2 = pj.value("depth2", 1);
        p.branch_first = pj.value("branch_first", 1);
        p.branch_rest = pj.value("branch_rest", 1);
        p.min_paths = pj.value("min_paths", 1);
        p.max_paths = pj.value("max_paths", std::numeric_limits<int>::max());
        cfg.path_params = p;
    }
    if (j.contains("branch_first_override"))
        cfg.branch_first_override = j.at("branch_first_override").get<int>();
    if (j.contains("mode"))
        cfg.mode = recovery_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("trials")) j.at("trials").get_to(cfg.trials);
    if (j.contains("seed")) j.at("seed").get_to(cfg.seed);
    if (j.contains("sizes")) {
        if (j.at("sizes").is_array()) {
            cfg.sizes_mode = SizesMode::explicit_sizes;
            j.at("sizes").get_to(cfg.sizes);
        } else if (j.at("sizes").get<std::string>() == "balanced") {
            cfg.sizes_mode = SizesMode::balanced;
        }
    }
    if (j.contains("budget_constant"))
        j.at("budget_constant").get_to(cfg.budget_constant);
    if (j.contains("workers")) j.at("workers").get_to(cfg.workers);
    if (j.contains("output")) j.at("output").get_to(cfg.output);
    if (j.contains("dump_paths")) j.at("dump_paths").get_to(cfg.dump_paths_dir);
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

inline const char* record_csv_header() {
    return "axis,axis_value,trial,trial_seed,n,k,variant,q,mode,sampling,"
           "budget,edge_count,depth1,depth2,branch_first,branch_rest,exact,"
           "misclassified,pairs_failed,unassigned,ties,mean_paths,"
           "mean_max_read,degraded,max_bad_edges,wall_time_s,note";
}

inline std::string record_to_csv(const ExperimentRecord& r) {
    std::ostringstream os;
    os.precision(12);
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    std::replace(note.begin(), note.end(), '\n', ' ');
    os << r.axis << ',' << r.axis_value << ',' << r.trial << ',' << r.trial_seed
       << ',' << r.n << ',' << r.k << ',' << r.variant << ',' << r.q << ','
       << r.mode << ',' << r.sampling << ',' << r.budget << ',' << r.edge_count
       << ',' << r.depth1 << ',' << r.depth2 << ',' << r.branch_first << ','
       << r.branch_rest << ',' << (r.exact ? 1 : 0) << ',' << r.misclassified
       << ',' << r.pairs_failed << ',' << r.unassigned << ',' << r.ties << ','
       << r.mean_paths << ',' << r.mean_max_read << ',' << (r.degraded ? 1 : 0)
       << ',' << r.max_bad_edges << ',' << r.wall_time_s << ',' << note;
    return os.str();
}

// Streams records to a CSV file, flushing per row so an interrupted run
// leaves a valid prefix. The full config is written next to it as a JSON
// sidecar (temp file + rename, so the sidecar is never half-written).
class RecordWriter {
  public:
    RecordWriter(const std::string& path, const ExperimentConfig& cfg) {
        std::filesystem::path p(path);
        if (p.has_parent_path())
            std::filesystem::create_directories(p.parent_path());
        const std::string sidecar = path + ".config.json";
        const std::string tmp = sidecar + ".tmp";
        {
            std::ofstream side(tmp);
            side << nlohmann::json(cfg).dump(2) << '\n';
        }
        std::filesystem::rename(tmp, sidecar);
        out_.open(path);
        if (!out_) throw std::runtime_error("cannot open output: " + path);
        out_ << record_csv_header() << '\n' << std::flush;
    }

    void write(const ExperimentRecord& rec) {
        out_ << record_to_csv(rec) << '\n' << std::flush;
    }

  private:
    std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Running experiments
// ---------------------------------------------------------------------------

namespace detail {

inline std::string describe_sampling(const SamplingPlan& plan, bool auto_mode) {
    std::ostringstream os;
    os.precision(6);
    if (plan.mode == SamplingPlan::Mode::bernoulli)
        os << (auto_mode ? "auto(p=" : "bernoulli(p=") << plan.edge_prob << ')';
    else
        os << "fixed(" << plan.query_count << ')';
    return os.str();
}

inline void dump_families(const QueryGraph& g, const PathParams& params,
                          const std::string& dir, int trial) {
    std::filesystem::create_directories(dir);
    const int cap = std::min(g.n() - 1, 20);
    for (int v = 1; v <= cap; ++v) {
        BuildResult built = build_path_family(g, 0, v, params);
        if (!built.ok()) continue;
        std::ostringstream name;
        name << "trial" << trial << "_0_" << v << ".paths";
        std::ofstream out(std::filesystem::path(dir) / name.str());
        write_paths(out, *built.family);
    }
}

}  // namespace detail

// One seeded trial: label, sample, recover, score. Exceptions (e.g.
// unsatisfiable parameters at tiny n) become a failed-trial record.
inline ExperimentRecord run_single_trial(const ExperimentConfig& cfg, int trial,
                                         const std::string& axis = "",
                                         double axis_value = 0.0) {
    ExperimentRecord rec;
    rec.axis = axis;
    rec.axis_value = axis_value;
    rec.trial = trial;
    rec.trial_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    rec.n = cfg.n;
    rec.k = cfg.k;
    rec.variant = to_string(cfg.noise.model);
    rec.q = cfg.noise.q;
    rec.mode = to_string(cfg.mode);

    const auto start = std::chrono::steady_clock::now();
    try {
        std::vector<int> sizes;
        if (cfg.sizes_mode == SizesMode::balanced)
            sizes = balanced_sizes(cfg.n, cfg.k);
        else if (cfg.sizes_mode == SizesMode::explicit_sizes)
            sizes = cfg.sizes;
        Labeling truth = make_labeling(cfg.n, cfg.k, sizes,
                                       derive_seed(rec.trial_seed, 1));

        SamplingPlan plan = SamplingPlan::bernoulli(0.0);
        const double gap = cfg.noise.gap();
        if (cfg.sampling) {
            plan = *cfg.sampling;
            rec.budget = plan.mode == SamplingPlan::Mode::fixed_count
                             ? plan.query_count
                             : static_cast<long long>(std::llround(
                                   plan.edge_prob * pair_count(cfg.n)));
        } else {
            BudgetReport budget = query_budget_report(cfg.n, gap,
                                                      cfg.budget_constant);
            rec.budget = budget.budget;
            plan = SamplingPlan::bernoulli(
                static_cast<double>(budget.budget) / pair_count(cfg.n));
        }
        rec.sampling = detail::describe_sampling(plan, !cfg.sampling);

        QueryGraph graph = sample_query_graph(truth, cfg.noise, plan,
                                              derive_seed(rec.trial_seed, 2));
        rec.edge_count = graph.edge_count();

        PathParams params;
        if (cfg.path_params) {
            params = *cfg.path_params;
        } else {
            double density =
                static_cast<double>(graph.edge_count()) / pair_count(cfg.n);
            params = derive_path_params(cfg.n, gap, density);
        }
        if (cfg.branch_first_override)
            params.branch_first = std::max(1, *cfg.branch_first_override);
        rec.depth1 = params.depth1;
        rec.depth2 = params.depth2;
        rec.branch_first = params.branch_first;
        rec.branch_rest = params.branch_rest;

        RecoveryResult result = recover_clusters(graph, params, cfg.mode);
        ClusteringScore score = clustering_error(result.clustering, truth);

        rec.exact = score.exact;
        rec.misclassified = score.misclassified;
        rec.pairs_failed = result.diag.pairs_failed;
        rec.unassigned = static_cast<int>(result.diag.unassigned.size());
        rec.ties = result.diag.ties;
        rec.mean_paths = result.diag.mean_paths;
        rec.mean_max_read = result.diag.mean_max_read;
        rec.degraded = result.diag.degraded;
        rec.max_bad_edges = result.diag.max_bad_edges;

        if (!cfg.dump_paths_dir.empty())
            detail::dump_families(graph, params, cfg.dump_paths_dir, trial);
    } catch (const std::exception& e) {
        rec.exact = false;
        rec.misclassified = cfg.n;
        rec.pairs_failed = std::max(0, cfg.n - 1);
        rec.note = std::string("trial failed: ") + e.what();
    }
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return rec;
}

// Runs cfg.trials seeded trials, in waves of cfg.workers threads, emitting
// records in trial order. Deterministic in everything but wall_time.
inline std::vector<ExperimentRecord> run_experiment(
    const ExperimentConfig& cfg, RecordWriter* writer = nullptr,
    const std::string& axis = "", double axis_value = 0.0) {
    if (cfg.trials < 1) throw std::invalid_argument("run: trials must be >= 1");
    const int workers = std::max(1, cfg.workers);

    std::vector<ExperimentRecord> records(cfg.trials);
    for (int base = 0; base < cfg.trials; base += workers) {
        const int count = std::min(workers, cfg.trials - base);
        if (count == 1) {
            records[base] = run_single_trial(cfg, base, axis, axis_value);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(count);
            for (int off = 0; off < count; ++off)
                pool.emplace_back([&, off] {
                    records[base + off] =
                        run_single_trial(cfg, base + off, axis, axis_value);
                });
            for (auto& t : pool) t.join();
        }
        if (writer)
            for (int off = 0; off < count; ++off) writer->write(records[base + off]);
    }
    return records;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

inline ExperimentConfig apply_axis(ExperimentConfig cfg, const std::string& axis,
                                   double value) {
    if (axis == "q") {
        switch (cfg.noise.model) {
            case NoiseModel::sign_flip:
                cfg.noise = NoiseSpec::sign_flip(value);
                break;
            case NoiseModel::modular_pm:
                cfg.noise = NoiseSpec::modular_pm(value);
                break;
            case NoiseModel::modular_general:
                throw std::invalid_argument(
                    "sweep: q axis undefined for the general model");
        }
    } else if (axis == "n") {
        cfg.n = static_cast<int>(value);
    } else if (axis == "k") {
        cfg.k = static_cast<int>(value);
    } else if (axis == "budget_constant") {
        cfg.budget_constant = value;
    } else if (axis == "branch_first") {
        cfg.branch_first_override = static_cast<int>(value);
    } else {
        throw std::invalid_argument("sweep: unknown axis " + axis);
    }
    return cfg;
}

inline std::vector<ExperimentRecord> run_sweep(const ExperimentConfig& base,
                                               const std::string& axis,
                                               const std::vector<double>& values,
                                               RecordWriter* writer = nullptr) {
    std::vector<ExperimentRecord> all;
    for (double value : values) {
        ExperimentConfig cfg = apply_axis(base, axis, value);
        std::vector<ExperimentRecord> part =
            run_experiment(cfg, writer, axis, value);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

// ---------------------------------------------------------------------------
// Oracle verification
// ---------------------------------------------------------------------------

struct VerifyItem {
    std::string name;
    bool pass = false;
    double max_err = 0.0;  // worst absolute discrepancy (or margin violation)
    std::string worst;     // offending grid point / detail
};

struct VerifyReport {
    std::vector<VerifyItem> items;
    bool all_pass = true;
};

// Injection points so tests can feed a perturbed closed form and watch the
// verifier catch it.
struct VerifyHooks {
    std::function<double(double, int)> agree = [](double q, int L) {
        return path_agree_prob(q, L);
    };
    std::function<ChainDistribution(double, int, int)> chain =
        [](double q, int k, int t) { return chain_closed_form(q, k, t); };
};

inline VerifyReport verify_oracles(const VerifyHooks& hooks = VerifyHooks{}) {
    VerifyReport report;
    auto add = [&](VerifyItem item) {
        report.all_pass = report.all_pass && item.pass;
        report.items.push_back(std::move(item));
    };

    {
        VerifyItem item{"parity identity (closed form vs DP)", true, 0.0, ""};
        for (int qi = 0; qi <= 10; ++qi) {
            double q = qi * 0.05;
            for (int L = 0; L <= 50; ++L) {
                double err = std::abs(hooks.agree(q, L) - parity_prob_oracle(q, L));
                if (err > item.max_err) {
                    item.max_err = err;
                    std::ostringstream os;
                    os << "q=" << q << " L=" << L;
                    item.worst = os.str();
                }
            }
        }
        item.pass = item.max_err <= 1e-12;
        add(std::move(item));
    }

    {
        VerifyItem item{"chain identity (spectral vs convolution)", true, 0.0, ""};
        VerifyItem sym{"chain symmetry probs[j] = probs[k-j]", true, 0.0, ""};
        VerifyItem dom{"plurality dominance (q < 1/2)", true, 0.0, ""};
        double worst_margin = 1.0;
        for (int k = 3; k <= 8; ++k) {
            for (int qi = 0; qi <= 5; ++qi) {
                double q = qi * 0.1;
                for (int t = 0; t <= 60; ++t) {
                    ChainDistribution closed = hooks.chain(q, k, t);
                    ChainDistribution powered =
                        chain_power_oracle(pm_step_dist(q, k), k, t);
                    for (int m = 0; m < k; ++m) {
                        double err = std::abs(closed.probs[m] - powered.probs[m]);
                        if (err > item.max_err) {
                            item.max_err = err;
                            std::ostringstream os;
                            os << "k=" << k << " q=" << q << " t=" << t
                               << " m=" << m;
                            item.worst = os.str();
                        }
                    }
                    for (int m = 1; m < k; ++m) {
                        double err =
                            std::abs(closed.probs[m] - closed.probs[k - m]);
                        if (err > sym.max_err) {
                            sym.max_err = err;
                            std::ostringstream os;
                            os << "k=" << k << " q=" << q << " t=" << t
                               << " m=" << m;
                            sym.worst = os.str();
                        }
                    }
                    // dominance margin is only resolvable in doubles while
                    // the gap stays above one ulp of 1/k; cap t accordingly
                    if (q < 0.5 && t <= 25) {
                        double margin = closed.probs[0] - 1.0 / k;
                        for (int m = 1; m < k; ++m)
                            margin = std::min(
                                margin, closed.probs[0] - closed.probs[m]);
                        if (margin < worst_margin) {
                            worst_margin = margin;
                            std::ostringstream os;
                            os << "k=" << k << " q=" << q << " t=" << t;
                            dom.worst = os.str();
                        }
                        if (margin <= 0.0) dom.pass = false;
                    }
                }
            }
        }
        item.pass = item.max_err <= 1e-10;
        sym.pass = sym.max_err <= 1e-12;
        dom.max_err = worst_margin;
        add(std::move(item));
        add(std::move(sym));
        add(std::move(dom));
    }

    {
        VerifyItem item{"k=3 explicit formula", true, 0.0, ""};
        for (int qi = 0; qi <= 5; ++qi) {
            double q = qi * 0.1;
            for (int t = 0; t <= 60; ++t) {
                ChainDistribution closed = hooks.chain(q, 3, t);
                double a = std::pow(1.0 - 1.5 * q, t);
                double expect0 = 1.0 / 3.0 + 2.0 / 3.0 * a;
                double expect1 = 1.0 / 3.0 - 1.0 / 3.0 * a;
                double err = std::max(
                    std::abs(closed.probs[0] - expect0),
                    std::max(std::abs(closed.probs[1] - expect1),
                             std::abs(closed.probs[2] - expect1)));
                if (err > item.max_err) {
                    item.max_err = err;
                    std::ostringstream os;
                    os << "q=" << q << " t=" << t;
                    item.worst = os.str();
                }
            }
        }
        item.pass = item.max_err <= 1e-12;
        add(std::move(item));
    }

    {
        VerifyItem item{"Monte Carlo parity (q=0.2, L=7)", true, 0.0, ""};
        const int trials = 100000;
        const double q = 0.2;
        const int L = 7;
        SplitMix64 rng(derive_seed(0x7e57edULL, 0x9a2157ULL));
        int agree = 0;
        for (int i = 0; i < trials; ++i) {
            int flips = 0;
            for (int e = 0; e < L; ++e)
                if (rng.next_unit() < q) ++flips;
            if (flips % 2 == 0) ++agree;
        }
        double expected = hooks.agree(q, L);
        double emp = static_cast<double>(agree) / trials;
        double sigma = std::sqrt(expected * (1.0 - expected) / trials);
        item.max_err = std::abs(emp - expected);
        std::ostringstream os;
        os << "empirical=" << emp << " expected=" << expected
           << " 3sigma=" << 3.0 * sigma;
        item.worst = os.str();
        item.pass = item.max_err <= 3.0 * sigma;
        add(std::move(item));
    }

    {
        // 100 groups of 10 summands sharing one Bernoulli(q) draw each:
        // a read-10 family of r = 1000 indicators.
        VerifyItem item{"read-k tail dominance (MC vs KL bound)", true, 0.0, ""};
        const int groups = 100, share = 10, trials = 10000;
        const double q = 0.3;
        const long long r = static_cast<long long>(groups) * share;
        SplitMix64 rng(derive_seed(0x7e57edULL, 0xc0ffeeULL));
        std::vector<int> sums(trials);
        for (int i = 0; i < trials; ++i) {
            int hot = 0;
            for (int gidx = 0; gidx < groups; ++gidx)
                if (rng.next_unit() < q) ++hot;
            sums[i] = hot * share;
        }
        std::ostringstream os;
        for (double eps : {0.05, 0.1}) {
            double bound = read_k_tail(r, share, q, eps, TailForm::kl).bound;
            double threshold = (q + eps) * r;
            int over = 0;
            for (int s : sums)
                if (s >= threshold) ++over;
            double emp = static_cast<double>(over) / trials;
            os << "eps=" << eps << ": empirical=" << emp << " bound=" << bound
               << "; ";
            if (emp > bound) {
                item.pass = false;
                item.max_err = std::max(item.max_err, emp - bound);
            }
        }
        item.worst = os.str();
        add(std::move(item));
    }

    return report;
}

}  // namespace pathvote
