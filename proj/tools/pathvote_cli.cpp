// Command-line front door: simulate / sweep / analyze / verify / budget.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathvote/pathvote.hpp"

namespace {

using nlohmann::json;

std::vector<double> parse_csv_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

std::vector<int> parse_csv_ints(const std::string& csv) {
    std::vector<int> out;
    for (double v : parse_csv_doubles(csv)) out.push_back(static_cast<int>(v));
    return out;
}

struct SimOptions {
    std::string config_path;
    int n = 400;
    int k = 2;
    double q = 0.1;
    std::string variant = "sign_flip";
    std::string dist_csv;
    int trials = 1;
    std::uint64_t seed = 1;
    std::string mode = "anchored";
    std::string sampling = "auto";
    long long queries = 0;
    double edge_prob = 0.0;
    bool balanced = false;
    std::string sizes_csv;
    double budget_constant = 20.0;
    int workers = 1;
    std::string out;
    std::string dump_paths;
    // explicit path params (all five must be given together)
    std::string path_params_csv;  // depth1,depth2,branch_first,branch_rest,min_paths
};

void add_sim_options(CLI::App* cmd, SimOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON config file (flags override)");
    cmd->add_option("--n", o.n, "number of items");
    cmd->add_option("--k", o.k, "number of clusters");
    cmd->add_option("--q", o.q, "corruption probability");
    cmd->add_option("--variant", o.variant,
                    "noise model: sign_flip | modular_pm | modular_general");
    cmd->add_option("--dist", o.dist_csv,
                    "error distribution for modular_general, comma-separated");
    cmd->add_option("--trials", o.trials, "number of seeded trials");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--mode", o.mode, "recovery mode: anchored | all-pairs");
    cmd->add_option("--sampling", o.sampling,
                    "query sampling: auto | bernoulli | fixed");
    cmd->add_option("--queries", o.queries, "query count for --sampling fixed");
    cmd->add_option("--p", o.edge_prob, "edge probability for --sampling bernoulli");
    cmd->add_flag("--balanced", o.balanced, "equal-size ground-truth clusters");
    cmd->add_option("--sizes", o.sizes_csv, "explicit cluster sizes, comma-separated");
    cmd->add_option("--budget-constant", o.budget_constant,
                    "constant in the auto query budget");
    cmd->add_option("--workers", o.workers, "parallel trial workers");
    cmd->add_option("--out", o.out, "CSV output path");
    cmd->add_option("--dump-paths", o.dump_paths, "directory for path family dumps");
    cmd->add_option("--path-params", o.path_params_csv,
                    "depth1,depth2,branch_first,branch_rest,min_paths "
                    "(default: auto-derived)");
}

pathvote::ExperimentConfig build_config(const CLI::App* cmd, const SimOptions& o) {
    pathvote::ExperimentConfig cfg;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw CLI::ValidationError("--config", "cannot open file");
        json j;
        in >> j;
        cfg = j.get<pathvote::ExperimentConfig>();
    }
    if (cmd->count("--n")) cfg.n = o.n;
    if (cmd->count("--k")) cfg.k = o.k;
    if (cmd->count("--q") || cmd->count("--variant") || cmd->count("--dist")) {
        pathvote::NoiseModel model = pathvote::noise_model_from_string(
            cmd->count("--variant") ? o.variant
                                    : pathvote::to_string(cfg.noise.model));
        double q = cmd->count("--q") ? o.q : cfg.noise.q;
        switch (model) {
            case pathvote::NoiseModel::sign_flip:
                cfg.noise = pathvote::NoiseSpec::sign_flip(q);
                break;
            case pathvote::NoiseModel::modular_pm:
                cfg.noise = pathvote::NoiseSpec::modular_pm(q);
                break;
            case pathvote::NoiseModel::modular_general:
                cfg.noise = pathvote::NoiseSpec::modular_general(
                    parse_csv_doubles(o.dist_csv));
                break;
        }
    }
    if (cmd->count("--trials")) cfg.trials = o.trials;
    if (cmd->count("--seed")) cfg.seed = o.seed;
    if (cmd->count("--mode"))
        cfg.mode = pathvote::recovery_mode_from_string(o.mode);
    if (cmd->count("--sampling")) {
        if (o.sampling == "auto")
            cfg.sampling.reset();
        else if (o.sampling == "bernoulli")
            cfg.sampling = pathvote::SamplingPlan::bernoulli(o.edge_prob);
        else if (o.sampling == "fixed")
            cfg.sampling = pathvote::SamplingPlan::fixed_count(o.queries);
        else
            throw CLI::ValidationError("--sampling", "unknown mode " + o.sampling);
    }
    if (o.balanced) cfg.sizes_mode = pathvote::SizesMode::balanced;
    if (cmd->count("--sizes")) {
        cfg.sizes_mode = pathvote::SizesMode::explicit_sizes;
        cfg.sizes = parse_csv_ints(o.sizes_csv);
    }
    if (cmd->count("--budget-constant")) cfg.budget_constant = o.budget_constant;
    if (cmd->count("--workers")) cfg.workers = o.workers;
    if (cmd->count("--out")) cfg.output = o.out;
    if (cmd->count("--dump-paths")) cfg.dump_paths_dir = o.dump_paths;
    if (cmd->count("--path-params")) {
        std::vector<int> p = parse_csv_ints(o.path_params_csv);
        if (p.size() != 5)
            throw CLI::ValidationError("--path-params", "need exactly 5 values");
        pathvote::PathParams params;
        params.depth1 = p[0];
        params.depth2 = p[1];
        params.branch_first = p[2];
        params.branch_rest = p[3];
        params.min_paths = p[4];
        cfg.path_params = params;
    }
    return cfg;
}

json summarize(const std::vector<pathvote::ExperimentRecord>& records) {
    json out;
    out["trials"] = records.size();
    if (records.empty()) return out;
    double exact = 0, mis = 0, paths = 0, read = 0, failed = 0;
    for (const auto& r : records) {
        exact += r.exact ? 1 : 0;
        mis += r.misclassified;
        paths += r.mean_paths;
        read += r.mean_max_read;
        failed += r.pairs_failed;
    }
    const double n = static_cast<double>(records.size());
    out["exact_rate"] = exact / n;
    out["mean_misclassified"] = mis / n;
    out["mean_paths_per_pair"] = paths / n;
    out["mean_max_read"] = read / n;
    out["mean_pairs_failed"] = failed / n;
    return out;
}

// Progress goes to stderr so stdout stays pure JSON for scripting.
void print_records(const std::vector<pathvote::ExperimentRecord>& records) {
    for (const auto& r : records) {
        std::cerr << "trial " << r.trial;
        if (!r.axis.empty())
            std::cerr << " [" << r.axis << "=" << r.axis_value << "]";
        std::cerr << ": exact=" << (r.exact ? 1 : 0)
                  << " misclassified=" << r.misclassified
                  << " pairs_failed=" << r.pairs_failed
                  << " mean_paths=" << r.mean_paths
                  << " edges=" << r.edge_count << " time=" << r.wall_time_s
                  << "s";
        if (!r.note.empty()) std::cerr << " note=" << r.note;
        std::cerr << '\n';
    }
}

int run_simulate(const CLI::App* cmd, const SimOptions& o) {
    pathvote::ExperimentConfig cfg = build_config(cmd, o);
    std::unique_ptr<pathvote::RecordWriter> writer;
    if (!cfg.output.empty())
        writer = std::make_unique<pathvote::RecordWriter>(cfg.output, cfg);
    auto records = pathvote::run_experiment(cfg, writer.get());
    print_records(records);
    std::cout << summarize(records).dump(2) << std::endl;
    return 0;
}

int run_sweep_cmd(const CLI::App* cmd, const SimOptions& o,
                  const std::string& axis, const std::string& values_csv) {
    pathvote::ExperimentConfig cfg = build_config(cmd, o);
    std::vector<double> values = parse_csv_doubles(values_csv);
    std::unique_ptr<pathvote::RecordWriter> writer;
    if (!cfg.output.empty())
        writer = std::make_unique<pathvote::RecordWriter>(cfg.output, cfg);
    auto records = pathvote::run_sweep(cfg, axis, values, writer.get());
    print_records(records);
    json by_value = json::array();
    std::size_t pos = 0;
    for (double v : values) {
        std::vector<pathvote::ExperimentRecord> slice;
        while (pos < records.size() && records[pos].axis_value == v &&
               records[pos].axis == axis) {
            slice.push_back(records[pos]);
            ++pos;
        }
        json s = summarize(slice);
        s["axis"] = axis;
        s["value"] = v;
        by_value.push_back(s);
    }
    std::cout << by_value.dump(2) << std::endl;
    return 0;
}

int run_verify() {
    pathvote::VerifyReport report = pathvote::verify_oracles();
    for (const auto& item : report.items) {
        std::cout << (item.pass ? "[ok]   " : "[FAIL] ") << item.name
                  << "  max_err=" << item.max_err;
        if (!item.worst.empty()) std::cout << "  (" << item.worst << ")";
        std::cout << '\n';
    }
    std::cout << (report.all_pass ? "verify: all checks passed"
                                  : "verify: FAILURES present")
              << std::endl;
    return report.all_pass ? 0 : 1;
}

struct AnalyzeOptions {
    std::string formula;
    double q = 0.2;
    int L = 7;
    int k = 3;
    int t = 5;
    std::string dist_csv;
    long long r = 1000;
    int k_read = 10;
    double epsilon = 0.1;
    std::string form = "kl";
    double a = 0.4, b = 0.3;
    long long N = 100;
    double c = 0.3;
};

int run_analyze(const AnalyzeOptions& o) {
    json out;
    out["formula"] = o.formula;
    if (o.formula == "agree") {
        out["inputs"] = {{"q", o.q}, {"L", o.L}};
        out["value"] = pathvote::path_agree_prob(o.q, o.L);
    } else if (o.formula == "parity-oracle") {
        out["inputs"] = {{"q", o.q}, {"L", o.L}};
        out["value"] = pathvote::parity_prob_oracle(o.q, o.L);
    } else if (o.formula == "chain") {
        out["inputs"] = {{"q", o.q}, {"k", o.k}, {"t", o.t}};
        out["probs"] = pathvote::chain_closed_form(o.q, o.k, o.t).probs;
    } else if (o.formula == "chain-power") {
        std::vector<double> dist = o.dist_csv.empty()
                                       ? pathvote::pm_step_dist(o.q, o.k)
                                       : parse_csv_doubles(o.dist_csv);
        out["inputs"] = {{"dist", dist}, {"k", o.k}, {"t", o.t}};
        out["probs"] = pathvote::chain_power_oracle(dist, o.k, o.t).probs;
    } else if (o.formula == "plurality-gap") {
        out["inputs"] = {{"q", o.q}, {"k", o.k}, {"t", o.t}};
        pathvote::PluralityGap g = pathvote::plurality_gap(o.q, o.k, o.t);
        out["exact"] = g.exact;
        out["bound"] = g.bound;
    } else if (o.formula == "read-k-tail") {
        out["inputs"] = {{"r", o.r},
                         {"k_read", o.k_read},
                         {"q", o.q},
                         {"epsilon", o.epsilon},
                         {"form", o.form}};
        out["bound"] = pathvote::read_k_tail(o.r, o.k_read, o.q, o.epsilon,
                                             pathvote::tail_form_from_string(o.form))
                           .bound;
    } else if (o.formula == "kl") {
        out["inputs"] = {{"a", o.a}, {"b", o.b}};
        out["value"] = pathvote::kl_divergence(o.a, o.b);
    } else if (o.formula == "majority-mean") {
        out["inputs"] = {{"N", o.N}, {"c", o.c}, {"L", o.L}};
        out["value"] = pathvote::expected_majority_mean(o.N, o.c, o.L);
    } else {
        std::cerr << "unknown formula: " << o.formula
                  << " (try: agree, parity-oracle, chain, chain-power, "
                     "plurality-gap, read-k-tail, kl, majority-mean)\n";
        return 2;
    }
    std::cout << out.dump(2) << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cluster recovery from noisy pairwise queries"};
    app.require_subcommand(1);

    SimOptions sim;
    CLI::App* simulate = app.add_subcommand("simulate", "run seeded trials");
    add_sim_options(simulate, sim);

    SimOptions sweep_base;
    std::string axis, values_csv;
    CLI::App* sweep = app.add_subcommand("sweep", "sweep one parameter axis");
    add_sim_options(sweep, sweep_base);
    sweep->add_option("--axis", axis,
                      "one of: q, n, k, budget_constant, branch_first")
        ->required();
    sweep->add_option("--values", values_csv, "comma-separated axis values")
        ->required();

    AnalyzeOptions an;
    CLI::App* analyze = app.add_subcommand("analyze", "evaluate a formula");
    analyze->add_option("--formula", an.formula, "formula name")->required();
    analyze->add_option("--q", an.q, "probability parameter");
    analyze->add_option("--L", an.L, "path length");
    analyze->add_option("--k", an.k, "cycle size / cluster count");
    analyze->add_option("--t", an.t, "steps");
    analyze->add_option("--dist", an.dist_csv, "step distribution (csv)");
    analyze->add_option("--r", an.r, "family size");
    analyze->add_option("--k-read", an.k_read, "read multiplicity");
    analyze->add_option("--epsilon", an.epsilon, "deviation");
    analyze->add_option("--form", an.form,
                        "kl | multiplicative-upper | multiplicative-lower");
    analyze->add_option("--a", an.a, "first probability");
    analyze->add_option("--b", an.b, "second probability");
    analyze->add_option("--N", an.N, "path count");
    analyze->add_option("--c", an.c, "bias gap");

    CLI::App* verify = app.add_subcommand("verify", "cross-check the calculators");

    int budget_n = 10000;
    double budget_c = 0.45, budget_const = 20.0;
    CLI::App* budget = app.add_subcommand("budget", "print the query budget");
    budget->add_option("--n", budget_n, "number of items")->required();
    budget->add_option("--c", budget_c, "bias gap")->required();
    budget->add_option("--constant", budget_const, "budget constant");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(simulate, sim);
        if (sweep->parsed())
            return run_sweep_cmd(sweep, sweep_base, axis, values_csv);
        if (analyze->parsed()) return run_analyze(an);
        if (verify->parsed()) return run_verify();
        if (budget->parsed()) {
            pathvote::BudgetReport rep =
                pathvote::query_budget_report(budget_n, budget_c, budget_const);
            json out{{"n", budget_n},
                     {"c", budget_c},
                     {"constant", budget_const},
                     {"length_scale", rep.length_scale},
                     {"raw", rep.raw},
                     {"budget", rep.budget},
                     {"clamped", rep.clamped},
                     {"pair_count", pathvote::pair_count(budget_n)}};
            std::cout << out.dump(2) << std::endl;
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
