#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "pathvote/harness.hpp"

using namespace pathvote;

namespace {

std::string csv_without_walltime(ExperimentRecord rec) {
    rec.wall_time_s = 0.0;
    return record_to_csv(rec);
}

double exact_rate(const std::vector<ExperimentRecord>& recs) {
    if (recs.empty()) return 0.0;
    int hits = 0;
    for (const auto& r : recs)
        if (r.exact) ++hits;
    return static_cast<double>(hits) / recs.size();
}

std::filesystem::path fresh_temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("pathvote_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST(Harness, RepeatRunsAreIdenticalUpToWallTime) {
    ExperimentConfig cfg;
    cfg.n = 80;
    cfg.k = 2;
    cfg.noise = NoiseSpec::sign_flip(0.1);
    cfg.trials = 4;
    cfg.seed = 77;
    auto first = run_experiment(cfg);
    auto second = run_experiment(cfg);
    ASSERT_EQ(first.size(), 4u);
    for (int i = 0; i < 4; ++i)
        EXPECT_EQ(csv_without_walltime(first[i]), csv_without_walltime(second[i]));
    // distinct trials use distinct derived seeds
    EXPECT_NE(first[0].trial_seed, first[1].trial_seed);
}

TEST(Harness, WorkerCountDoesNotChangeResults) {
    ExperimentConfig cfg;
    cfg.n = 70;
    cfg.k = 3;
    cfg.noise = NoiseSpec::modular_pm(0.1);
    cfg.trials = 6;
    cfg.seed = 99;
    cfg.workers = 1;
    auto serial = run_experiment(cfg);
    cfg.workers = 4;
    auto parallel = run_experiment(cfg);
    ASSERT_EQ(serial.size(), parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i)
        EXPECT_EQ(csv_without_walltime(serial[i]),
                  csv_without_walltime(parallel[i]));
}

TEST(Harness, NoiselessCompleteGraphRecoversExactly) {
    ExperimentConfig cfg;
    cfg.n = 50;
    cfg.k = 2;
    cfg.noise = NoiseSpec::sign_flip(0.0);
    cfg.sampling = SamplingPlan::fixed_count(pair_count(50));
    cfg.trials = 3;
    cfg.seed = 5;
    auto recs = run_experiment(cfg);
    for (const auto& r : recs) {
        EXPECT_TRUE(r.exact) << r.note;
        EXPECT_EQ(r.misclassified, 0);
        EXPECT_EQ(r.edge_count, pair_count(50));
        EXPECT_EQ(r.sampling, "fixed(1225)");
        EXPECT_TRUE(r.note.empty());
    }
}

TEST(Harness, ModerateNoiseMidSizeRecoveryRate) {
    ExperimentConfig cfg;
    cfg.n = 400;
    cfg.k = 2;
    cfg.noise = NoiseSpec::sign_flip(0.1);
    cfg.trials = 20;
    cfg.seed = 2024;
    cfg.sizes_mode = SizesMode::balanced;
    cfg.workers = 4;
    auto recs = run_experiment(cfg);
    EXPECT_GE(exact_rate(recs), 0.9);
}

TEST(Harness, UnsatisfiableParametersBecomeFailedTrialRecords) {
    ExperimentConfig cfg;
    cfg.n = 40;
    cfg.k = 5;  // disagrees with the 3-entry distribution below
    cfg.noise = NoiseSpec::modular_general({0.8, 0.1, 0.1});
    cfg.trials = 2;
    auto recs = run_experiment(cfg);
    ASSERT_EQ(recs.size(), 2u);
    for (const auto& r : recs) {
        EXPECT_FALSE(r.exact);
        EXPECT_EQ(r.misclassified, cfg.n);
        EXPECT_NE(r.note.find("trial failed"), std::string::npos);
    }
}

TEST(Harness, BranchOverrideReachesThePathParams) {
    ExperimentConfig cfg;
    cfg.n = 60;
    cfg.noise = NoiseSpec::sign_flip(0.05);
    cfg.trials = 1;
    cfg.branch_first_override = 2;
    auto recs = run_experiment(cfg);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].branch_first, 2);
}

TEST(Sweep, TagsRecordsWithAxisAndValue) {
    ExperimentConfig base;
    base.n = 60;
    base.k = 2;
    base.noise = NoiseSpec::sign_flip(0.1);
    base.trials = 2;
    base.seed = 7;
    auto recs = run_sweep(base, "q", {0.1, 0.3});
    ASSERT_EQ(recs.size(), 4u);
    EXPECT_EQ(recs[0].axis, "q");
    EXPECT_DOUBLE_EQ(recs[0].axis_value, 0.1);
    EXPECT_DOUBLE_EQ(recs[3].axis_value, 0.3);
    EXPECT_DOUBLE_EQ(recs[3].q, 0.3);
}

TEST(Sweep, AccuracyDropsWithNoise) {
    ExperimentConfig base;
    base.n = 120;
    base.k = 2;
    base.noise = NoiseSpec::sign_flip(0.1);
    base.trials = 6;
    base.seed = 31;
    base.sizes_mode = SizesMode::balanced;
    base.workers = 4;
    auto recs = run_sweep(base, "q", {0.05, 0.35});
    std::vector<ExperimentRecord> low(recs.begin(), recs.begin() + 6);
    std::vector<ExperimentRecord> high(recs.begin() + 6, recs.end());
    EXPECT_GE(exact_rate(low), exact_rate(high));
    EXPECT_GE(exact_rate(low), 0.5);
}

TEST(Sweep, PathSupplyGrowsWithN) {
    ExperimentConfig base;
    base.k = 2;
    base.noise = NoiseSpec::sign_flip(0.1);
    base.trials = 2;
    base.seed = 13;
    base.workers = 2;
    auto recs = run_sweep(base, "n", {100, 200, 400});
    ASSERT_EQ(recs.size(), 6u);
    double mean_small = (recs[0].mean_paths + recs[1].mean_paths) / 2;
    double mean_mid = (recs[2].mean_paths + recs[3].mean_paths) / 2;
    double mean_large = (recs[4].mean_paths + recs[5].mean_paths) / 2;
    EXPECT_LT(mean_small, mean_mid);
    EXPECT_LT(mean_mid, mean_large);
}

TEST(Sweep, EmptyValueListProducesNoRecords) {
    ExperimentConfig base;
    base.trials = 3;
    EXPECT_TRUE(run_sweep(base, "q", {}).empty());
}

TEST(Sweep, UnknownAxisThrows) {
    ExperimentConfig base;
    EXPECT_THROW(run_sweep(base, "zeta", {1.0}), std::invalid_argument);
}

TEST(Sweep, QAxisRejectsGeneralNoiseModel) {
    ExperimentConfig base;
    base.k = 3;
    base.noise = NoiseSpec::modular_general({0.8, 0.1, 0.1});
    EXPECT_THROW(run_sweep(base, "q", {0.1}), std::invalid_argument);
}

TEST(RecordWriterTest, WritesHeaderRowsAndSidecar) {
    auto dir = fresh_temp_dir("writer");
    std::string csv = (dir / "out.csv").string();

    ExperimentConfig cfg;
    cfg.n = 30;
    cfg.k = 2;
    cfg.noise = NoiseSpec::sign_flip(0.0);
    cfg.sampling = SamplingPlan::fixed_count(pair_count(30));
    cfg.trials = 3;
    cfg.output = csv;
    {
        RecordWriter writer(csv, cfg);
        run_experiment(cfg, &writer);
    }

    std::ifstream in(csv);
    ASSERT_TRUE(in.good());
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 4u);  // header + 3 trials
    EXPECT_EQ(lines[0], record_csv_header());
    for (int i = 1; i <= 3; ++i)
        EXPECT_NE(lines[i].find(",30,2,sign_flip,"), std::string::npos);

    std::ifstream side(csv + ".config.json");
    ASSERT_TRUE(side.good());
    nlohmann::json j = nlohmann::json::parse(side);
    EXPECT_EQ(j.at("n"), 30);
    EXPECT_EQ(j.at("trials"), 3);
    EXPECT_EQ(j.at("sampling").at("mode"), "fixed");

    std::filesystem::remove_all(dir);
}

TEST(RecordWriterTest, CsvCellsNeverLeakDelimiters) {
    ExperimentRecord rec;
    rec.note = "bad, news\nhere";
    std::string row = record_to_csv(rec);
    EXPECT_NE(row.find("bad; news here"), std::string::npos);
    EXPECT_EQ(row.find('\n'), std::string::npos);
}

TEST(ConfigJson, RoundTripPreservesEverything) {
    ExperimentConfig cfg;
    cfg.n = 123;
    cfg.k = 4;
    cfg.noise = NoiseSpec::modular_general({0.7, 0.1, 0.1, 0.1});
    cfg.sampling = SamplingPlan::bernoulli(0.25);
    PathParams p;
    p.depth1 = 2;
    p.depth2 = 1;
    p.branch_first = 5;
    p.branch_rest = 4;
    p.min_paths = 3;
    cfg.path_params = p;
    cfg.branch_first_override = 6;
    cfg.mode = RecoveryMode::all_pairs;
    cfg.trials = 9;
    cfg.seed = 424242;
    cfg.sizes_mode = SizesMode::explicit_sizes;
    cfg.sizes = {40, 40, 30, 13};
    cfg.budget_constant = 12.5;
    cfg.workers = 3;
    cfg.output = "somewhere.csv";

    nlohmann::json j = cfg;
    ExperimentConfig back = j.get<ExperimentConfig>();
    nlohmann::json j2 = back;
    EXPECT_EQ(j, j2);
    EXPECT_EQ(back.noise.model, NoiseModel::modular_general);
    EXPECT_EQ(back.sizes, cfg.sizes);
    ASSERT_TRUE(back.path_params.has_value());
    EXPECT_EQ(back.path_params->branch_first, 5);
}

TEST(ConfigJson, AutoKeywordsStayAuto) {
    nlohmann::json j = {{"n", 50},
                        {"sampling", "auto"},
                        {"path_params", "auto"},
                        {"sizes", "balanced"}};
    ExperimentConfig cfg = j.get<ExperimentConfig>();
    EXPECT_FALSE(cfg.sampling.has_value());
    EXPECT_FALSE(cfg.path_params.has_value());
    EXPECT_EQ(cfg.sizes_mode, SizesMode::balanced);
}

TEST(DumpPaths, WritesOneFilePerAnchoredPair) {
    auto dir = fresh_temp_dir("dump");
    ExperimentConfig cfg;
    cfg.n = 20;
    cfg.k = 2;
    cfg.noise = NoiseSpec::sign_flip(0.0);
    cfg.sampling = SamplingPlan::fixed_count(pair_count(20));
    cfg.trials = 1;
    cfg.dump_paths_dir = (dir / "paths").string();
    run_experiment(cfg);

    int files = 0;
    bool saw_first = false;
    for (const auto& entry :
         std::filesystem::directory_iterator(dir / "paths")) {
        ++files;
        if (entry.path().filename() == "trial0_0_1.paths") {
            saw_first = true;
            std::ifstream in(entry.path());
            std::string line;
            ASSERT_TRUE(std::getline(in, line));
            EXPECT_EQ(line.rfind("0 ", 0), 0u);  // paths start at the anchor
        }
    }
    EXPECT_GT(files, 0);
    EXPECT_TRUE(saw_first);
    std::filesystem::remove_all(dir);
}

TEST(VerifyOracles, FreshRunPassesEverything) {
    VerifyReport report = verify_oracles();
    EXPECT_TRUE(report.all_pass);
    EXPECT_EQ(report.items.size(), 7u);
    for (const auto& item : report.items)
        EXPECT_TRUE(item.pass) << item.name << " err=" << item.max_err << " at "
                               << item.worst;
}

TEST(VerifyOracles, PerturbedClosedFormIsCaughtAndLocated) {
    VerifyHooks hooks;
    hooks.agree = [](double q, int L) {
        double base = path_agree_prob(q, L);
        if (L == 13 && q > 0.2 && q < 0.3) return base + 1e-9;
        return base;
    };
    VerifyReport report = verify_oracles(hooks);
    EXPECT_FALSE(report.all_pass);
    const VerifyItem& parity = report.items.at(0);
    EXPECT_FALSE(parity.pass);
    EXPECT_NEAR(parity.max_err, 1e-9, 1e-10);
    EXPECT_NE(parity.worst.find("L=13"), std::string::npos);
}

TEST(VerifyOracles, PerturbedChainIsCaught) {
    VerifyHooks hooks;
    hooks.chain = [](double q, int k, int t) {
        ChainDistribution d = chain_closed_form(q, k, t);
        if (k == 5 && t == 17) d.probs[0] += 1e-8;
        return d;
    };
    VerifyReport report = verify_oracles(hooks);
    EXPECT_FALSE(report.all_pass);
    bool found = false;
    for (const auto& item : report.items)
        if (item.name.rfind("chain identity", 0) == 0) {
            found = true;
            EXPECT_FALSE(item.pass);
            EXPECT_NE(item.worst.find("k=5"), std::string::npos);
            EXPECT_NE(item.worst.find("t=17"), std::string::npos);
        }
    EXPECT_TRUE(found);
}
