#include <gtest/gtest.h>

#include <cstdlib>

#include <qdgen/campaign.hpp>
#include <qdgen/qdgen.hpp>

#include "support.hpp"

using namespace qdgen;
namespace fs = std::filesystem;

namespace {

std::string read(const fs::path& p) { return detail::read_file(p); }

EvolverConfig tiny(EvolverKind kind, std::uint64_t seed) {
    EvolverConfig c;
    c.kind = kind;
    c.n = 25;
    c.budget = 150;
    c.seed = seed;
    c.snapshot_every = 50;
    c.edo_warmup = 20;
    return c;
}

nlohmann::json mini_campaign() {
    return nlohmann::json::parse(R"({
        "schema": 1,
        "base": {"n": 25, "budget": 120, "snapshot_every": 40, "edo": {"warmup": 20}},
        "evolvers": [
            {"evolver": "qd"},
            {"evolver": "ea_archive", "mu": 5},
            {"evolver": "ea_archive", "mu": 1},
            {"evolver": "edo_igd", "mu": 5}
        ],
        "feature_sets": ["FC1", "FC2"],
        "directions": [["FI", "NI"], ["NI", "FI"]],
        "seeds": 5,
        "master_seed": 17
    })");
}

} // namespace

TEST(Config, DefaultsAndRoundTrip) {
    const auto c = config_from_json(nlohmann::json::object());
    EXPECT_EQ(c.kind, EvolverKind::qd);
    EXPECT_EQ(c.n, 100u);
    EXPECT_EQ(c.suite.id, "all");
    EXPECT_EQ(c.features.id, "FC1");
    const auto custom = config_from_json(nlohmann::json::parse(R"({
        "evolver": "edo_hv", "mu": 7, "n": 40, "budget": 10,
        "suite": {"id": "mine", "operators": [
            {"id": "gaussian", "params": {"sigma_min": 0.02, "sigma_max": 0.03}},
            {"id": "cluster", "enabled": false},
            {"id": "explosion"}]},
        "feature_set": {"id": "F", "features": [{"name": "nng_n_strong", "k": 4}, {"name": "mst_depth_median"}]},
        "objective": {"numerator": "NI", "denominator": "FI", "repetitions": 3},
        "edo": {"alpha": 0.2, "warmup": 5}
    })"));
    EXPECT_EQ(custom.suite.operators.size(), 2u);
    EXPECT_EQ(custom.suite.operators[0].param("sigma_max"), 0.03);
    EXPECT_EQ(custom.features.features[0].k, 4u);
    EXPECT_EQ(custom.objective.label(), "NI vs FI");
    const auto back = config_from_json(config_to_json(custom));
    EXPECT_EQ(config_to_json(back), config_to_json(custom));
    EXPECT_EQ(config_hash(back), config_hash(custom));
    EXPECT_NE(config_hash(back), config_hash(c));
}

TEST(Config, SchemaErrorListsEveryOffendingKey) {
    const auto j = nlohmann::json::parse(R"({
        "evolver": "qd", "budgett": 5, "n": -3, "colour": "red",
        "objective": {"numerator": "FI", "denom": "NI"},
        "suite": {"id": "x", "operators": [{"id": "relocate", "params": {"rate": "high"}}]}
    })");
    try {
        config_from_json(j);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        const std::string all = e.what();
        for (const auto* key : {"budgett", "colour", "n:", "objective.denom", "suite.operators[0].params.rate"})
            EXPECT_NE(all.find(key), std::string::npos) << key << " missing from: " << all;
        EXPECT_GE(e.problems().size(), 5u);
    }
}

TEST(Config, SemanticErrors) {
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"evolver": "ga"})")), SchemaError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"suite": "fancy"})")), SchemaError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"objective": {"numerator": "NI"}})")), SchemaError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"n": 5, "feature_set": "FC2"})")), SchemaError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"schema": 2})")), SchemaError);
}

TEST(RunIo, WriteReadRoundTrip) {
    const auto dir = testing_support::scratch_dir("run_round_trip");
    const auto cfg = tiny(EvolverKind::ea_archive, 3);
    const auto r = run(cfg);
    write_run(dir, cfg, r);
    const auto loaded = read_run(dir);
    EXPECT_EQ(loaded.index, r.archive.records());
    EXPECT_EQ(loaded.log.events, r.log.events);
    EXPECT_EQ(loaded.log.snapshots, r.log.snapshots);
    EXPECT_EQ(config_hash(loaded.config), config_hash(cfg));
    EXPECT_EQ(loaded.manifest["boxes"], r.archive.size());
    EXPECT_EQ(loaded.manifest["evaluations"], 150u);
    EXPECT_TRUE(fs::exists(dir / "population.csv"));
    // every index row points at an instance file mapping back to its key
    for (const auto& rec : loaded.index) {
        std::string name = "box_" + rec.key.to_string() + ".json";
        std::replace(name.begin(), name.end(), ';', '_');
        const auto inst = load_instance(dir / "instances" / name);
        EXPECT_EQ(feature_vector(inst, cfg.features).key(), rec.key);
    }
}

TEST(RunIo, CsvErrorsNameLine) {
    const std::string bad = "key,objective,hits,updates,first_hit_iter,last_update_iter,instance_file\n"
                            "8;2,0.5,1,0,0,0,a.json\n"
                            "9;2,zero,1,0,0,0,b.json\n";
    try {
        parse_index_csv(bad);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(parse_runlog_csv("iter,kind\n"), ParseError);
    EXPECT_THROW(parse_runlog_csv("iteration,kind,key,objective\n0,bogus,8;2,1.0\n"), ParseError);
}

TEST(Campaign, ExpansionSeedsAndDirectories) {
    const auto runs = expand_campaign(mini_campaign());
    ASSERT_EQ(runs.size(), 2u * 2u * 4u * 5u);
    std::set<fs::path> dirs;
    std::map<std::string, std::set<std::uint64_t>> seeds_per_cell;
    for (const auto& r : runs) {
        dirs.insert(r.dir);
        seeds_per_cell[r.dir.parent_path().string()].insert(r.config.seed);
        EXPECT_EQ(r.config.budget, 120u);
    }
    EXPECT_EQ(dirs.size(), runs.size());
    for (const auto& [cell, seeds] : seeds_per_cell)
        EXPECT_EQ(seeds.size(), 5u) << cell;
    EXPECT_EQ(runs.front().dir, fs::path("FC1/FI_vs_NI/qd_all/seed_0"));
    EXPECT_EQ(slug("(50+1) EA-IGD [all]"), "50_1_ea_igd_all");
}

TEST(Campaign, ExpansionErrors) {
    auto j = mini_campaign();
    j["seeds"] = 0;
    j["surprise"] = true;
    j["directions"] = nlohmann::json::array({nlohmann::json::array({"FI"})});
    try {
        expand_campaign(j);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.problems().size(), 3u);
    }
}

TEST(Campaign, GoldenMiniCampaign) {
    const auto dir = testing_support::scratch_dir("golden_campaign");
    const auto runs = expand_campaign(mini_campaign());
    const auto failures = run_campaign(runs, dir / "runs", 2);
    ASSERT_TRUE(failures.empty());
    const auto report = analyze_campaign(dir / "runs", dir / "analysis");
    EXPECT_EQ(report.runs_loaded, runs.size());
    EXPECT_TRUE(report.warnings.empty());

    // replay -> archive -> summaries agree with the index files
    for (const auto& r : runs) {
        const auto loaded = read_run(dir / "runs" / r.dir);
        EXPECT_EQ(replay(loaded.log), loaded.index);
    }

    const fs::path golden = fs::path(QDGEN_TEST_DATA) / "golden_mini_campaign";
    const char* update = std::getenv("QDGEN_UPDATE_GOLDEN");
    for (const auto* file : {"campaign_table.csv", "coverage_summary.csv", "rank_tests.csv"}) {
        if (update && std::string(update) == "1") {
            fs::create_directories(golden);
            fs::copy_file(dir / "analysis" / file, golden / file, fs::copy_options::overwrite_existing);
        }
        EXPECT_EQ(read(dir / "analysis" / file), read(golden / file)) << file;
    }
    for (const auto* file : {"campaign_table.txt", "coverage_curves.csv", "heatmap.csv", "frequency.csv",
                             "objectives.csv"})
        EXPECT_TRUE(fs::file_size(dir / "analysis" / file) > 0) << file;
}

TEST(Campaign, CorruptRunIsSkipped) {
    const auto dir = testing_support::scratch_dir("corrupt_campaign");
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto cfg = tiny(EvolverKind::qd, s);
        write_run(dir / ("seed_" + std::to_string(s)), cfg, run(cfg));
    }
    detail::write_file(dir / "seed_1" / "runlog.csv", "iteration,kind,key,objective\n0,first_hit,8;2,0.5\n");
    const auto report = analyze_campaign(dir, dir / "out");
    EXPECT_EQ(report.runs_loaded, 2u);
    ASSERT_EQ(report.warnings.size(), 1u);
    EXPECT_NE(report.warnings[0].find("seed_1"), std::string::npos);
}

TEST(Campaign, WorkerCountDoesNotChangeOutputs) {
    const auto dir = testing_support::scratch_dir("workers");
    auto j = mini_campaign();
    j["seeds"] = 2;
    j["feature_sets"] = nlohmann::json::array({"FC1"});
    const auto runs = expand_campaign(j);
    ASSERT_TRUE(run_campaign(runs, dir / "w1", 1).empty());
    ASSERT_TRUE(run_campaign(runs, dir / "w3", 3).empty());
    for (const auto& r : runs)
        for (const auto* file : {"index.csv", "runlog.csv", "coverage.csv"})
            EXPECT_EQ(read(dir / "w1" / r.dir / file), read(dir / "w3" / r.dir / file)) << r.dir << "/" << file;
}
