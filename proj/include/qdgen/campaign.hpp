#pragma once

/// @file campaign.hpp
/// @brief Cartesian experiment campaigns (evolvers x feature sets x
/// directions x seeds) executed on a worker pool.
///
/// Replicate r of every cell uses seed derive_seed(master_seed, r), so the
/// outputs are independent of the worker count and of execution order.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include <qdgen/evolve.hpp>
#include <qdgen/random.hpp>
#include <qdgen/run_io.hpp>

namespace qdgen {

struct CampaignRun {
    EvolverConfig config;
    std::size_t replicate = 0;
    std::filesystem::path dir; // relative to the campaign output directory
};

struct CampaignSpec {
    std::vector<CampaignRun> runs;
    std::filesystem::path out;
    std::size_t workers = 1;
};

/// "(50+1) EA-IGD [all]" -> "50_1_ea_igd_all"
inline std::string slug(std::string_view label) {
    std::string s;
    for (char c : label) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else if (!s.empty() && s.back() != '_')
            s += '_';
    }
    while (!s.empty() && s.back() == '_')
        s.pop_back();
    return s;
}

/// Expands a campaign config:
///   {"schema":1, "base":{...run config...}, "evolvers":[{...overrides...}],
///    "feature_sets":["FC1"], "directions":[["FI","NI"]], "seeds":10, "master_seed":1}
inline std::vector<CampaignRun> expand_campaign(const nlohmann::json& j) {
    std::vector<std::string> problems;
    if (!j.is_object())
        throw SchemaError({"<root>: expected a JSON object"});
    for (const auto& [k, v] : j.items())
        if (k != "schema" && k != "base" && k != "evolvers" && k != "feature_sets" && k != "directions" &&
            k != "seeds" && k != "master_seed")
            problems.push_back(k + ": unknown key");
    if (j.contains("schema") && (!j["schema"].is_number_integer() || j["schema"].get<int>() != config_schema_version))
        problems.push_back("schema: unsupported version");
    const nlohmann::json base = j.value("base", nlohmann::json::object());
    if (!base.is_object())
        problems.push_back("base: expected an object");
    if (!j.contains("evolvers") || !j["evolvers"].is_array() || j["evolvers"].empty())
        problems.push_back("evolvers: expected a non-empty array");
    nlohmann::json fsets = j.value("feature_sets", nlohmann::json::array({base.value("feature_set", nlohmann::json("FC1"))}));
    if (!fsets.is_array() || fsets.empty())
        problems.push_back("feature_sets: expected a non-empty array");
    nlohmann::json dirs = j.value("directions", nlohmann::json::array({nlohmann::json::array({"FI", "NI"})}));
    if (!dirs.is_array() || dirs.empty())
        problems.push_back("directions: expected a non-empty array");
    else
        for (const auto& d : dirs)
            if (!d.is_array() || d.size() != 2 || !d[0].is_string() || !d[1].is_string())
                problems.push_back("directions: each entry must be [numerator, denominator]");
    std::size_t seeds = 1;
    if (j.contains("seeds")) {
        if (!j["seeds"].is_number_integer() || j["seeds"].get<long long>() < 1)
            problems.push_back("seeds: expected a positive integer");
        else
            seeds = j["seeds"].get<std::size_t>();
    }
    std::uint64_t master = 1;
    if (j.contains("master_seed")) {
        if (!j["master_seed"].is_number_integer() || j["master_seed"].get<long long>() < 0)
            problems.push_back("master_seed: expected a non-negative integer");
        else
            master = j["master_seed"].get<std::uint64_t>();
    }
    if (!problems.empty())
        throw SchemaError(std::move(problems));

    std::vector<CampaignRun> runs;
    for (const auto& fs : fsets)
        for (const auto& d : dirs)
            for (const auto& ev : j["evolvers"]) {
                nlohmann::json cfg = base;
                if (!ev.is_object())
                    throw SchemaError({"evolvers: each entry must be an object"});
                for (const auto& [k, v] : ev.items())
                    cfg[k] = v;
                cfg["feature_set"] = fs;
                nlohmann::json obj = cfg.value("objective", nlohmann::json::object());
                obj["numerator"] = d[0];
                obj["denominator"] = d[1];
                cfg["objective"] = obj;
                for (std::size_t r = 0; r < seeds; ++r) {
                    cfg["seed"] = derive_seed(master, r);
                    CampaignRun run{config_from_json(cfg), r, {}};
                    run.dir = std::filesystem::path(run.config.features.id) /
                              (run.config.objective.numerator + "_vs_" + run.config.objective.denominator) /
                              slug(run.config.label()) / ("seed_" + std::to_string(r));
                    runs.push_back(std::move(run));
                }
            }
    return runs;
}

struct CampaignFailure {
    std::filesystem::path dir;
    std::string error;
};

/// Executes every run on `workers` threads, writing each into out/run.dir.
/// `on_done` is called (serialised) after each run.
inline std::vector<CampaignFailure> run_campaign(
    const std::vector<CampaignRun>& runs, const std::filesystem::path& out, std::size_t workers,
    const std::function<void(const CampaignRun&, const RunResult&)>& on_done = {}) {
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::vector<CampaignFailure> failures;
    auto worker = [&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) {
            const auto& run = runs[i];
            try {
                const auto result = qdgen::run(run.config);
                write_run(out / run.dir, run.config, result);
                if (on_done) {
                    std::lock_guard lock(mu);
                    on_done(run, result);
                }
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                failures.push_back({run.dir, e.what()});
            }
        }
    };
    workers = std::max<std::size_t>(1, std::min(workers, runs.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) { return a.dir < b.dir; });
    return failures;
}

} // namespace qdgen
