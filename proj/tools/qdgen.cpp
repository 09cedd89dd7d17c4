#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <qdgen/campaign.hpp>
#include <qdgen/qdgen.hpp>

namespace fs = std::filesystem;

namespace {

enum ExitCode { ok = 0, usage = 1, invalid = 2, partial = 3 };

enum class Level { error, warn, info, debug };

Level log_level() {
    const char* env = std::getenv("QDGEN_LOG");
    const std::string v = env ? env : "info";
    if (v == "error")
        return Level::error;
    if (v == "warn")
        return Level::warn;
    if (v == "debug")
        return Level::debug;
    return Level::info;
}

void log(Level lvl, const std::string& msg) {
    static const Level threshold = log_level();
    if (lvl > threshold)
        return;
    static constexpr const char* names[] = {"error", "warn", "info", "debug"};
    std::cerr << "qdgen " << names[static_cast<int>(lvl)] << ": " << msg << "\n";
}

nlohmann::json read_json(const fs::path& path) {
    const auto text = qdgen::detail::read_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw qdgen::ParseError(path.string() + ": " + e.what(), qdgen::detail::line_of_byte(text, e.byte));
    }
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> budget;
    std::optional<std::size_t> snapshot_every;

    void apply(nlohmann::json& cfg) const {
        if (seed)
            cfg["seed"] = *seed;
        if (budget)
            cfg["budget"] = *budget;
        if (snapshot_every)
            cfg["snapshot_every"] = *snapshot_every;
    }
};

int cmd_generate(std::size_t n, std::size_t count, std::uint64_t seed, const fs::path& out, const std::string& format) {
    if (count == 0) {
        log(Level::error, "--count must be at least 1");
        return usage;
    }
    fs::create_directories(out);
    std::string index = "file,n,seed\n";
    for (std::size_t i = 0; i < count; ++i) {
        const auto instance_seed = qdgen::derive_seed(seed, i);
        const auto inst = qdgen::rue_instance(n, instance_seed);
        char name[32];
        std::snprintf(name, sizeof name, "rue_%04zu.%s", i, format.c_str());
        if (format == "tsp")
            qdgen::save_tsplib(inst, out / name);
        else
            qdgen::save_instance(inst, out / name);
        index += std::string(name) + "," + std::to_string(n) + "," + std::to_string(instance_seed) + "\n";
    }
    qdgen::detail::write_file(out / "index.csv", index);
    log(Level::info, "wrote " + std::to_string(count) + " instances to " + out.string());
    return ok;
}

int cmd_evolve(const fs::path& config, const fs::path& out, const Overrides& ov) {
    auto j = read_json(config);
    ov.apply(j);
    const auto cfg = qdgen::config_from_json(j);
    log(Level::info, "running " + cfg.label() + " seed " + std::to_string(cfg.seed));
    const auto result = qdgen::run(cfg);
    qdgen::write_run(out, cfg, result);
    log(Level::info, "covered " + std::to_string(result.archive.size()) + " boxes, wrote " + out.string());
    return ok;
}

int cmd_campaign(const fs::path& config, const fs::path& out, std::size_t workers, const Overrides& ov) {
    auto j = read_json(config);
    if (j.is_object()) {
        auto base = j.value("base", nlohmann::json::object());
        if (base.is_object()) {
            ov.apply(base);
            base.erase("seed");
            j["base"] = base;
        }
        if (ov.seed)
            j["master_seed"] = *ov.seed;
    }
    const auto runs = qdgen::expand_campaign(j);
    fs::create_directories(out);
    qdgen::detail::write_file(out / "campaign.json", j.dump(2) + "\n");
    log(Level::info, std::to_string(runs.size()) + " runs on " + std::to_string(workers) + " worker(s)");
    std::size_t done = 0;
    const auto failures = qdgen::run_campaign(runs, out, workers, [&](const auto& run, const auto& result) {
        ++done;
        log(Level::debug, "[" + std::to_string(done) + "/" + std::to_string(runs.size()) + "] " + run.dir.string() +
                              ": " + std::to_string(result.archive.size()) + " boxes");
    });
    for (const auto& f : failures)
        log(Level::error, f.dir.string() + ": " + f.error);
    if (failures.size() == runs.size())
        return invalid;
    return failures.empty() ? ok : partial;
}

int cmd_analyze(const fs::path& campaign_dir, const fs::path& out) {
    const auto report = qdgen::analyze_campaign(campaign_dir, out);
    for (const auto& w : report.warnings)
        log(Level::warn, w);
    log(Level::info, "analysed " + std::to_string(report.runs_loaded) + " runs, wrote " + out.string());
    return report.partial() ? partial : ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quality-diversity generator of TSP instances"};
    app.set_version_flag("--version", std::string(qdgen::version_string));
    app.require_subcommand(1);

    std::size_t n = 100, count = 1, workers = 1;
    std::uint64_t seed = 1;
    std::string format = "json";
    fs::path out, config, campaign_dir;
    Overrides ov;

    auto* gen = app.add_subcommand("generate", "Write uniform random instances");
    gen->add_option("-n,--n", n, "Cities per instance")->check(CLI::PositiveNumber);
    gen->add_option("--count", count, "Number of instances");
    gen->add_option("--seed", seed, "Master seed");
    gen->add_option("--out", out, "Output directory")->required();
    gen->add_option("--format", format, "json or tsp")->check(CLI::IsMember({"json", "tsp"}));

    auto add_overrides = [&](CLI::App* sub) {
        sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { ov.seed = v; }, "Override the seed");
        sub->add_option_function<std::size_t>("--budget", [&](std::size_t v) { ov.budget = v; },
                                               "Override the evaluation budget");
        sub->add_option_function<std::size_t>("--snapshot-every", [&](std::size_t v) { ov.snapshot_every = v; },
                                              "Override the coverage snapshot interval");
    };

    auto* evo = app.add_subcommand("evolve", "Run one evolver");
    evo->add_option("--config", config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    evo->add_option("--out", out, "Run directory")->required();
    add_overrides(evo);

    auto* camp = app.add_subcommand("campaign", "Run a grid of evolvers, feature sets, directions and seeds");
    camp->add_option("--config", config, "Campaign config (JSON)")->required()->check(CLI::ExistingFile);
    camp->add_option("--out", out, "Campaign directory")->required();
    camp->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    add_overrides(camp);

    auto* ana = app.add_subcommand("analyze", "Aggregate a campaign directory into tables and CSVs");
    ana->add_option("campaign_dir", campaign_dir, "Campaign directory")->required()->check(CLI::ExistingDirectory);
    ana->add_option("--out", out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        if (*gen)
            return cmd_generate(n, count, seed, out, format);
        if (*evo)
            return cmd_evolve(config, out, ov);
        if (*camp)
            return cmd_campaign(config, out, workers, ov);
        return cmd_analyze(campaign_dir, out);
    } catch (const std::exception& e) {
        log(Level::error, e.what());
        return invalid;
    }
}
