#pragma once

/// @file report.hpp
/// @brief Campaign directory analysis: loads every run, aggregates, and
/// writes tidy CSVs for tables and figures.
///
/// Outputs (all in the target directory):
///   campaign_table.csv / .txt  one row per (feature set, direction, evolver)
///   coverage_curves.csv        feature_set,direction,evolver,seed,iteration,covered
///   coverage_summary.csv       feature_set,direction,evolver,iteration,runs,mean,std
///   heatmap.csv                feature_set,direction,evolver,seed,key,x,y,objective,hits,updates,first_hit_iter,initial
///   frequency.csv              feature_set,direction,evolver,key,x,y,runs_covered,fraction
///   objectives.csv             feature_set,direction,evolver,seed,objective
///   rank_tests.csv             feature_set,direction,reference,competitor,u,p_raw,p_adjusted,winner

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <qdgen/analytics.hpp>
#include <qdgen/run_io.hpp>

namespace qdgen {

struct AnalyzeReport {
    std::size_t runs_loaded = 0;
    std::vector<std::string> warnings;
    bool partial() const { return !warnings.empty(); }
};

/// Run directories (those holding a manifest.json) below `root`, sorted.
inline std::vector<std::filesystem::path> find_runs(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> out;
    if (std::filesystem::exists(root / "manifest.json"))
        out.push_back(root);
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file() && e.path().filename() == "manifest.json" && e.path().parent_path() != root)
            out.push_back(e.path().parent_path());
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

inline std::string cell_prefix(const CellKey& c) {
    return csv_field(c.feature_set) + "," + csv_field(c.direction) + "," + csv_field(c.evolver);
}

inline std::string xy(const BoxKey& key, const FeatureSet& set, std::size_t n) {
    const auto v = normalize(key, set, n);
    return fmt_double(v.at(0)) + "," + (v.size() > 1 ? fmt_double(v[1]) : std::string("0"));
}

} // namespace detail

/// Analyses every run under `campaign_dir` and writes the outputs to `out`.
/// Unreadable or inconsistent runs are skipped and reported as warnings.
inline AnalyzeReport analyze_campaign(const std::filesystem::path& campaign_dir, const std::filesystem::path& out) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(campaign_dir))
        throw ValidationError("not a directory: " + campaign_dir.string());
    AnalyzeReport report;

    struct Loaded {
        CellKey cell;
        LoadedRun run;
    };
    std::vector<Loaded> loaded;
    for (const auto& dir : find_runs(campaign_dir)) {
        try {
            auto run = read_run(dir);
            if (replay(run.log) != run.index)
                throw ValidationError("run log replay does not reproduce index.csv");
            CellKey cell{run.config.features.id, run.config.objective.label(), run.config.label()};
            loaded.push_back({std::move(cell), std::move(run)});
        } catch (const std::exception& e) {
            report.warnings.push_back("skipped " + dir.string() + ": " + e.what());
        }
    }
    if (loaded.empty())
        throw ValidationError("no readable runs under " + campaign_dir.string());
    report.runs_loaded = loaded.size();

    std::vector<RunData> data;
    for (const auto& l : loaded)
        data.push_back({l.cell, l.run.config.seed, l.run.index});
    auto table = campaign_table(data);
    for (auto& w : table.warnings)
        report.warnings.push_back(w);

    fs::create_directories(out);
    detail::write_file(out / "campaign_table.csv", campaign_csv(table));
    detail::write_file(out / "campaign_table.txt", campaign_text(table));

    std::string curves = "feature_set,direction,evolver,seed,iteration,covered\n";
    std::map<CellKey, std::map<std::int64_t, std::vector<double>>> by_iter;
    std::string heat = "feature_set,direction,evolver,seed,key,x,y,objective,hits,updates,first_hit_iter,initial\n";
    std::string objectives = "feature_set,direction,evolver,seed,objective\n";
    std::map<CellKey, std::map<BoxKey, std::size_t>> freq;
    std::map<CellKey, std::size_t> cell_runs;
    std::map<CellKey, std::pair<FeatureSet, std::size_t>> cell_space;
    for (const auto& l : loaded) {
        const auto prefix = detail::cell_prefix(l.cell);
        const auto seed = std::to_string(l.run.config.seed);
        for (const auto& s : l.run.log.snapshots) {
            curves += prefix + "," + seed + "," + std::to_string(s.iteration) + "," + std::to_string(s.covered) + "\n";
            by_iter[l.cell][s.iteration].push_back(static_cast<double>(s.covered));
        }
        ++cell_runs[l.cell];
        cell_space.emplace(l.cell, std::pair(l.run.config.features, l.run.config.n));
        for (const auto& b : l.run.index) {
            heat += prefix + "," + seed + "," + b.key.to_string() + "," +
                    detail::xy(b.key, l.run.config.features, l.run.config.n) + "," + detail::fmt_double(b.objective) +
                    "," + std::to_string(b.hits) + "," + std::to_string(b.updates) + "," +
                    std::to_string(b.first_hit_iter) + "," + (b.first_hit_iter == 0 ? "1" : "0") + "\n";
            objectives += prefix + "," + seed + "," + detail::fmt_double(b.objective) + "\n";
            ++freq[l.cell][b.key];
        }
    }
    detail::write_file(out / "coverage_curves.csv", curves);
    detail::write_file(out / "heatmap.csv", heat);
    detail::write_file(out / "objectives.csv", objectives);

    std::string summary = "feature_set,direction,evolver,iteration,runs,mean,std\n";
    for (const auto& [cell, iters] : by_iter)
        for (const auto& [it, vals] : iters)
            summary += detail::cell_prefix(cell) + "," + std::to_string(it) + "," + std::to_string(vals.size()) + "," +
                       detail::fmt(mean(vals), 4) + "," + detail::fmt(sample_std(vals), 4) + "\n";
    detail::write_file(out / "coverage_summary.csv", summary);

    std::string frequency = "feature_set,direction,evolver,key,x,y,runs_covered,fraction\n";
    for (const auto& [cell, boxes] : freq) {
        const auto& [set, n] = cell_space.at(cell);
        const double runs = static_cast<double>(cell_runs.at(cell));
        for (const auto& [key, count] : boxes)
            frequency += detail::cell_prefix(cell) + "," + key.to_string() + "," + detail::xy(key, set, n) + "," +
                         std::to_string(count) + "," + detail::fmt(static_cast<double>(count) / runs, 4) + "\n";
    }
    detail::write_file(out / "frequency.csv", frequency);

    std::string ranks = "feature_set,direction,reference,competitor,u,p_raw,p_adjusted,winner\n";
    for (const auto& row : table.rows) {
        if (row.cell.evolver != "QD [all]")
            continue;
        for (const auto& cmp : rank_against(table, row.cell)) {
            const std::string winner =
                cmp.result.winner == 1 ? "reference" : (cmp.result.winner == 2 ? "competitor" : "none");
            ranks += detail::csv_field(row.cell.feature_set) + "," + detail::csv_field(row.cell.direction) + "," +
                     detail::csv_field(row.cell.evolver) + "," + detail::csv_field(cmp.competitor.evolver) + "," +
                     detail::fmt(cmp.result.u, 1) + "," + detail::fmt_double(cmp.result.p_raw) + "," +
                     detail::fmt_double(cmp.result.p_adjusted) + "," + winner + "\n";
        }
    }
    detail::write_file(out / "rank_tests.csv", ranks);
    return report;
}

} // namespace qdgen
