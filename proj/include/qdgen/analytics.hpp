#pragma once

/// @file analytics.hpp
/// @brief Post-hoc statistics over archives and run logs: coverage curves,
/// per-box maps and campaign tables.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <qdgen/archive.hpp>
#include <qdgen/error.hpp>
#include <qdgen/graphfeat.hpp>
#include <qdgen/rank_test.hpp>

namespace qdgen {

inline double median(std::vector<double> v) {
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1)
        return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

inline double mean(std::span<const double> v) {
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

/// Sample (n-1) standard deviation; 0 for a single value.
inline double sample_std(std::span<const double> v) {
    if (v.size() < 2)
        return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v)
        ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// Coverage

struct CurvePoint {
    std::int64_t iteration = 0;
    std::size_t covered = 0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Step series of boxes covered, one point per iteration that changed it
/// (plus iteration 0 and the last logged iteration).
inline std::vector<CurvePoint> coverage_curve(const RunLog& log) {
    std::vector<CurvePoint> out;
    std::size_t covered = 0;
    std::int64_t last = 0;
    for (const auto& ev : log.events) {
        last = std::max(last, ev.iteration);
        if (ev.kind != Outcome::first_hit)
            continue;
        ++covered;
        if (!out.empty() && out.back().iteration == ev.iteration)
            out.back().covered = covered;
        else
            out.push_back({ev.iteration, covered});
    }
    if (out.empty() || out.front().iteration != 0)
        out.insert(out.begin(), CurvePoint{0, 0});
    if (!log.snapshots.empty())
        last = std::max(last, log.snapshots.back().iteration);
    if (out.back().iteration != last)
        out.push_back({last, covered});
    return out;
}

/// Value of a step series at `iteration`.
inline std::size_t coverage_at(std::span<const CurvePoint> curve, std::int64_t iteration) {
    std::size_t v = 0;
    for (const auto& p : curve) {
        if (p.iteration > iteration)
            break;
        v = p.covered;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Per-box maps

struct HeatmapRecord {
    BoxKey key;
    std::vector<double> normalized;
    double objective = 0.0;
    std::uint64_t updates = 0;
    std::uint64_t hits = 0;
    std::int64_t first_hit_iter = 0;
};

/// One record per covered box. `records` is the archive index and `log` the
/// same run's events; a key mismatch means they come from different runs.
inline std::vector<HeatmapRecord> box_heatmaps(std::span<const BoxRecord> records, const RunLog& log,
                                               const FeatureSet& set, std::size_t n) {
    const auto replayed = replay(log);
    if (replayed.size() != records.size())
        throw ValidationError("archive and run log do not belong to the same run");
    std::vector<BoxRecord> sorted(records.begin(), records.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    std::vector<HeatmapRecord> out;
    out.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].key != replayed[i].key)
            throw ValidationError("archive and run log do not belong to the same run");
        const auto& r = sorted[i];
        out.push_back({r.key, normalize(r.key, set, n), r.objective, r.updates, r.hits, r.first_hit_iter});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Campaign tables

/// (feature set, objective direction, evolver label)
struct CellKey {
    std::string feature_set;
    std::string direction;
    std::string evolver;

    friend auto operator<=>(const CellKey&, const CellKey&) = default;
    friend bool operator==(const CellKey&, const CellKey&) = default;
};

/// Final archive index of one run.
struct RunData {
    CellKey cell;
    std::uint64_t seed = 0;
    std::vector<BoxRecord> boxes;
};

struct RunSummary {
    std::string evolver;
    std::uint64_t seed = 0;
    std::size_t boxes_covered = 0;
    std::size_t below_median_count = 0;
    std::uint64_t max_updates = 0;
    std::uint64_t max_hits = 0;
    double best_objective = 0.0;
    double median_objective = 0.0;
};

/// Boxes whose objective lies strictly below `pooled_median`.
inline std::size_t count_below(std::span<const BoxRecord> boxes, double pooled_median) {
    return static_cast<std::size_t>(
        std::count_if(boxes.begin(), boxes.end(), [&](const auto& b) { return b.objective < pooled_median; }));
}

inline RunSummary summarize(const RunData& run, double pooled_median) {
    if (run.boxes.empty())
        throw ValidationError("run has no boxes");
    RunSummary s;
    s.evolver = run.cell.evolver;
    s.seed = run.seed;
    s.boxes_covered = run.boxes.size();
    s.below_median_count = count_below(run.boxes, pooled_median);
    std::vector<double> obj;
    obj.reserve(run.boxes.size());
    s.best_objective = std::numeric_limits<double>::infinity();
    for (const auto& b : run.boxes) {
        s.max_updates = std::max(s.max_updates, b.updates);
        s.max_hits = std::max(s.max_hits, b.hits);
        s.best_objective = std::min(s.best_objective, b.objective);
        obj.push_back(b.objective);
    }
    s.median_objective = median(std::move(obj));
    return s;
}

struct CampaignRow {
    CellKey cell;
    std::size_t runs = 0;
    double mean_boxes = 0.0;
    double std_boxes = 0.0;
    double min_boxes = 0.0;
    double max_boxes = 0.0;
    double below_median = 0.0; // median over runs of below_median_count
    std::uint64_t max_updates = 0;
    std::uint64_t max_hits = 0;
    double best_objective = 0.0;   // over the union of all boxes of all runs
    double median_objective = 0.0; // pooled median over that union
};

struct CampaignTable {
    std::vector<CampaignRow> rows;
    std::vector<std::pair<CellKey, RunSummary>> summaries;
    /// Pooled cross-evolver median per (feature set, direction).
    std::map<std::pair<std::string, std::string>, double> reference_medians;
    std::vector<std::string> warnings;

    const CampaignRow* find(const CellKey& c) const {
        for (const auto& r : rows)
            if (r.cell == c)
                return &r;
        return nullptr;
    }
};

/// Aggregates runs into one row per cell. Cells listed in `expected` but
/// without runs are omitted with a warning.
inline CampaignTable campaign_table(std::span<const RunData> runs, std::span<const CellKey> expected = {}) {
    CampaignTable t;
    std::map<std::pair<std::string, std::string>, std::vector<double>> pooled_group;
    std::map<CellKey, std::vector<const RunData*>> by_cell;
    for (const auto& r : runs) {
        if (r.boxes.empty()) {
            t.warnings.push_back("run " + r.cell.evolver + " seed " + std::to_string(r.seed) + " has no boxes");
            continue;
        }
        auto& g = pooled_group[{r.cell.feature_set, r.cell.direction}];
        for (const auto& b : r.boxes)
            g.push_back(b.objective);
        by_cell[r.cell].push_back(&r);
    }
    for (auto& [k, v] : pooled_group)
        t.reference_medians[k] = median(v);
    for (const auto& c : expected)
        if (!by_cell.contains(c))
            t.warnings.push_back("no runs for cell " + c.feature_set + " / " + c.direction + " / " + c.evolver);

    for (const auto& [cell, cell_runs] : by_cell) {
        const double ref = t.reference_medians.at({cell.feature_set, cell.direction});
        CampaignRow row;
        row.cell = cell;
        row.runs = cell_runs.size();
        std::vector<double> boxes, below, objectives;
        for (const auto* r : cell_runs) {
            const auto s = summarize(*r, ref);
            t.summaries.emplace_back(cell, s);
            boxes.push_back(static_cast<double>(s.boxes_covered));
            below.push_back(static_cast<double>(s.below_median_count));
            row.max_updates = std::max(row.max_updates, s.max_updates);
            row.max_hits = std::max(row.max_hits, s.max_hits);
            for (const auto& b : r->boxes)
                objectives.push_back(b.objective);
        }
        row.mean_boxes = mean(boxes);
        row.std_boxes = sample_std(boxes);
        row.min_boxes = *std::min_element(boxes.begin(), boxes.end());
        row.max_boxes = *std::max_element(boxes.begin(), boxes.end());
        row.below_median = median(below);
        row.best_objective = *std::min_element(objectives.begin(), objectives.end());
        row.median_objective = median(std::move(objectives));
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Coverage samples (boxes_covered per run) of one cell, in seed order.
inline std::vector<double> coverage_sample(const CampaignTable& t, const CellKey& cell) {
    std::vector<std::pair<std::uint64_t, double>> v;
    for (const auto& [c, s] : t.summaries)
        if (c == cell)
            v.emplace_back(s.seed, static_cast<double>(s.boxes_covered));
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (const auto& [seed, x] : v)
        out.push_back(x);
    return out;
}

struct RankComparison {
    CellKey competitor;
    CellKey reference;
    RankTestResult result;
};

/// One-sided test of H1 "reference covers more boxes than competitor" for
/// every other evolver in the reference's (feature set, direction) group,
/// Bonferroni-adjusted over the group. Cells with fewer than 5 runs are skipped.
inline std::vector<RankComparison> rank_against(const CampaignTable& t, const CellKey& reference) {
    std::vector<RankComparison> out;
    const auto ref = coverage_sample(t, reference);
    if (ref.size() < 5)
        return out;
    std::vector<CellKey> competitors;
    for (const auto& row : t.rows)
        if (row.cell.feature_set == reference.feature_set && row.cell.direction == reference.direction &&
            row.cell != reference && row.runs >= 5)
            competitors.push_back(row.cell);
    for (const auto& c : competitors) {
        const auto sample = coverage_sample(t, c);
        out.push_back({c, reference, rank_sum_test(ref, sample, Alternative::greater, competitors.size())});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {
inline std::string fmt(double v, int prec = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s)
        q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}
} // namespace detail

inline std::string campaign_csv(const CampaignTable& t) {
    std::string out = "feature_set,direction,evolver,runs,mean,std,min,max,below_med,max_updates,max_hits,best,median\n";
    for (const auto& r : t.rows) {
        out += detail::csv_field(r.cell.feature_set) + "," + detail::csv_field(r.cell.direction) + "," +
               detail::csv_field(r.cell.evolver) + "," + std::to_string(r.runs) + "," + detail::fmt(r.mean_boxes) +
               "," + detail::fmt(r.std_boxes) + "," + detail::fmt(r.min_boxes, 0) + "," +
               detail::fmt(r.max_boxes, 0) + "," + detail::fmt(r.below_median) + "," +
               std::to_string(r.max_updates) + "," + std::to_string(r.max_hits) + "," +
               detail::fmt(r.best_objective, 4) + "," + detail::fmt(r.median_objective, 4) + "\n";
    }
    return out;
}

/// Aligned plain-text rendering of the table.
inline std::string campaign_text(const CampaignTable& t) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"FC", "direction", "algorithm", "runs", "mean", "std", "<med", "upd.", "hits", "best", "median"});
    for (const auto& r : t.rows)
        cells.push_back({r.cell.feature_set, r.cell.direction, r.cell.evolver, std::to_string(r.runs),
                         detail::fmt(r.mean_boxes), detail::fmt(r.std_boxes), detail::fmt(r.below_median),
                         std::to_string(r.max_updates), std::to_string(r.max_hits), detail::fmt(r.best_objective),
                         detail::fmt(r.median_objective)});
    std::vector<std::size_t> width(cells[0].size(), 0);
    for (const auto& row : cells)
        for (std::size_t i = 0; i < row.size(); ++i)
            width[i] = std::max(width[i], row[i].size());
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const bool left = i < 3;
            const std::string pad(width[i] - row[i].size(), ' ');
            out += left ? row[i] + pad : pad + row[i];
            out += i + 1 < row.size() ? "  " : "";
        }
        while (!out.empty() && out.back() == ' ')
            out.pop_back();
        out += "\n";
    }
    return out;
}

} // namespace qdgen
