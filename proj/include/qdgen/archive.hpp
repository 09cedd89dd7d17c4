#pragma once

/// @file archive.hpp
/// @brief Box map from feature keys to elites, and the run log that can
/// rebuild it.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <qdgen/error.hpp>
#include <qdgen/graphfeat.hpp>
#include <qdgen/instance.hpp>
#include <qdgen/random.hpp>

namespace qdgen {

struct Elite {
    Instance instance;
    double objective;
    std::uint64_t hits = 0;
    std::uint64_t updates = 0;
    std::int64_t first_hit_iter = 0;
    std::int64_t last_update_iter = 0;
};

enum class Outcome { first_hit, update, reject };

inline std::string_view outcome_name(Outcome o) {
    switch (o) {
    case Outcome::first_hit: return "first_hit";
    case Outcome::update: return "update";
    case Outcome::reject: return "reject";
    }
    return "?";
}

inline Outcome parse_outcome(std::string_view s) {
    if (s == "first_hit")
        return Outcome::first_hit;
    if (s == "update")
        return Outcome::update;
    if (s == "reject")
        return Outcome::reject;
    throw ParseError("unknown event kind '" + std::string(s) + "'", 0);
}

/// Index-level view of one box (everything except the instance).
struct BoxRecord {
    BoxKey key;
    double objective = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t updates = 0;
    std::int64_t first_hit_iter = 0;
    std::int64_t last_update_iter = 0;

    friend bool operator==(const BoxRecord&, const BoxRecord&) = default;
};

/// Map-Elites archive. Keys are kept in first-hit order so uniform sampling
/// over covered boxes is reproducible.
class Archive {
  public:
    explicit Archive(std::string feature_set_id = {}) : feature_set_id_(std::move(feature_set_id)) {}

    /// First hit stores unconditionally; otherwise the elite is replaced iff
    /// `objective` is not worse (<=).
    Outcome offer(const BoxKey& key, const Instance& inst, double objective, std::int64_t iteration) {
        const auto it = index_.find(key);
        if (it == index_.end()) {
            index_.emplace(key, keys_.size());
            keys_.push_back(key);
            elites_.push_back(Elite{inst, objective, 1, 0, iteration, iteration});
            return Outcome::first_hit;
        }
        Elite& e = elites_[it->second];
        ++e.hits;
        if (objective <= e.objective) {
            e.instance = inst;
            e.objective = objective;
            ++e.updates;
            e.last_update_iter = iteration;
            return Outcome::update;
        }
        return Outcome::reject;
    }

    std::size_t size() const noexcept { return keys_.size(); }
    bool empty() const noexcept { return keys_.empty(); }
    const std::string& feature_set_id() const noexcept { return feature_set_id_; }

    const Elite* find(const BoxKey& key) const {
        const auto it = index_.find(key);
        return it == index_.end() ? nullptr : &elites_[it->second];
    }

    bool covered(const BoxKey& key) const { return index_.contains(key); }

    /// Keys in first-hit order.
    const std::vector<BoxKey>& keys() const noexcept { return keys_; }
    const Elite& elite(std::size_t slot) const { return elites_.at(slot); }

    /// Uniform over covered boxes.
    const BoxKey& sample_covered_box(Rng& rng) const {
        if (keys_.empty())
            throw ValidationError("sample_covered_box: archive is empty");
        return keys_[uniform_index(rng, keys_.size())];
    }

    /// Slot index form of sample_covered_box.
    std::size_t sample_slot(Rng& rng) const {
        if (keys_.empty())
            throw ValidationError("sample_covered_box: archive is empty");
        return uniform_index(rng, keys_.size());
    }

    /// Records sorted by key.
    std::vector<BoxRecord> records() const {
        std::vector<BoxRecord> out;
        out.reserve(keys_.size());
        for (std::size_t i = 0; i < keys_.size(); ++i) {
            const auto& e = elites_[i];
            out.push_back({keys_[i], e.objective, e.hits, e.updates, e.first_hit_iter, e.last_update_iter});
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
        return out;
    }

    /// Keys whose stored instance no longer maps to them under `set`.
    std::vector<BoxKey> inconsistent_keys(const FeatureSet& set) const {
        std::vector<BoxKey> bad;
        for (std::size_t i = 0; i < keys_.size(); ++i)
            if (feature_vector(elites_[i].instance, set).key() != keys_[i])
                bad.push_back(keys_[i]);
        return bad;
    }

  private:
    std::string feature_set_id_;
    std::unordered_map<BoxKey, std::size_t, BoxKeyHash> index_;
    std::vector<BoxKey> keys_;
    std::vector<Elite> elites_;
};

// ---------------------------------------------------------------------------
// Run log

struct RunEvent {
    std::int64_t iteration = 0;
    Outcome kind = Outcome::reject;
    BoxKey key;
    double objective = 0.0;

    friend bool operator==(const RunEvent&, const RunEvent&) = default;
};

struct CoverageSnapshot {
    std::int64_t iteration = 0;
    std::size_t covered = 0;

    friend bool operator==(const CoverageSnapshot&, const CoverageSnapshot&) = default;
};

struct PopulationMember {
    BoxKey key;
    double objective = 0.0;
};

/// One event per archive offer: the initial population at iteration 0, then
/// one per evaluated mutant.
struct RunLog {
    std::vector<RunEvent> events;
    std::vector<CoverageSnapshot> snapshots;
    std::vector<PopulationMember> final_population;
    std::uint64_t evaluations = 0;         // mutant evaluations, equals the budget
    std::uint64_t initial_evaluations = 0; // initial population / seed instance
    std::uint64_t warmup_evaluations = 0;  // EDO warmup (1+1) EA
    std::size_t first_hits() const {
        return static_cast<std::size_t>(
            std::count_if(events.begin(), events.end(), [](const auto& e) { return e.kind == Outcome::first_hit; }));
    }
};

/// Rebuilds the archive index purely from the event stream.
inline std::vector<BoxRecord> replay(const RunLog& log) {
    std::unordered_map<BoxKey, BoxRecord, BoxKeyHash> boxes;
    for (const auto& ev : log.events) {
        auto it = boxes.find(ev.key);
        if (it == boxes.end()) {
            if (ev.kind != Outcome::first_hit)
                throw ValidationError("replay: " + std::string(outcome_name(ev.kind)) + " for uncovered box " +
                                      ev.key.to_string() + " at iteration " + std::to_string(ev.iteration));
            boxes.emplace(ev.key, BoxRecord{ev.key, ev.objective, 1, 0, ev.iteration, ev.iteration});
            continue;
        }
        auto& r = it->second;
        if (ev.kind == Outcome::first_hit)
            throw ValidationError("replay: repeated first hit for " + ev.key.to_string());
        ++r.hits;
        if (ev.kind == Outcome::update) {
            if (ev.objective > r.objective)
                throw ValidationError("replay: update worsens box " + ev.key.to_string());
            r.objective = ev.objective;
            ++r.updates;
            r.last_update_iter = ev.iteration;
        }
    }
    std::vector<BoxRecord> out;
    out.reserve(boxes.size());
    for (auto& [k, r] : boxes)
        out.push_back(std::move(r));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    return out;
}

} // namespace qdgen
