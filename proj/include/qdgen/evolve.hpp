#pragma once

/// @file evolve.hpp
/// @brief Instance evolvers: Map-Elites QD, the (mu+1) EA with and without a
/// box archive, and the indicator-based EDO EAs.
///
/// All evolvers share one random stream per run, draw from it in the same
/// order (parent choice, mutation, objective start nodes) and log one event
/// per archive offer. The budget counts mutant evaluations; initial and
/// warmup evaluations are reported separately in the RunLog.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <qdgen/archive.hpp>
#include <qdgen/error.hpp>
#include <qdgen/graphfeat.hpp>
#include <qdgen/indicators.hpp>
#include <qdgen/instance.hpp>
#include <qdgen/mutation.hpp>
#include <qdgen/random.hpp>
#include <qdgen/solvers.hpp>

namespace qdgen {

enum class EvolverKind { ea, ea_archive, qd, edo_igd, edo_hv };

inline std::string_view evolver_name(EvolverKind k) {
    switch (k) {
    case EvolverKind::ea: return "ea";
    case EvolverKind::ea_archive: return "ea_archive";
    case EvolverKind::qd: return "qd";
    case EvolverKind::edo_igd: return "edo_igd";
    case EvolverKind::edo_hv: return "edo_hv";
    }
    return "?";
}

inline EvolverKind parse_evolver(std::string_view s) {
    for (auto k : {EvolverKind::ea, EvolverKind::ea_archive, EvolverKind::qd, EvolverKind::edo_igd,
                   EvolverKind::edo_hv})
        if (evolver_name(k) == s)
            return k;
    throw ValidationError("unknown evolver '" + std::string(s) + "'");
}

struct EvolverConfig {
    EvolverKind kind = EvolverKind::qd;
    std::size_t n = 100;
    std::size_t mu = 1;
    std::uint64_t budget = 10000;
    OperatorSuite suite = builtin_suite("all");
    ObjectiveSpec objective;
    FeatureSet features = fc1();
    std::uint64_t seed = 1;
    std::uint64_t snapshot_every = 1000;
    double edo_alpha = 0.1;
    std::uint64_t edo_warmup = 10000;

    bool is_edo() const { return kind == EvolverKind::edo_igd || kind == EvolverKind::edo_hv; }

    void validate() const {
        if (mu < 1)
            throw ValidationError("mu must be >= 1");
        if (n < features.min_n())
            throw ValidationError("n=" + std::to_string(n) + " too small for feature set " + features.id);
        suite.validate();
        objective.validate();
        if (is_edo() && !(edo_alpha > 0.0))
            throw ValidationError("EDO alpha must be > 0");
        if (snapshot_every < 1)
            throw ValidationError("snapshot_every must be >= 1");
    }

    /// Table-style name, e.g. "QD [all]", "(50+1) EA [simple]", "(50+1) EA-IGD [all]".
    std::string label() const {
        const std::string suffix = " [" + suite.id + "]";
        const std::string pop = "(" + std::to_string(mu) + "+1) ";
        switch (kind) {
        case EvolverKind::qd: return "QD" + suffix;
        case EvolverKind::ea: return pop + "EA (no archive)" + suffix;
        case EvolverKind::ea_archive: return pop + "EA" + suffix;
        case EvolverKind::edo_igd: return pop + "EA-IGD" + suffix;
        case EvolverKind::edo_hv: return pop + "EA-HV" + suffix;
        }
        return "?";
    }
};

/// Objective as a function of (instance, random stream); pluggable for tests
/// and future external solvers.
using ObjectiveFn = std::function<double(const Instance&, Rng&)>;

inline ObjectiveFn ratio_objective(ObjectiveSpec spec) {
    return [spec = std::move(spec)](const Instance& inst, Rng& rng) {
        return evaluate_objective(inst.points(), spec, rng).ratio;
    };
}

struct RunResult {
    Archive archive;
    RunLog log;
    /// True for the plain (mu+1) EA, whose archive is only a passive record
    /// of visited boxes.
    bool footprint = false;
};

namespace detail {

struct Individual {
    Instance instance;
    BoxKey key;
    double objective;
    std::uint64_t birth = 0;
};

class RunState {
  public:
    RunState(const EvolverConfig& cfg, ObjectiveFn objective)
        : cfg_(cfg), objective_(std::move(objective)), rng_(cfg.seed), archive_(cfg.features.id) {}

    Rng& rng() { return rng_; }
    Archive& archive() { return archive_; }
    RunLog& log() { return log_; }
    const EvolverConfig& cfg() const { return cfg_; }

    std::pair<BoxKey, double> evaluate(const Instance& inst) {
        BoxKey key = feature_vector(inst, cfg_.features).key();
        const double f = objective_(inst, rng_);
        return {std::move(key), f};
    }

    double objective_only(const Instance& inst) { return objective_(inst, rng_); }

    Instance stamp(Instance inst, std::int64_t iteration) const {
        Provenance m = inst.meta().value_or(Provenance{});
        m.iteration = iteration;
        return std::move(inst).with_meta(std::move(m));
    }

    Outcome offer(const BoxKey& key, const Instance& inst, double f, std::int64_t iteration) {
        const Outcome o = archive_.offer(key, inst, f, iteration);
        log_.events.push_back({iteration, o, key, f});
        // spot check: every 100th update re-derives the stored key
        if (o == Outcome::update && ++updates_seen_ % 100 == 0) {
            if (feature_vector(archive_.find(key)->instance, cfg_.features).key() != key)
                throw std::logic_error("archive key mismatch for box " + key.to_string());
        }
        return o;
    }

    void snapshot(std::int64_t iteration) {
        if (!log_.snapshots.empty() && log_.snapshots.back().iteration == iteration)
            return;
        log_.snapshots.push_back({iteration, archive_.size()});
    }

    void after_iteration(std::int64_t iteration) {
        ++log_.evaluations;
        if (static_cast<std::uint64_t>(iteration) % cfg_.snapshot_every == 0)
            snapshot(iteration);
    }

  private:
    const EvolverConfig& cfg_;
    ObjectiveFn objective_;
    Rng rng_;
    Archive archive_;
    RunLog log_;
    std::uint64_t updates_seen_ = 0;
};

inline void record_population(RunLog& log, const std::vector<Individual>& pop) {
    log.final_population.clear();
    for (const auto& ind : pop)
        log.final_population.push_back({ind.key, ind.objective});
}

} // namespace detail

/// Map-Elites: one random seed instance, then uniform parent choice among
/// covered boxes with elitist per-box replacement.
inline RunResult run_qd(const EvolverConfig& cfg, const ObjectiveFn& objective) {
    detail::RunState st(cfg, objective);
    {
        Instance seed = st.stamp(rue_instance(cfg.n, st.rng()), 0);
        auto [key, f] = st.evaluate(seed);
        ++st.log().initial_evaluations;
        st.offer(key, seed, f, 0);
        st.snapshot(0);
    }
    for (std::uint64_t it = 1; it <= cfg.budget; ++it) {
        const auto iter = static_cast<std::int64_t>(it);
        const std::size_t slot = st.archive().sample_slot(st.rng());
        const Instance child = st.stamp(mutate(st.archive().elite(slot).instance, cfg.suite, st.rng()), iter);
        auto [key, f] = st.evaluate(child);
        st.offer(key, child, f, iter);
        st.after_iteration(iter);
    }
    st.snapshot(static_cast<std::int64_t>(cfg.budget));
    return {std::move(st.archive()), std::move(st.log()), false};
}

namespace detail {

inline RunResult run_mu_plus_one(const EvolverConfig& cfg, const ObjectiveFn& objective, bool footprint) {
    RunState st(cfg, objective);
    std::vector<Individual> pop;
    pop.reserve(cfg.mu);
    for (std::size_t i = 0; i < cfg.mu; ++i) {
        Instance inst = st.stamp(rue_instance(cfg.n, st.rng()), 0);
        auto [key, f] = st.evaluate(inst);
        ++st.log().initial_evaluations;
        st.offer(key, inst, f, 0);
        pop.push_back({std::move(inst), std::move(key), f, i});
    }
    st.snapshot(0);
    for (std::uint64_t it = 1; it <= cfg.budget; ++it) {
        const auto iter = static_cast<std::int64_t>(it);
        auto& parent = pop[uniform_index(st.rng(), pop.size())];
        Instance child = st.stamp(mutate(parent.instance, cfg.suite, st.rng()), iter);
        auto [key, f] = st.evaluate(child);
        st.offer(key, child, f, iter);
        if (f <= parent.objective)
            parent = {std::move(child), std::move(key), f, it + cfg.mu};
        st.after_iteration(iter);
    }
    st.snapshot(static_cast<std::int64_t>(cfg.budget));
    record_population(st.log(), pop);
    return {std::move(st.archive()), std::move(st.log()), footprint};
}

} // namespace detail

/// Classical (mu+1) EA. The returned archive is a passive footprint.
inline RunResult run_ea(const EvolverConfig& cfg, const ObjectiveFn& objective) {
    return detail::run_mu_plus_one(cfg, objective, true);
}

/// (mu+1) EA that additionally stores every offspring in the box archive.
inline RunResult run_ea_archive(const EvolverConfig& cfg, const ObjectiveFn& objective) {
    return detail::run_mu_plus_one(cfg, objective, false);
}

namespace detail {

inline FeaturePoint normalized_point(const BoxKey& key, const FeatureSet& set, std::size_t n) {
    const auto v = normalize(key, set, n);
    return {v.at(0), v.size() > 1 ? v[1] : 0.0};
}

/// Index of the candidate to drop: the worst one violating the quality
/// threshold if any, otherwise the one whose removal loses least diversity.
/// Ties go to the oldest (smallest birth).
inline std::size_t choose_removal(const std::vector<Individual>& cand, double threshold, EvolverKind kind,
                                  const FeatureSet& set, std::size_t n, const std::vector<FeaturePoint>& ref) {
    std::size_t worst = cand.size();
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (cand[i].objective <= threshold)
            continue;
        if (worst == cand.size() || cand[i].objective > cand[worst].objective ||
            (cand[i].objective == cand[worst].objective && cand[i].birth < cand[worst].birth))
            worst = i;
    }
    if (worst != cand.size())
        return worst;

    std::vector<FeaturePoint> pts;
    pts.reserve(cand.size());
    for (const auto& c : cand)
        pts.push_back(normalized_point(c.key, set, n));
    const auto loss = kind == EvolverKind::edo_igd ? igd_removal_loss(pts, ref) : hv_removal_loss(pts);
    std::size_t best = 0;
    for (std::size_t i = 1; i < cand.size(); ++i)
        if (loss[i] < loss[best] || (loss[i] == loss[best] && cand[i].birth < cand[best].birth))
            best = i;
    return best;
}

} // namespace detail

/// EDO (mu+1) EA. A (1+1) EA warmup produces a champion whose mu clones form
/// the initial population. A mutant may enter only if its objective is within
/// (1+alpha) of the best known; then the member whose removal costs least
/// diversity (IGD or dimension-doubled hypervolume) is dropped.
inline RunResult run_edo(const EvolverConfig& cfg, const ObjectiveFn& objective) {
    if (!cfg.is_edo())
        throw ValidationError("run_edo needs evolver edo_igd or edo_hv");
    if (!(cfg.edo_alpha > 0.0))
        throw ValidationError("EDO alpha must be > 0");
    detail::RunState st(cfg, objective);

    Instance champ = st.stamp(rue_instance(cfg.n, st.rng()), 0);
    double champ_f = st.objective_only(champ);
    ++st.log().warmup_evaluations;
    for (std::uint64_t w = 0; w < cfg.edo_warmup; ++w) {
        Instance y = mutate(champ, cfg.suite, st.rng());
        const double fy = st.objective_only(y);
        ++st.log().warmup_evaluations;
        if (fy <= champ_f) {
            champ = std::move(y);
            champ_f = fy;
        }
    }
    champ = st.stamp(std::move(champ), 0);
    const BoxKey champ_key = feature_vector(champ, cfg.features).key();
    st.offer(champ_key, champ, champ_f, 0);
    st.snapshot(0);

    std::vector<detail::Individual> pop;
    for (std::size_t i = 0; i < cfg.mu; ++i)
        pop.push_back({champ, champ_key, champ_f, i});
    double best = champ_f;
    const auto ref = igd_reference_set();

    for (std::uint64_t it = 1; it <= cfg.budget; ++it) {
        const auto iter = static_cast<std::int64_t>(it);
        const auto& parent = pop[uniform_index(st.rng(), pop.size())];
        Instance child = st.stamp(mutate(parent.instance, cfg.suite, st.rng()), iter);
        auto [key, f] = st.evaluate(child);
        st.offer(key, child, f, iter);
        const double threshold = (1.0 + cfg.edo_alpha) * best;
        if (f <= threshold) {
            pop.push_back({std::move(child), std::move(key), f, it + cfg.mu});
            const std::size_t drop = detail::choose_removal(pop, threshold, cfg.kind, cfg.features, cfg.n, ref);
            pop.erase(pop.begin() + static_cast<std::ptrdiff_t>(drop));
            for (const auto& ind : pop)
                best = std::min(best, ind.objective);
        }
        st.after_iteration(iter);
    }
    st.snapshot(static_cast<std::int64_t>(cfg.budget));
    detail::record_population(st.log(), pop);
    return {std::move(st.archive()), std::move(st.log()), false};
}

/// Dispatches on cfg.kind.
inline RunResult run(const EvolverConfig& cfg, const ObjectiveFn& objective) {
    switch (cfg.kind) {
    case EvolverKind::qd: return run_qd(cfg, objective);
    case EvolverKind::ea: return run_ea(cfg, objective);
    case EvolverKind::ea_archive: return run_ea_archive(cfg, objective);
    case EvolverKind::edo_igd:
    case EvolverKind::edo_hv: return run_edo(cfg, objective);
    }
    throw ValidationError("unknown evolver");
}

inline RunResult run(const EvolverConfig& cfg) {
    cfg.validate();
    return run(cfg, ratio_objective(cfg.objective));
}

} // namespace qdgen
