#include <gtest/gtest.h>

#include <memory>
#include <set>

#include <qdgen/evolve.hpp>

#include "support.hpp"

using namespace qdgen;

namespace {

EvolverConfig small_config(EvolverKind kind, std::uint64_t budget, std::uint64_t seed = 1) {
    EvolverConfig c;
    c.kind = kind;
    c.n = 30;
    c.budget = budget;
    c.seed = seed;
    c.snapshot_every = 100;
    return c;
}

/// Objective that gets strictly worse with every call.
ObjectiveFn worsening() {
    auto calls = std::make_shared<double>(0.0);
    return [calls](const Instance&, Rng&) { return *calls += 1.0; };
}

OperatorSuite identity_suite() {
    return make_suite("identity", {make_operator("relocate", {{"rate", 0.0}})});
}

void expect_elitist(const RunLog& log) {
    std::map<BoxKey, double> best;
    for (const auto& ev : log.events) {
        auto it = best.find(ev.key);
        if (ev.kind == Outcome::first_hit) {
            ASSERT_EQ(it, best.end());
            best[ev.key] = ev.objective;
        } else if (ev.kind == Outcome::update) {
            ASSERT_NE(it, best.end());
            ASSERT_LE(ev.objective, it->second);
            it->second = ev.objective;
        } else {
            ASSERT_NE(it, best.end());
            ASSERT_GT(ev.objective, it->second);
        }
    }
}

} // namespace

TEST(Qd, BudgetZeroKeepsSeedOnly) {
    const auto r = run(small_config(EvolverKind::qd, 0));
    EXPECT_EQ(r.archive.size(), 1u);
    ASSERT_EQ(r.log.events.size(), 1u);
    EXPECT_EQ(r.log.events[0].kind, Outcome::first_hit);
    EXPECT_EQ(r.log.evaluations, 0u);
    EXPECT_EQ(r.log.initial_evaluations, 1u);
}

TEST(Qd, BudgetOne) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto r = run(small_config(EvolverKind::qd, 1, seed));
        ASSERT_EQ(r.log.events.size(), 2u);
        const bool same_box = r.log.events[1].key == r.log.events[0].key;
        EXPECT_EQ(r.archive.size(), same_box ? 1u : 2u);
        EXPECT_EQ(r.log.evaluations, 1u);
    }
}

TEST(Qd, ElitismAndReplay) {
    const auto cfg = small_config(EvolverKind::qd, 2000);
    const auto r = run(cfg);
    expect_elitist(r.log);
    EXPECT_EQ(replay(r.log), r.archive.records());
    EXPECT_EQ(r.log.events.size(), 2001u);
    EXPECT_EQ(r.log.evaluations, 2000u);
    EXPECT_TRUE(r.archive.inconsistent_keys(cfg.features).empty());
    for (const auto& rec : r.archive.records()) {
        const auto* e = r.archive.find(rec.key);
        EXPECT_EQ(e->instance.meta()->iteration, rec.last_update_iter);
    }
}

TEST(Qd, CoverageSnapshots) {
    const auto r = run(small_config(EvolverKind::qd, 1050));
    std::vector<std::int64_t> its;
    for (const auto& s : r.log.snapshots)
        its.push_back(s.iteration);
    EXPECT_EQ(its, (std::vector<std::int64_t>{0, 100, 200, 300, 400, 500, 600, 700, 800, 900, 1000, 1050}));
    EXPECT_EQ(r.log.snapshots.back().covered, r.archive.size());
}

TEST(Qd, Deterministic) {
    const auto a = run(small_config(EvolverKind::qd, 500, 4));
    const auto b = run(small_config(EvolverKind::qd, 500, 4));
    const auto c = run(small_config(EvolverKind::qd, 500, 5));
    EXPECT_EQ(a.log.events, b.log.events);
    EXPECT_NE(a.log.events, c.log.events);
}

TEST(Qd, MatchesOnePlusOneWhenBoxNeverChanges) {
    // With a feature-preserving suite the map holds one box, so QD and the
    // (1+1) EA consume identical random streams and make identical decisions.
    auto q = small_config(EvolverKind::qd, 300);
    q.suite = identity_suite();
    auto e = q;
    e.kind = EvolverKind::ea_archive;
    const auto rq = run(q);
    const auto re = run(e);
    EXPECT_EQ(rq.archive.size(), 1u);
    EXPECT_EQ(rq.log.events, re.log.events);
    EXPECT_EQ(rq.archive.records(), re.archive.records());
}

TEST(Ea, NeverImprovingObjectiveKeepsParent) {
    auto cfg = small_config(EvolverKind::ea, 300);
    const auto r = run(cfg, worsening());
    EXPECT_TRUE(r.footprint);
    ASSERT_EQ(r.log.final_population.size(), 1u);
    EXPECT_EQ(r.log.final_population[0].objective, 1.0);
    EXPECT_EQ(r.log.final_population[0].key, r.log.events[0].key);
    // footprint grows only with novel boxes
    std::set<BoxKey> keys;
    for (const auto& ev : r.log.events)
        keys.insert(ev.key);
    EXPECT_EQ(r.archive.size(), keys.size());
    EXPECT_EQ(r.log.first_hits(), keys.size());
    for (const auto& ev : r.log.events)
        if (ev.iteration > 0) {
            EXPECT_NE(ev.kind, Outcome::update);
        }
}

TEST(Ea, BestNeverWorsens) {
    auto cfg = small_config(EvolverKind::ea, 500);
    cfg.mu = 5;
    const auto r = run(cfg);
    double initial_best = 1e9;
    for (const auto& ev : r.log.events)
        if (ev.iteration == 0)
            initial_best = std::min(initial_best, ev.objective);
    double final_best = 1e9;
    for (const auto& m : r.log.final_population)
        final_best = std::min(final_best, m.objective);
    EXPECT_LE(final_best, initial_best);
    EXPECT_EQ(r.log.final_population.size(), 5u);
}

TEST(EaArchive, CoversInitialPopulation) {
    auto cfg = small_config(EvolverKind::ea_archive, 0);
    cfg.mu = 20;
    const auto r = run(cfg);
    std::set<BoxKey> initial;
    for (const auto& ev : r.log.events)
        initial.insert(ev.key);
    EXPECT_EQ(r.log.events.size(), 20u);
    EXPECT_GE(r.archive.size(), initial.size());
    EXPECT_FALSE(r.footprint);
    EXPECT_EQ(r.log.initial_evaluations, 20u);
}

TEST(EaArchive, ElitistAndSameFootprintAsPlainEa) {
    auto cfg = small_config(EvolverKind::ea_archive, 800);
    cfg.mu = 10;
    const auto a = run(cfg);
    expect_elitist(a.log);
    EXPECT_EQ(replay(a.log), a.archive.records());
    cfg.kind = EvolverKind::ea;
    const auto b = run(cfg);
    EXPECT_EQ(a.log.events, b.log.events);
}

TEST(Edo, QualityGateRejectsEverything) {
    auto cfg = small_config(EvolverKind::edo_igd, 200);
    cfg.mu = 5;
    cfg.edo_warmup = 50;
    const auto r = run(cfg, worsening());
    EXPECT_EQ(r.log.warmup_evaluations, 51u);
    EXPECT_EQ(r.log.evaluations, 200u);
    ASSERT_EQ(r.log.final_population.size(), 5u);
    for (const auto& m : r.log.final_population) {
        EXPECT_EQ(m.objective, 1.0);
        EXPECT_EQ(m.key, r.log.events[0].key);
    }
    // the archive still records boxes hit by rejected mutants
    EXPECT_EQ(r.log.events.size(), 201u);
}

TEST(Edo, RunsBothIndicators) {
    for (auto kind : {EvolverKind::edo_igd, EvolverKind::edo_hv}) {
        auto cfg = small_config(kind, 300);
        cfg.mu = 8;
        cfg.edo_warmup = 100;
        const auto r = run(cfg);
        EXPECT_EQ(r.log.final_population.size(), 8u);
        double best = 1e9;
        for (const auto& m : r.log.final_population)
            best = std::min(best, m.objective);
        for (const auto& m : r.log.final_population)
            EXPECT_LE(m.objective, (1 + cfg.edo_alpha) * best + 1e-12);
        expect_elitist(r.log);
    }
}

TEST(Edo, RemovalPrefersWorstViolatorThenOldest) {
    const auto set = fc1();
    const auto ref = igd_reference_set();
    const auto inst = rue_instance(30, 1);
    const BoxKey k{{20, 4}};
    std::vector<detail::Individual> cand{
        {inst, k, 1.0, 0}, {inst, k, 1.5, 3}, {inst, k, 1.5, 1}, {inst, k, 1.2, 2}};
    EXPECT_EQ(detail::choose_removal(cand, 1.1, EvolverKind::edo_igd, set, 30, ref), 2u);
}

TEST(Edo, IdenticalIndividualsDropOldest) {
    const auto set = fc1();
    const auto ref = igd_reference_set();
    const auto inst = rue_instance(30, 1);
    const BoxKey k{{20, 4}};
    std::vector<detail::Individual> cand{{inst, k, 1.0, 4}, {inst, k, 1.0, 2}, {inst, k, 1.0, 7}};
    for (auto kind : {EvolverKind::edo_igd, EvolverKind::edo_hv})
        EXPECT_EQ(detail::choose_removal(cand, 1.1, kind, set, 30, ref), 1u);
}

TEST(Edo, RemovalKeepsDiversity) {
    const auto set = fc1();
    const auto ref = igd_reference_set();
    const auto inst = rue_instance(30, 1);
    // two members share a box, the third is elsewhere: one of the twins goes
    std::vector<detail::Individual> cand{
        {inst, BoxKey{{10, 2}}, 1.0, 5}, {inst, BoxKey{{40, 10}}, 1.0, 0}, {inst, BoxKey{{10, 2}}, 1.0, 9}};
    for (auto kind : {EvolverKind::edo_igd, EvolverKind::edo_hv})
        EXPECT_EQ(detail::choose_removal(cand, 1.1, kind, set, 30, ref), 0u);
}

TEST(ArchiveSampling, SingleBox) {
    Archive a("FC1");
    a.offer(BoxKey{{8, 2}}, rue_instance(10, 1), 1.0, 0);
    Rng rng(1);
    for (int i = 0; i < 100; ++i)
        EXPECT_EQ(a.sample_covered_box(rng), (BoxKey{{8, 2}}));
}

TEST(ArchiveSampling, TwoBoxesHalfEach) {
    Archive a("FC1");
    a.offer(BoxKey{{8, 2}}, rue_instance(10, 1), 1.0, 0);
    a.offer(BoxKey{{10, 2}}, rue_instance(10, 2), 1.0, 1);
    Rng rng(2);
    int first = 0;
    for (int i = 0; i < 100000; ++i)
        first += a.sample_covered_box(rng) == BoxKey{{8, 2}};
    EXPECT_NEAR(first / 1e5, 0.5, 0.01);
}

TEST(ArchiveSampling, ChiSquareUniformity) {
    Archive a("FC1");
    const int k = 25;
    for (int i = 0; i < k; ++i)
        a.offer(BoxKey{{8 + i, 2}}, rue_instance(10, 1), 1.0, i);
    Rng rng(3);
    std::vector<int> counts(k, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i)
        ++counts[a.sample_slot(rng)];
    double chi2 = 0.0;
    const double expected = static_cast<double>(draws) / k;
    for (int c : counts)
        chi2 += (c - expected) * (c - expected) / expected;
    // 99th percentile of chi-square with 24 degrees of freedom
    EXPECT_LT(chi2, 42.98);
}

TEST(Archive, OfferRules) {
    Archive a("FC1");
    const BoxKey k{{8, 2}};
    EXPECT_EQ(a.offer(k, rue_instance(10, 1), 0.9, 0), Outcome::first_hit);
    EXPECT_EQ(a.offer(k, rue_instance(10, 2), 0.95, 1), Outcome::reject);
    EXPECT_EQ(a.offer(k, rue_instance(10, 3), 0.9, 2), Outcome::update);
    EXPECT_EQ(a.offer(k, rue_instance(10, 4), 0.8, 3), Outcome::update);
    const auto rec = a.records().at(0);
    EXPECT_EQ(rec.hits, 4u);
    EXPECT_EQ(rec.updates, 2u);
    EXPECT_EQ(rec.first_hit_iter, 0);
    EXPECT_EQ(rec.last_update_iter, 3);
    EXPECT_EQ(rec.objective, 0.8);
    EXPECT_EQ(a.find(k)->instance, rue_instance(10, 4));
}

TEST(Replay, RejectsInconsistentLogs) {
    RunLog log;
    log.events.push_back({0, Outcome::update, BoxKey{{8, 2}}, 1.0});
    EXPECT_THROW(replay(log), ValidationError);
    log.events = {{0, Outcome::first_hit, BoxKey{{8, 2}}, 1.0}, {1, Outcome::update, BoxKey{{8, 2}}, 1.5}};
    EXPECT_THROW(replay(log), ValidationError);
}

TEST(Config, ValidationAndLabels) {
    EvolverConfig c;
    EXPECT_EQ(c.label(), "QD [all]");
    c.kind = EvolverKind::ea_archive;
    c.mu = 50;
    EXPECT_EQ(c.label(), "(50+1) EA [all]");
    c.kind = EvolverKind::edo_hv;
    EXPECT_EQ(c.label(), "(50+1) EA-HV [all]");
    c.suite = builtin_suite("simple");
    c.kind = EvolverKind::ea;
    c.mu = 1;
    EXPECT_EQ(c.label(), "(1+1) EA (no archive) [simple]");
    c.mu = 0;
    EXPECT_THROW(c.validate(), ValidationError);
    c.mu = 1;
    c.n = 5;
    c.features = fc2();
    EXPECT_THROW(c.validate(), ValidationError);
    EXPECT_THROW(parse_evolver("ga"), ValidationError);
}
