#include <gtest/gtest.h>

#include <qdgen/solvers.hpp>

#include "support.hpp"

using namespace qdgen;

namespace {

const std::vector<Point> corners{{0, 0}, {0, 1}, {1, 0}, {1, 1}};

std::vector<std::size_t> widen(const std::vector<CityId>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST(Solvers, SquareCornersGivePerimeter) {
    for (std::size_t s = 0; s < 4; ++s) {
        EXPECT_DOUBLE_EQ(farthest_insertion(corners, s).length, 4.0);
        EXPECT_DOUBLE_EQ(nearest_insertion(corners, s).length, 4.0);
    }
}

TEST(Solvers, TwoCityRelaxation) {
    const std::vector<Point> p{{0.1, 0.1}, {0.4, 0.5}};
    EXPECT_DOUBLE_EQ(farthest_insertion(p, 0).length, 1.0);
    EXPECT_DOUBLE_EQ(nearest_insertion(p, 1).length, 1.0);
}

TEST(Solvers, CollinearTourIsTwiceSpan) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 4 + static_cast<std::size_t>(trial % 5);
        std::vector<Point> p(n);
        for (auto& q : p)
            q = {u(rng), 0.3};
        const auto [lo, hi] = std::minmax_element(p.begin(), p.end(), [](auto& a, auto& b) { return a.x < b.x; });
        const double span = hi->x - lo->x;
        EXPECT_NEAR(oracle::optimal_tour(p), 2 * span, 1e-12);
        for (std::size_t s = 0; s < n; ++s) {
            EXPECT_NEAR(farthest_insertion(p, s).length, 2 * span, 1e-12);
            EXPECT_NEAR(nearest_insertion(p, s).length, 2 * span, 1e-12);
        }
    }
}

TEST(Solvers, GuardrailsAgainstBruteForce) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 4 + static_cast<std::size_t>(trial % 5);
        const auto p = oracle::random_points(n, rng);
        const double opt = oracle::optimal_tour(p);
        for (std::size_t s = 0; s < n; ++s) {
            const auto fi = farthest_insertion(p, s);
            const auto ni = nearest_insertion(p, s);
            EXPECT_GE(fi.length, opt - 1e-12);
            EXPECT_LE(ni.length, 2 * opt + 1e-12);
            EXPECT_NEAR(fi.length, oracle::cycle_length(p, widen(fi.order)), 1e-12);
            EXPECT_NEAR(ni.length, oracle::cycle_length(p, widen(ni.order)), 1e-12);
        }
    }
}

TEST(Solvers, ToursArePermutationsStartingAtStart) {
    const auto inst = rue_instance(60, 12);
    for (std::size_t s : {0u, 17u, 59u}) {
        for (const auto& t : {farthest_insertion(inst, s), nearest_insertion(inst, s)}) {
            EXPECT_NO_THROW(check_permutation(t.order, 60));
            EXPECT_EQ(t.order.front(), s);
            EXPECT_NEAR(t.length, tour_length(inst, t.order), 1e-9);
        }
    }
    EXPECT_THROW(farthest_insertion(inst, 60), ValidationError);
}

TEST(TourLength, SymmetryAndRotation) {
    std::vector<CityId> order{0, 1, 3, 2};
    EXPECT_DOUBLE_EQ(tour_length(corners, order), 4.0);
    std::vector<CityId> reversed(order.rbegin(), order.rend());
    EXPECT_DOUBLE_EQ(tour_length(corners, reversed), 4.0);
    std::rotate(order.begin(), order.begin() + 1, order.end());
    EXPECT_DOUBLE_EQ(tour_length(corners, order), 4.0);
    const std::vector<CityId> crossing{0, 3, 1, 2};
    EXPECT_DOUBLE_EQ(tour_length(corners, crossing), 2.0 + 2.0 * std::sqrt(2.0));
    EXPECT_THROW(tour_length(corners, std::vector<CityId>{0, 1, 1, 2}), ValidationError);
    EXPECT_THROW(tour_length(corners, std::vector<CityId>{0, 1, 2}), ValidationError);
}

TEST(Objective, SameSolverSharedStartsIsOne) {
    const auto inst = rue_instance(50, 3);
    Rng rng(1);
    const ObjectiveSpec spec{"FI", "FI", 5, true};
    EXPECT_EQ(evaluate_objective(inst.points(), spec, rng).ratio, 1.0);
    EXPECT_THROW(spec.validate(), ValidationError);
}

TEST(Objective, CornersRatioIsOne) {
    const Instance inst(corners);
    Rng rng(5);
    EXPECT_DOUBLE_EQ(objective_ratio(inst, ObjectiveSpec{}, rng), 1.0);
}

TEST(Objective, RatioOfMeans) {
    const auto inst = rue_instance(40, 8);
    Rng a(3), b(3);
    const auto v = evaluate_objective(inst.points(), ObjectiveSpec{}, a);
    // recompute from the same start draws
    std::vector<std::size_t> sn(5), sd(5);
    for (auto& s : sn)
        s = uniform_index(b, 40);
    for (auto& s : sd)
        s = uniform_index(b, 40);
    double fi = 0, ni = 0;
    for (auto s : sn)
        fi += farthest_insertion(inst, s).length;
    for (auto s : sd)
        ni += nearest_insertion(inst, s).length;
    EXPECT_NEAR(v.numerator_mean, fi / 5, 1e-12);
    EXPECT_NEAR(v.denominator_mean, ni / 5, 1e-12);
    EXPECT_NEAR(v.ratio, fi / ni, 1e-12);
}

TEST(Objective, DeterministicForFixedSeed) {
    const auto inst = rue_instance(100, 4);
    Rng a(11), b(11);
    EXPECT_EQ(objective_ratio(inst, ObjectiveSpec{}, a), objective_ratio(inst, ObjectiveSpec{}, b));
}

TEST(Objective, DegenerateInstanceReturnsOne) {
    const std::vector<Point> same(6, Point{0.3, 0.3});
    Rng rng(2);
    const auto v = evaluate_objective(same, ObjectiveSpec{}, rng);
    EXPECT_TRUE(v.degenerate);
    EXPECT_EQ(v.ratio, 1.0);
}

TEST(Objective, FarthestBeatsNearestOnRandomInstances) {
    std::size_t below = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(s);
        below += objective_ratio(rue_instance(100, s), ObjectiveSpec{}, rng) < 1.0;
    }
    EXPECT_GE(below, 90u);
}

TEST(Objective, UnknownSolverRejected) {
    EXPECT_THROW((ObjectiveSpec{"FI", "LKH"}).validate(), ValidationError);
    EXPECT_THROW((ObjectiveSpec{"FI", "NI", 0}).validate(), ValidationError);
}
