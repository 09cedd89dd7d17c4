#pragma once

/// @file indicators.hpp
/// @brief Feature-space diversity indicators for the EDO evolvers. Points
/// live in the normalised feature square [0,1]^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <set>
#include <span>
#include <vector>

namespace qdgen {

using FeaturePoint = std::array<double, 2>;

// ---------------------------------------------------------------------------
// Inverted generational distance

/// Four corners plus the centres of a side x side lattice.
inline std::vector<FeaturePoint> igd_reference_set(std::size_t side = 32) {
    std::vector<FeaturePoint> r{{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}};
    r.reserve(4 + side * side);
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j)
            r.push_back({(static_cast<double>(i) + 0.5) / static_cast<double>(side),
                         (static_cast<double>(j) + 0.5) / static_cast<double>(side)});
    return r;
}

inline double feature_distance(const FeaturePoint& a, const FeaturePoint& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

/// Mean distance from each reference point to its nearest population point.
inline double igd(std::span<const FeaturePoint> pop, std::span<const FeaturePoint> ref) {
    if (pop.empty())
        return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& r : ref) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : pop)
            best = std::min(best, feature_distance(r, p));
        sum += best;
    }
    return sum / static_cast<double>(ref.size());
}

/// loss[j] = igd(pop without j) - igd(pop). Exactly zero for duplicated points.
inline std::vector<double> igd_removal_loss(std::span<const FeaturePoint> pop, std::span<const FeaturePoint> ref) {
    std::vector<double> loss(pop.size(), 0.0);
    if (pop.size() < 2) {
        std::fill(loss.begin(), loss.end(), std::numeric_limits<double>::infinity());
        return loss;
    }
    for (const auto& r : ref) {
        double best = std::numeric_limits<double>::infinity();
        double second = best;
        std::size_t arg = 0;
        for (std::size_t j = 0; j < pop.size(); ++j) {
            const double d = feature_distance(r, pop[j]);
            if (d < best) {
                second = best;
                best = d;
                arg = j;
            } else if (d < second) {
                second = d;
            }
        }
        loss[arg] += second - best;
    }
    for (auto& l : loss)
        l /= static_cast<double>(ref.size());
    return loss;
}

// ---------------------------------------------------------------------------
// Dimension-doubling hypervolume

/// Hypervolume, w.r.t. the origin and under maximisation, of the images
/// (a, b, 1-a, 1-b) of the given feature points.
///
/// The box of p factorises into [0,a]x[0,1-a] times [0,b]x[0,1-b]. A slice
/// (u1, u3) of the first factor is covered exactly by the points whose a lies
/// in [u1, 1-u3], so the volume reduces to a double sum over sorted distinct
/// a-values of the 2-D staircase area formed by the b-values in that range:
///   HV = sum_{i<=j} (a_i - a_{i-1}) (a_{j+1} - a_j) G(i, j)
/// with a_0 = 0, a_{m+1} = 1 and G the area of the union of [0,b]x[0,1-b].
inline double doubled_hypervolume(std::span<const FeaturePoint> pts) {
    if (pts.empty())
        return 0.0;
    std::vector<FeaturePoint> sorted(pts.begin(), pts.end());
    std::sort(sorted.begin(), sorted.end());
    // group boundaries by distinct a
    std::vector<double> a;
    std::vector<std::size_t> group_begin;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (a.empty() || sorted[i][0] != a.back()) {
            a.push_back(sorted[i][0]);
            group_begin.push_back(i);
        }
    }
    group_begin.push_back(sorted.size());
    const std::size_t m = a.size();
    auto a_at = [&](std::size_t i) { return i == 0 ? 0.0 : (i > m ? 1.0 : a[i - 1]); }; // 1-based

    double hv = 0.0;
    std::set<double> bs;
    for (std::size_t i = 1; i <= m; ++i) {
        const double wi = a_at(i) - a_at(i - 1);
        bs.clear();
        double area = 0.0;
        for (std::size_t j = i; j <= m; ++j) {
            for (std::size_t q = group_begin[j - 1]; q < group_begin[j]; ++q) {
                const double b = sorted[q][1];
                const auto [it, inserted] = bs.insert(b);
                if (!inserted)
                    continue;
                const double prev = it == bs.begin() ? 0.0 : *std::prev(it);
                const auto nx = std::next(it);
                if (nx == bs.end()) {
                    area += (b - prev) * (1.0 - b);
                } else {
                    const double next = *nx;
                    area += (b - prev) * (1.0 - b) + (next - b) * (1.0 - next) - (next - prev) * (1.0 - next);
                }
            }
            if (wi > 0.0)
                hv += wi * (a_at(j + 1) - a_at(j)) * area;
        }
    }
    return hv;
}

/// loss[j] = HV(pop) - HV(pop without j), i.e. the exclusive contribution.
inline std::vector<double> hv_removal_loss(std::span<const FeaturePoint> pop) {
    std::vector<double> loss(pop.size(), 0.0);
    const double total = doubled_hypervolume(pop);
    std::vector<FeaturePoint> rest;
    rest.reserve(pop.size());
    for (std::size_t j = 0; j < pop.size(); ++j) {
        const bool duplicated = std::any_of(pop.begin(), pop.end(), [&](const auto& q) {
            return &q != &pop[j] && q == pop[j];
        });
        if (duplicated)
            continue;
        rest.clear();
        for (std::size_t q = 0; q < pop.size(); ++q)
            if (q != j)
                rest.push_back(pop[q]);
        loss[j] = std::max(0.0, total - doubled_hypervolume(rest));
    }
    return loss;
}

} // namespace qdgen
