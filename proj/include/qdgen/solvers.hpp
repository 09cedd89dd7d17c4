#pragma once

/// @file solvers.hpp
/// @brief Insertion construction heuristics and the tour-length-ratio objective.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <qdgen/error.hpp>
#include <qdgen/instance.hpp>
#include <qdgen/random.hpp>

namespace qdgen {

using CityId = std::uint32_t;

struct Tour {
    std::vector<CityId> order;
    double length = 0.0;
};

/// Dense symmetric Euclidean distance matrix.
class DistanceMatrix {
  public:
    explicit DistanceMatrix(std::span<const Point> pts) : n_(pts.size()), d_(n_ * n_, 0.0) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j)
                d_[i * n_ + j] = d_[j * n_ + i] = distance(pts[i], pts[j]);
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }
    const double* row(std::size_t i) const noexcept { return d_.data() + i * n_; }

  private:
    std::size_t n_;
    std::vector<double> d_;
};

/// Throws ValidationError unless `order` is a permutation of 0..n-1.
inline void check_permutation(std::span<const CityId> order, std::size_t n) {
    if (order.size() != n)
        throw ValidationError("tour has " + std::to_string(order.size()) + " cities, expected " +
                              std::to_string(n));
    std::vector<bool> seen(n, false);
    for (CityId c : order) {
        if (c >= n || seen[c])
            throw ValidationError("tour is not a permutation (city " + std::to_string(c) + ")");
        seen[c] = true;
    }
}

/// Closed-cycle Euclidean length.
inline double tour_length(std::span<const Point> pts, std::span<const CityId> order) {
    check_permutation(order, pts.size());
    double len = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i)
        len += distance(pts[order[i]], pts[order[(i + 1) % order.size()]]);
    return len;
}

inline double tour_length(const Instance& inst, std::span<const CityId> order) {
    return tour_length(inst.points(), order);
}

enum class InsertionRule { farthest, nearest };

/// Generic insertion heuristic. Selection: the unvisited city whose distance
/// to the partial tour is largest (farthest) or smallest (nearest), lowest
/// index on ties. Placement: cheapest d(a,v)+d(v,b)-d(a,b) over the edges of
/// the partial tour read from the start city, earliest position on ties.
inline Tour insertion_tour(const DistanceMatrix& d, std::size_t start, InsertionRule rule) {
    const std::size_t n = d.size();
    if (start >= n)
        throw ValidationError("start node out of range");
    const bool farthest = rule == InsertionRule::farthest;

    // Partial tour in order; edge_len[i] = d(order[i], order[i+1 mod m]).
    Tour t;
    t.order.reserve(n);
    t.order.push_back(static_cast<CityId>(start));
    std::vector<double> edge_len;
    edge_len.reserve(n);
    edge_len.push_back(0.0);

    // Unvisited cities in increasing index order, so a strict comparison
    // during the scan keeps the lowest index on ties.
    std::vector<CityId> open;
    std::vector<double> to_tour;
    open.reserve(n);
    to_tour.reserve(n);
    const double* ds = d.row(start);
    for (std::size_t v = 0; v < n; ++v)
        if (v != start) {
            open.push_back(static_cast<CityId>(v));
            to_tour.push_back(ds[v]);
        }

    auto select = [&]() {
        std::size_t best = 0;
        double bv = to_tour[0];
        for (std::size_t i = 1; i < to_tour.size(); ++i) {
            const double x = to_tour[i];
            const bool better = farthest ? x > bv : x < bv;
            best = better ? i : best;
            bv = better ? x : bv;
        }
        return best;
    };

    std::size_t slot = open.empty() ? 0 : select();
    while (!open.empty()) {
        const CityId v = open[slot];
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(slot));
        to_tour.erase(to_tour.begin() + static_cast<std::ptrdiff_t>(slot));

        const double* dv = d.row(v);
        const std::size_t m = t.order.size();
        std::size_t pos = 0;
        if (m == 1) {
            edge_len[0] = dv[t.order[0]];
            t.order.push_back(v);
            edge_len.push_back(dv[t.order[0]]);
        } else {
            double best_cost = std::numeric_limits<double>::infinity();
            const CityId* ord = t.order.data();
            double da = dv[ord[0]];
            for (std::size_t i = 0; i < m; ++i) {
                const double db = dv[ord[i + 1 == m ? 0 : i + 1]];
                const double cost = da + db - edge_len[i];
                const bool better = cost < best_cost;
                pos = better ? i : pos;
                best_cost = better ? cost : best_cost;
                da = db;
            }
            const CityId a = t.order[pos];
            const CityId b = t.order[pos + 1 == m ? 0 : pos + 1];
            edge_len[pos] = dv[a];
            t.order.insert(t.order.begin() + static_cast<std::ptrdiff_t>(pos) + 1, v);
            edge_len.insert(edge_len.begin() + static_cast<std::ptrdiff_t>(pos) + 1, dv[b]);
        }

        // refresh distances to the tour and pick the next city in one pass
        if (open.empty())
            break;
        std::size_t best = 0;
        double bv = 0.0;
        for (std::size_t i = 0; i < open.size(); ++i) {
            const double x = std::min(to_tour[i], dv[open[i]]);
            to_tour[i] = x;
            const bool better = i == 0 || (farthest ? x > bv : x < bv);
            best = better ? i : best;
            bv = better ? x : bv;
        }
        slot = best;
    }
    for (double e : edge_len)
        t.length += e;
    if (n == 1)
        t.length = 0.0;
    return t;
}

inline Tour farthest_insertion(const DistanceMatrix& d, std::size_t start) {
    return insertion_tour(d, start, InsertionRule::farthest);
}

inline Tour nearest_insertion(const DistanceMatrix& d, std::size_t start) {
    return insertion_tour(d, start, InsertionRule::nearest);
}

inline Tour farthest_insertion(std::span<const Point> pts, std::size_t start) {
    return farthest_insertion(DistanceMatrix(pts), start);
}

inline Tour nearest_insertion(std::span<const Point> pts, std::size_t start) {
    return nearest_insertion(DistanceMatrix(pts), start);
}

inline Tour farthest_insertion(const Instance& inst, std::size_t start) {
    return farthest_insertion(inst.points(), start);
}

inline Tour nearest_insertion(const Instance& inst, std::size_t start) {
    return nearest_insertion(inst.points(), start);
}

// ---------------------------------------------------------------------------
// Solver registry

using SolverFn = std::function<Tour(const DistanceMatrix&, std::size_t start)>;

inline const std::map<std::string, SolverFn, std::less<>>& builtin_solvers() {
    static const std::map<std::string, SolverFn, std::less<>> reg{
        {"FI", [](const DistanceMatrix& d, std::size_t s) { return farthest_insertion(d, s); }},
        {"NI", [](const DistanceMatrix& d, std::size_t s) { return nearest_insertion(d, s); }},
    };
    return reg;
}

inline const SolverFn& solver(std::string_view id) {
    const auto& reg = builtin_solvers();
    const auto it = reg.find(id);
    if (it == reg.end())
        throw ValidationError("unknown solver '" + std::string(id) + "'");
    return it->second;
}

// ---------------------------------------------------------------------------
// Objective

struct ObjectiveSpec {
    std::string numerator = "FI";
    std::string denominator = "NI";
    std::size_t repetitions = 5;
    /// Reuse the numerator's start nodes for the denominator.
    bool shared_starts = false;

    std::string label() const { return numerator + " vs " + denominator; }

    void validate() const {
        if (repetitions < 1)
            throw ValidationError("objective repetitions must be >= 1");
        solver(numerator);
        solver(denominator);
        if (numerator == denominator)
            throw ValidationError("objective solvers must differ");
    }
};

struct ObjectiveValue {
    double numerator_mean = 0.0;
    double denominator_mean = 0.0;
    double ratio = 1.0;
    bool degenerate = false;
};

/// Ratio of mean tour lengths. Returns 1 (flagged degenerate) when both
/// means are zero, i.e. all cities coincide.
inline double ratio_of_means(double numerator_mean, double denominator_mean, bool* degenerate = nullptr) {
    const bool deg = !(denominator_mean > 0.0) || !(numerator_mean > 0.0);
    if (degenerate)
        *degenerate = deg;
    return deg ? 1.0 : numerator_mean / denominator_mean;
}

inline double mean_tour_length(const DistanceMatrix& d, const SolverFn& fn, std::span<const std::size_t> starts) {
    double sum = 0.0;
    for (auto s : starts)
        sum += fn(d, s).length;
    return sum / static_cast<double>(starts.size());
}

/// Evaluates the objective without spec validation; solvers need not differ.
inline ObjectiveValue evaluate_objective(std::span<const Point> pts, const ObjectiveSpec& spec, Rng& rng) {
    const DistanceMatrix d(pts);
    const std::size_t n = pts.size();
    std::vector<std::size_t> starts_num(spec.repetitions), starts_den(spec.repetitions);
    for (auto& s : starts_num)
        s = uniform_index(rng, n);
    if (spec.shared_starts) {
        starts_den = starts_num;
    } else {
        for (auto& s : starts_den)
            s = uniform_index(rng, n);
    }
    ObjectiveValue v;
    v.numerator_mean = mean_tour_length(d, solver(spec.numerator), starts_num);
    v.denominator_mean = mean_tour_length(d, solver(spec.denominator), starts_den);
    v.ratio = ratio_of_means(v.numerator_mean, v.denominator_mean, &v.degenerate);
    return v;
}

inline double objective_ratio(const Instance& inst, const ObjectiveSpec& spec, Rng& rng) {
    spec.validate();
    return evaluate_objective(inst.points(), spec, rng).ratio;
}

} // namespace qdgen
