#pragma once

/// Independent reference implementations used as test oracles. They favour
/// obviousness over speed and share no code with the library beyond Point.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <qdgen/instance.hpp>

namespace oracle {

using qdgen::Point;
using Matrix = std::vector<std::vector<bool>>;

inline double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// k nearest neighbours of every node by full sort; ties broken by index.
inline std::vector<std::vector<std::size_t>> knn(const std::vector<Point>& p, std::size_t k) {
    std::vector<std::vector<std::size_t>> out(p.size());
    for (std::size_t v = 0; v < p.size(); ++v) {
        std::vector<std::pair<double, std::size_t>> c;
        for (std::size_t u = 0; u < p.size(); ++u)
            if (u != v)
                c.push_back({(p[v].x - p[u].x) * (p[v].x - p[u].x) + (p[v].y - p[u].y) * (p[v].y - p[u].y), u});
        std::sort(c.begin(), c.end());
        for (std::size_t i = 0; i < k && i < c.size(); ++i)
            out[v].push_back(c[i].second);
    }
    return out;
}

/// Reflexive transitive closure by Floyd-Warshall.
inline Matrix closure(const std::vector<std::vector<std::size_t>>& adj, bool undirected) {
    const std::size_t n = adj.size();
    Matrix r(n, std::vector<bool>(n, false));
    for (std::size_t v = 0; v < n; ++v) {
        r[v][v] = true;
        for (auto u : adj[v]) {
            r[v][u] = true;
            if (undirected)
                r[u][v] = true;
        }
    }
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t i = 0; i < n; ++i)
            if (r[i][m])
                for (std::size_t j = 0; j < n; ++j)
                    if (r[m][j])
                        r[i][j] = true;
    return r;
}

/// Sizes of the equivalence classes of "mutually reachable".
inline std::vector<std::size_t> classes(const Matrix& r) {
    const std::size_t n = r.size();
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i < n; ++i) {
        if (seen[i])
            continue;
        std::size_t s = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (r[i][j] && r[j][i]) {
                seen[j] = true;
                ++s;
            }
        sizes.push_back(s);
    }
    return sizes;
}

/// Minimum spanning tree weight by enumerating every labelled tree through
/// its Pruefer sequence.
inline double exhaustive_mst_weight(const std::vector<Point>& p) {
    const std::size_t n = p.size();
    if (n == 2)
        return dist(p[0], p[1]);
    std::vector<std::size_t> seq(n - 2, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<std::size_t> degree(n, 1);
        for (auto s : seq)
            ++degree[s];
        double w = 0.0;
        for (auto s : seq) {
            std::size_t leaf = 0;
            while (degree[leaf] != 1)
                ++leaf;
            w += dist(p[leaf], p[s]);
            --degree[leaf];
            --degree[s];
        }
        std::size_t a = n, b = n;
        for (std::size_t v = 0; v < n; ++v)
            if (degree[v] == 1)
                (a == n ? a : b) = v;
        w += dist(p[a], p[b]);
        best = std::min(best, w);
        std::size_t i = 0;
        while (i < seq.size() && ++seq[i] == n)
            seq[i++] = 0;
        if (i == seq.size())
            break;
    }
    return best;
}

inline double cycle_length(const std::vector<Point>& p, const std::vector<std::size_t>& order) {
    double s = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i)
        s += dist(p[order[i]], p[order[(i + 1) % order.size()]]);
    return s;
}

/// Optimal tour length by enumerating all permutations with city 0 fixed.
inline double optimal_tour(const std::vector<Point>& p) {
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        best = std::min(best, cycle_length(p, order));
    } while (std::next_permutation(order.begin() + 1, order.end()));
    return best;
}

inline std::vector<Point> random_points(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> p(n);
    for (auto& q : p)
        q = {u(rng), u(rng)};
    return p;
}

} // namespace oracle

namespace testing_support {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("qdgen_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testing_support
