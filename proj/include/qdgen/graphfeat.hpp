#pragma once

/// @file graphfeat.hpp
/// @brief Discrete instance features from k-nearest-neighbour graphs and
/// minimum spanning trees, plus the box keys derived from them.
///
/// All distance comparisons use squared Euclidean distance with ties broken
/// by node index, so the graphs (and therefore box keys) are reproducible
/// bit-for-bit across runs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <qdgen/error.hpp>
#include <qdgen/instance.hpp>

namespace qdgen {

using NodeId = std::uint32_t;
using Components = std::vector<std::vector<NodeId>>;

/// Directed k-NN graph: out_edges holds k neighbours per node, nearest first.
struct KnnGraph {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<NodeId> out_edges;

    std::span<const NodeId> neighbors(std::size_t v) const noexcept {
        return std::span<const NodeId>(out_edges).subspan(v * k, k);
    }
};

inline KnnGraph knn_graph(std::span<const Point> pts, std::size_t k) {
    const std::size_t n = pts.size();
    if (k == 0 || k >= n)
        throw ValidationError("knn_graph: need 0 < k < n (k=" + std::to_string(k) +
                              ", n=" + std::to_string(n) + ")");
    KnnGraph g{n, k, std::vector<NodeId>(n * k)};
    // sorted top-k buffer of (squared distance, index); scanning u in
    // increasing order and inserting only on strict improvement keeps the
    // lowest index among equal distances
    std::vector<double> bd(k);
    std::vector<NodeId> bi(k);
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t filled = 0;
        const Point pv = pts[v];
        for (std::size_t u = 0; u < n; ++u) {
            if (u == v)
                continue;
            const double dd = squared_distance(pv, pts[u]);
            if (filled == k && !(dd < bd[k - 1]))
                continue;
            std::size_t pos = filled < k ? filled++ : k - 1;
            while (pos > 0 && dd < bd[pos - 1]) {
                bd[pos] = bd[pos - 1];
                bi[pos] = bi[pos - 1];
                --pos;
            }
            bd[pos] = dd;
            bi[pos] = static_cast<NodeId>(u);
        }
        std::copy(bi.begin(), bi.end(), g.out_edges.begin() + static_cast<std::ptrdiff_t>(v * k));
    }
    return g;
}

inline KnnGraph knn_graph(const Instance& inst, std::size_t k) { return knn_graph(inst.points(), k); }

namespace detail {

struct DisjointSets {
    std::vector<NodeId> parent;
    std::vector<std::uint8_t> rank;

    explicit DisjointSets(std::size_t n) : parent(n), rank(n, 0) {
        std::iota(parent.begin(), parent.end(), NodeId{0});
    }
    NodeId find(NodeId x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(NodeId a, NodeId b) {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        if (rank[a] < rank[b])
            std::swap(a, b);
        parent[b] = a;
        if (rank[a] == rank[b])
            ++rank[a];
        return true;
    }
};

/// Groups nodes by label; components ordered by their smallest node.
inline Components group_by_label(std::span<const NodeId> label) {
    std::vector<NodeId> slot(label.size(), std::numeric_limits<NodeId>::max());
    Components out;
    for (std::size_t v = 0; v < label.size(); ++v) {
        auto& s = slot[label[v]];
        if (s == std::numeric_limits<NodeId>::max()) {
            s = static_cast<NodeId>(out.size());
            out.emplace_back();
        }
        out[s].push_back(static_cast<NodeId>(v));
    }
    return out;
}

} // namespace detail

/// Connected components of the underlying undirected graph (mutual edges collapse).
inline Components weak_components(const KnnGraph& g) {
    detail::DisjointSets ds(g.n);
    for (std::size_t v = 0; v < g.n; ++v)
        for (NodeId u : g.neighbors(v))
            ds.unite(static_cast<NodeId>(v), u);
    std::vector<NodeId> label(g.n);
    for (std::size_t v = 0; v < g.n; ++v)
        label[v] = ds.find(static_cast<NodeId>(v));
    return detail::group_by_label(label);
}

/// Strongly connected components, iterative Tarjan.
inline Components strong_components(const KnnGraph& g) {
    constexpr NodeId unvisited = std::numeric_limits<NodeId>::max();
    const std::size_t n = g.n;
    std::vector<NodeId> index(n, unvisited), low(n, 0), comp(n, unvisited);
    std::vector<bool> on_stack(n, false);
    std::vector<NodeId> stack;
    std::vector<std::pair<NodeId, std::size_t>> call; // (node, next edge)
    NodeId next_index = 0;
    NodeId next_comp = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited)
            continue;
        call.emplace_back(static_cast<NodeId>(root), 0);
        while (!call.empty()) {
            auto& [v, e] = call.back();
            if (e == 0) {
                index[v] = low[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            const auto nb = g.neighbors(v);
            bool descended = false;
            while (e < nb.size()) {
                const NodeId w = nb[e++];
                if (index[w] == unvisited) {
                    call.emplace_back(w, 0);
                    descended = true;
                    break;
                }
                if (on_stack[w])
                    low[v] = std::min(low[v], index[w]);
            }
            if (descended)
                continue;
            const NodeId done = v;
            if (low[done] == index[done]) {
                NodeId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = next_comp;
                } while (w != done);
                ++next_comp;
            }
            call.pop_back();
            if (!call.empty()) {
                const NodeId parent = call.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
        }
    }
    return detail::group_by_label(comp);
}

inline std::size_t max_component_size(const Components& cs) {
    std::size_t m = 0;
    for (const auto& c : cs)
        m = std::max(m, c.size());
    return m;
}

// ---------------------------------------------------------------------------
// Minimum spanning tree

/// MST rooted at node 0. parent[root] == root.
struct MstTree {
    std::vector<NodeId> parent;
    std::vector<std::uint32_t> depth;
    double total_weight = 0.0;
};

/// Prim's algorithm on the complete Euclidean graph. Edges are totally
/// ordered by (squared length, min endpoint, max endpoint), which makes the
/// tree unique; it equals Kruskal with lexicographic tie-breaking.
inline MstTree mst(std::span<const Point> pts) {
    const std::size_t n = pts.size();
    if (n < 2)
        throw ValidationError("mst: need at least 2 points");

    // is edge (v, via_v) with weight wv lighter than (u, via_u) with weight wu?
    auto lighter = [](double wv, NodeId v, NodeId via_v, double wu, NodeId u, NodeId via_u) {
        if (wv != wu)
            return wv < wu;
        const auto [v_lo, v_hi] = std::minmax(v, via_v);
        const auto [u_lo, u_hi] = std::minmax(u, via_u);
        return v_lo != u_lo ? v_lo < u_lo : v_hi < u_hi;
    };

    MstTree t;
    t.parent.assign(n, 0);
    t.depth.assign(n, 0);

    std::vector<NodeId> open;
    std::vector<double> best;
    std::vector<NodeId> via;
    open.reserve(n);
    for (std::size_t v = 1; v < n; ++v) {
        open.push_back(static_cast<NodeId>(v));
        best.push_back(squared_distance(pts[0], pts[v]));
        via.push_back(0);
    }
    std::vector<NodeId> order{0}; // attach order; parents precede children
    order.reserve(n);
    while (!open.empty()) {
        std::size_t s = 0;
        for (std::size_t i = 1; i < open.size(); ++i)
            if (lighter(best[i], open[i], via[i], best[s], open[s], via[s]))
                s = i;
        const NodeId pick = open[s];
        t.parent[pick] = via[s];
        t.depth[pick] = t.depth[via[s]] + 1;
        t.total_weight += std::sqrt(best[s]);
        order.push_back(pick);
        open[s] = open.back();
        open.pop_back();
        best[s] = best.back();
        best.pop_back();
        via[s] = via.back();
        via.pop_back();
        const Point pp = pts[pick];
        for (std::size_t i = 0; i < open.size(); ++i) {
            const double dd = squared_distance(pp, pts[open[i]]);
            if (lighter(dd, open[i], pick, best[i], open[i], via[i])) {
                best[i] = dd;
                via[i] = pick;
            }
        }
    }
    return t;
}

inline MstTree mst(const Instance& inst) { return mst(inst.points()); }

/// Median of node depths; mean of the central pair for even n.
inline double mst_depth_median(const MstTree& tree) {
    std::vector<std::uint32_t> d = tree.depth;
    if (d.empty())
        throw ValidationError("mst_depth_median: empty tree");
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    const double upper = d[mid];
    if (d.size() % 2 == 1)
        return upper;
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

// ---------------------------------------------------------------------------
// Feature sets and box keys

enum class FeatureKind { nng_strong_components_max, nng_n_weak, nng_n_strong, mst_depth_median };

inline std::string_view feature_kind_name(FeatureKind k) {
    switch (k) {
    case FeatureKind::nng_strong_components_max: return "nng_strong_components_max";
    case FeatureKind::nng_n_weak: return "nng_n_weak";
    case FeatureKind::nng_n_strong: return "nng_n_strong";
    case FeatureKind::mst_depth_median: return "mst_depth_median";
    }
    return "?";
}

inline FeatureKind parse_feature_kind(std::string_view s) {
    for (auto k : {FeatureKind::nng_strong_components_max, FeatureKind::nng_n_weak,
                   FeatureKind::nng_n_strong, FeatureKind::mst_depth_median})
        if (feature_kind_name(k) == s)
            return k;
    throw ValidationError("unknown feature '" + std::string(s) + "'");
}

struct FeatureDef {
    FeatureKind kind;
    std::size_t k = 0; // neighbourhood size; unused for MST features

    std::string name() const {
        if (kind == FeatureKind::mst_depth_median)
            return std::string(feature_kind_name(kind));
        // e.g. nng_3_n_weak
        auto base = std::string(feature_kind_name(kind));
        return "nng_" + std::to_string(k) + base.substr(3);
    }

    friend bool operator==(const FeatureDef&, const FeatureDef&) = default;
};

struct FeatureSet {
    std::string id;
    std::vector<FeatureDef> features;

    /// Smallest n for which every feature is defined.
    std::size_t min_n() const {
        std::size_t m = Instance::min_size;
        for (const auto& f : features)
            if (f.kind != FeatureKind::mst_depth_median)
                m = std::max(m, f.k + 1);
        return m;
    }
};

inline FeatureSet fc1() {
    return {"FC1", {{FeatureKind::nng_strong_components_max, 3}, {FeatureKind::nng_n_weak, 3}}};
}

inline FeatureSet fc2() {
    return {"FC2", {{FeatureKind::nng_n_strong, 5}, {FeatureKind::mst_depth_median, 0}}};
}

/// Built-in registry lookup ("FC1", "FC2").
inline FeatureSet feature_set(std::string_view id) {
    if (id == "FC1")
        return fc1();
    if (id == "FC2")
        return fc2();
    throw ValidationError("unknown feature set '" + std::string(id) + "'");
}

/// Archive key: feature values stored as doubled integers so half-integral
/// medians stay exact.
struct BoxKey {
    std::vector<std::int32_t> halves;

    friend bool operator==(const BoxKey&, const BoxKey&) = default;
    friend auto operator<=>(const BoxKey&, const BoxKey&) = default;

    double value(std::size_t i) const { return 0.5 * halves[i]; }

    /// "12;3.5"
    std::string to_string() const {
        std::string s;
        char buf[32];
        for (std::size_t i = 0; i < halves.size(); ++i) {
            if (i)
                s += ';';
            std::snprintf(buf, sizeof buf, "%.17g", 0.5 * halves[i]);
            s += buf;
        }
        return s;
    }

    static BoxKey parse(std::string_view s) {
        BoxKey k;
        std::size_t pos = 0;
        while (pos <= s.size()) {
            auto end = s.find(';', pos);
            if (end == std::string_view::npos)
                end = s.size();
            std::string part(s.substr(pos, end - pos));
            char* stop = nullptr;
            const double v = std::strtod(part.c_str(), &stop);
            if (part.empty() || stop != part.c_str() + part.size())
                throw ParseError("bad box key '" + std::string(s) + "'", 0);
            const double twice = 2.0 * v;
            if (twice != std::round(twice))
                throw ParseError("box key component is not a half-integer: " + part, 0);
            k.halves.push_back(static_cast<std::int32_t>(twice));
            pos = end + 1;
        }
        return k;
    }
};

struct BoxKeyHash {
    std::size_t operator()(const BoxKey& k) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (auto v : k.halves) {
            h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(v));
            h *= 1099511628211ULL;
        }
        return h;
    }
};

struct FeatureVector {
    std::string feature_set_id;
    std::vector<double> values;

    BoxKey key() const {
        BoxKey k;
        k.halves.reserve(values.size());
        for (double v : values)
            k.halves.push_back(static_cast<std::int32_t>(std::lround(2.0 * v)));
        return k;
    }
};

inline FeatureVector feature_vector(std::span<const Point> pts, const FeatureSet& set) {
    const std::size_t n = pts.size();
    if (n < set.min_n())
        throw ValidationError("feature set " + set.id + " needs n >= " + std::to_string(set.min_n()));
    std::map<std::size_t, KnnGraph> graphs;
    auto graph = [&](std::size_t k) -> const KnnGraph& {
        auto it = graphs.find(k);
        if (it == graphs.end())
            it = graphs.emplace(k, knn_graph(pts, k)).first;
        return it->second;
    };
    FeatureVector fv{set.id, {}};
    fv.values.reserve(set.features.size());
    for (const auto& f : set.features) {
        switch (f.kind) {
        case FeatureKind::nng_strong_components_max:
            fv.values.push_back(static_cast<double>(max_component_size(strong_components(graph(f.k)))));
            break;
        case FeatureKind::nng_n_weak:
            fv.values.push_back(static_cast<double>(weak_components(graph(f.k)).size()));
            break;
        case FeatureKind::nng_n_strong:
            fv.values.push_back(static_cast<double>(strong_components(graph(f.k)).size()));
            break;
        case FeatureKind::mst_depth_median:
            fv.values.push_back(mst_depth_median(mst(pts)));
            break;
        }
    }
    return fv;
}

inline FeatureVector feature_vector(const Instance& inst, const FeatureSet& set) {
    return feature_vector(inst.points(), set);
}

inline FeatureVector feature_vector(const Instance& inst, std::string_view feature_set_id) {
    return feature_vector(inst.points(), feature_set(feature_set_id));
}

// ---------------------------------------------------------------------------
// Normalisation

struct FeatureBounds {
    double lower;
    double upper;
};

/// Theoretical range of a feature for instances of size n.
///  - max SCC size: a sink SCC of the condensation holds all k out-edges of
///    its members, so it has at least k+1 nodes.
///  - weak / strong component count: 1 .. n-k.
///  - median MST depth (root 0, n >= 3): 1 .. (n-1)/2.
inline FeatureBounds feature_bounds(const FeatureDef& f, std::size_t n) {
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(f.k);
    switch (f.kind) {
    case FeatureKind::nng_strong_components_max: return {kd + 1.0, nd};
    case FeatureKind::nng_n_weak:
    case FeatureKind::nng_n_strong: return {1.0, nd - kd};
    case FeatureKind::mst_depth_median: return {n >= 3 ? 1.0 : 0.5 * (nd - 1.0), 0.5 * (nd - 1.0)};
    }
    return {0.0, 1.0};
}

/// Affine map of [lower, upper] onto [0, 1]. Reporting only; archives key on raw values.
inline double normalize_feature(double value, const FeatureDef& f, std::size_t n) {
    const auto b = feature_bounds(f, n);
    if (value < b.lower || value > b.upper)
        throw ValidationError(f.name() + " value " + std::to_string(value) + " outside [" +
                              std::to_string(b.lower) + ", " + std::to_string(b.upper) + "] for n=" +
                              std::to_string(n));
    if (b.upper == b.lower)
        return 0.0;
    return (value - b.lower) / (b.upper - b.lower);
}

inline std::vector<double> normalize(const BoxKey& key, const FeatureSet& set, std::size_t n) {
    std::vector<double> out(key.halves.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = normalize_feature(key.value(i), set.features.at(i), n);
    return out;
}

} // namespace qdgen
