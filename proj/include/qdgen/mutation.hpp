#pragma once

/// @file mutation.hpp
/// @brief Point-cloud mutation operators and operator suites.
///
/// Every operator copies the parent, perturbs a subset of points and clamps
/// the result back into the unit square. Parameters are plain named reals so
/// suites can be declared in run configs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <qdgen/error.hpp>
#include <qdgen/instance.hpp>
#include <qdgen/random.hpp>

namespace qdgen {

using Params = std::map<std::string, double, std::less<>>;

struct OperatorConfig {
    std::string id;
    Params params;
    bool enabled = true;

    double param(std::string_view name) const {
        const auto it = params.find(name);
        if (it == params.end())
            throw ValidationError("operator " + id + " lacks parameter '" + std::string(name) + "'");
        return it->second;
    }
};

namespace ops {

inline void check_rate(double p, std::string_view what) {
    if (!(p >= 0.0 && p <= 1.0))
        throw ValidationError(std::string(what) + " must lie in [0,1]");
}

inline void check_range(double lo, double hi, std::string_view what, bool allow_zero = false) {
    if (!(lo <= hi) || (allow_zero ? lo < 0.0 : lo <= 0.0))
        throw ValidationError(std::string(what) + " range must satisfy " + (allow_zero ? "0 <= " : "0 < ") +
                              "min <= max");
}

/// Each point independently, with probability p, gets fresh U[0,1]^2 coordinates.
inline std::vector<Point> relocate(std::span<const Point> parent, double p, Rng& rng) {
    check_rate(p, "relocate rate");
    std::vector<Point> pts(parent.begin(), parent.end());
    for (auto& q : pts)
        if (bernoulli(rng, p)) {
            q.x = uniform01(rng);
            q.y = uniform01(rng);
        }
    return pts;
}

/// Each point independently, with probability p, is offset by N(0, sigma^2 I), then clamped.
inline std::vector<Point> gaussian(std::span<const Point> parent, double p, double sigma, Rng& rng) {
    check_rate(p, "gaussian rate");
    if (sigma < 0.0)
        throw ValidationError("gaussian sigma must be >= 0");
    std::vector<Point> pts(parent.begin(), parent.end());
    for (auto& q : pts)
        if (bernoulli(rng, p)) {
            q.x += normal(rng, sigma);
            q.y += normal(rng, sigma);
            q = clamp_unit(q);
        }
    return pts;
}

/// Points within `radius` of `center` move to center + lambda (q - center).
inline std::vector<Point> implosion(std::span<const Point> parent, Point center, double radius, double lambda) {
    std::vector<Point> pts(parent.begin(), parent.end());
    const double r2 = radius * radius;
    for (auto& q : pts)
        if (squared_distance(q, center) <= r2)
            q = clamp_unit(Point{center.x + lambda * (q.x - center.x), center.y + lambda * (q.y - center.y)});
    return pts;
}

/// Points within `radius` of `center` are pushed along the ray from the
/// center to distance radius + lambda (radius - d); a point sitting exactly
/// on the center gets a random direction. Clamped afterwards.
inline std::vector<Point> explosion(std::span<const Point> parent, Point center, double radius, double lambda,
                                    Rng& rng) {
    std::vector<Point> pts(parent.begin(), parent.end());
    const double r2 = radius * radius;
    for (auto& q : pts) {
        const double d2 = squared_distance(q, center);
        if (d2 > r2)
            continue;
        double ux, uy;
        const double d = std::sqrt(d2);
        if (d > 0.0) {
            ux = (q.x - center.x) / d;
            uy = (q.y - center.y) / d;
        } else {
            const double a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
            ux = std::cos(a);
            uy = std::sin(a);
        }
        const double target = radius + lambda * (radius - d);
        q = clamp_unit(Point{center.x + target * ux, center.y + target * uy});
    }
    return pts;
}

/// Picks round(fraction * n) distinct indices uniformly.
inline std::vector<std::size_t> sample_subset(std::size_t n, double fraction, Rng& rng) {
    const auto m = static_cast<std::size_t>(std::lround(std::clamp(fraction, 0.0, 1.0) * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = i;
    // partial Fisher-Yates
    for (std::size_t i = 0; i < m; ++i)
        std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
    idx.resize(m);
    return idx;
}

/// Moves the given points to N(center, sigma^2 I), clamped.
inline std::vector<Point> cluster(std::span<const Point> parent, std::span<const std::size_t> subset, Point center,
                                  double sigma, Rng& rng) {
    std::vector<Point> pts(parent.begin(), parent.end());
    for (auto i : subset) {
        const double dx = normal(rng, sigma);
        const double dy = normal(rng, sigma);
        pts[i] = clamp_unit(Point{center.x + dx, center.y + dy});
    }
    return pts;
}

enum class Axis { x, y };

/// Projects the given points onto the axis-aligned line `coord = level`
/// (Axis::x fixes x, Axis::y fixes y).
inline std::vector<Point> axis_projection(std::span<const Point> parent, std::span<const std::size_t> subset,
                                          Axis axis, double level) {
    std::vector<Point> pts(parent.begin(), parent.end());
    level = clamp_unit(level);
    for (auto i : subset)
        (axis == Axis::x ? pts[i].x : pts[i].y) = level;
    return pts;
}

} // namespace ops

// ---------------------------------------------------------------------------
// Registry

/// Applies a configured operator to a parent's points.
using OperatorFn = std::function<std::vector<Point>(std::span<const Point>, const OperatorConfig&, Rng&)>;

struct OperatorEntry {
    OperatorFn apply;
    Params defaults;
    std::function<void(const OperatorConfig&)> validate;
};

inline const std::map<std::string, OperatorEntry, std::less<>>& operator_registry() {
    using namespace ops;
    static const std::map<std::string, OperatorEntry, std::less<>> reg{
        {"relocate",
         {[](std::span<const Point> p, const OperatorConfig& c, Rng& rng) {
              return relocate(p, c.param("rate"), rng);
          },
          {{"rate", 0.1}},
          [](const OperatorConfig& c) { check_rate(c.param("rate"), "relocate rate"); }}},
        {"gaussian",
         {[](std::span<const Point> p, const OperatorConfig& c, Rng& rng) {
              const double sigma = uniform(rng, c.param("sigma_min"), c.param("sigma_max"));
              return gaussian(p, c.param("rate"), sigma, rng);
          },
          {{"rate", 0.1}, {"sigma_min", 0.01}, {"sigma_max", 0.1}},
          [](const OperatorConfig& c) {
              check_rate(c.param("rate"), "gaussian rate");
              check_range(c.param("sigma_min"), c.param("sigma_max"), "gaussian sigma", true);
          }}},
        {"implosion",
         {[](std::span<const Point> p, const OperatorConfig& c, Rng& rng) {
              const Point center{uniform01(rng), uniform01(rng)};
              const double radius = uniform(rng, c.param("radius_min"), c.param("radius_max"));
              const double lambda = uniform(rng, c.param("lambda_min"), c.param("lambda_max"));
              return implosion(p, center, radius, lambda);
          },
          {{"radius_min", 0.1}, {"radius_max", 0.4}, {"lambda_min", 0.1}, {"lambda_max", 0.9}},
          [](const OperatorConfig& c) {
              check_range(c.param("radius_min"), c.param("radius_max"), "implosion radius", true);
              check_range(c.param("lambda_min"), c.param("lambda_max"), "implosion lambda", true);
              if (c.param("lambda_max") > 1.0)
                  throw ValidationError("implosion lambda must stay within [0,1]");
          }}},
        {"explosion",
         {[](std::span<const Point> p, const OperatorConfig& c, Rng& rng) {
              const Point center{uniform01(rng), uniform01(rng)};
              const double radius = uniform(rng, c.param("radius_min"), c.param("radius_max"));
              const double lambda = uniform(rng, c.param("lambda_min"), c.param("lambda_max"));
              return explosion(p, center, radius, lambda, rng);
          },
          {{"radius_min", 0.1}, {"radius_max", 0.4}, {"lambda_min", 0.1}, {"lambda_max", 0.9}},
          [](const OperatorConfig& c) {
              check_range(c.param("radius_min"), c.param("radius_max"), "explosion radius", true);
              check_range(c.param("lambda_min"), c.param("lambda_max"), "explosion lambda", true);
          }}},
        {"cluster",
         {[](std::span<const Point> p, const OperatorConfig& c, Rng& rng) {
              const Point center{uniform01(rng), uniform01(rng)};
              const double frac = uniform(rng, c.param("fraction_min"), c.param("fraction_max"));
              const auto subset = sample_subset(p.size(), frac, rng);
              return cluster(p, subset, center, c.param("sigma"), rng);
          },
          {{"fraction_min", 0.1}, {"fraction_max", 0.5}, {"sigma", 0.02}},
          [](const OperatorConfig& c) {
              check_range(c.param("fraction_min"), c.param("fraction_max"), "cluster fraction", true);
              check_rate(c.param("fraction_max"), "cluster fraction");
              if (c.param("sigma") < 0.0)
                  throw ValidationError("cluster sigma must be >= 0");
          }}},
        {"axis_projection",
         {[](std::span<const Point> p, const OperatorConfig& c, Rng& rng) {
              const double frac = uniform(rng, c.param("fraction_min"), c.param("fraction_max"));
              const auto subset = sample_subset(p.size(), frac, rng);
              const Axis axis = bernoulli(rng, 0.5) ? Axis::x : Axis::y;
              const double level = uniform01(rng);
              return axis_projection(p, subset, axis, level);
          },
          {{"fraction_min", 0.2}, {"fraction_max", 0.8}},
          [](const OperatorConfig& c) {
              check_range(c.param("fraction_min"), c.param("fraction_max"), "axis_projection fraction", true);
              check_rate(c.param("fraction_max"), "axis_projection fraction");
          }}},
    };
    return reg;
}

/// Operator config with registry defaults, overridden by `overrides`.
inline OperatorConfig make_operator(std::string_view id, const Params& overrides = {}) {
    const auto& reg = operator_registry();
    const auto it = reg.find(id);
    if (it == reg.end())
        throw ValidationError("unknown mutation operator '" + std::string(id) + "'");
    OperatorConfig c{std::string(id), it->second.defaults, true};
    for (const auto& [k, v] : overrides) {
        if (!c.params.contains(k))
            throw ValidationError("operator " + c.id + " has no parameter '" + k + "'");
        c.params[k] = v;
    }
    it->second.validate(c);
    return c;
}

struct OperatorSuite {
    std::string id;
    std::vector<OperatorConfig> operators; // enabled operators only

    void validate() const {
        if (operators.empty())
            throw ValidationError("mutation suite '" + id + "' has no enabled operators");
        for (const auto& op : operators) {
            const auto it = operator_registry().find(op.id);
            if (it == operator_registry().end())
                throw ValidationError("unknown mutation operator '" + op.id + "'");
            it->second.validate(op);
        }
    }
};

inline OperatorSuite make_suite(std::string id, const std::vector<OperatorConfig>& configs) {
    OperatorSuite s{std::move(id), {}};
    for (const auto& c : configs)
        if (c.enabled)
            s.operators.push_back(c);
    s.validate();
    return s;
}

/// "simple" = {relocate, gaussian}; "all" adds the four disruptive operators.
inline OperatorSuite builtin_suite(std::string_view id) {
    if (id == "simple")
        return make_suite("simple", {make_operator("relocate"), make_operator("gaussian")});
    if (id == "all")
        return make_suite("all", {make_operator("relocate"), make_operator("gaussian"), make_operator("implosion"),
                                  make_operator("explosion"), make_operator("cluster"),
                                  make_operator("axis_projection")});
    throw ValidationError("unknown mutation suite '" + std::string(id) + "'");
}

inline Instance apply_operator(const Instance& parent, const OperatorConfig& op, Rng& rng) {
    const auto& reg = operator_registry();
    const auto it = reg.find(op.id);
    if (it == reg.end())
        throw ValidationError("unknown mutation operator '" + op.id + "'");
    Provenance meta;
    if (parent.meta())
        meta.parent_iteration = parent.meta()->iteration;
    meta.op = op.id;
    return Instance(it->second.apply(parent.points(), op, rng), std::move(meta));
}

/// Picks one operator uniformly at random and applies it.
inline Instance mutate(const Instance& parent, const OperatorSuite& suite, Rng& rng) {
    if (suite.operators.empty())
        throw ValidationError("mutate: empty suite");
    const auto& op = suite.operators[uniform_index(rng, suite.operators.size())];
    return apply_operator(parent, op, rng);
}

// Convenience wrappers over Instance.

inline Instance op_relocate(const Instance& inst, double p, Rng& rng) {
    return apply_operator(inst, make_operator("relocate", {{"rate", p}}), rng);
}

inline Instance op_gaussian(const Instance& inst, double p, double sigma, Rng& rng) {
    return apply_operator(inst, make_operator("gaussian", {{"rate", p}, {"sigma_min", sigma}, {"sigma_max", sigma}}),
                          rng);
}

inline Instance op_implosion(const Instance& inst, Rng& rng) {
    return apply_operator(inst, make_operator("implosion"), rng);
}

inline Instance op_explosion(const Instance& inst, Rng& rng) {
    return apply_operator(inst, make_operator("explosion"), rng);
}

inline Instance op_cluster(const Instance& inst, Rng& rng) {
    return apply_operator(inst, make_operator("cluster"), rng);
}

inline Instance op_axis_projection(const Instance& inst, Rng& rng) {
    return apply_operator(inst, make_operator("axis_projection"), rng);
}

} // namespace qdgen
