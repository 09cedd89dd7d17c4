#pragma once

/// @file instance.hpp
/// @brief Euclidean TSP instances in the unit square.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <qdgen/error.hpp>
#include <qdgen/random.hpp>

namespace qdgen {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline double squared_distance(const Point& a, const Point& b) noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline double distance(const Point& a, const Point& b) noexcept {
    return std::sqrt(squared_distance(a, b));
}

inline double clamp_unit(double v) noexcept {
    return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

inline Point clamp_unit(Point p) noexcept { return {clamp_unit(p.x), clamp_unit(p.y)}; }

/// Where an instance came from. Never participates in equality.
struct Provenance {
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> iteration;
    std::optional<std::int64_t> parent_iteration;
    std::string op;
};

/// Immutable set of n >= 4 cities with coordinates in [0,1]^2.
class Instance {
  public:
    static constexpr std::size_t min_size = 4;

    explicit Instance(std::vector<Point> points, std::optional<Provenance> meta = std::nullopt)
        : points_(std::move(points)), meta_(std::move(meta)) {
        if (points_.size() < min_size)
            throw ValidationError("instance needs at least " + std::to_string(min_size) +
                                  " points, got " + std::to_string(points_.size()));
        for (std::size_t i = 0; i < points_.size(); ++i) {
            const auto& p = points_[i];
            if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0))
                throw ValidationError("point " + std::to_string(i) + " (" + std::to_string(p.x) +
                                      ", " + std::to_string(p.y) + ") lies outside [0,1]^2");
        }
    }

    std::size_t size() const noexcept { return points_.size(); }
    std::span<const Point> points() const noexcept { return points_; }
    const Point& operator[](std::size_t i) const noexcept { return points_[i]; }
    const std::optional<Provenance>& meta() const noexcept { return meta_; }

    Instance with_meta(Provenance meta) const& { return Instance(points_, std::move(meta), Trusted{}); }
    Instance with_meta(Provenance meta) && {
        return Instance(std::move(points_), std::move(meta), Trusted{});
    }

    friend bool operator==(const Instance& a, const Instance& b) { return a.points_ == b.points_; }

  private:
    struct Trusted {};
    Instance(std::vector<Point> points, std::optional<Provenance> meta, Trusted)
        : points_(std::move(points)), meta_(std::move(meta)) {}

    std::vector<Point> points_;
    std::optional<Provenance> meta_;
};

/// Random uniform Euclidean instance: every coordinate i.i.d. U[0,1].
inline Instance rue_instance(std::size_t n, Rng& rng) {
    if (n < Instance::min_size)
        throw ValidationError("rue_instance: n must be >= 4");
    std::vector<Point> pts(n);
    for (auto& p : pts) {
        p.x = uniform01(rng);
        p.y = uniform01(rng);
    }
    return Instance(std::move(pts));
}

inline Instance rue_instance(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Provenance meta;
    meta.seed = seed;
    return rue_instance(n, rng).with_meta(std::move(meta));
}

} // namespace qdgen
