#pragma once

/// @file instance_io.hpp
/// @brief Native JSON and TSPLIB (EUC_2D subset) instance files.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include <qdgen/error.hpp>
#include <qdgen/instance.hpp>

namespace qdgen {

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw std::runtime_error("write failed for " + path.string());
}

inline std::size_t line_of_byte(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

/// %.17g keeps doubles round-trippable.
inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty())
        return std::nullopt;
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size())
        return std::nullopt;
    return v;
}

} // namespace detail

inline nlohmann::json provenance_to_json(const Provenance& m) {
    nlohmann::json j = nlohmann::json::object();
    if (m.seed)
        j["seed"] = *m.seed;
    if (m.iteration)
        j["iteration"] = *m.iteration;
    if (m.parent_iteration)
        j["parent_iteration"] = *m.parent_iteration;
    if (!m.op.empty())
        j["op"] = m.op;
    return j;
}

inline nlohmann::json instance_to_json(const Instance& inst) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : inst.points())
        pts.push_back({p.x, p.y});
    nlohmann::json j;
    j["n"] = inst.size();
    j["points"] = std::move(pts);
    if (inst.meta())
        j["meta"] = provenance_to_json(*inst.meta());
    return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
    if (!j.is_object())
        throw ParseError("instance must be a JSON object", 0);
    if (!j.contains("points") || !j["points"].is_array())
        throw ParseError("missing array field \"points\"", 0);
    const auto& arr = j["points"];
    std::vector<Point> pts;
    pts.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& p = arr[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw ParseError("points[" + std::to_string(i) + "] is not a pair of numbers", 0);
        pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    if (j.contains("n")) {
        if (!j["n"].is_number_integer() || j["n"].get<long long>() != static_cast<long long>(pts.size()))
            throw ValidationError("field \"n\" does not match the number of points");
    }
    std::optional<Provenance> meta;
    if (j.contains("meta") && j["meta"].is_object()) {
        const auto& m = j["meta"];
        Provenance pv;
        if (m.contains("seed") && m["seed"].is_number_unsigned())
            pv.seed = m["seed"].get<std::uint64_t>();
        if (m.contains("iteration") && m["iteration"].is_number_integer())
            pv.iteration = m["iteration"].get<std::int64_t>();
        if (m.contains("parent_iteration") && m["parent_iteration"].is_number_integer())
            pv.parent_iteration = m["parent_iteration"].get<std::int64_t>();
        if (m.contains("op") && m["op"].is_string())
            pv.op = m["op"].get<std::string>();
        meta = std::move(pv);
    }
    return Instance(std::move(pts), std::move(meta));
}

inline Instance parse_instance_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), detail::line_of_byte(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    return instance_from_json(j);
}


// ---------------------------------------------------------------------------
// TSPLIB

/// Coordinates are multiplied by `scale` on export; the factor is recorded in
/// a COMMENT line so that import can undo it.
inline std::string to_tsplib(const Instance& inst, double scale = 1.0, std::string_view name = "qdgen") {
    std::string out;
    out += "NAME : " + std::string(name) + "\n";
    out += "COMMENT : QDGEN_SCALE " + detail::fmt_double(scale) + "\n";
    out += "TYPE : TSP\n";
    out += "DIMENSION : " + std::to_string(inst.size()) + "\n";
    out += "EDGE_WEIGHT_TYPE : EUC_2D\n";
    out += "NODE_COORD_SECTION\n";
    for (std::size_t i = 0; i < inst.size(); ++i) {
        out += std::to_string(i + 1) + " " + detail::fmt_double(inst[i].x * scale) + " " +
               detail::fmt_double(inst[i].y * scale) + "\n";
    }
    out += "EOF\n";
    return out;
}

/// Parses the EUC_2D subset. Without an explicit `scale`, uses the
/// QDGEN_SCALE comment if present, else 1.
inline Instance parse_tsplib(std::string_view text, std::optional<double> scale = std::nullopt) {
    std::optional<double> declared;
    std::optional<std::size_t> dimension;
    std::vector<Point> pts;
    bool in_coords = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = detail::trim(raw);
        if (line.empty())
            continue;
        if (line == "EOF")
            break;
        if (in_coords) {
            std::istringstream ls{std::string(line)};
            std::string id, xs, ys, extra;
            if (!(ls >> id >> xs >> ys) || (ls >> extra))
                throw ParseError("expected '<id> <x> <y>'", line_no);
            const auto x = detail::parse_double(xs);
            const auto y = detail::parse_double(ys);
            if (!x || !y)
                throw ParseError("non-numeric coordinate", line_no);
            pts.push_back({*x, *y});
            continue;
        }
        if (line == "NODE_COORD_SECTION") {
            in_coords = true;
            continue;
        }
        const auto colon = line.find(':');
        if (colon == std::string_view::npos)
            throw ParseError("expected 'KEY : VALUE' header line", line_no);
        const auto key = detail::trim(line.substr(0, colon));
        const auto value = detail::trim(line.substr(colon + 1));
        if (key == "EDGE_WEIGHT_TYPE") {
            if (value != "EUC_2D")
                throw ParseError("unsupported EDGE_WEIGHT_TYPE " + std::string(value), line_no);
        } else if (key == "TYPE") {
            if (value != "TSP")
                throw ParseError("unsupported TYPE " + std::string(value), line_no);
        } else if (key == "DIMENSION") {
            const auto d = detail::parse_double(value);
            if (!d || *d < 0 || *d != static_cast<double>(static_cast<std::size_t>(*d)))
                throw ParseError("bad DIMENSION", line_no);
            dimension = static_cast<std::size_t>(*d);
        } else if (key == "COMMENT") {
            constexpr std::string_view tag = "QDGEN_SCALE";
            if (value.substr(0, tag.size()) == tag) {
                declared = detail::parse_double(value.substr(tag.size()));
                if (!declared || *declared <= 0)
                    throw ParseError("bad QDGEN_SCALE", line_no);
            }
        }
    }
    if (!in_coords)
        throw ParseError("missing NODE_COORD_SECTION", line_no);
    if (dimension && *dimension != pts.size())
        throw ParseError("DIMENSION " + std::to_string(*dimension) + " but " +
                             std::to_string(pts.size()) + " coordinates",
                         line_no);
    const double s = scale.value_or(declared.value_or(1.0));
    if (s <= 0)
        throw ValidationError("scale must be positive");
    for (auto& p : pts) {
        p.x /= s;
        p.y /= s;
    }
    return Instance(std::move(pts));
}

inline void save_tsplib(const Instance& inst, const std::filesystem::path& path, double scale = 1.0) {
    detail::write_file(path, to_tsplib(inst, scale, path.stem().string()));
}

/// Dispatches on extension: `.tsp` is TSPLIB, everything else native JSON.
inline void save_instance(const Instance& inst, const std::filesystem::path& path) {
    if (path.extension() == ".tsp")
        save_tsplib(inst, path);
    else
        detail::write_file(path, instance_to_json(inst).dump() + "\n");
}

inline Instance load_instance(const std::filesystem::path& path) {
    const auto text = detail::read_file(path);
    if (path.extension() == ".tsp")
        return parse_tsplib(text);
    return parse_instance_json(text);
}

} // namespace qdgen
