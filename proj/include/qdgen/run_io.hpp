#pragma once

/// @file run_io.hpp
/// @brief Run configuration files and run output directories.
///
/// A run directory holds:
///   manifest.json    config, config hash, seed, versions, counters, timestamp
///   index.csv        key,objective,hits,updates,first_hit_iter,last_update_iter,instance_file
///   runlog.csv       iteration,kind,key,objective (one row per archive offer)
///   coverage.csv     iteration,covered
///   population.csv   key,objective (EA / EDO final population)
///   instances/       one native JSON instance per box

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include <qdgen/archive.hpp>
#include <qdgen/error.hpp>
#include <qdgen/evolve.hpp>
#include <qdgen/instance_io.hpp>

namespace qdgen {

inline constexpr int config_schema_version = 1;
inline constexpr std::string_view version_string = "0.1.0";

/// Config rejected; `problems` lists every offending key with the reason.
class SchemaError : public ValidationError {
  public:
    explicit SchemaError(std::vector<std::string> problems)
        : ValidationError(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

  private:
    static std::string join(const std::vector<std::string>& p) {
        std::string s = "invalid config:";
        for (const auto& x : p)
            s += "\n  " + x;
        return s;
    }
    std::vector<std::string> problems_;
};

// ---------------------------------------------------------------------------
// Config <-> JSON

inline nlohmann::json suite_to_json(const OperatorSuite& s) {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& op : s.operators) {
        nlohmann::json params = nlohmann::json::object();
        for (const auto& [k, v] : op.params)
            params[k] = v;
        ops.push_back({{"id", op.id}, {"params", params}});
    }
    return {{"id", s.id}, {"operators", ops}};
}

inline nlohmann::json feature_set_to_json(const FeatureSet& f) {
    nlohmann::json feats = nlohmann::json::array();
    for (const auto& d : f.features)
        feats.push_back({{"name", std::string(feature_kind_name(d.kind))}, {"k", d.k}});
    return {{"id", f.id}, {"features", feats}};
}

/// Fully expanded config; the canonical form hashed into manifests.
inline nlohmann::json config_to_json(const EvolverConfig& c) {
    return {
        {"schema", config_schema_version},
        {"evolver", std::string(evolver_name(c.kind))},
        {"n", c.n},
        {"mu", c.mu},
        {"budget", c.budget},
        {"suite", suite_to_json(c.suite)},
        {"feature_set", feature_set_to_json(c.features)},
        {"objective",
         {{"numerator", c.objective.numerator},
          {"denominator", c.objective.denominator},
          {"repetitions", c.objective.repetitions},
          {"shared_starts", c.objective.shared_starts}}},
        {"seed", c.seed},
        {"snapshot_every", c.snapshot_every},
        {"edo", {{"alpha", c.edo_alpha}, {"warmup", c.edo_warmup}}},
    };
}

namespace detail {

class ConfigReader {
  public:
    std::vector<std::string> problems;

    void allow_only(const nlohmann::json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
        for (const auto& [k, v] : obj.items()) {
            bool ok = false;
            for (auto a : keys)
                ok = ok || a == k;
            if (!ok)
                problems.push_back(path(where, k) + ": unknown key");
        }
    }

    template <class T> void get_uint(const nlohmann::json& obj, std::string_view where, const char* key, T& out) {
        if (!obj.contains(key))
            return;
        const auto& v = obj[key];
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            problems.push_back(path(where, key) + ": expected a non-negative integer");
        else
            out = static_cast<T>(v.get<std::uint64_t>());
    }

    void get_double(const nlohmann::json& obj, std::string_view where, const char* key, double& out) {
        if (!obj.contains(key))
            return;
        if (!obj[key].is_number())
            problems.push_back(path(where, key) + ": expected a number");
        else
            out = obj[key].get<double>();
    }

    void get_string(const nlohmann::json& obj, std::string_view where, const char* key, std::string& out) {
        if (!obj.contains(key))
            return;
        if (!obj[key].is_string())
            problems.push_back(path(where, key) + ": expected a string");
        else
            out = obj[key].get<std::string>();
    }

    void get_bool(const nlohmann::json& obj, std::string_view where, const char* key, bool& out) {
        if (!obj.contains(key))
            return;
        if (!obj[key].is_boolean())
            problems.push_back(path(where, key) + ": expected a boolean");
        else
            out = obj[key].get<bool>();
    }

    static std::string path(std::string_view where, std::string_view key) {
        return where.empty() ? std::string(key) : std::string(where) + "." + std::string(key);
    }

    /// Runs `fn`, turning validation failures into problems attributed to `key`.
    template <class Fn> void guard(std::string_view key, Fn&& fn) {
        try {
            fn();
        } catch (const ValidationError& e) {
            problems.push_back(std::string(key) + ": " + e.what());
        }
    }
};

inline OperatorSuite parse_suite(const nlohmann::json& j, ConfigReader& rd) {
    if (j.is_string())
        return builtin_suite(j.get<std::string>());
    if (!j.is_object())
        throw ValidationError("expected a suite id or object");
    rd.allow_only(j, "suite", {"id", "operators"});
    std::string id = "custom";
    rd.get_string(j, "suite", "id", id);
    if (!j.contains("operators"))
        return builtin_suite(id);
    if (!j["operators"].is_array())
        throw ValidationError("operators must be an array");
    std::vector<OperatorConfig> ops;
    for (std::size_t i = 0; i < j["operators"].size(); ++i) {
        const auto& o = j["operators"][i];
        const std::string where = "suite.operators[" + std::to_string(i) + "]";
        if (!o.is_object() || !o.contains("id") || !o["id"].is_string()) {
            rd.problems.push_back(where + ": expected an object with string id");
            continue;
        }
        rd.allow_only(o, where, {"id", "params", "enabled"});
        Params overrides;
        if (o.contains("params")) {
            if (!o["params"].is_object()) {
                rd.problems.push_back(where + ".params: expected an object");
            } else {
                for (const auto& [k, v] : o["params"].items()) {
                    if (!v.is_number())
                        rd.problems.push_back(where + ".params." + k + ": expected a number");
                    else
                        overrides[k] = v.get<double>();
                }
            }
        }
        bool enabled = true;
        rd.get_bool(o, where, "enabled", enabled);
        rd.guard(where, [&] {
            auto c = make_operator(o["id"].get<std::string>(), overrides);
            c.enabled = enabled;
            ops.push_back(std::move(c));
        });
    }
    return make_suite(id, ops);
}

inline FeatureSet parse_feature_set(const nlohmann::json& j, ConfigReader& rd) {
    if (j.is_string())
        return feature_set(j.get<std::string>());
    if (!j.is_object())
        throw ValidationError("expected a feature set id or object");
    rd.allow_only(j, "feature_set", {"id", "features"});
    FeatureSet fs{"custom", {}};
    rd.get_string(j, "feature_set", "id", fs.id);
    if (!j.contains("features"))
        return feature_set(fs.id);
    if (!j["features"].is_array() || j["features"].empty())
        throw ValidationError("features must be a non-empty array");
    for (std::size_t i = 0; i < j["features"].size(); ++i) {
        const auto& f = j["features"][i];
        const std::string where = "feature_set.features[" + std::to_string(i) + "]";
        if (!f.is_object() || !f.contains("name") || !f["name"].is_string()) {
            rd.problems.push_back(where + ": expected an object with string name");
            continue;
        }
        rd.allow_only(f, where, {"name", "k"});
        FeatureDef d{FeatureKind::mst_depth_median, 0};
        rd.guard(where, [&] { d.kind = parse_feature_kind(f["name"].get<std::string>()); });
        rd.get_uint(f, where, "k", d.k);
        if (d.kind != FeatureKind::mst_depth_median && d.k == 0)
            rd.problems.push_back(where + ".k: k-NNG features need k >= 1");
        fs.features.push_back(d);
    }
    return fs;
}

} // namespace detail

/// Parses a run config object, applying defaults for absent keys. Every
/// offending key is collected into a single SchemaError.
inline EvolverConfig config_from_json(const nlohmann::json& j) {
    detail::ConfigReader rd;
    EvolverConfig c;
    if (!j.is_object())
        throw SchemaError({"<root>: expected a JSON object"});
    rd.allow_only(j, "", {"schema", "evolver", "n", "mu", "budget", "suite", "feature_set", "objective", "seed",
                          "snapshot_every", "edo"});
    if (j.contains("schema")) {
        if (!j["schema"].is_number_integer() || j["schema"].get<int>() != config_schema_version)
            rd.problems.push_back("schema: unsupported version (expected " + std::to_string(config_schema_version) +
                                  ")");
    }
    if (j.contains("evolver")) {
        if (!j["evolver"].is_string())
            rd.problems.push_back("evolver: expected a string");
        else
            rd.guard("evolver", [&] { c.kind = parse_evolver(j["evolver"].get<std::string>()); });
    }
    rd.get_uint(j, "", "n", c.n);
    rd.get_uint(j, "", "mu", c.mu);
    rd.get_uint(j, "", "budget", c.budget);
    rd.get_uint(j, "", "seed", c.seed);
    rd.get_uint(j, "", "snapshot_every", c.snapshot_every);
    if (j.contains("suite"))
        rd.guard("suite", [&] { c.suite = detail::parse_suite(j["suite"], rd); });
    if (j.contains("feature_set"))
        rd.guard("feature_set", [&] { c.features = detail::parse_feature_set(j["feature_set"], rd); });
    if (j.contains("objective")) {
        const auto& o = j["objective"];
        if (!o.is_object()) {
            rd.problems.push_back("objective: expected an object");
        } else {
            rd.allow_only(o, "objective", {"numerator", "denominator", "repetitions", "shared_starts"});
            rd.get_string(o, "objective", "numerator", c.objective.numerator);
            rd.get_string(o, "objective", "denominator", c.objective.denominator);
            rd.get_uint(o, "objective", "repetitions", c.objective.repetitions);
            rd.get_bool(o, "objective", "shared_starts", c.objective.shared_starts);
        }
    }
    if (j.contains("edo")) {
        const auto& e = j["edo"];
        if (!e.is_object()) {
            rd.problems.push_back("edo: expected an object");
        } else {
            rd.allow_only(e, "edo", {"alpha", "warmup"});
            rd.get_double(e, "edo", "alpha", c.edo_alpha);
            rd.get_uint(e, "edo", "warmup", c.edo_warmup);
        }
    }
    if (rd.problems.empty()) {
        rd.guard("config", [&] { c.validate(); });
        if (c.n < Instance::min_size)
            rd.problems.push_back("n: must be >= 4");
    }
    if (!rd.problems.empty())
        throw SchemaError(std::move(rd.problems));
    return c;
}

inline EvolverConfig load_config(const std::filesystem::path& path) {
    const auto text = detail::read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), detail::line_of_byte(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    return config_from_json(j);
}

/// FNV-1a over the canonical config dump, hex.
inline std::string config_hash(const EvolverConfig& c) {
    const auto text = config_to_json(c).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// CSV writers

inline std::string index_csv(const std::vector<BoxRecord>& records) {
    std::string out = "key,objective,hits,updates,first_hit_iter,last_update_iter,instance_file\n";
    for (const auto& r : records) {
        const auto key = r.key.to_string();
        std::string file = "instances/box_" + key + ".json";
        for (auto& ch : file)
            if (ch == ';')
                ch = '_';
        out += key + "," + detail::fmt_double(r.objective) + "," + std::to_string(r.hits) + "," +
               std::to_string(r.updates) + "," + std::to_string(r.first_hit_iter) + "," +
               std::to_string(r.last_update_iter) + "," + file + "\n";
    }
    return out;
}

inline std::string runlog_csv(const RunLog& log) {
    std::string out = "iteration,kind,key,objective\n";
    out.reserve(out.size() + log.events.size() * 40);
    for (const auto& e : log.events) {
        out += std::to_string(e.iteration);
        out += ',';
        out += outcome_name(e.kind);
        out += ',';
        out += e.key.to_string();
        out += ',';
        out += detail::fmt_double(e.objective);
        out += '\n';
    }
    return out;
}

inline std::string coverage_csv(const RunLog& log) {
    std::string out = "iteration,covered\n";
    for (const auto& s : log.snapshots)
        out += std::to_string(s.iteration) + "," + std::to_string(s.covered) + "\n";
    return out;
}

inline std::string population_csv(const RunLog& log) {
    std::string out = "key,objective\n";
    for (const auto& m : log.final_population)
        out += m.key.to_string() + "," + detail::fmt_double(m.objective) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// CSV readers

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto e = line.find(sep, pos);
        out.push_back(line.substr(pos, e == std::string_view::npos ? std::string_view::npos : e - pos));
        if (e == std::string_view::npos)
            break;
        pos = e + 1;
    }
    return out;
}

/// Calls fn(fields, line_no) for each data row after checking the header.
template <class Fn> void for_each_csv_row(std::string_view text, std::string_view header, Fn&& fn) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool seen_header = false;
    const auto expected_cols = split(header).size();
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos)
            nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        if (!seen_header) {
            if (line != header)
                throw ParseError("unexpected CSV header", line_no);
            seen_header = true;
            continue;
        }
        const auto f = split(line);
        if (f.size() != expected_cols)
            throw ParseError("expected " + std::to_string(expected_cols) + " columns, got " +
                                 std::to_string(f.size()),
                             line_no);
        try {
            fn(f, line_no);
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    if (!seen_header)
        throw ParseError("empty CSV file", 0);
}

inline double to_double(std::string_view s) {
    const auto v = parse_double(s);
    if (!v)
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return *v;
}

inline std::int64_t to_int(std::string_view s) {
    std::int64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    return v;
}

} // namespace detail

inline std::vector<BoxRecord> parse_index_csv(std::string_view text) {
    std::vector<BoxRecord> out;
    detail::for_each_csv_row(text, "key,objective,hits,updates,first_hit_iter,last_update_iter,instance_file",
                             [&](const auto& f, std::size_t) {
                                 BoxRecord r;
                                 r.key = BoxKey::parse(f[0]);
                                 r.objective = detail::to_double(f[1]);
                                 r.hits = static_cast<std::uint64_t>(detail::to_int(f[2]));
                                 r.updates = static_cast<std::uint64_t>(detail::to_int(f[3]));
                                 r.first_hit_iter = detail::to_int(f[4]);
                                 r.last_update_iter = detail::to_int(f[5]);
                                 out.push_back(std::move(r));
                             });
    return out;
}

inline std::vector<RunEvent> parse_runlog_csv(std::string_view text) {
    std::vector<RunEvent> out;
    detail::for_each_csv_row(text, "iteration,kind,key,objective", [&](const auto& f, std::size_t) {
        out.push_back({detail::to_int(f[0]), parse_outcome(f[1]), BoxKey::parse(f[2]), detail::to_double(f[3])});
    });
    return out;
}

inline std::vector<CoverageSnapshot> parse_coverage_csv(std::string_view text) {
    std::vector<CoverageSnapshot> out;
    detail::for_each_csv_row(text, "iteration,covered", [&](const auto& f, std::size_t) {
        out.push_back({detail::to_int(f[0]), static_cast<std::size_t>(detail::to_int(f[1]))});
    });
    return out;
}

// ---------------------------------------------------------------------------
// Run directories

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Writes all run outputs into `dir` (created if needed).
inline void write_run(const std::filesystem::path& dir, const EvolverConfig& cfg, const RunResult& result) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "instances");
    const auto records = result.archive.records();
    for (const auto& r : records) {
        std::string name = "box_" + r.key.to_string() + ".json";
        for (auto& ch : name)
            if (ch == ';')
                ch = '_';
        save_instance(result.archive.find(r.key)->instance, dir / "instances" / name);
    }
    detail::write_file(dir / "index.csv", index_csv(records));
    detail::write_file(dir / "runlog.csv", runlog_csv(result.log));
    detail::write_file(dir / "coverage.csv", coverage_csv(result.log));
    if (!result.log.final_population.empty())
        detail::write_file(dir / "population.csv", population_csv(result.log));
    nlohmann::json m = {
        {"schema", config_schema_version},
        {"qdgen_version", std::string(version_string)},
        {"label", cfg.label()},
        {"feature_set", cfg.features.id},
        {"direction", cfg.objective.label()},
        {"seed", cfg.seed},
        {"config", config_to_json(cfg)},
        {"config_hash", config_hash(cfg)},
        {"archive_kind", result.footprint ? "footprint" : "archive"},
        {"boxes", records.size()},
        {"evaluations", result.log.evaluations},
        {"initial_evaluations", result.log.initial_evaluations},
        {"warmup_evaluations", result.log.warmup_evaluations},
        {"created_utc", utc_timestamp()},
    };
    detail::write_file(dir / "manifest.json", m.dump(2) + "\n");
}

struct LoadedRun {
    std::filesystem::path dir;
    nlohmann::json manifest;
    EvolverConfig config;
    std::vector<BoxRecord> index;
    RunLog log;
};

/// Reads a run directory written by write_run.
inline LoadedRun read_run(const std::filesystem::path& dir) {
    LoadedRun r;
    r.dir = dir;
    try {
        r.manifest = nlohmann::json::parse(detail::read_file(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(dir.string() + "/manifest.json: " + e.what(), 0);
    }
    if (!r.manifest.contains("config"))
        throw ParseError(dir.string() + "/manifest.json: missing config", 0);
    r.config = config_from_json(r.manifest["config"]);
    auto wrap = [&](const char* file, auto&& fn) {
        try {
            fn(detail::read_file(dir / file));
        } catch (const ParseError& e) {
            throw ParseError(dir.string() + "/" + file + ": " + e.what(), 0);
        }
    };
    wrap("index.csv", [&](const std::string& t) { r.index = parse_index_csv(t); });
    wrap("runlog.csv", [&](const std::string& t) { r.log.events = parse_runlog_csv(t); });
    wrap("coverage.csv", [&](const std::string& t) { r.log.snapshots = parse_coverage_csv(t); });
    return r;
}

} // namespace qdgen
