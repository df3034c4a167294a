#ifndef PATHGEO_SCENARIO_HPP
#define PATHGEO_SCENARIO_HPP

#include "pathgeo/generators.hpp"
#include "pathgeo/io.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace pathgeo {

struct Resolution {
    std::size_t N = kDefaultSegments;
    std::size_t S = kDefaultSheetSegments;
    int steps_per_unit = kDefaultStepsPerUnit;
};

/// Manifold, named paths and fields, and run parameters read from a JSON scenario.
///
///   {"manifold": {"kind": "sphere", "radius": 1},
///    "resolution": {"N": 256, "S": 64, "steps_per_unit": 1000},
///    "interval": [0, 1.5707963267948966],
///    "paths":  {"equator": {"generator": "great_circle_arc", "start": [1,0,0],
///                           "tangent": [0,1,0], "angle": 1.0}},
///    "fields": {"north": {"path": "equator", "generator": "normal"}},
///    "tolerances": {"backtrack": 1e-9}, "seed": 42}
struct ScenarioConfig {
    ManifoldSpec manifold = ManifoldSpec::euclidean(2);
    Resolution resolution;
    double collar = kDefaultCollar;
    Interval interval{0.0, 1.0};
    std::map<std::string, DiscretePath> paths;
    std::map<std::string, PathTangentField> fields;
    std::map<std::string, double> tolerances;
    std::uint64_t seed = 42;
    Json raw = Json::object();

    double tolerance(const std::string& name, double fallback) const {
        auto it = tolerances.find(name);
        return it == tolerances.end() ? fallback : it->second;
    }

    const DiscretePath& path(const std::string& name) const {
        auto it = paths.find(name);
        if (it == paths.end()) throw ConfigError("unknown path \"" + name + "\"");
        return it->second;
    }

    const PathTangentField& field(const std::string& name) const {
        auto it = fields.find(name);
        if (it == fields.end()) throw ConfigError("unknown field \"" + name + "\"");
        return it->second;
    }

    /// The only entry of a map, or the one named in `preferred`.
    template <class Map>
    static const std::string& pick(const Map& map, const std::string& preferred, const char* what) {
        if (!preferred.empty()) {
            auto it = map.find(preferred);
            if (it == map.end()) throw ConfigError(std::string("unknown ") + what + " \"" + preferred + "\"");
            return it->first;
        }
        if (map.empty()) throw ConfigError(std::string("scenario defines no ") + what);
        return map.begin()->first;
    }
};

namespace detail {

inline DiscretePath build_path(const ScenarioConfig& cfg, const std::string& name, const Json& spec) {
    const ManifoldSpec& m = cfg.manifold;
    const std::size_t n = spec.value("N", cfg.resolution.N);
    const double collar = spec.value("collar", cfg.collar);
    if (spec.contains("samples")) {
        return DiscretePath(m, io::vecs_from_json(spec["samples"], "paths." + name + ".samples"),
                            spec.value("collar", 0.0));
    }
    const std::string gen = spec.value("generator", "");
    auto vec = [&](const char* key) {
        if (!spec.contains(key)) throw ConfigError("paths." + name + ": missing \"" + key + "\"");
        return io::vec_from_json(spec[key], "paths." + name + "." + key);
    };
    auto num = [&](const char* key) {
        if (!spec.contains(key) || !spec[key].is_number())
            throw ConfigError("paths." + name + ": missing number \"" + key + "\"");
        return spec[key].get<double>();
    };
    if (gen == "line") return line_path(m, vec("from"), vec("to"), n, collar);
    if (gen == "geodesic") return geodesic_path(m, vec("from"), vec("to"), n, collar);
    if (gen == "great_circle_arc") return great_circle_arc(m, vec("start"), vec("tangent"), num("angle"), n, collar);
    if (gen == "latitude_circle")
        return latitude_circle(m, num("colatitude"), spec.value("phi0", 0.0),
                               spec.value("phi1", 2.0 * std::numbers::pi), n, collar);
    if (gen == "vertical_ray") return vertical_ray(m, spec.value("x", 0.0), num("y0"), num("y1"), n, collar);
    if (gen == "constant") return DiscretePath::constant(m, m.canonical_point(vec("point")), n, collar);
    throw ConfigError("paths." + name + ": unknown generator \"" + gen + "\"");
}

inline PathTangentField build_field(const ScenarioConfig& cfg, const std::string& name, const Json& spec) {
    if (!spec.contains("path") || !spec["path"].is_string())
        throw ConfigError("fields." + name + ": missing \"path\"");
    const DiscretePath& base = cfg.path(spec["path"].get<std::string>());
    if (spec.contains("vectors")) return PathTangentField(base, io::vecs_from_json(spec["vectors"], "fields." + name));
    const std::string gen = spec.value("generator", "");
    if (gen == "zero") return PathTangentField::zero(base);
    if (gen == "constant") {
        if (!spec.contains("components")) throw ConfigError("fields." + name + ": missing \"components\"");
        return PathTangentField::constant(base, io::vec_from_json(spec["components"], "fields." + name));
    }
    if (gen == "normal") return normal_field(base, spec.value("scale", 1.0));
    throw ConfigError("fields." + name + ": unknown generator \"" + gen + "\"");
}

} // namespace detail

inline ScenarioConfig load_scenario(const Json& j) {
    if (!j.is_object()) throw ConfigError("scenario: expected a JSON object");
    ScenarioConfig cfg;
    cfg.raw = j;
    try {
        if (j.contains("manifold")) cfg.manifold = io::manifold_from_json(j["manifold"]);
        if (j.contains("resolution")) {
            const Json& r = j["resolution"];
            cfg.resolution.N = r.value("N", cfg.resolution.N);
            cfg.resolution.S = r.value("S", cfg.resolution.S);
            cfg.resolution.steps_per_unit = r.value("steps_per_unit", cfg.resolution.steps_per_unit);
        }
        if (cfg.resolution.N < 2 || !detail::is_power_of_two(cfg.resolution.N))
            throw ConfigError("resolution.N must be a power of two >= 2");
        if (cfg.resolution.S < 1) throw ConfigError("resolution.S must be positive");
        if (cfg.resolution.steps_per_unit < 1) throw ConfigError("resolution.steps_per_unit must be positive");
        cfg.collar = j.value("collar", cfg.collar);
        if (j.contains("interval")) {
            const auto iv = j["interval"].get<std::vector<double>>();
            if (iv.size() != 2 || !(iv[0] < iv[1])) throw ConfigError("interval must be [a, b] with a < b");
            cfg.interval = {iv[0], iv[1]};
        }
        if (j.contains("tolerances"))
            for (const auto& [k, v] : j["tolerances"].items()) cfg.tolerances[k] = v.get<double>();
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("paths"))
            for (const auto& [name, spec] : j["paths"].items()) {
                try {
                    cfg.paths.emplace(name, detail::build_path(cfg, name, spec));
                } catch (const DomainError& e) {
                    throw ConfigError("paths." + name + ": " + e.what());
                }
            }
        if (j.contains("fields"))
            for (const auto& [name, spec] : j["fields"].items()) {
                try {
                    cfg.fields.emplace(name, detail::build_field(cfg, name, spec));
                } catch (const DomainError& e) {
                    throw ConfigError("fields." + name + ": " + e.what());
                }
            }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return cfg;
}

inline ScenarioConfig load_scenario_file(const std::string& file) { return load_scenario(io::read_json_file(file)); }

} // namespace pathgeo

#endif // PATHGEO_SCENARIO_HPP
