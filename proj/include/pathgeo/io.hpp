#ifndef PATHGEO_IO_HPP
#define PATHGEO_IO_HPP

#include "pathgeo/category.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace pathgeo {

using Json = nlohmann::json;

namespace io {

inline Json to_json(const Vec& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Vec vec_from_json(const Json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim))
        throw ConfigError(what + ": expected an array of 1 to " + std::to_string(kMaxDim) + " numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(what + ": entries must be numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline std::vector<Vec> vecs_from_json(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + ": expected an array of coordinate arrays");
    std::vector<Vec> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec_from_json(j[i], what + "[" + std::to_string(i) + "]"));
    return out;
}

inline Json to_json(const ManifoldSpec& m) {
    switch (m.kind()) {
    case ManifoldKind::euclidean: return {{"kind", "euclidean"}, {"dim", m.dimension()}};
    case ManifoldKind::sphere: return {{"kind", "sphere"}, {"radius", m.radius()}};
    case ManifoldKind::hyperbolic_half_plane: return {{"kind", "hyperbolic_half_plane"}};
    case ManifoldKind::flat_torus: return {{"kind", "flat_torus"}, {"circumferences", to_json(m.circumferences())}};
    }
    return {};
}

inline ManifoldSpec manifold_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ConfigError("manifold: expected an object with a string \"kind\"");
    const std::string kind = j["kind"];
    try {
        if (kind == "euclidean") return ManifoldSpec::euclidean(j.value("dim", 2));
        if (kind == "sphere") return ManifoldSpec::sphere(j.value("radius", 1.0));
        if (kind == "hyperbolic_half_plane") return ManifoldSpec::hyperbolic_half_plane();
        if (kind == "flat_torus") {
            if (!j.contains("circumferences")) throw ConfigError("flat_torus: missing \"circumferences\"");
            const Vec c = vec_from_json(j["circumferences"], "circumferences");
            return ManifoldSpec::flat_torus(std::span<const double>(c.data(), static_cast<std::size_t>(c.size())));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("manifold: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("manifold: ") + e.what());
    }
    throw ConfigError("manifold: unknown kind \"" + kind + "\"");
}

inline Json to_json(const DiscretePath& path) {
    Json samples = Json::array();
    for (const Vec& x : path.samples()) samples.push_back(to_json(x));
    return {{"manifold", to_json(path.manifold())}, {"collar", path.collar()}, {"samples", samples}};
}

inline DiscretePath path_from_json(const Json& j, const std::optional<ManifoldSpec>& fallback = std::nullopt) {
    if (!j.is_object() || !j.contains("samples")) throw ConfigError("path: expected an object with \"samples\"");
    const ManifoldSpec m = j.contains("manifold") ? manifold_from_json(j["manifold"])
                           : fallback             ? *fallback
                                                  : throw ConfigError("path: missing \"manifold\"");
    try {
        return DiscretePath(m, vecs_from_json(j["samples"], "samples"), j.value("collar", 0.0));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("path: ") + e.what());
    }
}

inline Json to_json(const PathTangentField& field) {
    Json vectors = Json::array();
    for (const Vec& v : field.vectors()) vectors.push_back(to_json(v));
    return {{"path", to_json(field.base())}, {"vectors", vectors}};
}

inline PathTangentField field_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("path") || !j.contains("vectors"))
        throw ConfigError("field: expected an object with \"path\" and \"vectors\"");
    try {
        return PathTangentField(path_from_json(j["path"]), vecs_from_json(j["vectors"], "vectors"));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("field: ") + e.what());
    }
}

inline Json to_json(const GeodMorphism1& f) {
    return {{"type", "morphism1"}, {"time", f.time()}, {"field", to_json(f.field())}};
}

inline GeodMorphism1 morphism1_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("field") || !j.contains("time"))
        throw ConfigError("morphism1: expected an object with \"field\" and \"time\"");
    return GeodMorphism1(field_from_json(j["field"]), j["time"].get<double>());
}

inline Json to_json(const Worldsheet& sheet) {
    Json points = Json::array();
    Json velocities = Json::array();
    for (std::size_t j = 0; j < sheet.s_count(); ++j) {
        Json prow = Json::array();
        Json vrow = Json::array();
        for (std::size_t i = 0; i < sheet.t_count(); ++i) {
            prow.push_back(to_json(sheet.point(j, i)));
            vrow.push_back(to_json(sheet.velocity(j, i)));
        }
        points.push_back(std::move(prow));
        velocities.push_back(std::move(vrow));
    }
    return {{"manifold", to_json(sheet.manifold())},
            {"interval", {sheet.interval().a, sheet.interval().b}},
            {"s_nodes", sheet.s_nodes()},
            {"t_segments", sheet.t_segments()},
            {"collar", sheet.collar()},
            {"points", points},
            {"velocities", velocities}};
}

inline Json to_json(const GeodMorphism2& F) {
    return {{"type", "morphism2"},
            {"seed", to_json(F.seed())},
            {"s_nodes", F.sheet().s_nodes()},
            {"steps_per_unit", F.steps_per_unit()}};
}

inline GeodMorphism2 morphism2_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("seed")) throw ConfigError("morphism2: expected an object with \"seed\"");
    GeodMorphism1 seed = morphism1_from_json(j["seed"]);
    const int steps = j.value("steps_per_unit", kDefaultStepsPerUnit);
    if (j.contains("s_nodes")) return GeodMorphism2(seed, j["s_nodes"].get<std::vector<double>>(), steps);
    if (j.contains("interval")) {
        const auto iv = j["interval"].get<std::vector<double>>();
        if (iv.size() != 2) throw ConfigError("morphism2: \"interval\" needs two numbers");
        return GeodMorphism2(seed, Interval{iv[0], iv[1]}, j.value("S", kDefaultSheetSegments), steps);
    }
    throw ConfigError("morphism2: needs \"s_nodes\" or \"interval\"");
}

inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Rows t, x1, ..., xd.
inline void write_csv(std::ostream& os, const DiscretePath& path) {
    os << "t";
    for (int k = 0; k < path.manifold().coord_dim(); ++k) os << ",x" << k + 1;
    os << '\n';
    for (std::size_t i = 0; i < path.size(); ++i) {
        os << format_number(path.t(i));
        for (Eigen::Index k = 0; k < path[i].size(); ++k) os << ',' << format_number(path[i][k]);
        os << '\n';
    }
}

/// Rows s, t, x1, ..., xd.
inline void write_csv(std::ostream& os, const Worldsheet& sheet) {
    os << "s,t";
    for (int k = 0; k < sheet.manifold().coord_dim(); ++k) os << ",x" << k + 1;
    os << '\n';
    const double n = static_cast<double>(sheet.t_segments());
    for (std::size_t j = 0; j < sheet.s_count(); ++j) {
        for (std::size_t i = 0; i < sheet.t_count(); ++i) {
            os << format_number(sheet.s_nodes()[j]) << ',' << format_number(static_cast<double>(i) / n);
            const Vec& x = sheet.point(j, i);
            for (Eigen::Index k = 0; k < x.size(); ++k) os << ',' << format_number(x[k]);
            os << '\n';
        }
    }
}

/// Quad mesh of the grid in embedding coordinates (euclidean(3) and the sphere).
inline void write_obj(std::ostream& os, const Worldsheet& sheet) {
    const ManifoldSpec& m = sheet.manifold();
    if (m.coord_dim() != 3 || !(m.kind() == ManifoldKind::sphere || m.kind() == ManifoldKind::euclidean))
        throw DomainError("OBJ export needs an embedded surface in 3-space (euclidean(3) or sphere)");
    os << "# worldsheet " << sheet.s_count() << " x " << sheet.t_count() << '\n';
    for (std::size_t j = 0; j < sheet.s_count(); ++j)
        for (std::size_t i = 0; i < sheet.t_count(); ++i) {
            const Vec& x = sheet.point(j, i);
            os << "v " << format_number(x[0]) << ' ' << format_number(x[1]) << ' ' << format_number(x[2]) << '\n';
        }
    const std::size_t nt = sheet.t_count();
    for (std::size_t j = 0; j + 1 < sheet.s_count(); ++j)
        for (std::size_t i = 0; i + 1 < nt; ++i) {
            const std::size_t a = j * nt + i + 1; // OBJ indices start at 1
            os << "f " << a << ' ' << a + 1 << ' ' << a + 1 + nt << ' ' << a + nt << '\n';
        }
}

inline Json read_json_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open " + file);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(file + ": " + e.what());
    }
}

} // namespace io
} // namespace pathgeo

#endif // PATHGEO_IO_HPP
