// pathgeo: worldsheets, distances, energies, back-tracks, compositions and the
// property suites from the command line. Reports go to stdout as JSON (and to
// --out DIR when given).
//
// Exit codes: 0 success, 1 a requested check or bound failed, 2 usage or input
// error, 3 numerical failure (normal neighbourhood, integration).

#include "pathgeo/pathgeo.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pathgeo;
using Json = nlohmann::json;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Globals {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string format = "json";
};

ScenarioConfig require_config(const Globals& g) {
    if (g.config.empty()) throw ConfigError("--config FILE is required for this command");
    return load_scenario_file(g.config);
}

void write_text(const fs::path& file, const std::string& text) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream os(file);
    if (!os) throw ConfigError("cannot write " + file.string());
    os << text;
}

/// Prints a report and, with --out, also writes it to DIR/<name>.json.
void emit(const Globals& g, const std::string& name, const Json& report) {
    const std::string text = report.dump(2) + "\n";
    std::cout << text;
    if (!g.out.empty()) write_text(fs::path(g.out) / (name + ".json"), text);
}

int run_worldsheet(const Globals& g, const std::string& field_name) {
    const ScenarioConfig cfg = require_config(g);
    const PathTangentField& V = cfg.field(ScenarioConfig::pick(cfg.fields, field_name, "field"));
    IntegrationOptions opts;
    opts.steps_per_unit = cfg.resolution.steps_per_unit;
    opts.anchor = cfg.interval.a;
    const Worldsheet sheet = pathspace_geodesic(V, cfg.interval, cfg.resolution.S, opts);

    const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
    std::ostringstream body;
    if (g.format == "csv") io::write_csv(body, sheet);
    else if (g.format == "obj") io::write_obj(body, sheet);
    else body << io::to_json(sheet).dump() << '\n';
    const fs::path sheet_file = dir / ("worldsheet." + g.format);
    write_text(sheet_file, body.str());

    const Json summary = {{"energy", sheet_energy(sheet)},
                          {"length", sheet_length(sheet)},
                          {"fiber_residual_max", geodesic_residual(sheet)},
                          {"interval", {cfg.interval.a, cfg.interval.b}},
                          {"s_count", sheet.s_count()},
                          {"t_segments", sheet.t_segments()},
                          {"worldsheet", sheet_file.string()}};
    const std::string text = summary.dump(2) + "\n";
    write_text(dir / "summary.json", text);
    std::cout << text;
    return 0;
}

std::pair<std::string, std::string> two_paths(const ScenarioConfig& cfg, const std::string& a, const std::string& b) {
    if (!a.empty() && !b.empty()) return {a, b};
    if (cfg.paths.size() != 2)
        throw ConfigError("distance: give --path1 and --path2, or a scenario with exactly two paths");
    return {cfg.paths.begin()->first, std::next(cfg.paths.begin())->first};
}

int run_distance(const Globals& g, const std::string& p1, const std::string& p2) {
    const ScenarioConfig cfg = require_config(g);
    const auto [n1, n2] = two_paths(cfg, p1, p2);
    const DiscretePath& a = cfg.path(n1);
    const DiscretePath& b = cfg.path(n2);
    try {
        const double dtilde = pathspace_distance(a, b);
        const Worldsheet sheet = connecting_geodesic(a, b, cfg.resolution.S);
        const double length = sheet_length(sheet);
        const double difference = std::abs(dtilde - length);
        const double bound = cfg.tolerance("distance", 1e-4);
        emit(g, "distance",
             {{"path1", n1}, {"path2", n2}, {"dtilde", dtilde}, {"sheet_length", length},
              {"difference", difference}, {"bound", bound}, {"passed", difference <= bound}});
        return difference <= bound ? 0 : kExitFailed;
    } catch (const NormalNeighborhoodError& e) {
        emit(g, "distance",
             {{"path1", n1}, {"path2", n2}, {"error", e.what()}, {"worst_index", e.worst_index()},
              {"worst_t", e.worst_t()}, {"worst_distance", e.worst_distance()}});
        return kExitNumerical;
    }
}

int run_energy(const Globals& g, const std::string& path_name, const std::string& field_name) {
    const ScenarioConfig cfg = require_config(g);
    if (!field_name.empty() || (path_name.empty() && !cfg.fields.empty())) {
        const std::string name = ScenarioConfig::pick(cfg.fields, field_name, "field");
        IntegrationOptions opts;
        opts.steps_per_unit = cfg.resolution.steps_per_unit;
        opts.anchor = cfg.interval.a;
        const Worldsheet sheet = pathspace_geodesic(cfg.field(name), cfg.interval, cfg.resolution.S, opts);
        emit(g, "energy",
             {{"field", name}, {"sheet_energy", sheet_energy(sheet)},
              {"transverse_energy_sum", transverse_energy_sum(sheet)}, {"sheet_length", sheet_length(sheet)},
              {"sheet_arc_length", sheet_arc_length(sheet)}});
        return 0;
    }
    const std::string name = ScenarioConfig::pick(cfg.paths, path_name, "path");
    const DiscretePath& p = cfg.path(name);
    emit(g, "energy", {{"path", name}, {"energy", path_energy(p)}, {"arc_length", arc_length(p)}});
    return 0;
}

Json windows_json(const DiscretePath& p, const std::vector<BackTrackWindow>& ws) {
    Json out = Json::array();
    for (const auto& w : ws)
        out.push_back({{"T", w.T}, {"sigma", w.sigma}, {"t_start", p.t(w.T)}, {"t_turn", p.t(w.T + w.sigma)},
                       {"t_end", p.t(w.end())}});
    return out;
}

int run_backtrack(const Globals& g, const std::string& input, const std::string& path_name, double tol,
                  bool canonical, bool windows) {
    std::optional<DiscretePath> path;
    if (!input.empty()) {
        const Json j = io::read_json_file(input);
        path = io::path_from_json(j.contains("samples") ? j : j.value("path", j));
    } else {
        const ScenarioConfig cfg = require_config(g);
        path = cfg.path(ScenarioConfig::pick(cfg.paths, path_name, "path"));
        if (tol < 0.0) tol = cfg.tolerance("backtrack", kDefaultBacktrackTolerance);
    }
    if (tol < 0.0) tol = kDefaultBacktrackTolerance;
    if (!canonical) windows = true;
    Json report = Json::object();
    if (windows) report["windows"] = windows_json(*path, detect_backtracks(*path, tol));
    if (canonical) report["canonical"] = io::to_json(canonical_form(*path, tol));
    emit(g, "backtrack", windows && !canonical ? report["windows"] : canonical && !windows ? report["canonical"] : report);
    return 0;
}

std::string morphism_type(const Json& j, const std::string& file) {
    const std::string t = j.value("type", "");
    if (t != "morphism1" && t != "morphism2")
        throw ConfigError(file + ": \"type\" must be \"morphism1\" or \"morphism2\"");
    return t;
}

int run_compose(const Globals& g, const std::vector<std::string>& files, bool horizontal) {
    std::vector<Json> docs;
    for (const auto& f : files) docs.push_back(io::read_json_file(f));
    if (files.size() == 4) {
        std::vector<GeodMorphism2> m;
        for (std::size_t k = 0; k < 4; ++k) {
            if (morphism_type(docs[k], files[k]) != "morphism2")
                throw ConfigError("compose: the exchange check takes four morphism2 files (F1 G1 F2 G2)");
            m.push_back(io::morphism2_from_json(docs[k]));
        }
        const ExchangeReport r = check_exchange(m[0], m[1], m[2], m[3]);
        Json report = {{"passed", r.passed},
                       {"max_discrepancy", std::isfinite(r.max_discrepancy) ? Json(r.max_discrepancy) : Json(nullptr)},
                       {"failing_node", nullptr}};
        if (r.failing_node) report["failing_node"] = {{"s_index", r.failing_node->s_index}, {"t_index", r.failing_node->t_index}};
        if (!r.error.empty()) report["error"] = r.error;
        emit(g, "exchange", report);
        return r.passed ? 0 : kExitFailed;
    }
    if (files.size() != 2) throw ConfigError("compose: give two morphism files, or four for the exchange check");
    const std::string t0 = morphism_type(docs[0], files[0]);
    const std::string t1 = morphism_type(docs[1], files[1]);
    if (t0 != t1) throw ConfigError("compose: both files must hold the same kind of morphism");
    // The first file is applied first.
    if (t0 == "morphism1") {
        emit(g, "composite", io::to_json(compose1(io::morphism1_from_json(docs[1]), io::morphism1_from_json(docs[0]))));
        return 0;
    }
    const GeodMorphism2 F = io::morphism2_from_json(docs[0]);
    const GeodMorphism2 G = io::morphism2_from_json(docs[1]);
    const GeodMorphism2 C = horizontal ? compose2_horizontal(F, G) : compose2_vertical(G, F);
    Json report = io::to_json(C);
    report["sheet"] = io::to_json(C.sheet());
    emit(g, "composite", report);
    return 0;
}

int run_check(const Globals& g, const std::string& suite, bool corrupt, bool timing) {
    checks::CheckOptions opts;
    if (g.seed) opts.seed = *g.seed;
    else if (!g.config.empty()) opts.seed = load_scenario_file(g.config).seed;
    opts.corrupt_reflection = corrupt;
    opts.timing = timing;
    const checks::CheckReport report = checks::run_checks(suite, opts);
    emit(g, "check", report.to_json(timing));
    return report.passed() ? 0 : kExitFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Path-space geodesics, back-track equivalence and composition laws"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "Scenario JSON file");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--seed", g.seed, "Seed for the property suites");
    app.add_option("--format", g.format, "Worldsheet export format")->check(CLI::IsMember({"csv", "json", "obj"}));

    std::string field_name, path_name, path1, path2, input;
    double tol = -1.0;
    bool canonical = false, windows = false, horizontal = false, corrupt = false, timing = false;
    std::vector<std::string> files;
    std::string suite;

    auto* ws = app.add_subcommand("worldsheet", "Integrate the path-space geodesic of a scenario field and export it");
    ws->add_option("--field", field_name, "Field name (default: the first)");

    auto* dist = app.add_subcommand("distance", "Compare the pointwise distance with the connecting sheet length");
    dist->add_option("--path1", path1, "First path name");
    dist->add_option("--path2", path2, "Second path name");

    auto* en = app.add_subcommand("energy", "Energy and length of a path, or of a field's worldsheet");
    en->add_option("--path", path_name, "Path name");
    en->add_option("--field", field_name, "Field name");

    auto* bt = app.add_subcommand("backtrack", "Back-track windows and canonical form of a path");
    bt->add_option("--input", input, "Path JSON file");
    bt->add_option("--path", path_name, "Path name in the scenario");
    bt->add_option("--tol", tol, "Detection tolerance")->check(CLI::NonNegativeNumber);
    bt->add_flag("--canonical", canonical, "Output the canonical form");
    bt->add_flag("--windows", windows, "Output the detected windows (default)");

    auto* cp = app.add_subcommand("compose", "Compose morphisms, or check the exchange law on four 2-morphisms");
    cp->add_option("files", files, "Morphism JSON files, applied in order")->required();
    cp->add_flag("--horizontal", horizontal, "Compose 2-morphisms side by side instead of one after the other");

    auto* ck = app.add_subcommand("check", "Run property suites: manifold, pathspace, backtrack, category or all");
    ck->add_option("--suite", suite, "Suite name")->required();
    ck->add_flag("--corrupt-reflection", corrupt, "Corrupt the reflection fixture (negative control)");
    ck->add_flag("--timing", timing, "Include wall-clock times in the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*ws) return run_worldsheet(g, field_name);
        if (*dist) return run_distance(g, path1, path2);
        if (*en) return run_energy(g, path_name, field_name);
        if (*bt) return run_backtrack(g, input, path_name, tol, canonical, windows);
        if (*cp) return run_compose(g, files, horizontal);
        if (*ck) {
            if (suite.empty()) {
                std::cerr << "check: empty suite selection\n" << ck->help();
                return kExitUsage;
            }
            return run_check(g, suite, corrupt, timing);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ComposabilityError& e) {
        std::cerr << "error (" << to_string(e.condition()) << "): " << e.what() << '\n';
        return kExitFailed;
    } catch (const NormalNeighborhoodError& e) {
        std::cerr << "error: " << e.what() << " (worst t = " << e.worst_t() << ")\n";
        return kExitNumerical;
    } catch (const IntegrationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}
