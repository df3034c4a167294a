// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "pathgeo/pathgeo.hpp"

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

using namespace pathgeo;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

struct Selection {
    bool passed = true;
    std::size_t properties = 0;
    std::size_t cases = 0;
    std::string failures;
};

Selection select(const checks::CheckReport& report, const std::vector<std::string>& prefixes) {
    Selection sel;
    for (const auto& r : report.results) {
        bool match = false;
        for (const auto& p : prefixes) match = match || starts_with(r.name, p);
        if (!match) continue;
        ++sel.properties;
        sel.cases += r.cases;
        if (!r.passed) {
            sel.passed = false;
            char buf[96];
            std::snprintf(buf, sizeof buf, " worst=%.3g bound=%.3g", r.worst, r.bound);
            sel.failures += " " + r.name + buf;
            if (!r.note.empty()) sel.failures += " (" + r.note + ")";
        }
    }
    sel.passed = sel.passed && sel.properties > 0;
    return sel;
}

int failures = 0;

void line(const char* id, bool ok, const std::string& what, const std::string& detail) {
    std::printf("%s %s %s: %s\n", id, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void report(const char* id, const std::string& what, const Selection& sel, const std::string& extra = {}) {
    std::string detail = std::to_string(sel.properties) + " properties, " + std::to_string(sel.cases) + " cases";
    if (!extra.empty()) detail += ", " + extra;
    line(id, sel.passed, what, detail + sel.failures);
}

// RK4 endpoints against closed-form geodesics, 200 initial conditions per manifold.
void geodesic_oracle() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t cases = 0;
    for (const auto& m : sample::standard_manifolds()) {
        for (std::size_t k = 0; k < 200; ++k) {
            auto g = sample::stream(42, 0xAC1, cases);
            const Vec x = sample::point(m, g);
            const Vec v = sample::tangent(m, x, g, 2.0);
            const ManifoldPoint end = exp_map_integrated(ManifoldPoint(m, x), TangentVector(ManifoldPoint(m, x), v));
            worst = std::max(worst, m.dist(end.coords, m.geodesic(x, v, 1.0).point));
            ++cases;
        }
    }
    const double t = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu cases, worst=%.3g (bound 1e-5), %.2f s (limit 5 s)", cases, worst, t);
    line("AC1", worst <= 1e-5 && t < 5.0, "geodesic oracle agreement", buf);
}

} // namespace

int main() {
    geodesic_oracle();

    const auto t0 = Clock::now();
    const checks::CheckReport all = checks::run_checks("all");
    const double t_all = seconds_since(t0);

    report("AC2", "exp/log roundtrip", select(all, {"exp_log_roundtrip"}));
    report("AC3", "Fubini identity", select(all, {"fubini_identity"}));
    report("AC4", "distance chain", select(all, {"distance_chain", "latitude_pair_distance"}));
    report("AC5", "minimizing property", select(all, {"minimizing_property"}));
    report("AC6", "transport isometry", select(all, {"sheet_transport_isometry", "latitude_holonomy"}));
    report("AC7", "back-track suite",
           select(all, {"exp_preserves_windows", "split_geodesic", "equivalence_descends_through_exp",
                        "canonical_form_idempotent"}));

    Selection laws = select(all, {"src_tgt_coherence", "identity_laws", "vertical_associativity",
                                  "horizontal_associativity", "exchange_law"});
    char buf[64];
    std::snprintf(buf, sizeof buf, "check all %.1f s (limit 60 s)", t_all);
    if (t_all >= 60.0) laws.passed = false;
    if (!all.passed()) {
        laws.passed = false;
        laws.failures += " check all reported failures";
    }
    report("AC8", "double-category laws", laws, buf);

    report("AC9", "completeness smoke test", select(all, {"sphere_completeness_20pi"}));
    return failures == 0 ? 0 : 1;
}
