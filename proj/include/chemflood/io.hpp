#pragma once

// Model configuration parsing (JSON), machine-readable reports, and CSV
// emission with a reproducibility manifest header on every file.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chemflood/connect.hpp"
#include "chemflood/pdesim.hpp"
#include "chemflood/riemann.hpp"

namespace chemflood {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Model configuration
// ---------------------------------------------------------------------------

inline FluxModel flux_from_json(const json& j) {
    std::string kind = j.value("kind", "boomerang");
    if (kind == "boomerang") return boomerang_flux();
    if (kind == "corey") return corey_flux();
    if (kind == "table") {
        std::vector<double> s = j.at("s").get<std::vector<double>>();
        std::vector<double> c = j.at("c").get<std::vector<double>>();
        auto values = j.at("values").get<std::vector<std::vector<double>>>();
        auto fm = tabulated_flux(std::move(s), std::move(c), std::move(values));
        if (j.contains("fd_step")) fm.fd_step = j.at("fd_step").get<double>();
        return fm;
    }
    throw domain_error("model config: unknown flux kind '" + kind + "'");
}

inline AdsorptionModel adsorption_from_json(const json& j) {
    std::string kind = j.value("kind", "langmuir");
    if (kind == "langmuir") return langmuir_adsorption(j.value("m", 1.0), j.value("b", 1.0));
    if (kind == "linear") return linear_adsorption(j.value("slope", 1.0));
    throw domain_error("model config: unknown adsorption kind '" + kind + "'");
}

inline CapillaryModel capillarity_from_json(const json& j) {
    std::string kind = j.value("kind", "constant");
    if (kind == "constant") return constant_capillarity(j.value("value", 1.0));
    if (kind == "affine")
        return affine_capillarity(j.value("base", 1.0), j.value("slope_s", 0.0),
                                  j.value("slope_c", 0.0));
    throw domain_error("model config: unknown capillarity kind '" + kind + "'");
}

inline ModelSet model_from_json(const json& j) {
    ModelSet m;
    if (j.contains("flux")) m.flux = flux_from_json(j.at("flux"));
    else m.flux = boomerang_flux();
    if (j.contains("adsorption")) m.adsorption = adsorption_from_json(j.at("adsorption"));
    else m.adsorption = langmuir_adsorption();
    if (j.contains("capillarity")) m.capillarity = capillarity_from_json(j.at("capillarity"));
    else m.capillarity = constant_capillarity();
    m.c_minus = j.value("c_minus", 1.0);
    m.c_plus = j.value("c_plus", 0.0);
    if (!(m.c_plus >= 0 && m.c_plus < m.c_minus && m.c_minus <= 1))
        throw domain_error("model config: requires 0 <= c_plus < c_minus <= 1");
    return m;
}

inline json model_to_json(const ModelSet& m) {
    return json{{"flux", {{"kind", m.flux.name}}},
                {"adsorption", {{"kind", m.adsorption.name}}},
                {"capillarity", {{"kind", m.capillarity.name}}},
                {"c_minus", m.c_minus},
                {"c_plus", m.c_plus}};
}

/// Loads a model from a JSON file; the names "boomerang" and "corey" (also
/// with a "builtin:" prefix) select the built-in models directly.
inline ModelSet load_model(const std::string& spec) {
    std::string name = spec;
    if (name.rfind("builtin:", 0) == 0) name = name.substr(8);
    if (name == "boomerang") return boomerang_model();
    if (name == "corey")
        return {corey_flux(), langmuir_adsorption(), constant_capillarity(), 1.0, 0.0};
    std::ifstream in(spec);
    if (!in) throw domain_error("cannot open model file '" + spec + "'");
    json j;
    in >> j;
    return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Run manifest and CSV emission
// ---------------------------------------------------------------------------

/// Reproducibility record written into every output file. Runs are seed-free
/// and deterministic, so the manifest pins the output bytes.
struct RunManifest {
    std::string subcommand;
    std::string model_spec;
    json parameters = json::object();
    std::string version = version_string;
    bool deterministic = true;

    json to_json() const {
        return json{{"subcommand", subcommand},
                    {"model", model_spec},
                    {"parameters", parameters},
                    {"version", version},
                    {"deterministic", deterministic}};
    }
};

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// CSV with a '#'-prefixed manifest line, a header line, and numeric rows
/// formatted to full precision (byte-identical for identical manifests).
inline void write_csv(std::ostream& out, const RunManifest& manifest,
                      const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
    out << "# " << manifest.to_json().dump() << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << columns[i] << (i + 1 < columns.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << format_double(row[i]) << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
}

inline void write_csv_file(const std::string& path, const RunManifest& manifest,
                           const std::vector<std::string>& columns,
                           const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw domain_error("cannot open output file '" + path + "'");
    write_csv(out, manifest, columns, rows);
}

/// (xi, s) rows of a scalar fan sampled at the requested resolution, the
/// range padded a little beyond the edge speeds.
inline std::vector<std::vector<double>> fan_csv_rows(const ScalarFan& fan, std::size_t n) {
    std::vector<std::vector<double>> rows;
    if (fan.empty()) return rows;
    double span = std::max(fan.v_final - fan.v_initial, 0.1);
    for (double xi : linspace(fan.v_initial - 0.1 * span, fan.v_final + 0.1 * span, n))
        rows.push_back({xi, fan.value(xi)});
    return rows;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline json to_json(const ValidationReport& rep) {
    json checks = json::array();
    for (const auto& ch : rep.checks) {
        json c{{"name", ch.name}, {"passed", ch.passed}};
        if (!ch.passed) {
            c["detail"] = ch.detail;
            if (ch.s >= 0) c["s"] = ch.s;
            if (ch.c >= 0) c["c"] = ch.c;
        }
        checks.push_back(c);
    }
    return json{{"all_passed", rep.all_passed()}, {"checks", checks}};
}

inline json to_json(const CriticalPoint& p) {
    return json{{"s", p.s},
                {"c", p.c},
                {"label", to_string(p.label)},
                {"kind", to_string(p.kind)},
                {"eigenvalues", {p.lambda_s, p.lambda_c}},
                {"eigenvector_s", {1.0, 0.0}},
                {"eigenvector_c", {p.ev_c[0], p.ev_c[1]}}};
}

inline json to_json(const PortraitReport& rep) {
    json points = json::array();
    for (const auto& p : rep.points) points.push_back(to_json(p));
    json out{{"v", rep.v},
             {"portrait", to_string(rep.portrait)},
             {"points", points},
             {"min_interior_margin", rep.min_interior_margin}};
    if (rep.gap) out["gap"] = {rep.gap->first, rep.gap->second};
    return out;
}

inline json to_json(const VelocityWindow& w) {
    return json{{"v_min", w.v_min},
                {"v_max", w.v_max},
                {"v_max_kind", to_string(w.v_max_kind)},
                {"v_0I", w.v_0i},
                {"c_at_vmin", w.c_at_vmin}};
}

inline json to_json(const ConnectionResult& r) {
    return json{{"v", r.v},
                {"kappa", r.kappa},
                {"s_minus", r.s_minus},
                {"s_plus", r.s_plus},
                {"mismatch", r.mismatch},
                {"c0", r.c0},
                {"system", to_string(r.kind)},
                {"at_window_boundary", r.at_window_boundary},
                {"samples", r.trajectory.size()}};
}

inline json to_json(const ScalarFan& fan) {
    json elems = json::array();
    for (const auto& e : fan.elements) {
        elems.push_back(json{{"kind", e.kind == FanElement::Kind::shock ? "shock" : "rarefaction"},
                             {"s_from", e.s_from},
                             {"s_to", e.s_to},
                             {"v_from", e.v_from},
                             {"v_to", e.v_to}});
    }
    return json{{"c", fan.c},
                {"s_left", fan.s_left},
                {"s_right", fan.s_right},
                {"empty", fan.empty()},
                {"elements", elems}};
}

inline json to_json(const WaveSequence& seq) {
    return json{{"left_fan", to_json(seq.left_fan)},
                {"c_shock",
                 {{"s_minus", seq.shock.s_minus},
                  {"c_minus", seq.shock.c_minus},
                  {"s_plus", seq.shock.s_plus},
                  {"c_plus", seq.shock.c_plus},
                  {"v", seq.shock.v},
                  {"kappa", seq.shock.kappa},
                  {"rh_residuals", {seq.shock.rh_residuals[0], seq.shock.rh_residuals[1]}}}},
                {"right_fan", to_json(seq.right_fan)}};
}

inline json to_json(const VKappaCurve& curve) {
    json samples = json::array();
    for (const auto& s : curve.samples)
        samples.push_back(json{{"v", s.v},
                               {"kappa", s.kappa},
                               {"s_minus", s.s_minus},
                               {"s_plus", s.s_plus},
                               {"rh_residual", s.rh_residual},
                               {"integral_residual", s.eq_residual}});
    return json{{"window", to_json(curve.window)},
                {"kappa_crit", curve.kappa_crit},
                {"samples", samples}};
}

inline json to_json(const FrontSpeedEstimate& est) {
    return json{{"speed", est.speed},
                {"ci_halfwidth", est.ci_halfwidth},
                {"shape_change", est.shape_change},
                {"n_used", est.n_used}};
}

} // namespace chemflood
