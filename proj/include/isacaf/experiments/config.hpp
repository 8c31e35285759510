// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Experiment configuration: JSON in, validated struct out.
//
// Keys ending in "_db" carry decibel values. Unknown keys are rejected so a
// typo never silently falls back to a default.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "isacaf/channel.hpp"
#include "isacaf/detect.hpp"
#include "isacaf/pa.hpp"
#include "isacaf/signaling.hpp"

namespace isacaf::experiments {

using json = nlohmann::json;

struct PaSettings {
    double ibo_db = 1.0;
    std::optional<double> v_sat;  // default: the limiter's 1 dB point relation
    double p1db = 1.0;
    cplx gain{1.0, 0.0};

    PaConfig at_ibo(double db) const
    {
        PaConfig c = PaConfig::sel_ibo_db(db);
        c.p1db = p1db;
        c.G = gain;
        c.v_sat = v_sat ? *v_sat : std::sqrt(p1db / kSelCompressionRatio);
        c.validate();
        return c;
    }
    PaConfig nonlinear() const { return at_ibo(ibo_db); }
    PaConfig linear() const { return PaConfig::linear_pa(gain); }
};

struct ExperimentConfig {
    std::string scenario;
    std::vector<ConstellationSpec> constellations;  // empty: scenario default
    std::vector<BasisKind> bases;                    // empty: scenario default
    std::size_t N = 64, M = 64, L = 16;
    PaSettings pa;
    std::vector<double> ibo_sweep_db;   // empty: scenario default
    std::vector<std::size_t> n_sweep;   // empty: scenario default
    std::vector<Target> targets{{cplx(1.0, 0.0), 4, 0.0}, {cplx(std::pow(10.0, -0.5), 0.0), 8, 0.0}};
    std::vector<double> snr_db;         // empty: scenario default
    double snr_point_db = 20.0;         // single-realization scenarios
    std::size_t trials = 0;             // 0: scenario default
    std::uint64_t seed = 1;
    std::string out = "out";
    unsigned workers = 1;
    bool plots = false;
    std::size_t zero_padding = 1;       // N_Per = zp N, M_Per = zp M
    std::size_t pd_symbols = 1;         // symbols per Pd trial
    std::size_t weak_bin = 8;
    CfarConfig cfar{};
    CalibrationMode calibration = CalibrationMode::Nominal;
    std::size_t calibration_trials = 40000;

    void validate() const
    {
        FrameConfig{N, M, L}.validate();
        if (zero_padding < 1) throw ConfigError("config: zero_padding must be >= 1");
        if (pd_symbols < 1) throw ConfigError("config: pd_symbols must be >= 1");
        if (workers < 1) throw ConfigError("config: workers must be >= 1");
        for (std::size_t n : n_sweep) FrameConfig{n, 1, 0}.validate();
        for (const auto& t : targets)
            if (t.delay > L) throw ConfigError("config: target delay " + std::to_string(t.delay) + " exceeds the CP length");
        cfar.validate(false);
        pa.nonlinear();
        for (double db : ibo_sweep_db) pa.at_ibo(db);
    }

    std::vector<ConstellationSpec> constellations_or(std::vector<ConstellationSpec> fallback) const
    {
        return constellations.empty() ? fallback : constellations;
    }
    std::size_t trials_or(std::size_t fallback) const { return trials ? trials : fallback; }
};

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where + " (allowed: " + list + ")");
        }
}

template <class T>
T get(const json& j, const char* key, const std::string& where)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

inline cplx parse_complex(const json& v, const std::string& where)
{
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError("config: " + where + " must be a number or [re, im]");
}

inline Target parse_target(const json& j)
{
    reject_unknown(j, {"gain_db", "phase_deg", "b", "delay", "doppler"}, "target");
    Target t;
    if (j.contains("b") && j.contains("gain_db")) throw ConfigError("config: target takes either 'b' or 'gain_db', not both");
    if (j.contains("b")) t.b = parse_complex(j["b"], "target b");
    else {
        const double g = j.contains("gain_db") ? get<double>(j, "gain_db", "target") : 0.0;
        const double ph = j.contains("phase_deg") ? get<double>(j, "phase_deg", "target") : 0.0;
        t.b = std::polar(std::pow(10.0, g / 20.0), ph * kPi / 180.0);
    }
    if (j.contains("delay")) {
        const long d = get<long>(j, "delay", "target");
        if (d < 0) throw ConfigError("config: target delay must be >= 0");
        t.delay = static_cast<std::size_t>(d);
    }
    if (j.contains("doppler")) t.doppler = get<double>(j, "doppler", "target");
    return t;
}

inline json target_json(const Target& t)
{
    return {{"b", {t.b.real(), t.b.imag()}}, {"delay", t.delay}, {"doppler", t.doppler}};
}

inline std::size_t get_count(const json& j, const char* key, const std::string& where)
{
    const long v = get<long>(j, key, where);
    if (v < 0) throw ConfigError("config: '" + std::string(key) + "' must be >= 0");
    return static_cast<std::size_t>(v);
}

} // namespace detail

/// Apply the keys present in `j` on top of `cfg`.
inline void apply_json(ExperimentConfig& cfg, const json& j)
{
    using namespace detail;
    reject_unknown(j,
                   {"scenario", "constellations", "bases", "N", "M", "L", "pa", "ibo_sweep_db", "n_sweep", "targets",
                    "snr_db", "snr_point_db", "trials", "seed", "out", "workers", "plots", "zero_padding", "pd_symbols",
                    "weak_bin", "cfar"},
                   "config");
    const std::string top = "config";
    if (j.contains("scenario")) cfg.scenario = get<std::string>(j, "scenario", top);
    if (j.contains("constellations")) {
        cfg.constellations.clear();
        for (const auto& c : j["constellations"]) {
            if (!c.is_string()) throw ConfigError("config: constellations must be strings like \"16-QAM\"");
            cfg.constellations.push_back(parse_constellation(c.get<std::string>()));
        }
    }
    if (j.contains("bases")) {
        cfg.bases.clear();
        for (const auto& b : j["bases"]) {
            if (!b.is_string()) throw ConfigError("config: bases must be strings (ofdm, sc, cdma)");
            cfg.bases.push_back(parse_basis(b.get<std::string>()));
        }
    }
    if (j.contains("N")) cfg.N = get_count(j, "N", top);
    if (j.contains("M")) cfg.M = get_count(j, "M", top);
    if (j.contains("L")) cfg.L = get_count(j, "L", top);
    if (j.contains("pa")) {
        const json& p = j["pa"];
        reject_unknown(p, {"ibo_db", "v_sat", "p1db", "p1db_db", "gain"}, "pa");
        if (p.contains("p1db") && p.contains("p1db_db")) throw ConfigError("config: give p1db or p1db_db, not both");
        if (p.contains("ibo_db")) cfg.pa.ibo_db = get<double>(p, "ibo_db", "pa");
        if (p.contains("v_sat")) cfg.pa.v_sat = get<double>(p, "v_sat", "pa");
        if (p.contains("p1db")) cfg.pa.p1db = get<double>(p, "p1db", "pa");
        if (p.contains("p1db_db")) cfg.pa.p1db = db_to_linear(get<double>(p, "p1db_db", "pa"));
        if (p.contains("gain")) cfg.pa.gain = parse_complex(p["gain"], "pa gain");
    }
    if (j.contains("ibo_sweep_db")) cfg.ibo_sweep_db = get<std::vector<double>>(j, "ibo_sweep_db", top);
    if (j.contains("n_sweep")) cfg.n_sweep = get<std::vector<std::size_t>>(j, "n_sweep", top);
    if (j.contains("targets")) {
        cfg.targets.clear();
        for (const auto& t : j["targets"]) cfg.targets.push_back(parse_target(t));
    }
    if (j.contains("snr_db")) cfg.snr_db = get<std::vector<double>>(j, "snr_db", top);
    if (j.contains("snr_point_db")) cfg.snr_point_db = get<double>(j, "snr_point_db", top);
    if (j.contains("trials")) cfg.trials = get_count(j, "trials", top);
    if (j.contains("seed")) cfg.seed = get<std::uint64_t>(j, "seed", top);
    if (j.contains("out")) cfg.out = get<std::string>(j, "out", top);
    if (j.contains("workers")) cfg.workers = static_cast<unsigned>(get_count(j, "workers", top));
    if (j.contains("plots")) cfg.plots = get<bool>(j, "plots", top);
    if (j.contains("zero_padding")) cfg.zero_padding = get_count(j, "zero_padding", top);
    if (j.contains("pd_symbols")) cfg.pd_symbols = get_count(j, "pd_symbols", top);
    if (j.contains("weak_bin")) cfg.weak_bin = get_count(j, "weak_bin", top);
    if (j.contains("cfar")) {
        const json& c = j["cfar"];
        reject_unknown(c, {"window", "guard", "pfa", "factor", "calibration", "calibration_trials"}, "cfar");
        if (c.contains("window")) cfg.cfar.window = get_count(c, "window", "cfar");
        if (c.contains("guard")) cfg.cfar.guard = get_count(c, "guard", "cfar");
        if (c.contains("pfa")) cfg.cfar.pfa = get<double>(c, "pfa", "cfar");
        if (c.contains("factor")) cfg.cfar.factor = get<double>(c, "factor", "cfar");
        if (c.contains("calibration_trials")) cfg.calibration_trials = get_count(c, "calibration_trials", "cfar");
        if (c.contains("calibration")) {
            const std::string m = get<std::string>(c, "calibration", "cfar");
            if (m == "nominal") cfg.calibration = CalibrationMode::Nominal;
            else if (m == "pipeline") cfg.calibration = CalibrationMode::Pipeline;
            else throw ConfigError("config: cfar.calibration must be 'nominal' or 'pipeline'");
        }
    }
}

inline ExperimentConfig parse_config(const json& j)
{
    ExperimentConfig cfg;
    apply_json(cfg, j);
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

/// Full snapshot, stored in the run manifest; parse_config(to_json(c)) == c.
inline json to_json(const ExperimentConfig& c)
{
    json j;
    j["scenario"] = c.scenario;
    j["constellations"] = json::array();
    for (const auto& s : c.constellations) j["constellations"].push_back(s.name());
    j["bases"] = json::array();
    for (auto b : c.bases) j["bases"].push_back(basis_name(b));
    j["N"] = c.N;
    j["M"] = c.M;
    j["L"] = c.L;
    json pa{{"ibo_db", c.pa.ibo_db}, {"p1db", c.pa.p1db}, {"gain", {c.pa.gain.real(), c.pa.gain.imag()}}};
    if (c.pa.v_sat) pa["v_sat"] = *c.pa.v_sat;
    j["pa"] = pa;
    j["ibo_sweep_db"] = c.ibo_sweep_db;
    j["n_sweep"] = c.n_sweep;
    j["targets"] = json::array();
    for (const auto& t : c.targets) j["targets"].push_back(detail::target_json(t));
    j["snr_db"] = c.snr_db;
    j["snr_point_db"] = c.snr_point_db;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["out"] = c.out;
    j["workers"] = c.workers;
    j["plots"] = c.plots;
    j["zero_padding"] = c.zero_padding;
    j["pd_symbols"] = c.pd_symbols;
    j["weak_bin"] = c.weak_bin;
    j["cfar"] = {{"window", c.cfar.window},
                 {"guard", c.cfar.guard},
                 {"pfa", c.cfar.pfa},
                 {"factor", c.cfar.factor},
                 {"calibration", c.calibration == CalibrationMode::Nominal ? "nominal" : "pipeline"},
                 {"calibration_trials", c.calibration_trials}};
    return j;
}

/// Pd scenario for one constellation / amplifier combination of this config.
inline PdScenario pd_scenario(const ExperimentConfig& c, ConstellationSpec cs, bool linear, bool distortion_limited)
{
    PdScenario sc;
    sc.constellation = cs;
    sc.frame = FrameConfig{c.N, c.pd_symbols, c.L};
    sc.pa = linear ? c.pa.linear() : c.pa.nonlinear();
    sc.targets = c.targets;
    sc.weak_bin = c.weak_bin;
    sc.distortion_limited = distortion_limited;
    sc.cfar = c.cfar;
    sc.calibration = c.calibration;
    sc.calibration_trials = c.calibration_trials;
    sc.zero_padding = c.zero_padding;
    return sc;
}

} // namespace isacaf::experiments
