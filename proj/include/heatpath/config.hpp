#pragma once

// Experiment configuration: one JSON document, strict about unknown keys,
// validated before any computation. Command-line flags override file fields;
// defaults fill the rest (flags > file > defaults).

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatpath/errors.hpp"
#include "heatpath/kernels.hpp"
#include "heatpath/sampler.hpp"

namespace heatpath::config {

struct ExperimentConfig {
    kernels::SectionKind section = kernels::TimeSection{};
    int resolution_j = 8;
    std::uint64_t base_seed = 1;
    int replicates = 1;

    // regularity analysis
    double alpha = 0.25;
    double lambda = 0.0;
    std::vector<double> p_list = {6.0};
    double orlicz_alpha = 0.25;
    double little_space_floor = 0.25;

    // local-time options
    int bins = 0;  // 0 = default_bin_count(grid)
    double fourier_u_max = 256.0;
    double fourier_du = 0.25;
    std::vector<int> lag_levels = {4, 5, 6, 7, 8, 9};
    int moment_order = 2;
    int anchors = 8;
    double window_eps = 0.0;  // 0 = scale to path spread

    // level-set options
    int levelset_scales = 6;
    int levelset_scale_offset = 4;

    // verify options
    double tolerance_scale = 1.0;
    std::string only;

    std::string out_dir = "out";
    std::string format = "csv";   // csv | json (report flavor; tables stay csv)
    std::string paths_dir;        // optional: analyze previously simulated paths
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ConfigError("unknown config key '" + it.key() + "' in " + where);
    }
}

inline kernels::SectionKind parse_section(const nlohmann::json& j) {
    const std::string kind = j.value("kind", "time");
    if (kind == "time") {
        reject_unknown(j, {"kind", "x"}, "section (time)");
        return kernels::TimeSection{j.value("x", 0.0)};
    }
    if (kind == "space") {
        reject_unknown(j, {"kind", "t", "window"}, "section (space)");
        kernels::SpaceSection s;
        s.t = j.value("t", 1.0);
        if (j.contains("window")) {
            const auto& w = j.at("window");
            if (!w.is_array() || w.size() != 2) throw ConfigError("section.window must be [a,b]");
            s.a = w[0].get<double>();
            s.b = w[1].get<double>();
        }
        return s;
    }
    if (kind == "spacetime") {
        reject_unknown(j, {"kind", "t_range", "x_range"}, "section (spacetime)");
        kernels::SpaceTimeSection s;
        if (j.contains("t_range")) {
            const auto& r = j.at("t_range");
            if (!r.is_array() || r.size() != 2) throw ConfigError("section.t_range must be [t0,t1]");
            s.t0 = r[0].get<double>();
            s.t1 = r[1].get<double>();
        }
        if (j.contains("x_range")) {
            const auto& r = j.at("x_range");
            if (!r.is_array() || r.size() != 2) throw ConfigError("section.x_range must be [x0,x1]");
            s.x0 = r[0].get<double>();
            s.x1 = r[1].get<double>();
        }
        return s;
    }
    throw ConfigError("section.kind must be time, space, or spacetime");
}

} // namespace detail

inline ExperimentConfig from_json(const nlohmann::json& j) {
    detail::reject_unknown(j,
                           {"section", "resolution_j", "seed", "analysis", "out", "format",
                            "paths_dir", "verify"},
                           "config root");
    ExperimentConfig cfg;
    if (j.contains("section")) cfg.section = detail::parse_section(j.at("section"));
    cfg.resolution_j = j.value("resolution_j", cfg.resolution_j);
    if (j.contains("seed")) {
        const auto& s = j.at("seed");
        detail::reject_unknown(s, {"base", "count"}, "seed");
        cfg.base_seed = s.value("base", cfg.base_seed);
        cfg.replicates = s.value("count", cfg.replicates);
    }
    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        detail::reject_unknown(a,
                               {"alpha", "lambda", "p", "orlicz_alpha", "little_space_floor",
                                "localtime", "levelset"},
                               "analysis");
        cfg.alpha = a.value("alpha", cfg.alpha);
        cfg.lambda = a.value("lambda", cfg.lambda);
        if (a.contains("p")) cfg.p_list = a.at("p").get<std::vector<double>>();
        cfg.orlicz_alpha = a.value("orlicz_alpha", cfg.orlicz_alpha);
        cfg.little_space_floor = a.value("little_space_floor", cfg.little_space_floor);
        if (a.contains("localtime")) {
            const auto& lt = a.at("localtime");
            detail::reject_unknown(
                lt, {"bins", "fourier_u_max", "fourier_du", "lags", "moment_order", "anchors",
                     "window_eps"},
                "analysis.localtime");
            cfg.bins = lt.value("bins", cfg.bins);
            cfg.fourier_u_max = lt.value("fourier_u_max", cfg.fourier_u_max);
            cfg.fourier_du = lt.value("fourier_du", cfg.fourier_du);
            if (lt.contains("lags")) cfg.lag_levels = lt.at("lags").get<std::vector<int>>();
            cfg.moment_order = lt.value("moment_order", cfg.moment_order);
            cfg.anchors = lt.value("anchors", cfg.anchors);
            cfg.window_eps = lt.value("window_eps", cfg.window_eps);
        }
        if (a.contains("levelset")) {
            const auto& ls = a.at("levelset");
            detail::reject_unknown(ls, {"scales", "scale_offset"}, "analysis.levelset");
            cfg.levelset_scales = ls.value("scales", cfg.levelset_scales);
            cfg.levelset_scale_offset = ls.value("scale_offset", cfg.levelset_scale_offset);
        }
    }
    if (j.contains("verify")) {
        const auto& v = j.at("verify");
        detail::reject_unknown(v, {"tolerance_scale", "only"}, "verify");
        cfg.tolerance_scale = v.value("tolerance_scale", cfg.tolerance_scale);
        cfg.only = v.value("only", cfg.only);
    }
    cfg.out_dir = j.value("out", cfg.out_dir);
    cfg.format = j.value("format", cfg.format);
    cfg.paths_dir = j.value("paths_dir", cfg.paths_dir);
    return cfg;
}

/// Range validation shared by every command; commands add their own checks.
inline void validate(const ExperimentConfig& cfg) {
    try {
        kernels::validate(cfg.section);
        sampler::validate(sampler::GridSpec{cfg.section, cfg.resolution_j, ""});
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.replicates < 1) throw ConfigError("seed.count must be >= 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("analysis.alpha must lie in (0,1)");
    if (!(cfg.lambda >= 0.0)) throw ConfigError("analysis.lambda must be >= 0");
    if (!(cfg.orlicz_alpha > 0.0 && cfg.orlicz_alpha < 1.0))
        throw ConfigError("analysis.orlicz_alpha must lie in (0,1)");
    if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("format must be csv or json");
    if (cfg.moment_order < 2 || cfg.moment_order % 2 != 0)
        throw ConfigError("analysis.localtime.moment_order must be a positive even integer");
}

/// Extra hypotheses for commands that compute sequence-space Besov norms.
inline void validate_regularity(const ExperimentConfig& cfg) {
    for (double p : cfg.p_list) {
        if (!(p > 1.0)) throw ConfigError("analysis.p entries must be > 1");
        if (!(cfg.alpha * p > 1.0))
            throw ConfigError("analysis requires alpha * p > 1 (got alpha=" +
                              std::to_string(cfg.alpha) + ", p=" + std::to_string(p) + ")");
    }
}

/// Normalized JSON echo of the configuration (what the manifest records).
inline nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    if (const auto* t = std::get_if<kernels::TimeSection>(&cfg.section)) {
        j["section"] = {{"kind", "time"}, {"x", t->x}};
    } else if (const auto* s = std::get_if<kernels::SpaceSection>(&cfg.section)) {
        j["section"] = {{"kind", "space"}, {"t", s->t}, {"window", {s->a, s->b}}};
    } else {
        const auto& st = std::get<kernels::SpaceTimeSection>(cfg.section);
        j["section"] = {{"kind", "spacetime"},
                        {"t_range", {st.t0, st.t1}},
                        {"x_range", {st.x0, st.x1}}};
    }
    j["resolution_j"] = cfg.resolution_j;
    j["seed"] = {{"base", cfg.base_seed}, {"count", cfg.replicates}};
    j["analysis"] = {
        {"alpha", cfg.alpha},
        {"lambda", cfg.lambda},
        {"p", cfg.p_list},
        {"orlicz_alpha", cfg.orlicz_alpha},
        {"little_space_floor", cfg.little_space_floor},
        {"localtime",
         {{"bins", cfg.bins},
          {"fourier_u_max", cfg.fourier_u_max},
          {"fourier_du", cfg.fourier_du},
          {"lags", cfg.lag_levels},
          {"moment_order", cfg.moment_order},
          {"anchors", cfg.anchors},
          {"window_eps", cfg.window_eps}}},
        {"levelset",
         {{"scales", cfg.levelset_scales}, {"scale_offset", cfg.levelset_scale_offset}}}};
    j["verify"] = {{"tolerance_scale", cfg.tolerance_scale}, {"only", cfg.only}};
    j["out"] = cfg.out_dir;
    j["format"] = cfg.format;
    if (!cfg.paths_dir.empty()) j["paths_dir"] = cfg.paths_dir;
    return j;
}

} // namespace heatpath::config
