#pragma once

// Command-line front end: simulate | besov | orlicz | localtime | levelset |
// lnd | verify. One JSON config document, flags override file fields, every
// run writes a manifest that reproduces it. Exit codes: 0 ok, 1 verification
// failure, 2 config error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heatpath/besov.hpp"
#include "heatpath/config.hpp"
#include "heatpath/errors.hpp"
#include "heatpath/io.hpp"
#include "heatpath/localtime.hpp"
#include "heatpath/sampler.hpp"
#include "heatpath/verify.hpp"
#include "heatpath/version.hpp"

namespace heatpath::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace detail {

inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * (static_cast<double>(v.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

inline std::map<std::string, std::string> section_meta(const config::ExperimentConfig& cfg) {
    std::map<std::string, std::string> meta;
    if (const auto* t = std::get_if<kernels::TimeSection>(&cfg.section)) {
        meta["section"] = "time";
        meta["x"] = io::format_double(t->x);
    } else if (const auto* s = std::get_if<kernels::SpaceSection>(&cfg.section)) {
        meta["section"] = "space";
        meta["t"] = io::format_double(s->t);
        meta["window_a"] = io::format_double(s->a);
        meta["window_b"] = io::format_double(s->b);
    } else {
        const auto& st = std::get<kernels::SpaceTimeSection>(cfg.section);
        meta["section"] = "spacetime";
        meta["t0"] = io::format_double(st.t0);
        meta["t1"] = io::format_double(st.t1);
        meta["x0"] = io::format_double(st.x0);
        meta["x1"] = io::format_double(st.x1);
    }
    meta["resolution_j"] = std::to_string(cfg.resolution_j);
    meta["base_seed"] = std::to_string(cfg.base_seed);
    return meta;
}

inline void write_manifest(const config::ExperimentConfig& cfg, const std::string& command) {
    json manifest;
    manifest["schema_version"] = io::k_schema_version;
    manifest["command"] = command;
    manifest["version"] = std::string(k_version);
    manifest["config"] = config::to_json(cfg);
    io::write_json(fs::path(cfg.out_dir) / "manifest.json", manifest);
}

inline std::vector<std::vector<double>> load_or_sample_paths(const config::ExperimentConfig& cfg) {
    std::vector<std::vector<double>> paths;
    if (!cfg.paths_dir.empty()) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(cfg.paths_dir))
            if (entry.path().extension() == ".csv" &&
                entry.path().filename().string().rfind("path_", 0) == 0)
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw ConfigError("paths_dir contains no path_*.csv files");
        for (const auto& file : files) {
            const auto csv = io::read_csv(file);
            std::vector<double> v(csv.rows.size());
            for (std::size_t r = 0; r < csv.rows.size(); ++r) v[r] = csv.number(r, 2);
            paths.push_back(std::move(v));
        }
        return paths;
    }
    const sampler::GridSpec grid{cfg.section, cfg.resolution_j, "cli"};
    auto sampled = sampler::sample_paths(grid, {cfg.base_seed, 0}, cfg.replicates);
    paths.reserve(sampled.size());
    for (auto& p : sampled) paths.push_back(std::move(p.values));
    return paths;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline int cmd_simulate(const config::ExperimentConfig& cfg) {
    config::validate(cfg);
    fs::create_directories(cfg.out_dir);
    const sampler::GridSpec grid{cfg.section, cfg.resolution_j, "simulate"};
    const auto paths = sampler::sample_paths(grid, {cfg.base_seed, 0}, cfg.replicates);
    for (std::size_t r = 0; r < paths.size(); ++r) {
        auto meta = detail::section_meta(cfg);
        meta["replicate"] = std::to_string(r);
        char name[32];
        std::snprintf(name, sizeof(name), "path_r%04zu.csv", r);
        io::CsvWriter csv(fs::path(cfg.out_dir) / name, "path", meta,
                          {"index", "coordinate", "value"});
        for (int i = 0; i < grid.n_points(); ++i)
            csv.row({std::to_string(i), io::format_double(sampler::grid_coordinate(grid, i)),
                     io::format_double(paths[r].values[static_cast<std::size_t>(i)])});
    }
    detail::write_manifest(cfg, "simulate");
    return 0;
}

inline int cmd_besov(const config::ExperimentConfig& cfg) {
    config::validate(cfg);
    config::validate_regularity(cfg);
    fs::create_directories(cfg.out_dir);
    const auto paths = detail::load_or_sample_paths(cfg);
    const kernels::Modulus modulus{cfg.alpha, cfg.lambda};

    io::CsvWriter csv(fs::path(cfg.out_dir) / "besov_levels.csv", "besov_levels",
                      detail::section_meta(cfg), {"replicate", "p", "j", "s_j"});
    json per_seed = json::array();
    std::map<double, std::vector<besov::RegularityReport>> by_p;
    for (std::size_t r = 0; r < paths.size(); ++r) {
        const auto coeffs = besov::schauder_coefficients(paths[r]);
        json seed_entry;
        seed_entry["replicate"] = r;
        for (double p : cfg.p_list) {
            const auto rep =
                besov::regularity_report(coeffs, modulus, p, cfg.little_space_floor);
            for (std::size_t j = 0; j < rep.s.size(); ++j)
                csv.row({std::to_string(r), io::format_double(p), std::to_string(j),
                         io::format_double(rep.s[j])});
            json entry;
            entry["p"] = p;
            entry["norm"] = rep.norm;
            entry["top_half_slope"] = rep.little.slope;
            entry["little_space_violation"] = rep.little.violation;
            entry["in_big_space"] = rep.in_big_space;
            if (cfg.format == "json") entry["s"] = rep.s;
            seed_entry["reports"].push_back(entry);
            by_p[p].push_back(rep);
        }
        per_seed.push_back(seed_entry);
    }

    json aggregate;
    for (const auto& [p, reps] : by_p) {
        std::vector<double> norms, slopes;
        std::size_t violations = 0, big = 0;
        std::size_t n_levels = reps.front().s.size();
        for (const auto& rep : reps) {
            norms.push_back(rep.norm);
            slopes.push_back(rep.little.slope);
            violations += rep.little.violation ? 1 : 0;
            big += rep.in_big_space ? 1 : 0;
        }
        json agg;
        agg["p"] = p;
        agg["in_big_space_rate"] = static_cast<double>(big) / reps.size();
        agg["little_space_violation_rate"] = static_cast<double>(violations) / reps.size();
        agg["norm_median"] = detail::median(norms);
        agg["slope_median"] = detail::median(slopes);
        for (std::size_t j = 0; j < n_levels; ++j) {
            std::vector<double> sj;
            for (const auto& rep : reps) sj.push_back(rep.s[j]);
            agg["s_quantiles"].push_back({{"j", j},
                                          {"q25", detail::quantile(sj, 0.25)},
                                          {"q50", detail::quantile(sj, 0.50)},
                                          {"q75", detail::quantile(sj, 0.75)}});
        }
        aggregate.push_back(agg);
    }

    json report;
    report["schema_version"] = io::k_schema_version;
    report["per_seed"] = per_seed;
    report["aggregate"] = aggregate;
    io::write_json(fs::path(cfg.out_dir) / "besov_report.json", report);
    detail::write_manifest(cfg, "besov");
    return 0;
}

inline int cmd_orlicz(const config::ExperimentConfig& cfg) {
    config::validate(cfg);
    fs::create_directories(cfg.out_dir);
    const auto paths = detail::load_or_sample_paths(cfg);

    io::CsvWriter csv(fs::path(cfg.out_dir) / "orlicz_levels.csv", "orlicz_levels",
                      detail::section_meta(cfg), {"replicate", "j", "o_j"});
    json per_seed = json::array();
    std::vector<double> norms, slopes;
    for (std::size_t r = 0; r < paths.size(); ++r) {
        const auto coeffs = besov::schauder_coefficients(paths[r]);
        const auto orl = besov::orlicz_sequence_norm(coeffs, cfg.orlicz_alpha);
        for (std::size_t j = 0; j < orl.o.size(); ++j)
            csv.row({std::to_string(r), std::to_string(j), io::format_double(orl.o[j])});
        const auto diag = besov::little_space_diagnostic(orl.o, cfg.little_space_floor);
        json entry;
        entry["replicate"] = r;
        entry["norm"] = orl.norm;
        entry["argmax_p"] = orl.argmax_p;
        entry["argmax_j"] = orl.argmax_j;
        entry["top_half_slope"] = diag.slope;
        if (cfg.format == "json") entry["o"] = orl.o;
        per_seed.push_back(entry);
        norms.push_back(orl.norm);
        slopes.push_back(diag.slope);
    }
    json report;
    report["schema_version"] = io::k_schema_version;
    report["alpha"] = cfg.orlicz_alpha;
    report["per_seed"] = per_seed;
    report["aggregate"] = {{"norm_median", detail::median(norms)},
                           {"slope_median", detail::median(slopes)},
                           {"norm_q95", detail::quantile(norms, 0.95)}};
    io::write_json(fs::path(cfg.out_dir) / "orlicz_report.json", report);
    detail::write_manifest(cfg, "orlicz");
    return 0;
}

inline int cmd_localtime(const config::ExperimentConfig& cfg) {
    config::validate(cfg);
    fs::create_directories(cfg.out_dir);
    const auto paths = detail::load_or_sample_paths(cfg);
    const std::size_t n = paths.front().size();
    const int bins = cfg.bins > 0 ? cfg.bins : localtime::default_bin_count(n);

    std::vector<int> stops(n);
    for (std::size_t i = 0; i < n; ++i) stops[i] = static_cast<int>(i);

    // field matrix for the first replicate
    const auto field0 = localtime::occupation_histogram(paths[0], bins, stops);
    {
        auto meta = detail::section_meta(cfg);
        meta["dxi"] = io::format_double(field0.dxi);
        std::vector<std::string> cols = {"xi"};
        for (int s : field0.stops) cols.push_back("t" + std::to_string(s));
        io::CsvWriter csv(fs::path(cfg.out_dir) / "localtime_field.csv", "localtime_field", meta,
                          cols);
        for (std::size_t b = 0; b < field0.values.size(); ++b) {
            std::vector<std::string> row = {io::format_double(field0.xi_centers[b])};
            for (double v : field0.values[b]) row.push_back(io::format_double(v));
            csv.row(row);
        }
    }

    // Hölder exponents of the raw path and of L(0, .) per replicate
    json holder = json::array();
    std::vector<double> alpha_path, alpha_lt;
    std::size_t excluded = 0;
    for (std::size_t r = 0; r < paths.size(); ++r) {
        json entry;
        entry["replicate"] = r;
        try {
            const auto hp = localtime::holder_exponent(paths[r], cfg.lag_levels);
            entry["alpha_path"] = hp.alpha;
            alpha_path.push_back(hp.alpha);
            const auto field = localtime::occupation_histogram(paths[r], bins, stops);
            const auto hl = localtime::holder_exponent(field.row_at(0.0), cfg.lag_levels);
            entry["alpha_localtime"] = hl.alpha;
            alpha_lt.push_back(hl.alpha);
        } catch (const std::exception& e) {
            entry["excluded"] = e.what();
            ++excluded;
        }
        holder.push_back(entry);
    }

    // moment scaling across replicates
    json moments;
    if (static_cast<int>(paths.size()) >= 100) {
        localtime::MomentScalingOptions opts;
        // unset window: use the per-section widths (roughly a third of the
        // increment scale at the finest default lag, h^{1/4} resp. h^{1/2})
        const bool is_space = std::holds_alternative<kernels::SpaceSection>(cfg.section);
        opts.eps = cfg.window_eps > 0.0 ? cfg.window_eps : (is_space ? 0.01 : 0.08);
        opts.anchors = cfg.anchors;
        const auto ms =
            localtime::moment_scaling(paths, cfg.moment_order, cfg.lag_levels, opts);
        io::CsvWriter csv(fs::path(cfg.out_dir) / "moment_scaling.csv", "moment_scaling",
                          detail::section_meta(cfg), {"lag", "moment", "slope", "stderr"});
        for (std::size_t l = 0; l < ms.lags.size(); ++l)
            csv.row({io::format_double(ms.lags[l]), io::format_double(ms.moments[l]),
                     io::format_double(ms.slope), io::format_double(ms.stderr_)});
        moments = {{"order", cfg.moment_order}, {"slope", ms.slope}, {"stderr", ms.stderr_}};
    } else {
        moments = {{"skipped", "needs >= 100 replicates"}, {"replicates", paths.size()}};
    }

    // Fourier vs histogram cross-check on the first replicate
    double mean_abs_diff = 0.0, mean_hist = 0.0;
    for (std::size_t b = 0; b < field0.xi_centers.size(); ++b) {
        const auto f = localtime::fourier_local_time(paths[0], field0.xi_centers[b], 0.0, 1.0,
                                                     cfg.fourier_u_max, cfg.fourier_du);
        const double hist = field0.values[b].back();
        mean_abs_diff += std::fabs(f.tapered - hist);
        mean_hist += hist;
    }
    mean_abs_diff /= static_cast<double>(field0.xi_centers.size());
    mean_hist /= static_cast<double>(field0.xi_centers.size());

    json report;
    report["schema_version"] = io::k_schema_version;
    report["bins"] = bins;
    report["holder"] = holder;
    report["holder_excluded"] = excluded;
    report["alpha_path_median"] = detail::median(alpha_path);
    report["alpha_localtime_median"] = detail::median(alpha_lt);
    report["moment_scaling"] = moments;
    report["fourier_vs_histogram"] = {{"mean_abs_diff", mean_abs_diff},
                                      {"mean_hist", mean_hist}};
    io::write_json(fs::path(cfg.out_dir) / "localtime_report.json", report);
    detail::write_manifest(cfg, "localtime");
    return 0;
}

inline int cmd_levelset(const config::ExperimentConfig& cfg) {
    config::validate(cfg);
    fs::create_directories(cfg.out_dir);
    const auto paths = detail::load_or_sample_paths(cfg);

    json per_seed = json::array();
    std::vector<double> dims;
    std::size_t excluded = 0;
    for (std::size_t r = 0; r < paths.size(); ++r) {
        // level picked as the path value at a uniform anchor, drawn from an
        // auxiliary stream so path draws stay untouched
        rng::Philox aux({cfg.base_seed, r | (std::uint64_t{1} << 63)});
        const auto idx =
            static_cast<std::size_t>(aux.next_uniform() * static_cast<double>(paths[r].size() - 1));
        const double xi = paths[r][idx];
        const auto ls = localtime::level_set(paths[r], xi);
        json entry;
        entry["replicate"] = r;
        entry["level"] = xi;
        entry["cells"] = ls.cells.size();
        try {
            const auto est =
                localtime::box_dimension(ls, cfg.levelset_scales, 16, cfg.levelset_scale_offset);
            entry["dim"] = est.dim;
            entry["stderr"] = est.stderr_;
            dims.push_back(est.dim);
            if (r == 0) {
                io::CsvWriter csv(fs::path(cfg.out_dir) / "levelset_cells.csv", "levelset_cells",
                                  detail::section_meta(cfg), {"cell"});
                for (int c : ls.cells) csv.row({std::to_string(c)});
            }
        } catch (const NumericalError& e) {
            entry["excluded"] = e.what();
            ++excluded;
        }
        per_seed.push_back(entry);
    }
    json report;
    report["schema_version"] = io::k_schema_version;
    report["per_seed"] = per_seed;
    report["excluded"] = excluded;
    report["dim_median"] = detail::median(dims);
    io::write_json(fs::path(cfg.out_dir) / "levelset_report.json", report);
    detail::write_manifest(cfg, "levelset");
    return 0;
}

inline int cmd_lnd(const config::ExperimentConfig& cfg) {
    config::validate(cfg);
    if (cfg.resolution_j > 10)
        throw ConfigError("lnd: conditional-variance scan is cubic in the window; use J <= 10");
    fs::create_directories(cfg.out_dir);

    const auto lnd = sampler::lnd_time_scan(cfg.resolution_j);
    double t_space = 1.0, wa = 0.0, wb = 1.0;
    if (const auto* sp = std::get_if<kernels::SpaceSection>(&cfg.section)) {
        t_space = sp->t;
        wa = sp->a;
        wb = sp->b;
    }
    const auto slnd = sampler::slnd_space_scan(cfg.resolution_j, t_space, wa, wb);

    io::CsvWriter csv(fs::path(cfg.out_dir) / "slnd_points.csv", "slnd_points",
                      detail::section_meta(cfg), {"r", "cond_var", "cond_var_over_r"});
    for (const auto& pt : slnd.points)
        csv.row({io::format_double(pt.r), io::format_double(pt.cond_var),
                 io::format_double(pt.cond_var / pt.r)});

    json report;
    report["schema_version"] = io::k_schema_version;
    report["lnd_time"] = {{"min_ratio", lnd.min_ratio},
                          {"argmin", {lnd.argmin_r, lnd.argmin_s, lnd.argmin_t}},
                          {"triples", lnd.triples}};
    report["slnd_space"] = {{"k_hat", slnd.k_hat}, {"t", t_space}};
    io::write_json(fs::path(cfg.out_dir) / "lnd_report.json", report);
    detail::write_manifest(cfg, "lnd");
    return 0;
}

inline int cmd_verify(const config::ExperimentConfig& cfg) {
    config::validate(cfg);
    fs::create_directories(cfg.out_dir);
    verify::SuiteConfig suite;
    suite.tolerance_scale = cfg.tolerance_scale;
    suite.only = cfg.only;
    suite.seed = cfg.base_seed;
    const auto reports = verify::run_suite(suite);

    io::CsvWriter csv(fs::path(cfg.out_dir) / "verify_report.csv", "verify_report",
                      detail::section_meta(cfg),
                      {"id", "oracle_value", "closed_form_value", "discrepancy", "tolerance",
                       "pass"});
    json rows = json::array();
    bool all_pass = true;
    for (const auto& r : reports) {
        csv.row({r.id, io::format_double(r.oracle_value), io::format_double(r.closed_form_value),
                 io::format_double(r.discrepancy), io::format_double(r.tolerance),
                 r.pass ? "1" : "0"});
        rows.push_back({{"id", r.id},
                        {"oracle_value", r.oracle_value},
                        {"closed_form_value", r.closed_form_value},
                        {"discrepancy", r.discrepancy},
                        {"tolerance", r.tolerance},
                        {"pass", r.pass}});
        all_pass = all_pass && r.pass;
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " discrepancy "
                  << io::format_double(r.discrepancy) << " tolerance "
                  << io::format_double(r.tolerance) << "\n";
    }
    json report;
    report["schema_version"] = io::k_schema_version;
    report["reports"] = rows;
    report["all_pass"] = all_pass;
    io::write_json(fs::path(cfg.out_dir) / "verify_report.json", report);
    detail::write_manifest(cfg, "verify");
    return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args) {
    CLI::App app{"heatpath: exact sampling and regularity analysis of the stochastic heat "
                 "equation driven by space-time white noise"};
    app.require_subcommand(1);

    struct Flags {
        std::string config_path, section, out, format, only;
        std::uint64_t seed = 0;
        int replicates = 0, resolution = 0;
        double tolerance_scale = 0.0;
    } flags;

    std::vector<CLI::App*> cmds;
    for (const char* name : {"simulate", "besov", "orlicz", "localtime", "levelset", "lnd",
                             "verify"}) {
        auto* cmd = app.add_subcommand(name);
        cmd->add_option("--config", flags.config_path, "JSON config file");
        cmd->add_option("--seed", flags.seed, "base seed (overrides config)");
        cmd->add_option("--replicates", flags.replicates, "replicate count");
        cmd->add_option("--resolution", flags.resolution, "dyadic resolution J");
        cmd->add_option("--section", flags.section, "section kind: time|space|spacetime");
        cmd->add_option("--out", flags.out, "output directory");
        cmd->add_option("--format", flags.format, "report format: csv|json");
        cmd->add_option("--only", flags.only, "verify: run only matching oracle ids");
        cmd->add_option("--tolerance-scale", flags.tolerance_scale,
                        "verify: scale all tolerances");
        cmds.push_back(cmd);
    }

    std::vector<std::string> argv_store = args;
    std::vector<char*> argv;
    std::string prog = "heatpath";
    argv.push_back(prog.data());
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        config::ExperimentConfig cfg;
        if (!flags.config_path.empty()) {
            std::ifstream in(flags.config_path);
            if (!in) throw ConfigError("cannot open config file " + flags.config_path);
            json doc;
            try {
                doc = json::parse(in);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("config parse error: ") + e.what());
            }
            cfg = config::from_json(doc);
        }
        CLI::App* active = app.get_subcommands().front();
        const std::string name = active->get_name();
        if (active->count("--seed")) cfg.base_seed = flags.seed;
        if (active->count("--replicates")) cfg.replicates = flags.replicates;
        if (active->count("--resolution")) cfg.resolution_j = flags.resolution;
        if (active->count("--out")) cfg.out_dir = flags.out;
        if (active->count("--format")) cfg.format = flags.format;
        if (active->count("--only")) cfg.only = flags.only;
        if (active->count("--tolerance-scale")) cfg.tolerance_scale = flags.tolerance_scale;
        if (active->count("--section")) {
            if (flags.section == "time") cfg.section = kernels::TimeSection{};
            else if (flags.section == "space") cfg.section = kernels::SpaceSection{};
            else if (flags.section == "spacetime") cfg.section = kernels::SpaceTimeSection{};
            else throw ConfigError("--section must be time, space, or spacetime");
        }

        if (name == "simulate") return cmd_simulate(cfg);
        if (name == "besov") return cmd_besov(cfg);
        if (name == "orlicz") return cmd_orlicz(cfg);
        if (name == "localtime") return cmd_localtime(cfg);
        if (name == "levelset") return cmd_levelset(cfg);
        if (name == "lnd") return cmd_lnd(cfg);
        if (name == "verify") return cmd_verify(cfg);
        throw ConfigError("unknown command " + name);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace heatpath::cli
