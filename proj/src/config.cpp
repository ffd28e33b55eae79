#include "hrrp/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hrrp {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

const json& section(const json& root, const char* key) {
    static const json empty = json::object();
    if (!root.contains(key)) return empty;
    const json& s = root.at(key);
    if (!s.is_object()) throw ConfigError(std::string("config section '") + key + "' must be an object");
    return s;
}

double snr_value(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "noiseless" || s == "inf") return kNoiseless;
        throw ConfigError("snr entry '" + s + "' is neither a number nor \"noiseless\"");
    }
    if (!v.is_number()) throw ConfigError("snr entries must be numbers or \"noiseless\"");
    return v.get<double>();
}

json snr_json(double v) {
    if (std::isinf(v) && v > 0) return "noiseless";
    return v;
}

Scenario parse_scenario(const json& s) {
    Scenario sc;
    sc.f0 = get_or(s, "f0_hz", sc.f0);
    sc.delta_f = get_or(s, "delta_f_hz", sc.delta_f);
    sc.num_pulses = get_or(s, "num_pulses", sc.num_pulses);
    sc.range_gate_start = get_or(s, "range_gate_start_m", sc.range_gate_start);
    sc.target_length = get_or(s, "target_length_m", sc.target_length);
    sc.mechanisms = get_or(s, "mechanisms", sc.mechanisms);
    if (s.contains("amplitudes")) {
        const json& a = s.at("amplitudes");
        if (a.is_string()) {
            const auto mode = a.get<std::string>();
            if (mode == "unit") {
                sc.amplitudes.assign(sc.mechanisms.size(), Complex(1.0, 0.0));
            } else if (mode != "aligned") {
                throw ConfigError("scenario.amplitudes must be \"aligned\", \"unit\" or a list of [re, im]");
            }
        } else if (a.is_array()) {
            for (const auto& g : a) {
                if (!g.is_array() || g.size() != 2) throw ConfigError("scenario.amplitudes entries must be [re, im]");
                sc.amplitudes.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
            }
        } else {
            throw ConfigError("scenario.amplitudes has an unsupported type");
        }
    }
    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return sc;
}

TargetSpec parse_target(const json& t, const Scenario& sc) {
    TargetSpec spec;
    spec.mode = target_mode_from_string(get_or<std::string>(t, "mode", "fixed"));
    spec.sparsity = get_or(t, "sparsity", spec.sparsity);
    spec.intensity = get_or(t, "intensity", spec.intensity);
    if (t.contains("mechanism") && !t.at("mechanism").is_null()) spec.mechanism = t.at("mechanism").get<int>();
    if (t.contains("scatterers")) {
        const double dr = range_resolution(sc).delta_r;
        for (const auto& s : t.at("scatterers")) {
            Scatterer sc_item;
            if (s.contains("cell")) {
                sc_item.cell = s.at("cell").get<int>();
            } else if (s.contains("range_m")) {
                sc_item.cell = static_cast<int>(std::lround(s.at("range_m").get<double>() / dr));
            } else {
                throw ConfigError("target.scatterers entries need 'cell' or 'range_m'");
            }
            sc_item.mechanism = get_or(s, "mechanism", 0);
            sc_item.intensity = get_or(s, "intensity", 1.0);
            spec.fixed.scatterers.push_back(sc_item);
        }
    }
    return spec;
}

SdOptions parse_sd_options(const json& s) {
    SdOptions o;
    o.max_iterations = get_or(s, "max_iterations", o.max_iterations);
    o.tolerance = get_or(s, "tolerance", o.tolerance);
    o.patience = get_or(s, "patience", o.patience);
    o.init = sd_init_from_string(get_or<std::string>(s, "init", to_string(o.init)));
    o.method = sd_method_from_string(get_or<std::string>(s, "method", to_string(o.method)));
    o.per_column = get_or(s, "per_column", o.per_column);
    o.initial_smoothing = get_or(s, "initial_smoothing", o.initial_smoothing);
    o.min_smoothing = get_or(s, "min_smoothing", o.min_smoothing);
    o.smoothing_decay = get_or(s, "smoothing_decay", o.smoothing_decay);
    o.stage_length = get_or(s, "stage_length", o.stage_length);
    return o;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be an object");

    RunConfig rc;
    auto& cfg = rc.experiment;
    try {
        cfg.scenario = parse_scenario(section(root, "scenario"));
        cfg.target = parse_target(section(root, "target"), cfg.scenario);

        const json& pulses = section(root, "pulses");
        cfg.pulse_count = get_or(pulses, "count", cfg.pulse_count);
        cfg.pulse_scheme = pulse_scheme_from_string(get_or<std::string>(pulses, "scheme", to_string(cfg.pulse_scheme)));
        cfg.pulse_draw = pulse_draw_from_string(get_or<std::string>(pulses, "draw", to_string(cfg.pulse_draw)));

        const json& exp = section(root, "experiment");
        if (exp.contains("snr_db")) {
            cfg.snr_db.clear();
            for (const auto& v : exp.at("snr_db")) cfg.snr_db.push_back(snr_value(v));
        }
        cfg.trials = get_or(exp, "trials", cfg.trials);
        cfg.master_seed = get_or(exp, "master_seed", cfg.master_seed);
        if (exp.contains("algorithms")) {
            cfg.algorithms.clear();
            for (const auto& a : exp.at("algorithms")) cfg.algorithms.push_back(algorithm_from_string(a.get<std::string>()));
        }
        if (exp.contains("a_omp_mechanism") && !exp.at("a_omp_mechanism").is_null())
            cfg.a_omp_mechanism = exp.at("a_omp_mechanism").get<int>();
        if (exp.contains("k_max") && !exp.at("k_max").is_null()) cfg.k_max = exp.at("k_max").get<int>();
        cfg.success_mode = success_mode_from_string(get_or<std::string>(exp, "success", to_string(cfg.success_mode)));
        cfg.threads = get_or(exp, "threads", cfg.threads);

        const json& sd = section(root, "sd");
        cfg.sd_gamma = get_or(sd, "gamma", cfg.sd_gamma);
        cfg.sd_options = parse_sd_options(sd);
        if (sd.contains("path") && !sd.at("path").is_null()) {
            std::filesystem::path p = sd.at("path").get<std::string>();
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            cfg.sd_path = p.string();
        }

        const json& rec = section(root, "recover");
        rc.recover.algorithm = algorithm_from_string(get_or<std::string>(rec, "algorithm", to_string(rc.recover.algorithm)));
        if (rec.contains("epsilon") && !rec.at("epsilon").is_null()) rc.recover.epsilon = rec.at("epsilon").get<double>();
        if (rec.contains("k_max") && !rec.at("k_max").is_null()) rc.recover.k_max = rec.at("k_max").get<int>();

        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::string dump_config(const RunConfig& rc) {
    const auto& c = rc.experiment;
    json root;
    json amps = json::array();
    for (int d = 0; d < c.scenario.num_mechanisms(); ++d) {
        const Complex g = c.scenario.amplitude(d);
        amps.push_back({g.real(), g.imag()});
    }
    root["scenario"] = {{"f0_hz", c.scenario.f0},
                        {"delta_f_hz", c.scenario.delta_f},
                        {"num_pulses", c.scenario.num_pulses},
                        {"range_gate_start_m", c.scenario.range_gate_start},
                        {"target_length_m", c.scenario.target_length},
                        {"mechanisms", c.scenario.mechanisms},
                        {"amplitudes", amps}};
    json target = {{"mode", to_string(c.target.mode)},
                   {"sparsity", c.target.sparsity},
                   {"intensity", c.target.intensity},
                   {"mechanism", c.target.mechanism ? json(*c.target.mechanism) : json(nullptr)}};
    if (!c.target.fixed.scatterers.empty()) {
        json list = json::array();
        for (const auto& s : c.target.fixed.scatterers)
            list.push_back({{"cell", s.cell}, {"mechanism", s.mechanism}, {"intensity", s.intensity}});
        target["scatterers"] = list;
    }
    root["target"] = target;
    root["pulses"] = {{"count", c.pulse_count}, {"scheme", to_string(c.pulse_scheme)}, {"draw", to_string(c.pulse_draw)}};
    json snrs = json::array();
    for (double s : c.snr_db) snrs.push_back(snr_json(s));
    json algs = json::array();
    for (auto a : c.algorithms) algs.push_back(to_string(a));
    root["experiment"] = {{"snr_db", snrs},
                          {"trials", c.trials},
                          {"master_seed", c.master_seed},
                          {"algorithms", algs},
                          {"a_omp_mechanism", c.a_omp_block()},
                          {"k_max", c.k_max ? json(*c.k_max) : json(nullptr)},
                          {"success", to_string(c.success_mode)},
                          {"threads", c.threads}};
    const auto& o = c.sd_options;
    root["sd"] = {{"gamma", c.sd_gamma},
                  {"max_iterations", o.max_iterations},
                  {"tolerance", o.tolerance},
                  {"patience", o.patience},
                  {"init", to_string(o.init)},
                  {"method", to_string(o.method)},
                  {"per_column", o.per_column},
                  {"initial_smoothing", o.initial_smoothing},
                  {"min_smoothing", o.min_smoothing},
                  {"smoothing_decay", o.smoothing_decay},
                  {"stage_length", o.stage_length},
                  {"path", c.sd_path ? json(*c.sd_path) : json(nullptr)}};
    root["recover"] = {{"algorithm", to_string(rc.recover.algorithm)},
                       {"epsilon", rc.recover.epsilon ? json(*rc.recover.epsilon) : json(nullptr)},
                       {"k_max", rc.recover.k_max ? json(*rc.recover.k_max) : json(nullptr)}};
    return root.dump(2);
}

}  // namespace hrrp
