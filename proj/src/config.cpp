#include "cavtel/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "cavtel/errors.hpp"

namespace cavtel::config {

using nlohmann::json;

namespace {

double require_number(const json& v, const std::string& key) {
    if (!v.is_number())
        throw config_error("config key '" + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config must be a JSON object");

    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "g_mhz") cfg.g_mhz = require_number(value, key);
        else if (key == "kappa_mhz") cfg.kappa_mhz = require_number(value, key);
        else if (key == "gamma_mhz") cfg.gamma_mhz = require_number(value, key);
        else if (key == "eta") cfg.eta = require_number(value, key);
        else if (key == "omega_over_g") cfg.omega_over_g = require_number(value, key);
        else if (key == "delta_over_omega") cfg.delta_over_omega = require_number(value, key);
        else if (key == "cf_re") cfg.cf_re = require_number(value, key);
        else if (key == "cf_im") cfg.cf_im = require_number(value, key);
        else if (key == "cg_re") cfg.cg_re = require_number(value, key);
        else if (key == "cg_im") cfg.cg_im = require_number(value, key);
        else if (key == "t1_us") {
            if (!value.is_null()) cfg.t1_us = require_number(value, key);
        } else if (key == "dt1_frac") cfg.dt1_frac = require_number(value, key);
        else if (key == "tau1_us") {
            if (!value.is_null()) cfg.tau1_us = require_number(value, key);
        } else if (key == "tau2_us") {
            if (!value.is_null()) cfg.tau2_us = require_number(value, key);
        } else if (key == "t2_us") {
            if (!value.is_null()) cfg.t2_us = require_number(value, key);
        } else if (key == "td_us") {
            if (!value.is_null()) cfg.td_us = require_number(value, key);
        }
        else if (key == "seed") {
            if (!value.is_number_integer() && !value.is_number_unsigned())
                throw config_error("config key 'seed' must be an integer");
            cfg.seed = value.get<std::uint64_t>();
        } else if (key == "n_traj") {
            if (!value.is_number_integer() && !value.is_number_unsigned())
                throw config_error("config key 'n_traj' must be an integer");
            cfg.n_traj = value.get<int>();
            if (cfg.n_traj < 1) throw config_error("n_traj must be >= 1");
        } else {
            throw config_error("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw io_error("error reading config file: " + path);
    return parse_config(buf.str());
}

Resolved resolve(const RunConfig& cfg) {
    Resolved r;
    r.params = dynamics::params_from_mhz(cfg.g_mhz, cfg.kappa_mhz, cfg.gamma_mhz,
                                         cfg.eta, cfg.omega_over_g, cfg.delta_over_omega);
    const double t1 = cfg.t1_us.value_or(dynamics::solve_t1(r.params));
    // Window defaults scale with the cavity decay; in the lossless limit fall
    // back to the next decay rate (or the Rabi scale) and an unbounded second
    // window, which routes the success probability to its limit form.
    const double rate = r.params.kappa > 0.0
                            ? r.params.kappa
                            : (r.params.gamma > 0.0 ? r.params.gamma
                                                     : dynamics::beta(r.params));
    const double total_decay = r.params.kappa + r.params.gamma;
    r.schedule.t1 = t1;
    r.schedule.dt1 = cfg.dt1_frac * t1;
    r.schedule.tau1 = cfg.tau1_us.value_or(2.0 / rate);
    r.schedule.tau2 = cfg.tau2_us.value_or(20.0 / rate);
    r.schedule.t2 = cfg.t2_us.value_or(t1);
    r.schedule.t_d = cfg.td_us.value_or(
        total_decay > 0.0 ? 20.0 / total_decay
                          : std::numeric_limits<double>::infinity());
    try {
        r.input = protocol::make_input({cfg.cf_re, cfg.cf_im}, {cfg.cg_re, cfg.cg_im});
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("input state: ") + e.what());
    }
    r.traj.seed = cfg.seed;
    r.traj.n_traj = cfg.n_traj;
    return r;
}

std::string serialize_effective(const RunConfig& cfg) {
    const Resolved r = resolve(cfg);
    json j;
    j["g_mhz"] = cfg.g_mhz;
    j["kappa_mhz"] = cfg.kappa_mhz;
    j["gamma_mhz"] = cfg.gamma_mhz;
    j["eta"] = cfg.eta;
    j["omega_over_g"] = cfg.omega_over_g;
    j["delta_over_omega"] = cfg.delta_over_omega;
    j["cf_re"] = cfg.cf_re;
    j["cf_im"] = cfg.cf_im;
    j["cg_re"] = cfg.cg_re;
    j["cg_im"] = cfg.cg_im;
    j["t1_us"] = r.schedule.t1;
    j["dt1_frac"] = cfg.dt1_frac;
    j["tau1_us"] = r.schedule.tau1;
    j["tau2_us"] = r.schedule.tau2;
    j["t2_us"] = r.schedule.t2;
    j["td_us"] = r.schedule.t_d;
    j["seed"] = cfg.seed;
    j["n_traj"] = cfg.n_traj;
    return j.dump(2);
}

void apply_sweep_value(RunConfig& cfg, const std::string& key, double value) {
    const auto renormalize_cf = [&cfg]() {
        const double cg2 = cfg.cg_re * cfg.cg_re + cfg.cg_im * cfg.cg_im;
        if (cg2 > 1.0) throw config_error("sweep value makes |cg| > 1");
        const double cf = std::sqrt(cfg.cf_re * cfg.cf_re + cfg.cf_im * cfg.cf_im);
        const double target = std::sqrt(1.0 - cg2);
        if (cf > 0.0) {
            cfg.cf_re *= target / cf;
            cfg.cf_im *= target / cf;
        } else {
            cfg.cf_re = target;
            cfg.cf_im = 0.0;
        }
    };
    const auto renormalize_cg = [&cfg]() {
        const double cf2 = cfg.cf_re * cfg.cf_re + cfg.cf_im * cfg.cf_im;
        if (cf2 > 1.0) throw config_error("sweep value makes |cf| > 1");
        const double cg = std::sqrt(cfg.cg_re * cfg.cg_re + cfg.cg_im * cfg.cg_im);
        const double target = std::sqrt(1.0 - cf2);
        if (cg > 0.0) {
            cfg.cg_re *= target / cg;
            cfg.cg_im *= target / cg;
        } else {
            cfg.cg_re = target;
            cfg.cg_im = 0.0;
        }
    };
    if (key == "g_mhz") cfg.g_mhz = value;
    else if (key == "kappa_mhz") cfg.kappa_mhz = value;
    else if (key == "gamma_mhz") cfg.gamma_mhz = value;
    else if (key == "eta") cfg.eta = value;
    else if (key == "omega_over_g") cfg.omega_over_g = value;
    else if (key == "delta_over_omega") cfg.delta_over_omega = value;
    else if (key == "dt1_frac") cfg.dt1_frac = value;
    else if (key == "t1_us") cfg.t1_us = value;
    else if (key == "tau1_us") cfg.tau1_us = value;
    else if (key == "tau2_us") cfg.tau2_us = value;
    else if (key == "t2_us") cfg.t2_us = value;
    else if (key == "td_us") cfg.td_us = value;
    else if (key == "cg") {  // real cg with cf adjusted to keep normalization
        cfg.cg_re = value;
        cfg.cg_im = 0.0;
        renormalize_cf();
    } else if (key == "cf_re") { cfg.cf_re = value; renormalize_cg(); }
    else if (key == "cf_im") { cfg.cf_im = value; renormalize_cg(); }
    else if (key == "cg_re") { cfg.cg_re = value; renormalize_cf(); }
    else if (key == "cg_im") { cfg.cg_im = value; renormalize_cf(); }
    else throw config_error("unknown sweep key '" + key + "'");
}

}  // namespace cavtel::config
