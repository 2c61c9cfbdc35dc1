// Command-line driver: analytic figures of merit, Monte-Carlo trajectory
// ensembles, conditioned checkpoint comparison, and parameter sweeps for the
// two-cavity teleportation protocol.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cavtel/analysis.hpp"
#include "cavtel/config.hpp"
#include "cavtel/dynamics.hpp"
#include "cavtel/errors.hpp"
#include "cavtel/protocol.hpp"
#include "cavtel/pulses.hpp"
#include "cavtel/trajectory.hpp"

namespace {

using nlohmann::json;
namespace cfg = cavtel::config;
namespace dyn = cavtel::dynamics;
namespace ana = cavtel::analysis;
namespace proto = cavtel::protocol;
namespace traj = cavtel::trajectory;

constexpr const char* kUnitsNote =
    "rates in rad/us (MHz inputs multiplied by 2*pi at load); times in us; "
    "probabilities dimensionless";

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw cavtel::io_error("cannot open output file: " + out_path);
    out << content;
    if (!out) throw cavtel::io_error("error writing output file: " + out_path);
}

json schedule_json(const proto::ProtocolSchedule& s) {
    return json{{"t1_us", s.t1},   {"dt1_us", s.dt1}, {"tau1_us", s.tau1},
                {"tau2_us", s.tau2}, {"t2_us", s.t2},   {"td_us", s.t_d}};
}

json raman_json(const dyn::SystemParams& p) {
    const auto r = cavtel::pulses::raman_model(p);
    json warnings = json::array();
    if (r.weak_drive_warning) warnings.push_back("delta/Omega < 10");
    if (r.slow_vs_g_warning) warnings.push_back("lambda/g < 10");
    return json{{"lambda_rad_per_us", r.lambda},
                {"duration_us", r.duration},
                {"leakage", r.leakage},
                {"warnings", warnings}};
}

json report_header(const cfg::RunConfig& run) {
    return json{{"units", kUnitsNote},
                {"config", json::parse(cfg::serialize_effective(run))}};
}

struct AnalyticFigures {
    double beta, t1, p, p_prime, f_plus, f_minus, f_avg;
};

AnalyticFigures analytic_figures(const cfg::Resolved& r) {
    AnalyticFigures f;
    f.beta = dyn::beta(r.params);
    f.t1 = r.schedule.t1;
    f.p = ana::success_probability(r.params, r.schedule);
    f.p_prime = ana::success_with_detector(r.params, r.schedule);
    f.f_plus = ana::fidelity_mistimed(r.params, r.schedule, r.input,
                                      dyn::Detector::plus).fidelity;
    f.f_minus = ana::fidelity_mistimed(r.params, r.schedule, r.input,
                                       dyn::Detector::minus).fidelity;
    f.f_avg = 0.5 * (f.f_plus + f.f_minus);
    return f;
}

json figures_json(const AnalyticFigures& f) {
    return json{{"beta_rad_per_us", f.beta}, {"t1_us", f.t1},
                {"p_success", f.p},          {"p_success_detected", f.p_prime},
                {"fidelity_plus", f.f_plus}, {"fidelity_minus", f.f_minus},
                {"fidelity_avg", f.f_avg}};
}

int cmd_params(const cfg::RunConfig& run, const std::string& out_path) {
    const cfg::Resolved r = cfg::resolve(run);
    json j = report_header(run);
    j["beta_rad_per_us"] = dyn::beta(r.params);
    j["schedule"] = schedule_json(r.schedule);
    j["raman"] = raman_json(r.params);
    j["purge_warning"] = r.schedule.purge_warning(r.params);
    write_output(out_path, j.dump(2));
    return 0;
}

int cmd_analytic(const cfg::RunConfig& run, const std::string& out_path) {
    const cfg::Resolved r = cfg::resolve(run);
    json j = report_header(run);
    j.update(figures_json(analytic_figures(r)));

    const auto budget = ana::timing_budget(r.params, r.schedule);
    json rows = json::array();
    for (const auto& row : budget.rows)
        rows.push_back({{"stage", row.stage}, {"duration_us", row.duration}});
    j["timing"] = json{{"stages", rows}, {"total_us", budget.total}};
    j["raman"] = raman_json(r.params);
    j["purge_warning"] = r.schedule.purge_warning(r.params);

    json patterns = json::array();
    for (const auto& outcome : proto::run_analytic(r.params, r.schedule, r.input)) {
        json o;
        o["status"] =
            outcome.status == proto::OutcomeStatus::success ? "success" : "discarded";
        o["weight"] = outcome.weight;
        if (outcome.branch) {
            const auto name = [](dyn::Detector d) {
                return d == dyn::Detector::plus ? "+" : "-";
            };
            o["clicks"] = std::string(name(outcome.branch->first)) +
                          name(outcome.branch->second);
            o["fidelity"] = outcome.fidelity;
        }
        patterns.push_back(std::move(o));
    }
    j["pinned_click_patterns"] = std::move(patterns);
    write_output(out_path, j.dump(2));
    return 0;
}

int cmd_trajectories(const cfg::RunConfig& run, const std::string& out_path,
                     int n_threads) {
    const cfg::Resolved r = cfg::resolve(run);
    const traj::EnsembleResult res =
        traj::run_ensemble(r.params, r.schedule, r.input, r.traj, n_threads);

    json j = report_header(run);
    j["ensemble"] = json{
        {"n_traj", res.n_traj},
        {"n_success", res.n_success},
        {"n_discarded", res.n_discarded},
        {"success_rate", res.success_rate},
        {"success_rate_se", res.success_rate_se},
        {"mean_success_fidelity", res.mean_success_fidelity},
        {"mean_success_fidelity_se", res.mean_success_fidelity_se},
        {"click_pattern_counts",
         json{{"++", res.click_pattern_counts[0]},
              {"+-", res.click_pattern_counts[1]},
              {"-+", res.click_pattern_counts[2]},
              {"--", res.click_pattern_counts[3]}}},
        {"spont_emission_count", res.spont_emission_count},
        {"cycle2_cavity_jumps", res.cycle2_cavity_jumps},
        {"cycle2_spont_jumps", res.cycle2_spont_jumps}};

    const AnalyticFigures f = analytic_figures(r);
    j["analytic"] = figures_json(f);

    const long c2total = res.cycle2_cavity_jumps + res.cycle2_spont_jumps;
    const double measured_branching =
        c2total > 0 ? static_cast<double>(res.cycle2_cavity_jumps) / c2total : 0.0;
    const double ratio = f.p_prime > 0.0 ? res.success_rate / f.p_prime : 0.0;
    j["formula_comparison"] = json{
        {"success_rate_over_formula", ratio},
        {"cycle2_cavity_branching_measured", measured_branching},
        {"kappa_over_kappa_plus_gamma",
         r.params.kappa / (r.params.kappa + r.params.gamma)}};

    if (std::abs(ratio - 1.0) > 0.10) {
        std::cerr << "note: empirical success rate " << fmt12(res.success_rate)
                  << " deviates from the closed-form eta^2*P = " << fmt12(f.p_prime)
                  << " by " << fmt12((ratio - 1.0) * 100.0)
                  << "%; measured cycle-2 cavity branching fraction "
                  << fmt12(measured_branching) << " (kappa/(kappa+gamma) = "
                  << fmt12(r.params.kappa / (r.params.kappa + r.params.gamma))
                  << ")\n";
    }
    write_output(out_path, j.dump(2));
    return 0;
}

int cmd_checkpoints(const cfg::RunConfig& run, const std::string& out_path) {
    const cfg::Resolved r = cfg::resolve(run);
    const auto stages = traj::checkpoint_compare(r.params, r.schedule, r.input);
    json j = report_header(run);
    json rows = json::array();
    for (const auto& [stage, fidelity] : stages)
        rows.push_back({{"stage", proto::stage_name(stage)}, {"fidelity", fidelity}});
    j["checkpoints"] = std::move(rows);
    write_output(out_path, j.dump(2));
    return 0;
}

int cmd_sweep(const cfg::RunConfig& base, const std::string& key,
              const std::vector<double>& values, const std::string& format,
              const std::string& out_path) {
    struct Row {
        double value;
        AnalyticFigures f;
    };
    std::vector<Row> rows;
    rows.reserve(values.size());
    for (const double v : values) {
        cfg::RunConfig run = base;
        cfg::apply_sweep_value(run, key, v);
        rows.push_back({v, analytic_figures(cfg::resolve(run))});
    }
    if (format == "json") {
        json arr = json::array();
        for (const Row& row : rows) {
            json o = figures_json(row.f);
            o["sweep_key"] = key;
            o["value"] = row.value;
            arr.push_back(std::move(o));
        }
        write_output(out_path, arr.dump(2));
    } else {
        std::string csv = "sweep_key,value,beta,t1,P,P_prime,F_plus,F_minus,F_avg\n";
        for (const Row& row : rows) {
            csv += key + ',' + fmt12(row.value) + ',' + fmt12(row.f.beta) + ',' +
                   fmt12(row.f.t1) + ',' + fmt12(row.f.p) + ',' + fmt12(row.f.p_prime) +
                   ',' + fmt12(row.f.f_plus) + ',' + fmt12(row.f.f_minus) + ',' +
                   fmt12(row.f.f_avg) + '\n';
        }
        std::cout << "# " << kUnitsNote << "\n";
        write_output(out_path, csv);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-cavity teleportation protocol simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed_override;
    int n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file");
        sub->add_option("--out", out_path, "output file (default: stdout)");
        sub->add_option("--seed", seed_override, "override the ensemble seed");
    };

    CLI::App* sub_params = app.add_subcommand("params", "echo derived quantities");
    CLI::App* sub_analytic =
        app.add_subcommand("analytic", "closed-form figures of merit");
    CLI::App* sub_traj =
        app.add_subcommand("trajectories", "Monte-Carlo quantum-jump ensemble");
    CLI::App* sub_check = app.add_subcommand(
        "checkpoints", "conditioned trajectory vs analytic pipeline, stage by stage");
    CLI::App* sub_sweep = app.add_subcommand("sweep", "scan one config key");
    for (CLI::App* sub : {sub_params, sub_analytic, sub_traj, sub_check, sub_sweep})
        add_common(sub);

    sub_traj->add_option("--threads", n_threads,
                         "worker threads (result is thread-count independent)")
        ->capture_default_str();

    std::string sweep_key;
    std::vector<double> sweep_values;
    std::string sweep_format = "csv";
    sub_sweep->add_option("--key", sweep_key, "config key to sweep")->required();
    sub_sweep->add_option("--values", sweep_values, "comma-separated values")
        ->required()
        ->delimiter(',');
    sub_sweep->add_option("--format", sweep_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        cfg::RunConfig run;
        if (!config_path.empty()) run = cfg::load_config_file(config_path);
        if (seed_override) run.seed = *seed_override;

        if (sub_params->parsed()) return cmd_params(run, out_path);
        if (sub_analytic->parsed()) return cmd_analytic(run, out_path);
        if (sub_traj->parsed()) return cmd_trajectories(run, out_path, n_threads);
        if (sub_check->parsed()) return cmd_checkpoints(run, out_path);
        if (sub_sweep->parsed())
            return cmd_sweep(run, sweep_key, sweep_values, sweep_format, out_path);
    } catch (const cavtel::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const cavtel::overdamped_error& e) {
        std::cerr << "physical regime error: " << e.what() << '\n';
        return 3;
    } catch (const cavtel::io_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
