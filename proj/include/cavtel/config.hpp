#ifndef CAVTEL_CONFIG_HPP
#define CAVTEL_CONFIG_HPP

#include <optional>
#include <string>

#include "cavtel/protocol.hpp"
#include "cavtel/trajectory.hpp"

namespace cavtel::config {

// Flat JSON configuration. Frequencies are ordinary frequencies in MHz and
// are multiplied by 2*pi on load; times are in us. Unknown keys are rejected.
// Absent schedule keys fall back to the derived defaults: t1 from solve_t1,
// tau1 = 2/kappa, tau2 = 20/kappa, t2 = t1, t_d = 20/(kappa + gamma).
struct RunConfig {
    double g_mhz = 34.0;
    double kappa_mhz = 4.1;
    double gamma_mhz = 2.6;
    double eta = 1.0;
    double omega_over_g = 300.0;
    double delta_over_omega = 10.0;
    double cf_re = 0.7071067811865476;
    double cf_im = 0.0;
    double cg_re = 0.7071067811865476;
    double cg_im = 0.0;
    std::optional<double> t1_us;
    double dt1_frac = 0.0;  // deliberate timing error as a fraction of t1
    std::optional<double> tau1_us;
    std::optional<double> tau2_us;
    std::optional<double> t2_us;
    std::optional<double> td_us;
    std::uint64_t seed = 12345;
    int n_traj = 10000;
};

/// Parse a flat JSON object; throws config_error with key/position context.
RunConfig parse_config(const std::string& text);

/// Read and parse a config file; throws io_error if unreadable.
RunConfig load_config_file(const std::string& path);

struct Resolved {
    dynamics::SystemParams params;
    protocol::ProtocolSchedule schedule;
    protocol::InputState input;
    trajectory::TrajectoryConfig traj;
};

/// Convert to physical quantities and fill every defaulted value. Normalization
/// failures surface as config_error, the overdamped regime as overdamped_error.
Resolved resolve(const RunConfig& cfg);

/// The fully defaulted configuration as a JSON object string (every key
/// present with its effective value), embedded in reports for reproducibility.
std::string serialize_effective(const RunConfig& cfg);

/// Set one scalar for a parameter sweep. Amplitude keys renormalize the
/// opposite coefficient's magnitude (phase kept); the special key "cg" sets a
/// real c_g with c_f = sqrt(1 - c_g^2). Unknown keys raise config_error.
void apply_sweep_value(RunConfig& cfg, const std::string& key, double value);

}  // namespace cavtel::config

#endif
