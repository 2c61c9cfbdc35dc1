#ifndef CAVTEL_DYNAMICS_HPP
#define CAVTEL_DYNAMICS_HPP

#include <array>

#include "cavtel/errors.hpp"
#include "cavtel/hilbert.hpp"

namespace cavtel::dynamics {

using hilbert::Complex;
using hilbert::Operator;
using hilbert::StateVector;

// Physical rates as angular frequencies in rad/us, times in us. Configuration
// entered in ordinary MHz is multiplied by 2*pi on load.
struct SystemParams {
    double g = 0.0;            // atom-cavity coupling, rad/us
    double kappa = 0.0;        // cavity decay rate, rad/us
    double gamma = 0.0;        // atomic spontaneous emission rate, rad/us
    double eta = 1.0;          // detector efficiency in [0, 1]
    double omega_raman = 0.0;  // classical Rabi frequency, rad/us
    double delta_raman = 0.0;  // Raman detuning, rad/us
};

/// Validating constructor; throws overdamped_error when g^2 <= (kappa-gamma)^2/16
/// and std::invalid_argument on any other bad rate.
SystemParams make_system_params(double g, double kappa, double gamma, double eta,
                                double omega_raman = 0.0, double delta_raman = 0.0);

/// Same validation, with g/kappa/gamma given as ordinary frequencies in MHz and
/// the Raman drive as ratios Omega/g and delta/Omega.
SystemParams params_from_mhz(double g_mhz, double kappa_mhz, double gamma_mhz,
                             double eta, double omega_over_g, double delta_over_omega);

/// Damped vacuum-Rabi frequency sqrt(g^2 - (kappa - gamma)^2 / 16), rad/us.
double beta(const SystemParams& p);

/// H_con = sum_j [ g (a_j S_j^+ + a_j^dag S_j^-) - i kappa/2 a_j^dag a_j
///                 - i gamma/2 |e_j><e_j| ] on the 36-dim basis.
Operator conditional_hamiltonian(const SystemParams& p);

// Action of exp(-i H_con t) on one atom-cavity pair. H_con factorizes per pair
// and each pair couples only {|e,0>, |g,1>}; the remaining levels pick up
// scalar decay factors. |e,1> is outside the protocol's excitation budget and
// is carried as pure decay.
struct PairPropagator {
    Complex ee, eg, ge, gg;  // 2x2 block on {|e,0>, |g,1>}
    double f1;               // |f,1> factor exp(-kappa t / 2)
    double e1;               // |e,1> factor exp(-(kappa + gamma) t / 2)
};

PairPropagator pair_propagator(const SystemParams& p, double t);

/// In-place application of one pair's propagator; pair is 1 or 2.
void apply_pair_propagator(StateVector& psi, const PairPropagator& u, int pair);

/// In-place exp(-i H_con t) on the full state (both pairs).
void evolve_no_jump(StateVector& psi, const SystemParams& p, double t);

/// Dense exp(-i H_con t) assembled from the pair blocks. Throws
/// std::invalid_argument for t < 0.
Operator no_jump_propagator(const SystemParams& p, double t);

struct RabiAmplitudes {
    Complex amp_e0;  // e^{-(k+G)t/4} [cos(bt) + (k-G)/(4b) sin(bt)]
    Complex amp_g1;  // -i (g/b) e^{-(k+G)t/4} sin(bt)
};

/// Closed-form damped vacuum-Rabi amplitudes for a pair starting in |e,0>.
RabiAmplitudes rabi_e0(const SystemParams& p, double t);

/// Smallest t > 0 with cos(bt) + (kappa-gamma)/(4b) sin(bt) = 0, located by
/// bisection on (0, pi/b]; this is where the |e,0> amplitude first vanishes.
double solve_t1(const SystemParams& p);

enum class Detector { plus, minus };

enum class ChannelLabel { d_plus, d_minus, spont1, spont2 };

// Rate-weighted collapse operator: sqrt(kappa)(a1 +- a2)/sqrt(2) for the
// detector ports, sqrt(gamma) S_j^- for undetected spontaneous emission.
struct JumpChannel {
    ChannelLabel label;
    Operator collapse_op;
};

std::array<JumpChannel, 4> jump_channels(const SystemParams& p);

/// Unweighted beam-splitter projection (a1 +- a2)/sqrt(2), the form the
/// analytic pipeline applies at a pinned click time.
Operator beam_splitter_jump(Detector port);

StateVector jump(const JumpChannel& channel, const StateVector& psi);

// Fast in-place equivalents used by the trajectory sampler.
void apply_detector_jump(StateVector& psi, Detector port, double kappa);
void apply_spont_jump(StateVector& psi, int atom, double gamma);

struct ChannelRates {
    double d_plus, d_minus, spont1, spont2;
    double total() const { return d_plus + d_minus + spont1 + spont2; }
};

/// Instantaneous jump rates ||C_k psi||^2 of the four channels.
ChannelRates channel_rates(const StateVector& psi, const SystemParams& p);

/// Squared amplitude currently sitting on |e_j, 1_j> for either pair; the
/// protocol keeps this at zero up to mistiming residuals and the propagator
/// treats it as pure decay.
double excited_with_photon_weight(const StateVector& psi);

}  // namespace cavtel::dynamics

#endif
