#ifndef CAVTEL_ANALYSIS_HPP
#define CAVTEL_ANALYSIS_HPP

#include <string>
#include <vector>

#include "cavtel/dynamics.hpp"
#include "cavtel/hilbert.hpp"
#include "cavtel/protocol.hpp"

namespace cavtel::analysis {

using dynamics::Detector;
using dynamics::SystemParams;
using hilbert::Complex;
using protocol::InputState;
using protocol::ProtocolSchedule;

// Closed-form amplitudes of the mistimed protocol. a and b are the residual
// excited and transferred-photon amplitudes after the (mistimed) first
// interaction, c the excitation-to-photon transfer during the first window,
// d and e their analogues at the pinned second interaction time. eps1 is the
// intended two-click path, eps2/eps3 the contamination paths opened by the
// timing error; the +- index is the first-click detector sign via
// (c_g +- c_f).
struct MistimedCoefficients {
    Complex a, b, c, d, e;
    Complex eps1;
    Complex eps2_plus, eps2_minus;
    Complex eps3_plus, eps3_minus;
};

/// Success probability for a second-stage wait t_d. Uses the closed form as
/// printed; switches to the long-wait limit exp(-(kappa+gamma) t1/2)/2 when
/// exp(-(kappa+gamma) t_d/2) < 1e-6 or t_d is infinite.
double success_probability(const SystemParams& p, const ProtocolSchedule& s);

/// eta^2 * success_probability: both photons must be recorded.
double success_with_detector(const SystemParams& p, const ProtocolSchedule& s);

MistimedCoefficients mistimed_coefficients(const SystemParams& p,
                                           const ProtocolSchedule& s,
                                           const InputState& input);

struct MistimedFidelity {
    double fidelity;
    hilbert::DensityMatrix atom2_state;  // post-correction, on {f, g, e}
};

/// Fidelity of the mistimed mixed state for the given first-click branch,
/// with the classical correction already applied. The density matrix route
/// and the closed-form ratio agree to 1e-12 (checked in tests).
MistimedFidelity fidelity_mistimed(const SystemParams& p, const ProtocolSchedule& s,
                                   const InputState& input, Detector branch);

struct TimingBudget {
    struct Row {
        std::string stage;
        double duration;  // us
    };
    std::vector<Row> rows;
    double total = 0.0;
};

/// Stage-by-stage duration table: interaction, Raman rotations (two swaps
/// plus the remapping rotation on atom 1; the direct pi pulses are treated as
/// instantaneous), both wait windows, and the second detection window.
TimingBudget timing_budget(const SystemParams& p, const ProtocolSchedule& s,
                           bool include_raman = true);

}  // namespace cavtel::analysis

#endif
