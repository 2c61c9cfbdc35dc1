#ifndef CAVTEL_PROTOCOL_HPP
#define CAVTEL_PROTOCOL_HPP

#include <optional>
#include <vector>

#include "cavtel/dynamics.hpp"
#include "cavtel/hilbert.hpp"
#include "cavtel/pulses.hpp"

namespace cavtel::protocol {

using dynamics::Detector;
using dynamics::SystemParams;
using hilbert::Complex;
using hilbert::DensityMatrix;
using hilbert::StateVector;

// The state to teleport, c_f |f> + c_g |g>, normalized.
struct InputState {
    Complex c_f;
    Complex c_g;
};

/// Throws std::invalid_argument unless |c_f|^2 + |c_g|^2 = 1 within eps_num.
InputState make_input(Complex c_f, Complex c_g);

// All protocol times in us. t1 is the first interaction time (normally the
// root from solve_t1), dt1 a deliberate timing error, tau1 the first
// detection window, tau2 the purge window, t2 the pinned second interaction
// time used by the analytic pipeline, t_d the second detection window.
struct ProtocolSchedule {
    double t1;
    double dt1 = 0.0;
    double tau1;
    double tau2;
    double t2;
    double t_d;

    /// tau1 = 2/kappa, tau2 = 20/kappa, t_d = 20/(kappa+gamma), t2 = t1 from
    /// solve_t1. Requires kappa > 0.
    static ProtocolSchedule defaults(const SystemParams& p);

    /// Residual photon amplitude factor exp(-kappa tau2 / 2) after the purge.
    double purge_leak(const SystemParams& p) const;
    /// True when the purge is too short to trust (leak > 0.01) and kappa > 0.
    bool purge_warning(const SystemParams& p) const;
};

enum class Stage {
    prepared,
    after_interaction1,
    after_swap,
    before_click1,
    after_click1,
    after_purge,
    after_remnant_discard,
    after_remap,
    after_interaction2,
    after_click2,
    final_normalized,
};

const char* stage_name(Stage s);

struct BranchChoice {
    Detector first;
    Detector second;
};

struct Checkpoint {
    Stage stage;
    StateVector state;  // sub-normalized except at final_normalized
};

/// (c_f |f1> + c_g |e1>) |0> (x) (|e2> + |f2>)/sqrt(2) |0>: atom 1 already
/// pi-pulsed, atom 2 in its superposition with both cavities in vacuum.
StateVector prepare(const InputState& input);

/// Project out every component still holding an excitation (a photon or an
/// excited atom). This is the post-purge conditioning step of the analytic
/// pipeline; the conditioned trajectory replay shares it.
void discard_excitation_remnant(StateVector& psi);

/// Conditional states of the analytic pipeline with both clicks pinned (the
/// first at tau1, the second at t2) for the given detector-sign branch. After
/// the purge, any amplitude still holding a photon is projected out and its
/// weight booked as discarded; this is what makes the two-photon branch drop
/// out exactly. Throws purge_error when exp(-kappa tau2/2) > 0.1 (kappa > 0).
std::vector<Checkpoint> analytic_checkpoints(const SystemParams& p,
                                             const ProtocolSchedule& schedule,
                                             const InputState& input,
                                             const BranchChoice& branch);

enum class ClickPattern { same_detector, different_detector };

/// Same detector twice: nothing to do. Different detectors: flip the sign of
/// |f2>. Must only be called on a Success outcome.
std::optional<pulses::PulseSpec> classical_correction(ClickPattern pattern);

enum class OutcomeStatus { success, discarded };

struct ProtocolOutcome {
    OutcomeStatus status = OutcomeStatus::discarded;
    std::optional<ClickPattern> pattern;
    std::optional<BranchChoice> branch;
    std::optional<DensityMatrix> final_atom2;  // trace-normalized
    double weight = 0.0;
    double fidelity = 0.0;
};

/// Atom-2 target c_f |f2> + c_g |g2> in the (f, g, e) ordering.
Eigen::Vector3cd teleport_target(const InputState& input);

/// Enumerates the four detector-sign patterns with pinned click times,
/// applies the classical correction, and reports the post-correction atom-2
/// state, fidelity against the teleport target, and the squared norm of the
/// conditioned state as the weight. The trailing Discarded entry aggregates
/// the remaining weight. Weights are the paper-style amplitude bookkeeping at
/// pinned clicks, not the integrated success probability.
std::vector<ProtocolOutcome> run_analytic(const SystemParams& p,
                                          const ProtocolSchedule& schedule,
                                          const InputState& input);

}  // namespace cavtel::protocol

#endif
