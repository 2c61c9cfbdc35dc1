#include "cavtel/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace cavtel::protocol {

using dynamics::evolve_no_jump;
using hilbert::AtomLevel;
using hilbert::BasisLabel;
using hilbert::eps_num;
using hilbert::flat_index;
using hilbert::label_of;
using hilbert::norm2;
using hilbert::state_dim;

InputState make_input(Complex c_f, Complex c_g) {
    const double n = std::norm(c_f) + std::norm(c_g);
    if (std::abs(n - 1.0) > eps_num)
        throw std::invalid_argument("input state must be normalized");
    return InputState{c_f, c_g};
}

ProtocolSchedule ProtocolSchedule::defaults(const SystemParams& p) {
    if (!(p.kappa > 0.0))
        throw std::invalid_argument("default schedule needs kappa > 0");
    ProtocolSchedule s;
    s.t1 = dynamics::solve_t1(p);
    s.dt1 = 0.0;
    s.tau1 = 2.0 / p.kappa;
    s.tau2 = 20.0 / p.kappa;
    s.t2 = s.t1;
    s.t_d = 20.0 / (p.kappa + p.gamma);
    return s;
}

double ProtocolSchedule::purge_leak(const SystemParams& p) const {
    return std::exp(-p.kappa * tau2 / 2.0);
}

bool ProtocolSchedule::purge_warning(const SystemParams& p) const {
    return p.kappa > 0.0 && purge_leak(p) > 0.01;
}

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::prepared: return "prepared";
        case Stage::after_interaction1: return "after_interaction1";
        case Stage::after_swap: return "after_swap";
        case Stage::before_click1: return "before_click1";
        case Stage::after_click1: return "after_click1";
        case Stage::after_purge: return "after_purge";
        case Stage::after_remnant_discard: return "after_remnant_discard";
        case Stage::after_remap: return "after_remap";
        case Stage::after_interaction2: return "after_interaction2";
        case Stage::after_click2: return "after_click2";
        case Stage::final_normalized: return "final_normalized";
    }
    return "unknown";
}

StateVector prepare(const InputState& input) {
    const double n = std::norm(input.c_f) + std::norm(input.c_g);
    if (std::abs(n - 1.0) > eps_num)
        throw std::invalid_argument("input state must be normalized");
    StateVector psi = StateVector::Zero();
    const double r = 1.0 / std::sqrt(2.0);
    const auto put = [&psi](AtomLevel a1, AtomLevel a2, Complex amp) {
        psi(flat_index({a1, 0, a2, 0})) = amp;
    };
    put(AtomLevel::f, AtomLevel::e, input.c_f * r);
    put(AtomLevel::f, AtomLevel::f, input.c_f * r);
    put(AtomLevel::e, AtomLevel::e, input.c_g * r);
    put(AtomLevel::e, AtomLevel::f, input.c_g * r);
    return psi;
}

// The purge has damped every surviving excitation by at least
// exp(-(kappa+gamma) tau2 / 4); what still remains belongs to the discarded
// bookkeeping, exactly as the closed-form accounting assumes.
void discard_excitation_remnant(StateVector& psi) {
    for (int i = 0; i < state_dim; ++i) {
        const BasisLabel lb = label_of(i);
        if (lb.n1 + lb.n2 > 0 || lb.atom1 == AtomLevel::e || lb.atom2 == AtomLevel::e)
            psi(i) = Complex{0.0, 0.0};
    }
}

namespace {

void check_schedule(const ProtocolSchedule& s) {
    if (s.t1 < 0 || s.tau1 < 0 || s.tau2 < 0 || s.t2 < 0 || s.t_d < 0 ||
        s.t1 + s.dt1 < 0)
        throw std::invalid_argument("schedule times must be nonnegative");
}

void apply_beam_splitter(StateVector& psi, Detector port) {
    // Unweighted (a1 +- a2)/sqrt(2); the rate weight belongs to the
    // trajectory unraveling, not to the pinned-click conditional state.
    // apply_detector_jump with kappa = 1 scales by sqrt(1/2) as required.
    dynamics::apply_detector_jump(psi, port, 1.0);
}

}  // namespace

std::vector<Checkpoint> analytic_checkpoints(const SystemParams& p,
                                             const ProtocolSchedule& schedule,
                                             const InputState& input,
                                             const BranchChoice& branch) {
    check_schedule(schedule);
    if (p.kappa > 0.0 && schedule.purge_leak(p) > 0.1)
        throw purge_error("purge window too short: exp(-kappa tau2/2) > 0.1");

    std::vector<Checkpoint> out;
    out.reserve(11);
    StateVector psi = prepare(input);
    out.push_back({Stage::prepared, psi});

    evolve_no_jump(psi, p, schedule.t1 + schedule.dt1);
    out.push_back({Stage::after_interaction1, psi});

    pulses::apply_pulse(psi, pulses::raman_swap(1));
    pulses::apply_pulse(psi, pulses::raman_swap(2));
    out.push_back({Stage::after_swap, psi});

    evolve_no_jump(psi, p, schedule.tau1);
    out.push_back({Stage::before_click1, psi});

    apply_beam_splitter(psi, branch.first);
    out.push_back({Stage::after_click1, psi});

    evolve_no_jump(psi, p, schedule.tau2);
    out.push_back({Stage::after_purge, psi});

    discard_excitation_remnant(psi);
    out.push_back({Stage::after_remnant_discard, psi});

    pulses::apply_pulse(psi, pulses::map_g_to_e_1());
    pulses::apply_pulse(psi, pulses::map_f_to_g_1());
    pulses::apply_pulse(psi, pulses::excite_g_to_e_2());
    if (dynamics::excited_with_photon_weight(psi) > 1e-9 * norm2(psi))
        throw std::logic_error("excitation budget violated: |e,1> populated");
    out.push_back({Stage::after_remap, psi});

    evolve_no_jump(psi, p, schedule.t2);
    out.push_back({Stage::after_interaction2, psi});

    apply_beam_splitter(psi, branch.second);
    out.push_back({Stage::after_click2, psi});

    const double n2 = norm2(psi);
    if (n2 > 0.0) psi /= std::sqrt(n2);
    out.push_back({Stage::final_normalized, psi});
    return out;
}

std::optional<pulses::PulseSpec> classical_correction(ClickPattern pattern) {
    if (pattern == ClickPattern::same_detector) return std::nullopt;
    return pulses::phase_fix_f_2();
}

Eigen::Vector3cd teleport_target(const InputState& input) {
    Eigen::Vector3cd t = Eigen::Vector3cd::Zero();
    t(static_cast<int>(AtomLevel::f)) = input.c_f;
    t(static_cast<int>(AtomLevel::g)) = input.c_g;
    return t;
}

std::vector<ProtocolOutcome> run_analytic(const SystemParams& p,
                                          const ProtocolSchedule& schedule,
                                          const InputState& input) {
    const Eigen::Vector3cd target = teleport_target(input);
    std::vector<ProtocolOutcome> outcomes;
    double total_weight = 0.0;
    for (const Detector first : {Detector::plus, Detector::minus}) {
        for (const Detector second : {Detector::plus, Detector::minus}) {
            const BranchChoice branch{first, second};
            const auto checkpoints = analytic_checkpoints(p, schedule, input, branch);
            const StateVector& raw = checkpoints[checkpoints.size() - 2].state;
            ProtocolOutcome o;
            o.status = OutcomeStatus::success;
            o.branch = branch;
            o.pattern = (first == second) ? ClickPattern::same_detector
                                          : ClickPattern::different_detector;
            o.weight = norm2(raw);
            total_weight += o.weight;
            StateVector corrected = checkpoints.back().state;
            if (auto pulse = classical_correction(*o.pattern))
                pulses::apply_pulse(corrected, *pulse);
            hilbert::DensityMatrix rho = hilbert::reduce_to_atom2(corrected);
            const double tr = rho.trace();
            if (tr > 0.0) rho.m /= tr;
            o.fidelity = hilbert::fidelity(target, rho);
            o.final_atom2 = std::move(rho);
            outcomes.push_back(std::move(o));
        }
    }
    outcomes.emplace_back();
    outcomes.back().status = OutcomeStatus::discarded;
    outcomes.back().weight = std::max(0.0, 1.0 - total_weight);
    return outcomes;
}

}  // namespace cavtel::protocol
