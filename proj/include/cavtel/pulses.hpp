#ifndef CAVTEL_PULSES_HPP
#define CAVTEL_PULSES_HPP

#include "cavtel/dynamics.hpp"
#include "cavtel/hilbert.hpp"

namespace cavtel::pulses {

using dynamics::SystemParams;
using hilbert::Operator;
using hilbert::StateVector;

// Instantaneous single-atom transformations. Each expands to a unitary on the
// full basis acting as identity on the untargeted tensor factors, so every
// pulse commutes with both photon-number operators.
enum class PulseKind {
    raman_swap,     // f -> g, g -> -f, e -> e
    excite_g_to_e,  // g -> e, e -> -g, f -> f (pi pulse)
    map_f_to_g,     // f -> g, g -> -f (same rotation as raman_swap)
    phase_flip_f,   // f -> -f
};

struct PulseSpec {
    PulseKind kind;
    int atom;  // 1 or 2
};

inline PulseSpec raman_swap(int atom) { return {PulseKind::raman_swap, atom}; }
inline PulseSpec map_g_to_e_1() { return {PulseKind::excite_g_to_e, 1}; }
inline PulseSpec map_f_to_g_1() { return {PulseKind::map_f_to_g, 1}; }
inline PulseSpec excite_g_to_e_2() { return {PulseKind::excite_g_to_e, 2}; }
inline PulseSpec phase_fix_f_2() { return {PulseKind::phase_flip_f, 2}; }

Operator pulse_unitary(const PulseSpec& spec);

/// Fast in-place application of a pulse's 3x3 atom factor.
void apply_pulse(StateVector& psi, const PulseSpec& spec);

// Realism model for the Raman drive implementing the ground-state rotation:
// two classical fields of Rabi frequency Omega, detuned by delta from an
// auxiliary excited level, give coupling lambda = Omega^2/delta. The rotation
// takes pi/(2 lambda) and during it each atom exchanges an excitation with
// its cavity with probability about (g pi / (2 lambda))^2.
struct RamanModel {
    double lambda;    // rad/us
    double duration;  // us
    double leakage;   // probability
    bool weak_drive_warning;  // delta/Omega < 10
    bool slow_vs_g_warning;   // lambda/g < 10
};

/// Throws std::invalid_argument when Omega or delta is nonpositive.
RamanModel raman_model(const SystemParams& p);

}  // namespace cavtel::pulses

#endif
