#include "cavtel/pulses.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cavtel::pulses {

using hilbert::AtomLevel;
using hilbert::Complex;
using hilbert::state_dim;

namespace {

// 3x3 atom factor in (f, g, e) ordering; column = source level.
Eigen::Matrix3cd atom_matrix(PulseKind kind) {
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    const int f = static_cast<int>(AtomLevel::f);
    const int g = static_cast<int>(AtomLevel::g);
    const int e = static_cast<int>(AtomLevel::e);
    switch (kind) {
        case PulseKind::raman_swap:
        case PulseKind::map_f_to_g:
            m(g, f) = 1.0;
            m(f, g) = -1.0;
            m(e, e) = 1.0;
            break;
        case PulseKind::excite_g_to_e:
            m(e, g) = 1.0;
            m(g, e) = -1.0;
            m(f, f) = 1.0;
            break;
        case PulseKind::phase_flip_f:
            m(f, f) = -1.0;
            m(g, g) = 1.0;
            m(e, e) = 1.0;
            break;
    }
    return m;
}

}  // namespace

Operator pulse_unitary(const PulseSpec& spec) {
    if (spec.atom != 1 && spec.atom != 2)
        throw std::invalid_argument("pulse atom must be 1 or 2");
    const Eigen::Matrix3cd a = atom_matrix(spec.kind);
    Operator full;
    full.m = hilbert::OperatorMatrix::Zero();
    full.claims_unitary = true;
    // Lift the 3x3 atom factor: identity on the atom's photon slot and on the
    // whole other pair. Pair slot = level*2 + n.
    for (int i = 0; i < state_dim; ++i) {
        const int p1 = i / 6, p2 = i % 6;
        const int slot = (spec.atom == 1) ? p1 : p2;
        const int other = (spec.atom == 1) ? p2 : p1;
        const int src_level = slot / 2, n = slot % 2;
        for (int dst_level = 0; dst_level < 3; ++dst_level) {
            const Complex amp = a(dst_level, src_level);
            if (amp == Complex{0.0, 0.0}) continue;
            const int dst_slot = dst_level * 2 + n;
            const int j = (spec.atom == 1) ? dst_slot * 6 + other : other * 6 + dst_slot;
            full.m(j, i) = amp;
        }
    }
    return full;
}

void apply_pulse(StateVector& psi, const PulseSpec& spec) {
    if (spec.atom != 1 && spec.atom != 2)
        throw std::invalid_argument("pulse atom must be 1 or 2");
    const Eigen::Matrix3cd a = atom_matrix(spec.kind);
    const int stride = (spec.atom == 1) ? 6 : 1;
    const int ostride = (spec.atom == 1) ? 1 : 6;
    for (int other = 0; other < 6; ++other) {
        for (int n = 0; n < 2; ++n) {
            const int base = other * ostride + n * stride;
            const Complex f = psi(base + 0 * 2 * stride);
            const Complex g = psi(base + 1 * 2 * stride);
            const Complex e = psi(base + 2 * 2 * stride);
            psi(base + 0 * 2 * stride) = a(0, 0) * f + a(0, 1) * g + a(0, 2) * e;
            psi(base + 1 * 2 * stride) = a(1, 0) * f + a(1, 1) * g + a(1, 2) * e;
            psi(base + 2 * 2 * stride) = a(2, 0) * f + a(2, 1) * g + a(2, 2) * e;
        }
    }
}

RamanModel raman_model(const SystemParams& p) {
    if (!(p.omega_raman > 0.0) || !(p.delta_raman > 0.0))
        throw std::invalid_argument("raman_model: Omega and delta must be positive");
    RamanModel m;
    m.lambda = p.omega_raman * p.omega_raman / p.delta_raman;
    m.duration = std::numbers::pi / (2.0 * m.lambda);
    const double x = p.g * std::numbers::pi / (2.0 * m.lambda);
    m.leakage = x * x;
    m.weak_drive_warning = p.delta_raman / p.omega_raman < 10.0;
    m.slow_vs_g_warning = m.lambda / p.g < 10.0;
    return m;
}

}  // namespace cavtel::pulses
