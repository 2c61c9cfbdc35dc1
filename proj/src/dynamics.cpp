#include "cavtel/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cavtel::dynamics {

using hilbert::AtomLevel;
using hilbert::BasisLabel;
using hilbert::flat_index;
using hilbert::label_of;
using hilbert::state_dim;

namespace {

constexpr Complex I{0.0, 1.0};

// Slot layout within one pair's 6-dim factor, ordered by (level*2 + n):
// f0=0, f1=1, g0=2, g1=3, e0=4, e1=5. The flat basis index is
// pair1_slot * 6 + pair2_slot.
constexpr int slot_f1 = 1;
constexpr int slot_g1 = 3;
constexpr int slot_e0 = 4;
constexpr int slot_e1 = 5;

void check_rates(const SystemParams& p) {
    if (!(p.g > 0.0)) throw std::invalid_argument("g must be positive");
    if (p.kappa < 0.0 || p.gamma < 0.0)
        throw std::invalid_argument("kappa and gamma must be nonnegative");
    if (p.eta < 0.0 || p.eta > 1.0)
        throw std::invalid_argument("eta must lie in [0, 1]");
}

double beta_squared(const SystemParams& p) {
    const double d = (p.kappa - p.gamma) / 4.0;
    return p.g * p.g - d * d;
}

}  // namespace

SystemParams make_system_params(double g, double kappa, double gamma, double eta,
                                double omega_raman, double delta_raman) {
    SystemParams p{g, kappa, gamma, eta, omega_raman, delta_raman};
    check_rates(p);
    beta(p);  // rejects the overdamped regime
    return p;
}

SystemParams params_from_mhz(double g_mhz, double kappa_mhz, double gamma_mhz,
                             double eta, double omega_over_g, double delta_over_omega) {
    const double two_pi = 2.0 * std::numbers::pi;
    const double g = two_pi * g_mhz;
    const double omega = omega_over_g * g;
    return make_system_params(g, two_pi * kappa_mhz, two_pi * gamma_mhz, eta,
                              omega, delta_over_omega * omega);
}

double beta(const SystemParams& p) {
    const double b2 = beta_squared(p);
    if (!(b2 > 0.0))
        throw overdamped_error("overdamped regime: g^2 <= (kappa - gamma)^2 / 16");
    return std::sqrt(b2);
}

Operator conditional_hamiltonian(const SystemParams& p) {
    check_rates(p);
    Operator h;
    h.m = hilbert::OperatorMatrix::Zero();
    h.claims_hermitian = (p.kappa == 0.0 && p.gamma == 0.0);
    for (int i = 0; i < state_dim; ++i) {
        const BasisLabel lb = label_of(i);
        Complex diag{0.0, 0.0};
        diag -= I * (p.kappa / 2.0) * static_cast<double>(lb.n1 + lb.n2);
        if (lb.atom1 == AtomLevel::e) diag -= I * (p.gamma / 2.0);
        if (lb.atom2 == AtomLevel::e) diag -= I * (p.gamma / 2.0);
        h.m(i, i) = diag;
        // g (a_j S_j^+ + h.c.): couples |g,1> <-> |e,0> within each pair
        if (lb.atom1 == AtomLevel::g && lb.n1 == 1) {
            const int j = flat_index({AtomLevel::e, 0, lb.atom2, lb.n2});
            h.m(j, i) += p.g;
            h.m(i, j) += p.g;
        }
        if (lb.atom2 == AtomLevel::g && lb.n2 == 1) {
            const int j = flat_index({lb.atom1, lb.n1, AtomLevel::e, 0});
            h.m(j, i) += p.g;
            h.m(i, j) += p.g;
        }
    }
    return h;
}

PairPropagator pair_propagator(const SystemParams& p, double t) {
    if (t < 0.0) throw std::invalid_argument("propagator time must be nonnegative");
    const double b = beta(p);
    const double c = std::cos(b * t);
    const double s = std::sin(b * t);
    const double asym = (p.kappa - p.gamma) / (4.0 * b);
    const double decay4 = std::exp(-(p.kappa + p.gamma) * t / 4.0);
    PairPropagator u;
    u.ee = decay4 * (c + asym * s);
    u.gg = decay4 * (c - asym * s);
    u.eg = -I * (p.g / b) * s * decay4;
    u.ge = u.eg;
    u.f1 = std::exp(-p.kappa * t / 2.0);
    u.e1 = std::exp(-(p.kappa + p.gamma) * t / 2.0);
    return u;
}

void apply_pair_propagator(StateVector& psi, const PairPropagator& u, int pair) {
    // Factor strides: pair 1 slots advance by 6, pair 2 slots by 1.
    const int stride = (pair == 1) ? 6 : 1;
    const int ostride = (pair == 1) ? 1 : 6;
    for (int other = 0; other < 6; ++other) {
        const int base = other * ostride;
        const Complex e0 = psi(base + slot_e0 * stride);
        const Complex g1 = psi(base + slot_g1 * stride);
        psi(base + slot_e0 * stride) = u.ee * e0 + u.eg * g1;
        psi(base + slot_g1 * stride) = u.ge * e0 + u.gg * g1;
        psi(base + slot_f1 * stride) *= u.f1;
        psi(base + slot_e1 * stride) *= u.e1;
    }
}

void evolve_no_jump(StateVector& psi, const SystemParams& p, double t) {
    const PairPropagator u = pair_propagator(p, t);
    apply_pair_propagator(psi, u, 1);
    apply_pair_propagator(psi, u, 2);
}

Operator no_jump_propagator(const SystemParams& p, double t) {
    const PairPropagator u = pair_propagator(p, t);
    Eigen::Matrix<Complex, 6, 6> up = Eigen::Matrix<Complex, 6, 6>::Identity();
    up(slot_f1, slot_f1) = u.f1;
    up(slot_e1, slot_e1) = u.e1;
    up(slot_e0, slot_e0) = u.ee;
    up(slot_e0, slot_g1) = u.eg;
    up(slot_g1, slot_e0) = u.ge;
    up(slot_g1, slot_g1) = u.gg;
    Operator full;
    full.claims_unitary = (p.kappa == 0.0 && p.gamma == 0.0);
    for (int i = 0; i < state_dim; ++i)
        for (int j = 0; j < state_dim; ++j)
            full.m(i, j) = up(i / 6, j / 6) * up(i % 6, j % 6);
    return full;
}

RabiAmplitudes rabi_e0(const SystemParams& p, double t) {
    if (t < 0.0) throw std::invalid_argument("time must be nonnegative");
    const double b = beta(p);
    const double c = std::cos(b * t);
    const double s = std::sin(b * t);
    const double decay4 = std::exp(-(p.kappa + p.gamma) * t / 4.0);
    RabiAmplitudes amps;
    amps.amp_e0 = decay4 * (c + (p.kappa - p.gamma) / (4.0 * b) * s);
    amps.amp_g1 = -I * (p.g / b) * decay4 * s;
    return amps;
}

double solve_t1(const SystemParams& p) {
    const double b = beta(p);
    const double asym = (p.kappa - p.gamma) / (4.0 * b);
    const auto bracket = [&](double t) { return std::cos(b * t) + asym * std::sin(b * t); };
    // bracket(0) = 1 and bracket(pi/b) = -1, so the first root lies inside.
    double lo = 0.0;
    double hi = std::numbers::pi / b;
    while (hi - lo > 1e-15) {
        const double mid = 0.5 * (lo + hi);
        if (bracket(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

Eigen::Matrix<Complex, 6, 6> pair_annihilation() {
    // a |level, 1> = |level, 0> within one pair factor
    Eigen::Matrix<Complex, 6, 6> a = Eigen::Matrix<Complex, 6, 6>::Zero();
    for (int level = 0; level < 3; ++level) a(level * 2 + 0, level * 2 + 1) = 1.0;
    return a;
}

Eigen::Matrix<Complex, 6, 6> pair_lowering() {
    // S^- |e, n> = |g, n>
    Eigen::Matrix<Complex, 6, 6> s = Eigen::Matrix<Complex, 6, 6>::Zero();
    for (int n = 0; n < 2; ++n)
        s(static_cast<int>(AtomLevel::g) * 2 + n, static_cast<int>(AtomLevel::e) * 2 + n) = 1.0;
    return s;
}

Operator lift_pair_op(const Eigen::Matrix<Complex, 6, 6>& op, int pair) {
    Operator full;
    full.m = hilbert::OperatorMatrix::Zero();
    const Eigen::Matrix<Complex, 6, 6> id = Eigen::Matrix<Complex, 6, 6>::Identity();
    const auto& op1 = (pair == 1) ? op : id;
    const auto& op2 = (pair == 1) ? id : op;
    for (int i = 0; i < state_dim; ++i)
        for (int j = 0; j < state_dim; ++j)
            full.m(i, j) = op1(i / 6, j / 6) * op2(i % 6, j % 6);
    return full;
}

}  // namespace

Operator beam_splitter_jump(Detector port) {
    const double sign = (port == Detector::plus) ? 1.0 : -1.0;
    const Operator a1 = lift_pair_op(pair_annihilation(), 1);
    const Operator a2 = lift_pair_op(pair_annihilation(), 2);
    Operator j;
    j.m = (a1.m + sign * a2.m) / std::sqrt(2.0);
    return j;
}

std::array<JumpChannel, 4> jump_channels(const SystemParams& p) {
    check_rates(p);
    Operator dp = beam_splitter_jump(Detector::plus);
    Operator dm = beam_splitter_jump(Detector::minus);
    dp.m *= std::sqrt(p.kappa);
    dm.m *= std::sqrt(p.kappa);
    Operator s1 = lift_pair_op(pair_lowering(), 1);
    Operator s2 = lift_pair_op(pair_lowering(), 2);
    s1.m *= std::sqrt(p.gamma);
    s2.m *= std::sqrt(p.gamma);
    return {JumpChannel{ChannelLabel::d_plus, std::move(dp)},
            JumpChannel{ChannelLabel::d_minus, std::move(dm)},
            JumpChannel{ChannelLabel::spont1, std::move(s1)},
            JumpChannel{ChannelLabel::spont2, std::move(s2)}};
}

StateVector jump(const JumpChannel& channel, const StateVector& psi) {
    return channel.collapse_op.m * psi;
}

void apply_detector_jump(StateVector& psi, Detector port, double kappa) {
    const double sign = (port == Detector::plus) ? 1.0 : -1.0;
    const double scale = std::sqrt(kappa / 2.0);
    StateVector out = StateVector::Zero();
    for (int i = 0; i < state_dim; ++i) {
        const Complex amp = psi(i);
        if (amp == Complex{0.0, 0.0}) continue;
        const int p1 = i / 6, p2 = i % 6;
        if (p1 % 2 == 1) out((p1 - 1) * 6 + p2) += scale * amp;         // a1
        if (p2 % 2 == 1) out(p1 * 6 + (p2 - 1)) += sign * scale * amp;  // a2
    }
    psi = out;
}

void apply_spont_jump(StateVector& psi, int atom, double gamma) {
    const double scale = std::sqrt(gamma);
    StateVector out = StateVector::Zero();
    const int e_base = static_cast<int>(AtomLevel::e) * 2;
    const int g_base = static_cast<int>(AtomLevel::g) * 2;
    for (int n = 0; n < 2; ++n) {
        for (int other = 0; other < 6; ++other) {
            const int src = (atom == 1) ? (e_base + n) * 6 + other : other * 6 + (e_base + n);
            const int dst = (atom == 1) ? (g_base + n) * 6 + other : other * 6 + (g_base + n);
            out(dst) = scale * psi(src);
        }
    }
    psi = out;
}

ChannelRates channel_rates(const StateVector& psi, const SystemParams& p) {
    ChannelRates r{0.0, 0.0, 0.0, 0.0};
    for (int lv1 = 0; lv1 < 3; ++lv1) {
        for (int lv2 = 0; lv2 < 3; ++lv2) {
            const Complex x = psi((lv1 * 2 + 1) * 6 + lv2 * 2);  // photon in cavity 1
            const Complex y = psi(lv1 * 2 * 6 + lv2 * 2 + 1);    // photon in cavity 2
            const Complex both = psi((lv1 * 2 + 1) * 6 + lv2 * 2 + 1);
            r.d_plus += 0.5 * p.kappa * (std::norm(x + y) + 2.0 * std::norm(both));
            r.d_minus += 0.5 * p.kappa * (std::norm(x - y) + 2.0 * std::norm(both));
        }
    }
    const int e_base = static_cast<int>(AtomLevel::e) * 2;
    for (int n = 0; n < 2; ++n) {
        for (int other = 0; other < 6; ++other) {
            r.spont1 += p.gamma * std::norm(psi((e_base + n) * 6 + other));
            r.spont2 += p.gamma * std::norm(psi(other * 6 + e_base + n));
        }
    }
    return r;
}

double excited_with_photon_weight(const StateVector& psi) {
    double w = 0.0;
    const int e1_slot = static_cast<int>(AtomLevel::e) * 2 + 1;
    for (int other = 0; other < 6; ++other) {
        w += std::norm(psi(e1_slot * 6 + other));
        w += std::norm(psi(other * 6 + e1_slot));
    }
    return w;
}

}  // namespace cavtel::dynamics
