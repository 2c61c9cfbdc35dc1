#include "cavtel/analysis.hpp"

#include <cmath>

#include "cavtel/pulses.hpp"

namespace cavtel::analysis {

using hilbert::AtomLevel;

namespace {

constexpr Complex I{0.0, 1.0};

}  // namespace

double success_probability(const SystemParams& p, const ProtocolSchedule& s) {
    const double b = dynamics::beta(p);
    const double rate = p.kappa + p.gamma;
    const double limit = std::exp(-rate * s.t1 / 2.0) / 2.0;
    if (!std::isfinite(s.t_d) || std::exp(-rate * s.t_d / 2.0) < 1e-6) return limit;
    const double c = std::cos(b * s.t_d);
    const double sn = std::sin(b * s.t_d);
    const double diff = p.kappa - p.gamma;
    const double bracket = c * c +
                           (diff * diff + 4.0 * p.g * p.g) / (4.0 * b * b) * sn * sn +
                           diff / (4.0 * b) * std::sin(2.0 * b * s.t_d);
    return limit * (1.0 - std::exp(-rate * s.t_d / 2.0) * bracket);
}

double success_with_detector(const SystemParams& p, const ProtocolSchedule& s) {
    return p.eta * p.eta * success_probability(p, s);
}

MistimedCoefficients mistimed_coefficients(const SystemParams& p,
                                           const ProtocolSchedule& s,
                                           const InputState& input) {
    const double b = dynamics::beta(p);
    const double rate4 = (p.kappa + p.gamma) / 4.0;
    const double asym = (p.kappa - p.gamma) / (4.0 * b);
    const double gb = p.g / b;
    const double t1d = s.t1 + s.dt1;

    MistimedCoefficients m;
    m.a = std::exp(-rate4 * t1d) * (std::cos(b * t1d) + asym * std::sin(b * t1d));
    m.b = I * gb * std::exp(-rate4 * t1d) * std::sin(b * t1d);
    m.c = -I * gb * std::exp(-rate4 * s.tau1) * std::sin(b * s.tau1);
    m.d = std::exp(-rate4 * s.t2) * (std::cos(b * s.t2) + asym * std::sin(b * s.t2));
    m.e = -I * gb * std::exp(-rate4 * s.t2) * std::sin(b * s.t2);

    m.eps1 = m.b * m.e * std::exp(-p.kappa * s.tau1 / 2.0);
    const Complex sum = input.c_g + input.c_f;
    const Complex diff = input.c_g - input.c_f;
    m.eps2_plus = sum * m.a * m.c * m.d * m.e;
    m.eps2_minus = diff * m.a * m.c * m.d * m.e;
    m.eps3_plus = sum * m.a * m.c * m.e * m.e;
    m.eps3_minus = diff * m.a * m.c * m.e * m.e;
    return m;
}

MistimedFidelity fidelity_mistimed(const SystemParams& p, const ProtocolSchedule& s,
                                   const InputState& input, Detector branch) {
    const MistimedCoefficients m = mistimed_coefficients(p, s, input);
    const Complex eps2 = (branch == Detector::plus) ? m.eps2_plus : m.eps2_minus;
    const Complex eps3 = (branch == Detector::plus) ? m.eps3_plus : m.eps3_minus;
    const double w1 = std::norm(m.eps1);
    const double w2 = std::norm(eps2);
    const double w3 = std::norm(eps3);
    const double total = w1 + 2.0 * w2 + 2.0 * w3;
    if (!(total > 0.0))
        throw std::domain_error("mistimed state has zero weight");

    // Post-correction mixed state on atom 2: a pure component carrying the
    // teleported superposition plus a residual |e2> admixture, and an
    // incoherent |g2><g2| floor from the second-photon loss paths.
    const int fi = static_cast<int>(AtomLevel::f);
    const int gi = static_cast<int>(AtomLevel::g);
    Eigen::Vector3cd phi = Eigen::Vector3cd::Zero();
    phi(gi) = m.eps1 * input.c_g;
    phi(fi) = m.eps1 * input.c_f;
    phi(static_cast<int>(AtomLevel::e)) = eps2;

    hilbert::DensityMatrix rho;
    rho.basis = hilbert::Subspace::atom2;
    rho.m = (phi * phi.adjoint() + (w2 + 2.0 * w3) *
             Eigen::Vector3cd::Unit(gi) * Eigen::Vector3cd::Unit(gi).adjoint()) / total;

    MistimedFidelity out;
    out.fidelity = (w1 + (w2 + 2.0 * w3) * std::norm(input.c_g)) / total;
    out.atom2_state = std::move(rho);
    return out;
}

TimingBudget timing_budget(const SystemParams& p, const ProtocolSchedule& s,
                           bool include_raman) {
    TimingBudget budget;
    const auto add = [&budget](std::string stage, double duration) {
        budget.rows.push_back({std::move(stage), duration});
        budget.total += duration;
    };
    add("interaction_1", s.t1 + s.dt1);
    if (include_raman) {
        const pulses::RamanModel raman = pulses::raman_model(p);
        add("raman_swap_atom1", raman.duration);
        add("raman_swap_atom2", raman.duration);
        add("raman_remap_atom1", raman.duration);
    }
    add("detection_window_1", s.tau1);
    add("purge_window", s.tau2);
    add("detection_window_2", s.t_d);
    return budget;
}

}  // namespace cavtel::analysis
