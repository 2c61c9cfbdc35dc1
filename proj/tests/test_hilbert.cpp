#include <doctest.h>

#include <cmath>

#include "cavtel/hilbert.hpp"
#include "cavtel/trajectory.hpp"

using namespace cavtel::hilbert;
namespace hil = cavtel::hilbert;
using cavtel::trajectory::SplitMix64;

namespace {

Complex random_amp(SplitMix64& rng) {
    return {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
}

StateVector random_state(SplitMix64& rng, bool normalize = true) {
    StateVector psi;
    for (int i = 0; i < state_dim; ++i) psi(i) = random_amp(rng);
    if (normalize) psi /= std::sqrt(norm2(psi));
    return psi;
}

}  // namespace

TEST_CASE("flat index formula and round trip") {
    CHECK(flat_index({AtomLevel::f, 0, AtomLevel::f, 0}) == 0);
    CHECK(flat_index({AtomLevel::e, 1, AtomLevel::e, 1}) == 35);
    // ((1*2+1)*3+0)*2+0
    CHECK(flat_index({AtomLevel::g, 1, AtomLevel::f, 0}) == 18);
    for (int i = 0; i < state_dim; ++i) CHECK(flat_index(label_of(i)) == i);
}

TEST_CASE("apply is the exact matrix-vector product and linear") {
    SplitMix64 rng(7);
    Operator identity;
    identity.m = OperatorMatrix::Identity();
    const StateVector psi = random_state(rng);
    CHECK((hil::apply(identity, psi) - psi).norm() == 0.0);

    Operator op;
    for (int i = 0; i < state_dim; ++i)
        for (int j = 0; j < state_dim; ++j) op.m(i, j) = random_amp(rng);
    const StateVector phi = random_state(rng);
    const Complex alpha = random_amp(rng);
    const Complex beta = random_amp(rng);
    const StateVector combo = alpha * psi + beta * phi;
    const StateVector lhs = hil::apply(op, combo);
    const StateVector rhs = alpha * hil::apply(op, psi) + beta * hil::apply(op, phi);
    CHECK((lhs - rhs).norm() <= eps_num * lhs.norm());
}

TEST_CASE("inner product conventions") {
    SplitMix64 rng(11);
    const StateVector psi = random_state(rng);
    CHECK(inner(psi, psi).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(inner(psi, psi).imag()) <= 1e-15);

    const StateVector k0 = basis_ket(label_of(3));
    const StateVector k1 = basis_ket(label_of(27));
    CHECK(std::abs(inner(k0, k1)) == 0.0);

    const Complex c{0.3, -1.2};
    CHECK(std::abs(inner(c * psi, psi) - std::conj(c)) <= 1e-12);
}

TEST_CASE("reduce_to_atom2 on known states") {
    // |g1,0> (x) |f2,0>
    StateVector psi = basis_ket({AtomLevel::g, 0, AtomLevel::f, 0});
    DensityMatrix rho = reduce_to_atom2(psi);
    CHECK(rho.dim() == 3);
    CHECK(rho.m(0, 0).real() == doctest::Approx(1.0));
    CHECK(std::abs(rho.m(1, 1)) == 0.0);

    // c_g |f1 g2> + c_f |g1 f2> traces to diag(|c_f|^2 on f, |c_g|^2 on g)
    const Complex cg{0.6, 0.0}, cf{0.0, 0.8};
    psi = cg * basis_ket({AtomLevel::f, 0, AtomLevel::g, 0}) +
          cf * basis_ket({AtomLevel::g, 0, AtomLevel::f, 0});
    rho = reduce_to_atom2(psi);
    CHECK(rho.m(0, 0).real() == doctest::Approx(std::norm(cf)).epsilon(1e-12));
    CHECK(rho.m(1, 1).real() == doctest::Approx(std::norm(cg)).epsilon(1e-12));
    CHECK(std::abs(rho.m(0, 1)) <= 1e-15);

    // Bell state marginal is maximally mixed on {f2, g2}
    psi = (basis_ket({AtomLevel::f, 0, AtomLevel::g, 0}) +
           basis_ket({AtomLevel::g, 0, AtomLevel::f, 0})) /
          std::sqrt(2.0);
    rho = reduce_to_atom2(psi);
    CHECK(rho.m(0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rho.m(1, 1).real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(rho.m(0, 1)) <= 1e-15);
}

TEST_CASE("reduce_to_atom2 preserves trace and hermiticity") {
    SplitMix64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(state_dim, state_dim);
        for (int k = 0; k < 3; ++k) {
            const StateVector psi = random_state(rng, false);
            m += psi * psi.adjoint();
        }
        DensityMatrix rho{m / m.trace().real(), Subspace::full};
        const DensityMatrix r2 = reduce_to_atom2(rho);
        CHECK(r2.trace() == doctest::Approx(rho.trace()).epsilon(1e-12));
        CHECK((r2.m - r2.m.adjoint()).cwiseAbs().maxCoeff() <= eps_num);
    }
}

TEST_CASE("fidelity") {
    Eigen::Vector3cd target;
    target << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;

    const DensityMatrix pure = pure_density(target, Subspace::atom2);
    CHECK(fidelity(target, pure) == doctest::Approx(1.0).epsilon(1e-14));

    Eigen::Vector3cd orth;
    orth << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0;
    CHECK(fidelity(target, pure_density(orth, Subspace::atom2)) <= 1e-14);

    // maximally mixed on {f, g}
    DensityMatrix mixed{Eigen::MatrixXcd::Zero(3, 3), Subspace::atom2};
    mixed.m(0, 0) = 0.5;
    mixed.m(1, 1) = 0.5;
    CHECK(fidelity(target, mixed) == doctest::Approx(0.5).epsilon(1e-14));

    // invariant under a global phase of the target
    const Complex phase = std::polar(1.0, 1.234);
    CHECK(fidelity(phase * target, mixed) ==
          doctest::Approx(fidelity(target, mixed)).epsilon(1e-14));

    DensityMatrix zero{Eigen::MatrixXcd::Zero(3, 3), Subspace::atom2};
    CHECK_THROWS_AS((void)fidelity(target, zero), std::invalid_argument);
}
