#ifndef CAVTEL_HILBERT_HPP
#define CAVTEL_HILBERT_HPP

#include <complex>

#include <Eigen/Dense>

namespace cavtel::hilbert {

using Complex = std::complex<double>;

// Composite basis: (atom 1 level, cavity 1 photons, atom 2 level, cavity 2
// photons). Atoms have two ground states f, g and one excited state e; the
// cavities are truncated at one photon, which the protocol never exceeds.
inline constexpr int atom_levels = 3;
inline constexpr int photon_states = 2;  // n in {0, 1}
inline constexpr int state_dim = 36;

// Tolerance for algebraic identity checks in 36-dim double arithmetic.
inline constexpr double eps_num = 1e-10;

enum class AtomLevel : int { f = 0, g = 1, e = 2 };

struct BasisLabel {
    AtomLevel atom1;
    int n1;
    AtomLevel atom2;
    int n2;
};

/// Canonical flat index: ((atom1*2 + n1)*3 + atom2)*2 + n2, bijective on 0..35.
int flat_index(const BasisLabel& label);
BasisLabel label_of(int index);

using StateVector = Eigen::Matrix<Complex, state_dim, 1>;
using OperatorMatrix = Eigen::Matrix<Complex, state_dim, state_dim>;

// Dense operator on the full composite basis. Hamiltonians are in rad/us,
// everything else dimensionless. The claims_* flags record construction-time
// assertions which tests verify against the matrix itself.
struct Operator {
    OperatorMatrix m;
    bool claims_hermitian = false;
    bool claims_unitary = false;
};

StateVector apply(const Operator& op, const StateVector& psi);

/// Conjugate-linear in the first argument; inner(psi, psi) = squared norm.
Complex inner(const StateVector& psi, const StateVector& phi);
double norm2(const StateVector& psi);

StateVector basis_ket(const BasisLabel& label);

bool is_hermitian(const Operator& op, double tol = eps_num);
bool is_unitary(const Operator& op, double tol = eps_num);

enum class Subspace { full, atom2 };

// Density matrix over a declared sub-basis (the full 36-dim space or the
// 3-level space of atom 2). Conditional states may be sub-normalized, so the
// trace lives in (0, 1 + eps_num].
struct DensityMatrix {
    Eigen::MatrixXcd m;
    Subspace basis = Subspace::full;

    int dim() const { return static_cast<int>(m.rows()); }
    double trace() const { return m.trace().real(); }
};

DensityMatrix pure_density(const Eigen::VectorXcd& psi, Subspace basis);

/// Partial trace over atom 1 and both cavity modes; preserves trace.
DensityMatrix reduce_to_atom2(const StateVector& psi);
DensityMatrix reduce_to_atom2(const DensityMatrix& rho);

/// <target|rho|target> / trace(rho). Throws std::invalid_argument on a
/// zero-trace rho or a dimension mismatch. Target must be normalized.
double fidelity(const Eigen::VectorXcd& target, const DensityMatrix& rho);

}  // namespace cavtel::hilbert

#endif
