#include "cavtel/hilbert.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace cavtel::hilbert {

int flat_index(const BasisLabel& label) {
    const int a1 = static_cast<int>(label.atom1);
    const int a2 = static_cast<int>(label.atom2);
    assert(a1 >= 0 && a1 < atom_levels && a2 >= 0 && a2 < atom_levels);
    assert(label.n1 >= 0 && label.n1 < photon_states);
    assert(label.n2 >= 0 && label.n2 < photon_states);
    return ((a1 * photon_states + label.n1) * atom_levels + a2) * photon_states + label.n2;
}

BasisLabel label_of(int index) {
    assert(index >= 0 && index < state_dim);
    const int n2 = index % photon_states;
    index /= photon_states;
    const int a2 = index % atom_levels;
    index /= atom_levels;
    const int n1 = index % photon_states;
    const int a1 = index / photon_states;
    return BasisLabel{static_cast<AtomLevel>(a1), n1, static_cast<AtomLevel>(a2), n2};
}

StateVector apply(const Operator& op, const StateVector& psi) {
    return op.m * psi;
}

Complex inner(const StateVector& psi, const StateVector& phi) {
    return psi.dot(phi);  // Eigen's dot conjugates the first argument
}

double norm2(const StateVector& psi) {
    return psi.squaredNorm();
}

StateVector basis_ket(const BasisLabel& label) {
    StateVector psi = StateVector::Zero();
    psi(flat_index(label)) = Complex(1.0, 0.0);
    return psi;
}

bool is_hermitian(const Operator& op, double tol) {
    return (op.m - op.m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const Operator& op, double tol) {
    OperatorMatrix prod = op.m.adjoint() * op.m;
    return (prod - OperatorMatrix::Identity()).cwiseAbs().maxCoeff() <= tol;
}

DensityMatrix pure_density(const Eigen::VectorXcd& psi, Subspace basis) {
    DensityMatrix rho;
    rho.m = psi * psi.adjoint();
    rho.basis = basis;
    return rho;
}

DensityMatrix reduce_to_atom2(const StateVector& psi) {
    DensityMatrix rho;
    rho.m = Eigen::MatrixXcd::Zero(atom_levels, atom_levels);
    rho.basis = Subspace::atom2;
    // rho2[a][b] = sum over (atom1, n1, n2) of psi[.,a,.] conj(psi[.,b,.])
    for (int a1 = 0; a1 < atom_levels; ++a1) {
        for (int n1 = 0; n1 < photon_states; ++n1) {
            for (int n2 = 0; n2 < photon_states; ++n2) {
                for (int a = 0; a < atom_levels; ++a) {
                    const int ia = flat_index({static_cast<AtomLevel>(a1), n1,
                                               static_cast<AtomLevel>(a), n2});
                    for (int b = 0; b < atom_levels; ++b) {
                        const int ib = flat_index({static_cast<AtomLevel>(a1), n1,
                                                   static_cast<AtomLevel>(b), n2});
                        rho.m(a, b) += psi(ia) * std::conj(psi(ib));
                    }
                }
            }
        }
    }
    return rho;
}

DensityMatrix reduce_to_atom2(const DensityMatrix& rho_full) {
    if (rho_full.basis == Subspace::atom2) return rho_full;
    if (rho_full.dim() != state_dim)
        throw std::invalid_argument("reduce_to_atom2: expected a 36-dim density matrix");
    DensityMatrix rho;
    rho.m = Eigen::MatrixXcd::Zero(atom_levels, atom_levels);
    rho.basis = Subspace::atom2;
    for (int a1 = 0; a1 < atom_levels; ++a1) {
        for (int n1 = 0; n1 < photon_states; ++n1) {
            for (int n2 = 0; n2 < photon_states; ++n2) {
                for (int a = 0; a < atom_levels; ++a) {
                    const int ia = flat_index({static_cast<AtomLevel>(a1), n1,
                                               static_cast<AtomLevel>(a), n2});
                    for (int b = 0; b < atom_levels; ++b) {
                        const int ib = flat_index({static_cast<AtomLevel>(a1), n1,
                                                   static_cast<AtomLevel>(b), n2});
                        rho.m(a, b) += rho_full.m(ia, ib);
                    }
                }
            }
        }
    }
    return rho;
}

double fidelity(const Eigen::VectorXcd& target, const DensityMatrix& rho) {
    if (target.size() != rho.dim())
        throw std::invalid_argument("fidelity: target/rho dimension mismatch");
    if (std::abs(target.squaredNorm() - 1.0) > eps_num)
        throw std::invalid_argument("fidelity: target must be normalized");
    const double tr = rho.trace();
    if (!(tr > 0.0))
        throw std::invalid_argument("fidelity: density matrix has zero trace");
    const double overlap = (target.adjoint() * rho.m * target)(0, 0).real();
    const double f = overlap / tr;
    return std::min(std::max(f, 0.0), 1.0);
}

}  // namespace cavtel::hilbert
