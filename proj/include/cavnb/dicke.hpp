#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace cavnb {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Symmetric (maximal-spin) subspace of N two-level atoms: J = N/2,
/// basis |m> with m = -N/2 ... +N/2 ascending in unit steps.
struct DickeSpace {
    int n_atoms = 0;
    int dimension = 0;
    std::vector<double> m_values;

    explicit DickeSpace(int n_atoms);
    double spin() const { return 0.5 * n_atoms; }

    /// Index of rung m; throws std::domain_error off the ladder.
    int index_of(double m) const;
    bool operator==(const DickeSpace& other) const { return n_atoms == other.n_atoms; }
};

/// Coupling factor f_m = sqrt(J(J+1) - m(m+1)) between |m> and |m+1>, J = N/2.
/// Throws std::domain_error when m is not a valid rung.
double ladder_coefficient(int n_atoms, double m);

/// Same as ladder_coefficient but returns 0 outside the ladder instead of throwing.
double ladder_coefficient_safe(int n_atoms, double m);

enum class SpinOp { JPlus, JMinus, Jz, Jx, Jy };

struct CollectiveOperator {
    DickeSpace space;
    Matrix matrix;
    bool hermitian_flag = false;

    /// Checks shape and, when flagged, hermiticity within 1e-12 * max|M|.
    void validate() const;
};

/// <m+1|J+|m> = f_m, Jz = diag(m), Jx = (J+ + J-)/2, Jy = (J+ - J-)/(2i).
CollectiveOperator build_operator(const DickeSpace& space, SpinOp kind);
Matrix spin_matrix(const DickeSpace& space, SpinOp kind);

struct QuantumState {
    enum class Rep { Pure, Density };
    Rep representation = Rep::Pure;
    DickeSpace space;
    int fock_dim = 1;  ///< >1 means Dicke (x) Fock, spin-major index s*fock_dim + n_b
    Vector vec;        ///< Rep::Pure
    Matrix rho;        ///< Rep::Density

    int dim() const { return space.dimension * fock_dim; }
    bool is_pure() const { return representation == Rep::Pure; }

    /// Pure: ||psi||^2 = 1 within 1e-9. Density: trace 1 within 1e-9,
    /// Hermitian within 1e-12, min eigenvalue >= -1e-8. Throws on violation.
    void validate() const;
    QuantumState to_density() const;
};

QuantumState pure_state(const DickeSpace& space, Vector amplitudes);
QuantumState dicke_state(const DickeSpace& space, double m);

/// Coherent spin state with <Jz> = (N/2)cos(theta), <Jx> = (N/2)sin(theta)cos(phi),
/// <Jy> = (N/2)sin(theta)sin(phi). Requires 0 <= theta <= pi.
QuantumState coherent_spin_state(const DickeSpace& space, double theta, double phi);

Complex expectation(const QuantumState& state, const Matrix& op);
Complex expectation(const QuantumState& state, const CollectiveOperator& op);
double second_moment(const QuantumState& state, const Matrix& op);

/// exp(-i s H) for Hermitian H, via eigendecomposition.
Matrix expm_i_hermitian(const Matrix& h, double s);

Matrix kron(const Matrix& a, const Matrix& b);

/// Annihilation operator on an n_levels-dimensional Fock space.
Matrix fock_annihilation(int n_levels);

}  // namespace cavnb
