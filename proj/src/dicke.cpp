#include "cavnb/dicke.hpp"

#include <cmath>
#include <stdexcept>

namespace cavnb {

DickeSpace::DickeSpace(int n) : n_atoms(n), dimension(n + 1) {
    if (n < 1) throw std::invalid_argument("DickeSpace: n_atoms must be >= 1");
    const double j = 0.5 * n;
    m_values.reserve(dimension);
    for (int i = 0; i <= n; ++i) m_values.push_back(-j + i);
}

int DickeSpace::index_of(double m) const {
    const double j = spin();
    const int i = static_cast<int>(std::lround(m + j));
    if (i < 0 || i >= dimension || std::abs(m_values[i] - m) > 1e-9)
        throw std::domain_error("DickeSpace: m is not on the ladder");
    return i;
}

double ladder_coefficient(int n_atoms, double m) {
    const double j = 0.5 * n_atoms;
    const double steps = j - m;
    if (m < -j - 1e-9 || m > j + 1e-9 || std::abs(steps - std::lround(steps)) > 1e-9)
        throw std::domain_error("ladder_coefficient: invalid rung m");
    const double v = j * (j + 1.0) - m * (m + 1.0);
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

double ladder_coefficient_safe(int n_atoms, double m) {
    const double j = 0.5 * n_atoms;
    if (m < -j - 0.5 || m > j - 0.5) return 0.0;
    const double v = j * (j + 1.0) - m * (m + 1.0);
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

void CollectiveOperator::validate() const {
    if (matrix.rows() != space.dimension || matrix.cols() != space.dimension)
        throw std::invalid_argument("CollectiveOperator: matrix shape mismatch");
    if (hermitian_flag) {
        const double scale = matrix.cwiseAbs().maxCoeff();
        const double dev = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
        if (scale > 0 && dev > 1e-12 * scale)
            throw std::runtime_error("CollectiveOperator: hermitian_flag violated");
    }
}

Matrix spin_matrix(const DickeSpace& s, SpinOp kind) {
    const int d = s.dimension;
    Matrix m = Matrix::Zero(d, d);
    switch (kind) {
        case SpinOp::JPlus:
            for (int i = 0; i + 1 < d; ++i)
                m(i + 1, i) = ladder_coefficient_safe(s.n_atoms, s.m_values[i]);
            break;
        case SpinOp::JMinus:
            return spin_matrix(s, SpinOp::JPlus).adjoint();
        case SpinOp::Jz:
            for (int i = 0; i < d; ++i) m(i, i) = s.m_values[i];
            break;
        case SpinOp::Jx:
            m = 0.5 * (spin_matrix(s, SpinOp::JPlus) + spin_matrix(s, SpinOp::JMinus));
            break;
        case SpinOp::Jy:
            m = Complex(0, -0.5) * (spin_matrix(s, SpinOp::JPlus) - spin_matrix(s, SpinOp::JMinus));
            break;
    }
    return m;
}

CollectiveOperator build_operator(const DickeSpace& space, SpinOp kind) {
    const bool herm = (kind == SpinOp::Jz || kind == SpinOp::Jx || kind == SpinOp::Jy);
    return CollectiveOperator{space, spin_matrix(space, kind), herm};
}

void QuantumState::validate() const {
    if (representation == Rep::Pure) {
        if (vec.size() != dim()) throw std::invalid_argument("QuantumState: vector size mismatch");
        if (std::abs(vec.squaredNorm() - 1.0) > 1e-9)
            throw std::runtime_error("QuantumState: pure-state norm violated");
    } else {
        if (rho.rows() != dim() || rho.cols() != dim())
            throw std::invalid_argument("QuantumState: density shape mismatch");
        if (std::abs(rho.trace().real() - 1.0) > 1e-9 || std::abs(rho.trace().imag()) > 1e-9)
            throw std::runtime_error("QuantumState: trace violated");
        const double scale = std::max(1.0, rho.cwiseAbs().maxCoeff());
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw std::runtime_error("QuantumState: density not Hermitian");
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8)
            throw std::runtime_error("QuantumState: density not positive");
    }
}

QuantumState QuantumState::to_density() const {
    if (representation == Rep::Density) return *this;
    QuantumState out;
    out.representation = Rep::Density;
    out.space = space;
    out.fock_dim = fock_dim;
    out.rho = vec * vec.adjoint();
    return out;
}

QuantumState pure_state(const DickeSpace& space, Vector amplitudes) {
    if (amplitudes.size() % space.dimension != 0)
        throw std::invalid_argument("pure_state: amplitude size mismatch");
    QuantumState st;
    st.space = space;
    st.fock_dim = static_cast<int>(amplitudes.size()) / space.dimension;
    st.vec = std::move(amplitudes);
    return st;
}

QuantumState dicke_state(const DickeSpace& space, double m) {
    Vector v = Vector::Zero(space.dimension);
    v(space.index_of(m)) = 1.0;
    return pure_state(space, std::move(v));
}

QuantumState coherent_spin_state(const DickeSpace& space, double theta, double phi) {
    if (theta < 0.0 || theta > kPi)
        throw std::invalid_argument("coherent_spin_state: theta outside [0, pi]");
    const int n = space.n_atoms;
    const double lc = std::log(std::max(std::cos(0.5 * theta), 0.0));
    const double ls = std::log(std::max(std::sin(0.5 * theta), 0.0));
    Vector v = Vector::Zero(space.dimension);
    // amplitude on m = J - k: sqrt(C(N,k)) cos^(N-k) sin^k e^{i k phi}
    for (int k = 0; k <= n; ++k) {
        const double lbin = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
        const double lmag = lbin + (n - k) * lc + k * ls;
        if (!std::isfinite(lmag)) continue;
        v(space.dimension - 1 - k) = std::exp(lmag) * std::exp(Complex(0, k * phi));
    }
    v.normalize();
    return pure_state(space, std::move(v));
}

Complex expectation(const QuantumState& state, const Matrix& op) {
    if (op.rows() != state.dim() || op.cols() != state.dim())
        throw std::invalid_argument("expectation: dimension mismatch");
    if (state.representation == QuantumState::Rep::Pure)
        return state.vec.dot(op * state.vec);
    return (op * state.rho).trace();
}

Complex expectation(const QuantumState& state, const CollectiveOperator& op) {
    return expectation(state, op.matrix);
}

double second_moment(const QuantumState& state, const Matrix& op) {
    return expectation(state, Matrix(op * op)).real();
}

Matrix expm_i_hermitian(const Matrix& h, double s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("expm_i_hermitian: eigendecomposition failed");
    Vector phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(Complex(0, -s * es.eigenvalues()(i)));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix fock_annihilation(int n_levels) {
    Matrix b = Matrix::Zero(n_levels, n_levels);
    for (int n = 1; n < n_levels; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
    return b;
}

}  // namespace cavnb
