#include "cavnb/effective.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cavnb {

namespace {

constexpr double kRwaFactor = 10.0;  // drop terms with |freq| > 10 |coefficient|

std::string nbody_key(int n, bool raising) {
    std::ostringstream os;
    os << (raising ? "Jp" : "Jm") << n;
    return os.str();
}

// Column 0 of (D + V)^{-1} expanded to `order` powers of the tridiagonal
// coupling V; keeping the expansion truncated is what drops the (G f)^2
// denominator corrections.
Vector chain_inverse_column(const std::vector<Complex>& diag, const std::vector<double>& coup,
                            int order) {
    const int n = static_cast<int>(diag.size());
    Vector col = Vector::Zero(n);
    col(0) = 1.0 / diag[0];
    Vector cur = col;
    for (int p = 1; p <= order; ++p) {
        Vector nxt = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            Complex acc = 0;
            if (i > 0) acc += coup[i - 1] * cur(i - 1);
            if (i + 1 < n) acc += coup[i] * cur(i + 1);
            nxt(i) = -acc / diag[i];
        }
        cur.swap(nxt);
        col += cur;
    }
    return col;
}

struct Tone {
    Complex alpha;
    double nu;
};

}  // namespace

void LadderModel::validate() const {
    if (n_body < 2 || n_body > 4)
        throw std::invalid_argument("LadderModel: n_body must be 2, 3 or 4");
    if (n_atoms < n_body)
        throw std::invalid_argument("LadderModel: need at least n_body atoms");
    if (omega_z <= 0) throw std::invalid_argument("LadderModel: omega_z must be > 0");
    if (std::abs(delta()) > 0.25 * omega_z) {
        std::ostringstream os;
        os << "LadderModel: tones violate the resonance condition omega2-omega1 = " << n_body
           << " omega_z (residual " << delta() << " rad/s)";
        throw std::invalid_argument(os.str());
    }
}

LadderModel LadderModel::from_params(const PhysicalParams& p, int n_body) {
    p.validate(2);
    LadderModel m;
    m.n_body = n_body;
    m.n_atoms = p.n_atoms;
    m.G = derive_G(p);
    m.omega_z = p.omega_z;
    m.kappa = p.kappa;
    m.alpha1 = p.tones[0].alpha;
    m.alpha2 = p.tones[1].alpha;
    m.nu1 = p.tones[0].offset;
    m.nu2 = p.tones[1].offset;
    m.validate();
    return m;
}

Matrix monomial_matrix(const DickeSpace& space, const std::string& key) {
    const Matrix jp = spin_matrix(space, SpinOp::JPlus);
    const Matrix jm = spin_matrix(space, SpinOp::JMinus);
    if (key == "Jz") return spin_matrix(space, SpinOp::Jz);
    if (key == "JpJm") return jp * jm;
    if (key == "JmJp") return jm * jp;
    if (key == "Jp2Jm2") return jp * jp * jm * jm;
    if (key == "Jm2Jp2") return jm * jm * jp * jp;
    if (key.size() == 3 && (key[0] == 'J') && (key[1] == 'p' || key[1] == 'm')) {
        const int power = key[2] - '0';
        if (power >= 1 && power <= 8) {
            Matrix out = Matrix::Identity(space.dimension, space.dimension);
            const Matrix& base = (key[1] == 'p') ? jp : jm;
            for (int i = 0; i < power; ++i) out = base * out;
            return out;
        }
    }
    throw std::invalid_argument("monomial_matrix: unknown key " + key);
}

Complex EffectiveModel::coefficient(const std::string& key) const {
    auto it = coefficients.find(key);
    return it == coefficients.end() ? Complex(0, 0) : it->second;
}

Matrix EffectiveModel::hamiltonian(const DickeSpace& space, double phi_d) const {
    Matrix h = Matrix::Zero(space.dimension, space.dimension);
    const Complex up_phase = std::exp(Complex(0, n_body * phi_d));
    for (const auto& [key, c] : coefficients) {
        Complex factor = c;
        if (key == nbody_key(n_body, true)) factor *= up_phase;
        if (key == nbody_key(n_body, false)) factor *= std::conj(up_phase);
        h += factor * monomial_matrix(space, key);
    }
    return h;
}

std::vector<std::pair<double, Matrix>> EffectiveModel::jump_operators(const DickeSpace& space,
                                                                      bool include_negligible) const {
    std::vector<std::pair<double, Matrix>> out;
    for (const auto& ch : jumps) {
        if (ch.negligible && !include_negligible) continue;
        if (ch.rate <= 0) continue;
        const std::string key = nbody_key(std::abs(ch.delta_m), ch.delta_m > 0);
        out.emplace_back(ch.rate, monomial_matrix(space, key));
    }
    return out;
}

double EffectiveModel::transition_detuning(const DickeSpace& space, double m) const {
    Matrix diag = Matrix::Zero(space.dimension, space.dimension);
    for (const auto& [key, c] : coefficients) {
        if (key == "Jz" || key == "JpJm" || key == "JmJp" || key == "Jp2Jm2" || key == "Jm2Jp2")
            diag += c * monomial_matrix(space, key);
    }
    const int i0 = space.index_of(m);
    const int i1 = space.index_of(m + n_body);
    return (diag(i1, i1) - diag(i0, i0)).real();
}

NonHermitianSet nonhermitian_hamiltonians(const LadderModel& model, double m_z) {
    const int n = model.n_body;
    const double j = 0.5 * model.n_atoms;
    if (m_z < -j - 1e-9 || m_z + n > j + 1e-9)
        throw std::domain_error("nonhermitian_hamiltonians: rung overflow");
    const int dim = n - 1;
    const Complex ik2(0, -0.5 * model.kappa);

    auto build = [&](double nu, double level_energy_offset) {
        Matrix h = Matrix::Zero(dim, dim);
        for (int k = 0; k < dim; ++k)
            h(k, k) = (1 + k) * model.omega_z - level_energy_offset - nu + ik2;
        for (int k = 0; k + 1 < dim; ++k) {
            const double v = model.G * ladder_coefficient_safe(model.n_atoms, m_z + 1 + k);
            h(k, k + 1) = v;
            h(k + 1, k) = v;
        }
        return h;
    };
    // level energies relative to g0: E(g0) = 0, E(g1) = n omega_z
    NonHermitianSet out;
    out.f1_g0 = build(model.nu1, 0.0);
    out.f2_g0 = build(model.nu2, 0.0);
    out.f1_g1 = build(model.nu1, n * model.omega_z);
    out.f2_g1 = build(model.nu2, n * model.omega_z);
    return out;
}

Matrix inverse_2x2_closed_form(const Complex& e0, const Complex& e1, const Complex& v) {
    const Complex det = e0 * e1 - v * v;
    Matrix out(2, 2);
    out << e1, -v, -v, e0;
    return out / det;
}

namespace {

struct RungFit {
    std::map<std::string, Complex> coefficients;
    double residual = 0;
    bool polynomial = true;
    std::vector<std::string> warnings;
};

// Least-squares fit of real rung amplitudes onto real basis functions.
std::pair<Eigen::VectorXd, double> fit_real(const Eigen::MatrixXd& basis,
                                            const Eigen::VectorXd& values) {
    Eigen::VectorXd c = basis.colPivHouseholderQr().solve(values);
    const double scale = std::max(values.norm(), 1e-300);
    const double residual = (basis * c - values).norm() / scale;
    return {c, residual};
}

}  // namespace

EffectiveModel effective_model_second_order(const LadderModel& model) {
    model.validate();
    const int n = model.n_body;
    const int order = n - 2;
    const int N = model.n_atoms;
    const double j = 0.5 * N;
    const int dim = N + 1;
    const double omega_beat = model.nu2 - model.nu1;
    const double omega_frame = omega_beat / n;  // co-rotating rate per rung

    const Tone tones[2] = {{model.alpha1, model.nu1}, {model.alpha2, model.nu2}};
    auto f = [&](double m) { return ladder_coefficient_safe(N, m); };

    EffectiveModel out;
    out.n_body = n;
    out.n_atoms = N;

    // soft checks
    {
        const double dcmin = std::min(std::abs(model.delta_c1()), std::abs(model.delta_c2()));
        if (dcmin > 0 && std::abs(model.G) * std::sqrt(double(N)) / dcmin > 0.1)
            out.warnings.push_back("perturbative ratio G sqrt(N)/|Delta_c| exceeds 0.1");
    }

    // chain denominators, rung independent
    bool near_resonant = false;
    auto chain_diag = [&](int tone, bool up) {
        std::vector<Complex> d(n - 1);
        for (int k = 0; k < n - 1; ++k) {
            const double sign = up ? 1.0 : -1.0;
            d[k] = Complex(sign * (1 + k) * model.omega_z - tones[tone].nu, -0.5 * model.kappa);
            if (std::abs(d[k].real()) < 0.5 * model.kappa) near_resonant = true;
        }
        return d;
    };
    const std::vector<Complex> diag_up[2] = {chain_diag(0, true), chain_diag(1, true)};
    const std::vector<Complex> diag_down[2] = {chain_diag(0, false), chain_diag(1, false)};
    if (near_resonant) out.warnings.push_back("near-resonant intermediate state");

    // raw matrix elements of V_- Minv V_+ keyed by (delta_m, source rung index)
    std::map<int, std::vector<Complex>> raw;
    auto accumulate = [&](int dm, int idx, Complex x, double freq) {
        if (std::abs(x) == 0.0) return;
        if (std::abs(freq) > kRwaFactor * std::abs(x)) return;  // rotating-wave drop
        auto& bucket = raw[dm];
        if (bucket.empty()) bucket.assign(dim, Complex(0, 0));
        bucket[idx] += x;
    };

    for (int fi = 0; fi < 2; ++fi) {
        if (std::abs(tones[fi].alpha) == 0.0) continue;
        for (int i = 0; i < dim; ++i) {
            const double mu = -j + i;
            // upward excursion |mu,0> -> |mu+1,1> -> chain
            if (f(mu) > 0) {
                std::vector<double> coup(std::max(0, n - 2));
                for (int k = 0; k + 1 < n - 1; ++k) coup[k] = model.G * f(mu + 1 + k);
                const Vector col = chain_inverse_column(diag_up[fi], coup, order);
                const Complex a_in = model.G * tones[fi].alpha * f(mu);
                for (int k = 0; k < n - 1; ++k) {
                    if (std::abs(col(k)) == 0.0) continue;
                    for (int fo = 0; fo < 2; ++fo) {
                        if (std::abs(tones[fo].alpha) == 0.0) continue;
                        const double dnu = tones[fo].nu - tones[fi].nu;
                        // J- return to rung mu+k
                        {
                            const Complex x =
                                model.G * std::conj(tones[fo].alpha) * f(mu + k) * col(k) * a_in;
                            accumulate(k, i, x, k * omega_frame + dnu);
                        }
                        // J+ return to rung mu+k+2
                        {
                            const Complex x =
                                model.G * std::conj(tones[fo].alpha) * f(mu + k + 1) * col(k) * a_in;
                            accumulate(k + 2, i, x, (k + 2) * omega_frame + dnu);
                        }
                    }
                }
            }
            // downward excursion |mu,0> -> |mu-1,1> -> chain
            if (f(mu - 1) > 0) {
                std::vector<double> coup(std::max(0, n - 2));
                for (int k = 0; k + 1 < n - 1; ++k) coup[k] = model.G * f(mu - 2 - k);
                const Vector col = chain_inverse_column(diag_down[fi], coup, order);
                const Complex a_in = model.G * tones[fi].alpha * f(mu - 1);
                for (int k = 0; k < n - 1; ++k) {
                    if (std::abs(col(k)) == 0.0) continue;
                    for (int fo = 0; fo < 2; ++fo) {
                        if (std::abs(tones[fo].alpha) == 0.0) continue;
                        const double dnu = tones[fo].nu - tones[fi].nu;
                        // J+ return to rung mu-k
                        {
                            const Complex x =
                                model.G * std::conj(tones[fo].alpha) * f(mu - 1 - k) * col(k) * a_in;
                            accumulate(-k, i, x, -k * omega_frame + dnu);
                        }
                        // J- return to rung mu-k-2
                        {
                            const Complex x =
                                model.G * std::conj(tones[fo].alpha) * f(mu - 2 - k) * col(k) * a_in;
                            accumulate(-(k + 2), i, x, -(k + 2) * omega_frame + dnu);
                        }
                    }
                }
            }
        }
    }

    double worst_residual = 0;

    // diagonal bucket -> exchange coefficients (H gains -(x + x*)/2 = -Re x)
    {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
        if (raw.count(0)) {
            for (int i = 0; i < dim; ++i) a(i) = -raw[0][i].real();
        }
        const int nb = (order >= 2) ? 4 : 2;
        Eigen::MatrixXd basis(dim, nb);
        for (int i = 0; i < dim; ++i) {
            const double mu = -j + i;
            basis(i, 0) = f(mu - 1) * f(mu - 1);  // J+J-
            basis(i, 1) = f(mu) * f(mu);          // J-J+
            if (nb == 4) {
                basis(i, 2) = f(mu - 1) * f(mu - 1) * f(mu - 2) * f(mu - 2);  // Jp2Jm2
                basis(i, 3) = f(mu) * f(mu) * f(mu + 1) * f(mu + 1);          // Jm2Jp2
            }
        }
        auto [c, res] = fit_real(basis, a);
        worst_residual = std::max(worst_residual, res);
        out.coefficients["JpJm"] = c(0);
        out.coefficients["JmJp"] = c(1);
        if (nb == 4) {
            out.coefficients["Jp2Jm2"] = c(2);
            out.coefficients["Jm2Jp2"] = c(3);
        }
    }

    // n-body bucket: H element is -(M[+n](mu) + conj(M[-n](mu+n)))/2
    {
        std::vector<Complex> plus(dim, Complex(0, 0)), minus(dim, Complex(0, 0));
        if (raw.count(n)) plus = raw[n];
        if (raw.count(-n)) minus = raw[-n];
        Complex csum = 0;
        double wsum = 0, res = 0;
        std::vector<std::pair<double, Complex>> samples;
        for (int i = 0; i + n < dim; ++i) {
            const double mu = -j + i;
            double prod = 1;
            for (int q = 0; q < n; ++q) prod *= f(mu + q);
            if (prod <= 0) continue;
            const Complex amp = -0.5 * (plus[i] + std::conj(minus[i + n]));
            samples.emplace_back(prod, amp / prod);
            csum += amp / prod;
            wsum += 1;
        }
        const Complex c = (wsum > 0) ? csum / wsum : Complex(0, 0);
        for (const auto& [w, ci] : samples)
            res = std::max(res, std::abs(ci - c) / std::max(std::abs(c), 1e-300));
        worst_residual = std::max(worst_residual, res);
        out.coefficients[nbody_key(n, true)] = c;
        out.coefficients[nbody_key(n, false)] = std::conj(c);
    }

    // any other kept bucket means the model is not in the monomial basis
    for (const auto& [dm, bucket] : raw) {
        if (dm == 0 || dm == n || dm == -n) continue;
        double norm = 0;
        for (const auto& v : bucket) norm = std::max(norm, std::abs(v));
        if (norm > 0) {
            out.polynomial = false;
            std::ostringstream os;
            os << "unexpected resonant bucket at delta_m = " << dm;
            out.warnings.push_back(os.str());
        }
    }
    out.fit_residual = worst_residual;
    if (worst_residual > 1e-8) out.polynomial = false;

    // ground-manifold drive shift and frame term on Jz
    out.coefficients["Jz"] =
        ground_drive_jz_shift(model.G, model.omega_z, model.alpha1, model.alpha2,
                              omega_beat - model.omega_z, omega_beat + model.omega_z) -
        model.delta() / n;

    // jump channels, leading chain order per channel
    for (int fi = 0; fi < 2; ++fi) {
        if (std::abs(tones[fi].alpha) == 0.0) continue;
        for (int up = 0; up < 2; ++up) {
            const auto& dgs = (up == 1) ? diag_up[fi] : diag_down[fi];
            Complex denom = 1.0;
            for (int k = 0; k < n - 1; ++k) {
                denom *= dgs[k];
                const double gpow = std::pow(model.G, k + 1);
                const double amp = std::sqrt(model.kappa) * gpow * std::abs(tones[fi].alpha) /
                                   std::abs(denom);
                JumpChannel ch;
                ch.delta_m = (up == 1) ? (k + 1) : -(k + 1);
                ch.rate = amp * amp;
                ch.negligible = (k >= 1);
                ch.frame_freq = ((up == 1) ? 1.0 : -1.0) * (1 + k) * omega_frame - tones[fi].nu;
                std::ostringstream os;
                os << "J" << ((up == 1) ? "+" : "-");
                if (k >= 1) os << "^" << (k + 1);
                os << " (tone " << (fi + 1) << ")";
                ch.label = os.str();
                out.jumps.push_back(ch);
            }
        }
    }
    std::sort(out.jumps.begin(), out.jumps.end(),
              [](const JumpChannel& a, const JumpChannel& b) { return a.rate > b.rate; });
    return out;
}

EffectiveModel effective_model_fourth_order_4body(const LadderModel& model) {
    if (model.n_body != 4)
        throw std::invalid_argument("effective_model_fourth_order_4body: n_body must be 4");
    return effective_model_second_order(model);
}

std::vector<ToneTerm> tone_decomposition(const LadderModel& model, const DickeSpace& space,
                                         int fock_dim) {
    if (fock_dim < 2) throw std::invalid_argument("tone_decomposition: fock_dim must be >= 2");
    const Matrix jp = kron(spin_matrix(space, SpinOp::JPlus), Matrix::Identity(fock_dim, fock_dim));
    const Matrix jm = kron(spin_matrix(space, SpinOp::JMinus), Matrix::Identity(fock_dim, fock_dim));
    const Matrix b = kron(Matrix::Identity(space.dimension, space.dimension),
                          fock_annihilation(fock_dim));
    const Matrix bd = b.adjoint();
    const Matrix nb = bd * b;
    const Matrix id = Matrix::Identity(space.dimension * fock_dim, space.dimension * fock_dim);

    const double beat = model.nu2 - model.nu1;
    const double a2sum = std::norm(model.alpha1) + std::norm(model.alpha2);
    const Complex cross = std::conj(model.alpha2) * model.alpha1;

    std::vector<std::pair<Matrix, double>> rawside;
    rawside.emplace_back(model.G * (nb + a2sum * id) * jp, model.omega_z);
    rawside.emplace_back(model.G * model.alpha1 * bd * jm, -model.delta_c1());
    rawside.emplace_back(model.G * model.alpha2 * bd * jm, -(model.delta_c2() + 2 * model.omega_z));
    rawside.emplace_back(model.G * model.alpha1 * bd * jp, -model.delta_c1() + 2 * model.omega_z);
    rawside.emplace_back(model.G * model.alpha2 * bd * jp, -model.delta_c2());
    rawside.emplace_back(model.G * cross * jp, beat + model.omega_z);
    rawside.emplace_back(model.G * cross * jm, beat - model.omega_z);

    std::vector<ToneTerm> out;
    const char* labels[7] = {"h0", "h1", "h2", "h3", "h4", "h5", "h6"};
    for (size_t i = 0; i < rawside.size(); ++i) {
        auto [h, freq] = rawside[i];
        if (h.cwiseAbs().maxCoeff() == 0.0) continue;
        if (std::abs(freq) < 1e-12 * model.omega_z)
            throw std::runtime_error("tone_decomposition: static drive component");
        if (freq < 0) {
            h = Matrix(h.adjoint());
            freq = -freq;
        }
        out.push_back({std::move(h), freq, labels[i]});
    }
    return out;
}

EffectiveModel average_hamiltonian_third_order(const LadderModel& model) {
    model.validate();
    if (model.kappa != 0.0)
        throw std::invalid_argument("average_hamiltonian_third_order: requires kappa = 0");
    if (model.n_body > 3)
        throw std::invalid_argument("average_hamiltonian_third_order: quartic terms are beyond third order");

    const int N = model.n_atoms;
    const double j = 0.5 * N;
    const DickeSpace space(N);
    const int fock_dim = 4;  // triple products move at most 3 photons
    const int dim = space.dimension * fock_dim;
    const auto terms = tone_decomposition(model, space, fock_dim);

    const double tol = std::max(std::abs(model.delta()) * (1 + 1e-12), 1e-9 * model.omega_z);
    auto comm = [](const Matrix& a, const Matrix& b) { return Matrix(a * b - b * a); };

    Matrix h_static = Matrix::Zero(dim, dim);
    // second order: self terms plus degenerate cross pairs
    for (const auto& t : terms) h_static += comm(t.h_dag, Matrix(t.h_dag.adjoint())) / t.freq;
    for (size_t i = 0; i < terms.size(); ++i) {
        for (size_t k = i + 1; k < terms.size(); ++k) {
            if (std::abs(terms[i].freq - terms[k].freq) > tol) continue;
            const double fbar = 2.0 / (1.0 / terms[i].freq + 1.0 / terms[k].freq);
            h_static += comm(terms[i].h_dag, Matrix(terms[k].h_dag.adjoint())) / fbar;
            h_static += comm(terms[k].h_dag, Matrix(terms[i].h_dag.adjoint())) / fbar;
        }
    }
    // third order: resonant triples f_i = f_j + f_k (j < k; the j = k
    // combinations vanish identically for this decomposition)
    for (size_t i = 0; i < terms.size(); ++i) {
        for (size_t jj = 0; jj < terms.size(); ++jj) {
            for (size_t k = jj + 1; k < terms.size(); ++k) {
                if (i == jj || i == k) continue;
                const double fi = terms[i].freq, fj = terms[jj].freq, fk = terms[k].freq;
                if (std::abs(fi - (fj + fk)) > tol) continue;
                const Matrix hi = terms[i].h_dag.adjoint();
                const Matrix hj = terms[jj].h_dag.adjoint();
                const Matrix hk = terms[k].h_dag.adjoint();
                Matrix t = fj * comm(comm(hi, terms[jj].h_dag), terms[k].h_dag);
                t += fj * comm(comm(terms[i].h_dag, hj), hk);
                t += fk * comm(comm(hi, terms[k].h_dag), terms[jj].h_dag);
                t += fk * comm(comm(terms[i].h_dag, hk), hj);
                h_static += t / (fj * fk * (fj + fk));
            }
        }
    }

    // project onto the photon vacuum
    Matrix hs(space.dimension, space.dimension);
    for (int r = 0; r < space.dimension; ++r)
        for (int c = 0; c < space.dimension; ++c) hs(r, c) = h_static(r * fock_dim, c * fock_dim);

    EffectiveModel out;
    out.n_body = model.n_body;
    out.n_atoms = N;
    const int n = model.n_body;
    auto f = [&](double m) { return ladder_coefficient_safe(N, m); };

    double worst = 0;
    {
        // diagonal: exchange Lorentzians plus the Jz light shift
        Eigen::MatrixXd basis(space.dimension, 3);
        Eigen::VectorXd vals(space.dimension);
        for (int i = 0; i < space.dimension; ++i) {
            const double mu = -j + i;
            basis(i, 0) = f(mu - 1) * f(mu - 1);
            basis(i, 1) = f(mu) * f(mu);
            basis(i, 2) = mu;
            vals(i) = hs(i, i).real();
            if (std::abs(hs(i, i).imag()) > 1e-12 * std::max(1.0, std::abs(hs(i, i).real())))
                out.warnings.push_back("non-real diagonal in averaged Hamiltonian");
        }
        auto [c, res] = fit_real(basis, vals);
        worst = std::max(worst, res);
        out.coefficients["JpJm"] = c(0);
        out.coefficients["JmJp"] = c(1);
        out.coefficients["Jz"] = c(2) - model.delta() / n;
    }
    {
        Complex csum = 0;
        double cnt = 0, res = 0;
        std::vector<Complex> cs;
        for (int i = 0; i + n < space.dimension; ++i) {
            const double mu = -j + i;
            double prod = 1;
            for (int q = 0; q < n; ++q) prod *= f(mu + q);
            if (prod <= 0) continue;
            cs.push_back(hs(i + n, i) / prod);
            csum += cs.back();
            cnt += 1;
        }
        const Complex c = (cnt > 0) ? csum / cnt : Complex(0, 0);
        for (const auto& ci : cs)
            res = std::max(res, std::abs(ci - c) / std::max(std::abs(c), 1e-300));
        worst = std::max(worst, res);
        out.coefficients[nbody_key(n, true)] = c;
        out.coefficients[nbody_key(n, false)] = std::conj(c);
    }
    out.fit_residual = worst;
    out.polynomial = worst <= 1e-8;
    return out;
}

double max_relative_coefficient_difference(const EffectiveModel& a, const EffectiveModel& b) {
    double worst = 0;
    std::vector<std::string> keys;
    for (const auto& [k, v] : a.coefficients) keys.push_back(k);
    for (const auto& [k, v] : b.coefficients)
        if (!a.coefficients.count(k)) keys.push_back(k);
    for (const auto& k : keys) {
        const Complex ca = a.coefficient(k), cb = b.coefficient(k);
        const double scale = std::max(std::abs(ca), std::abs(cb));
        if (scale == 0) continue;
        worst = std::max(worst, std::abs(ca - cb) / scale);
    }
    return worst;
}

}  // namespace cavnb
