#include "cavnb/sequence.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace cavnb {

void PulseSequence::validate() const {
    if (steps.empty()) throw std::invalid_argument("PulseSequence: empty sequence");
    int readouts = 0;
    for (size_t i = 0; i < steps.size(); ++i) {
        if (std::holds_alternative<ReadoutMap>(steps[i])) {
            ++readouts;
            if (i + 1 != steps.size())
                throw std::invalid_argument("PulseSequence: readout must be the terminal step");
        }
        if (const auto* p = std::get_if<BraggPulse>(&steps[i])) {
            if (p->area < 0 || p->area > kTwoPi)
                throw std::invalid_argument("PulseSequence: pulse area outside [0, 2 pi]");
        }
        if (const auto* w = std::get_if<InteractionWindow>(&steps[i])) {
            if (w->duration < 0) throw std::invalid_argument("PulseSequence: negative duration");
            if (w->contrast <= 0 || w->contrast > 1)
                throw std::invalid_argument("PulseSequence: contrast outside (0, 1]");
        }
    }
    if (readouts != 1) throw std::invalid_argument("PulseSequence: exactly one readout required");
}

namespace {

// pi/2 mapping pulses: a y-axis pulse maps +x onto +z, an x-axis pulse maps
// +y onto +z (mirrors the readout-basis mapping used in the lab).
BraggPulse mapping_pulse(ReadoutBasis basis) {
    if (basis == ReadoutBasis::Jx) return {0.5 * kPi, 1.5 * kPi, 0};
    return {0.5 * kPi, 0.0, 0};
}

struct MeanFieldRunner {
    const SequenceParams& params;
    MeanFieldState s;
    std::vector<std::array<double, 3>> trace;

    void pulse(const BraggPulse& p) {
        const Eigen::Vector3d axis(std::cos(p.axis_phase), std::sin(p.axis_phase), 0.0);
        const Eigen::Vector3d v = Eigen::AngleAxisd(p.area, axis) * Eigen::Vector3d(s.jx, s.jy, s.jz);
        s = {v.x(), v.y(), v.z()};
    }
    void window(const InteractionWindow& w) {
        if (w.duration > 0) {
            MeanFieldParams mp;
            mp.n_body = params.n_body;
            mp.chi_collective = params.chi_collective;
            mp.phi_d = w.phi_d.value_or(params.phi_d);
            mp.delta = w.delta.value_or(params.delta);
            mp.gamma = params.gamma;
            s = evolve_meanfield(s, mp, {0.0, w.duration}, params.meanfield_tol).back();
        }
        s.jx *= w.contrast;
        s.jy *= w.contrast;
    }
    void wait(const Wait& w) {
        const double a = w.z_rate * w.duration;
        // H = z_rate * Jz precesses J+ as e^{-i a}
        const double c = std::cos(a), si = std::sin(a);
        const double x = s.jx * c + s.jy * si;
        const double y = -s.jx * si + s.jy * c;
        s.jx = x;
        s.jy = y;
    }
};

struct ExactRunner {
    const SequenceParams& params;
    DickeSpace space;
    QuantumState st;
    Matrix jx, jy, jz;
    std::vector<std::array<double, 3>> trace;

    ExactRunner(const SequenceParams& p, const QuantumState* initial)
        : params(p), space(p.n_atoms) {
        jx = spin_matrix(space, SpinOp::Jx);
        jy = spin_matrix(space, SpinOp::Jy);
        jz = spin_matrix(space, SpinOp::Jz);
        if (initial) {
            st = *initial;
            if (st.space.dimension != space.dimension)
                throw std::invalid_argument("run_sequence: initial state dimension mismatch");
        } else {
            st = dicke_state(space, -0.5 * p.n_atoms);  // south pole
        }
        if (params.engine == Engine::FullCavity) {
            if (!params.ladder) throw std::invalid_argument("run_sequence: full-cavity needs a LadderModel");
            const int fd = params.fock_cutoff + 1;
            if (st.fock_dim == 1) {
                Vector psi = Vector::Zero(space.dimension * fd);
                for (int s = 0; s < space.dimension; ++s) psi(s * fd) = st.vec(s);
                st = pure_state(space, std::move(psi));
            }
        }
    }

    Matrix lift(const Matrix& spin_op) const {
        if (st.fock_dim == 1) return spin_op;
        return kron(spin_op, Matrix::Identity(st.fock_dim, st.fock_dim));
    }

    void apply_unitary(const Matrix& u) {
        if (st.is_pure())
            st.vec = u * st.vec;
        else
            st.rho = u * st.rho * u.adjoint();
    }

    void pulse(const BraggPulse& p) {
        const Matrix gen = std::cos(p.axis_phase) * jx + std::sin(p.axis_phase) * jy;
        apply_unitary(expm_i_hermitian(lift(gen), p.area));
    }

    EffectiveModel effective_model() const {
        if (params.model) return *params.model;
        EffectiveModel m;
        m.n_body = params.n_body;
        m.n_atoms = params.n_atoms;
        const double chi = params.chi_collective /
                           std::pow(static_cast<double>(params.n_atoms), params.n_body - 1);
        const std::string up = (params.n_body == 4) ? "Jp4" : "Jp3";
        const std::string dn = (params.n_body == 4) ? "Jm4" : "Jm3";
        m.coefficients[up] = chi;
        m.coefficients[dn] = chi;
        return m;
    }

    void window(const InteractionWindow& w) {
        if (w.contrast != 1.0)
            throw std::invalid_argument("run_sequence: contrast < 1 is a mean-field-only model");
        if (w.duration <= 0) return;
        const double phi_d = w.phi_d.value_or(params.phi_d);
        const double delta = w.delta.value_or(params.delta);
        if (params.engine == Engine::FullCavity) {
            FullCavityProblem prob;
            prob.model = *params.ladder;
            prob.model.nu2 = params.ladder->nu1 + params.n_body * params.ladder->omega_z + delta;
            prob.fock_cutoff = params.fock_cutoff;
            prob.initial_spin = st;
            prob.sample_times = {0.0, w.duration};
            auto traj = evolve_full_cavity(prob);
            st = traj.final_state;
            return;
        }
        EffectiveModel m = effective_model();
        Matrix h = m.hamiltonian(space, phi_d);
        h -= (delta / params.n_body) * jz;
        LindbladProblem prob;
        prob.initial = st;
        prob.sample_times = {0.0, w.duration};
        if (params.include_jumps) {
            if (params.model) {
                prob.jumps = m.jump_operators(space, false);
            } else if (params.gamma > 0) {
                prob.jumps.emplace_back(params.gamma, spin_matrix(space, SpinOp::JPlus));
                prob.jumps.emplace_back(params.gamma, spin_matrix(space, SpinOp::JMinus));
            }
        }
        prob.hamiltonian = h;
        st = evolve_lindblad(prob).final_state;
    }

    void wait(const Wait& w) {
        if (w.z_rate == 0.0 || w.duration == 0.0) return;
        apply_unitary(expm_i_hermitian(lift(jz), w.z_rate * w.duration));
    }

    std::array<double, 3> bloch() const {
        const double j0 = 0.5 * params.n_atoms;
        return {expectation(st, lift(jx)).real() / j0, expectation(st, lift(jy)).real() / j0,
                expectation(st, lift(jz)).real() / j0};
    }

    std::vector<double> rung_populations() const {
        std::vector<double> pops(space.dimension, 0.0);
        const int fd = st.fock_dim;
        if (st.is_pure()) {
            for (int s = 0; s < space.dimension; ++s)
                for (int f = 0; f < fd; ++f) pops[s] += std::norm(st.vec(s * fd + f));
        } else {
            for (int s = 0; s < space.dimension; ++s)
                for (int f = 0; f < fd; ++f) pops[s] += st.rho(s * fd + f, s * fd + f).real();
        }
        return pops;
    }
};

}  // namespace

SequenceOutcome run_sequence(const PulseSequence& seq, const SequenceParams& params,
                             std::optional<MeanFieldState> initial_meanfield,
                             const QuantumState* initial_exact) {
    seq.validate();
    if (params.n_atoms < 1) throw std::invalid_argument("run_sequence: n_atoms must be >= 1");
    SequenceOutcome out;

    if (params.engine == Engine::MeanField) {
        MeanFieldRunner r{params, initial_meanfield.value_or(MeanFieldState{0, 0, -1.0}), {}};
        ReadoutBasis basis = ReadoutBasis::Jz;
        for (const auto& step : seq.steps) {
            if (const auto* p = std::get_if<BraggPulse>(&step)) r.pulse(*p);
            else if (const auto* w = std::get_if<InteractionWindow>(&step)) r.window(*w);
            else if (const auto* wt = std::get_if<Wait>(&step)) r.wait(*wt);
            else basis = std::get<ReadoutMap>(step).basis;
            r.trace.push_back({r.s.jx, r.s.jy, r.s.jz});
        }
        if (basis != ReadoutBasis::Jz) r.pulse(mapping_pulse(basis));
        double value = r.s.jz;
        if (params.projection_noise) {
            std::mt19937_64 rng(params.seed);
            const double p_up = std::clamp(0.5 * (1.0 + value), 0.0, 1.0);
            std::binomial_distribution<int> bin(params.n_atoms, p_up);
            value = 2.0 * bin(rng) / params.n_atoms - 1.0;
        }
        out.readout = value;
        out.bloch_trace = std::move(r.trace);
        return out;
    }

    ExactRunner r(params, initial_exact);
    ReadoutBasis basis = ReadoutBasis::Jz;
    for (const auto& step : seq.steps) {
        if (const auto* p = std::get_if<BraggPulse>(&step)) r.pulse(*p);
        else if (const auto* w = std::get_if<InteractionWindow>(&step)) r.window(*w);
        else if (const auto* wt = std::get_if<Wait>(&step)) r.wait(*wt);
        else basis = std::get<ReadoutMap>(step).basis;
        r.trace.push_back(r.bloch());
    }
    if (basis != ReadoutBasis::Jz) r.pulse(mapping_pulse(basis));
    out.populations = r.rung_populations();
    double value = r.bloch()[2];
    if (params.projection_noise) {
        std::mt19937_64 rng(params.seed);
        std::discrete_distribution<int> dist(out.populations.begin(), out.populations.end());
        const double m = r.space.m_values[dist(rng)];
        value = m / (0.5 * params.n_atoms);
    }
    out.readout = value;
    out.bloch_trace = std::move(r.trace);
    return out;
}

FringeFit fit_fringe(const std::vector<double>& angles, const std::vector<double>& results,
                     int harmonic) {
    if (angles.size() != results.size() || harmonic < 1)
        throw std::invalid_argument("fit_fringe: malformed input");
    const size_t m = angles.size();
    if (m < static_cast<size_t>(12 * harmonic))
        throw std::invalid_argument("fit_fringe: need at least 12 scan points per cycle");
    Eigen::MatrixXd x(m, 3);
    Eigen::VectorXd y(m);
    for (size_t i = 0; i < m; ++i) {
        x(i, 0) = std::sin(harmonic * angles[i]);
        x(i, 1) = std::cos(harmonic * angles[i]);
        x(i, 2) = 1.0;
    }
    for (size_t i = 0; i < m; ++i) y(i) = results[i];
    const Eigen::Matrix3d xtx = x.transpose() * x;
    if (xtx.fullPivLu().rank() < 3) throw std::invalid_argument("fit_fringe: underdetermined fit");
    const Eigen::Vector3d c = xtx.ldlt().solve(x.transpose() * y);
    const double a = c(0), b = c(1);
    FringeFit fit;
    fit.harmonic = harmonic;
    fit.amplitude = std::hypot(a, b);
    fit.phase = std::atan2(b, a);
    fit.offset = c(2);
    const double dof = static_cast<double>(m) - 3.0;
    const double ssr = (y - x * c).squaredNorm();
    const double sigma2 = (dof > 0) ? ssr / dof : 0.0;
    const Eigen::Matrix3d cov = sigma2 * xtx.inverse();
    if (fit.amplitude > 0) {
        const double var = (a * a * cov(0, 0) + b * b * cov(1, 1) + 2 * a * b * cov(0, 1)) /
                           (fit.amplitude * fit.amplitude);
        fit.sigma_amplitude = std::sqrt(std::max(var, 0.0));
    }
    return fit;
}

namespace {

void apply_scan_value(PulseSequence& seq, ScanVariable var, double value) {
    bool first_pulse = true;
    for (auto& step : seq.steps) {
        if (var == ScanVariable::BraggPhase) {
            if (auto* p = std::get_if<BraggPulse>(&step); p && first_pulse) {
                p->axis_phase = value;
                first_pulse = false;
            }
        } else if (auto* w = std::get_if<InteractionWindow>(&step)) {
            if (var == ScanVariable::Delta) w->delta = value;
            else w->phi_d = value;
        }
    }
}

std::vector<double> run_scan(const PulseSequence& templ, ScanVariable var,
                             const std::vector<double>& values, const SequenceParams& params,
                             int n_workers) {
    std::vector<double> results(values.size());
    if (n_workers <= 0)
        n_workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    n_workers = std::min<int>(n_workers, static_cast<int>(values.size()));
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t i = next.fetch_add(1); i < values.size(); i = next.fetch_add(1)) {
            PulseSequence seq = templ;
            apply_scan_value(seq, var, values[i]);
            results[i] = run_sequence(seq, params).readout;
        }
    };
    if (n_workers <= 1) {
        worker();
    } else {
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return results;
}

}  // namespace

FringeScan fringe_scan(const PulseSequence& templ, ScanVariable variable,
                       const std::vector<double>& values, const SequenceParams& params,
                       int harmonic, int n_workers) {
    templ.validate();
    FringeScan scan;
    scan.variable = variable;
    scan.values = values;
    scan.results = run_scan(templ, variable, values, params, n_workers);
    if (variable != ScanVariable::Delta) scan.fit = fit_fringe(values, scan.results, harmonic);
    return scan;
}

PulseSequence equator_fringe_sequence(double interaction_time) {
    PulseSequence seq;
    seq.steps.push_back(BraggPulse{0.5 * kPi, 0.0, 0.0});
    seq.steps.push_back(InteractionWindow{interaction_time, std::nullopt, std::nullopt, 1.0});
    seq.steps.push_back(ReadoutMap{ReadoutBasis::Jz});
    return seq;
}

ResonanceScan resonance_scan(const std::vector<double>& delta_values, double interaction_time,
                             const SequenceParams& params, int n_phi, int n_workers) {
    if (delta_values.size() < 5) throw std::invalid_argument("resonance_scan: grid too small");
    const double need = 3.0 / interaction_time;
    const double lo = *std::min_element(delta_values.begin(), delta_values.end());
    const double hi = *std::max_element(delta_values.begin(), delta_values.end());
    if (lo > -need || hi < need)
        throw std::invalid_argument("resonance_scan: delta grid must span at least +-3/T");

    const PulseSequence templ = equator_fringe_sequence(interaction_time);
    std::vector<double> phis(n_phi);
    for (int i = 0; i < n_phi; ++i) phis[i] = i * kTwoPi / n_phi;

    ResonanceScan out;
    out.delta_values = delta_values;
    out.amplitudes.resize(delta_values.size());
    for (size_t i = 0; i < delta_values.size(); ++i) {
        SequenceParams p = params;
        p.delta = delta_values[i];
        const auto scan = fringe_scan(templ, ScanVariable::BraggPhase, phis, p,
                                      (params.n_body == 4) ? 4 : 3, n_workers);
        out.amplitudes[i] = scan.fit.amplitude;
    }
    // FWHM of the central lobe by linear interpolation
    const size_t ipk = static_cast<size_t>(
        std::max_element(out.amplitudes.begin(), out.amplitudes.end()) - out.amplitudes.begin());
    const double half = 0.5 * out.amplitudes[ipk];
    auto cross = [&](int dir) -> double {
        size_t i = ipk;
        while (true) {
            const size_t nx = i + dir;
            if (nx >= out.amplitudes.size())
                throw std::runtime_error("resonance_scan: half-maximum not bracketed by the grid");
            if (out.amplitudes[nx] <= half) {
                const double x0 = out.delta_values[i], x1 = out.delta_values[nx];
                const double y0 = out.amplitudes[i], y1 = out.amplitudes[nx];
                return x0 + (half - y0) * (x1 - x0) / (y1 - y0);
            }
            i = nx;
        }
    };
    const double right = cross(+1);
    const double left = cross(-1);
    out.fwhm = right - left;
    return out;
}

std::vector<double> power_spectrum(const FringeScan& scan) {
    const size_t m = scan.values.size();
    if (m < 4 || scan.results.size() != m)
        throw std::invalid_argument("power_spectrum: malformed scan");
    const double step = kTwoPi / static_cast<double>(m);
    for (size_t k = 0; k < m; ++k)
        if (std::abs(scan.values[k] - (scan.values[0] + k * step)) > 1e-9)
            throw std::invalid_argument("power_spectrum: scan grid must be uniform over [0, 2 pi)");
    const size_t nh = m / 2 + 1;
    std::vector<double> power(nh, 0.0);
    for (size_t h = 0; h < nh; ++h) {
        Complex acc = 0;
        for (size_t k = 0; k < m; ++k)
            acc += scan.results[k] * std::exp(Complex(0, -static_cast<double>(h) * k * step));
        const double p = std::norm(acc) / (static_cast<double>(m) * m);
        const bool edge = (h == 0) || (2 * h == m);
        power[h] = edge ? p : 2.0 * p;
    }
    return power;
}

}  // namespace cavnb
