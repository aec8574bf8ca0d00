#include "cavnb/dynamics.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cavnb {

namespace detail {

namespace odeint = boost::numeric::odeint;

size_t integrate_sampled(const OdeRhs& rhs, OdeState& y, const std::vector<double>& times,
                         const OdeOptions& opts,
                         const std::function<void(const OdeState&, double)>& observer) {
    if (times.size() < 1) throw std::invalid_argument("integrate_sampled: empty time grid");
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<OdeState>>(opts.abs_tol,
                                                                                 opts.rel_tol);
    double t = times.front();
    const double span = std::max(times.back() - times.front(), 1e-300);
    const double min_dt = span * 1e-14;
    double dt = span * 1e-3;
    size_t steps = 0;
    if (observer) observer(y, t);
    for (size_t i = 1; i < times.size(); ++i) {
        const double target = times[i];
        while (t < target) {
            dt = std::min(dt, target - t);
            const auto result = stepper.try_step(rhs, y, t, dt);
            if (result == odeint::fail) {
                if (dt < min_dt)
                    throw std::runtime_error("integrate_sampled: step size collapse (stiff problem)");
                continue;
            }
            if (++steps > opts.max_steps)
                throw std::runtime_error("integrate_sampled: step budget exhausted");
        }
        if (observer) observer(y, target);
        t = target;
    }
    return steps;
}

}  // namespace detail

namespace {

using detail::OdeState;

Eigen::Map<const Vector> as_vec(const OdeState& s) {
    return Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
}

Eigen::Map<Vector> as_vec(OdeState& s) {
    return Eigen::Map<Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
}

Eigen::Map<const Matrix> as_mat(const OdeState& s, int d) {
    return Eigen::Map<const Matrix>(s.data(), d, d);
}

Eigen::Map<Matrix> as_mat(OdeState& s, int d) {
    return Eigen::Map<Matrix>(s.data(), d, d);
}

OdeState to_state(const Vector& v) { return OdeState(v.data(), v.data() + v.size()); }
OdeState to_state(const Matrix& m) { return OdeState(m.data(), m.data() + m.size()); }

void check_sample_times(const std::vector<double>& t) {
    if (t.size() < 2) throw std::invalid_argument("sample_times must contain at least t0 and t1");
    for (size_t i = 1; i < t.size(); ++i)
        if (t[i] < t[i - 1]) throw std::invalid_argument("sample_times must be ascending");
}

}  // namespace

Trajectory evolve_lindblad(const LindbladProblem& problem) {
    check_sample_times(problem.sample_times);
    for (const auto& [rate, op] : problem.jumps) {
        if (rate < 0) throw std::invalid_argument("evolve_lindblad: negative jump rate");
        if (op.rows() != problem.initial.dim())
            throw std::invalid_argument("evolve_lindblad: jump dimension mismatch");
    }
    const int d = problem.initial.dim();
    if (problem.hamiltonian.rows() != d)
        throw std::invalid_argument("evolve_lindblad: Hamiltonian dimension mismatch");

    const bool pure_path = problem.jumps.empty() && problem.initial.is_pure();
    Trajectory traj;
    traj.times = problem.sample_times;

    detail::OdeOptions opts;
    opts.rel_tol = problem.rel_tol;
    opts.abs_tol = problem.abs_tol;

    if (pure_path) {
        const Matrix& h = problem.hamiltonian;
        auto rhs = [&](const OdeState& y, OdeState& dy, double) {
            dy.resize(y.size());
            as_vec(dy) = Complex(0, -1) * (h * as_vec(y));
        };
        OdeState y = to_state(problem.initial.vec);
        auto observer = [&](const OdeState& s, double) {
            auto psi = as_vec(s);
            std::vector<Complex> row;
            row.reserve(problem.observables.size());
            for (const auto& op : problem.observables) row.push_back(psi.dot(op * psi));
            traj.observables.push_back(std::move(row));
            traj.norms.push_back(psi.squaredNorm());
        };
        traj.steps = detail::integrate_sampled(rhs, y, problem.sample_times, opts, observer);
        traj.final_state = problem.initial;
        traj.final_state.vec = as_vec(y);
        if (std::abs(traj.norms.back() - 1.0) > 1e-7)
            throw std::runtime_error("evolve_lindblad: norm drifted beyond 1e-7");
        return traj;
    }

    // density path
    QuantumState rho0 = problem.initial.to_density();
    std::vector<Matrix> ls, ldl;  // sqrt(rate) L and L^dag L
    for (const auto& [rate, op] : problem.jumps) {
        Matrix l = std::sqrt(rate) * op;
        ldl.push_back(l.adjoint() * l);
        ls.push_back(std::move(l));
    }
    const Matrix& h = problem.hamiltonian;
    auto rhs = [&](const OdeState& y, OdeState& dy, double) {
        dy.resize(y.size());
        auto rho = as_mat(y, d);
        Matrix out = Complex(0, -1) * (h * rho - rho * h);
        for (size_t k = 0; k < ls.size(); ++k)
            out += ls[k] * rho * ls[k].adjoint() - 0.5 * (ldl[k] * rho + rho * ldl[k]);
        as_mat(dy, d) = out;
    };
    OdeState y = to_state(rho0.rho);
    auto observer = [&](const OdeState& s, double) {
        auto rho = as_mat(s, d);
        std::vector<Complex> row;
        row.reserve(problem.observables.size());
        for (const auto& op : problem.observables) row.push_back((op * rho).trace());
        traj.observables.push_back(std::move(row));
        traj.norms.push_back(rho.trace().real());
    };
    traj.steps = detail::integrate_sampled(rhs, y, problem.sample_times, opts, observer);
    traj.final_state = rho0;
    traj.final_state.rho = as_mat(y, d);
    if (std::abs(traj.norms.back() - 1.0) > 1e-7)
        throw std::runtime_error("evolve_lindblad: trace drifted beyond 1e-7");
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(
            Matrix(0.5 * (traj.final_state.rho + traj.final_state.rho.adjoint())),
            Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-6)
            throw std::runtime_error("evolve_lindblad: positivity violated beyond 1e-6");
    }
    return traj;
}

Trajectory evolve_full_cavity(const FullCavityProblem& problem) {
    check_sample_times(problem.sample_times);
    problem.model.validate();
    const DickeSpace space(problem.model.n_atoms);
    const int fd = problem.fock_cutoff + 1;
    const int d = space.dimension * fd;
    if (!problem.initial_spin.is_pure())
        throw std::invalid_argument("evolve_full_cavity: initial state must be pure");
    if (problem.initial_spin.space.dimension != space.dimension)
        throw std::invalid_argument("evolve_full_cavity: spin dimension mismatch");
    if (problem.initial_spin.fock_dim != 1 && problem.initial_spin.fock_dim != fd)
        throw std::invalid_argument("evolve_full_cavity: Fock dimension mismatch");

    const auto terms = tone_decomposition(problem.model, space, fd);
    std::vector<Matrix> hdag, h;
    for (const auto& t : terms) {
        hdag.push_back(t.h_dag);
        h.push_back(t.h_dag.adjoint());
    }
    std::vector<Matrix> obs;
    const Matrix ifock = Matrix::Identity(fd, fd);
    for (const auto& op : problem.spin_observables) obs.push_back(kron(op, ifock));

    auto assemble = [&](double t) {
        Matrix ht = Matrix::Zero(d, d);
        for (size_t i = 0; i < hdag.size(); ++i) {
            const Complex phase = std::exp(Complex(0, terms[i].freq * t));
            ht += phase * hdag[i] + std::conj(phase) * h[i];
        }
        return ht;
    };

    // top Fock level and mean photon number for the cutoff-leakage monitor
    auto top_population_pure = [&](const Vector& psi) {
        double p = 0;
        for (int s = 0; s < space.dimension; ++s) p += std::norm(psi(s * fd + fd - 1));
        return p;
    };
    auto top_population_rho = [&](const Eigen::Map<const Matrix>& rho) {
        double p = 0;
        for (int s = 0; s < space.dimension; ++s) {
            const int i = s * fd + fd - 1;
            p += rho(i, i).real();
        }
        return p;
    };
    auto photon_number_pure = [&](const Vector& psi) {
        double p = 0;
        for (int s = 0; s < space.dimension; ++s)
            for (int f = 1; f < fd; ++f) p += f * std::norm(psi(s * fd + f));
        return p;
    };
    auto photon_number_rho = [&](const Eigen::Map<const Matrix>& rho) {
        double p = 0;
        for (int s = 0; s < space.dimension; ++s)
            for (int f = 1; f < fd; ++f) p += f * rho(s * fd + f, s * fd + f).real();
        return p;
    };

    Trajectory traj;
    traj.times = problem.sample_times;
    detail::OdeOptions opts;
    opts.rel_tol = problem.rel_tol;
    opts.abs_tol = problem.abs_tol;

    Vector psi0 = Vector::Zero(d);
    if (problem.initial_spin.fock_dim == fd) {
        psi0 = problem.initial_spin.vec;
    } else {
        for (int s = 0; s < space.dimension; ++s) psi0(s * fd) = problem.initial_spin.vec(s);
    }

    const bool density = problem.force_density || problem.model.kappa > 0;
    double max_top = 0;
    auto fail_cutoff = [&]() {
        std::ostringstream os;
        os << "evolve_full_cavity: top Fock level population " << max_top << " exceeds "
           << problem.max_fock_population << "; increase fock_cutoff above "
           << problem.fock_cutoff;
        throw std::runtime_error(os.str());
    };

    if (!density) {
        auto rhs = [&](const OdeState& y, OdeState& dy, double t) {
            dy.resize(y.size());
            as_vec(dy) = Complex(0, -1) * (assemble(t) * as_vec(y));
        };
        OdeState y = to_state(psi0);
        auto observer = [&](const OdeState& s, double) {
            auto psi = as_vec(s);
            std::vector<Complex> row;
            for (const auto& op : obs) row.push_back(psi.dot(op * psi));
            traj.observables.push_back(std::move(row));
            traj.norms.push_back(psi.squaredNorm());
            max_top = std::max(max_top, top_population_pure(psi));
            traj.max_photon_number = std::max(traj.max_photon_number, photon_number_pure(psi));
            if (max_top > problem.max_fock_population) fail_cutoff();
        };
        traj.steps = detail::integrate_sampled(rhs, y, problem.sample_times, opts, observer);
        traj.final_state = pure_state(space, Vector(as_vec(y)));
        traj.final_state.fock_dim = fd;
    } else {
        const Matrix b = kron(Matrix::Identity(space.dimension, space.dimension),
                              fock_annihilation(fd));
        const Matrix bdb = b.adjoint() * b;
        const double kappa = problem.model.kappa;
        auto rhs = [&](const OdeState& y, OdeState& dy, double t) {
            dy.resize(y.size());
            auto rho = as_mat(y, d);
            const Matrix ht = assemble(t);
            Matrix out = Complex(0, -1) * (ht * rho - rho * ht);
            out += kappa * (b * rho * b.adjoint()) - 0.5 * kappa * (bdb * rho + rho * bdb);
            as_mat(dy, d) = out;
        };
        Matrix rho0 = psi0 * psi0.adjoint();
        OdeState y = to_state(rho0);
        auto observer = [&](const OdeState& s, double) {
            auto rho = as_mat(s, d);
            std::vector<Complex> row;
            for (const auto& op : obs) row.push_back((op * rho).trace());
            traj.observables.push_back(std::move(row));
            traj.norms.push_back(rho.trace().real());
            max_top = std::max(max_top, top_population_rho(rho));
            traj.max_photon_number = std::max(traj.max_photon_number, photon_number_rho(rho));
            if (max_top > problem.max_fock_population) fail_cutoff();
        };
        traj.steps = detail::integrate_sampled(rhs, y, problem.sample_times, opts, observer);
        traj.final_state.representation = QuantumState::Rep::Density;
        traj.final_state.space = space;
        traj.final_state.fock_dim = fd;
        traj.final_state.rho = as_mat(y, d);
    }
    traj.max_fock_population = max_top;
    return traj;
}

MeanFieldState MeanFieldState::from_angles(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

double MeanFieldState::theta() const {
    const double r = norm();
    return (r == 0) ? 0.0 : std::acos(std::clamp(jz / r, -1.0, 1.0));
}

double MeanFieldState::phi() const { return std::atan2(jy, jx); }

double MeanFieldState::norm() const { return std::sqrt(jx * jx + jy * jy + jz * jz); }

std::pair<Complex, double> meanfield_derivatives(const MeanFieldState& s,
                                                 const MeanFieldParams& p) {
    const Complex jp = s.jplus();
    const Complex jm = std::conj(jp);
    const Complex i(0, 1);
    const Complex up_phase = std::exp(Complex(0, p.n_body * p.phi_d));
    const double X = p.chi_collective;
    Complex djp;
    Complex djz_c;
    if (p.n_body == 3) {
        djp = -i * 1.5 * X * s.jz * jm * jm * std::conj(up_phase);
        djz_c = -i * 0.75 * X * (jp * jp * jp * up_phase - jm * jm * jm * std::conj(up_phase));
    } else if (p.n_body == 4) {
        djp = -i * X * s.jz * jm * jm * jm * std::conj(up_phase);
        djz_c = -i * 0.5 * X * (jp * jp * jp * jp * up_phase - jm * jm * jm * jm * std::conj(up_phase));
    } else {
        throw std::invalid_argument("meanfield_derivatives: n_body must be 3 or 4");
    }
    djp += -i * (p.delta / p.n_body) * jp;
    djp += -p.gamma * jp;
    double djz = djz_c.real() - 2.0 * p.gamma * s.jz;
    return {djp, djz};
}

std::pair<Complex, double> meanfield_derivatives(const MeanFieldState& s, double chi_n, int n_atoms,
                                                 int n_body, double phi_d, double gamma,
                                                 double delta) {
    MeanFieldParams p;
    p.n_body = n_body;
    p.chi_collective = chi_n * std::pow(static_cast<double>(n_atoms), n_body - 1);
    p.phi_d = phi_d;
    p.gamma = gamma;
    p.delta = delta;
    return meanfield_derivatives(s, p);
}

std::pair<double, double> meanfield_angular_rates(double theta, double phi,
                                                  const MeanFieldParams& p) {
    const double X = p.chi_collective;
    const double psi = phi + p.phi_d;
    const double st = std::sin(theta);
    if (p.n_body == 3)
        return {-1.5 * X * st * st * std::sin(3 * psi),
                -0.75 * X * std::sin(2 * theta) * std::cos(3 * psi)};
    if (p.n_body == 4)
        return {-X * st * st * st * std::sin(4 * psi),
                -X * std::cos(theta) * st * st * std::cos(4 * psi)};
    throw std::invalid_argument("meanfield_angular_rates: n_body must be 3 or 4");
}

EffectiveFullComparison compare_effective_vs_full(const LadderModel& model, int fock_cutoff,
                                                  int n_samples, bool run_detuned) {
    model.validate();
    const int n = model.n_body;
    const DickeSpace space(model.n_atoms);
    const double j = space.spin();

    auto build = [&](const LadderModel& m) {
        return (n == 4) ? effective_model_fourth_order_4body(m) : effective_model_second_order(m);
    };

    // place the beat on the dressed resonance of the bottom pair
    EffectiveModel eff0 = build(model);
    const double shift = eff0.transition_detuning(space, -j);
    LadderModel tuned = model;
    tuned.nu2 += shift;
    EffectiveModel eff = build(tuned);

    // transfer cycle from the bottom-pair matrix element
    double fprod = 1;
    for (int q = 0; q < n; ++q) fprod *= ladder_coefficient_safe(model.n_atoms, -j + q);
    const double rabi = 2.0 * std::abs(eff.coefficient((n == 4) ? "Jp4" : "Jp3")) * fprod;
    if (rabi <= 0) throw std::runtime_error("compare_effective_vs_full: vanishing transfer rate");
    const double cycle = kTwoPi / rabi;

    std::vector<double> times(n_samples + 1);
    for (int i = 0; i <= n_samples; ++i) times[i] = cycle * i / n_samples;

    const int target = space.index_of(-j + n);
    Matrix proj = Matrix::Zero(space.dimension, space.dimension);
    proj(target, target) = 1.0;

    auto run_full = [&](const LadderModel& m) {
        FullCavityProblem prob;
        prob.model = m;
        prob.fock_cutoff = fock_cutoff;
        prob.initial_spin = dicke_state(space, -j);
        prob.sample_times = times;
        prob.spin_observables = {proj};
        return evolve_full_cavity(prob);
    };

    const Trajectory full = run_full(tuned);

    LindbladProblem lp;
    lp.hamiltonian = eff.hamiltonian(space);
    lp.initial = dicke_state(space, -j);
    lp.sample_times = times;
    lp.observables = {proj};
    lp.rel_tol = 1e-10;
    lp.abs_tol = 1e-12;
    const Trajectory effective = evolve_lindblad(lp);

    EffectiveFullComparison out;
    out.cycle_time = cycle;
    out.dressed_shift = shift;
    out.max_fock_population = full.max_fock_population;
    double peak_eff = 0;
    for (size_t i = 0; i < times.size(); ++i) {
        const double pf = full.observables[i][0].real();
        const double pe = effective.observables[i][0].real();
        out.max_abs_error = std::max(out.max_abs_error, std::abs(pf - pe));
        out.transfer_peak_full = std::max(out.transfer_peak_full, pf);
        peak_eff = std::max(peak_eff, pe);
    }
    out.rel_error = out.max_abs_error / std::max(peak_eff, 1e-300);
    out.max_intermediate_population = full.max_photon_number;

    if (run_detuned) {
        LadderModel detuned = tuned;
        detuned.nu2 += 20.0 / cycle;
        const Trajectory full_det = run_full(detuned);
        for (size_t i = 0; i < times.size(); ++i)
            out.detuned_peak_full =
                std::max(out.detuned_peak_full, full_det.observables[i][0].real());
        out.suppression = out.transfer_peak_full / std::max(out.detuned_peak_full, 1e-300);
    }
    return out;
}

std::vector<MeanFieldState> evolve_meanfield(const MeanFieldState& initial,
                                             const MeanFieldParams& params,
                                             const std::vector<double>& sample_times,
                                             double rel_tol) {
    check_sample_times(sample_times);
    auto rhs = [&](const OdeState& y, OdeState& dy, double) {
        dy.resize(2);
        MeanFieldState s{y[0].real(), y[0].imag(), y[1].real()};
        auto [djp, djz] = meanfield_derivatives(s, params);
        dy[0] = djp;
        dy[1] = djz;
    };
    OdeState y = {initial.jplus(), Complex(initial.jz, 0)};
    detail::OdeOptions opts;
    opts.rel_tol = rel_tol;
    opts.abs_tol = rel_tol * 1e-2;
    std::vector<MeanFieldState> out;
    auto observer = [&](const OdeState& s, double) {
        out.push_back({s[0].real(), s[0].imag(), s[1].real()});
    };
    detail::integrate_sampled(rhs, y, sample_times, opts, observer);
    return out;
}

}  // namespace cavnb
