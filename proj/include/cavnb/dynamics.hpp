#pragma once

#include <functional>
#include <vector>

#include "cavnb/dicke.hpp"
#include "cavnb/effective.hpp"

namespace cavnb {

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<Complex>> observables;  ///< [sample][observable]
    std::vector<double> norms;                      ///< trace (density) or ||psi||^2
    QuantumState final_state;
    size_t steps = 0;
    double max_fock_population = 0;  ///< top Fock level, full-cavity runs only
    double max_photon_number = 0;    ///< max <b^dag b>, full-cavity runs only
};

struct LindbladProblem {
    Matrix hamiltonian;
    std::vector<std::pair<double, Matrix>> jumps;  ///< (rate, operator); L = sqrt(rate) op
    QuantumState initial;
    std::vector<double> sample_times;  ///< ascending, first = t0
    std::vector<Matrix> observables;
    double rel_tol = 1e-7;
    double abs_tol = 1e-9;
};

/// Master-equation integration; pure-state fast path when there are no jumps.
/// Postconditions: trace within 1e-7, min eigenvalue >= -1e-6.
Trajectory evolve_lindblad(const LindbladProblem& problem);

struct FullCavityProblem {
    LadderModel model;
    int fock_cutoff = 5;  ///< n_max; Fock dimension is n_max + 1
    QuantumState initial_spin;  ///< spin part; photon mode starts in vacuum
    std::vector<double> sample_times;
    std::vector<Matrix> spin_observables;
    bool force_density = false;  ///< density evolution even at kappa = 0
    double rel_tol = 1e-7;
    double abs_tol = 1e-9;
    double max_fock_population = 1e-4;
};

/// Time-dependent atom-cavity evolution in the interaction picture,
/// explicit e^{i f_i t} tone phases, cavity jump sqrt(kappa) b.
/// Throws when the top Fock level exceeds max_fock_population.
Trajectory evolve_full_cavity(const FullCavityProblem& problem);

struct MeanFieldState {
    double jx = 0, jy = 0, jz = 0;  ///< components of J/(N/2)

    static MeanFieldState from_angles(double theta, double phi);
    double theta() const;
    double phi() const;
    double norm() const;
    Complex jplus() const { return {jx, jy}; }
};

struct MeanFieldParams {
    int n_body = 3;
    double chi_collective = 0;  ///< chi_n N^{n-1}, rad/s, signed
    double phi_d = 0;
    double gamma = 0;  ///< collective decay rate per channel
    double delta = 0;  ///< beat detuning; enters as -(delta/n) Jz in the drive frame
};

/// d/dt of (J+, Jz)/(N/2) per the collective equations of motion.
std::pair<Complex, double> meanfield_derivatives(const MeanFieldState& s, const MeanFieldParams& p);
std::pair<Complex, double> meanfield_derivatives(const MeanFieldState& s, double chi_n, int n_atoms,
                                                 int n_body, double phi_d, double gamma,
                                                 double delta = 0);

/// Closed-form polar/azimuthal rates (Gamma = 0):
/// n=3: dtheta/dt = -(3/2) X sin^2(theta) sin(3 psi), dphi/dt = -(3/4) X sin(2 theta) cos(3 psi)
/// n=4: dtheta/dt = -X sin^3(theta) sin(4 psi),       dphi/dt = -X cos(theta) sin^2(theta) cos(4 psi)
/// with psi = phi + phi_d and X = chi_collective.
std::pair<double, double> meanfield_angular_rates(double theta, double phi,
                                                  const MeanFieldParams& p);

std::vector<MeanFieldState> evolve_meanfield(const MeanFieldState& initial,
                                             const MeanFieldParams& params,
                                             const std::vector<double>& sample_times,
                                             double rel_tol = 1e-9);

/// Side-by-side run of the full time-dependent atom-cavity model and the
/// effective model: population transfer out of the bottom Dicke rung into the
/// rung n above it, over one transfer cycle, with the drive placed on the
/// dressed (light-shift-compensated) resonance predicted by the effective
/// model. The detuned run adds 20/T_cycle to the beat frequency.
struct EffectiveFullComparison {
    double max_abs_error = 0;      ///< max |P_full - P_eff| over the cycle
    double rel_error = 0;          ///< relative to the peak transfer
    double transfer_peak_full = 0;
    double detuned_peak_full = 0;
    double suppression = 0;        ///< resonant peak / detuned peak
    double max_fock_population = 0;
    double max_intermediate_population = 0;  ///< photon-number-weighted population
    double cycle_time = 0;         ///< s
    double dressed_shift = 0;      ///< rad/s added to the beat to hit resonance
};

EffectiveFullComparison compare_effective_vs_full(const LadderModel& model, int fock_cutoff,
                                                  int n_samples = 48, bool run_detuned = true);

namespace detail {

using OdeState = std::vector<Complex>;
using OdeRhs = std::function<void(const OdeState&, OdeState&, double)>;

struct OdeOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    size_t max_steps = 200000000;
};

/// Adaptive Dormand-Prince integration with an observer at the sample times.
/// Throws std::runtime_error on step-size collapse (stiffness) or step budget.
size_t integrate_sampled(const OdeRhs& rhs, OdeState& y, const std::vector<double>& times,
                         const OdeOptions& opts,
                         const std::function<void(const OdeState&, double)>& observer);

}  // namespace detail

}  // namespace cavnb
