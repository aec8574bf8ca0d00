#pragma once

#include <map>
#include <string>
#include <vector>

#include "cavnb/dicke.hpp"
#include "cavnb/params.hpp"

namespace cavnb {

/// Driven atom-cavity ladder: two classical tones beating at n omega_z + delta,
/// ground manifold |m,0> and intermediate manifold |m',1> (one cavity
/// fluctuation photon), chain of n-1 intermediates per n-body process.
struct LadderModel {
    int n_body = 3;  ///< 2, 3 or 4
    int n_atoms = 0;
    double G = 0;        ///< g0^2/(4 delta_a), rad/s
    double omega_z = 0;  ///< rad/s
    double kappa = 0;    ///< rad/s
    Complex alpha1, alpha2;
    double nu1 = 0, nu2 = 0;  ///< tone offsets from the shifted cavity resonance

    double delta() const { return (nu2 - nu1) - n_body * omega_z; }
    double delta_c1() const { return nu1 + omega_z; }
    double delta_c2() const { return nu2 - omega_z; }

    /// Checks the resonance geometry |omega2-omega1 - n omega_z| << omega_z.
    void validate() const;
    static LadderModel from_params(const PhysicalParams& p, int n_body);
};

struct JumpChannel {
    std::string label;
    double rate = 0;       ///< rad/s; jump operator is sqrt(rate) * monomial
    int delta_m = 0;       ///< +1 for J+, -1 for J-, +2 for J+^2, ...
    double frame_freq = 0; ///< rotating-frame oscillation frequency (bookkeeping)
    bool negligible = false;  ///< higher-order channel, excluded from default dynamics
};

/// Time-independent effective model in the frame co-rotating at (omega2-omega1)/n
/// per spin flip. Coefficient keys: "Jp3"/"Jm3" (or "Jp2", "Jp4"/"Jm4"), "JpJm",
/// "JmJp", "Jz", and for n=4 additionally "Jp2Jm2"/"Jm2Jp2".
struct EffectiveModel {
    int n_body = 3;
    int n_atoms = 0;
    std::map<std::string, Complex> coefficients;
    std::vector<JumpChannel> jumps;
    double fit_residual = 0;
    bool polynomial = true;
    std::vector<std::string> warnings;

    Complex coefficient(const std::string& key) const;
    /// Assembles the Hamiltonian matrix; extra_phase adds exp(i n phi_d) on the
    /// raising monomial (and its conjugate on the lowering one).
    Matrix hamiltonian(const DickeSpace& space, double phi_d = 0.0) const;
    std::vector<std::pair<double, Matrix>> jump_operators(const DickeSpace& space,
                                                          bool include_negligible = false) const;
    /// Static level shift of |m+n><m| transitions from the diagonal part
    /// (exchange residual + Jz terms); used to locate the dressed resonance.
    double transition_detuning(const DickeSpace& space, double m) const;
};

/// Monomial matrix for a coefficient key ("Jp3", "JpJm", "Jz", ...).
Matrix monomial_matrix(const DickeSpace& space, const std::string& key);

/// The four non-Hermitian intermediate-manifold Hamiltonians H_NH^(f,l) at rung
/// m_z, one per (drive tone f, ground level l in {g0 = |m_z,0>, g1 = |m_z+n,0>}),
/// each (n-1)x(n-1). Requires m_z and m_z + n on the ladder.
struct NonHermitianSet {
    Matrix f1_g0, f2_g0, f1_g1, f2_g1;
};
NonHermitianSet nonhermitian_hamiltonians(const LadderModel& model, double m_z);

/// Closed-form inverse of a 2x2 symmetric matrix [[E0, v],[v, E1]].
Matrix inverse_2x2_closed_form(const Complex& e0, const Complex& e1, const Complex& v);

/// Second-order effective-operator engine: per-rung evaluation of the
/// non-Hermitian inversions (expanded to the chain order n-2, which drops the
/// (G f)^2 denominators exactly as in the derivation), then a least-squares fit
/// of the rung amplitudes onto the spin-monomial basis.
EffectiveModel effective_model_second_order(const LadderModel& model);

/// n = 4 entry point: same engine, quartic chain, with the J+2J-2 / J-2J+2
/// diagonal corrections reported and unbalanced superradiance rates listed.
EffectiveModel effective_model_fourth_order_4body(const LadderModel& model);

/// Third-order average-Hamiltonian engine at kappa = 0 (n = 2 or 3): builds the
/// tone decomposition h_i e^{i f_i t} numerically on Dicke (x) Fock, applies the
/// time-averaging formula, and projects onto the photon vacuum.
EffectiveModel average_hamiltonian_third_order(const LadderModel& model);

/// Tone decomposition of the interaction-picture coupling Hamiltonian:
/// H_I(t) = sum_i (h_i^dag e^{i f_i t} + h.c.), all f_i > 0.
struct ToneTerm {
    Matrix h_dag;
    double freq;
    std::string label;
};
std::vector<ToneTerm> tone_decomposition(const LadderModel& model, const DickeSpace& space,
                                         int fock_dim);

/// Max relative difference across coefficients shared by two models.
double max_relative_coefficient_difference(const EffectiveModel& a, const EffectiveModel& b);

}  // namespace cavnb
