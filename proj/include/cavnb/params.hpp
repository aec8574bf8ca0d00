#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cavnb/dicke.hpp"

namespace cavnb {

/// One classical dressing tone resolved to its intracavity amplitude.
/// `offset` is the tone frequency relative to the shifted cavity resonance
/// omega_c' = omega_c + N g0^2 / (2 delta_a); the dispersive shift is applied
/// once at construction and never again.
struct DriveTone {
    Complex alpha;   ///< dimensionless intracavity field
    double offset;   ///< omega_tone - omega_c', rad/s
};

/// alpha = epsilon / (i kappa/2 + (omega - omega_c)), omega_c the bare resonance.
Complex intracavity_amplitude(double epsilon, double omega_minus_omega_c, double kappa);

struct PhysicalParams {
    int n_atoms = 0;
    double g0 = 0;       ///< rad/s, half of the quoted 2 g0
    double delta_a = 0;  ///< omega_c - omega_a, rad/s
    double kappa = 0;    ///< cavity power decay, rad/s
    double omega_z = 0;  ///< two-photon splitting, rad/s
    double phi_d = 0;    ///< interaction phase, radians
    double six_photon_detuning = 0;  ///< delta = (omega2-omega1) - n omega_z, rad/s
    std::vector<DriveTone> tones;

    void validate(int expected_tones = 2) const;
    /// Soft checks (e.g. |delta_a| < 100 max(kappa, omega_z)); returns warnings.
    std::vector<std::string> check() const;
};

double derive_G(const PhysicalParams& p);        ///< g0^2 / (4 delta_a)
double dispersive_shift(const PhysicalParams& p);///< N g0^2 / (2 delta_a)

/// Tone placement for the resonant n-body beat omega2 - omega1 = n omega_z + delta.
/// n = 3: sidebands symmetric about the shifted resonance (Delta_c2 = -Delta_c1 = omega_z/2),
/// i.e. tones at -(3/2) omega_z and +(3/2) omega_z.
/// n = 4: the scheme is non-symmetric; Delta_c2 defaults to +1.5 omega_z unless given.
/// tone_phase = arg(alpha1^* alpha2).
PhysicalParams symmetric_configuration(int n_atoms, double g0, double delta_a, double kappa,
                                       double omega_z, int n_body, double alpha1_mag,
                                       double alpha2_mag, double tone_phase = 0.0,
                                       double delta = 0.0, double phi_d = 0.0,
                                       std::optional<double> delta_c2 = std::nullopt);

struct DerivedCouplings {
    double G = 0;
    double delta_c1 = 0, delta_c2 = 0;
    int n_body = 3;
    double chi_n = 0;             ///< signed n-body coefficient (rad/s per spin-monomial)
    double chi2_plus_minus = 0;   ///< coefficient of J+J-
    double chi2_minus_plus = 0;   ///< coefficient of J-J+
    double net_exchange = 0;      ///< chi2_plus_minus + chi2_minus_plus
    double gamma_collective = 0;  ///< balanced superradiance rate per channel
    double chi_collective = 0;    ///< chi_n * N^{n-1}
    double jz_drive_shift = 0;    ///< ground-manifold light shift on Jz
    std::vector<std::string> warnings;
};

/// Sideband detunings from the tone offsets: Delta_c1 = nu1 + omega_z,
/// Delta_c2 = nu2 - omega_z.
std::pair<double, double> sideband_detunings(const PhysicalParams& p);

/// Eq.-(2)-style closed form: chi3 = G^3 |a1 a2| Re[1/((Dc1 + i k/2)(Dc2 + i k/2))].
double chi3_closed_form(const PhysicalParams& p);

/// Quartic analog with three intermediate sidebands:
/// chi4 = -G^4 |a1 a2| Re[1/(E0 E1 E2)], E_k = k omega_z - Dc2 - i kappa/2.
double chi4_closed_form(const PhysicalParams& p);

/// The two exchange coefficients of J+J- and J-J+ (Lorentzian-weighted sums
/// over |alpha_1|^2, |alpha_2|^2).
std::pair<double, double> chi2_exchange_coefficients(const PhysicalParams& p);

/// Balanced collective decay rate Gamma = G^2 kappa |a1|^2 / (Dc1^2 + (kappa/2)^2).
double collective_decay_rate(const PhysicalParams& p);

/// Drive-induced Jz light shift from the classical (cavity-free) coupling terms;
/// second-order in G, fourth-order in the drive amplitudes. Negligible at
/// experimental parameters but kept for small-system validation runs.
double ground_drive_jz_shift(double G, double omega_z, Complex alpha1, Complex alpha2,
                             double beat_minus_omega_z, double beat_plus_omega_z);
double ground_drive_jz_shift(const PhysicalParams& p, int n_body);

/// |alpha1 alpha2| solving chi_n N^{n-1} = chi_collective_target at fixed geometry.
double calibrate_alpha_product(const PhysicalParams& geometry, double chi_collective_target,
                               int n_body);

/// |alpha2/alpha1|^2 that nulls the net exchange coefficient for the given
/// tone geometry, or throws if the two tones cannot cancel.
double balance_exchange_ratio(const PhysicalParams& p);

DerivedCouplings derive_couplings(const PhysicalParams& p, int n_body);

}  // namespace cavnb
