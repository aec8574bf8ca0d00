#include "cavnb/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cavnb {

namespace {

// x / (x^2 + (kappa/2)^2)
double lorentz(double x, double kappa) { return x / (x * x + 0.25 * kappa * kappa); }

}  // namespace

Complex intracavity_amplitude(double epsilon, double omega_minus_omega_c, double kappa) {
    const Complex den(omega_minus_omega_c, 0.5 * kappa);
    if (std::abs(den) == 0.0)
        throw std::domain_error("intracavity_amplitude: drive exactly on an undamped resonance");
    return epsilon / den;
}

void PhysicalParams::validate(int expected_tones) const {
    if (n_atoms < 1) throw std::invalid_argument("PhysicalParams: n_atoms must be >= 1");
    if (omega_z <= 0) throw std::invalid_argument("PhysicalParams: omega_z must be > 0");
    if (kappa < 0) throw std::invalid_argument("PhysicalParams: kappa must be >= 0");
    if (expected_tones >= 0 && static_cast<int>(tones.size()) != expected_tones) {
        std::ostringstream os;
        os << "PhysicalParams: expected " << expected_tones << " tones, got " << tones.size();
        throw std::invalid_argument(os.str());
    }
}

std::vector<std::string> PhysicalParams::check() const {
    std::vector<std::string> warnings;
    const double floor = 100.0 * std::max(kappa, omega_z);
    if (std::abs(delta_a) < floor)
        warnings.push_back("detuning delta_a is not large compared to kappa and omega_z");
    return warnings;
}

double derive_G(const PhysicalParams& p) {
    if (p.delta_a == 0.0) throw std::domain_error("derive_G: delta_a must be nonzero");
    return p.g0 * p.g0 / (4.0 * p.delta_a);
}

double dispersive_shift(const PhysicalParams& p) {
    if (p.delta_a == 0.0) throw std::domain_error("dispersive_shift: delta_a must be nonzero");
    return p.n_atoms * p.g0 * p.g0 / (2.0 * p.delta_a);
}

PhysicalParams symmetric_configuration(int n_atoms, double g0, double delta_a, double kappa,
                                       double omega_z, int n_body, double alpha1_mag,
                                       double alpha2_mag, double tone_phase, double delta,
                                       double phi_d, std::optional<double> delta_c2) {
    if (n_body < 2 || n_body > 4)
        throw std::invalid_argument("symmetric_configuration: n_body must be 2, 3 or 4");
    double dc2;
    if (delta_c2) {
        dc2 = *delta_c2;
    } else if (n_body == 3) {
        dc2 = 0.5 * omega_z;  // Delta_c2 = -Delta_c1 = omega_z/2
    } else {
        dc2 = 1.5 * omega_z;  // keeps every intermediate sideband off resonance
    }
    const double nu2_res = dc2 + omega_z;
    const double nu1 = nu2_res - n_body * omega_z;
    PhysicalParams p;
    p.n_atoms = n_atoms;
    p.g0 = g0;
    p.delta_a = delta_a;
    p.kappa = kappa;
    p.omega_z = omega_z;
    p.phi_d = phi_d;
    p.six_photon_detuning = delta;
    p.tones.push_back({Complex(alpha1_mag, 0), nu1});
    p.tones.push_back({std::polar(alpha2_mag, tone_phase), nu2_res + delta});
    return p;
}

std::pair<double, double> sideband_detunings(const PhysicalParams& p) {
    p.validate(2);
    return {p.tones[0].offset + p.omega_z, p.tones[1].offset - p.omega_z};
}

double chi3_closed_form(const PhysicalParams& p) {
    const auto [dc1, dc2] = sideband_detunings(p);
    if (dc1 == 0.0 && dc2 == 0.0 && p.kappa == 0.0)
        throw std::domain_error("chi3_closed_form: both detunings and kappa vanish");
    const double G = derive_G(p);
    const double amp = std::abs(p.tones[0].alpha * p.tones[1].alpha);
    const Complex den = Complex(dc1, 0.5 * p.kappa) * Complex(dc2, 0.5 * p.kappa);
    return G * G * G * amp * (1.0 / den).real();
}

double chi4_closed_form(const PhysicalParams& p) {
    const auto [dc1, dc2] = sideband_detunings(p);
    (void)dc1;
    const double G = derive_G(p);
    const double amp = std::abs(p.tones[0].alpha * p.tones[1].alpha);
    Complex prod = 1.0;
    for (int k = 0; k < 3; ++k) {
        const Complex e(k * p.omega_z - dc2, -0.5 * p.kappa);
        if (std::abs(e) == 0.0)
            throw std::domain_error("chi4_closed_form: intermediate sideband on resonance");
        prod *= e;
    }
    return -G * G * G * G * amp * (1.0 / prod).real();
}

std::pair<double, double> chi2_exchange_coefficients(const PhysicalParams& p) {
    const auto [dc1, dc2] = sideband_detunings(p);
    const double G = derive_G(p);
    const double a1 = std::norm(p.tones[0].alpha);
    const double a2 = std::norm(p.tones[1].alpha);
    const double plus_minus =
        G * G * (a1 * lorentz(dc1, p.kappa) + a2 * lorentz(dc2 + 2.0 * p.omega_z, p.kappa));
    const double minus_plus =
        G * G * (a1 * lorentz(dc1 - 2.0 * p.omega_z, p.kappa) + a2 * lorentz(dc2, p.kappa));
    return {plus_minus, minus_plus};
}

double collective_decay_rate(const PhysicalParams& p) {
    const auto [dc1, dc2] = sideband_detunings(p);
    (void)dc2;
    const double G = derive_G(p);
    const double a1 = std::norm(p.tones[0].alpha);
    return G * G * p.kappa * a1 / (dc1 * dc1 + 0.25 * p.kappa * p.kappa);
}

double ground_drive_jz_shift(double G, double omega_z, Complex alpha1, Complex alpha2,
                             double beat_minus_omega_z, double beat_plus_omega_z) {
    const double c = std::norm(alpha1) + std::norm(alpha2);
    const double cross = std::norm(alpha1 * alpha2);
    return 2.0 * G * G *
           (c * c / omega_z + cross / beat_plus_omega_z - cross / beat_minus_omega_z);
}

double ground_drive_jz_shift(const PhysicalParams& p, int n_body) {
    p.validate(2);
    const double beat = p.tones[1].offset - p.tones[0].offset;
    (void)n_body;
    return ground_drive_jz_shift(derive_G(p), p.omega_z, p.tones[0].alpha, p.tones[1].alpha,
                                 beat - p.omega_z, beat + p.omega_z);
}

double calibrate_alpha_product(const PhysicalParams& geometry, double chi_collective_target,
                               int n_body) {
    PhysicalParams unit = geometry;
    unit.tones[0].alpha = 1.0;
    unit.tones[1].alpha = 1.0;
    const double chi_unit = (n_body == 4) ? chi4_closed_form(unit) : chi3_closed_form(unit);
    if (chi_unit == 0.0)
        throw std::domain_error("calibrate_alpha_product: geometry gives zero coupling");
    const double enhancement = std::pow(static_cast<double>(geometry.n_atoms), n_body - 1);
    return std::abs(chi_collective_target) / (std::abs(chi_unit) * enhancement);
}

double balance_exchange_ratio(const PhysicalParams& p) {
    const auto [dc1, dc2] = sideband_detunings(p);
    const double b1 = lorentz(dc1, p.kappa) + lorentz(dc1 - 2.0 * p.omega_z, p.kappa);
    const double b2 = lorentz(dc2, p.kappa) + lorentz(dc2 + 2.0 * p.omega_z, p.kappa);
    if (b2 == 0.0 || -b1 / b2 <= 0.0)
        throw std::domain_error("balance_exchange_ratio: tones cannot cancel the exchange");
    return -b1 / b2;
}

DerivedCouplings derive_couplings(const PhysicalParams& p, int n_body) {
    p.validate(2);
    DerivedCouplings d;
    d.n_body = n_body;
    d.G = derive_G(p);
    std::tie(d.delta_c1, d.delta_c2) = sideband_detunings(p);
    std::tie(d.chi2_plus_minus, d.chi2_minus_plus) = chi2_exchange_coefficients(p);
    d.net_exchange = d.chi2_plus_minus + d.chi2_minus_plus;
    d.gamma_collective = collective_decay_rate(p);
    if (n_body == 3)
        d.chi_n = chi3_closed_form(p);
    else if (n_body == 4)
        d.chi_n = chi4_closed_form(p);
    d.chi_collective = d.chi_n * std::pow(static_cast<double>(p.n_atoms), n_body - 1);
    d.jz_drive_shift = ground_drive_jz_shift(p, n_body);
    d.warnings = p.check();
    const double gsqrtn = std::abs(d.G) * std::sqrt(static_cast<double>(p.n_atoms));
    const double dcmin = std::min(std::abs(d.delta_c1), std::abs(d.delta_c2));
    if (dcmin > 0 && gsqrtn / dcmin > 0.1)
        d.warnings.push_back("perturbative ratio G sqrt(N)/|Delta_c| exceeds 0.1");
    return d;
}

}  // namespace cavnb
